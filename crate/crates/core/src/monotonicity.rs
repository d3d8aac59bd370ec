//! A-posteriori certificates for minimax optimality structure of a plan's
//! support.
//!
//! Pair monotonicity: for support entries (x, y) and (x', y'), swapping
//! targets must never lower the worse of the two costs. Cyclical
//! monotonicity strengthens this to every finite subset and every
//! permutation of its targets.
//!
//! The cyclical check runs in polynomial time via a cycle criterion: fix a
//! support entry e with value v_e and draw an arc a -> b between support
//! entries whenever reassigning a's source to b's target costs strictly
//! less than v_e (minus the tolerance). A directed cycle through e rotates
//! targets along itself so that every reassigned pair beats v_e, and since
//! e itself sits on the cycle the rotation strictly improves the subset's
//! worst cost: a violation, with the cycle as witness. Conversely any
//! violating subset-permutation pair contains such a cycle through its
//! worst entry, so scanning all pivots is complete.

use crate::costs::Cost;
use crate::measures::{Coupling, CouplingEntry, Point};

/// Entries at or below this mass are not part of the certified support.
pub const SUPPORT_MASS_FLOOR: f64 = 1e-12;

/// Improvements must beat the tolerance before they count as violations.
pub const DEFAULT_MONOTONE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum CertificateKind {
    PairMonotone,
    CyclicallyMonotone,
}

impl CertificateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateKind::PairMonotone => "pair-monotone",
            CertificateKind::CyclicallyMonotone => "cyclically-monotone",
        }
    }
}

/// Two support entries whose target swap improves the worse cost.
#[derive(Clone, Debug, serde::Serialize)]
pub struct PairWitness {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub own_max: f64,
    pub swapped_max: f64,
}

/// Support entries, in order, whose target rotation improves the worst cost.
/// The rotation sends source of `entries[t]` to target of `entries[t+1]`,
/// wrapping at the end.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CycleWitness {
    pub entries: Vec<(usize, usize)>,
    pub own_max: f64,
    pub permuted_max: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub enum MonotonicityWitness {
    Pair(PairWitness),
    Cycle(CycleWitness),
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct MonotonicityCertificate {
    pub kind: CertificateKind,
    pub holds: bool,
    pub tolerance: f64,
    pub support_size: usize,
    /// Pairs compared (pair check) or pivots scanned (cyclical check).
    pub work: usize,
    pub witness: Option<MonotonicityWitness>,
}

fn support_costs(plan: &Coupling, cost: &Cost) -> (Vec<CouplingEntry>, Vec<Vec<f64>>) {
    let support = plan.support(SUPPORT_MASS_FLOOR);
    let k = support.len();
    // cross[a][b]: cost of a's source paired with b's target.
    let mut cross = vec![vec![0.0; k]; k];
    for (a, ea) in support.iter().enumerate() {
        let x = plan.source().point(ea.i).coords();
        for (b, eb) in support.iter().enumerate() {
            let y = plan.target().point(eb.j).coords();
            cross[a][b] = cost.eval_slice(x, y);
        }
    }
    (support, cross)
}

/// Checks the pair condition over all unordered support pairs. Deterministic:
/// the witness is the first violation in lexicographic support order.
pub fn check_pair_monotone(plan: &Coupling, cost: &Cost, tol: f64) -> MonotonicityCertificate {
    let (support, cross) = support_costs(plan, cost);
    let k = support.len();
    let mut pairs = 0usize;
    for a in 0..k {
        for b in (a + 1)..k {
            pairs += 1;
            let own = cross[a][a].max(cross[b][b]);
            let swapped = cross[a][b].max(cross[b][a]);
            if own > swapped + tol {
                return MonotonicityCertificate {
                    kind: CertificateKind::PairMonotone,
                    holds: false,
                    tolerance: tol,
                    support_size: k,
                    work: pairs,
                    witness: Some(MonotonicityWitness::Pair(PairWitness {
                        first: (support[a].i, support[a].j),
                        second: (support[b].i, support[b].j),
                        own_max: own,
                        swapped_max: swapped,
                    })),
                };
            }
        }
    }
    MonotonicityCertificate {
        kind: CertificateKind::PairMonotone,
        holds: true,
        tolerance: tol,
        support_size: k,
        work: pairs,
        witness: None,
    }
}

/// Checks cyclical monotonicity by scanning every support entry as a pivot
/// and searching its improvement digraph for a cycle through the pivot.
pub fn check_cyclically_monotone(
    plan: &Coupling,
    cost: &Cost,
    tol: f64,
) -> MonotonicityCertificate {
    let (support, cross) = support_costs(plan, cost);
    let k = support.len();
    let mut pivots = 0usize;
    for e in 0..k {
        pivots += 1;
        let bound = cross[e][e] - tol;
        // BFS from e over arcs a -> b with cross[a][b] < bound, looking for
        // a walk back to e.
        let mut parent = vec![usize::MAX; k];
        let mut queue = std::collections::VecDeque::from([e]);
        let mut back_into_e_from = usize::MAX;
        'bfs: while let Some(a) = queue.pop_front() {
            for b in 0..k {
                if cross[a][b] >= bound {
                    continue;
                }
                if b == e {
                    back_into_e_from = a;
                    break 'bfs;
                }
                if parent[b] == usize::MAX {
                    parent[b] = a;
                    queue.push_back(b);
                }
            }
        }
        if back_into_e_from == usize::MAX {
            continue;
        }
        // Reconstruct e -> ... -> back_into_e_from, closing back to e.
        let mut rev = vec![back_into_e_from];
        while *rev.last().unwrap() != e {
            rev.push(parent[*rev.last().unwrap()]);
        }
        rev.reverse();
        let own_max = rev.iter().map(|&a| cross[a][a]).fold(f64::NEG_INFINITY, f64::max);
        let permuted_max = (0..rev.len())
            .map(|t| cross[rev[t]][rev[(t + 1) % rev.len()]])
            .fold(f64::NEG_INFINITY, f64::max);
        debug_assert!(permuted_max < own_max - tol * 0.5);
        return MonotonicityCertificate {
            kind: CertificateKind::CyclicallyMonotone,
            holds: false,
            tolerance: tol,
            support_size: k,
            work: pivots,
            witness: Some(MonotonicityWitness::Cycle(CycleWitness {
                entries: rev.iter().map(|&a| (support[a].i, support[a].j)).collect(),
                own_max,
                permuted_max,
            })),
        };
    }
    MonotonicityCertificate {
        kind: CertificateKind::CyclicallyMonotone,
        holds: true,
        tolerance: tol,
        support_size: k,
        work: pivots,
        witness: None,
    }
}

/// Exhaustive cyclical-monotonicity violation search: every subset of the
/// support (as a cycle seed) and every cyclic order of it, up to `max_len`
/// entries. Independent of the digraph criterion; sizes beyond ~10 support
/// entries get expensive.
pub fn exhaustive_cycle_violation(
    plan: &Coupling,
    cost: &Cost,
    tol: f64,
    max_len: usize,
) -> Option<CycleWitness> {
    let (support, cross) = support_costs(plan, cost);
    let k = support.len();
    let mut best: Option<CycleWitness> = None;
    // Cycles are enumerated with their smallest member first, remaining
    // members permuted, so each cyclic order appears exactly once.
    let mut chosen: Vec<usize> = Vec::new();
    for len in 2..=max_len.min(k) {
        for first in 0..k {
            chosen.clear();
            chosen.push(first);
            let mut rest: Vec<usize> = ((first + 1)..k).collect();
            enumerate_cycles(&mut chosen, &mut rest, len, &mut |cycle| {
                let own_max =
                    cycle.iter().map(|&a| cross[a][a]).fold(f64::NEG_INFINITY, f64::max);
                let permuted_max = (0..cycle.len())
                    .map(|t| cross[cycle[t]][cycle[(t + 1) % cycle.len()]])
                    .fold(f64::NEG_INFINITY, f64::max);
                if own_max > permuted_max + tol && best.is_none() {
                    best = Some(CycleWitness {
                        entries: cycle.iter().map(|&a| (support[a].i, support[a].j)).collect(),
                        own_max,
                        permuted_max,
                    });
                }
            });
            if best.is_some() {
                return best;
            }
        }
    }
    best
}

fn enumerate_cycles(
    chosen: &mut Vec<usize>,
    rest: &mut Vec<usize>,
    len: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if chosen.len() == len {
        visit(chosen);
        return;
    }
    for idx in 0..rest.len() {
        let item = rest.remove(idx);
        chosen.push(item);
        enumerate_cycles(chosen, rest, len, visit);
        chosen.pop();
        rest.insert(idx, item);
    }
}

/// Improvement search for a candidate pairing (which need not be in the
/// support): the first support entry (x', y'), in lexicographic support
/// order, with max{c(x', y), c(x, y')} < max{c(x, y), c(x', y')} - tol.
/// `None` means the candidate cannot be strictly improved against this plan,
/// which is exactly what pair monotonicity promises for support candidates.
pub fn find_improving_pair(
    plan: &Coupling,
    cost: &Cost,
    x_index: usize,
    y_index: usize,
    tol: f64,
) -> Option<(usize, usize)> {
    let x = plan.source().point(x_index).coords();
    let y = plan.target().point(y_index).coords();
    let candidate = cost.eval_slice(x, y);
    for e in plan.support(SUPPORT_MASS_FLOOR) {
        let xp = plan.source().point(e.i).coords();
        let yp = plan.target().point(e.j).coords();
        let own = candidate.max(cost.eval_slice(xp, yp));
        let swapped = cost.eval_slice(xp, y).max(cost.eval_slice(x, yp));
        if swapped < own - tol {
            return Some((e.i, e.j));
        }
    }
    None
}

/// Re-evaluates a witness against the plan it came from; tests and report
/// writers use this to keep certificates honest.
pub fn witness_reproduces(
    plan: &Coupling,
    cost: &Cost,
    witness: &MonotonicityWitness,
    tol: f64,
) -> bool {
    let eval = |i: usize, j: usize| {
        cost.eval_slice(plan.source().point(i).coords(), plan.target().point(j).coords())
    };
    match witness {
        MonotonicityWitness::Pair(w) => {
            let own = eval(w.first.0, w.first.1).max(eval(w.second.0, w.second.1));
            let swapped = eval(w.first.0, w.second.1).max(eval(w.second.0, w.first.1));
            own > swapped + tol * 0.1
        }
        MonotonicityWitness::Cycle(w) => {
            let n = w.entries.len();
            if n < 2 {
                return false;
            }
            let own = w
                .entries
                .iter()
                .map(|&(i, j)| eval(i, j))
                .fold(f64::NEG_INFINITY, f64::max);
            let permuted = (0..n)
                .map(|t| eval(w.entries[t].0, w.entries[(t + 1) % n].1))
                .fold(f64::NEG_INFINITY, f64::max);
            own > permuted + tol * 0.1
        }
    }
}

/// Source indices sending mass into the closed Euclidean ball of radius
/// `radius` around `center`, sorted ascending.
pub fn destination_preimage(plan: &Coupling, center: &Point, radius: f64) -> Vec<usize> {
    let mut hit: Vec<usize> = plan
        .support(SUPPORT_MASS_FLOOR)
        .iter()
        .filter(|e| plan.target().point(e.j).dist(center) <= radius)
        .map(|e| e.i)
        .collect();
    hit.sort_unstable();
    hit.dedup();
    hit
}
