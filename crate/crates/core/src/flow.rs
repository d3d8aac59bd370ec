//! Integer flow machinery shared by the bottleneck and p-norm solvers.
//!
//! Probability weights are converted to integer units once, up front, so
//! every feasibility question becomes an exact max-flow question and every
//! transport plan has exactly matching marginals by construction. Two
//! integerizations are tried in order:
//!
//! 1. a joint small-denominator snap: if some L <= 65536 makes every weight
//!    of both measures an integer multiple of 1/L, use round(w*L) blocks of
//!    floor(SCALE/L) units. Uniform and simple rational weights take this
//!    path and reproduce the continuous problem exactly.
//! 2. largest-remainder rounding to SCALE total units per side, with a
//!    minimum of one unit per atom.
//!
//! Both paths give the two sides identical totals, which max-flow needs.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use num_bigint::BigUint;

/// Unit budget per side. At 1e12 the largest-remainder path distorts any
/// marginal by at most 2e-12, well inside the 1e-9 marginal tolerance.
pub(crate) const WEIGHT_SCALE: u64 = 1_000_000_000_000;

const SNAP_DENOM_MAX: u64 = 65_536;
const SNAP_TOL: f64 = 1e-6;

const INF_CAP: u64 = u64::MAX / 4;

/// Converts both weight vectors to integer units with equal totals.
pub(crate) fn integerize_weights(mu: &[f64], nu: &[f64]) -> (Vec<u64>, Vec<u64>) {
    if let Some(l) = common_denominator(mu, nu) {
        let block = WEIGHT_SCALE / l;
        let to_units = |w: &[f64]| -> Vec<u64> {
            w.iter().map(|&x| (x * l as f64).round() as u64 * block).collect()
        };
        return (to_units(mu), to_units(nu));
    }
    (largest_remainder(mu), largest_remainder(nu))
}

/// Smallest L <= 65536 with w*L integral (to SNAP_TOL) and >= 1 for every
/// weight on both sides, or None.
fn common_denominator(mu: &[f64], nu: &[f64]) -> Option<u64> {
    'outer: for l in 1..=SNAP_DENOM_MAX {
        let lf = l as f64;
        let mut totals = [0u64; 2];
        for (side, w) in [mu, nu].iter().enumerate() {
            for &x in w.iter() {
                let scaled = x * lf;
                let r = scaled.round();
                if (scaled - r).abs() > SNAP_TOL || r < 0.5 {
                    continue 'outer;
                }
                totals[side] += r as u64;
            }
        }
        if totals[0] == l && totals[1] == l {
            return Some(l);
        }
    }
    None
}

/// Rounds to WEIGHT_SCALE total units: floors, then hands the shortfall out
/// one unit at a time by descending fractional remainder (index ascending on
/// ties). Atoms left at zero steal a unit from the largest atom so every
/// point of the support stays served.
fn largest_remainder(w: &[f64]) -> Vec<u64> {
    let scale = WEIGHT_SCALE as f64;
    let mut units: Vec<u64> = Vec::with_capacity(w.len());
    let mut rem: Vec<(usize, f64)> = Vec::with_capacity(w.len());
    let mut assigned = 0u64;
    for (i, &x) in w.iter().enumerate() {
        let exact = x * scale;
        let fl = exact.floor();
        units.push(fl as u64);
        assigned += fl as u64;
        rem.push((i, exact - fl));
    }
    rem.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut shortfall = WEIGHT_SCALE.saturating_sub(assigned) as usize;
    // Rounding error can only leave a shortfall below the atom count.
    for &(i, _) in rem.iter().cycle().take(shortfall.min(rem.len() * 2)) {
        if shortfall == 0 {
            break;
        }
        units[i] += 1;
        shortfall -= 1;
    }
    for i in 0..units.len() {
        if units[i] == 0 {
            let donor = (0..units.len()).max_by_key(|&k| units[k]).unwrap();
            debug_assert!(units[donor] > 1);
            units[donor] -= 1;
            units[i] += 1;
        }
    }
    debug_assert_eq!(units.iter().sum::<u64>(), WEIGHT_SCALE);
    units
}

// ---------------------------------------------------------------------------
// Dinic max-flow for threshold feasibility.
// ---------------------------------------------------------------------------

struct FlowGraph {
    to: Vec<usize>,
    cap: Vec<u64>,
    init_cap: Vec<u64>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(nodes: usize) -> FlowGraph {
        FlowGraph { to: Vec::new(), cap: Vec::new(), init_cap: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    fn add_arc(&mut self, u: usize, v: usize, cap: u64) -> usize {
        let id = self.to.len();
        self.to.push(v);
        self.cap.push(cap);
        self.init_cap.push(cap);
        self.adj[u].push(id);
        self.to.push(u);
        self.cap.push(0);
        self.init_cap.push(0);
        self.adj[v].push(id + 1);
        id
    }

    fn flow_on(&self, arc: usize) -> u64 {
        self.init_cap[arc] - self.cap[arc]
    }
}

/// Result of a feasibility run at one cost threshold.
pub(crate) struct FeasibilityOutcome {
    pub max_flow: u64,
    /// (source index, target index, units) for saturating flows; empty units dropped.
    pub plan_units: Vec<(usize, usize, u64)>,
}

/// Maximum flow through the bipartite graph that only keeps arcs `allowed`
/// admits. Feasible iff max_flow equals the common unit total.
pub(crate) fn feasibility_flow(
    mu_units: &[u64],
    nu_units: &[u64],
    allowed: impl Fn(usize, usize) -> bool,
) -> FeasibilityOutcome {
    let m = mu_units.len();
    let n = nu_units.len();
    let s = 0;
    let t = m + n + 1;
    let mut g = FlowGraph::new(m + n + 2);
    for (i, &u) in mu_units.iter().enumerate() {
        g.add_arc(s, 1 + i, u);
    }
    let mut pair_arcs: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if allowed(i, j) {
                let id = g.add_arc(1 + i, 1 + m + j, INF_CAP);
                pair_arcs.push((i, j, id));
            }
        }
    }
    for (j, &u) in nu_units.iter().enumerate() {
        g.add_arc(1 + m + j, t, u);
    }
    let max_flow = dinic(&mut g, s, t);
    let mut plan_units = Vec::new();
    for &(i, j, id) in &pair_arcs {
        let f = g.flow_on(id);
        if f > 0 {
            plan_units.push((i, j, f));
        }
    }
    FeasibilityOutcome { max_flow, plan_units }
}

fn dinic(g: &mut FlowGraph, s: usize, t: usize) -> u64 {
    let n = g.adj.len();
    let mut total = 0u64;
    loop {
        // BFS level graph.
        let mut level = vec![usize::MAX; n];
        level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &g.adj[u] {
                let v = g.to[e];
                if g.cap[e] > 0 && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if level[t] == usize::MAX {
            return total;
        }
        // Blocking flow with per-node arc cursors.
        let mut iter = vec![0usize; n];
        loop {
            let pushed = dinic_dfs(g, s, t, INF_CAP, &level, &mut iter);
            if pushed == 0 {
                break;
            }
            total += pushed;
        }
    }
}

fn dinic_dfs(
    g: &mut FlowGraph,
    u: usize,
    t: usize,
    limit: u64,
    level: &[usize],
    iter: &mut [usize],
) -> u64 {
    if u == t {
        return limit;
    }
    while iter[u] < g.adj[u].len() {
        let e = g.adj[u][iter[u]];
        let v = g.to[e];
        if g.cap[e] > 0 && level[v] == level[u] + 1 {
            let pushed = dinic_dfs(g, v, t, limit.min(g.cap[e]), level, iter);
            if pushed > 0 {
                g.cap[e] -= pushed;
                g.cap[e ^ 1] += pushed;
                return pushed;
            }
        }
        iter[u] += 1;
    }
    0
}

// ---------------------------------------------------------------------------
// Min-cost flow with exact integer primary costs.
// ---------------------------------------------------------------------------
//
// The per-unit arc cost is chat^p for a normalized cost chat in [0, 1]. In
// f64 these powers span far more than 16 decimal digits once p is large, so
// any float path sum silently drops every band below its leading term and the
// solver stops seeing most of the instance. Every f64 is a dyadic rational
// though, so chat^p for integer p is m^p * 2^(e*p) exactly, with chat =
// m * 2^e the mantissa/exponent split. Aligning all arcs to the smallest
// exponent turns each cost into a plain (big) integer, and integer sums keep
// every band, no matter how far apart the magnitudes sit.

/// Normalized costs below 2^-64 collapse to 2^-64 in the primary; they are
/// indistinguishable at any tolerance anyone certifies at, and the secondary
/// still orders them. Keeps the alignment shift bounded.
const CHAT_FLOOR_EXP: i64 = -64;

/// Largest integer exponent handled exactly; beyond it (and for fractional
/// p) the f64 power image is embedded exactly instead, which still keeps
/// sums absorption-free and only rounds per arc.
const MAX_EXACT_EXPONENT: f64 = 1024.0;

/// Splits a positive finite f64 into (mantissa, exponent) with x = m * 2^e.
fn mantissa_exponent(x: f64) -> (u64, i64) {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_field == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_field - 1075)
    }
}

fn upow(base: u64, mut exp: u32) -> BigUint {
    let mut acc = BigUint::from(1u32);
    let mut sq = BigUint::from(base);
    loop {
        if exp & 1 == 1 {
            acc *= &sq;
        }
        exp >>= 1;
        if exp == 0 {
            return acc;
        }
        sq = &sq * &sq;
    }
}

/// Exact integer images of chat^p for every distinct chat, plus the chat
/// itself as a float tie-breaker. Zero cost maps to integer zero.
fn integerize_powers(chats: &[f64], p: f64) -> Vec<ExactCost> {
    let exact = p.fract() == 0.0 && p <= MAX_EXACT_EXPONENT;
    // (mantissa^p, p*e) per arc, before alignment.
    let parts: Vec<Option<(BigUint, i64)>> = chats
        .iter()
        .map(|&chat| {
            if chat == 0.0 {
                return None;
            }
            if exact {
                let (m, e) = if chat < (CHAT_FLOOR_EXP as f64).exp2() {
                    (1u64, CHAT_FLOOR_EXP)
                } else {
                    mantissa_exponent(chat)
                };
                Some((upow(m, p as u32), e * p as i64))
            } else {
                let v = chat.powf(p).max(f64::MIN_POSITIVE);
                let (m, e) = mantissa_exponent(v);
                Some((BigUint::from(m), e))
            }
        })
        .collect();
    let e_min = parts.iter().flatten().map(|&(_, e)| e).min().unwrap_or(0);
    parts
        .into_iter()
        .zip(chats)
        .map(|(part, &chat)| match part {
            None => ExactCost::zero(),
            Some((m, e)) => ExactCost { prim: m << ((e - e_min) as usize), tie: chat },
        })
        .collect()
}

/// Lexicographic (exact integer, float) cost. Distances and potentials
/// accumulate both parts; comparisons settle on the integer first.
#[derive(Clone, Debug)]
struct ExactCost {
    prim: BigUint,
    tie: f64,
}

impl ExactCost {
    fn zero() -> ExactCost {
        ExactCost { prim: BigUint::default(), tie: 0.0 }
    }

    fn add(&self, o: &ExactCost) -> ExactCost {
        ExactCost { prim: &self.prim + &o.prim, tie: self.tie + o.tie }
    }

    fn cmp_lex(&self, o: &ExactCost) -> std::cmp::Ordering {
        self.prim.cmp(&o.prim).then(self.tie.total_cmp(&o.tie))
    }
}

impl PartialEq for ExactCost {
    fn eq(&self, o: &ExactCost) -> bool {
        self.cmp_lex(o).is_eq()
    }
}

impl Eq for ExactCost {}

impl PartialOrd for ExactCost {
    fn partial_cmp(&self, o: &ExactCost) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for ExactCost {
    fn cmp(&self, o: &ExactCost) -> std::cmp::Ordering {
        self.cmp_lex(o)
    }
}

/// cost + pot_u - pot_v, clamped at lexicographic zero. The integer part is
/// exact so a negative difference cannot arise from valid potentials; the
/// float tie can drift a hair under zero and is clamped only when the
/// integer part vanishes (when it does not, a negative tie is meaningful).
fn reduced_forward(cost: &ExactCost, pot_u: &ExactCost, pot_v: &ExactCost) -> ExactCost {
    let lift = &cost.prim + &pot_u.prim;
    let prim = if lift >= pot_v.prim { lift - &pot_v.prim } else { BigUint::default() };
    let mut tie = cost.tie + pot_u.tie - pot_v.tie;
    if prim.bits() == 0 && tie < 0.0 {
        tie = 0.0;
    }
    ExactCost { prim, tie }
}

/// -cost + pot_u - pot_v for the residual of a forward arc.
fn reduced_reverse(cost: &ExactCost, pot_u: &ExactCost, pot_v: &ExactCost) -> ExactCost {
    let drop = &cost.prim + &pot_v.prim;
    let prim = if pot_u.prim >= drop { &pot_u.prim - &drop } else { BigUint::default() };
    let mut tie = pot_u.tie - cost.tie - pot_v.tie;
    if prim.bits() == 0 && tie < 0.0 {
        tie = 0.0;
    }
    ExactCost { prim, tie }
}

/// Order in which the per-source target arcs are wired into the network.
/// Optimal value never depends on it; among tied optima the successive
/// shortest path solver returns whichever the arc order reaches first, which
/// makes `Reversed` a cheap independent pipeline for degeneracy probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcOrder {
    Forward,
    Reversed,
}

/// Exact-marginal min-cost transport in integer units, minimizing the sum of
/// mass times chat(i, j)^p with `chat` normalized to [0, 1]; both unit totals
/// must agree. Successive shortest paths with Dijkstra and node potentials;
/// at most m+n augmentations since every path saturates a side arc. The arc
/// powers are exact integers (see the module notes above), so the plan is a
/// true optimum at every p, not just where f64 sums survive.
pub(crate) fn min_cost_transport(
    mu_units: &[u64],
    nu_units: &[u64],
    chat: impl Fn(usize, usize) -> f64,
    p: f64,
    order: ArcOrder,
) -> Vec<(usize, usize, u64)> {
    let m = mu_units.len();
    let n = nu_units.len();
    debug_assert_eq!(mu_units.iter().sum::<u64>(), nu_units.iter().sum::<u64>());
    let s = 0;
    let t = m + n + 1;
    let nodes = m + n + 2;

    // Distinct chats only: grids repeat a handful of displacement lengths,
    // and one bignum power per distinct value keeps the setup cheap.
    let mut distinct: Vec<f64> = vec![0.0];
    let mut seen: HashMap<u64, u32> = HashMap::from([(0.0f64.to_bits(), 0)]);
    let pair_idx: Vec<Vec<u32>> = (0..m)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = chat(i, j);
                    debug_assert!((0.0..=1.0).contains(&c), "normalized cost out of range: {c}");
                    *seen.entry(c.to_bits()).or_insert_with(|| {
                        distinct.push(c);
                        distinct.len() as u32 - 1
                    })
                })
                .collect()
        })
        .collect();
    let table = integerize_powers(&distinct, p);

    let mut to: Vec<usize> = Vec::new();
    let mut cap: Vec<u64> = Vec::new();
    let mut init_cap: Vec<u64> = Vec::new();
    let mut cost_idx: Vec<u32> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let add = |u: usize,
                   v: usize,
                   c: u64,
                   w: u32,
                   to: &mut Vec<usize>,
                   cap: &mut Vec<u64>,
                   init_cap: &mut Vec<u64>,
                   cost_idx: &mut Vec<u32>,
                   adj: &mut Vec<Vec<usize>>|
     -> usize {
        let id = to.len();
        to.push(v);
        cap.push(c);
        init_cap.push(c);
        adj[u].push(id);
        to.push(u);
        cap.push(0);
        init_cap.push(0);
        cost_idx.push(w);
        adj[v].push(id + 1);
        id
    };

    for (i, &u) in mu_units.iter().enumerate() {
        add(s, 1 + i, u, 0, &mut to, &mut cap, &mut init_cap, &mut cost_idx, &mut adj);
    }
    let mut pair_arcs: Vec<(usize, usize, usize)> = Vec::new();
    for (i, idx_row) in pair_idx.iter().enumerate() {
        let js: Vec<usize> = match order {
            ArcOrder::Forward => (0..n).collect(),
            ArcOrder::Reversed => (0..n).rev().collect(),
        };
        for j in js {
            let id = add(
                1 + i,
                1 + m + j,
                INF_CAP,
                idx_row[j],
                &mut to,
                &mut cap,
                &mut init_cap,
                &mut cost_idx,
                &mut adj,
            );
            pair_arcs.push((i, j, id));
        }
    }
    for (j, &u) in nu_units.iter().enumerate() {
        add(1 + m + j, t, u, 0, &mut to, &mut cap, &mut init_cap, &mut cost_idx, &mut adj);
    }

    let mut potential: Vec<ExactCost> = (0..nodes).map(|_| ExactCost::zero()).collect();
    let mut remaining: u64 = mu_units.iter().sum();
    while remaining > 0 {
        // Dijkstra on reduced costs. Ties pop in insertion order so the arc
        // wiring order decides among equally short paths.
        let mut dist: Vec<Option<ExactCost>> = vec![None; nodes];
        let mut done = vec![false; nodes];
        let mut prev_arc = vec![usize::MAX; nodes];
        dist[s] = Some(ExactCost::zero());
        let mut seq = 0u64;
        let mut heap: BinaryHeap<Reverse<(ExactCost, u64, usize)>> = BinaryHeap::new();
        heap.push(Reverse((ExactCost::zero(), seq, s)));
        while let Some(Reverse((d, _, u))) = heap.pop() {
            if std::mem::replace(&mut done[u], true) {
                continue;
            }
            for &e in &adj[u] {
                if cap[e] == 0 {
                    continue;
                }
                let v = to[e];
                if done[v] {
                    continue;
                }
                let c = &table[cost_idx[e >> 1] as usize];
                let reduced = if e & 1 == 0 {
                    reduced_forward(c, &potential[u], &potential[v])
                } else {
                    reduced_reverse(c, &potential[u], &potential[v])
                };
                let nd = d.add(&reduced);
                if dist[v].as_ref().is_none_or(|dv| nd.cmp_lex(dv).is_lt()) {
                    dist[v] = Some(nd.clone());
                    prev_arc[v] = e;
                    seq += 1;
                    heap.push(Reverse((nd, seq, v)));
                }
            }
        }
        assert!(dist[t].is_some(), "transport network must stay connected");
        for v in 0..nodes {
            if let Some(dv) = &dist[v] {
                potential[v] = potential[v].add(dv);
            }
        }
        // Bottleneck along the path, then augment.
        let mut push = remaining;
        let mut v = t;
        while v != s {
            let e = prev_arc[v];
            push = push.min(cap[e]);
            v = to[e ^ 1];
        }
        debug_assert!(push > 0);
        let mut v = t;
        while v != s {
            let e = prev_arc[v];
            cap[e] -= push;
            cap[e ^ 1] += push;
            v = to[e ^ 1];
        }
        remaining -= push;
    }

    let mut plan = Vec::new();
    for &(i, j, id) in &pair_arcs {
        let f = init_cap[id] - cap[id];
        if f > 0 {
            plan.push((i, j, f));
        }
    }
    plan.sort_unstable_by_key(|&(i, j, _)| (i, j));
    plan
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_weights_snap_to_exact_units() {
        let mu = vec![1.0 / 3.0; 3];
        let nu = vec![1.0 / 3.0; 3];
        let (a, b) = integerize_weights(&mu, &nu);
        assert_eq!(a, vec![WEIGHT_SCALE / 3; 3]);
        assert_eq!(a, b);
    }

    #[test]
    fn mixed_rationals_share_a_denominator() {
        let mu = vec![0.5, 0.25, 0.25];
        let nu = vec![1.0 / 6.0; 6];
        let (a, b) = integerize_weights(&mu, &nu);
        // L = 12 works for both sides: block = 83_333_333.
        let block = WEIGHT_SCALE / 12;
        assert_eq!(a, vec![6 * block, 3 * block, 3 * block]);
        assert_eq!(b, vec![2 * block; 6]);
        assert_eq!(a.iter().sum::<u64>(), b.iter().sum::<u64>());
    }

    #[test]
    fn irrational_weights_fall_back_to_largest_remainder() {
        let raw = [0.3 + 1e-4 * std::f64::consts::PI, 0.5, 0.2 - 1e-4 * std::f64::consts::PI];
        let sum: f64 = raw.iter().sum();
        let mu: Vec<f64> = raw.iter().map(|x| x / sum).collect();
        let nu = vec![0.5, 0.5];
        let (a, b) = integerize_weights(&mu, &nu);
        assert_eq!(a.iter().sum::<u64>(), WEIGHT_SCALE);
        assert_eq!(b.iter().sum::<u64>(), WEIGHT_SCALE);
        assert!(a.iter().all(|&u| u >= 1));
    }

    #[test]
    fn tiny_weight_still_gets_a_unit() {
        let eps = 1e-13;
        let mu = vec![1.0 - eps, eps];
        let nu = vec![1.0];
        let (a, b) = integerize_weights(&mu, &nu);
        assert!(a[1] >= 1);
        assert_eq!(a.iter().sum::<u64>(), b.iter().sum::<u64>());
    }

    #[test]
    fn max_flow_saturates_complete_graph() {
        let mu = vec![400, 600];
        let nu = vec![500, 500];
        let out = feasibility_flow(&mu, &nu, |_, _| true);
        assert_eq!(out.max_flow, 1000);
        let (mut row, mut col) = (vec![0u64; 2], vec![0u64; 2]);
        for (i, j, f) in out.plan_units {
            row[i] += f;
            col[j] += f;
        }
        assert_eq!(row, mu);
        assert_eq!(col, nu);
    }

    #[test]
    fn max_flow_detects_infeasible_threshold() {
        let mu = vec![700, 300];
        let nu = vec![500, 500];
        // Source 0 may only reach target 0: 200 units stuck.
        let out = feasibility_flow(&mu, &nu, |i, j| i == 1 || j == 0);
        assert_eq!(out.max_flow, 800);
    }

    #[test]
    fn min_cost_picks_the_diagonal() {
        let mu = vec![500, 500];
        let nu = vec![500, 500];
        let c = |i: usize, j: usize| if i == j { 0.0 } else { 1.0 };
        let plan = min_cost_transport(&mu, &nu, c, 1.0, ArcOrder::Forward);
        assert_eq!(plan, vec![(0, 0, 500), (1, 1, 500)]);
    }

    #[test]
    fn mantissa_exponent_split_is_exact() {
        assert_eq!(mantissa_exponent(1.0), (1u64 << 52, -52));
        assert_eq!(mantissa_exponent(0.5), (1u64 << 52, -53));
        assert_eq!(mantissa_exponent(5e-324), (1, -1074));
        for x in [1.0, 0.5, 0.3, 0.6137, 1e-300, 0.999_999_999_999_999_9] {
            let (m, e) = mantissa_exponent(x);
            assert_eq!(m as f64 * 0.5f64.powi(-e as i32), x);
        }
    }

    #[test]
    fn big_powers_match_small_cases() {
        assert_eq!(upow(3, 5), BigUint::from(243u32));
        assert_eq!(upow(2, 64), BigUint::from(1u128 << 64));
        assert_eq!(upow(7, 0), BigUint::from(1u32));
    }

    #[test]
    fn integer_powers_keep_bands_floats_absorb() {
        // 1.0^256 + 0.2^256 versus 1.0^256 + (0.2 + ulp)^256: in f64 both
        // sums collapse to exactly 1.0, the exact integers stay ordered.
        let bump = f64::from_bits(0.2f64.to_bits() + 1);
        let t = integerize_powers(&[1.0, 0.2, bump], 256.0);
        assert_eq!(1.0 + 0.2f64.powf(256.0), 1.0 + bump.powf(256.0));
        let low = &t[0].prim + &t[1].prim;
        let high = &t[0].prim + &t[2].prim;
        assert!(low < high);
    }

    #[test]
    fn large_p_choices_survive_float_absorption() {
        // Every plan ships one unit block at normalized cost 1.0, so float
        // power sums tie at 1.0 and would fall through to the secondary,
        // which prefers the profile [1.0, 0.5, 0.1] (smaller plain sum). The
        // exact objective prefers [1.0, 0.4, 0.4]: 2 * 0.4^256 < 0.5^256.
        let mu = vec![600, 600, 600];
        let nu = vec![600, 600, 600];
        let chats = [[1.0, 1.0, 1.0], [1.0, 0.5, 0.4], [1.0, 0.4, 0.1]];
        let c = |i: usize, j: usize| chats[i][j];
        let plan = min_cost_transport(&mu, &nu, c, 256.0, ArcOrder::Forward);
        assert_eq!(plan, vec![(0, 0, 600), (1, 2, 600), (2, 1, 600)]);
    }

    #[test]
    fn sub_threshold_costs_order_by_the_float_tie() {
        // All four costs sit far below 2^-64, so their integer powers clamp
        // to a shared value and the float tie decides: the diagonal sum
        // 2.5e-30 beats the anti-diagonal 4e-30.
        let mu = vec![500, 500];
        let nu = vec![500, 500];
        let chats = [[1e-30, 2e-30], [2e-30, 1.5e-30]];
        let c = |i: usize, j: usize| chats[i][j];
        let plan = min_cost_transport(&mu, &nu, c, 256.0, ArcOrder::Forward);
        assert_eq!(plan, vec![(0, 0, 500), (1, 1, 500)]);
    }

    #[test]
    fn arc_order_steers_fully_degenerate_instances() {
        let mu = vec![500, 500];
        let nu = vec![500, 500];
        let c = |_: usize, _: usize| 1.0;
        let fwd = min_cost_transport(&mu, &nu, c, 2.0, ArcOrder::Forward);
        let rev = min_cost_transport(&mu, &nu, c, 2.0, ArcOrder::Reversed);
        assert_ne!(fwd, rev);
        for plan in [fwd, rev] {
            let total: u64 = plan.iter().map(|&(_, _, f)| f).sum();
            assert_eq!(total, 1000);
        }
    }

    #[test]
    fn unbalanced_split_is_routed_exactly() {
        let mu = vec![250, 750];
        let nu = vec![600, 400];
        let c = |i: usize, j: usize| ((i as f64) - (j as f64)).abs();
        let plan = min_cost_transport(&mu, &nu, c, 1.0, ArcOrder::Forward);
        let (mut row, mut col) = (vec![0u64; 2], vec![0u64; 2]);
        for &(i, j, f) in &plan {
            row[i] += f;
            col[j] += f;
        }
        assert_eq!(row, mu);
        assert_eq!(col, nu);
        // Cost-0 arcs (0,0) and (1,1) carry as much as marginals allow.
        let diag: u64 = plan.iter().filter(|&&(i, j, _)| i == j).map(|&(_, _, f)| f).sum();
        assert_eq!(diag, 650);
    }
}
