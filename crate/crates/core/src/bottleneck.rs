//! Minimax transport: the least threshold t such that mass can be routed
//! using only pairs with cost at most t.
//!
//! The optimal value is always one of the m*n pair costs, so the solver
//! binary-searches the sorted distinct costs and answers each feasibility
//! question with an exact integer max-flow. The returned solution doubles as
//! a certificate: a plan whose support respects the threshold, plus the flow
//! deficit showing the next-lower distinct cost is infeasible.

use thiserror::Error;

use crate::costs::Cost;
use crate::flow::{feasibility_flow, integerize_weights};
use crate::measures::{Coupling, CouplingError, DiscreteMeasure};

/// Plan support may exceed the certified value by at most this much; the
/// solver asserts it before returning.
pub const PLAN_COST_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("cost has dimension {cost}, measures have dimensions {mu} and {nu}")]
    DimensionMismatch { cost: usize, mu: usize, nu: usize },
    #[error("cost is not finite at source {i}, target {j}")]
    NonFiniteCost { i: usize, j: usize },
    #[error("exponent {p} is invalid; schedules need finite p >= 1")]
    BadExponent { p: f64 },
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error("certificate violated: {0}")]
    Certificate(String),
}

/// Minimax solution with its two-sided certificate.
#[derive(Clone, Debug)]
pub struct BottleneckSolution {
    /// Least feasible threshold; always one of the pair costs.
    pub value: f64,
    /// Plan witnessing feasibility at `value`.
    pub plan: Coupling,
    /// Position of `value` in the ascending list of distinct pair costs.
    pub threshold_index: usize,
    /// Number of distinct pair costs for this instance.
    pub distinct_costs: usize,
    /// Units of mass that cannot be routed at the next-lower distinct cost;
    /// `None` when the smallest pair cost is already feasible.
    pub infeasibility_deficit: Option<u64>,
}

/// All pair costs, checked finite.
pub(crate) fn cost_matrix(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &Cost,
) -> Result<Vec<Vec<f64>>, SolveError> {
    if cost.dim() != mu.dim() || cost.dim() != nu.dim() {
        return Err(SolveError::DimensionMismatch { cost: cost.dim(), mu: mu.dim(), nu: nu.dim() });
    }
    let mut c = vec![vec![0.0; nu.len()]; mu.len()];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = cost.eval_slice(mu.point(i).coords(), nu.point(j).coords());
            if !v.is_finite() {
                return Err(SolveError::NonFiniteCost { i, j });
            }
        }
    }
    Ok(c)
}

fn units_to_coupling(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    plan_units: &[(usize, usize, u64)],
) -> Result<Coupling, SolveError> {
    let total: u64 = plan_units.iter().map(|&(_, _, f)| f).sum();
    let scale = total as f64;
    let entries: Vec<(usize, usize, f64)> =
        plan_units.iter().map(|&(i, j, f)| (i, j, f as f64 / scale)).collect();
    Ok(Coupling::new(mu.clone(), nu.clone(), entries)?)
}

/// Solves the minimax problem exactly (up to weight integerization, which is
/// itself exact for uniform and small-denominator rational weights).
pub fn solve_bottleneck(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &Cost,
) -> Result<BottleneckSolution, SolveError> {
    let c = cost_matrix(mu, nu, cost)?;
    let mut thresholds: Vec<f64> = c.iter().flatten().copied().collect();
    thresholds.sort_unstable_by(f64::total_cmp);
    thresholds.dedup();
    let (mu_units, nu_units) = integerize_weights(mu.weights(), nu.weights());
    let total: u64 = mu_units.iter().sum();

    let feasible_at = |k: usize| feasibility_flow(&mu_units, &nu_units, |i, j| c[i][j] <= thresholds[k]);

    // The largest threshold admits every arc, so it is always feasible.
    let mut lo = 0usize;
    let mut hi = thresholds.len() - 1;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible_at(mid).max_flow == total {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let k = lo;
    let value = thresholds[k];

    let outcome = feasible_at(k);
    assert_eq!(outcome.max_flow, total, "binary search must land on a feasible threshold");
    let plan = units_to_coupling(mu, nu, &outcome.plan_units)?;
    for e in plan.entries() {
        debug_assert!(
            c[e.i][e.j] <= value + PLAN_COST_SLACK,
            "plan entry ({}, {}) costs {} above threshold {}",
            e.i,
            e.j,
            c[e.i][e.j],
            value,
        );
    }

    let infeasibility_deficit = if k > 0 {
        let below = feasible_at(k - 1);
        assert!(below.max_flow < total, "threshold below the optimum must be infeasible");
        Some(total - below.max_flow)
    } else {
        None
    };

    Ok(BottleneckSolution {
        value,
        plan,
        threshold_index: k,
        distinct_costs: thresholds.len(),
        infeasibility_deficit,
    })
}

/// Exhaustive minimax assignment value for equal-size, equal-weight
/// instances: the minimum over all n! pairings of the largest pair cost.
/// Independent of the flow solver; n is capped to keep n! sane.
pub fn exhaustive_assignment_value(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &Cost,
) -> Result<f64, SolveError> {
    let n = mu.len();
    assert_eq!(n, nu.len(), "assignment oracle needs equal sizes");
    assert!(n <= 9, "assignment oracle enumerates n! pairings");
    let w0 = mu.weights()[0];
    assert!(
        mu.weights().iter().chain(nu.weights()).all(|&w| (w - w0).abs() < 1e-12),
        "assignment oracle needs uniform weights"
    );
    let c = cost_matrix(mu, nu, cost)?;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let worst = p.iter().enumerate().map(|(i, &j)| c[i][j]).fold(f64::NEG_INFINITY, f64::max);
        if worst < best {
            best = worst;
        }
    });
    Ok(best)
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}
