//! Power-mean transport: minimize the p-th mass-weighted mean cost, for a
//! rising schedule of exponents, as a constructive route toward the minimax
//! value.
//!
//! For a plan with masses m_e and costs c_e the objective is
//! N_p = (sum m_e c_e^p)^(1/p). Power means are nondecreasing in p and each
//! N_p is bounded by the minimax value, so the schedule produces a
//! nondecreasing sequence converging to it from below, and the terminal plan
//! is the candidate the monotonicity certificates are run on.
//!
//! Numerics: pair costs enter the flow solver normalized to [0, 1], and the
//! solver raises them to p in exact integer arithmetic (every f64 is a
//! dyadic rational, so c^p is a big integer times a power of two). Float
//! power sums lose any band more than 16 decimal digits below the leading
//! one, which at p = 256 is most of the instance; the exact sums keep every
//! band and the returned plan is a true optimum at every exponent of the
//! schedule. The reported value is computed from the returned plan with the
//! max entry factored out, which stays accurate where a naive float sum of
//! c^p would underflow.

use crate::bottleneck::{cost_matrix, SolveError};
use crate::costs::Cost;
use crate::flow::{integerize_weights, min_cost_transport};
use crate::measures::{Coupling, DiscreteMeasure};

pub use crate::flow::ArcOrder;

/// Consecutive schedule values may decrease by at most this (scaled by
/// magnitude) before the certificate fails.
pub const MONOTONE_VALUE_SLACK: f64 = 1e-9;

/// Schedule values may exceed the minimax value by at most this (scaled by
/// magnitude) before the certificate fails.
pub const BOTTLENECK_BOUND_SLACK: f64 = 1e-6;

/// One exponent's solution.
#[derive(Clone, Debug)]
pub struct PSolution {
    pub p: f64,
    /// N_p of the plan: the p-th root of the mass-weighted p-th moment.
    pub value: f64,
    pub plan: Coupling,
}

/// Solutions for an ascending exponent schedule.
#[derive(Clone, Debug)]
pub struct PSchedule {
    pub exponents: Vec<f64>,
    pub solutions: Vec<PSolution>,
}

impl PSchedule {
    /// Largest-exponent solution; its plan is the map candidate.
    pub fn terminal(&self) -> &PSolution {
        self.solutions.last().expect("schedules are never empty")
    }

    pub fn values(&self) -> Vec<f64> {
        self.solutions.iter().map(|s| s.value).collect()
    }
}

/// Doubling exponents 1, 2, 4, ..., 256.
pub fn default_schedule() -> Vec<f64> {
    (0..=8).map(|k| f64::powi(2.0, k)).collect()
}

/// N_p of an explicit plan against a cost, max entry factored out for
/// large-p stability.
pub fn plan_value(plan: &Coupling, cost: &Cost, p: f64) -> f64 {
    let masses: Vec<f64> = plan.entries().iter().map(|e| e.mass).collect();
    let costs: Vec<f64> = plan
        .entries()
        .iter()
        .map(|e| cost.eval_slice(plan.source().point(e.i).coords(), plan.target().point(e.j).coords()))
        .collect();
    value_of(&masses, &costs, p)
}

fn value_of(masses: &[f64], costs: &[f64], p: f64) -> f64 {
    let total: f64 = masses.iter().sum();
    let m = costs.iter().copied().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = masses
        .iter()
        .zip(costs)
        .map(|(&w, &c)| (w / total) * (c / m).powf(p))
        .sum();
    m * s.powf(1.0 / p)
}

/// Minimizes N_p over couplings of the two measures. `order` picks which of
/// the tied optimal plans the network solver reaches first; the value is
/// order-independent.
pub fn solve_p(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &Cost,
    p: f64,
    order: ArcOrder,
) -> Result<PSolution, SolveError> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(SolveError::BadExponent { p });
    }
    let c = cost_matrix(mu, nu, cost)?;
    let cmax = c.iter().flatten().copied().fold(0.0, f64::max);
    let (mu_units, nu_units) = integerize_weights(mu.weights(), nu.weights());
    let chat = |i: usize, j: usize| if cmax == 0.0 { 0.0 } else { c[i][j] / cmax };
    let plan_units = min_cost_transport(&mu_units, &nu_units, chat, p, order);
    let total: u64 = plan_units.iter().map(|&(_, _, f)| f).sum();
    let masses: Vec<f64> = plan_units.iter().map(|&(_, _, f)| f as f64 / total as f64).collect();
    let costs: Vec<f64> = plan_units.iter().map(|&(i, j, _)| c[i][j]).collect();
    let value = value_of(&masses, &costs, p);
    let entries: Vec<(usize, usize, f64)> = plan_units
        .iter()
        .zip(&masses)
        .map(|(&(i, j, _), &w)| (i, j, w))
        .collect();
    let plan = Coupling::new(mu.clone(), nu.clone(), entries)?;
    Ok(PSolution { p, value, plan })
}

/// Runs an ascending exponent schedule and certifies two facts about the
/// value sequence: it never decreases (beyond [`MONOTONE_VALUE_SLACK`]), and
/// it never exceeds `minimax_value` (beyond [`BOTTLENECK_BOUND_SLACK`]) when
/// one is supplied. Violations are hard errors, not warnings.
pub fn run_p_schedule(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &Cost,
    exponents: &[f64],
    minimax_value: Option<f64>,
    order: ArcOrder,
) -> Result<PSchedule, SolveError> {
    if exponents.is_empty() {
        return Err(SolveError::BadExponent { p: f64::NAN });
    }
    for w in exponents.windows(2) {
        let ascending = w[1] > w[0];
        if !ascending {
            return Err(SolveError::BadExponent { p: w[1] });
        }
    }
    let mut solutions = Vec::with_capacity(exponents.len());
    for &p in exponents {
        let sol = solve_p(mu, nu, cost, p, order)?;
        if let Some(prev) = solutions.last() {
            let prev: &PSolution = prev;
            let slack = MONOTONE_VALUE_SLACK * prev.value.abs().max(1.0);
            if sol.value < prev.value - slack {
                return Err(SolveError::Certificate(format!(
                    "value decreased along the schedule: N_{} = {:.17e} after N_{} = {:.17e}",
                    sol.p, sol.value, prev.p, prev.value
                )));
            }
        }
        if let Some(bound) = minimax_value {
            let slack = BOTTLENECK_BOUND_SLACK * bound.abs().max(1.0);
            if sol.value > bound + slack {
                return Err(SolveError::Certificate(format!(
                    "N_{} = {:.17e} exceeds the minimax value {:.17e}",
                    sol.p, sol.value, bound
                )));
            }
        }
        solutions.push(sol);
    }
    Ok(PSchedule { exponents: exponents.to_vec(), solutions })
}
