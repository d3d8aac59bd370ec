//! From plans to maps: how deterministic is a coupling, which map does it
//! induce, and how far apart are two candidate maps.
//!
//! A coupling is a map exactly when every source sends all its mass to one
//! target. Discrete solver output rarely does, so `extract_map` projects a
//! plan to its dominant-target assignment and quantifies what the projection
//! throws away. The region and gap diagnostics compare two assignments: the
//! improvement region collects sources whose pairing can strictly improve
//! against some member of a disagreement set, and the uniqueness gap
//! measures how much mass two assignments route differently into one
//! distinguished target.

use thiserror::Error;

use crate::costs::Cost;
use crate::measures::{Coupling, DiscreteMeasure};
use crate::monotonicity::SUPPORT_MASS_FLOOR;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("assignment covers {found} sources, measure has {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("assignment sends source {index} to target {target}, past the {len} targets")]
    TargetOutOfRange { index: usize, target: usize, len: usize },
    #[error("atom index {index} is past the {len} targets")]
    AtomOutOfRange { index: usize, len: usize },
    #[error("assignments agree at source {index}; the region is defined over disagreements")]
    AssignmentsAgree { index: usize },
}

/// Dominant-target projection of a plan.
#[derive(Clone, Debug, serde::Serialize)]
pub struct MapExtraction {
    /// Per source: the target receiving the most of its mass (ties to the
    /// lowest target index).
    pub assignment: Vec<usize>,
    /// Per source: the mass actually sent to the dominant target.
    pub dominant_mass: Vec<f64>,
    /// Per source: how many targets receive mass above the support floor.
    pub per_source_split_count: Vec<usize>,
    /// Total mass the projection discards: sum over sources of source
    /// weight minus dominant mass. Zero exactly when the plan is a map.
    pub nondeterministic_mass: f64,
    /// Whether `nondeterministic_mass` stayed within the dominance
    /// tolerance, i.e. the assignment is (to tolerance) a genuine map.
    pub is_map: bool,
}

/// Mass two assignments route differently into one atom.
#[derive(Clone, Debug, serde::Serialize)]
pub struct UniquenessReport {
    pub atom_index: usize,
    /// Mass sent to the atom by the first assignment but not the second.
    pub gap: f64,
    /// Mass sent to the atom by exactly one of the two assignments.
    pub symmetric_gap: f64,
}

/// Projects a plan onto its per-source dominant targets. `dominance_tol` is
/// the nondeterministic mass the caller is willing to write off when
/// treating the result as a map; it must lie in [0, 1).
pub fn extract_map(plan: &Coupling, dominance_tol: f64) -> MapExtraction {
    assert!((0.0..1.0).contains(&dominance_tol), "dominance tolerance must be in [0, 1)");
    let m = plan.source().len();
    let mut assignment = vec![0usize; m];
    let mut dominant_mass = vec![0.0f64; m];
    let mut per_source_split_count = vec![0usize; m];
    for e in plan.support(SUPPORT_MASS_FLOOR) {
        per_source_split_count[e.i] += 1;
        // Strict comparison keeps the lowest target index on ties; support
        // iterates in ascending (i, j).
        if e.mass > dominant_mass[e.i] {
            dominant_mass[e.i] = e.mass;
            assignment[e.i] = e.j;
        }
    }
    let nondeterministic_mass: f64 = plan
        .source()
        .weights()
        .iter()
        .zip(&dominant_mass)
        .map(|(&w, &d)| w - d)
        .sum::<f64>()
        .max(0.0);
    MapExtraction {
        assignment,
        dominant_mass,
        per_source_split_count,
        nondeterministic_mass,
        is_map: nondeterministic_mass <= dominance_tol,
    }
}

fn validate_assignment(t: &[usize], mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(), MapError> {
    if t.len() != mu.len() {
        return Err(MapError::WrongLength { expected: mu.len(), found: t.len() });
    }
    for (index, &target) in t.iter().enumerate() {
        if target >= nu.len() {
            return Err(MapError::TargetOutOfRange { index, target, len: nu.len() });
        }
    }
    Ok(())
}

/// Sources whose pairing some member of `a` strictly improves: the set of z
/// such that for some x in `a`,
/// max{c(x, t(z)), c(z, t_tilde(x))} < max{c(x, t_tilde(x)), c(z, t(z))} - tol.
/// Every x in `a` must have t(x) != t_tilde(x); the region is the discrete
/// shadow of the disagreement set's improvement neighborhood.
pub fn improvement_region(
    a: &[usize],
    t: &[usize],
    t_tilde: &[usize],
    cost: &Cost,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tol: f64,
) -> Result<Vec<usize>, MapError> {
    validate_assignment(t, mu, nu)?;
    validate_assignment(t_tilde, mu, nu)?;
    for &i in a {
        if i >= mu.len() {
            return Err(MapError::WrongLength { expected: mu.len(), found: i });
        }
        if t[i] == t_tilde[i] {
            return Err(MapError::AssignmentsAgree { index: i });
        }
    }
    let c = |i: usize, j: usize| {
        cost.eval_slice(mu.point(i).coords(), nu.point(j).coords())
    };
    let mut region = Vec::new();
    for (z, &tz) in t.iter().enumerate() {
        let improvable = a.iter().any(|&x| {
            let before = c(x, t_tilde[x]).max(c(z, tz));
            let after = c(x, tz).max(c(z, t_tilde[x]));
            after < before - tol
        });
        if improvable {
            region.push(z);
        }
    }
    Ok(region)
}

/// Compares where two assignments send mass relative to the atom `y0_index`.
pub fn uniqueness_gap(
    t: &[usize],
    t_tilde: &[usize],
    y0_index: usize,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<UniquenessReport, MapError> {
    validate_assignment(t, mu, nu)?;
    validate_assignment(t_tilde, mu, nu)?;
    if y0_index >= nu.len() {
        return Err(MapError::AtomOutOfRange { index: y0_index, len: nu.len() });
    }
    let mut gap = 0.0;
    let mut reverse = 0.0;
    for i in 0..mu.len() {
        let in_t = t[i] == y0_index;
        let in_tt = t_tilde[i] == y0_index;
        if in_t && !in_tt {
            gap += mu.weight(i);
        }
        if in_tt && !in_t {
            reverse += mu.weight(i);
        }
    }
    Ok(UniquenessReport { atom_index: y0_index, gap, symmetric_gap: gap + reverse })
}
