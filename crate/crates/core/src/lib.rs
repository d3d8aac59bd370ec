//! Discrete minimax ("bottleneck") optimal transport with certificates.
//!
//! Given two finitely supported probability measures and a nonnegative cost,
//! the solvers here answer three questions:
//!
//! * what is the least threshold under which all mass can be routed, and
//!   which plan witnesses it ([`bottleneck`]);
//! * how do the power-mean relaxations of that problem behave as the
//!   exponent grows, and which plan do they settle on ([`pnorm`]);
//! * does a given plan actually have the structure minimax optimality
//!   demands: pairwise and cyclical monotonicity of its support
//!   ([`monotonicity`]), map-likeness and uniqueness diagnostics
//!   ([`mapping`]), and a cost whose geometry supports map extraction at all
//!   ([`costs::validate`]).
//!
//! Everything downstream of measure construction is deterministic: weights
//! are integerized once, flows are exact over integers, tie-breaks are
//! fixed, and every certificate that can fail carries a witness that
//! re-evaluates as a violation.

pub mod bottleneck;
pub mod costs;
mod flow;
pub mod io;
pub mod mapping;
pub mod measures;
pub mod monotonicity;
pub mod pnorm;

pub use bottleneck::{solve_bottleneck, BottleneckSolution, SolveError};
pub use costs::{Cost, CostError};
pub use mapping::{extract_map, MapExtraction, UniquenessReport};
pub use measures::{Coupling, CouplingEntry, DiscreteMeasure, Point};
pub use monotonicity::{
    check_cyclically_monotone, check_pair_monotone, MonotonicityCertificate,
};
pub use pnorm::{run_p_schedule, solve_p, ArcOrder, PSchedule, PSolution};
