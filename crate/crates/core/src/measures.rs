//! Discrete probability measures and couplings between them.
//!
//! A [`DiscreteMeasure`] is a finite weighted point cloud with total mass 1.
//! A [`Coupling`] is a sparse nonnegative matrix over a source/target measure
//! pair; its row sums should reproduce the source weights and its column sums
//! the target weights. Solvers return couplings whose marginals hold to
//! [`MARGINAL_TOL`]; [`Coupling::validate`] checks an arbitrary coupling
//! against an arbitrary tolerance and reports the worst offenders.
//!
//! Construction is validating: coordinates must be finite, dimensions
//! consistent, weights nonnegative with at least one positive entry.
//! Duplicate points are merged (weights summed, first occurrence kept) and
//! zero-weight points are dropped, so a stored measure always has pairwise
//! distinct support points and strictly positive weights. All types are
//! immutable after construction and safe to share across threads.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

/// Absolute slack allowed on a measure's total mass when not normalizing.
pub const MASS_SUM_TOL: f64 = 1e-12;

/// Default absolute tolerance for marginal checks on solver-produced plans.
pub const MARGINAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("point {index} has non-finite coordinate {value}")]
    NonFiniteCoordinate { index: usize, value: f64 },
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("{points} points but {weights} weights")]
    LengthMismatch { points: usize, weights: usize },
    #[error("weight {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weight {index} is not finite ({value})")]
    NonFiniteWeight { index: usize, value: f64 },
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("weights sum to {sum}, not 1 (pass normalize to rescale)")]
    NotNormalized { sum: f64 },
    #[error("empty point list")]
    Empty,
    #[error("grid box is degenerate on axis {axis} (lower {lower} >= upper {upper})")]
    DegenerateBox { axis: usize, lower: f64, upper: f64 },
    #[error("grid resolution must be at least 1")]
    ZeroResolution,
}

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("entry {entry}: source index {index} out of range (measure has {len} points)")]
    SourceIndexOutOfRange { entry: usize, index: usize, len: usize },
    #[error("entry {entry}: target index {index} out of range (measure has {len} points)")]
    TargetIndexOutOfRange { entry: usize, index: usize, len: usize },
    #[error("entry {entry}: mass {mass} is not strictly positive")]
    NonPositiveMass { entry: usize, mass: f64 },
    #[error("entry {entry}: mass {mass} is not finite")]
    NonFiniteMass { entry: usize, mass: f64 },
    #[error("pair ({i}, {j}) appears more than once")]
    DuplicateEntry { i: usize, j: usize },
    #[error("coupling has no entries")]
    Empty,
}

/// A point in d-dimensional Euclidean space with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, MeasureError> {
        for &v in &coords {
            if !v.is_finite() {
                return Err(MeasureError::NonFiniteCoordinate { index: 0, value: v });
            }
        }
        Ok(Point { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean distance to another point of the same dimension.
    pub fn dist(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn bit_key(&self) -> Vec<u64> {
        self.coords.iter().map(|v| v.to_bits()).collect()
    }
}

/// Shorthand for a 1-d point; panics on non-finite input.
pub fn p1(x: f64) -> Point {
    Point::new(vec![x]).expect("finite coordinate")
}

/// Shorthand for a 2-d point; panics on non-finite input.
pub fn p2(x: f64, y: f64) -> Point {
    Point::new(vec![x, y]).expect("finite coordinates")
}

/// A finitely supported probability measure: pairwise distinct points with
/// strictly positive weights summing to 1 (within [`MASS_SUM_TOL`]).
#[derive(Clone, Debug)]
pub struct DiscreteMeasure {
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from points and weights that already sum to 1.
    pub fn new(points: Vec<Point>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        Self::build(points, weights, false)
    }

    /// Builds a measure, rescaling the weights to total mass 1.
    pub fn new_normalized(points: Vec<Point>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        Self::build(points, weights, true)
    }

    /// Uniform measure on the given points (duplicates merged).
    pub fn uniform(points: Vec<Point>) -> Result<Self, MeasureError> {
        let n = points.len();
        Self::build(points, vec![1.0; n], true)
    }

    /// Uniform measure on the centers of an n-per-axis grid of cells tiling
    /// the box `[lower, upper]`. Points are ordered lexicographically by
    /// multi-index with the first axis slowest.
    pub fn grid(lower: &[f64], upper: &[f64], n: usize) -> Result<Self, MeasureError> {
        if n == 0 {
            return Err(MeasureError::ZeroResolution);
        }
        if lower.len() != upper.len() {
            return Err(MeasureError::DimensionMismatch {
                index: 0,
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(MeasureError::Empty);
        }
        let d = lower.len();
        for k in 0..d {
            let ordered = lower[k] < upper[k];
            if !ordered {
                return Err(MeasureError::DegenerateBox {
                    axis: k,
                    lower: lower[k],
                    upper: upper[k],
                });
            }
        }
        let count = n.pow(d as u32);
        let mut points = Vec::with_capacity(count);
        let mut index = vec![0usize; d];
        loop {
            let coords: Vec<f64> = (0..d)
                .map(|k| lower[k] + (index[k] as f64 + 0.5) * (upper[k] - lower[k]) / n as f64)
                .collect();
            points.push(Point::new(coords)?);
            // advance multi-index, last axis fastest
            let mut axis = d;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                index[axis] += 1;
                if index[axis] < n {
                    break;
                }
                index[axis] = 0;
                if axis == 0 {
                    return Self::build(points, vec![1.0; count], true);
                }
            }
        }
    }

    fn build(points: Vec<Point>, weights: Vec<f64>, normalize: bool) -> Result<Self, MeasureError> {
        if points.len() != weights.len() {
            return Err(MeasureError::LengthMismatch {
                points: points.len(),
                weights: weights.len(),
            });
        }
        if points.is_empty() {
            return Err(MeasureError::Empty);
        }
        let dim = points[0].dim();
        for (i, p) in points.iter().enumerate() {
            if p.dim() != dim {
                return Err(MeasureError::DimensionMismatch {
                    index: i,
                    expected: dim,
                    found: p.dim(),
                });
            }
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(MeasureError::NonFiniteWeight { index: i, value: w });
            }
            if w < 0.0 {
                return Err(MeasureError::NegativeWeight { index: i, value: w });
            }
        }
        // Merge duplicate points (exact coordinate equality), first occurrence kept.
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut merged_points: Vec<Point> = Vec::with_capacity(points.len());
        let mut merged_weights: Vec<f64> = Vec::with_capacity(points.len());
        for (p, w) in points.into_iter().zip(weights) {
            match seen.entry(p.bit_key()) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    merged_weights[*e.get()] += w;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(merged_points.len());
                    merged_points.push(p);
                    merged_weights.push(w);
                }
            }
        }
        // Drop zero-weight points.
        let mut points = Vec::with_capacity(merged_points.len());
        let mut weights = Vec::with_capacity(merged_weights.len());
        for (p, w) in merged_points.into_iter().zip(merged_weights) {
            if w > 0.0 {
                points.push(p);
                weights.push(w);
            }
        }
        if points.is_empty() {
            return Err(MeasureError::AllZeroWeights);
        }
        let sum: f64 = weights.iter().sum();
        if normalize {
            for w in &mut weights {
                *w /= sum;
            }
        } else if (sum - 1.0).abs() > MASS_SUM_TOL {
            return Err(MeasureError::NotNormalized { sum });
        }
        Ok(DiscreteMeasure { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Componentwise bounding box of the support, as (lower, upper).
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in &self.points {
            for k in 0..d {
                lo[k] = lo[k].min(p.coords[k]);
                hi[k] = hi[k].max(p.coords[k]);
            }
        }
        (lo, hi)
    }
}

/// One positive-mass cell of a coupling matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingEntry {
    pub i: usize,
    pub j: usize,
    pub mass: f64,
}

/// Result of checking a coupling's marginals against its measures.
#[derive(Clone, Debug)]
pub struct MarginalReport {
    pub pass: bool,
    pub tol: f64,
    pub max_source_deviation: f64,
    pub worst_source: usize,
    pub max_target_deviation: f64,
    pub worst_target: usize,
}

/// A sparse coupling between a source and a target measure. Entries are
/// stored sorted lexicographically by (i, j) with strictly positive mass and
/// no repeated cell, so iteration order is deterministic.
#[derive(Clone, Debug)]
pub struct Coupling {
    source: Arc<DiscreteMeasure>,
    target: Arc<DiscreteMeasure>,
    entries: Vec<CouplingEntry>,
}

impl Coupling {
    pub fn new(
        source: impl Into<Arc<DiscreteMeasure>>,
        target: impl Into<Arc<DiscreteMeasure>>,
        entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self, CouplingError> {
        let source = source.into();
        let target = target.into();
        if entries.is_empty() {
            return Err(CouplingError::Empty);
        }
        let mut list: Vec<CouplingEntry> = Vec::with_capacity(entries.len());
        for (k, &(i, j, mass)) in entries.iter().enumerate() {
            if i >= source.len() {
                return Err(CouplingError::SourceIndexOutOfRange {
                    entry: k,
                    index: i,
                    len: source.len(),
                });
            }
            if j >= target.len() {
                return Err(CouplingError::TargetIndexOutOfRange {
                    entry: k,
                    index: j,
                    len: target.len(),
                });
            }
            if !mass.is_finite() {
                return Err(CouplingError::NonFiniteMass { entry: k, mass });
            }
            if mass <= 0.0 {
                return Err(CouplingError::NonPositiveMass { entry: k, mass });
            }
            list.push(CouplingEntry { i, j, mass });
        }
        list.sort_by_key(|e| (e.i, e.j));
        for w in list.windows(2) {
            if w[0].i == w[1].i && w[0].j == w[1].j {
                return Err(CouplingError::DuplicateEntry { i: w[0].i, j: w[0].j });
            }
        }
        Ok(Coupling { source, target, entries: list })
    }

    /// The diagonal coupling of a measure with itself.
    pub fn identity(measure: impl Into<Arc<DiscreteMeasure>>) -> Self {
        let m = measure.into();
        let entries = m
            .weights()
            .iter()
            .enumerate()
            .map(|(i, &w)| CouplingEntry { i, j: i, mass: w })
            .collect();
        Coupling { source: m.clone(), target: m, entries }
    }

    /// The independent coupling mu x nu (every cell mass w_i * v_j).
    pub fn product(
        source: impl Into<Arc<DiscreteMeasure>>,
        target: impl Into<Arc<DiscreteMeasure>>,
    ) -> Self {
        let source = source.into();
        let target = target.into();
        let mut entries = Vec::with_capacity(source.len() * target.len());
        for i in 0..source.len() {
            for j in 0..target.len() {
                entries.push(CouplingEntry {
                    i,
                    j,
                    mass: source.weight(i) * target.weight(j),
                });
            }
        }
        Coupling { source, target, entries }
    }

    pub fn source(&self) -> &Arc<DiscreteMeasure> {
        &self.source
    }

    pub fn target(&self) -> &Arc<DiscreteMeasure> {
        &self.target
    }

    pub fn entries(&self) -> &[CouplingEntry] {
        &self.entries
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.mass).sum()
    }

    /// Row and column sums, indexed like the source and target measures.
    pub fn marginal_sums(&self) -> (Vec<f64>, Vec<f64>) {
        let mut rows = vec![0.0; self.source.len()];
        let mut cols = vec![0.0; self.target.len()];
        for e in &self.entries {
            rows[e.i] += e.mass;
            cols[e.j] += e.mass;
        }
        (rows, cols)
    }

    /// The two marginals as measures. Fails if the coupling's total mass is
    /// not 1 (up to [`MASS_SUM_TOL`]); sources or targets receiving no mass
    /// are dropped from the respective marginal.
    pub fn marginals(&self) -> Result<(DiscreteMeasure, DiscreteMeasure), MeasureError> {
        let (rows, cols) = self.marginal_sums();
        let first = DiscreteMeasure::new(self.source.points().to_vec(), rows)?;
        let second = DiscreteMeasure::new(self.target.points().to_vec(), cols)?;
        Ok((first, second))
    }

    /// Checks row sums against source weights and column sums against target
    /// weights, both to absolute tolerance `tol`.
    pub fn validate(&self, tol: f64) -> MarginalReport {
        let (rows, cols) = self.marginal_sums();
        let mut max_source_deviation = 0.0;
        let mut worst_source = 0;
        for (i, &r) in rows.iter().enumerate() {
            let dev = (r - self.source.weight(i)).abs();
            if dev > max_source_deviation {
                max_source_deviation = dev;
                worst_source = i;
            }
        }
        let mut max_target_deviation = 0.0;
        let mut worst_target = 0;
        for (j, &c) in cols.iter().enumerate() {
            let dev = (c - self.target.weight(j)).abs();
            if dev > max_target_deviation {
                max_target_deviation = dev;
                worst_target = j;
            }
        }
        MarginalReport {
            pass: max_source_deviation <= tol && max_target_deviation <= tol,
            tol,
            max_source_deviation,
            worst_source,
            max_target_deviation,
            worst_target,
        }
    }

    /// Entries with mass at or above `mass_floor`, in (i, j) order.
    pub fn support(&self, mass_floor: f64) -> Vec<CouplingEntry> {
        self.entries.iter().copied().filter(|e| e.mass >= mass_floor).collect()
    }
}
