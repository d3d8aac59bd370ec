//! Experiment configuration: a single JSON file per run. Parsing is strict;
//! unknown keys and malformed values are reported with serde_json's line and
//! column context rather than silently defaulted. The only silent defaults
//! are the documented ones: seed 0, exponent schedule 1..256, tolerance 1e-9.

use std::collections::BTreeMap;
use std::path::Path;

use linfty_ot::costs::Cost;
use linfty_ot::measures::{DiscreteMeasure, Point};
use linfty_ot::ArcOrder;
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Bottleneck,
    PSchedule,
    Certify,
    Counterexample,
    Rotation,
    MongeTrend,
    UniquenessAtom,
    CostValidate,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Bottleneck => "bottleneck",
            Scenario::PSchedule => "p-schedule",
            Scenario::Certify => "certify",
            Scenario::Counterexample => "counterexample",
            Scenario::Rotation => "rotation",
            Scenario::MongeTrend => "monge-trend",
            Scenario::UniquenessAtom => "uniqueness-atom",
            Scenario::CostValidate => "cost-validate",
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcOrderSpec {
    Forward,
    Reversed,
}

impl ArcOrderSpec {
    pub fn to_order(self) -> ArcOrder {
        match self {
            ArcOrderSpec::Forward => ArcOrder::Forward,
            ArcOrderSpec::Reversed => ArcOrder::Reversed,
        }
    }
}

/// Cost family plus parameters. `q` applies to the power and affine families;
/// `matrix` is the affine family's linear part (row major), checked for
/// invertibility at construction.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    pub family: String,
    pub q: Option<f64>,
    pub matrix: Option<Vec<Vec<f64>>>,
    pub offset: Option<Vec<f64>>,
}

impl CostSpec {
    pub fn build(&self, dim: usize) -> Result<Cost, CliError> {
        let q = self.q.unwrap_or(2.0);
        match self.family.as_str() {
            "euclidean" => Ok(Cost::euclidean(dim)),
            "sup-norm" => Ok(Cost::sup_norm(dim)),
            "power" => Cost::translation_power(dim, q)
                .map_err(|e| CliError::Config(format!("cost.q: {e}"))),
            "affine" => {
                let a = self
                    .matrix
                    .as_ref()
                    .ok_or_else(|| CliError::Config("cost.matrix required for the affine family".into()))?;
                let b = self.offset.clone().unwrap_or_else(|| vec![0.0; dim]);
                let f: Vec<Vec<f64>> =
                    (0..dim).map(|i| (0..dim).map(|j| f64::from(u8::from(i == j))).collect()).collect();
                Cost::affine_composed(dim, q, a, b, &f, vec![0.0; dim])
                    .map_err(|e| CliError::Config(format!("cost: {e}")))
            }
            other => Err(CliError::Config(format!(
                "cost.family: unknown family {other:?} (expected euclidean, sup-norm, power, affine)"
            ))),
        }
    }

    /// Command-line form: `euclidean`, `sup-norm`, `power:Q`,
    /// `affine:Q:r11,r12;r21,r22`.
    pub fn parse_flag(spec: &str) -> Result<CostSpec, CliError> {
        let mut parts = spec.splitn(3, ':');
        let family = parts.next().unwrap_or_default().to_string();
        let mut out = CostSpec { family, q: None, matrix: None, offset: None };
        if let Some(qs) = parts.next() {
            let q: f64 = qs
                .parse()
                .map_err(|_| CliError::Config(format!("--cost: bad exponent {qs:?}")))?;
            out.q = Some(q);
        }
        if let Some(rows) = parts.next() {
            let matrix: Result<Vec<Vec<f64>>, _> = rows
                .split(';')
                .map(|row| row.split(',').map(|v| v.trim().parse::<f64>()).collect())
                .collect();
            out.matrix = Some(
                matrix.map_err(|_| CliError::Config(format!("--cost: bad matrix {rows:?}")))?,
            );
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub n: usize,
}

/// One measure, given as exactly one of: a CSV path, a grid of cell centers,
/// or inline points with weights.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub csv: Option<String>,
    pub grid: Option<GridSpec>,
    pub points: Option<Vec<Vec<f64>>>,
    pub weights: Option<Vec<f64>>,
}

impl MeasureSpec {
    pub fn build(&self, field: &str, base: &Path) -> Result<DiscreteMeasure, CliError> {
        let given =
            usize::from(self.csv.is_some()) + usize::from(self.grid.is_some()) + usize::from(self.points.is_some());
        if given != 1 {
            return Err(CliError::Config(format!(
                "{field}: give exactly one of csv, grid, points (found {given})"
            )));
        }
        if let Some(csv) = &self.csv {
            let path = base.join(csv);
            return linfty_ot::io::read_measure_csv(&path)
                .map_err(|e| CliError::Config(format!("{field}.csv: {e}")));
        }
        if let Some(grid) = &self.grid {
            if grid.lower.len() != grid.upper.len() || grid.lower.is_empty() {
                return Err(CliError::Config(format!(
                    "{field}.grid: lower and upper must be same nonzero length"
                )));
            }
            if grid.n == 0 {
                return Err(CliError::Config(format!("{field}.grid.n: must be positive")));
            }
            return DiscreteMeasure::grid(&grid.lower, &grid.upper, grid.n)
                .map_err(|e| CliError::Config(format!("{field}.grid: {e}")));
        }
        let points = self.points.as_ref().unwrap();
        let weights = self
            .weights
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{field}.weights: required with points")))?;
        if points.len() != weights.len() {
            return Err(CliError::Config(format!(
                "{field}: {} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        for (i, w) in weights.iter().enumerate() {
            let positive = *w > 0.0;
            if !positive {
                return Err(CliError::Config(format!(
                    "{field}.weights[{i}]: must be positive, got {w}"
                )));
            }
        }
        let pts: Result<Vec<Point>, _> = points.iter().map(|c| Point::new(c.clone())).collect();
        let pts = pts.map_err(|e| CliError::Config(format!("{field}.points: {e}")))?;
        DiscreteMeasure::new_normalized(pts, weights.clone())
            .map_err(|e| CliError::Config(format!("{field}: {e}")))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

fn default_seed() -> u64 {
    0
}

/// Everything a run needs. Scenario-specific fields are optional here and
/// checked by the scenario that uses them, so error messages can say which
/// field the scenario was missing.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub out_dir: Option<String>,
    pub cost: Option<CostSpec>,
    pub mu: Option<MeasureSpec>,
    pub nu: Option<MeasureSpec>,
    /// Path to an existing plan CSV (certify scenario).
    pub plan: Option<String>,
    /// Exponent schedule for p-schedule runs; strictly increasing.
    pub schedule: Option<Vec<f64>>,
    /// Monotonicity tolerance for certificates.
    pub tolerance: Option<f64>,
    /// Grid resolution (counterexample, uniqueness-atom) or point count
    /// (rotation).
    pub n: Option<usize>,
    /// Rotation step, in grid positions around the circle.
    pub step: Option<usize>,
    /// Grid resolutions for the monge-trend sweep.
    pub n_values: Option<Vec<usize>>,
    /// Probe count for cost validation.
    pub trials: Option<usize>,
    /// Ambient dimension for cost validation.
    pub dim: Option<usize>,
    pub probe_box: Option<BoxSpec>,
    /// Expected validator verdicts, property name to "pass" | "fail";
    /// mismatches fail the run with exit status 2.
    pub expect: Option<BTreeMap<String, String>>,
    /// Tie-break order for the flow solver (uniqueness pipelines).
    pub arc_order: Option<ArcOrderSpec>,
}

pub const DEFAULT_SCHEDULE: [f64; 9] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0];

impl ExperimentConfig {
    /// A config with nothing but the scenario set, for programmatic callers.
    pub fn bare(scenario: Scenario) -> ExperimentConfig {
        ExperimentConfig {
            scenario,
            seed: 0,
            out_dir: None,
            cost: None,
            mu: None,
            nu: None,
            plan: None,
            schedule: None,
            tolerance: None,
            n: None,
            step: None,
            n_values: None,
            trials: None,
            dim: None,
            probe_box: None,
            expect: None,
            arc_order: None,
        }
    }

    pub fn schedule(&self) -> Vec<f64> {
        self.schedule.clone().unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec())
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(1e-9)
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
