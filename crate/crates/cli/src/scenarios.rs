//! The scripted experiments behind `linfty-ot run`. Each scenario builds its
//! instance, runs the relevant solvers and certifiers, writes `summary.csv`,
//! `plan.csv`, `certificate.json` (and `convergence.csv` for schedules) into
//! the output directory, and only then checks its built-in assertions, so a
//! failing run still leaves the witnesses on disk.

use std::f64::consts::PI;
use std::path::Path;

use linfty_ot::costs::validate::{
    check_strict_quasiconvexity, check_twist_kind, check_zero_set, sublevel_smoothness_probe,
    ProbeBox, ValidationReport, Verdict,
};
use linfty_ot::costs::Cost;
use linfty_ot::mapping::{extract_map, uniqueness_gap, MapExtraction};
use linfty_ot::measures::{Coupling, DiscreteMeasure, Point};
use linfty_ot::monotonicity::{
    check_cyclically_monotone, check_pair_monotone, MonotonicityCertificate, MonotonicityWitness,
};
use linfty_ot::pnorm::run_p_schedule;
use linfty_ot::{solve_bottleneck, solve_p, ArcOrder, SolveError};
use serde_json::json;

use crate::config::{ExperimentConfig, Scenario};
use crate::report;
use crate::CliError;

/// Tolerance for certifying plans produced by the finite-p solver, which is
/// itself only an approximation of the limit problem.
const TERMINAL_CERT_TOL: f64 = 1e-6;
/// Relative distance the terminal schedule value must close to the minimax
/// value.
const TERMINAL_REL_GAP: f64 = 0.02;
/// Ceiling on the terminal nondeterministic mass in the monge-trend sweep.
const TREND_MASS_CEILING: f64 = 0.05;

pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, base: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Config(format!("creating {}: {e}", out.display())))?;
    match cfg.scenario {
        Scenario::Bottleneck => bottleneck(cfg, out, base),
        Scenario::PSchedule => p_schedule(cfg, out, base),
        Scenario::Certify => certify(cfg, out, base),
        Scenario::Counterexample => counterexample(cfg, out),
        Scenario::Rotation => rotation(cfg, out),
        Scenario::MongeTrend => monge_trend(cfg, out),
        Scenario::UniquenessAtom => uniqueness_atom(cfg, out),
        Scenario::CostValidate => cost_validate(cfg, out),
    }
}

fn solve_err(e: SolveError) -> CliError {
    match e {
        SolveError::Certificate(msg) => CliError::Assertion(msg),
        other => CliError::Config(other.to_string()),
    }
}

fn need<'a, T>(opt: &'a Option<T>, field: &str, scenario: &str) -> Result<&'a T, CliError> {
    opt.as_ref()
        .ok_or_else(|| CliError::Config(format!("{field}: required by the {scenario} scenario")))
}

fn build_pair(
    cfg: &ExperimentConfig,
    base: &Path,
    scenario: &str,
) -> Result<(DiscreteMeasure, DiscreteMeasure, Cost), CliError> {
    let mu = need(&cfg.mu, "mu", scenario)?.build("mu", base)?;
    let nu = need(&cfg.nu, "nu", scenario)?.build("nu", base)?;
    if mu.dim() != nu.dim() {
        return Err(CliError::Config(format!(
            "mu has dimension {} but nu has dimension {}",
            mu.dim(),
            nu.dim()
        )));
    }
    let cost = need(&cfg.cost, "cost", scenario)?.build(mu.dim())?;
    Ok((mu, nu, cost))
}

fn bool_row(v: bool) -> String {
    if v { "pass".to_string() } else { "fail".to_string() }
}

fn certificate_pair(
    plan: &Coupling,
    cost: &Cost,
    tol: f64,
) -> (MonotonicityCertificate, MonotonicityCertificate) {
    (check_pair_monotone(plan, cost, tol), check_cyclically_monotone(plan, cost, tol))
}

fn map_json(map: &MapExtraction) -> serde_json::Value {
    json!({
        "nondeterministic_mass": map.nondeterministic_mass,
        "is_map": map.is_map,
        "sources_split": map.per_source_split_count.iter().filter(|&&c| c > 1).count(),
    })
}

fn finish(
    out: &Path,
    scenario: &str,
    seed: u64,
    rows: Vec<(String, String)>,
    certificate: serde_json::Value,
    failures: Vec<String>,
) -> Result<(), CliError> {
    let mut all = vec![("seed".to_string(), seed.to_string())];
    all.extend(rows);
    report::write_summary(&out.join("summary.csv"), scenario, &all)?;
    report::write_certificate(&out.join("certificate.json"), &certificate)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(failures.join("; ")))
    }
}

fn bottleneck(cfg: &ExperimentConfig, out: &Path, base: &Path) -> Result<(), CliError> {
    let scenario = cfg.scenario.name();
    let (mu, nu, cost) = build_pair(cfg, base, scenario)?;
    let tol = cfg.tolerance();
    let sol = solve_bottleneck(&mu, &nu, &cost).map_err(solve_err)?;
    let (pm, cm) = certificate_pair(&sol.plan, &cost, tol);
    let map = extract_map(&sol.plan, 0.0);
    report::write_plan(&out.join("plan.csv"), &sol.plan)?;
    let rows = vec![
        ("value".to_string(), report::sig(sol.value)),
        ("threshold_index".to_string(), sol.threshold_index.to_string()),
        ("distinct_costs".to_string(), sol.distinct_costs.to_string()),
        ("support_size".to_string(), sol.plan.entries().len().to_string()),
        ("pair_monotone".to_string(), bool_row(pm.holds)),
        ("cyclically_monotone".to_string(), bool_row(cm.holds)),
        ("nondeterministic_mass".to_string(), report::sig(map.nondeterministic_mass)),
    ];
    let certificate = json!({
        "scenario": scenario,
        "value": sol.value,
        "threshold_index": sol.threshold_index,
        "pair_monotone": pm,
        "cyclically_monotone": cm,
        "map": map_json(&map),
    });
    finish(out, scenario, cfg.seed, rows, certificate, Vec::new())
}

fn p_schedule(cfg: &ExperimentConfig, out: &Path, base: &Path) -> Result<(), CliError> {
    let scenario = cfg.scenario.name();
    let (mu, nu, cost) = build_pair(cfg, base, scenario)?;
    let order = cfg.arc_order.map(|o| o.to_order()).unwrap_or(ArcOrder::Forward);
    let exponents = cfg.schedule();
    let minimax = solve_bottleneck(&mu, &nu, &cost).map_err(solve_err)?;
    let sched =
        run_p_schedule(&mu, &nu, &cost, &exponents, Some(minimax.value), order).map_err(solve_err)?;

    let rows_conv: Vec<(f64, f64, f64)> = sched
        .solutions
        .iter()
        .map(|s| (s.p, s.value, minimax.value - s.value))
        .collect();
    report::write_convergence(&out.join("convergence.csv"), &rows_conv)?;

    let terminal = sched.terminal();
    let (pm, cm) = certificate_pair(&terminal.plan, &cost, TERMINAL_CERT_TOL);
    let map = extract_map(&terminal.plan, 0.0);
    report::write_plan(&out.join("plan.csv"), &terminal.plan)?;

    let rel_gap = if minimax.value > 0.0 {
        (minimax.value - terminal.value) / minimax.value
    } else {
        terminal.value
    };
    let mut failures = Vec::new();
    if rel_gap.abs() > TERMINAL_REL_GAP {
        failures.push(format!(
            "terminal value {} should be within {:.0}% of the minimax value {}",
            terminal.value,
            TERMINAL_REL_GAP * 100.0,
            minimax.value
        ));
    }
    if !pm.holds {
        failures.push("terminal plan should be pairwise monotone".to_string());
    }

    let rows = vec![
        ("minimax_value".to_string(), report::sig(minimax.value)),
        ("terminal_p".to_string(), report::sig(terminal.p)),
        ("terminal_value".to_string(), report::sig(terminal.value)),
        ("relative_gap".to_string(), report::sig(rel_gap)),
        ("terminal_pair_monotone".to_string(), bool_row(pm.holds)),
        ("terminal_cyclically_monotone".to_string(), bool_row(cm.holds)),
        ("nondeterministic_mass".to_string(), report::sig(map.nondeterministic_mass)),
    ];
    let certificate = json!({
        "scenario": scenario,
        "minimax_value": minimax.value,
        "values": sched.values(),
        "exponents": sched.exponents,
        "terminal_pair_monotone": pm,
        "terminal_cyclically_monotone": cm,
        "map": map_json(&map),
    });
    finish(out, scenario, cfg.seed, rows, certificate, failures)
}

fn certify(cfg: &ExperimentConfig, out: &Path, base: &Path) -> Result<(), CliError> {
    let scenario = cfg.scenario.name();
    let (mu, nu, cost) = build_pair(cfg, base, scenario)?;
    let tol = cfg.tolerance();
    let plan_path = base.join(need(&cfg.plan, "plan", scenario)?);
    let plan = linfty_ot::io::read_coupling_csv(&plan_path, mu.clone(), nu.clone())
        .map_err(|e| CliError::Config(format!("plan: {e}")))?;
    let marginals = plan.validate(1e-6);
    if !marginals.pass {
        return Err(CliError::Config(format!(
            "plan: marginals disagree with mu/nu (source off by {:.3e} at {}, target off by {:.3e} at {})",
            marginals.max_source_deviation,
            marginals.worst_source,
            marginals.max_target_deviation,
            marginals.worst_target,
        )));
    }
    let (pm, cm) = certificate_pair(&plan, &cost, tol);
    let map = extract_map(&plan, 0.0);
    let max_entry = plan
        .entries()
        .iter()
        .map(|e| cost.eval_slice(mu.point(e.i).coords(), nu.point(e.j).coords()))
        .fold(0.0f64, f64::max);
    report::write_plan(&out.join("plan.csv"), &plan)?;
    let rows = vec![
        ("support_size".to_string(), plan.entries().len().to_string()),
        ("max_entry_cost".to_string(), report::sig(max_entry)),
        ("pair_monotone".to_string(), bool_row(pm.holds)),
        ("cyclically_monotone".to_string(), bool_row(cm.holds)),
        ("nondeterministic_mass".to_string(), report::sig(map.nondeterministic_mass)),
        ("is_map".to_string(), map.is_map.to_string()),
    ];
    let certificate = json!({
        "scenario": scenario,
        "tolerance": tol,
        "pair_monotone": pm,
        "cyclically_monotone": cm,
        "map": map_json(&map),
    });
    finish(out, scenario, cfg.seed, rows, certificate, Vec::new())
}

/// Two axis-aligned unit grids a long horizontal shift apart, sup-norm cost.
/// Any plan matching columns left to right is optimal, including one that
/// spreads every source over its whole destination column; that plan is
/// cyclically monotone yet far from a map.
fn counterexample(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let scenario = cfg.scenario.name();
    let n = *cfg.n.as_ref().unwrap_or(&6);
    if n == 0 {
        return Err(CliError::Config("n: must be positive".to_string()));
    }
    let tol = cfg.tolerance();
    let mu = DiscreteMeasure::grid(&[0.0, 0.0], &[1.0, 1.0], n).unwrap();
    let nu = DiscreteMeasure::grid(&[10.0, 0.0], &[11.0, 1.0], n).unwrap();
    let cost = Cost::sup_norm(2);

    let cell = 1.0 / (n as f64 * n as f64 * n as f64);
    let mut entries = Vec::with_capacity(n * n * n);
    for col in 0..n {
        for row in 0..n {
            for row2 in 0..n {
                entries.push((col * n + row, col * n + row2, cell));
            }
        }
    }
    let spread = Coupling::new(mu.clone(), nu.clone(), entries)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let sol = solve_bottleneck(&mu, &nu, &cost).map_err(solve_err)?;
    let (pm, cm) = certificate_pair(&spread, &cost, tol);
    let map = extract_map(&spread, 0.0);
    let expected_mass = 1.0 - 1.0 / n as f64;
    report::write_plan(&out.join("plan.csv"), &spread)?;

    let mut failures = Vec::new();
    if (sol.value - 10.0).abs() > 1e-9 {
        failures.push(format!("minimax value {} should be 10", sol.value));
    }
    if !pm.holds {
        failures.push("column-spread plan should be pairwise monotone".to_string());
    }
    if !cm.holds {
        failures.push("column-spread plan should be cyclically monotone".to_string());
    }
    if (map.nondeterministic_mass - expected_mass).abs() > 1e-9 {
        failures.push(format!(
            "nondeterministic mass {} should be {expected_mass}",
            map.nondeterministic_mass
        ));
    }

    let rows = vec![
        ("n".to_string(), n.to_string()),
        ("value".to_string(), report::sig(sol.value)),
        ("pair_monotone".to_string(), bool_row(pm.holds)),
        ("cyclically_monotone".to_string(), bool_row(cm.holds)),
        ("nondeterministic_mass".to_string(), report::sig(map.nondeterministic_mass)),
        ("expected_nondeterministic_mass".to_string(), report::sig(expected_mass)),
    ];
    let certificate = json!({
        "scenario": scenario,
        "value": sol.value,
        "pair_monotone": pm,
        "cyclically_monotone": cm,
        "map": map_json(&map),
    });
    finish(out, scenario, cfg.seed, rows, certificate, failures)
}

/// Uniform points on the unit circle, each sent one step around. Pairwise
/// swaps cannot beat the rotation, but undoing the whole cycle drops the
/// maximal cost to zero, so the cycle certificate must fail with the full
/// rotation as its witness.
fn rotation(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let scenario = cfg.scenario.name();
    let n = *cfg.n.as_ref().unwrap_or(&12);
    let step = *cfg.step.as_ref().unwrap_or(&1);
    if n < 3 {
        return Err(CliError::Config("n: need at least 3 points on the circle".to_string()));
    }
    let tol = cfg.tolerance();
    let points: Vec<Point> = (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            Point::new(vec![a.cos(), a.sin()]).unwrap()
        })
        .collect();
    let measure = DiscreteMeasure::uniform(points).unwrap();
    let mass = 1.0 / n as f64;
    let entries: Vec<(usize, usize, f64)> = (0..n).map(|k| (k, (k + step) % n, mass)).collect();
    let plan = Coupling::new(measure.clone(), measure, entries)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let cost = Cost::euclidean(2);

    let step_cost = 2.0 * (PI * (step % n) as f64 / n as f64).sin();
    let (pm, cm) = certificate_pair(&plan, &cost, tol);
    report::write_plan(&out.join("plan.csv"), &plan)?;

    let mut rows = vec![
        ("n".to_string(), n.to_string()),
        ("step".to_string(), step.to_string()),
        ("step_cost".to_string(), report::sig(step_cost)),
        ("pair_monotone".to_string(), bool_row(pm.holds)),
        ("cyclically_monotone".to_string(), bool_row(cm.holds)),
    ];
    if let Some(MonotonicityWitness::Cycle(w)) = &cm.witness {
        rows.push(("witness_cycle_length".to_string(), w.entries.len().to_string()));
        rows.push(("witness_own_max".to_string(), report::sig(w.own_max)));
        rows.push(("witness_permuted_max".to_string(), report::sig(w.permuted_max)));
    }

    let mut failures = Vec::new();
    if !pm.holds {
        failures.push("rotation should be pairwise monotone".to_string());
    }
    if cm.holds {
        failures.push("rotation should admit an improving cycle".to_string());
    }

    let certificate = json!({
        "scenario": scenario,
        "step_cost": step_cost,
        "pair_monotone": pm,
        "cyclically_monotone": cm,
    });
    finish(out, scenario, cfg.seed, rows, certificate, failures)
}

/// Grid discretizations of a translated square at increasing resolution. The
/// terminal plan should concentrate toward the translation map, so its
/// nondeterministic mass must not grow with resolution.
fn monge_trend(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let scenario = cfg.scenario.name();
    let sizes = cfg.n_values.clone().unwrap_or_else(|| vec![4, 8, 16]);
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(CliError::Config("n_values: need positive grid sizes".to_string()));
    }
    let order = cfg.arc_order.map(|o| o.to_order()).unwrap_or(ArcOrder::Forward);
    let p_term = *cfg.schedule().last().unwrap();
    let cost = Cost::euclidean(2);

    let mut rows = vec![("terminal_p".to_string(), report::sig(p_term))];
    let mut masses = Vec::with_capacity(sizes.len());
    let mut certs = Vec::new();
    let mut last_plan = None;
    for &n in &sizes {
        let mu = DiscreteMeasure::grid(&[0.0, 0.0], &[1.0, 1.0], n).unwrap();
        let nu = DiscreteMeasure::grid(&[2.0, 0.0], &[3.0, 1.0], n).unwrap();
        let sol = solve_p(&mu, &nu, &cost, p_term, order).map_err(solve_err)?;
        let map = extract_map(&sol.plan, 0.0);
        let cm = check_cyclically_monotone(&sol.plan, &cost, TERMINAL_CERT_TOL);
        rows.push((format!("nondeterministic_mass_n{n}"), report::sig(map.nondeterministic_mass)));
        certs.push(json!({
            "n": n,
            "terminal_value": sol.value,
            "cyclically_monotone": cm,
            "map": map_json(&map),
        }));
        masses.push(map.nondeterministic_mass);
        last_plan = Some(sol.plan);
    }
    report::write_plan(&out.join("plan.csv"), &last_plan.unwrap())?;

    let mut failures = Vec::new();
    for pair in masses.windows(2) {
        if pair[1] > pair[0] + 1e-12 {
            failures.push(format!(
                "nondeterministic mass should not grow with resolution ({} then {})",
                pair[0], pair[1]
            ));
        }
    }
    if *masses.last().unwrap() > TREND_MASS_CEILING {
        failures.push(format!(
            "nondeterministic mass {} at the finest grid exceeds {TREND_MASS_CEILING}",
            masses.last().unwrap()
        ));
    }

    let certificate = json!({ "scenario": scenario, "runs": certs });
    finish(out, scenario, cfg.seed, rows, certificate, failures)
}

/// Half the target mass sits in one atom. Two full pipelines that differ only
/// in the flow solver's tie-break order should route nearly the same sources
/// into the atom; the symmetric gap between the two extracted maps is the
/// diagnostic, bounded by the discretization scale 2/n.
fn uniqueness_atom(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let scenario = cfg.scenario.name();
    let n = *cfg.n.as_ref().unwrap_or(&8);
    if n < 2 || !n.is_multiple_of(2) {
        return Err(CliError::Config(
            "n: need an even grid size so the atom avoids the grid points".to_string(),
        ));
    }
    let p_term = *cfg.schedule().last().unwrap();
    let cost = Cost::euclidean(2);
    let mu = DiscreteMeasure::grid(&[0.0, 0.0], &[1.0, 1.0], n).unwrap();
    let base = DiscreteMeasure::grid(&[2.0, 0.0], &[3.0, 1.0], n).unwrap();
    let mut points = base.points().to_vec();
    let mut weights: Vec<f64> = base.weights().iter().map(|w| 0.5 * w).collect();
    let atom_index = points.len();
    points.push(Point::new(vec![2.5, 0.5]).unwrap());
    weights.push(0.5);
    let nu = DiscreteMeasure::new(points, weights).map_err(|e| CliError::Config(e.to_string()))?;

    let forward = solve_p(&mu, &nu, &cost, p_term, ArcOrder::Forward).map_err(solve_err)?;
    let reversed = solve_p(&mu, &nu, &cost, p_term, ArcOrder::Reversed).map_err(solve_err)?;
    let map_f = extract_map(&forward.plan, 0.0);
    let map_r = extract_map(&reversed.plan, 0.0);
    let gap = uniqueness_gap(&map_f.assignment, &map_r.assignment, atom_index, &mu, &nu)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let cm_f = check_cyclically_monotone(&forward.plan, &cost, TERMINAL_CERT_TOL);
    let cm_r = check_cyclically_monotone(&reversed.plan, &cost, TERMINAL_CERT_TOL);
    report::write_plan(&out.join("plan.csv"), &forward.plan)?;

    let bound = 2.0 / n as f64;
    let mut failures = Vec::new();
    if gap.symmetric_gap > bound + 1e-12 {
        failures.push(format!(
            "symmetric gap {} exceeds the discretization bound {bound}",
            gap.symmetric_gap
        ));
    }

    let rows = vec![
        ("n".to_string(), n.to_string()),
        ("atom_index".to_string(), atom_index.to_string()),
        ("gap".to_string(), report::sig(gap.gap)),
        ("symmetric_gap".to_string(), report::sig(gap.symmetric_gap)),
        ("gap_bound".to_string(), report::sig(bound)),
        ("forward_cyclically_monotone".to_string(), bool_row(cm_f.holds)),
        ("reversed_cyclically_monotone".to_string(), bool_row(cm_r.holds)),
    ];
    let certificate = json!({
        "scenario": scenario,
        "uniqueness": gap,
        "forward_cyclically_monotone": cm_f,
        "reversed_cyclically_monotone": cm_r,
        "forward_map": map_json(&map_f),
        "reversed_map": map_json(&map_r),
    });
    finish(out, scenario, cfg.seed, rows, certificate, failures)
}

fn verdict_row(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

/// Numerical screening of a cost family against the structural assumptions
/// the certificates lean on. No verdict is asserted unless the config says
/// what to expect.
fn cost_validate(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let scenario = cfg.scenario.name();
    let dim = *cfg.dim.as_ref().unwrap_or(&2);
    if dim == 0 {
        return Err(CliError::Config("dim: must be positive".to_string()));
    }
    let trials = *cfg.trials.as_ref().unwrap_or(&1000);
    let cost = need(&cfg.cost, "cost", scenario)?.build(dim)?;
    let bx = match &cfg.probe_box {
        Some(spec) => {
            if spec.lower.len() != dim || spec.upper.len() != dim {
                return Err(CliError::Config(format!("probe_box: expected dimension {dim}")));
            }
            let ordered = spec.lower.iter().zip(&spec.upper).all(|(l, u)| l < u);
            if !ordered {
                return Err(CliError::Config("probe_box: lower must be below upper".to_string()));
            }
            ProbeBox::new(spec.lower.clone(), spec.upper.clone())
        }
        None => ProbeBox::centered(dim, 2.0),
    };
    let center: Vec<f64> = (0..dim).map(|k| 0.5 * (bx.lower()[k] + bx.upper()[k])).collect();
    let quarter: Vec<f64> =
        (0..dim).map(|k| bx.lower()[k] + 0.25 * (bx.upper()[k] - bx.lower()[k])).collect();
    let three_quarter: Vec<f64> =
        (0..dim).map(|k| bx.lower()[k] + 0.75 * (bx.upper()[k] - bx.lower()[k])).collect();
    let y = Point::new(center).unwrap();
    let targets = vec![y.clone(), Point::new(quarter).unwrap(), Point::new(three_quarter).unwrap()];

    let reports: Vec<(&str, ValidationReport)> = vec![
        ("strict_quasiconvexity", check_strict_quasiconvexity(&cost, &y, &bx, trials, cfg.seed)),
        ("zero_set", check_zero_set(&cost, &targets, &bx, cfg.seed)),
        ("twist_kind", check_twist_kind(&cost, &bx, trials, cfg.seed)),
        ("sublevel_smoothness", sublevel_smoothness_probe(&cost, &y, 1.0, 720)),
    ];

    let mut rows = vec![
        ("family".to_string(), cost.family_name().to_string()),
        ("trials".to_string(), trials.to_string()),
    ];
    for (name, rep) in &reports {
        rows.push((name.to_string(), verdict_row(rep.verdict).to_string()));
        rows.push((format!("{name}_samples"), rep.samples_tested.to_string()));
    }

    let mut failures = Vec::new();
    if let Some(expect) = &cfg.expect {
        for (key, want) in expect {
            let Some((_, rep)) = reports.iter().find(|(name, _)| name == key) else {
                return Err(CliError::Config(format!(
                    "expect.{key}: unknown property (expected one of strict_quasiconvexity, zero_set, twist_kind, sublevel_smoothness)"
                )));
            };
            let got = verdict_row(rep.verdict);
            if got != want {
                failures.push(format!("{key}: expected {want}, got {got}"));
            }
        }
    }

    let certificate = json!({
        "scenario": scenario,
        "family": cost.family_name(),
        "reports": reports.iter().map(|(name, rep)| json!({"property": name, "report": rep})).collect::<Vec<_>>(),
    });
    finish(out, scenario, cfg.seed, rows, certificate, failures)
}

/// Plain single-exponent solve for the `solve --p` command line: no schedule,
/// no assertions, same artifacts.
pub fn run_single_p(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &Cost,
    p: f64,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Config(format!("creating {}: {e}", out.display())))?;
    let sol = solve_p(mu, nu, cost, p, ArcOrder::Forward).map_err(solve_err)?;
    let (pm, cm) = certificate_pair(&sol.plan, cost, TERMINAL_CERT_TOL);
    let map = extract_map(&sol.plan, 0.0);
    report::write_plan(&out.join("plan.csv"), &sol.plan)?;
    let rows = vec![
        ("p".to_string(), report::sig(sol.p)),
        ("value".to_string(), report::sig(sol.value)),
        ("support_size".to_string(), sol.plan.entries().len().to_string()),
        ("pair_monotone".to_string(), bool_row(pm.holds)),
        ("cyclically_monotone".to_string(), bool_row(cm.holds)),
        ("nondeterministic_mass".to_string(), report::sig(map.nondeterministic_mass)),
    ];
    let certificate = json!({
        "scenario": "solve-p",
        "p": sol.p,
        "value": sol.value,
        "pair_monotone": pm,
        "cyclically_monotone": cm,
        "map": map_json(&map),
    });
    let mut all = vec![("seed".to_string(), seed.to_string())];
    all.extend(rows);
    report::write_summary(&out.join("summary.csv"), "solve-p", &all)?;
    report::write_certificate(&out.join("certificate.json"), &certificate)
}
