//! Sampling-based validators for the structural assumptions a cost must meet
//! before map extraction and uniqueness arguments mean anything.
//!
//! Each check hunts for a counterexample with seeded random probes plus
//! structure-aware constructions (equal-level pairs, level-set walks, ray
//! casting). A `Fail` verdict always carries a concrete witness that
//! re-evaluates as a violation (see [`witness_violates`]); a `Pass` verdict
//! only means no witness was found at the sampled resolution, never a proof.
//! `Inconclusive` is returned when the probe could not even be set up, e.g.
//! an optimizer that did not converge or a probe restricted to d = 2 applied
//! elsewhere.
//!
//! All thresholds live in named constants below so experiment reports can
//! cite them.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::costs::{Cost, CostError};
use crate::measures::{DiscreteMeasure, Point};

/// Midpoint margin at or above which strict quasiconvexity counts as broken.
pub const QC_MARGIN_TOL: f64 = 1e-12;

/// Two probe points closer than this are not treated as distinct.
pub const MIN_SEPARATION: f64 = 1e-6;

/// Maximum level mismatch accepted for an "equal level" pair.
pub const LEVEL_MATCH_TOL: f64 = 1e-9;

/// Normal directions within this angle (radians) count as equal.
pub const TWIST_ANGLE_TOL: f64 = 1e-6;

/// A numerical infimum above this fails the zero-set check.
pub const ZERO_SET_TOL: f64 = 1e-6;

/// Turning angle (radians) between adjacent boundary edges that flags a
/// corner. Calibrated for >= 360 rays: a smooth boundary turns by about
/// 2*pi/rays per step, two orders of magnitude below this.
pub const CORNER_TURN_TOL: f64 = 0.2;

/// Which structural property a report speaks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum CheckedProperty {
    StrictQuasiconvexity,
    ZeroSet,
    TwistKind,
    SublevelSmoothness,
}

impl CheckedProperty {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckedProperty::StrictQuasiconvexity => "strict-quasiconvexity",
            CheckedProperty::ZeroSet => "zero-set",
            CheckedProperty::TwistKind => "twist-kind",
            CheckedProperty::SublevelSmoothness => "sublevel-smoothness",
        }
    }
}

/// Outcome of a sampling validator. `Pass` is "no violation found at this
/// sampling resolution", not a proof.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Concrete configuration demonstrating a failed check.
#[derive(Clone, Debug, serde::Serialize)]
pub enum ValidationWitness {
    /// c((1-t)x + t x_bar, y) >= max{c(x,y), c(x_bar,y)} - QC_MARGIN_TOL.
    Quasiconvexity {
        x: Vec<f64>,
        x_bar: Vec<f64>,
        y: Vec<f64>,
        t: f64,
        midpoint_value: f64,
        max_value: f64,
    },
    /// inf_x c(x, y) appears to be bounded away from zero.
    ZeroSet { y: Vec<f64>, x_best: Vec<f64>, value: f64 },
    /// Distinct equal-level targets whose sublevel normals at x coincide.
    Twist {
        x: Vec<f64>,
        y: Vec<f64>,
        y_tilde: Vec<f64>,
        level: f64,
        normal_angle: f64,
        separation: f64,
    },
    /// Adjacent boundary edges of a sublevel set with a sharp turn.
    Corner {
        y: Vec<f64>,
        lambda: f64,
        before: Vec<f64>,
        at: Vec<f64>,
        after: Vec<f64>,
        turn_angle: f64,
    },
}

/// Report from one validator run.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ValidationReport {
    pub property: CheckedProperty,
    pub verdict: Verdict,
    pub witness: Option<ValidationWitness>,
    /// Probes actually evaluated.
    pub samples_tested: usize,
    /// Probes abandoned (vanishing gradient, failed bracket, coincident points).
    pub skipped: usize,
}

impl ValidationReport {
    fn pass(property: CheckedProperty, samples: usize, skipped: usize) -> Self {
        ValidationReport { property, verdict: Verdict::Pass, witness: None, samples_tested: samples, skipped }
    }

    fn fail(property: CheckedProperty, w: ValidationWitness, samples: usize, skipped: usize) -> Self {
        ValidationReport {
            property,
            verdict: Verdict::Fail,
            witness: Some(w),
            samples_tested: samples,
            skipped,
        }
    }

    fn inconclusive(property: CheckedProperty, samples: usize, skipped: usize) -> Self {
        ValidationReport {
            property,
            verdict: Verdict::Inconclusive,
            witness: None,
            samples_tested: samples,
            skipped,
        }
    }
}

/// Axis-aligned sampling region for the probes.
#[derive(Clone, Debug)]
pub struct ProbeBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ProbeBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> ProbeBox {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(a, b)| a < b), "box must have positive extent");
        ProbeBox { lo, hi }
    }

    /// Cube [-half, half]^d.
    pub fn centered(dim: usize, half: f64) -> ProbeBox {
        ProbeBox::new(vec![-half; dim], vec![half; dim])
    }

    /// Joint bounding box of both supports, inflated by 50% per side (with a
    /// minimum half-width so single points still get a region to probe).
    pub fn from_measures(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> ProbeBox {
        let (mut lo, mut hi) = mu.bounding_box();
        let (nlo, nhi) = nu.bounding_box();
        for k in 0..lo.len() {
            lo[k] = lo[k].min(nlo[k]);
            hi[k] = hi[k].max(nhi[k]);
            let mid = 0.5 * (lo[k] + hi[k]);
            let half = (0.5 * (hi[k] - lo[k]) * 1.5).max(0.5);
            lo[k] = mid - half;
            hi[k] = mid + half;
        }
        ProbeBox { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lo
    }

    pub fn upper(&self) -> &[f64] {
        &self.hi
    }

    fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| rng.random_range(a..b))
            .collect()
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    // Independent stream per trial so results do not depend on how many
    // samples earlier trials consumed.
    ChaCha8Rng::seed_from_u64(seed ^ trial.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn unit_direction(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.iter().map(|a| a / n).collect();
        }
    }
}

fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Finds t in (0, hi] with f(t) = 0 given f(0) < 0, expanding the bracket by
/// doubling. Returns None when no sign change is found.
fn bracket_and_bisect(mut f: impl FnMut(f64) -> f64, t_init: f64) -> Option<f64> {
    let mut lo = 0.0;
    let mut hi = t_init;
    let mut f_hi = f(hi);
    let mut expansions = 0;
    while f_hi < 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 || !hi.is_finite() {
            return None;
        }
        f_hi = f(hi);
    }
    if !f_hi.is_finite() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// Nelder-Mead minimization; returns (argmin, value, final simplex diameter).
fn nelder_mead(
    f: &impl Fn(&[f64]) -> f64,
    start: &[f64],
    scale: f64,
    max_iter: usize,
) -> (Vec<f64>, f64, f64) {
    let d = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((start.to_vec(), f(start)));
    for k in 0..d {
        let mut p = start.to_vec();
        p[k] += scale;
        let v = f(&p);
        simplex.push((p, v));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diam = simplex
            .iter()
            .skip(1)
            .map(|(p, _)| dist(p, &simplex[0].0))
            .fold(0.0, f64::max);
        if diam < 1e-10 || (simplex[d].1 - simplex[0].1).abs() < 1e-15 {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|k| simplex[..d].iter().map(|(p, _)| p[k]).sum::<f64>() / d as f64)
            .collect();
        let worst = simplex[d].clone();
        let reflect: Vec<f64> = (0..d).map(|k| centroid[k] + (centroid[k] - worst.0[k])).collect();
        let fr = f(&reflect);
        if fr < simplex[0].1 {
            let expand: Vec<f64> =
                (0..d).map(|k| centroid[k] + 2.0 * (centroid[k] - worst.0[k])).collect();
            let fe = f(&expand);
            simplex[d] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (reflect, fr);
        } else {
            let contract: Vec<f64> =
                (0..d).map(|k| centroid[k] + 0.5 * (worst.0[k] - centroid[k])).collect();
            let fc = f(&contract);
            if fc < worst.1 {
                simplex[d] = (contract, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> =
                        (0..d).map(|k| best[k] + 0.5 * (entry.0[k] - best[k])).collect();
                    let fv = f(&shrunk);
                    *entry = (shrunk, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let diam = simplex
        .iter()
        .skip(1)
        .map(|(p, _)| dist(p, &simplex[0].0))
        .fold(0.0, f64::max);
    (simplex[0].0.clone(), simplex[0].1, diam)
}

/// Best numerical minimizer of c(., y) over multiple starts.
fn minimize_in_x(
    cost: &Cost,
    y: &[f64],
    bx: &ProbeBox,
    seed: u64,
) -> (Vec<f64>, f64, bool) {
    let f = |x: &[f64]| cost.eval_slice(x, y);
    let d = cost.dim();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(x0) = cost.zero_point_x(y) {
        starts.push(x0);
    }
    starts.push(y.to_vec());
    for k in 0..d {
        let mut p = y.to_vec();
        p[k] += 0.5;
        starts.push(p);
        let mut m = y.to_vec();
        m[k] -= 0.5;
        starts.push(m);
    }
    let mut rng = trial_rng(seed, 0xa11ce);
    for _ in 0..3 {
        starts.push(bx.sample(&mut rng));
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut converged = false;
    for s in &starts {
        let (x, v, diam) = nelder_mead(&f, s, 0.25, 400);
        if diam < 1e-8 {
            converged = true;
        }
        if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
            best = Some((x, v));
        }
    }
    let (x, v) = best.expect("at least one start");
    (x, v, converged)
}

/// Probes strict quasiconvexity of c(., y): for distinct x, x_bar and
/// t in (0, 1), c((1-t)x + t x_bar, y) must stay strictly below
/// max{c(x,y), c(x_bar,y)}. Random pairs are complemented by equal-level
/// pairs built by ray shooting from the minimizer of c(., y), which is what
/// detects flat facets (random pairs land on a common level set with
/// probability zero).
pub fn check_strict_quasiconvexity(
    cost: &Cost,
    y: &Point,
    bx: &ProbeBox,
    trials: usize,
    seed: u64,
) -> ValidationReport {
    let property = CheckedProperty::StrictQuasiconvexity;
    let yc = y.coords();
    let mut skipped = 0;
    let mut tested = 0;
    // Minimizer of c(., y), used as the center for level-pair construction.
    let mut center: Option<Option<Vec<f64>>> = None;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial as u64);
        let level_pair = trial % 2 == 1;
        let (x, x_bar) = if !level_pair {
            (bx.sample(&mut rng), bx.sample(&mut rng))
        } else {
            let x = bx.sample(&mut rng);
            let lambda = cost.eval_slice(&x, yc);
            if lambda < 1e-6 {
                skipped += 1;
                continue;
            }
            let c0 = center
                .get_or_insert_with(|| match cost.zero_point_x(yc) {
                    Some(z) => Some(z),
                    None => {
                        let (xm, vm, conv) = minimize_in_x(cost, yc, bx, seed);
                        if conv && vm < lambda * 0.5 {
                            Some(xm)
                        } else {
                            None
                        }
                    }
                })
                .clone();
            let Some(c0) = c0 else {
                skipped += 1;
                continue;
            };
            if cost.eval_slice(&c0, yc) >= lambda {
                skipped += 1;
                continue;
            }
            let w = unit_direction(&mut rng, cost.dim());
            let g = |t: f64| {
                let p: Vec<f64> = c0.iter().zip(&w).map(|(c, d)| c + t * d).collect();
                cost.eval_slice(&p, yc) - lambda
            };
            let Some(t_star) = bracket_and_bisect(g, 1.0) else {
                skipped += 1;
                continue;
            };
            let x_bar: Vec<f64> = c0.iter().zip(&w).map(|(c, d)| c + t_star * d).collect();
            if (cost.eval_slice(&x_bar, yc) - lambda).abs() > LEVEL_MATCH_TOL {
                skipped += 1;
                continue;
            }
            (x, x_bar)
        };
        if dist(&x, &x_bar) < MIN_SEPARATION {
            skipped += 1;
            continue;
        }
        let t = rng.random_range(0.1..0.9);
        let mid: Vec<f64> = x.iter().zip(&x_bar).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        let cx = cost.eval_slice(&x, yc);
        let cxb = cost.eval_slice(&x_bar, yc);
        let cm = cost.eval_slice(&mid, yc);
        let max = cx.max(cxb);
        tested += 1;
        if cm >= max - QC_MARGIN_TOL {
            return ValidationReport::fail(
                property,
                ValidationWitness::Quasiconvexity {
                    x,
                    x_bar,
                    y: yc.to_vec(),
                    t,
                    midpoint_value: cm,
                    max_value: max,
                },
                tested,
                skipped,
            );
        }
    }
    ValidationReport::pass(property, tested, skipped)
}

/// Checks that inf_x c(x, y) is ~0 for each given y by multi-start
/// derivative-free minimization. Fails when a converged optimizer still sits
/// above [`ZERO_SET_TOL`] (or below zero, which breaks nonnegativity);
/// inconclusive when no start converged.
pub fn check_zero_set(
    cost: &Cost,
    ys: &[Point],
    bx: &ProbeBox,
    seed: u64,
) -> ValidationReport {
    let property = CheckedProperty::ZeroSet;
    let mut tested = 0;
    let mut any_inconclusive = false;
    for (iy, y) in ys.iter().enumerate() {
        let (x_best, value, converged) = minimize_in_x(cost, y.coords(), bx, seed ^ iy as u64);
        tested += 1;
        if value.abs() <= ZERO_SET_TOL {
            continue;
        }
        if converged {
            return ValidationReport::fail(
                property,
                ValidationWitness::ZeroSet { y: y.coords().to_vec(), x_best, value },
                tested,
                0,
            );
        }
        any_inconclusive = true;
    }
    if any_inconclusive {
        ValidationReport::inconclusive(property, tested, 0)
    } else {
        ValidationReport::pass(property, tested, 0)
    }
}

fn fd_grad_y(cost: &Cost, x: &[f64], y: &[f64], step: f64) -> Vec<f64> {
    let mut yp = y.to_vec();
    let mut g = vec![0.0; y.len()];
    for k in 0..y.len() {
        let orig = yp[k];
        yp[k] = orig + step;
        let fp = cost.eval_slice(x, &yp);
        yp[k] = orig - step;
        let fm = cost.eval_slice(x, &yp);
        yp[k] = orig;
        g[k] = (fp - fm) / (2.0 * step);
    }
    g
}

/// Hunts for twist-kind violations: distinct targets y != y_tilde at a common
/// positive level c(x, y) = c(x, y_tilde) whose sublevel normals at x agree.
/// Equal-level partners are built by 1-d root finding along rays from the
/// zero of c(x, .) when the family knows it, and by a tangent walk along the
/// level set (with Newton correction back to the level) otherwise.
pub fn check_twist_kind(
    cost: &Cost,
    bx: &ProbeBox,
    trials: usize,
    seed: u64,
) -> ValidationReport {
    let property = CheckedProperty::TwistKind;
    let d = cost.dim();
    let mut tested = 0;
    let mut skipped = 0;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial as u64);
        let x = bx.sample(&mut rng);
        let y = bx.sample(&mut rng);
        let lambda = cost.eval_slice(&x, &y);
        if lambda < 1e-6 {
            skipped += 1;
            continue;
        }
        let y_tilde = match cost.zero_point_y(&x) {
            Some(y0) if cost.eval_slice(&x, &y0) < lambda * 0.5 => {
                let w = unit_direction(&mut rng, d);
                let g = |t: f64| {
                    let p: Vec<f64> = y0.iter().zip(&w).map(|(c, dr)| c + t * dr).collect();
                    cost.eval_slice(&x, &p) - lambda
                };
                bracket_and_bisect(g, 1.0)
                    .map(|t| y0.iter().zip(&w).map(|(c, dr)| c + t * dr).collect())
            }
            _ => {
                // Tangent walk: step orthogonally to grad_y c, then correct
                // back onto the level set along the gradient.
                let gy = fd_grad_y(cost, &x, &y, 1e-5);
                let gn = norm(&gy);
                if gn < 1e-10 {
                    // Level set is locally flat in every direction; any step
                    // stays on the level.
                    let mut w = vec![0.0; d];
                    w[trial % d] = 1.0;
                    let cand: Vec<f64> = y.iter().zip(&w).map(|(a, b)| a + b).collect();
                    if (cost.eval_slice(&x, &cand) - lambda).abs() <= LEVEL_MATCH_TOL {
                        Some(cand)
                    } else {
                        None
                    }
                } else {
                    let tangent: Vec<f64> = if d == 2 {
                        vec![-gy[1] / gn, gy[0] / gn]
                    } else {
                        let v = unit_direction(&mut rng, d);
                        let proj: f64 =
                            v.iter().zip(&gy).map(|(a, b)| a * b).sum::<f64>() / (gn * gn);
                        let t: Vec<f64> =
                            v.iter().zip(&gy).map(|(a, b)| a - proj * b).collect();
                        let tn = norm(&t);
                        if tn < 1e-6 {
                            skipped += 1;
                            continue;
                        }
                        t.iter().map(|a| a / tn).collect()
                    };
                    let step = 0.5;
                    let mut cand: Vec<f64> =
                        y.iter().zip(&tangent).map(|(a, b)| a + step * b).collect();
                    let mut ok = false;
                    for _ in 0..50 {
                        let err = cost.eval_slice(&x, &cand) - lambda;
                        if err.abs() <= 1e-12 * lambda.max(1.0) {
                            ok = true;
                            break;
                        }
                        let gc = fd_grad_y(cost, &x, &cand, 1e-5);
                        let gg: f64 = gc.iter().map(|a| a * a).sum();
                        if gg < 1e-16 {
                            break;
                        }
                        for (ck, gk) in cand.iter_mut().zip(&gc) {
                            *ck -= err * gk / gg;
                        }
                    }
                    if ok && (cost.eval_slice(&x, &cand) - lambda).abs() <= LEVEL_MATCH_TOL {
                        Some(cand)
                    } else {
                        None
                    }
                }
            }
        };
        let Some(y_tilde) = y_tilde else {
            skipped += 1;
            continue;
        };
        let separation = dist(&y, &y_tilde);
        if separation <= MIN_SEPARATION {
            skipped += 1;
            continue;
        }
        let n1 = match cost.unit_normal_x_slice(&x, &y) {
            Ok(n) => n,
            Err(CostError::VanishingGradient { .. }) => {
                skipped += 1;
                continue;
            }
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let n2 = match cost.unit_normal_x_slice(&x, &y_tilde) {
            Ok(n) => n,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        tested += 1;
        let angle = angle_between(&n1, &n2);
        if angle <= TWIST_ANGLE_TOL {
            return ValidationReport::fail(
                property,
                ValidationWitness::Twist {
                    x,
                    y,
                    y_tilde,
                    level: lambda,
                    normal_angle: angle,
                    separation,
                },
                tested,
                skipped,
            );
        }
    }
    ValidationReport::pass(property, tested, skipped)
}

/// Traces the boundary of {x : c(x, y) <= lambda} with `directions` rays from
/// the minimizer (d = 2 only) and flags turning angles above
/// [`CORNER_TURN_TOL`] between adjacent boundary edges. Smooth boundaries at
/// 720 rays turn by ~0.009 rad per step; a square corner concentrates ~pi/2
/// in one step.
pub fn sublevel_smoothness_probe(
    cost: &Cost,
    y: &Point,
    lambda: f64,
    directions: usize,
) -> ValidationReport {
    let property = CheckedProperty::SublevelSmoothness;
    if cost.dim() != 2 || lambda <= 0.0 || directions < 8 {
        return ValidationReport::inconclusive(property, 0, 0);
    }
    let yc = y.coords();
    let center = match cost.zero_point_x(yc) {
        Some(c) => c,
        None => {
            let bx = ProbeBox::new(
                vec![yc[0] - 2.0 * lambda - 1.0, yc[1] - 2.0 * lambda - 1.0],
                vec![yc[0] + 2.0 * lambda + 1.0, yc[1] + 2.0 * lambda + 1.0],
            );
            let (c, v, conv) = minimize_in_x(cost, yc, &bx, 11);
            if !conv || v >= lambda {
                return ValidationReport::inconclusive(property, 0, 0);
            }
            c
        }
    };
    if cost.eval_slice(&center, yc) >= lambda {
        return ValidationReport::inconclusive(property, 0, 0);
    }
    let mut boundary: Vec<Vec<f64>> = Vec::with_capacity(directions);
    for k in 0..directions {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / directions as f64;
        let u = [phi.cos(), phi.sin()];
        let g = |r: f64| {
            let p = [center[0] + r * u[0], center[1] + r * u[1]];
            cost.eval_slice(&p, yc) - lambda
        };
        let Some(r) = bracket_and_bisect(g, lambda.max(1e-3)) else {
            return ValidationReport::inconclusive(property, k, 0);
        };
        boundary.push(vec![center[0] + r * u[0], center[1] + r * u[1]]);
    }
    let mut worst_turn = 0.0;
    let mut worst_k = 0;
    let n = boundary.len();
    for k in 0..n {
        let prev = &boundary[(k + n - 1) % n];
        let here = &boundary[k];
        let next = &boundary[(k + 1) % n];
        let e0 = [here[0] - prev[0], here[1] - prev[1]];
        let e1 = [next[0] - here[0], next[1] - here[1]];
        let turn = angle_between(&e0, &e1);
        if turn > worst_turn {
            worst_turn = turn;
            worst_k = k;
        }
    }
    if worst_turn > CORNER_TURN_TOL {
        let prev = boundary[(worst_k + n - 1) % n].clone();
        let here = boundary[worst_k].clone();
        let next = boundary[(worst_k + 1) % n].clone();
        return ValidationReport::fail(
            property,
            ValidationWitness::Corner {
                y: yc.to_vec(),
                lambda,
                before: prev,
                at: here,
                after: next,
                turn_angle: worst_turn,
            },
            directions,
            0,
        );
    }
    ValidationReport::pass(property, directions, 0)
}

/// Re-evaluates a witness against the cost it came from, with every
/// detection threshold relaxed by a factor of 10. Fail reports must survive
/// this; tests lean on it.
pub fn witness_violates(cost: &Cost, witness: &ValidationWitness) -> bool {
    match witness {
        ValidationWitness::Quasiconvexity { x, x_bar, y, t, .. } => {
            let mid: Vec<f64> =
                x.iter().zip(x_bar).map(|(a, b)| (1.0 - t) * a + t * b).collect();
            let cm = cost.eval_slice(&mid, y);
            let max = cost.eval_slice(x, y).max(cost.eval_slice(x_bar, y));
            dist(x, x_bar) >= MIN_SEPARATION / 10.0 && cm >= max - 10.0 * QC_MARGIN_TOL
        }
        ValidationWitness::ZeroSet { y, x_best, .. } => {
            cost.eval_slice(x_best, y).abs() >= ZERO_SET_TOL / 10.0
        }
        ValidationWitness::Twist { x, y, y_tilde, .. } => {
            let level_gap = (cost.eval_slice(x, y) - cost.eval_slice(x, y_tilde)).abs();
            let (Ok(n1), Ok(n2)) = (
                cost.unit_normal_x_slice(x, y),
                cost.unit_normal_x_slice(x, y_tilde),
            ) else {
                return false;
            };
            level_gap <= 10.0 * LEVEL_MATCH_TOL
                && dist(y, y_tilde) >= MIN_SEPARATION / 10.0
                && angle_between(&n1, &n2) <= 10.0 * TWIST_ANGLE_TOL
        }
        ValidationWitness::Corner { y, lambda, before, at, after, .. } => {
            let e0 = [at[0] - before[0], at[1] - before[1]];
            let e1 = [after[0] - at[0], after[1] - at[1]];
            let on_level = [before, at, after].iter().all(|p| {
                (cost.eval_slice(p, y) - lambda).abs() <= 1e-6 * lambda.max(1.0)
            });
            on_level && angle_between(&e0, &e1) >= CORNER_TURN_TOL / 10.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::p2;

    fn unit_box() -> ProbeBox {
        ProbeBox::centered(2, 1.5)
    }

    #[test]
    fn quadratic_structure_passes_everything() {
        let c = Cost::translation_power(2, 2.0).unwrap();
        let y = p2(0.0, 0.0);
        let bx = unit_box();
        let qc = check_strict_quasiconvexity(&c, &y, &bx, 10_000, 0);
        assert_eq!(qc.verdict, Verdict::Pass, "{qc:?}");
        let zs = check_zero_set(&c, &[y.clone(), p2(0.3, -0.7)], &bx, 0);
        assert_eq!(zs.verdict, Verdict::Pass, "{zs:?}");
        let tw = check_twist_kind(&c, &bx, 1_000, 0);
        assert_eq!(tw.verdict, Verdict::Pass, "{tw:?}");
        let sm = sublevel_smoothness_probe(&c, &y, 1.0, 720);
        assert_eq!(sm.verdict, Verdict::Pass, "{sm:?}");
    }

    #[test]
    fn sup_norm_fails_strict_quasiconvexity_with_flat_facet() {
        let c = Cost::sup_norm(2);
        let y = p2(0.0, 0.0);
        let rep = check_strict_quasiconvexity(&c, &y, &unit_box(), 10_000, 0);
        assert_eq!(rep.verdict, Verdict::Fail);
        let w = rep.witness.expect("fail carries witness");
        assert!(witness_violates(&c, &w), "{w:?}");
        // The canonical flat facet: x = (1,0), x_bar = (1,0.5), t = 1/2.
        let canonical = ValidationWitness::Quasiconvexity {
            x: vec![1.0, 0.0],
            x_bar: vec![1.0, 0.5],
            y: vec![0.0, 0.0],
            t: 0.5,
            midpoint_value: 1.0,
            max_value: 1.0,
        };
        assert!(witness_violates(&c, &canonical));
    }

    #[test]
    fn sup_norm_corner_is_detected() {
        let c = Cost::sup_norm(2);
        let rep = sublevel_smoothness_probe(&c, &p2(0.0, 0.0), 1.0, 720);
        assert_eq!(rep.verdict, Verdict::Fail);
        let Some(ValidationWitness::Corner { at, turn_angle, .. }) = &rep.witness else {
            panic!("expected corner witness: {rep:?}");
        };
        assert!(*turn_angle > CORNER_TURN_TOL);
        // Witness sits near one of the four corners of the level square.
        let corner_dist = [
            (1.0_f64, 1.0_f64),
            (1.0, -1.0),
            (-1.0, 1.0),
            (-1.0, -1.0),
        ]
        .iter()
        .map(|(cx, cy)| ((at[0] - cx).powi(2) + (at[1] - cy).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min);
        assert!(corner_dist < 0.05, "witness at {at:?}, distance {corner_dist}");
        assert!(witness_violates(&c, rep.witness.as_ref().unwrap()));
    }

    #[test]
    fn quartic_sublevels_are_smooth_circles() {
        let c = Cost::translation_power(2, 4.0).unwrap();
        let rep = sublevel_smoothness_probe(&c, &p2(0.0, 0.0), 0.5, 720);
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
        let probe = sublevel_smoothness_probe(&c, &p2(0.0, 0.0), 0.5, 4);
        assert_eq!(probe.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn shifted_cost_fails_zero_set() {
        let c = Cost::custom(
            2,
            "euclidean-plus-one",
            |x, y| {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.sqrt() + 1.0
            },
            None,
        );
        let rep = check_zero_set(&c, &[p2(0.2, 0.1)], &unit_box(), 0);
        assert_eq!(rep.verdict, Verdict::Fail);
        let Some(ValidationWitness::ZeroSet { value, .. }) = &rep.witness else {
            panic!("expected zero-set witness");
        };
        assert!((value - 1.0).abs() < 1e-3, "best value {value}");
        assert!(witness_violates(&c, rep.witness.as_ref().unwrap()));
    }

    #[test]
    fn first_coordinate_cost_fails_twist() {
        // Depends only on y1 - x1: every vertical translate of y sits on the
        // same level with the same normal.
        let c = Cost::custom(
            2,
            "first-coordinate-quadratic",
            |x, y| (y[0] - x[0]) * (y[0] - x[0]),
            None,
        );
        let rep = check_twist_kind(&c, &unit_box(), 200, 0);
        assert_eq!(rep.verdict, Verdict::Fail, "{rep:?}");
        let Some(ValidationWitness::Twist { y, y_tilde, .. }) = &rep.witness else {
            panic!("expected twist witness");
        };
        // The offending partner differs essentially only in the second coordinate.
        assert!((y[0] - y_tilde[0]).abs() < 1e-6);
        assert!((y[1] - y_tilde[1]).abs() > MIN_SEPARATION);
        assert!(witness_violates(&c, rep.witness.as_ref().unwrap()));
    }

    #[test]
    fn euclidean_passes_twist_and_smoothness() {
        let c = Cost::euclidean(2);
        let tw = check_twist_kind(&c, &unit_box(), 1_000, 3);
        assert_eq!(tw.verdict, Verdict::Pass, "{tw:?}");
        let sm = sublevel_smoothness_probe(&c, &p2(0.25, -0.5), 0.75, 720);
        assert_eq!(sm.verdict, Verdict::Pass, "{sm:?}");
        let d3 = sublevel_smoothness_probe(&Cost::euclidean(3), &Point::new(vec![0.0; 3]).unwrap(), 1.0, 720);
        assert_eq!(d3.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn affine_diag_two_passes_twist() {
        let c = Cost::affine_composed(
            2,
            2.0,
            &[vec![2.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
        )
        .unwrap();
        let rep = check_twist_kind(&c, &unit_box(), 1_000, 5);
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
    }
}
