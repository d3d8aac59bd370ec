//! Cost functions c(x, y) >= 0 on pairs of points, with gradients.
//!
//! Four built-in families cover the solver and certification pipelines:
//!
//! * [`Cost::euclidean`]: c(x, y) = |x - y|_2, the metric case.
//! * [`Cost::sup_norm`]: c(x, y) = max_k |x_k - y_k|. Its unit ball has flat
//!   facets and corners, which is exactly what the validators in
//!   [`crate::costs::validate`] are supposed to catch.
//! * [`Cost::translation_power`]: c(x, y) = |y - x|^q for an exponent q >= 1.
//! * [`Cost::affine_composed`]: c(x, y) = |A y + b - (F x + f)|^q with A and
//!   F invertible, the standard way to build twisted but well-posed costs.
//!
//! [`Cost::custom`] accepts arbitrary closures for experiments; validators
//! fall back to derivative-free probing when structure is unknown.
//!
//! Analytic x-gradients are provided where the family permits and checked
//! against central finite differences in the tests. A gradient whose norm
//! falls below [`VANISHING_GRADIENT_TOL`] is reported as an error rather than
//! silently normalized, since downstream normal comparisons would be noise.

pub mod validate;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::measures::Point;

/// Default step for central finite differences.
pub const FD_STEP: f64 = 1e-5;

/// Gradients with norm below this are treated as vanishing.
pub const VANISHING_GRADIENT_TOL: f64 = 1e-10;

/// Matrices with |det| at or below this are rejected as singular.
pub const SINGULAR_DET_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CostError {
    #[error("cost has dimension {expected}, point has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("exponent must be >= 1, got {q}")]
    InvalidExponent { q: f64 },
    #[error("{which} matrix is singular (|det| = {det:e})")]
    SingularMatrix { which: &'static str, det: f64 },
    #[error("{which} matrix is not {dim}x{dim}")]
    BadMatrixShape { which: &'static str, dim: usize },
    #[error("gradient vanishes (norm {norm:e} below {VANISHING_GRADIENT_TOL:e})")]
    VanishingGradient { norm: f64 },
    #[error("vector has length {found}, expected {expected}")]
    BadVectorLength { expected: usize, found: usize },
}

/// Dense square matrix with row-major storage; only what the affine family
/// needs (determinant, inverse, transpose-multiply).
#[derive(Clone, Debug)]
pub(crate) struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub(crate) fn from_rows(rows: &[Vec<f64>], which: &'static str) -> Result<Self, CostError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(CostError::BadMatrixShape { which, dim: n });
            }
            data.extend_from_slice(r);
        }
        Ok(SquareMatrix { n, data })
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub(crate) fn det(&self) -> f64 {
        // LU with partial pivoting.
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a[r * n + col].abs() > a[piv * n + col].abs() {
                    piv = r;
                }
            }
            if a[piv * n + col] == 0.0 {
                return 0.0;
            }
            if piv != col {
                for k in 0..n {
                    a.swap(col * n + k, piv * n + k);
                }
                det = -det;
            }
            det *= a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / a[col * n + col];
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
            }
        }
        det
    }

    pub(crate) fn inverse(&self, which: &'static str) -> Result<SquareMatrix, CostError> {
        let n = self.n;
        let det = self.det();
        if det.abs() <= SINGULAR_DET_TOL {
            return Err(CostError::SingularMatrix { which, det });
        }
        // Gauss-Jordan on [A | I].
        let mut a = self.data.clone();
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            inv[i * n + i] = 1.0;
        }
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a[r * n + col].abs() > a[piv * n + col].abs() {
                    piv = r;
                }
            }
            if piv != col {
                for k in 0..n {
                    a.swap(col * n + k, piv * n + k);
                    inv.swap(col * n + k, piv * n + k);
                }
            }
            let d = a[col * n + col];
            for k in 0..n {
                a[col * n + k] /= d;
                inv[col * n + k] /= d;
            }
            for r in 0..n {
                if r != col && a[r * n + col] != 0.0 {
                    let f = a[r * n + col];
                    for k in 0..n {
                        a[r * n + k] -= f * a[col * n + k];
                        inv[r * n + k] -= f * inv[col * n + k];
                    }
                }
            }
        }
        Ok(SquareMatrix { n, data: inv })
    }

    pub(crate) fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.at(i, j) * v[j]).sum())
            .collect()
    }

    pub(crate) fn transpose_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.at(i, j) * v[i]).sum())
            .collect()
    }
}

type EvalFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
enum Kind {
    Euclidean,
    SupNorm,
    TranslationPower {
        q: f64,
    },
    AffineComposed {
        q: f64,
        a: SquareMatrix,
        a_inv: SquareMatrix,
        b: Vec<f64>,
        f_mat: SquareMatrix,
        f_inv: SquareMatrix,
        f_vec: Vec<f64>,
    },
    Custom {
        name: String,
        eval: Arc<EvalFn>,
        grad_x: Option<Arc<GradFn>>,
    },
}

/// A nonnegative cost on pairs of d-dimensional points.
#[derive(Clone)]
pub struct Cost {
    dim: usize,
    kind: Kind,
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cost({}, d={})", self.family_name(), self.dim)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl Cost {
    pub fn euclidean(dim: usize) -> Cost {
        Cost { dim, kind: Kind::Euclidean }
    }

    pub fn sup_norm(dim: usize) -> Cost {
        Cost { dim, kind: Kind::SupNorm }
    }

    /// c(x, y) = |y - x|^q with q >= 1.
    pub fn translation_power(dim: usize, q: f64) -> Result<Cost, CostError> {
        if q < 1.0 || !q.is_finite() {
            return Err(CostError::InvalidExponent { q });
        }
        Ok(Cost { dim, kind: Kind::TranslationPower { q } })
    }

    /// c(x, y) = |A y + b - (F x + f)|^q with A and F invertible.
    pub fn affine_composed(
        dim: usize,
        q: f64,
        a_rows: &[Vec<f64>],
        b: Vec<f64>,
        f_rows: &[Vec<f64>],
        f_vec: Vec<f64>,
    ) -> Result<Cost, CostError> {
        if q < 1.0 || !q.is_finite() {
            return Err(CostError::InvalidExponent { q });
        }
        if a_rows.len() != dim {
            return Err(CostError::BadMatrixShape { which: "A", dim });
        }
        if f_rows.len() != dim {
            return Err(CostError::BadMatrixShape { which: "F", dim });
        }
        if b.len() != dim {
            return Err(CostError::BadVectorLength { expected: dim, found: b.len() });
        }
        if f_vec.len() != dim {
            return Err(CostError::BadVectorLength { expected: dim, found: f_vec.len() });
        }
        let a = SquareMatrix::from_rows(a_rows, "A")?;
        let f_mat = SquareMatrix::from_rows(f_rows, "F")?;
        let a_inv = a.inverse("A")?;
        let f_inv = f_mat.inverse("F")?;
        Ok(Cost {
            dim,
            kind: Kind::AffineComposed { q, a, a_inv, b, f_mat, f_inv, f_vec },
        })
    }

    /// Arbitrary nonnegative cost; `grad_x` may supply an analytic gradient.
    pub fn custom(
        dim: usize,
        name: impl Into<String>,
        eval: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        grad_x: Option<Arc<GradFn>>,
    ) -> Cost {
        Cost {
            dim,
            kind: Kind::Custom { name: name.into(), eval: Arc::new(eval), grad_x },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family_name(&self) -> &str {
        match &self.kind {
            Kind::Euclidean => "euclidean",
            Kind::SupNorm => "sup-norm",
            Kind::TranslationPower { .. } => "translation-power",
            Kind::AffineComposed { .. } => "affine-composed",
            Kind::Custom { name, .. } => name,
        }
    }

    fn check_dims(&self, x: &Point, y: &Point) -> Result<(), CostError> {
        if x.dim() != self.dim {
            return Err(CostError::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        if y.dim() != self.dim {
            return Err(CostError::DimensionMismatch { expected: self.dim, found: y.dim() });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &Point, y: &Point) -> Result<f64, CostError> {
        self.check_dims(x, y)?;
        Ok(self.eval_slice(x.coords(), y.coords()))
    }

    /// Hot-path evaluation on raw coordinate slices; dimensions unchecked.
    pub fn eval_slice(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        match &self.kind {
            Kind::Euclidean => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Kind::SupNorm => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
            Kind::TranslationPower { q } => {
                let r = x
                    .iter()
                    .zip(y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                r.powf(*q)
            }
            Kind::AffineComposed { q, a, b, f_mat, f_vec, .. } => {
                let gy = a.mul_vec(y);
                let fx = f_mat.mul_vec(x);
                let r = gy
                    .iter()
                    .zip(&fx)
                    .zip(b.iter().zip(f_vec))
                    .map(|((g, f), (bb, fv))| {
                        let v = g + bb - f - fv;
                        v * v
                    })
                    .sum::<f64>()
                    .sqrt();
                r.powf(*q)
            }
            Kind::Custom { eval, .. } => eval(x, y),
        }
    }

    /// Whether an analytic x-gradient formula exists for this family.
    pub fn has_analytic_gradient(&self) -> bool {
        match &self.kind {
            Kind::Euclidean | Kind::TranslationPower { .. } | Kind::AffineComposed { .. } => true,
            Kind::SupNorm => false,
            Kind::Custom { grad_x, .. } => grad_x.is_some(),
        }
    }

    fn analytic_gradient_x(&self, x: &[f64], y: &[f64]) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::Euclidean => {
                let r = self.eval_slice(x, y);
                if r == 0.0 {
                    return Some(vec![0.0; self.dim]);
                }
                Some(x.iter().zip(y).map(|(a, b)| (a - b) / r).collect())
            }
            Kind::TranslationPower { q } => {
                // c = |v|^q, v = y - x, grad_x c = -q |v|^(q-2) v.
                let v: Vec<f64> = y.iter().zip(x).map(|(b, a)| b - a).collect();
                let r = norm(&v);
                if r == 0.0 {
                    return Some(vec![0.0; self.dim]);
                }
                let s = -q * r.powf(q - 2.0);
                Some(v.iter().map(|vi| s * vi).collect())
            }
            Kind::AffineComposed { q, a, b, f_mat, f_vec, .. } => {
                // c = h(u), u = A y + b - F x - f, grad_x c = -F^T grad h(u).
                let gy = a.mul_vec(y);
                let fx = f_mat.mul_vec(x);
                let u: Vec<f64> = gy
                    .iter()
                    .zip(&fx)
                    .zip(b.iter().zip(f_vec))
                    .map(|((g, f), (bb, fv))| g + bb - f - fv)
                    .collect();
                let r = norm(&u);
                if r == 0.0 {
                    return Some(vec![0.0; self.dim]);
                }
                let s = q * r.powf(q - 2.0);
                let grad_h: Vec<f64> = u.iter().map(|ui| s * ui).collect();
                let ft = f_mat.transpose_mul_vec(&grad_h);
                Some(ft.iter().map(|v| -v).collect())
            }
            Kind::SupNorm => None,
            Kind::Custom { grad_x, .. } => grad_x.as_ref().map(|g| g(x, y)),
        }
    }

    /// Central finite differences in x with the given step.
    pub fn gradient_x_fd(&self, x: &[f64], y: &[f64], step: f64) -> Vec<f64> {
        let mut xp = x.to_vec();
        let mut g = vec![0.0; self.dim];
        for k in 0..self.dim {
            let orig = xp[k];
            xp[k] = orig + step;
            let fp = self.eval_slice(&xp, y);
            xp[k] = orig - step;
            let fm = self.eval_slice(&xp, y);
            xp[k] = orig;
            g[k] = (fp - fm) / (2.0 * step);
        }
        g
    }

    /// Gradient of c(., y) at x: analytic when the family has one, otherwise
    /// central differences at [`FD_STEP`]. Errors when the norm is below
    /// [`VANISHING_GRADIENT_TOL`].
    pub fn gradient_x(&self, x: &Point, y: &Point) -> Result<Vec<f64>, CostError> {
        self.check_dims(x, y)?;
        self.gradient_x_slice(x.coords(), y.coords())
    }

    pub(crate) fn gradient_x_slice(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>, CostError> {
        let g = match self.analytic_gradient_x(x, y) {
            Some(g) => g,
            None => self.gradient_x_fd(x, y, FD_STEP),
        };
        let n = norm(&g);
        if n < VANISHING_GRADIENT_TOL {
            return Err(CostError::VanishingGradient { norm: n });
        }
        Ok(g)
    }

    /// Outward unit normal of the sublevel set of c(., y) at x, i.e. the
    /// normalized x-gradient.
    pub fn unit_normal_x(&self, x: &Point, y: &Point) -> Result<Vec<f64>, CostError> {
        self.check_dims(x, y)?;
        self.unit_normal_x_slice(x.coords(), y.coords())
    }

    pub(crate) fn unit_normal_x_slice(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>, CostError> {
        let g = self.gradient_x_slice(x, y)?;
        let n = norm(&g);
        Ok(g.iter().map(|v| v / n).collect())
    }

    /// The y with c(x, y) = 0, when the family determines it analytically.
    pub fn zero_point_y(&self, x: &[f64]) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::Euclidean | Kind::SupNorm | Kind::TranslationPower { .. } => Some(x.to_vec()),
            Kind::AffineComposed { a_inv, b, f_mat, f_vec, .. } => {
                // Solve A y + b = F x + f.
                let fx = f_mat.mul_vec(x);
                let rhs: Vec<f64> = fx
                    .iter()
                    .zip(f_vec.iter().zip(b))
                    .map(|(f, (fv, bb))| f + fv - bb)
                    .collect();
                Some(a_inv.mul_vec(&rhs))
            }
            Kind::Custom { .. } => None,
        }
    }

    /// The x minimizing c(., y), when the family determines it analytically.
    pub fn zero_point_x(&self, y: &[f64]) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::Euclidean | Kind::SupNorm | Kind::TranslationPower { .. } => Some(y.to_vec()),
            Kind::AffineComposed { a, b, f_inv, f_vec, .. } => {
                // Solve F x + f = A y + b.
                let gy = a.mul_vec(y);
                let rhs: Vec<f64> = gy
                    .iter()
                    .zip(b.iter().zip(f_vec))
                    .map(|(g, (bb, fv))| g + bb - fv)
                    .collect();
                Some(f_inv.mul_vec(&rhs))
            }
            Kind::Custom { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{p2, Point};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn family_values() {
        let e = Cost::euclidean(2);
        assert_abs_diff_eq!(e.evaluate(&p2(0.0, 0.0), &p2(3.0, 4.0)).unwrap(), 5.0);
        let s = Cost::sup_norm(2);
        assert_abs_diff_eq!(s.evaluate(&p2(0.0, 0.0), &p2(3.0, 4.0)).unwrap(), 4.0);
        let q = Cost::translation_power(2, 2.0).unwrap();
        assert_abs_diff_eq!(q.evaluate(&p2(1.0, 1.0), &p2(1.0, 1.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(q.evaluate(&p2(0.0, 0.0), &p2(3.0, 4.0)).unwrap(), 25.0);
    }

    #[test]
    fn exponent_and_shape_validation() {
        assert!(matches!(
            Cost::translation_power(2, 0.5),
            Err(CostError::InvalidExponent { .. })
        ));
        let singular = Cost::affine_composed(
            2,
            2.0,
            &[vec![1.0, 1.0], vec![1.0, 1.0]],
            vec![0.0, 0.0],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
        );
        assert!(matches!(singular, Err(CostError::SingularMatrix { which: "A", .. })));
    }

    #[test]
    fn euclidean_gradient_is_unit_direction() {
        let e = Cost::euclidean(2);
        let g = e.gradient_x(&p2(1.0, 0.0), &p2(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-12);
        assert!(matches!(
            e.gradient_x(&p2(0.5, 0.5), &p2(0.5, 0.5)),
            Err(CostError::VanishingGradient { .. })
        ));
    }

    #[test]
    fn quadratic_gradient_example() {
        let q = Cost::translation_power(2, 2.0).unwrap();
        let g = q.gradient_x(&p2(0.0, 0.0), &p2(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(g[0], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn affine_gradient_matches_chain_rule() {
        // c = |A y + b - x|^2 with A = diag(2, 1).
        let c = Cost::affine_composed(
            2,
            2.0,
            &[vec![2.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
        )
        .unwrap();
        let x = p2(1.0, 1.0);
        let y = p2(2.0, 3.0);
        // u = (4 - 1, 3 - 1) = (3, 2); grad_x = -2u.
        let g = c.gradient_x(&x, &y).unwrap();
        assert_abs_diff_eq!(g[0], -6.0, epsilon = 1e-10);
        assert_abs_diff_eq!(g[1], -4.0, epsilon = 1e-10);
    }

    #[test]
    fn fd_matches_analytic_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let families = [
            Cost::euclidean(2),
            Cost::translation_power(2, 2.0).unwrap(),
            Cost::translation_power(2, 4.0).unwrap(),
            Cost::affine_composed(
                2,
                2.0,
                &[vec![2.0, 0.5], vec![0.0, 1.0]],
                vec![0.3, -0.1],
                &[vec![1.0, 0.2], vec![-0.1, 1.0]],
                vec![0.0, 0.4],
            )
            .unwrap(),
        ];
        for cost in &families {
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let y = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                if Cost::euclidean(2).eval_slice(&x, &y) < 1e-2 {
                    continue;
                }
                let a = match cost.gradient_x_slice(&x, &y) {
                    Ok(g) => g,
                    Err(CostError::VanishingGradient { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                let f = cost.gradient_x_fd(&x, &y, FD_STEP);
                for k in 0..2 {
                    worst = worst.max((a[k] - f[k]).abs());
                }
            }
            assert!(worst <= 1e-5, "{}: worst deviation {worst:e}", cost.family_name());
        }
    }

    #[test]
    fn zero_points_solve_the_affine_equation() {
        let c = Cost::affine_composed(
            2,
            2.0,
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0, 0.0],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
        )
        .unwrap();
        // c = |y + (1,0) - x|^2: zero at x = y + (1,0).
        let y = [0.25, 0.75];
        let x = c.zero_point_x(&y).unwrap();
        assert_abs_diff_eq!(x[0], 1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 0.75, epsilon = 1e-12);
        let y_back = c.zero_point_y(&x).unwrap();
        assert_abs_diff_eq!(y_back[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(y_back[1], 0.75, epsilon = 1e-12);
        assert!(c.eval_slice(&x, &y) < 1e-20);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let e = Cost::euclidean(2);
        let x = Point::new(vec![0.0]).unwrap();
        assert!(matches!(
            e.evaluate(&x, &p2(0.0, 0.0)),
            Err(CostError::DimensionMismatch { expected: 2, found: 1 })
        ));
    }
}
