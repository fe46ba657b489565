//! Finite-dimensional vectors, symmetric positive-definite metrics with
//! cached spectral bounds, metric-weighted norms, and power-iteration
//! spectral-norm estimates for dense linear maps.

mod dense;

pub use dense::{DenseMatrix, SpdMatrix, SYMMETRY_REL_TOL};

pub(crate) use dense::symmetric_eigenvalues;

use std::ops::{Add, Index, Sub};

use serde::{Deserialize, Serialize};

use crate::rng::SeededRng;
use crate::{Error, Result};

/// Column vector in ℝⁿ. Finite entries, dimension ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("vector dimension must be at least 1"));
        }
        if !entries.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("vector entries must be finite"));
        }
        Ok(Vector(entries))
    }

    /// Skips the finiteness check; for intermediate arithmetic results.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        Vector(vec![0.0; dim])
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> f64) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        Vector((0..dim).map(f).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dot dimension mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * s).collect())
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim(), "axpy dimension mismatch");
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim(), "add dimension mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim(), "sub dimension mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// The shape of a [`Metric`].
#[derive(Debug, Clone)]
pub enum MetricKind {
    /// `c·I`, `c > 0`.
    ScaledIdentity(f64),
    /// Positive diagonal.
    Diagonal(Vec<f64>),
    /// General symmetric positive-definite matrix.
    Dense(SpdMatrix),
}

/// Symmetric positive-definite operator `U` together with its spectral range
/// `min_eig·I ⪯ U ⪯ norm·I`, both computed eagerly at construction.
#[derive(Debug, Clone)]
pub struct Metric {
    kind: MetricKind,
    dim: usize,
    norm: f64,
    min_eig: f64,
}

impl Metric {
    pub fn identity(dim: usize) -> Metric {
        Metric::scaled_identity(dim, 1.0).expect("identity is always valid")
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Result<Metric> {
        if dim == 0 {
            return Err(Error::invalid("metric dimension must be at least 1"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("scale {c} must be positive")));
        }
        Ok(Metric {
            kind: MetricKind::ScaledIdentity(c),
            dim,
            norm: c,
            min_eig: c,
        })
    }

    pub fn diagonal(d: Vector) -> Result<Metric> {
        if !d.iter().all(|v| *v > 0.0) {
            return Err(Error::invalid("diagonal metric entries must be positive"));
        }
        let norm = d.iter().fold(f64::MIN, |m, v| m.max(*v));
        let min_eig = d.iter().fold(f64::MAX, |m, v| m.min(*v));
        let dim = d.dim();
        Ok(Metric {
            kind: MetricKind::Diagonal(d.into_vec()),
            dim,
            norm,
            min_eig,
        })
    }

    /// Dense SPD metric from row-major entries. Symmetry is required to
    /// [`SYMMETRY_REL_TOL`] relative tolerance and definiteness is verified.
    pub fn dense(n: usize, row_major: Vec<f64>) -> Result<Metric> {
        let spd = SpdMatrix::new(n, row_major)?;
        let norm = spd.max_eig();
        let min_eig = spd.min_eig();
        Ok(Metric {
            kind: MetricKind::Dense(spd),
            dim: n,
            norm,
            min_eig,
        })
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            MetricKind::ScaledIdentity(_) => "scaled-identity",
            MetricKind::Diagonal(_) => "diagonal",
            MetricKind::Dense(_) => "dense",
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `‖U‖` (largest eigenvalue).
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Smallest eigenvalue; the `α` of a lower bound `U ⪰ α·I`.
    pub fn min_eig(&self) -> f64 {
        self.min_eig
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// `U x`
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        Ok(match &self.kind {
            MetricKind::ScaledIdentity(c) => x.scale(*c),
            MetricKind::Diagonal(d) => {
                Vector::from_raw(d.iter().zip(x.iter()).map(|(a, b)| a * b).collect())
            }
            MetricKind::Dense(m) => Vector::from_raw(m.apply(x.as_slice())),
        })
    }

    /// `U⁻¹ x`; dense metrics solve through the factorization cached at
    /// construction.
    pub fn inv_apply(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        Ok(match &self.kind {
            MetricKind::ScaledIdentity(c) => x.scale(1.0 / c),
            MetricKind::Diagonal(d) => {
                Vector::from_raw(d.iter().zip(x.iter()).map(|(a, b)| b / a).collect())
            }
            MetricKind::Dense(m) => Vector::from_raw(m.solve(x.as_slice())),
        })
    }

    /// `‖x‖_U = √⟨Ux, x⟩`
    pub fn weighted_norm(&self, x: &Vector) -> Result<f64> {
        let ux = self.apply(x)?;
        Ok(ux.dot(x).max(0.0).sqrt())
    }

    /// `‖x‖_{U⁻¹} = √⟨U⁻¹x, x⟩`
    pub fn inv_weighted_norm(&self, x: &Vector) -> Result<f64> {
        let ix = self.inv_apply(x)?;
        Ok(ix.dot(x).max(0.0).sqrt())
    }

    /// `⟨x, y⟩_{U⁻¹}`
    pub fn inv_weighted_inner(&self, x: &Vector, y: &Vector) -> Result<f64> {
        let ix = self.inv_apply(x)?;
        self.check_dim(y)?;
        Ok(ix.dot(y))
    }

    /// `factor · U`, reusing cached factorizations.
    pub fn scaled_by(&self, factor: f64) -> Metric {
        assert!(
            factor > 0.0 && factor.is_finite(),
            "metric scale factor must be positive"
        );
        let kind = match &self.kind {
            MetricKind::ScaledIdentity(c) => MetricKind::ScaledIdentity(c * factor),
            MetricKind::Diagonal(d) => MetricKind::Diagonal(d.iter().map(|v| v * factor).collect()),
            MetricKind::Dense(m) => MetricKind::Dense(m.scaled(factor)),
        };
        Metric {
            kind,
            dim: self.dim,
            norm: self.norm * factor,
            min_eig: self.min_eig * factor,
        }
    }

    /// Row-major dense form, for ordering checks between metrics.
    pub fn to_dense_rows(&self) -> Vec<f64> {
        let n = self.dim;
        match &self.kind {
            MetricKind::ScaledIdentity(c) => {
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    m[i * n + i] = *c;
                }
                m
            }
            MetricKind::Diagonal(d) => {
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    m[i * n + i] = d[i];
                }
                m
            }
            MetricKind::Dense(s) => s.data().to_vec(),
        }
    }
}

/// Result of a spectral-norm estimate: the value, the requested relative
/// accuracy, and whether the run certified it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpNormEstimate {
    pub value: f64,
    pub tol: f64,
    pub certified: bool,
    pub iterations: usize,
}

/// Defaults used whenever a spectral norm is needed and the caller did not
/// configure the estimator.
pub const DEFAULT_OP_NORM_TOL: f64 = 1e-6;
pub const DEFAULT_OP_NORM_MAX_ITER: usize = 5000;
pub const DEFAULT_OP_NORM_SEED: u64 = 0;

/// Dense linear map `L: ℝⁿ → ℝᵐ` with an optional cached spectral-norm
/// estimate.
#[derive(Debug, Clone)]
pub struct LinearMap {
    mat: DenseMatrix,
    cached_op_norm: Option<OpNormEstimate>,
}

impl LinearMap {
    pub fn new(mat: DenseMatrix) -> Self {
        LinearMap {
            mat,
            cached_op_norm: None,
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Ok(LinearMap::new(DenseMatrix::new(rows, cols, data)?))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        Ok(LinearMap::new(DenseMatrix::from_rows(rows)?))
    }

    pub fn identity(n: usize) -> Self {
        LinearMap::new(DenseMatrix::identity(n))
    }

    pub fn rows(&self) -> usize {
        self.mat.rows()
    }

    pub fn cols(&self) -> usize {
        self.mat.cols()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.mat
    }

    /// `L x`
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        if x.dim() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                got: x.dim(),
            });
        }
        Ok(Vector::from_raw(self.mat.matvec(x.as_slice())))
    }

    /// `Lᵀ y`
    pub fn apply_transpose(&self, y: &Vector) -> Result<Vector> {
        if y.dim() != self.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.rows(),
                got: y.dim(),
            });
        }
        Ok(Vector::from_raw(self.mat.matvec_transpose(y.as_slice())))
    }

    /// Estimates the spectral norm and caches it on the returned map.
    pub fn with_op_norm(mut self, tol: f64, max_iter: usize, seed: u64) -> Result<Self> {
        let est = op_norm_estimate(&self, tol, max_iter, seed)?;
        self.cached_op_norm = Some(est);
        Ok(self)
    }

    pub fn op_norm(&self) -> Option<&OpNormEstimate> {
        self.cached_op_norm.as_ref()
    }
}

/// Spectral norm of `L` by power iteration on `LᵀL`, with a Rayleigh-quotient
/// residual certificate: the estimate is certified once
/// `‖LᵀL v − ρ v‖ ≤ tol · ρ` for the unit iterate `v`, which pins the dominant
/// eigenvalue of `LᵀL` within relative `tol` and hence `‖L‖ = √ρ` within
/// roughly `tol/2`. Deterministic for a fixed `seed`. Non-convergence within
/// `max_iter` returns the best estimate flagged `certified: false`.
pub fn op_norm_estimate(
    l: &LinearMap,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<OpNormEstimate> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::invalid(format!("tol {tol} must lie in (0, 1)")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    let n = l.cols();
    let mut rng = SeededRng::new(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= vnorm;
    }
    let mut rho = 0.0;
    for it in 1..=max_iter {
        let lv = l.mat.matvec(&v);
        let w = l.mat.matvec_transpose(&lv);
        rho = w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        let wnorm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wnorm == 0.0 {
            // v is (numerically) in the null space; with a random start this
            // means L ≈ 0.
            return Ok(OpNormEstimate {
                value: 0.0,
                tol,
                certified: true,
                iterations: it,
            });
        }
        let residual: f64 = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - rho * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tol * rho {
            return Ok(OpNormEstimate {
                value: rho.max(0.0).sqrt(),
                tol,
                certified: true,
                iterations: it,
            });
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wnorm;
        }
    }
    Ok(OpNormEstimate {
        value: rho.max(0.0).sqrt(),
        tol,
        certified: false,
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec2(a: f64, b: f64) -> Vector {
        Vector::new(vec![a, b]).unwrap()
    }

    #[test]
    fn vector_validation() {
        assert!(Vector::new(vec![]).is_err());
        assert!(Vector::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(Vector::new(vec![f64::NAN]).is_err());
        assert!(Vector::new(vec![0.0]).is_ok());
    }

    #[test]
    fn metric_apply_examples() {
        let x = vec2(3.0, -2.0);
        let u = Metric::identity(2);
        assert_eq!(u.apply(&x).unwrap(), vec2(3.0, -2.0));

        let u = Metric::diagonal(vec2(2.0, 5.0)).unwrap();
        assert_eq!(u.apply(&vec2(1.0, 1.0)).unwrap(), vec2(2.0, 5.0));

        let u = Metric::dense(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        assert_eq!(u.apply(&vec2(1.0, 0.0)).unwrap(), vec2(2.0, 1.0));
    }

    #[test]
    fn metric_inv_apply_examples() {
        let u = Metric::scaled_identity(2, 4.0).unwrap();
        assert_eq!(u.inv_apply(&vec2(8.0, 0.0)).unwrap(), vec2(2.0, 0.0));

        let u = Metric::diagonal(vec2(2.0, 5.0)).unwrap();
        assert_eq!(u.inv_apply(&vec2(2.0, 5.0)).unwrap(), vec2(1.0, 1.0));

        let u = Metric::dense(2, vec![2.0, 0.0, 0.0, 2.0]).unwrap();
        let y = u.inv_apply(&vec2(1.0, 1.0)).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-14 && (y[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn metric_norm_examples() {
        let u = Metric::identity(2);
        assert!((u.weighted_norm(&vec2(3.0, 4.0)).unwrap() - 5.0).abs() < 1e-14);

        let u = Metric::diagonal(vec2(4.0, 1.0)).unwrap();
        assert!((u.weighted_norm(&vec2(1.0, 0.0)).unwrap() - 2.0).abs() < 1e-14);

        // ⟨Ux, x⟩ = 2 for U = [[2,1],[1,2]], x = (1,−1)
        let u = Metric::dense(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((u.weighted_norm(&vec2(1.0, -1.0)).unwrap() - 2.0f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn metric_rejects_bad_inputs() {
        assert!(Metric::scaled_identity(2, 0.0).is_err());
        assert!(Metric::scaled_identity(2, -1.0).is_err());
        assert!(Metric::diagonal(vec2(1.0, 0.0)).is_err());
        assert!(Metric::dense(2, vec![1.0, 0.5, 0.4, 1.0]).is_err());
        let u = Metric::identity(2);
        assert!(matches!(
            u.apply(&Vector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn metric_cached_bounds() {
        let u = Metric::dense(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((u.norm() - 3.0).abs() < 1e-12);
        assert!((u.min_eig() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn metric_scaled_by_consistent() {
        let u = Metric::dense(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let s = u.scaled_by(3.0);
        let x = vec2(0.7, -0.3);
        let a = s.apply(&x).unwrap();
        let b = u.apply(&x).unwrap().scale(3.0);
        assert!((&a - &b).norm() < 1e-13);
        let ia = s.inv_apply(&x).unwrap();
        let ib = u.inv_apply(&x).unwrap().scale(1.0 / 3.0);
        assert!((&ia - &ib).norm() < 1e-13);
    }

    #[test]
    fn op_norm_diagonal() {
        let l = LinearMap::from_rows(&[
            &[1.0, 0.0, 0.0],
            &[0.0, 3.0, 0.0],
            &[0.0, 0.0, 2.0],
        ])
        .unwrap();
        let est = op_norm_estimate(&l, 1e-6, 5000, 7).unwrap();
        assert!(est.certified);
        assert!((est.value - 3.0).abs() <= 3.0 * 3.0 * 1e-6);
    }

    #[test]
    fn op_norm_nilpotent() {
        let l = LinearMap::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let est = op_norm_estimate(&l, 1e-6, 5000, 3).unwrap();
        assert!(est.certified);
        assert!((est.value - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn op_norm_zero_map() {
        let l = LinearMap::from_rows(&[&[0.0, 0.0], &[0.0, 0.0]]).unwrap();
        let est = op_norm_estimate(&l, 1e-6, 100, 1).unwrap();
        assert!(est.certified);
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn op_norm_rejects_bad_params() {
        let l = LinearMap::identity(2);
        assert!(op_norm_estimate(&l, 0.0, 10, 0).is_err());
        assert!(op_norm_estimate(&l, 1.5, 10, 0).is_err());
        assert!(op_norm_estimate(&l, 1e-6, 0, 0).is_err());
    }

    #[test]
    fn op_norm_deterministic() {
        let l = LinearMap::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let a = op_norm_estimate(&l, 1e-8, 5000, 42).unwrap();
        let b = op_norm_estimate(&l, 1e-8, 5000, 42).unwrap();
        assert_eq!(a, b);
    }
}
