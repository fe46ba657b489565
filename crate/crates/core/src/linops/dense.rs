//! Dense row-major matrices and the small direct kernels used by the metric
//! types: Cholesky factorization and a cyclic Jacobi eigenvalue sweep. Both
//! target the small dimensions (n ≲ 10³) this crate works at.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Dense real matrix, row-major storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be at least 1x1"));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::invalid("matrix needs at least one row"));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::invalid("rows have inconsistent lengths"));
        }
        let data = rows.iter().flat_map(|row| row.iter().copied()).collect();
        DenseMatrix::new(r, c, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        DenseMatrix {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// `y = M x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[i] = acc;
        }
        y
    }

    /// `y = Mᵀ x`
    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "transpose matvec dimension mismatch");
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (yj, a) in y.iter_mut().zip(row) {
                *yj += a * xi;
            }
        }
        y
    }
}

/// Symmetric positive-definite matrix with its Cholesky factor and eigenvalue
/// range computed once at construction.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    n: usize,
    data: Vec<f64>,
    chol: Vec<f64>,
    min_eig: f64,
    max_eig: f64,
}

/// Relative symmetry tolerance accepted by [`SpdMatrix::new`].
pub const SYMMETRY_REL_TOL: f64 = 1e-12;

impl SpdMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("SPD matrix needs dimension at least 1"));
        }
        if data.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (data[i * n + j] - data[j * n + i]).abs();
                if d > SYMMETRY_REL_TOL * scale {
                    return Err(Error::NotSpd(format!(
                        "asymmetry {d:e} at ({i},{j}) exceeds {SYMMETRY_REL_TOL:e} relative"
                    )));
                }
            }
        }
        // Work on the symmetrized copy so downstream kernels see an exactly
        // symmetric matrix.
        let mut sym = data;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (sym[i * n + j] + sym[j * n + i]);
                sym[i * n + j] = avg;
                sym[j * n + i] = avg;
            }
        }
        let chol = cholesky(n, &sym)
            .ok_or_else(|| Error::NotSpd("Cholesky factorization failed".into()))?;
        let eigs = symmetric_eigenvalues(n, &sym);
        let min_eig = eigs[0];
        let max_eig = eigs[n - 1];
        if min_eig <= 0.0 {
            return Err(Error::NotSpd(format!("minimum eigenvalue {min_eig:e} <= 0")));
        }
        Ok(SpdMatrix {
            n,
            data: sym,
            chol,
            min_eig,
            max_eig,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn min_eig(&self) -> f64 {
        self.min_eig
    }

    pub fn max_eig(&self) -> f64 {
        self.max_eig
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "SPD apply dimension mismatch");
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }

    /// Solves `M y = b` through the cached factor.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "SPD solve dimension mismatch");
        chol_solve(self.n, &self.chol, b)
    }

    /// `factor * M` without refactorizing: the Cholesky factor scales by
    /// `√factor` and the eigenvalues by `factor`.
    pub(crate) fn scaled(&self, factor: f64) -> SpdMatrix {
        debug_assert!(factor > 0.0 && factor.is_finite());
        let sqrt_f = factor.sqrt();
        SpdMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * factor).collect(),
            chol: self.chol.iter().map(|v| v * sqrt_f).collect(),
            min_eig: self.min_eig * factor,
            max_eig: self.max_eig * factor,
        }
    }
}

/// Lower-triangular Cholesky factor of a symmetric matrix, or `None` when the
/// matrix is not positive definite.
pub(crate) fn cholesky(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` for a lower-triangular `l`.
pub(crate) fn chol_solve(n: usize, l: &[f64], b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub(crate) fn symmetric_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    let mut m = a.to_vec();
    let norm: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || n == 1 {
        let mut eigs: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        return eigs;
    }
    let tol = 1e-15 * norm;
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j].powi(2);
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(m.matvec(&[1.0, 0.0, -1.0]), vec![-2.0, -2.0]);
        assert_eq!(m.matvec_transpose(&[1.0, 1.0]), vec![5.0, 7.0, 9.0]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::new(0, 1, vec![]).is_err());
        assert!(DenseMatrix::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn cholesky_solve_roundtrip() {
        let a = vec![4.0, 2.0, 2.0, 3.0];
        let l = cholesky(2, &a).unwrap();
        let x = chol_solve(2, &l, &[1.0, 1.0]);
        // A x should reproduce b.
        let b0 = 4.0 * x[0] + 2.0 * x[1];
        let b1 = 2.0 * x[0] + 3.0 * x[1];
        assert!((b0 - 1.0).abs() < 1e-12 && (b1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        assert!(cholesky(2, &[1.0, 2.0, 2.0, 1.0]).is_none());
    }

    #[test]
    fn jacobi_eigenvalues_2x2() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let eigs = symmetric_eigenvalues(2, &[2.0, 1.0, 1.0, 2.0]);
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spd_rejects_asymmetric_and_indefinite() {
        assert!(SpdMatrix::new(2, vec![1.0, 0.5, 0.2, 1.0]).is_err());
        assert!(SpdMatrix::new(2, vec![1.0, 2.0, 2.0, 1.0]).is_err());
        let m = SpdMatrix::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((m.min_eig() - 1.0).abs() < 1e-12);
        assert!((m.max_eig() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spd_scaled_matches_refactorization() {
        let m = SpdMatrix::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let s = m.scaled(4.0);
        let fresh = SpdMatrix::new(2, vec![8.0, 4.0, 4.0, 8.0]).unwrap();
        assert!((s.min_eig() - fresh.min_eig()).abs() < 1e-12);
        let b = [1.0, -2.0];
        let xs = s.solve(&b);
        let xf = fresh.solve(&b);
        assert!((xs[0] - xf[0]).abs() < 1e-14 && (xs[1] - xf[1]).abs() < 1e-14);
    }
}
