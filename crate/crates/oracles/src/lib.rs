//! Reference oracles for the fbsplit test suites: brute-force enumerations
//! and third-party numerics that stay independent of the implementation
//! paths they check. Test-only; never a dependency of the library itself.

use fbsplit_core::linops::{LinearMap, Metric, Vector};
use fbsplit_core::operators::{Proximable, SetDescriptor};

/// Weighted projection onto `{p : ‖p‖₁ ≤ t}` minimizing
/// `½ Σ (p_i − x_i)²/d_i`, by enumerating all 3ⁿ sign patterns and solving
/// each equality-constrained subproblem in closed form. Exponential; intended
/// for n ≤ ~8. Unit weights give the Euclidean projection.
pub fn l1_ball_projection_qp(x: &[f64], d: &[f64], t: f64) -> Vec<f64> {
    assert_eq!(x.len(), d.len());
    assert!(t > 0.0);
    let n = x.len();
    let objective = |p: &[f64]| -> f64 {
        p.iter()
            .zip(x)
            .zip(d)
            .map(|((pi, xi), di)| (pi - xi) * (pi - xi) / (2.0 * di))
            .sum()
    };
    let feas_tol = 1e-12 * t.max(1.0);

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |p: Vec<f64>| {
        let l1: f64 = p.iter().map(|v| v.abs()).sum();
        if l1 <= t + feas_tol {
            let obj = objective(&p);
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, p));
            }
        }
    };

    consider(x.to_vec());

    // full ternary counter over sign patterns {-1, 0, +1}^n
    let mut pattern = vec![-1i32; n];
    'patterns: loop {
        let active: Vec<usize> = (0..n).filter(|&i| pattern[i] != 0).collect();
        if active.is_empty() {
            consider(vec![0.0; n]);
        } else {
            // minimize over {p_i = 0 off-pattern, Σ s_i p_i = t}:
            // p_i = x_i − θ d_i s_i with θ = (Σ s_i x_i − t)/Σ d_i
            let sum_sx: f64 = active.iter().map(|&i| pattern[i] as f64 * x[i]).sum();
            let sum_d: f64 = active.iter().map(|&i| d[i]).sum();
            let theta = (sum_sx - t) / sum_d;
            let mut p = vec![0.0; n];
            for &i in &active {
                p[i] = x[i] - theta * d[i] * pattern[i] as f64;
            }
            consider(p);
        }

        let mut i = 0;
        loop {
            if i == n {
                break 'patterns;
            }
            pattern[i] += 1;
            if pattern[i] > 1 {
                pattern[i] = -1;
                i += 1;
            } else {
                break;
            }
        }
    }
    best.expect("origin is always feasible").1
}

/// `min ½‖Ax − b‖²` over a box, by enumerating the 3ⁿ active-bound patterns
/// and solving each free subsystem's normal equations with nalgebra.
/// Requires every pattern's free block to be full rank (e.g. `A` with full
/// column rank). Exponential; intended for n ≤ ~8.
pub fn box_constrained_least_squares(a: &LinearMap, b: &Vector, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    assert_eq!(b.dim(), m);
    assert_eq!(lo.len(), n);
    assert_eq!(hi.len(), n);
    let amat = nalgebra::DMatrix::from_row_slice(m, n, a.matrix().data());
    let bvec = nalgebra::DVector::from_column_slice(b.as_slice());

    let objective = |x: &[f64]| -> f64 {
        let xv = nalgebra::DVector::from_column_slice(x);
        let r = &amat * xv - &bvec;
        0.5 * r.dot(&r)
    };
    let feas_tol = 1e-9;

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut pattern = vec![-1i32; n]; // -1 = at lo, 0 = free, +1 = at hi
    'patterns: loop {
        let free: Vec<usize> = (0..n).filter(|&i| pattern[i] == 0).collect();
        let mut x = vec![0.0; n];
        for i in 0..n {
            if pattern[i] == -1 {
                x[i] = lo[i];
            } else if pattern[i] == 1 {
                x[i] = hi[i];
            }
        }
        let feasible = if free.is_empty() {
            true
        } else {
            let af = nalgebra::DMatrix::from_fn(m, free.len(), |r, c| amat[(r, free[c])]);
            let mut rhs = bvec.clone();
            for i in 0..n {
                if pattern[i] != 0 {
                    for r in 0..m {
                        rhs[r] -= amat[(r, i)] * x[i];
                    }
                }
            }
            let normal = af.transpose() * &af;
            let sol = normal
                .lu()
                .solve(&(af.transpose() * rhs));
            match sol {
                Some(xf) => {
                    for (c, &i) in free.iter().enumerate() {
                        x[i] = xf[c];
                    }
                    free.iter()
                        .all(|&i| x[i] >= lo[i] - feas_tol && x[i] <= hi[i] + feas_tol)
                }
                None => false,
            }
        };
        if feasible {
            let obj = objective(&x);
            if best.as_ref().is_none_or(|(bst, _)| obj < *bst) {
                best = Some((obj, x));
            }
        }

        let mut i = 0;
        loop {
            if i == n {
                break 'patterns;
            }
            pattern[i] += 1;
            if pattern[i] > 1 {
                pattern[i] = -1;
                i += 1;
            } else {
                break;
            }
        }
    }
    best.expect("some pattern must be feasible").1
}

/// Central-difference gradient.
pub fn finite_difference_gradient(f: &dyn Fn(&Vector) -> f64, x: &Vector, h: f64) -> Vector {
    let n = x.dim();
    Vector::from_fn(n, |i| {
        let mut fwd = x.as_slice().to_vec();
        let mut bwd = fwd.clone();
        fwd[i] += h;
        bwd[i] -= h;
        (f(&Vector::new(fwd).unwrap()) - f(&Vector::new(bwd).unwrap())) / (2.0 * h)
    })
}

/// Largest singular value by nalgebra's SVD; the third-party reference for
/// the power-iteration estimator.
pub fn spectral_norm_svd(l: &LinearMap) -> f64 {
    let m = nalgebra::DMatrix::from_row_slice(l.rows(), l.cols(), l.matrix().data());
    m.svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |acc, s| acc.max(*s))
}

/// Verifies the resolvent characterization `U⁻¹(x − p)/γ ∈ A(p)` by direct
/// subgradient/normal-cone membership, entirely outside the resolvent code
/// paths.
pub fn subgradient_membership(
    prox: &Proximable,
    gamma: f64,
    u: &Metric,
    x: &Vector,
    p: &Vector,
    tol: f64,
) -> bool {
    let q = u
        .inv_apply(&(x - p))
        .expect("dimension mismatch")
        .scale(1.0 / gamma);
    match prox {
        Proximable::Zero => q.norm() <= tol,
        Proximable::L1Norm { weight } => {
            let w = *weight;
            p.iter().zip(q.iter()).all(|(&pi, &qi)| {
                if pi > 1e-14 {
                    (qi - w).abs() <= tol
                } else if pi < -1e-14 {
                    (qi + w).abs() <= tol
                } else {
                    qi.abs() <= w + tol
                }
            })
        }
        Proximable::Indicator(s) | Proximable::NormalCone(s) => {
            normal_cone_membership(s, p, &q, tol)
        }
    }
}

fn normal_cone_membership(s: &SetDescriptor, p: &Vector, q: &Vector, tol: f64) -> bool {
    match s {
        SetDescriptor::WholeSpace => q.norm() <= tol,
        SetDescriptor::L1Ball { radius } => {
            let l1 = p.norm1();
            if l1 > radius + tol {
                return false;
            }
            if l1 < radius - tol {
                return q.iter().all(|v| v.abs() <= tol);
            }
            // boundary: q = θ·g with g ∈ ∂‖·‖₁(p), θ ≥ 0
            let vals: Vec<f64> = p
                .iter()
                .zip(q.iter())
                .filter(|(pi, _)| pi.abs() > 1e-14)
                .map(|(pi, qi)| qi * pi.signum())
                .collect();
            if vals.is_empty() {
                return q.iter().all(|v| v.abs() <= tol);
            }
            let theta = vals.iter().fold(f64::MIN, |m, v| m.max(*v));
            if theta < -tol {
                return false;
            }
            let consistent = vals.iter().all(|v| (v - theta).abs() <= tol);
            let dominated = p
                .iter()
                .zip(q.iter())
                .filter(|(pi, _)| pi.abs() <= 1e-14)
                .all(|(_, qi)| qi.abs() <= theta + tol);
            consistent && dominated
        }
        SetDescriptor::Box { lo, hi } => p.iter().enumerate().all(|(i, &pi)| {
            if pi < lo[i] - tol || pi > hi[i] + tol {
                return false;
            }
            let qi = q[i];
            let at_hi = pi >= hi[i] - 1e-12;
            let at_lo = pi <= lo[i] + 1e-12;
            (qi <= tol || at_hi) && (qi >= -tol || at_lo)
        }),
        SetDescriptor::HalfSpace { normal, offset } => {
            let ax = normal.dot(p);
            if ax > offset + tol * normal.norm().max(1.0) {
                return false;
            }
            if ax < offset - tol * normal.norm().max(1.0) {
                return q.norm() <= tol;
            }
            let mu = q.dot(normal) / normal.dot(normal);
            mu >= -tol && (&q.clone() - &normal.scale(mu)).norm() <= tol
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qp_oracle_agrees_with_hand_cases() {
        // projection of (2, 1) onto the unit ball is (1, 0)
        let p = l1_ball_projection_qp(&[2.0, 1.0], &[1.0, 1.0], 1.0);
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);

        // interior point is untouched
        let p = l1_ball_projection_qp(&[0.2, -0.1], &[1.0, 3.0], 1.0);
        assert_eq!(p, vec![0.2, -0.1]);

        // weighted case from the KKT system: weights (1,4), x=(2,1), t=1
        let p = l1_ball_projection_qp(&[2.0, 1.0], &[1.0, 4.0], 1.0);
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    }

    #[test]
    fn box_ls_oracle_clamps_projection_case() {
        // A = I reduces to projection onto the box
        let a = LinearMap::identity(2);
        let b = Vector::new(vec![2.0, -0.5]).unwrap();
        let x = box_constrained_least_squares(&a, &b, &[0.0, 0.0], &[1.0, 1.0]);
        assert!((x[0] - 1.0).abs() < 1e-9 && x[1].abs() < 1e-9);
    }

    #[test]
    fn fd_gradient_of_quadratic() {
        let f = |x: &Vector| 0.5 * x.dot(x);
        let x = Vector::new(vec![0.3, -0.7]).unwrap();
        let g = finite_difference_gradient(&f, &x, 1e-6);
        assert!((&g - &x).norm() < 1e-9);
    }

    #[test]
    fn svd_norm_of_diagonal() {
        let l = LinearMap::from_rows(&[&[1.0, 0.0], &[0.0, -3.0]]).unwrap();
        assert!((spectral_norm_svd(&l) - 3.0).abs() < 1e-12);
    }
}
