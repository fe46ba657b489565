//! Projection and soft-thresholding kernels behind the proximable catalog.

use crate::{Error, Result};

#[inline]
pub(crate) fn soft_threshold(v: f64, thresh: f64) -> f64 {
    if v > thresh {
        v - thresh
    } else if v < -thresh {
        v + thresh
    } else {
        0.0
    }
}

/// Euclidean projection onto `{p : ‖p‖₁ ≤ t}` by the sort-and-threshold rule:
/// sort `|x|` descending, find the largest prefix whose running mean stays
/// below its last element, and shrink by the resulting threshold.
pub(crate) fn project_l1_ball(x: &[f64], t: f64) -> Vec<f64> {
    debug_assert!(t > 0.0);
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 <= t {
        return x.to_vec();
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        prefix += m;
        let cand = (prefix - t) / (j + 1) as f64;
        if m - cand > 0.0 {
            theta = cand;
        } else {
            break;
        }
    }
    x.iter()
        .map(|&v| v.signum() * soft_threshold(v.abs(), theta).abs())
        .collect()
}

/// KKT residual tolerance for the weighted projection's dual threshold.
pub(crate) const WEIGHTED_L1_KKT_TOL: f64 = 1e-12;
const WEIGHTED_L1_MAX_BISECTIONS: usize = 200;

/// Projection onto `{p : ‖p‖₁ ≤ t}` in the norm `Σ (p_i − x_i)²/d_i`
/// (the `U⁻¹`-metric projection for `U = diag(d)`). The optimal point is
/// `p_i = sign(x_i)·max(|x_i| − θ d_i, 0)` for the dual threshold `θ ≥ 0`
/// solving `Σ max(|x_i| − θ d_i, 0) = t`; bisection brackets θ, then the
/// identified active set gives it in closed form.
pub(crate) fn project_l1_ball_weighted(x: &[f64], d: &[f64], t: f64) -> Result<Vec<f64>> {
    debug_assert!(t > 0.0);
    debug_assert_eq!(x.len(), d.len());
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 <= t {
        return Ok(x.to_vec());
    }
    let shrunk_l1 = |theta: f64| -> f64 {
        x.iter()
            .zip(d)
            .map(|(&xi, &di)| (xi.abs() - theta * di).max(0.0))
            .sum()
    };
    let mut lo = 0.0;
    let mut hi = x
        .iter()
        .zip(d)
        .map(|(&xi, &di)| xi.abs() / di)
        .fold(0.0f64, f64::max);
    for _ in 0..WEIGHTED_L1_MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if shrunk_l1(mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    // Exact threshold on the active set the bracket identified.
    let theta_mid = 0.5 * (lo + hi);
    let mut sum_abs = 0.0;
    let mut sum_d = 0.0;
    for (&xi, &di) in x.iter().zip(d) {
        if xi.abs() - theta_mid * di > 0.0 {
            sum_abs += xi.abs();
            sum_d += di;
        }
    }
    let theta = if sum_d > 0.0 {
        ((sum_abs - t) / sum_d).max(0.0)
    } else {
        theta_mid
    };
    let p: Vec<f64> = x
        .iter()
        .zip(d)
        .map(|(&xi, &di)| xi.signum() * (xi.abs() - theta * di).max(0.0))
        .collect();
    let residual = (p.iter().map(|v| v.abs()).sum::<f64>() - t).abs();
    if residual > WEIGHTED_L1_KKT_TOL * t.max(1.0) {
        return Err(Error::BisectionFailed {
            residual,
            steps: WEIGHTED_L1_MAX_BISECTIONS,
        });
    }
    Ok(p)
}

pub(crate) fn clamp_to_box(x: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&v, (&l, &h))| v.clamp(l, h))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_ball_inside_is_identity() {
        let x = [0.3, -0.2, 0.1];
        assert_eq!(project_l1_ball(&x, 1.0), x.to_vec());
    }

    #[test]
    fn l1_ball_known_threshold() {
        // (2, 1) onto radius 1: threshold 1, result (1, 0).
        let p = project_l1_ball(&[2.0, 1.0], 1.0);
        assert!((p[0] - 1.0).abs() < 1e-15);
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn l1_ball_result_feasible_and_signed() {
        let x = [3.0, -4.0, 0.5, 0.0];
        let p = project_l1_ball(&x, 2.0);
        let l1: f64 = p.iter().map(|v| v.abs()).sum();
        assert!((l1 - 2.0).abs() < 1e-12);
        for (pi, xi) in p.iter().zip(&x) {
            assert!(pi * xi >= 0.0);
            assert!(pi.abs() <= xi.abs() + 1e-15);
        }
    }

    #[test]
    fn weighted_matches_unweighted_for_unit_weights() {
        let x = [1.5, -2.5, 0.25, 0.9];
        let a = project_l1_ball(&x, 1.7);
        let b = project_l1_ball_weighted(&x, &[1.0; 4], 1.7).unwrap();
        for (ai, bi) in a.iter().zip(&b) {
            assert!((ai - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_example_from_kkt() {
        // weights (1, 4), x = (2, 1), t = 1: only the first coordinate stays
        // active, θ = 1, p = (1, 0).
        let p = project_l1_ball_weighted(&[2.0, 1.0], &[1.0, 4.0], 1.0).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn box_clamp() {
        let p = clamp_to_box(&[-1.0, 0.5, 3.0], &[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]);
        assert_eq!(p, vec![0.0, 0.5, 1.0]);
    }
}
