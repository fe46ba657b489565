//! The two sides of the inclusion `0 ∈ Ax + Bx`: maximal-monotone operators
//! `A` evaluated through metric resolvents (equivalently, proximity operators
//! of convex functions under a `U⁻¹`-weighted norm), cocoercive operators `B`
//! with certified constants, and the averagedness calculus tying them
//! together as testable predicates.

mod proj;

use serde::{Deserialize, Serialize};

use crate::linops::{
    LinearMap, Metric, MetricKind, Vector, DEFAULT_OP_NORM_MAX_ITER, DEFAULT_OP_NORM_SEED,
    DEFAULT_OP_NORM_TOL,
};
use crate::{Error, Result};

pub(crate) use proj::soft_threshold;

/// Closed convex sets with computable projections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SetDescriptor {
    WholeSpace,
    /// `{x : ‖x‖₁ ≤ radius}`
    L1Ball { radius: f64 },
    /// `{x : lo ≤ x ≤ hi}` componentwise
    Box { lo: Vector, hi: Vector },
    /// `{x : ⟨normal, x⟩ ≤ offset}`
    HalfSpace { normal: Vector, offset: f64 },
}

impl SetDescriptor {
    pub fn l1_ball(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("L1 radius {radius} must be > 0")));
        }
        Ok(SetDescriptor::L1Ball { radius })
    }

    pub fn boxed(lo: Vector, hi: Vector) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimensionMismatch {
                expected: lo.dim(),
                got: hi.dim(),
            });
        }
        if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
            return Err(Error::invalid("box bounds must satisfy lo <= hi"));
        }
        Ok(SetDescriptor::Box { lo, hi })
    }

    pub fn singleton(point: Vector) -> Self {
        SetDescriptor::Box {
            lo: point.clone(),
            hi: point,
        }
    }

    pub fn half_space(normal: Vector, offset: f64) -> Result<Self> {
        if normal.norm() == 0.0 {
            return Err(Error::invalid("half-space normal must be nonzero"));
        }
        if !offset.is_finite() {
            return Err(Error::invalid("half-space offset must be finite"));
        }
        Ok(SetDescriptor::HalfSpace { normal, offset })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SetDescriptor::WholeSpace => "whole-space",
            SetDescriptor::L1Ball { .. } => "l1-ball",
            SetDescriptor::Box { .. } => "box",
            SetDescriptor::HalfSpace { .. } => "half-space",
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        match self {
            SetDescriptor::WholeSpace => true,
            SetDescriptor::L1Ball { radius } => x.norm1() <= radius + tol,
            SetDescriptor::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol),
            SetDescriptor::HalfSpace { normal, offset } => normal.dot(x) <= offset + tol,
        }
    }

    /// Euclidean projection.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        self.metric_project(&Metric::identity(x.dim()), x)
    }

    /// Projection in the `‖·‖_{U⁻¹}` norm. Separable sets admit it under
    /// scaled-identity and diagonal metrics; the half-space has a closed form
    /// under any metric; dense metrics are otherwise unsupported.
    pub fn metric_project(&self, u: &Metric, x: &Vector) -> Result<Vector> {
        if u.dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: u.dim(),
                got: x.dim(),
            });
        }
        match self {
            SetDescriptor::WholeSpace => Ok(x.clone()),
            SetDescriptor::L1Ball { radius } => match u.kind() {
                MetricKind::ScaledIdentity(_) => {
                    Ok(Vector::from_raw(proj::project_l1_ball(x.as_slice(), *radius)))
                }
                MetricKind::Diagonal(d) => Ok(Vector::from_raw(proj::project_l1_ball_weighted(
                    x.as_slice(),
                    d,
                    *radius,
                )?)),
                MetricKind::Dense(_) => Err(Error::UnsupportedMetric {
                    prox: self.name(),
                    metric: u.kind_name(),
                }),
            },
            SetDescriptor::Box { lo, hi } => {
                if lo.dim() != x.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: lo.dim(),
                        got: x.dim(),
                    });
                }
                match u.kind() {
                    MetricKind::ScaledIdentity(_) | MetricKind::Diagonal(_) => Ok(
                        Vector::from_raw(proj::clamp_to_box(x.as_slice(), lo.as_slice(), hi.as_slice())),
                    ),
                    MetricKind::Dense(_) => Err(Error::UnsupportedMetric {
                        prox: self.name(),
                        metric: u.kind_name(),
                    }),
                }
            }
            SetDescriptor::HalfSpace { normal, offset } => {
                if normal.dim() != x.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: normal.dim(),
                        got: x.dim(),
                    });
                }
                // argmin ‖p−x‖_{U⁻¹} s.t. ⟨a,p⟩ ≤ b has multiplier
                // max(0, (⟨a,x⟩−b)/⟨a,Ua⟩) along Ua.
                let ax = normal.dot(x);
                if ax <= *offset {
                    return Ok(x.clone());
                }
                let ua = u.apply(normal)?;
                let denom = normal.dot(&ua);
                let mu = (ax - offset) / denom;
                Ok(x.axpy(-mu, &ua))
            }
        }
    }
}

/// Maximal-monotone side of the inclusion, as a catalog of operators whose
/// metric resolvents are computable exactly.
///
/// `Indicator(C)` is the subdifferential of the indicator of `C`;
/// `NormalCone(C)` is the same operator arising from a variational-inequality
/// reduction. Both resolve to the metric projection onto `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Proximable {
    /// `A ≡ {0}`; the resolvent is the identity.
    Zero,
    /// `g(x) = weight·‖x‖₁`
    L1Norm { weight: f64 },
    Indicator(SetDescriptor),
    NormalCone(SetDescriptor),
}

impl Proximable {
    pub fn l1_norm(weight: f64) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::invalid(format!("L1 weight {weight} must be >= 0")));
        }
        Ok(Proximable::L1Norm { weight })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Proximable::Zero => "zero",
            Proximable::L1Norm { .. } => "l1-norm",
            Proximable::Indicator(s) => s.name(),
            Proximable::NormalCone(s) => s.name(),
        }
    }

    /// Whether `(self, u)` admits an exact metric resolvent.
    pub fn supports(&self, u: &Metric) -> bool {
        let dense = matches!(u.kind(), MetricKind::Dense(_));
        match self {
            Proximable::Zero => true,
            Proximable::L1Norm { .. } => !dense,
            Proximable::Indicator(s) | Proximable::NormalCone(s) => match s {
                SetDescriptor::WholeSpace | SetDescriptor::HalfSpace { .. } => true,
                SetDescriptor::L1Ball { .. } | SetDescriptor::Box { .. } => !dense,
            },
        }
    }

    /// The metric resolvent `J_{γUA}(x)`, i.e. the minimizer of
    /// `½‖p − x‖²_{U⁻¹} + γ·g(p)`. For indicator-type operators this is the
    /// metric projection and `γ` drops out.
    pub fn resolvent(&self, gamma: f64, u: &Metric, x: &Vector) -> Result<Vector> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("resolvent index {gamma} must be > 0")));
        }
        if u.dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: u.dim(),
                got: x.dim(),
            });
        }
        match self {
            Proximable::Zero => Ok(x.clone()),
            Proximable::L1Norm { weight } => match u.kind() {
                MetricKind::ScaledIdentity(c) => {
                    let t = gamma * c * weight;
                    Ok(Vector::from_raw(
                        x.iter().map(|&v| soft_threshold(v, t)).collect(),
                    ))
                }
                MetricKind::Diagonal(d) => Ok(Vector::from_raw(
                    x.iter()
                        .zip(d)
                        .map(|(&v, &di)| soft_threshold(v, gamma * di * weight))
                        .collect(),
                )),
                MetricKind::Dense(_) => Err(Error::UnsupportedMetric {
                    prox: self.name(),
                    metric: u.kind_name(),
                }),
            },
            Proximable::Indicator(s) | Proximable::NormalCone(s) => s.metric_project(u, x),
        }
    }
}

/// Single-valued cocoercive side of the inclusion.
#[derive(Debug, Clone)]
pub enum CocoerciveKind {
    /// `B ≡ 0`
    Zero,
    /// `Bx = Aᵀ(Ax − b)`, the gradient of `½‖Ax − b‖²`.
    LeastSquares { a: LinearMap, b: Vector },
    /// `Bx = Lᵀ(Lx − P_Q(Lx))`, the gradient of `½·dist²(Lx, Q)`.
    SfpResidual { l: LinearMap, q: SetDescriptor },
    /// `Bx = Mx + c` with SPD `M`.
    AffineMonotone { m: Metric, c: Vector },
}

/// A cocoercive operator `B` with a certified constant `β`:
/// `⟨x−y, Bx−By⟩ ≥ β‖Bx−By‖²` for all `x, y`.
#[derive(Debug, Clone)]
pub struct Cocoercive {
    kind: CocoerciveKind,
    beta: f64,
}

impl Cocoercive {
    /// The zero operator; vacuously cocoercive for every constant, reported
    /// as `β = +∞`.
    pub fn zero() -> Self {
        Cocoercive {
            kind: CocoerciveKind::Zero,
            beta: f64::INFINITY,
        }
    }

    /// Least-squares gradient with `β = 1/‖A‖²`. The spectral-norm estimate's
    /// tolerance is folded in conservatively: `β = 1/(σ(1+tol))²`.
    pub fn least_squares(a: LinearMap, b: Vector) -> Result<Self> {
        Cocoercive::least_squares_with(
            a,
            b,
            DEFAULT_OP_NORM_TOL,
            DEFAULT_OP_NORM_MAX_ITER,
            DEFAULT_OP_NORM_SEED,
        )
    }

    pub fn least_squares_with(
        a: LinearMap,
        b: Vector,
        tol: f64,
        max_iter: usize,
        seed: u64,
    ) -> Result<Self> {
        if b.dim() != a.rows() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                got: b.dim(),
            });
        }
        let beta = certified_inverse_square_norm(&a, tol, max_iter, seed)?;
        Ok(Cocoercive {
            kind: CocoerciveKind::LeastSquares { a, b },
            beta,
        })
    }

    /// Split-feasibility residual gradient with `β = 1/‖L‖²`, certified the
    /// same way as [`Cocoercive::least_squares`].
    pub fn sfp_residual(l: LinearMap, q: SetDescriptor) -> Result<Self> {
        Cocoercive::sfp_residual_with(
            l,
            q,
            DEFAULT_OP_NORM_TOL,
            DEFAULT_OP_NORM_MAX_ITER,
            DEFAULT_OP_NORM_SEED,
        )
    }

    pub fn sfp_residual_with(
        l: LinearMap,
        q: SetDescriptor,
        tol: f64,
        max_iter: usize,
        seed: u64,
    ) -> Result<Self> {
        let beta = certified_inverse_square_norm(&l, tol, max_iter, seed)?;
        Ok(Cocoercive {
            kind: CocoerciveKind::SfpResidual { l, q },
            beta,
        })
    }

    /// `Bx = Mx + c` for SPD `M`; `β = 1/‖M‖` from the metric's cached norm.
    pub fn affine(m: Metric, c: Vector) -> Result<Self> {
        if c.dim() != m.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                got: c.dim(),
            });
        }
        let beta = 1.0 / m.norm();
        Ok(Cocoercive {
            kind: CocoerciveKind::AffineMonotone { m, c },
            beta,
        })
    }

    /// The identity map, `β = 1`.
    pub fn identity_map(dim: usize) -> Self {
        Cocoercive::affine(Metric::identity(dim), Vector::zeros(dim))
            .expect("identity affine operator is always valid")
    }

    pub fn kind(&self) -> &CocoerciveKind {
        &self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `B x`
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        match &self.kind {
            CocoerciveKind::Zero => Ok(Vector::zeros(x.dim())),
            CocoerciveKind::LeastSquares { a, b } => {
                let r = a.apply(x)?;
                a.apply_transpose(&(&r - b))
            }
            CocoerciveKind::SfpResidual { l, q } => {
                let lx = l.apply(x)?;
                let pq = q.project(&lx)?;
                l.apply_transpose(&(&lx - &pq))
            }
            CocoerciveKind::AffineMonotone { m, c } => Ok(&m.apply(x)? + c),
        }
    }

    /// `½·dist²(Lx, Q)` for the split-feasibility kind, `½‖Ax−b‖²` for least
    /// squares; `None` otherwise.
    pub fn objective_value(&self, x: &Vector) -> Result<Option<f64>> {
        match &self.kind {
            CocoerciveKind::LeastSquares { a, b } => {
                let r = &a.apply(x)? - b;
                Ok(Some(0.5 * r.dot(&r)))
            }
            CocoerciveKind::SfpResidual { l, q } => {
                let lx = l.apply(x)?;
                let r = &lx - &q.project(&lx)?;
                Ok(Some(0.5 * r.dot(&r)))
            }
            _ => Ok(None),
        }
    }
}

fn certified_inverse_square_norm(
    l: &LinearMap,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<f64> {
    let est = match l.op_norm() {
        Some(e) => *e,
        None => crate::linops::op_norm_estimate(l, tol, max_iter, seed)?,
    };
    if !est.certified {
        return Err(Error::NormEstimateUncertified {
            value: est.value,
            iterations: est.iterations,
        });
    }
    let inflated = est.value * (1.0 + est.tol);
    if inflated == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (inflated * inflated))
}

/// Tolerance slack used by [`check_averaged`] and the firm-nonexpansiveness
/// checks built on it.
pub const AVERAGED_SLACK: f64 = 1e-8;

/// Averagedness constant of the forward step `I − γUB`: `γ‖U‖/(2β)`,
/// valid for `γ ∈ (0, 2β/‖U‖)`.
pub fn averaged_constant_forward(beta: f64, gamma: f64, norm_u: f64) -> Result<f64> {
    check_step_range(beta, gamma, norm_u)?;
    Ok(gamma * norm_u / (2.0 * beta))
}

/// Averagedness constant of the composed map `J_{γUA}(I − γUB)`:
/// `2β/(4β − γ‖U‖) ∈ (½, 1)` for `γ ∈ (0, 2β/‖U‖)`.
pub fn averaged_constant_composed(beta: f64, gamma: f64, norm_u: f64) -> Result<f64> {
    check_step_range(beta, gamma, norm_u)?;
    Ok(2.0 * beta / (4.0 * beta - gamma * norm_u))
}

/// Averagedness constant of a composition `T₁∘T₂` of an `a1`- and an
/// `a2`-averaged map: `(a1 + a2 − 2·a1·a2)/(1 − a1·a2)`.
pub fn averaged_composition(a1: f64, a2: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&a1) && (0.0..1.0).contains(&a2));
    (a1 + a2 - 2.0 * a1 * a2) / (1.0 - a1 * a2)
}

fn check_step_range(beta: f64, gamma: f64, norm_u: f64) -> Result<()> {
    if !(beta > 0.0) || !(norm_u > 0.0) {
        return Err(Error::invalid("beta and ‖U‖ must be positive"));
    }
    let limit = 2.0 * beta / norm_u;
    if !(gamma > 0.0 && gamma < limit) {
        return Err(Error::StepSizeOutOfRange { gamma, limit });
    }
    Ok(())
}

/// Whether a black-box map behaves `alpha`-averaged on the given sample
/// pairs, in the `‖·‖_{U⁻¹}` norm: for each pair,
/// `‖Tx − Ty‖² ≤ ‖x − y‖² − ((1−α)/α)·‖(I−T)x − (I−T)y‖²` up to
/// [`AVERAGED_SLACK`].
pub fn check_averaged<T>(map: T, alpha: f64, u: &Metric, pairs: &[(Vector, Vector)]) -> bool
where
    T: Fn(&Vector) -> Vector,
{
    assert!(
        alpha > 0.0 && alpha < 1.0,
        "averagedness constant must lie in (0, 1)"
    );
    let ratio = (1.0 - alpha) / alpha;
    pairs.iter().all(|(x, y)| {
        let tx = map(x);
        let ty = map(y);
        let dxy = x - y;
        let dt = &tx - &ty;
        let dres = &(x - &tx) - &(y - &ty);
        let lhs = u
            .inv_weighted_norm(&dt)
            .expect("dimension mismatch in check_averaged");
        let base = u.inv_weighted_norm(&dxy).unwrap();
        let res = u.inv_weighted_norm(&dres).unwrap();
        lhs * lhs <= base * base - ratio * res * res + AVERAGED_SLACK
    })
}

/// One forward-backward pass `J_{γUA}(x − γUBx)`.
pub fn forward_backward_map(
    p: &Proximable,
    b: &Cocoercive,
    gamma: f64,
    u: &Metric,
    x: &Vector,
) -> Result<Vector> {
    let bx = b.apply(x)?;
    let y = x.axpy(-gamma, &u.apply(&bx)?);
    p.resolvent(gamma, u, &y)
}

/// `‖x − J_{γUA}(x − γUBx)‖` (Euclidean); zero exactly at the solutions of
/// the inclusion.
pub fn fixed_point_residual(
    p: &Proximable,
    b: &Cocoercive,
    gamma: f64,
    u: &Metric,
    x: &Vector,
) -> Result<f64> {
    let t = forward_backward_map(p, b, gamma, u, x)?;
    Ok((x - &t).norm())
}

/// Both sides of the metric-perturbation bound between forward-backward maps
/// with parameters `(r, U)` and `(s, V)` at `x`:
/// `‖T_{rU}x − T_{sV}x‖ ≤ (1/λ_min(U⁻¹))·‖(U⁻¹ − (r/s)V⁻¹)(x − T_{sV}x)‖`.
/// Returns `(lhs, rhs)`.
pub fn metric_perturbation_bound(
    p: &Proximable,
    b: &Cocoercive,
    r: f64,
    s: f64,
    u: &Metric,
    v: &Metric,
    x: &Vector,
) -> Result<(f64, f64)> {
    if !(r > 0.0 && s > 0.0) {
        return Err(Error::invalid("perturbation indices must be positive"));
    }
    let t_ru = forward_backward_map(p, b, r, u, x)?;
    let t_sv = forward_backward_map(p, b, s, v, x)?;
    let lhs = (&t_ru - &t_sv).norm();
    let z = x - &t_sv;
    let w = u.inv_apply(&z)?.axpy(-(r / s), &v.inv_apply(&z)?);
    // λ_min(U⁻¹) = 1/‖U‖
    let rhs = u.norm() * w.norm();
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[f64]) -> Vector {
        Vector::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn resolvent_of_zero_is_identity() {
        let x = v(&[1.0, 2.0]);
        let p = Proximable::Zero;
        let out = p.resolvent(3.7, &Metric::identity(2), &x).unwrap();
        assert_eq!(out, x);
    }

    #[test]
    fn resolvent_soft_thresholds_l1_norm() {
        let p = Proximable::l1_norm(1.0).unwrap();
        let out = p
            .resolvent(1.0, &Metric::identity(2), &v(&[2.0, -0.5]))
            .unwrap();
        assert_eq!(out, v(&[1.0, 0.0]));
    }

    #[test]
    fn resolvent_projects_l1_ball() {
        let p = Proximable::Indicator(SetDescriptor::l1_ball(1.0).unwrap());
        let out = p
            .resolvent(1.0, &Metric::identity(2), &v(&[2.0, 1.0]))
            .unwrap();
        assert!((out[0] - 1.0).abs() < 1e-14);
        assert_eq!(out[1], 0.0);
    }

    #[test]
    fn resolvent_weighted_l1_ball() {
        let p = Proximable::Indicator(SetDescriptor::l1_ball(1.0).unwrap());
        let u = Metric::diagonal(v(&[1.0, 4.0])).unwrap();
        let out = p.resolvent(1.0, &u, &v(&[2.0, 1.0])).unwrap();
        assert!((out[0] - 1.0).abs() < 1e-10);
        assert_eq!(out[1], 0.0);
    }

    #[test]
    fn dense_metric_unsupported_for_separable_prox() {
        let p = Proximable::Indicator(SetDescriptor::l1_ball(1.0).unwrap());
        let u = Metric::dense(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            p.resolvent(1.0, &u, &v(&[1.0, 1.0])),
            Err(Error::UnsupportedMetric { .. })
        ));
        assert!(!p.supports(&u));
        assert!(Proximable::Zero.supports(&u));
    }

    #[test]
    fn half_space_projection_under_dense_metric() {
        // {x : x₀ + x₁ ≤ 0} under U = [[2,1],[1,2]]
        let s = SetDescriptor::half_space(v(&[1.0, 1.0]), 0.0).unwrap();
        let u = Metric::dense(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let x = v(&[2.0, 1.0]);
        let p = s.metric_project(&u, &x).unwrap();
        // feasibility and complementarity
        assert!(v(&[1.0, 1.0]).dot(&p) <= 1e-12);
        // optimality: U⁻¹(x − p) parallel to the normal
        let q = u.inv_apply(&(&x - &p)).unwrap();
        assert!((q[0] - q[1]).abs() < 1e-12);
        // interior points are untouched
        let inside = v(&[-1.0, 0.5]);
        assert_eq!(s.metric_project(&u, &inside).unwrap(), inside);
    }

    #[test]
    fn cocoercive_apply_examples() {
        // L = I, Q the whole space: residual gradient vanishes everywhere.
        let b = Cocoercive::sfp_residual(LinearMap::identity(2), SetDescriptor::WholeSpace)
            .unwrap();
        assert_eq!(b.apply(&v(&[5.0, -3.0])).unwrap(), Vector::zeros(2));

        // L = I, Q = {0}: the gradient is x itself.
        let b = Cocoercive::sfp_residual(
            LinearMap::identity(2),
            SetDescriptor::singleton(Vector::zeros(2)),
        )
        .unwrap();
        assert_eq!(b.apply(&v(&[3.0, -1.0])).unwrap(), v(&[3.0, -1.0]));

        // A = I, b = (1,1): gradient at the origin is −b.
        let b = Cocoercive::least_squares(LinearMap::identity(2), v(&[1.0, 1.0])).unwrap();
        assert_eq!(b.apply(&Vector::zeros(2)).unwrap(), v(&[-1.0, -1.0]));
    }

    #[test]
    fn certified_beta_is_conservative() {
        let b = Cocoercive::least_squares(LinearMap::identity(2), v(&[0.0, 0.0])).unwrap();
        // true β = 1; certificate may only shrink it
        assert!(b.beta() <= 1.0 && b.beta() > 0.99);
    }

    #[test]
    fn averaged_constants_examples() {
        assert!((averaged_constant_forward(1.0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(averaged_constant_forward(1.0, 1e-12, 1.0).unwrap() < 1e-11);
        assert!((averaged_constant_forward(0.5, 1.0, 0.9).unwrap() - 0.9).abs() < 1e-15);

        assert!((averaged_constant_composed(1.0, 1.0, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((averaged_constant_composed(1.0, 1e-12, 1.0).unwrap() - 0.5).abs() < 1e-9);
        assert!(averaged_constant_composed(1.0, 2.0 - 1e-9, 1.0).unwrap() > 0.999);

        assert!(matches!(
            averaged_constant_forward(1.0, 2.0, 1.0),
            Err(Error::StepSizeOutOfRange { .. })
        ));
        assert!(matches!(
            averaged_constant_composed(1.0, -0.1, 1.0),
            Err(Error::StepSizeOutOfRange { .. })
        ));
    }

    #[test]
    fn composition_formula_specializes() {
        // first factor ½-averaged recovers 1/(2−a)
        let a2 = 0.7;
        assert!((averaged_composition(0.5, a2) - 1.0 / (2.0 - a2)).abs() < 1e-15);
    }

    #[test]
    fn check_averaged_identity_and_negation() {
        let u = Metric::identity(1);
        let pairs = vec![(v(&[1.0]), v(&[-1.0])), (v(&[0.3]), v(&[2.0]))];
        assert!(check_averaged(|x: &Vector| x.clone(), 0.5, &u, &pairs));
        assert!(!check_averaged(|x: &Vector| x.scale(-1.0), 0.5, &u, &pairs));
    }

    #[test]
    fn fixed_point_residual_examples() {
        let x = v(&[0.4, -0.7]);
        assert_eq!(
            fixed_point_residual(&Proximable::Zero, &Cocoercive::zero(), 1.0, &Metric::identity(2), &x)
                .unwrap(),
            0.0
        );

        let c = v(&[1.0, 1.0]);
        let b = Cocoercive::least_squares(LinearMap::identity(2), c.clone()).unwrap();
        let res_at_solution =
            fixed_point_residual(&Proximable::Zero, &b, 1.0, &Metric::identity(2), &c).unwrap();
        assert!(res_at_solution < 1e-12);

        let res_at_zero =
            fixed_point_residual(&Proximable::Zero, &b, 1.0, &Metric::identity(2), &Vector::zeros(2))
                .unwrap();
        // one exact gradient step from the origin lands on c
        assert!((res_at_zero - 2.0f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn perturbation_bound_trivial_case() {
        let b = Cocoercive::least_squares(LinearMap::identity(2), v(&[1.0, -2.0])).unwrap();
        let p = Proximable::Indicator(SetDescriptor::l1_ball(1.0).unwrap());
        let u = Metric::identity(2);
        let (lhs, rhs) =
            metric_perturbation_bound(&p, &b, 0.7, 0.7, &u, &u, &v(&[0.4, 0.9])).unwrap();
        assert!(lhs.abs() < 1e-15 && rhs.abs() < 1e-15);
    }

    #[test]
    fn objective_value_matches_definition() {
        let a = LinearMap::from_rows(&[&[1.0, 0.0], &[1.0, 1.0]]).unwrap();
        let b = Cocoercive::least_squares(a, v(&[1.0, 0.0])).unwrap();
        let x = v(&[2.0, 1.0]);
        // residual (1, 3) → ½(1 + 9)
        assert!((b.objective_value(&x).unwrap().unwrap() - 5.0).abs() < 1e-14);
        assert_eq!(Cocoercive::zero().objective_value(&x).unwrap(), None);
    }
}
