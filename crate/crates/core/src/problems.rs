//! Reductions of the four application problems to `(Proximable, Cocoercive,
//! β)` triples, plus seeded instance generation and exact-replay
//! serialization.
//!
//! * L1-constrained least squares: `min ½‖Ax − b‖²  s.t. ‖x‖₁ ≤ t`
//! * Variational inequality over `C` for a cocoercive `B`
//! * Constrained minimization: `min f(x)  s.t. x ∈ C`
//! * Split feasibility: find `x ∈ C` with `Lx ∈ Q`

use serde::{Deserialize, Serialize};

use crate::linops::{LinearMap, Vector};
use crate::operators::{Cocoercive, Proximable, SetDescriptor};
use crate::rng::{SeededRng, RNG_ID};
use crate::{Error, Result};

/// A planted sparse-recovery instance: Gaussian `A`, `k`-sparse `x_true` with
/// entries uniform in `[−2, 2]`, `b = A·x_true`, and L1 radius `t`.
#[derive(Debug, Clone)]
pub struct LassoInstance {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub a: LinearMap,
    pub b: Vector,
    pub x_true: Vector,
    pub t: f64,
}

/// Split-feasibility instance: find `x ∈ C` with `Lx ∈ Q`.
#[derive(Debug, Clone)]
pub struct SfpInstance {
    pub l: LinearMap,
    pub c: SetDescriptor,
    pub q: SetDescriptor,
}

/// Generates a deterministic instance. Draw order is fixed: the entries of
/// `A` row-major, then the support (a Fisher–Yates prefix over `0..n`,
/// reported sorted), then the `k` nonzero values, redrawing exact zeros.
/// `t` defaults to `‖x_true‖₁` so the planted signal is feasible and on the
/// constraint boundary.
pub fn generate_lasso_instance(
    m: usize,
    n: usize,
    k: usize,
    seed: u64,
) -> Result<LassoInstance> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("dimensions must be at least 1"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("sparsity k={k} must satisfy 1 <= k <= n={n}")));
    }
    let mut rng = SeededRng::new(seed);
    let data: Vec<f64> = (0..m * n).map(|_| rng.gaussian()).collect();
    let a = LinearMap::from_row_major(m, n, data)?;

    let mut support = rng.fisher_yates_prefix(n, k);
    support.sort_unstable();

    let mut x_true = vec![0.0; n];
    for &idx in &support {
        let mut v = rng.uniform(-2.0, 2.0);
        while v == 0.0 {
            v = rng.uniform(-2.0, 2.0);
        }
        x_true[idx] = v;
    }
    let x_true = Vector::new(x_true)?;
    let b = a.apply(&x_true)?;
    let t = x_true.norm1();
    Ok(LassoInstance {
        m,
        n,
        k,
        seed,
        a,
        b,
        x_true,
        t,
    })
}

/// `(L1-ball indicator, least-squares gradient, β = 1/‖A‖²)`; the norm
/// estimate's tolerance is folded into `β` conservatively.
pub fn build_lasso(inst: &LassoInstance) -> Result<(Proximable, Cocoercive, f64)> {
    let prox = Proximable::Indicator(SetDescriptor::l1_ball(inst.t)?);
    let grad = Cocoercive::least_squares(inst.a.clone(), inst.b.clone())?;
    let beta = grad.beta();
    Ok((prox, grad, beta))
}

/// Variational inequality `⟨Bx*, y − x*⟩ ≥ 0 ∀y ∈ C` as the inclusion
/// `0 ∈ Bx + N_C(x)`.
pub fn build_vip(c: SetDescriptor, b: Cocoercive) -> (Proximable, Cocoercive, f64) {
    let beta = b.beta();
    (Proximable::NormalCone(c), b, beta)
}

/// `min f(x)` over `C`, given `∇f` as a cocoercive operator.
pub fn build_constrained_min(
    c: SetDescriptor,
    f_grad: Cocoercive,
) -> (Proximable, Cocoercive, f64) {
    let beta = f_grad.beta();
    (Proximable::Indicator(c), f_grad, beta)
}

/// Split feasibility via the residual gradient `Lᵀ(Lx − P_Q(Lx))` with
/// `β = 1/‖L‖²`.
pub fn build_sfp(inst: &SfpInstance) -> Result<(Proximable, Cocoercive, f64)> {
    let grad = Cocoercive::sfp_residual(inst.l.clone(), inst.q.clone())?;
    let beta = grad.beta();
    Ok((Proximable::NormalCone(inst.c.clone()), grad, beta))
}

/// On-disk form of a [`LassoInstance`]; `a_row_major` lists `A` row by row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LassoInstanceFile {
    pub schema: u32,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub rng_id: String,
    pub t: f64,
    pub a_row_major: Vec<f64>,
    pub b: Vec<f64>,
    pub x_true: Vec<f64>,
}

pub const INSTANCE_SCHEMA: u32 = 1;

impl LassoInstance {
    pub fn to_file(&self) -> LassoInstanceFile {
        LassoInstanceFile {
            schema: INSTANCE_SCHEMA,
            m: self.m,
            n: self.n,
            k: self.k,
            seed: self.seed,
            rng_id: RNG_ID.to_string(),
            t: self.t,
            a_row_major: self.a.matrix().data().to_vec(),
            b: self.b.as_slice().to_vec(),
            x_true: self.x_true.as_slice().to_vec(),
        }
    }

    pub fn from_file(f: LassoInstanceFile) -> Result<Self> {
        if f.schema != INSTANCE_SCHEMA {
            return Err(Error::invalid(format!(
                "unsupported instance schema {} (expected {INSTANCE_SCHEMA})",
                f.schema
            )));
        }
        if !(f.t > 0.0 && f.t.is_finite()) {
            return Err(Error::invalid(format!("radius t={} must be > 0", f.t)));
        }
        let a = LinearMap::from_row_major(f.m, f.n, f.a_row_major)?;
        let b = Vector::new(f.b)?;
        let x_true = Vector::new(f.x_true)?;
        if b.dim() != f.m || x_true.dim() != f.n {
            return Err(Error::invalid("instance vector dimensions disagree with m, n"));
        }
        Ok(LassoInstance {
            m: f.m,
            n: f.n,
            k: f.k,
            seed: f.seed,
            a,
            b,
            x_true,
            t: f.t,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::Metric;
    use crate::operators::fixed_point_residual;
    use crate::solver::{solve, Schedules, SolveOptions, StopMode, StoppingRule};

    fn v(entries: &[f64]) -> Vector {
        Vector::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn generator_plants_exact_instances() {
        let inst = generate_lasso_instance(24, 100, 4, 7).unwrap();
        assert_eq!(inst.x_true.iter().filter(|v| **v != 0.0).count(), 4);
        assert!(inst.x_true.iter().all(|v| v.abs() <= 2.0));
        let reconstructed = inst.a.apply(&inst.x_true).unwrap();
        assert_eq!(reconstructed, inst.b);
        assert!((inst.t - inst.x_true.norm1()).abs() == 0.0);
    }

    #[test]
    fn generator_is_bit_deterministic() {
        let a = generate_lasso_instance(10, 30, 3, 99).unwrap();
        let b = generate_lasso_instance(10, 30, 3, 99).unwrap();
        assert_eq!(a.a.matrix().data(), b.a.matrix().data());
        assert_eq!(a.x_true, b.x_true);
        assert_eq!(a.b, b.b);
        let c = generate_lasso_instance(10, 30, 3, 100).unwrap();
        assert_ne!(a.a.matrix().data(), c.a.matrix().data());
    }

    #[test]
    fn generator_rejects_bad_dims() {
        assert!(generate_lasso_instance(0, 10, 1, 0).is_err());
        assert!(generate_lasso_instance(5, 10, 0, 0).is_err());
        assert!(generate_lasso_instance(5, 10, 11, 0).is_err());
    }

    #[test]
    fn instance_file_roundtrip_is_exact() {
        let inst = generate_lasso_instance(6, 12, 2, 3).unwrap();
        let json = serde_json::to_string(&inst.to_file()).unwrap();
        let parsed: LassoInstanceFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.rng_id, RNG_ID);
        let back = LassoInstance::from_file(parsed).unwrap();
        assert_eq!(back.a.matrix().data(), inst.a.matrix().data());
        assert_eq!(back.b, inst.b);
        assert_eq!(back.x_true, inst.x_true);
        assert_eq!(back.t, inst.t);
    }

    fn quick_solve(
        p: &Proximable,
        b: &Cocoercive,
        beta: f64,
        x0: &Vector,
        max_iter: usize,
    ) -> Vector {
        let s = Schedules::constant(beta, 1.0, Metric::identity(x0.dim()));
        let stop = StoppingRule::new(1e-12, max_iter, StopMode::FixedPointResidual).unwrap();
        solve(p, b, &s, &stop, x0, &SolveOptions::default())
            .unwrap()
            .final_x
    }

    #[test]
    fn lasso_interior_solution() {
        // A = I, b = (1,1), t = 10: the unconstrained optimum is feasible.
        let inst = LassoInstance {
            m: 2,
            n: 2,
            k: 2,
            seed: 0,
            a: LinearMap::identity(2),
            b: v(&[1.0, 1.0]),
            x_true: v(&[1.0, 1.0]),
            t: 10.0,
        };
        let (p, b, beta) = build_lasso(&inst).unwrap();
        let x = quick_solve(&p, &b, beta, &Vector::zeros(2), 1000);
        assert!((&x - &v(&[1.0, 1.0])).norm() < 1e-9);
    }

    #[test]
    fn lasso_boundary_solution_is_projection() {
        // A = I, b = (3,0), t = 1: solution is the projection (1, 0).
        let inst = LassoInstance {
            m: 2,
            n: 2,
            k: 1,
            seed: 0,
            a: LinearMap::identity(2),
            b: v(&[3.0, 0.0]),
            x_true: v(&[3.0, 0.0]),
            t: 1.0,
        };
        let (p, b, beta) = build_lasso(&inst).unwrap();
        let x = quick_solve(&p, &b, beta, &Vector::zeros(2), 2000);
        assert!((&x - &v(&[1.0, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn paper_scale_instance_generates() {
        let inst = generate_lasso_instance(240, 1024, 40, 1).unwrap();
        assert_eq!(inst.x_true.iter().filter(|v| **v != 0.0).count(), 40);
        let (_, grad, beta) = build_lasso(&inst).unwrap();
        assert!(beta > 0.0 && beta.is_finite());
        assert_eq!(grad.beta(), beta);
    }

    #[test]
    fn vip_solution_is_metric_projection() {
        // C = [0,1]², Bx = x − q with q = (2, −0.5): solution P_C(q) = (1, 0).
        let c = SetDescriptor::boxed(Vector::zeros(2), v(&[1.0, 1.0])).unwrap();
        let b = Cocoercive::affine(Metric::identity(2), v(&[-2.0, 0.5])).unwrap();
        let (p, b, beta) = build_vip(c, b);
        let x = quick_solve(&p, &b, beta, &v(&[0.5, 0.5]), 2000);
        assert!((&x - &v(&[1.0, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn vip_whole_space_recovers_zero_of_b() {
        let q = v(&[0.3, -0.8]);
        let b = Cocoercive::affine(Metric::identity(2), q.scale(-1.0)).unwrap();
        let (p, b, beta) = build_vip(SetDescriptor::WholeSpace, b);
        let x = quick_solve(&p, &b, beta, &Vector::zeros(2), 2000);
        assert!((&x - &q).norm() < 1e-10);
    }

    #[test]
    fn vip_half_space_with_zero_operator() {
        let c = SetDescriptor::half_space(v(&[1.0, 0.0]), 1.0).unwrap();
        let (p, b, _) = build_vip(c, Cocoercive::zero());
        // any feasible point is a solution: residual 0 there
        let x = v(&[0.2, 5.0]);
        let r = fixed_point_residual(&p, &b, 1.0, &Metric::identity(2), &x).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn constrained_min_feasible_optimum() {
        let c = v(&[0.25, -0.5]);
        let grad = Cocoercive::affine(Metric::identity(2), c.scale(-1.0)).unwrap();
        let set = SetDescriptor::boxed(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
        let (p, b, beta) = build_constrained_min(set, grad);
        let x = quick_solve(&p, &b, beta, &Vector::zeros(2), 1000);
        assert!((&x - &c).norm() < 1e-10);
    }

    #[test]
    fn constrained_min_l1_ball_projection() {
        // f = ½‖x − (2,0)‖², C the unit L1 ball: solution (1, 0).
        let grad = Cocoercive::affine(Metric::identity(2), v(&[-2.0, 0.0])).unwrap();
        let (p, b, beta) = build_constrained_min(SetDescriptor::l1_ball(1.0).unwrap(), grad);
        let x = quick_solve(&p, &b, beta, &Vector::zeros(2), 2000);
        assert!((&x - &v(&[1.0, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn sfp_consistent_box_case() {
        // L = I, C = Q = [0,1]²: every point of the box solves.
        let unit_box = SetDescriptor::boxed(Vector::zeros(2), v(&[1.0, 1.0])).unwrap();
        let inst = SfpInstance {
            l: LinearMap::identity(2),
            c: unit_box.clone(),
            q: unit_box,
        };
        let (p, b, _) = build_sfp(&inst).unwrap();
        let inside = v(&[0.3, 0.9]);
        let r = fixed_point_residual(&p, &b, 1.0, &Metric::identity(2), &inside).unwrap();
        assert!(r < 1e-14);
    }

    #[test]
    fn sfp_disjoint_boxes_converges_to_nearest_point() {
        // C = [0,1]², Q = [2,3]²: minimizer of ½dist²(x, Q) over C is (1,1).
        let inst = SfpInstance {
            l: LinearMap::identity(2),
            c: SetDescriptor::boxed(Vector::zeros(2), v(&[1.0, 1.0])).unwrap(),
            q: SetDescriptor::boxed(v(&[2.0, 2.0]), v(&[3.0, 3.0])).unwrap(),
        };
        let (p, b, beta) = build_sfp(&inst).unwrap();
        let x = quick_solve(&p, &b, beta, &v(&[0.5, 0.2]), 5000);
        assert!((&x - &v(&[1.0, 1.0])).norm() < 1e-6);
    }

    #[test]
    fn sfp_line_solution_set() {
        // L = [1 0], C = [0,2]², Q = {1}: solutions are {(1, y) : y ∈ [0,2]}.
        let inst = SfpInstance {
            l: LinearMap::from_rows(&[&[1.0, 0.0]]).unwrap(),
            c: SetDescriptor::boxed(Vector::zeros(2), v(&[2.0, 2.0])).unwrap(),
            q: SetDescriptor::singleton(Vector::new(vec![1.0]).unwrap()),
        };
        let (p, b, beta) = build_sfp(&inst).unwrap();
        let x = quick_solve(&p, &b, beta, &v(&[1.7, 0.6]), 5000);
        assert!((x[0] - 1.0).abs() < 1e-6);
        assert!((x[1] - 0.6).abs() < 1e-9, "y coordinate should stay put");
        let f = b.objective_value(&x).unwrap().unwrap();
        assert!(f <= 1e-12);
    }
}
