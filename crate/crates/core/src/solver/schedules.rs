//! Per-iteration parameter streams (step sizes, relaxation, metric drift,
//! error sequences) and validators for the admissibility conditions the
//! convergence guarantees need.
//!
//! Infinite-sum conditions can only be witnessed over a finite horizon; those
//! checks are labeled `heuristic` in the report and documented at the
//! constants that tune them.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::linops::{Metric, Vector};
use crate::rng::SeededRng;

/// Deterministic scalar stream indexed by iteration.
#[derive(Debug, Clone)]
pub enum ScalarSchedule {
    Constant(f64),
    /// Explicit per-iteration values; indexing past the end repeats the last
    /// entry.
    List(Vec<f64>),
    /// `scale / (k + 1)²` — summable by construction.
    InverseSquareDecay { scale: f64 },
}

impl ScalarSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            ScalarSchedule::Constant(c) => *c,
            ScalarSchedule::List(v) => v[k.min(v.len() - 1)],
            ScalarSchedule::InverseSquareDecay { scale } => {
                let kk = (k + 1) as f64;
                scale / (kk * kk)
            }
        }
    }
}

/// Relaxation stream; the per-iteration upper bound `1/α_k` depends on
/// `(β, γ_k, ‖U_k‖)`, so a schedule may be phrased relative to it.
#[derive(Debug, Clone)]
pub enum RelaxSchedule {
    Fixed(ScalarSchedule),
    /// `λ_k = 1/α_k − (k + 2)^{-power}`: approaches the bound from below
    /// with no uniform gap.
    GapBelowUpperBound { power: f64 },
}

impl RelaxSchedule {
    pub fn at(&self, k: usize, upper_bound: f64) -> f64 {
        match self {
            RelaxSchedule::Fixed(s) => s.at(k),
            RelaxSchedule::GapBelowUpperBound { power } => {
                upper_bound - ((k + 2) as f64).powf(-power)
            }
        }
    }
}

/// Metric stream `U_k`.
#[derive(Debug, Clone)]
pub enum MetricSchedule {
    Constant(Metric),
    /// Indexing past the end repeats the last entry.
    List(Vec<Metric>),
    /// `U_k = (1 + excess/(k+1)²)·base`: shrinks monotonically toward `base`,
    /// so `(1+η_k)U_{k+1} ⪰ U_k` holds for any `η_k ≥ excess/(k+1)²`.
    ScaledDecay { base: Metric, excess: f64 },
}

impl MetricSchedule {
    pub fn at(&self, k: usize) -> Cow<'_, Metric> {
        match self {
            MetricSchedule::Constant(m) => Cow::Borrowed(m),
            MetricSchedule::List(v) => Cow::Borrowed(&v[k.min(v.len() - 1)]),
            MetricSchedule::ScaledDecay { base, excess } => {
                let kk = (k + 1) as f64;
                Cow::Owned(base.scaled_by(1.0 + excess / (kk * kk)))
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MetricSchedule::Constant(m) => m.dim(),
            MetricSchedule::List(v) => v[0].dim(),
            MetricSchedule::ScaledDecay { base, .. } => base.dim(),
        }
    }
}

/// Error stream for the inexact iteration; `None` means exactly zero.
#[derive(Debug, Clone)]
pub enum ErrorSchedule {
    Zero,
    /// Indexing past the end repeats the last entry.
    List(Vec<Vector>),
    /// Seeded noise with `‖e_k‖ = scale/(k+1)²` exactly; the direction is an
    /// isotropic unit vector drawn on ChaCha stream `k`.
    DecayingNoise { scale: f64, seed: u64 },
}

impl ErrorSchedule {
    pub fn at(&self, k: usize, dim: usize) -> Option<Vector> {
        match self {
            ErrorSchedule::Zero => None,
            ErrorSchedule::List(v) => Some(v[k.min(v.len() - 1)].clone()),
            ErrorSchedule::DecayingNoise { scale, seed } => {
                if *scale == 0.0 {
                    return None;
                }
                let mut rng = SeededRng::with_stream(*seed, k as u64);
                let mut dir: Vec<f64> = (0..dim).map(|_| rng.gaussian()).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 {
                    dir[0] = 1.0;
                }
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                let kk = (k + 1) as f64;
                let mag = scale / (kk * kk) / norm;
                Some(Vector::from_raw(dir.into_iter().map(|v| v * mag).collect()))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ErrorSchedule::Zero)
    }
}

/// Default cap accepted for the partial sums of nominally-summable series.
pub const DEFAULT_SUMMABILITY_CAP: f64 = 1e6;

/// The full parameter bundle for a run: step sizes `γ_k`, relaxation `λ_k`,
/// metric drift allowance `η_k`, metrics `U_k`, and the two error streams.
#[derive(Debug, Clone)]
pub struct Schedules {
    pub gamma: ScalarSchedule,
    pub lambda: RelaxSchedule,
    pub eta: ScalarSchedule,
    pub metrics: MetricSchedule,
    pub a_err: ErrorSchedule,
    pub b_err: ErrorSchedule,
    /// Bound accepted for partial sums of the declared-summable series.
    pub summability_cap: f64,
}

impl Schedules {
    /// Constant `γ`, `λ`, and metric; zero drift and zero errors.
    pub fn constant(gamma: f64, lambda: f64, metric: Metric) -> Schedules {
        Schedules {
            gamma: ScalarSchedule::Constant(gamma),
            lambda: RelaxSchedule::Fixed(ScalarSchedule::Constant(lambda)),
            eta: ScalarSchedule::Constant(0.0),
            metrics: MetricSchedule::Constant(metric),
            a_err: ErrorSchedule::Zero,
            b_err: ErrorSchedule::Zero,
            summability_cap: DEFAULT_SUMMABILITY_CAP,
        }
    }
}

/// Which theorem's parameter conditions to validate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremMode {
    /// Uniform relaxation gap: `λ̲ ≤ λ_k ≤ 1/α_k − τ`.
    Thm31,
    /// Divergent-sum relaxation condition plus variation-summability.
    Thm32,
}

/// One validated condition.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub passed: bool,
    /// True when a finite horizon can only witness, not prove, the condition.
    pub heuristic: bool,
    pub detail: String,
}

/// Per-condition outcome of [`validate_schedules`] over a finite horizon.
#[derive(Debug, Clone, Serialize)]
pub struct ValidityReport {
    pub mode: TheoremMode,
    pub horizon: usize,
    pub checks: Vec<ConditionCheck>,
}

impl ValidityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// A sequence is flagged "vanishing" when its smallest tail-decile value
/// drops below this fraction of its first-decile maximum — the finite-horizon
/// stand-in for "no uniform positive lower bound".
pub const VANISHING_RATIO_THRESHOLD: f64 = 0.05;

/// A partial sum is flagged "divergent-looking" when its second half
/// contributes at least this fraction of the total.
pub const DIVERGENT_TAIL_FRACTION: f64 = 0.05;

/// Relative slack admitted on the relaxation upper bound. The reference
/// experiments run `λ_k` exactly at `1/α_k`; floating-point evaluation of the
/// bound makes a strict open-interval test a coin flip there, so the closed
/// bound (within rounding) is accepted and the uniform-gap condition reports
/// the boundary case separately.
pub const RELAXATION_BOUND_SLACK: f64 = 1e-12;

fn vanishing_ratio(vals: &[f64]) -> f64 {
    let d = (vals.len() / 10).max(1);
    let head_max = vals[..d].iter().fold(f64::MIN, |m, v| m.max(*v));
    let tail_min = vals[vals.len() - d..].iter().fold(f64::MAX, |m, v| m.min(*v));
    if head_max <= 0.0 {
        return 1.0;
    }
    tail_min / head_max
}

/// `1/α_k = (4β − γ‖U‖)/(2β)` without range checks, stable for `β = +∞`.
pub(crate) fn relaxation_upper_bound_unchecked(beta: f64, gamma: f64, norm_u: f64) -> f64 {
    2.0 - gamma * norm_u / (2.0 * beta)
}

/// Checks the realized parameter streams against the conditions of the
/// selected convergence theorem over `0..horizon`. Metric ordering is exact
/// for scaled-identity and diagonal metrics and goes through the minimum
/// eigenvalue of the difference for dense ones; summability and divergence
/// conditions are finite-horizon heuristics and labeled as such.
pub fn validate_schedules(
    s: &Schedules,
    beta: f64,
    horizon: usize,
    mode: TheoremMode,
) -> ValidityReport {
    assert!(horizon >= 1, "validation horizon must be at least 1");
    let dim = s.metrics.dim();
    let cap = s.summability_cap;

    let mut gammas = Vec::with_capacity(horizon);
    let mut lambdas = Vec::with_capacity(horizon);
    let mut etas = Vec::with_capacity(horizon);
    let mut norms = Vec::with_capacity(horizon);
    let mut bounds = Vec::with_capacity(horizon);
    for k in 0..horizon {
        let u = s.metrics.at(k);
        let gamma = s.gamma.at(k);
        let ub = relaxation_upper_bound_unchecked(beta, gamma, u.norm());
        gammas.push(gamma);
        norms.push(u.norm());
        bounds.push(ub);
        lambdas.push(s.lambda.at(k, ub));
        etas.push(s.eta.at(k));
    }
    let mu = norms.iter().fold(0.0f64, |m, v| m.max(*v));

    let mut checks = Vec::new();

    // η_k ≥ 0 and summable.
    let eta_nonneg = etas.iter().all(|e| *e >= 0.0);
    checks.push(ConditionCheck {
        name: "eta_nonnegative",
        passed: eta_nonneg,
        heuristic: false,
        detail: format!("min eta = {:e}", etas.iter().fold(f64::MAX, |m, v| m.min(*v))),
    });
    let eta_sum: f64 = etas.iter().sum();
    checks.push(ConditionCheck {
        name: "eta_summable",
        passed: eta_sum <= cap,
        heuristic: true,
        detail: format!("partial sum over horizon = {eta_sum:e} (cap {cap:e})"),
    });

    // (1 + η_k) U_{k+1} ⪰ U_k
    let mut ordering_ok = true;
    let mut worst_margin = f64::MAX;
    for k in 0..horizon {
        let u_k = s.metrics.at(k);
        let u_next = s.metrics.at(k + 1);
        let margin = dominance_margin(&u_next, 1.0 + etas[k], &u_k);
        worst_margin = worst_margin.min(margin);
        if margin < -1e-10 * mu.max(1.0) {
            ordering_ok = false;
        }
    }
    checks.push(ConditionCheck {
        name: "metric_ordering",
        passed: ordering_ok,
        heuristic: false,
        detail: format!("worst min-eig margin of (1+eta)U_next - U = {worst_margin:e}"),
    });

    checks.push(ConditionCheck {
        name: "metric_norms_bounded",
        passed: mu.is_finite(),
        heuristic: false,
        detail: format!("sup ‖U_k‖ over horizon = {mu:e}"),
    });

    // per-iteration step range 0 < γ_k < 2β/‖U_k‖
    let mut step_ok = true;
    let mut min_step_margin = f64::MAX;
    for k in 0..horizon {
        let limit = 2.0 * beta / norms[k];
        min_step_margin = min_step_margin.min(limit - gammas[k]);
        if !(gammas[k] > 0.0 && gammas[k] < limit) {
            step_ok = false;
        }
    }
    checks.push(ConditionCheck {
        name: "step_size_range",
        passed: step_ok,
        heuristic: false,
        detail: format!("min (2β/‖U_k‖ − γ_k) = {min_step_margin:e}"),
    });

    // 0 < γ̲ and sup γ_k·μ < 2β (so some ε > 0 exists)
    let gamma_min = gammas.iter().fold(f64::MAX, |m, v| m.min(*v));
    let sup_gamma_mu = gammas.iter().map(|g| g * mu).fold(0.0f64, f64::max);
    checks.push(ConditionCheck {
        name: "step_size_window",
        passed: gamma_min > 0.0 && sup_gamma_mu < 2.0 * beta,
        heuristic: false,
        detail: format!("min γ = {gamma_min:e}, sup γ·μ = {sup_gamma_mu:e} vs 2β = {:e}", 2.0 * beta),
    });

    // relaxation within the closed bound (boundary reported by the gap check)
    let mut relax_ok = true;
    let mut gaps = Vec::with_capacity(horizon);
    for k in 0..horizon {
        gaps.push(bounds[k] - lambdas[k]);
        if !(lambdas[k] > 0.0 && lambdas[k] <= bounds[k] * (1.0 + RELAXATION_BOUND_SLACK)) {
            relax_ok = false;
        }
    }
    checks.push(ConditionCheck {
        name: "relaxation_range",
        passed: relax_ok,
        heuristic: false,
        detail: format!(
            "min λ = {:e}, min (1/α_k − λ_k) = {:e}",
            lambdas.iter().fold(f64::MAX, |m, v| m.min(*v)),
            gaps.iter().fold(f64::MAX, |m, v| m.min(*v)),
        ),
    });

    match mode {
        TheoremMode::Thm31 => {
            let min_lambda = lambdas.iter().fold(f64::MAX, |m, v| m.min(*v));
            let lambda_ratio = vanishing_ratio(&lambdas);
            checks.push(ConditionCheck {
                name: "relaxation_lower",
                passed: min_lambda > 0.0 && lambda_ratio >= VANISHING_RATIO_THRESHOLD,
                heuristic: true,
                detail: format!("min λ = {min_lambda:e}, tail/head ratio = {lambda_ratio:.3}"),
            });

            let min_gap = gaps.iter().fold(f64::MAX, |m, v| m.min(*v));
            let gap_ratio = vanishing_ratio(&gaps);
            checks.push(ConditionCheck {
                name: "relaxation_uniform_gap",
                passed: min_gap > 0.0 && gap_ratio >= VANISHING_RATIO_THRESHOLD,
                heuristic: true,
                detail: format!("min gap = {min_gap:e}, tail/head ratio = {gap_ratio:.3}"),
            });
        }
        TheoremMode::Thm32 => {
            let terms: Vec<f64> = lambdas
                .iter()
                .zip(&gaps)
                .map(|(l, g)| l * g)
                .collect();
            let total: f64 = terms.iter().sum();
            let tail: f64 = terms[terms.len() / 2..].iter().sum();
            let frac = if total > 0.0 { tail / total } else { 0.0 };
            checks.push(ConditionCheck {
                name: "relaxation_sum_divergent",
                passed: total > 0.0 && frac >= DIVERGENT_TAIL_FRACTION,
                heuristic: true,
                detail: format!(
                    "partial sum of λ(1/α − λ) = {total:e}, second-half fraction = {frac:.3}"
                ),
            });

            let gamma_var: f64 = (0..horizon)
                .map(|k| (s.gamma.at(k + 1) - gammas[k]).abs())
                .sum();
            checks.push(ConditionCheck {
                name: "step_variation_summable",
                passed: gamma_var <= cap,
                heuristic: true,
                detail: format!("Σ|γ_next − γ| over horizon = {gamma_var:e} (cap {cap:e})"),
            });

            let weighted_var: f64 = (0..horizon)
                .map(|k| {
                    let next = s.gamma.at(k + 1) * s.metrics.at(k + 1).norm();
                    (next - gammas[k] * norms[k]).abs()
                })
                .sum();
            checks.push(ConditionCheck {
                name: "weighted_step_variation_summable",
                passed: weighted_var <= cap,
                heuristic: true,
                detail: format!("Σ|γ‖U‖ variation| over horizon = {weighted_var:e} (cap {cap:e})"),
            });

            // Pointwise U_k⁻¹ convergence, witnessed on a seeded probe set.
            let mut rng = SeededRng::new(0xFB);
            let mut worst = 0.0f64;
            for _probe in 0..4 {
                let mut p: Vec<f64> = (0..dim).map(|_| rng.gaussian()).collect();
                let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for v in p.iter_mut() {
                        *v /= norm;
                    }
                } else {
                    p[0] = 1.0;
                }
                let p = Vector::from_raw(p);
                let mut sum = 0.0;
                for k in 0..horizon {
                    let a = s.metrics.at(k).inv_apply(&p).expect("probe dim");
                    let b = s.metrics.at(k + 1).inv_apply(&p).expect("probe dim");
                    sum += (&a - &b).norm();
                }
                worst = worst.max(sum);
            }
            checks.push(ConditionCheck {
                name: "metric_inverse_variation_summable",
                passed: worst <= cap,
                heuristic: true,
                detail: format!("max over 4 probes of Σ‖(U_k⁻¹−U_next⁻¹)p‖ = {worst:e} (cap {cap:e})"),
            });
        }
    }

    // declared-summable error weights
    let (mut sum_a, mut sum_b) = (0.0f64, 0.0f64);
    for k in 0..horizon {
        if let Some(a) = s.a_err.at(k, dim) {
            sum_a += lambdas[k] * a.norm();
        }
        if let Some(b) = s.b_err.at(k, dim) {
            sum_b += lambdas[k] * b.norm();
        }
    }
    checks.push(ConditionCheck {
        name: "error_sums_bounded",
        passed: sum_a <= cap && sum_b <= cap,
        heuristic: true,
        detail: format!("Σλ‖a‖ = {sum_a:e}, Σλ‖b‖ = {sum_b:e} (cap {cap:e})"),
    });

    ValidityReport {
        mode,
        horizon,
        checks,
    }
}

/// Minimum-eigenvalue margin of `scale·a − b`; exact (componentwise) for
/// scaled/diagonal pairs, Jacobi eigenvalues otherwise.
fn dominance_margin(a: &Metric, scale: f64, b: &Metric) -> f64 {
    use crate::linops::MetricKind::*;
    match (a.kind(), b.kind()) {
        (ScaledIdentity(ca), ScaledIdentity(cb)) => scale * ca - cb,
        (ScaledIdentity(ca), Diagonal(db)) => db
            .iter()
            .map(|d| scale * ca - d)
            .fold(f64::MAX, f64::min),
        (Diagonal(da), ScaledIdentity(cb)) => da
            .iter()
            .map(|d| scale * d - cb)
            .fold(f64::MAX, f64::min),
        (Diagonal(da), Diagonal(db)) => da
            .iter()
            .zip(db)
            .map(|(x, y)| scale * x - y)
            .fold(f64::MAX, f64::min),
        _ => {
            let n = a.dim();
            let da = a.to_dense_rows();
            let db = b.to_dense_rows();
            let diff: Vec<f64> = da
                .iter()
                .zip(&db)
                .map(|(x, y)| scale * x - y)
                .collect();
            crate::linops::symmetric_eigenvalues(n, &diff)[0]
        }
    }
}
