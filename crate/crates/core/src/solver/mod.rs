//! The relaxed, inexact, variable-metric forward-backward iteration
//!
//! ```text
//! y_k     = x_k − γ_k U_k (B x_k + b_k)
//! x_{k+1} = x_k + λ_k (J_{γ_k U_k A}(y_k) + a_k − x_k)
//! ```
//!
//! with per-iteration admissibility checks (`γ_k < 2β/‖U_k‖`,
//! `λ_k ≤ 1/α_k` where `α_k = 2β/(4β − γ_k‖U_k‖)`), two stopping rules, and a
//! per-iterate diagnostic trace.

mod schedules;

pub use schedules::{
    validate_schedules, ConditionCheck, ErrorSchedule, MetricSchedule, RelaxSchedule,
    ScalarSchedule, Schedules, TheoremMode, ValidityReport, DEFAULT_SUMMABILITY_CAP,
    DIVERGENT_TAIL_FRACTION, RELAXATION_BOUND_SLACK, VANISHING_RATIO_THRESHOLD,
};

pub(crate) use schedules::relaxation_upper_bound_unchecked;

use serde::{Deserialize, Serialize};

use crate::linops::{Metric, Vector};
use crate::operators::{Cocoercive, Proximable};
use crate::{Error, Result};

/// Upper bound on the relaxation parameter: `1/α_k = (4β − γ‖U‖)/(2β)`,
/// which lies in `(1, 2)` for admissible steps.
pub fn relaxation_upper_bound(beta: f64, gamma: f64, norm_u: f64) -> Result<f64> {
    if !(beta > 0.0) || !(norm_u > 0.0) {
        return Err(Error::invalid("beta and ‖U‖ must be positive"));
    }
    let limit = 2.0 * beta / norm_u;
    if !(gamma > 0.0 && gamma < limit) {
        return Err(Error::StepSizeOutOfRange { gamma, limit });
    }
    Ok(relaxation_upper_bound_unchecked(beta, gamma, norm_u))
}

/// When to stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopMode {
    /// `‖x_{k+1} − x_k‖ / ‖x_k‖ ≤ ε` (absolute change when `‖x_k‖ = 0`).
    RelativeChange,
    /// `‖x_k − J_{γ_k U_k A}(x_k − γ_k U_k B x_k)‖ ≤ ε`.
    FixedPointResidual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub epsilon: f64,
    pub max_iter: usize,
    pub mode: StopMode,
}

impl StoppingRule {
    pub fn new(epsilon: f64, max_iter: usize, mode: StopMode) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon {epsilon} must be > 0")));
        }
        if max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(StoppingRule {
            epsilon,
            max_iter,
            mode,
        })
    }
}

/// Relative change with the zero-denominator convention: when `‖x_prev‖ = 0`
/// the absolute change is compared instead.
pub fn relative_change(x_next: &Vector, x_prev: &Vector) -> f64 {
    let d = (x_next - x_prev).norm();
    let n = x_prev.norm();
    if n == 0.0 {
        d
    } else {
        d / n
    }
}

/// Evaluates the stopping rule on one transition.
pub fn stopping_check(rule: &StoppingRule, x_prev: &Vector, x_next: &Vector, residual: f64) -> bool {
    match rule.mode {
        StopMode::RelativeChange => relative_change(x_next, x_prev) <= rule.epsilon,
        StopMode::FixedPointResidual => residual <= rule.epsilon,
    }
}

/// One relaxed inexact forward-backward step
/// `x + λ(J_{γUA}(x − γU(Bx + b)) + a − x)`.
pub fn fb_step(
    p: &Proximable,
    bop: &Cocoercive,
    u: &Metric,
    gamma: f64,
    lambda: f64,
    a_err: &Vector,
    b_err: &Vector,
    x: &Vector,
) -> Result<Vector> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda {lambda} must be > 0")));
    }
    let bx = bop.apply(x)?;
    let y = x.axpy(-gamma, &u.apply(&(&bx + b_err))?);
    let j = p.resolvent(gamma, u, &y)?;
    Ok(x.axpy(lambda, &(&(&j + a_err) - x)))
}

/// How iterate snapshots are kept in the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnapshotPolicy {
    /// Snapshots when the dimension is at most [`AUTO_SNAPSHOT_MAX_DIM`].
    #[default]
    Auto,
    Always,
    Never,
}

/// Dimension cutoff for [`SnapshotPolicy::Auto`].
pub const AUTO_SNAPSHOT_MAX_DIM: usize = 256;

/// Run options; `strict` aborts on the first per-iteration parameter
/// violation, permissive records it and continues.
#[derive(Default, Clone, Copy)]
pub struct SolveOptions<'a> {
    /// When set, each record carries `‖x_k − x*‖_{U_k⁻¹}`.
    pub reference: Option<&'a Vector>,
    /// When set, each record carries `objective(x_k)`.
    pub objective: Option<&'a dyn Fn(&Vector) -> f64>,
    pub permissive: bool,
    pub snapshots: SnapshotPolicy,
}

/// Diagnostics for one iterate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterRecord {
    pub k: usize,
    /// `‖x_k − J_{γ_k U_k A}(x_k − γ_k U_k B x_k)‖`, evaluated error-free.
    pub residual: f64,
    /// Relative change of the transition into `x_k`; `None` on the first row.
    pub rel_change: Option<f64>,
    pub gamma: f64,
    pub lambda: f64,
    /// `1/α_k`, the relaxation upper bound at this iteration.
    pub relax_bound: f64,
    pub dist_to_reference: Option<f64>,
    pub objective: Option<f64>,
    pub x: Option<Vector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Converged,
    MaxIterReached,
    ParameterViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterViolationNote {
    pub k: usize,
    pub message: String,
}

/// Full record of a run: one [`IterRecord`] per iterate (including `x_0`, so
/// `records.len() == iterations() + 1`), the terminal status, and the final
/// iterate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub records: Vec<IterRecord>,
    pub status: RunStatus,
    pub final_x: Vector,
    pub violations: Vec<ParameterViolationNote>,
}

impl RunTrace {
    /// Number of forward-backward steps executed.
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    pub fn final_record(&self) -> &IterRecord {
        self.records.last().expect("trace always has the x0 row")
    }
}

/// Runs the iteration until the stopping rule fires, the iteration budget is
/// exhausted, or (in strict mode) a parameter bound fails. Non-finite
/// iterates abort with [`Error::NonFiniteIterate`].
pub fn solve(
    p: &Proximable,
    bop: &Cocoercive,
    s: &Schedules,
    stop: &StoppingRule,
    x0: &Vector,
    opts: &SolveOptions,
) -> Result<RunTrace> {
    if !(stop.epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be > 0"));
    }
    if stop.max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    if !x0.is_finite() {
        return Err(Error::invalid("x0 must be finite"));
    }
    let beta = bop.beta();
    let dim = x0.dim();
    let snapshot = match opts.snapshots {
        SnapshotPolicy::Auto => dim <= AUTO_SNAPSHOT_MAX_DIM,
        SnapshotPolicy::Always => true,
        SnapshotPolicy::Never => false,
    };

    let mut x = x0.clone();
    let mut prev: Option<Vector> = None;
    let mut records: Vec<IterRecord> = Vec::new();
    let mut violations: Vec<ParameterViolationNote> = Vec::new();
    let status;

    let mut k = 0usize;
    loop {
        let u = s.metrics.at(k);
        let gamma = s.gamma.at(k);
        let relax_bound = relaxation_upper_bound_unchecked(beta, gamma, u.norm());
        let lambda = s.lambda.at(k, relax_bound);

        // Error-free diagnostics at x_k; the resolvent output is reused for
        // the step whenever the forward error stream is zero.
        let bx = bop.apply(&x)?;
        let forward = x.axpy(-gamma, &u.apply(&bx)?);
        let t = p.resolvent(gamma, &u, &forward)?;
        let residual = (&x - &t).norm();
        let rel_change = prev.as_ref().map(|xp| relative_change(&x, xp));

        records.push(IterRecord {
            k,
            residual,
            rel_change,
            gamma,
            lambda,
            relax_bound,
            dist_to_reference: match opts.reference {
                Some(r) => Some(u.inv_weighted_norm(&(&x - r))?),
                None => None,
            },
            objective: opts.objective.map(|f| f(&x)),
            x: snapshot.then(|| x.clone()),
        });

        let fired = match stop.mode {
            StopMode::FixedPointResidual => residual <= stop.epsilon,
            StopMode::RelativeChange => rel_change.is_some_and(|r| r <= stop.epsilon),
        };
        if fired {
            status = RunStatus::Converged;
            break;
        }
        if k == stop.max_iter {
            status = RunStatus::MaxIterReached;
            break;
        }

        let gamma_limit = 2.0 * beta / u.norm();
        let mut violated = false;
        if !(gamma > 0.0 && gamma < gamma_limit) {
            violated = true;
            violations.push(ParameterViolationNote {
                k,
                message: format!("gamma {gamma} outside (0, {gamma_limit})"),
            });
        }
        if !(lambda > 0.0 && lambda <= relax_bound * (1.0 + RELAXATION_BOUND_SLACK)) {
            violated = true;
            violations.push(ParameterViolationNote {
                k,
                message: format!("lambda {lambda} outside (0, {relax_bound}]"),
            });
        }
        if violated && !opts.permissive {
            status = RunStatus::ParameterViolation;
            break;
        }

        let a_k = s.a_err.at(k, dim);
        let b_k = s.b_err.at(k, dim);
        let j = match &b_k {
            None => t,
            Some(be) => {
                let y = x.axpy(-gamma, &u.apply(&(&bx + be))?);
                p.resolvent(gamma, &u, &y)?
            }
        };
        let target = match &a_k {
            None => j,
            Some(ae) => &j + ae,
        };
        let x_next = x.axpy(lambda, &(&target - &x));
        if !x_next.is_finite() {
            return Err(Error::NonFiniteIterate { k });
        }
        prev = Some(std::mem::replace(&mut x, x_next));
        k += 1;
    }

    Ok(RunTrace {
        records,
        status,
        final_x: x,
        violations,
    })
}
