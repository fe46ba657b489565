//! Experiment harness around the fbsplit solver: grid sweeps over step-size
//! multiples and relaxation parameters on a fixed seeded instance, per-run
//! convergence traces, result tables, and plot data.
//!
//! All output formats are byte-stable given identical inputs, except the
//! `wall_ms` column, which reports measured time.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use fbsplit_core::linops::{Metric, Vector};
use fbsplit_core::problems::{build_lasso, LassoInstance};
use fbsplit_core::rng::RNG_ID;
use fbsplit_core::solver::{
    solve, ErrorSchedule, MetricSchedule, RelaxSchedule, RunStatus, RunTrace, ScalarSchedule,
    Schedules, SnapshotPolicy, SolveOptions, StopMode, StoppingRule, TheoremMode,
    DEFAULT_SUMMABILITY_CAP,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] fbsplit_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("bad configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, BenchError>;

/// Schema version stamped into run metadata.
pub const METADATA_SCHEMA: u32 = 1;

/// Iteration budget default; generous headroom over the slowest admissible
/// grid corner at tight tolerances.
pub const DEFAULT_MAX_ITER: usize = 200_000;

/// Problem block of a sweep configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    /// Overrides the generator's default radius `t = ‖x_true‖₁`.
    pub t: Option<f64>,
}

/// Metric used by every cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MetricSpec {
    Identity,
    Scaled(f64),
    /// A fixed positive diagonal with `‖U‖ = 0.9`, scaled by
    /// `1 + 0.05/(k+1)²` so the metric genuinely varies while staying inside
    /// every admissibility bound of the 1.9/L grid row.
    DiagonalRamp,
}

impl MetricSpec {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "identity" {
            return Ok(MetricSpec::Identity);
        }
        if s == "diag-ramp" {
            return Ok(MetricSpec::DiagonalRamp);
        }
        if let Some(c) = s.strip_prefix("scaled:") {
            let c: f64 = c
                .parse()
                .map_err(|_| BenchError::Config(format!("bad metric scale in {s:?}")))?;
            if !(c > 0.0) {
                return Err(BenchError::Config("metric scale must be > 0".into()));
            }
            return Ok(MetricSpec::Scaled(c));
        }
        Err(BenchError::Config(format!(
            "unknown metric spec {s:?} (expected identity | scaled:<c> | diag-ramp)"
        )))
    }

    /// Metric stream plus the drift allowance `η_k` matching it.
    pub fn schedules(&self, n: usize) -> (MetricSchedule, ScalarSchedule) {
        match self {
            MetricSpec::Identity => (
                MetricSchedule::Constant(Metric::identity(n)),
                ScalarSchedule::Constant(0.0),
            ),
            MetricSpec::Scaled(c) => (
                MetricSchedule::Constant(
                    Metric::scaled_identity(n, *c).expect("validated scale"),
                ),
                ScalarSchedule::Constant(0.0),
            ),
            MetricSpec::DiagonalRamp => {
                let base = Metric::diagonal(Vector::from_fn(n, |i| {
                    0.45 + 0.45 * (i + 1) as f64 / n as f64
                }))
                .expect("positive diagonal");
                (
                    MetricSchedule::ScaledDecay { base, excess: 0.05 },
                    ScalarSchedule::InverseSquareDecay { scale: 0.1 },
                )
            }
        }
    }
}

/// Full sweep configuration: the grid is the cartesian product of
/// `gamma_mults × lambdas × epsilons`, every cell on the same instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    /// Step sizes as multiples of `1/L` (`γ = mult·β`).
    pub gamma_mults: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub metric: MetricSpec,
    pub mode: TheoremMode,
    pub stop_mode: StopMode,
    pub max_iter: usize,
    pub permissive: bool,
}

impl ExperimentConfig {
    pub fn desk_defaults(seed: u64) -> Self {
        ExperimentConfig {
            problem: ProblemSpec {
                m: 24,
                n: 100,
                k: 4,
                seed,
                t: None,
            },
            gamma_mults: vec![0.5, 1.0, 1.9],
            lambdas: vec![0.2, 0.4, 1.0, 1.5],
            epsilons: vec![1e-6],
            metric: MetricSpec::Identity,
            mode: TheoremMode::Thm31,
            stop_mode: StopMode::RelativeChange,
            max_iter: DEFAULT_MAX_ITER,
            permissive: false,
        }
    }
}

/// One sweep cell's outcome. `err = ‖x̂ − x_true‖₂`, `obj = ½‖Ax̂ − b‖²`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub gamma_mult: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub iter: usize,
    pub err: f64,
    pub obj: f64,
    pub wall_ms: u64,
    pub status: String,
}

pub fn status_name(status: RunStatus) -> &'static str {
    match status {
        RunStatus::Converged => "converged",
        RunStatus::MaxIterReached => "max_iter",
        RunStatus::ParameterViolation => "parameter_violation",
    }
}

/// Builds the instance a config describes (honoring the `t` override).
pub fn instance_from_spec(spec: &ProblemSpec) -> Result<LassoInstance> {
    let mut inst =
        fbsplit_core::problems::generate_lasso_instance(spec.m, spec.n, spec.k, spec.seed)?;
    if let Some(t) = spec.t {
        if !(t > 0.0 && t.is_finite()) {
            return Err(BenchError::Config(format!("radius t={t} must be > 0")));
        }
        inst.t = t;
    }
    Ok(inst)
}

/// Runs one grid cell and returns the row plus the full trace.
pub fn run_cell(
    inst: &LassoInstance,
    metric: MetricSpec,
    gamma_mult: f64,
    lambda: f64,
    epsilon: f64,
    stop_mode: StopMode,
    max_iter: usize,
    permissive: bool,
) -> Result<(ResultRow, Option<RunTrace>)> {
    let (prox, grad, beta) = build_lasso(inst)?;
    let (metrics, eta) = metric.schedules(inst.n);
    let schedules = Schedules {
        gamma: ScalarSchedule::Constant(gamma_mult * beta),
        lambda: RelaxSchedule::Fixed(ScalarSchedule::Constant(lambda)),
        eta,
        metrics,
        a_err: ErrorSchedule::Zero,
        b_err: ErrorSchedule::Zero,
        summability_cap: DEFAULT_SUMMABILITY_CAP,
    };
    let stop = StoppingRule::new(epsilon, max_iter, stop_mode)?;
    let objective = |x: &Vector| {
        grad.objective_value(x)
            .expect("dimensions fixed by the instance")
            .expect("least-squares objective")
    };
    let opts = SolveOptions {
        reference: None,
        objective: Some(&objective),
        permissive,
        snapshots: SnapshotPolicy::Never,
    };
    let start = Instant::now();
    let outcome = solve(&prox, &grad, &schedules, &stop, &Vector::zeros(inst.n), &opts);
    let wall_ms = start.elapsed().as_millis() as u64;
    match outcome {
        Ok(trace) => {
            let err = (&trace.final_x - &inst.x_true).norm();
            let obj = objective(&trace.final_x);
            let row = ResultRow {
                gamma_mult,
                lambda,
                epsilon,
                iter: trace.iterations(),
                err,
                obj,
                wall_ms,
                status: status_name(trace.status).to_string(),
            };
            Ok((row, Some(trace)))
        }
        Err(fbsplit_core::Error::NonFiniteIterate { k }) => Ok((
            ResultRow {
                gamma_mult,
                lambda,
                epsilon,
                iter: k,
                err: f64::NAN,
                obj: f64::NAN,
                wall_ms,
                status: "non_finite".to_string(),
            },
            None,
        )),
        Err(e) => Err(e.into()),
    }
}

/// Stable cell ordering: γ ascending, then λ, then ε.
fn sorted_grid(cfg: &ExperimentConfig) -> Vec<(f64, f64, f64)> {
    let mut gammas = cfg.gamma_mults.clone();
    let mut lambdas = cfg.lambdas.clone();
    let mut epsilons = cfg.epsilons.clone();
    gammas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    epsilons.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut grid = Vec::new();
    for &g in &gammas {
        for &l in &lambdas {
            for &e in &epsilons {
                grid.push((g, l, e));
            }
        }
    }
    grid
}

/// Runs the whole grid (cells in parallel, result order fixed by the sorted
/// grid). When `out_dir` is given, writes `results.csv`, `meta.json`, and one
/// `trace_g{γ}_l{λ}_e{ε}.csv` per cell.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    inst: &LassoInstance,
    out_dir: Option<&Path>,
) -> Result<Vec<ResultRow>> {
    if cfg.gamma_mults.is_empty() || cfg.lambdas.is_empty() || cfg.epsilons.is_empty() {
        return Err(BenchError::Config("empty parameter grid".into()));
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
    }
    let grid = sorted_grid(cfg);
    let cells: Vec<Result<ResultRow>> = grid
        .par_iter()
        .map(|&(g, l, e)| {
            let (row, trace) = run_cell(
                inst,
                cfg.metric,
                g,
                l,
                e,
                cfg.stop_mode,
                cfg.max_iter,
                cfg.permissive,
            )?;
            if let (Some(dir), Some(trace)) = (out_dir, trace.as_ref()) {
                let name = format!("trace_g{g}_l{l}_e{e:e}.csv");
                fs::write(dir.join(name), trace_csv(trace))?;
            }
            Ok(row)
        })
        .collect();
    let rows: Vec<ResultRow> = cells.into_iter().collect::<Result<_>>()?;
    if let Some(dir) = out_dir {
        fs::write(dir.join("results.csv"), results_csv(&rows))?;
        fs::write(dir.join("meta.json"), metadata_json(cfg, inst)?)?;
    }
    Ok(rows)
}

/// Results CSV, columns exactly:
/// `gamma_mult,lambda,epsilon,iter,err,obj,wall_ms,status`.
pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from("gamma_mult,lambda,epsilon,iter,err,obj,wall_ms,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:e},{},{:e},{:e},{},{}\n",
            r.gamma_mult, r.lambda, r.epsilon, r.iter, r.err, r.obj, r.wall_ms, r.status
        ));
    }
    out
}

/// Parses a results CSV produced by [`results_csv`].
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(BenchError::Config(format!(
                "line {} of results CSV has {} fields, expected 8",
                idx + 1,
                fields.len()
            )));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| BenchError::Config(format!("bad float {s:?} in results CSV")))
        };
        rows.push(ResultRow {
            gamma_mult: parse_f(fields[0])?,
            lambda: parse_f(fields[1])?,
            epsilon: parse_f(fields[2])?,
            iter: fields[3]
                .parse()
                .map_err(|_| BenchError::Config(format!("bad iter {:?}", fields[3])))?,
            err: parse_f(fields[4])?,
            obj: parse_f(fields[5])?,
            wall_ms: fields[6]
                .parse()
                .map_err(|_| BenchError::Config(format!("bad wall_ms {:?}", fields[6])))?,
            status: fields[7].to_string(),
        });
    }
    Ok(rows)
}

/// Formatted text table plus the CSV, both in the deterministic order
/// (γ ascending, then λ, then ε).
pub fn report_table(rows: &[ResultRow]) -> (String, String) {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (a.gamma_mult, a.lambda, a.epsilon)
            .partial_cmp(&(b.gamma_mult, b.lambda, b.epsilon))
            .unwrap()
    });
    let mut text = format!(
        "{:>10} {:>8} {:>9} {:>8} {:>12} {:>12} {:>8} {:>20}\n",
        "gamma_mult", "lambda", "epsilon", "iter", "err", "obj", "wall_ms", "status"
    );
    for r in &sorted {
        text.push_str(&format!(
            "{:>10} {:>8} {:>9} {:>8} {:>12} {:>12} {:>8} {:>20}\n",
            r.gamma_mult,
            r.lambda,
            format!("{:e}", r.epsilon),
            r.iter,
            format!("{:.4e}", r.err),
            format!("{:.4e}", r.obj),
            r.wall_ms,
            r.status
        ));
    }
    let owned: Vec<ResultRow> = sorted.into_iter().cloned().collect();
    (text, results_csv(&owned))
}

/// Per-iteration trace CSV, columns `k,obj,residual,rel_change`; optional
/// fields are left empty when absent.
pub fn trace_csv(trace: &RunTrace) -> String {
    let mut out = String::from("k,obj,residual,rel_change\n");
    for r in &trace.records {
        let obj = r.objective.map(|v| format!("{v:e}")).unwrap_or_default();
        let rel = r.rel_change.map(|v| format!("{v:e}")).unwrap_or_default();
        out.push_str(&format!("{},{},{:e},{}\n", r.k, obj, r.residual, rel));
    }
    out
}

/// Two-column plot data `index,true,recovered` for signal-overlay figures.
pub fn emit_signal_overlay(x_true: &Vector, x_hat: &Vector, path: &Path) -> Result<()> {
    if x_true.dim() != x_hat.dim() {
        return Err(BenchError::Config(format!(
            "overlay dimension mismatch: {} vs {}",
            x_true.dim(),
            x_hat.dim()
        )));
    }
    let mut out = String::from("index,true,recovered\n");
    for i in 0..x_true.dim() {
        out.push_str(&format!("{},{:e},{:e}\n", i, x_true[i], x_hat[i]));
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Serialize)]
struct InstanceSummary {
    m: usize,
    n: usize,
    k: usize,
    seed: u64,
    t: f64,
}

#[derive(Serialize)]
struct SweepMetadata<'a> {
    schema: u32,
    config: &'a ExperimentConfig,
    rng_id: &'static str,
    library_version: &'static str,
    err_norm: &'static str,
    instance: InstanceSummary,
}

/// Machine-readable sweep metadata (`schema: 1`): config echo, RNG id,
/// library version, and the error-norm convention.
pub fn metadata_json(cfg: &ExperimentConfig, inst: &LassoInstance) -> Result<String> {
    let meta = SweepMetadata {
        schema: METADATA_SCHEMA,
        config: cfg,
        rng_id: RNG_ID,
        library_version: env!("CARGO_PKG_VERSION"),
        err_norm: "euclidean",
        instance: InstanceSummary {
            m: inst.m,
            n: inst.n,
            k: inst.k,
            seed: inst.seed,
            t: inst.t,
        },
    };
    Ok(format!("{}\n", serde_json::to_string_pretty(&meta)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(g: f64, l: f64, status: &str) -> ResultRow {
        ResultRow {
            gamma_mult: g,
            lambda: l,
            epsilon: 1e-6,
            iter: 10,
            err: 0.5,
            obj: 0.25,
            wall_ms: 3,
            status: status.to_string(),
        }
    }

    #[test]
    fn empty_rows_give_header_only_csv() {
        let (text, csv) = report_table(&[]);
        assert_eq!(csv, "gamma_mult,lambda,epsilon,iter,err,obj,wall_ms,status\n");
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn rows_are_ordered_and_kept() {
        let rows = vec![
            row(1.9, 0.2, "converged"),
            row(0.5, 1.5, "parameter_violation"),
            row(0.5, 0.2, "max_iter"),
        ];
        let (text, csv) = report_table(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0.5,0.2,"));
        assert!(lines[2].starts_with("0.5,1.5,"));
        assert!(lines[3].starts_with("1.9,0.2,"));
        // no row dropped, status column populated
        assert!(text.contains("parameter_violation"));
        assert!(text.contains("max_iter"));
        assert!(text.contains("converged"));
    }

    #[test]
    fn results_csv_roundtrip() {
        let rows = vec![row(0.5, 0.2, "converged"), row(1.0, 1.5, "max_iter")];
        let parsed = parse_results_csv(&results_csv(&rows)).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].gamma_mult, 0.5);
        assert_eq!(parsed[1].status, "max_iter");
        assert_eq!(parsed[0].epsilon, 1e-6);
    }

    #[test]
    fn metric_spec_parsing() {
        assert_eq!(MetricSpec::parse("identity").unwrap(), MetricSpec::Identity);
        assert_eq!(
            MetricSpec::parse("scaled:1.5").unwrap(),
            MetricSpec::Scaled(1.5)
        );
        assert_eq!(
            MetricSpec::parse("diag-ramp").unwrap(),
            MetricSpec::DiagonalRamp
        );
        assert!(MetricSpec::parse("banana").is_err());
        assert!(MetricSpec::parse("scaled:-1").is_err());
    }

    #[test]
    fn overlay_writes_identical_columns_for_identical_signals() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("overlay.csv");
        let x = Vector::from_fn(5, |i| i as f64 - 2.0);
        emit_signal_overlay(&x, &x, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        for line in &lines[1..] {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[1], f[2]);
        }
    }
}
