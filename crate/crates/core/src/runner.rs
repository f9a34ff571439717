//! Config-driven commands behind the `gapforge` binary.
//!
//! Exit codes: 0 success, 1 a check reported failure or output could not be
//! written, 2 configuration error, 3 no converged answer for a single-point
//! command.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::config::{ConfigError, OutputFormat, RunConfig};
use crate::oracle::{compare, OracleReport};
use crate::phase::{
    check_phase_claims, classify, sweep, ClaimReport, Outcome, Phase, PhasePoint, SweepRow,
    SweepSpec,
};
use crate::scaling::{kappa_ladder, probe, probe_density, DensitySeries, KappaSeries, DEFAULT_OCTAVES};
use crate::solver::{
    commutator_residual, find_tc, solve_coupled, tc_bound, tc_bound_closed_form,
    tc_bound_vanishing_gap, GapSolution, ModelParams, SolverOptions,
};
use crate::thermal::QuasiSpectrum;

pub const VERSION: &str = concat!("gapforge ", env!("CARGO_PKG_VERSION"));
pub const THREADS_ENV: &str = "GAPFORGE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Tc,
    Sweep,
    Claims,
    Oracle,
    Scaling,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Solve,
        Command::Tc,
        Command::Sweep,
        Command::Claims,
        Command::Oracle,
        Command::Scaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Tc => "tc",
            Command::Sweep => "sweep",
            Command::Claims => "claims",
            Command::Oracle => "oracle",
            Command::Scaling => "scaling",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}` (expected solve, tc, sweep, claims, oracle or scaling)"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    NonConvergence(String),
    #[error("{0}")]
    CheckFailed(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::NonConvergence(_) => 3,
            RunError::CheckFailed(_) | RunError::Output { .. } | RunError::Pool(_) => 1,
        }
    }
}

/// Files written by a successful run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
}

/// Thread count from an explicit flag, then `GAPFORGE_THREADS`, then auto (0).
pub fn resolve_threads(flag: Option<usize>) -> Result<usize, ConfigError> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| ConfigError::Invalid {
            key: THREADS_ENV.into(),
            message: format!("expected a non-negative integer, got `{v}`"),
        }),
        Err(_) => Ok(0),
    }
}

#[derive(Debug, Serialize)]
struct ResultRecord<'a, T: Serialize> {
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    result: T,
}

#[derive(Debug, Serialize)]
struct BranchRecord {
    #[serde(flatten)]
    solution: GapSolution,
    energy_min: f64,
    energy_max: f64,
    commutator_residual: f64,
}

#[derive(Debug, Serialize)]
struct SolveRecord {
    phase: Phase,
    flagged: Vec<f64>,
    branches: Vec<BranchRecord>,
}

#[derive(Debug, Serialize)]
struct TcRecord {
    tc: f64,
    t_below: f64,
    t_above: f64,
    steps: usize,
    solution_below: GapSolution,
    commutator_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_at_solution: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_self_consistent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_literal: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    table: String,
    rows: usize,
    normal: usize,
    superconducting: usize,
    indeterminate: usize,
}

#[derive(Debug, Serialize)]
struct SweepRecord {
    rows: Vec<SweepRowRecord>,
}

#[derive(Debug, Serialize)]
struct SweepRowRecord {
    coords: Vec<f64>,
    #[serde(flatten)]
    point: PhasePoint,
}

#[derive(Debug, Serialize)]
struct OracleRecord {
    mu: f64,
    beta: f64,
    tolerance: f64,
    passed: bool,
    max_deviation: f64,
    report: OracleReport,
}

#[derive(Debug, Serialize)]
struct ScalingRecord {
    delta_m: f64,
    delta_b: f64,
    surviving_drift: f64,
    pairing: KappaSeries,
    density: DensitySeries,
}

/// Runs one command inside a worker pool of `threads` threads (0 = auto).
pub fn run(
    command: Command,
    config_path: &Path,
    out: Option<&Path>,
    threads: usize,
) -> Result<RunOutput, RunError> {
    let cfg = RunConfig::load(config_path)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    pool.install(|| run_config(command, &cfg, out))
}

pub fn run_config(command: Command, cfg: &RunConfig, out: Option<&Path>) -> Result<RunOutput, RunError> {
    let format = output_format(command, cfg);
    let path = output_path(command, cfg, out, format);
    match command {
        Command::Solve => run_solve(cfg, &path),
        Command::Tc => run_tc(cfg, &path),
        Command::Sweep => run_sweep(cfg, &path, format),
        Command::Claims => run_claims(cfg, &path),
        Command::Oracle => run_oracle(cfg, &path),
        Command::Scaling => run_scaling(cfg, &path),
    }
}

fn output_format(command: Command, cfg: &RunConfig) -> OutputFormat {
    cfg.output
        .as_ref()
        .and_then(|o| o.format)
        .unwrap_or(match command {
            Command::Sweep => OutputFormat::Csv,
            _ => OutputFormat::Toml,
        })
}

fn output_path(command: Command, cfg: &RunConfig, out: Option<&Path>, format: OutputFormat) -> PathBuf {
    if let Some(p) = out {
        return p.to_path_buf();
    }
    if let Some(p) = cfg.output.as_ref().and_then(|o| o.path.as_ref()) {
        return PathBuf::from(p);
    }
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Toml => "toml",
    };
    PathBuf::from(format!("gapforge-{}.{ext}", command.name()))
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), RunError> {
    let err = |source| RunError::Output {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(err)?;
    tmp.write_all(contents).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

fn write_record<T: Serialize>(
    path: &Path,
    command: Command,
    cfg: &RunConfig,
    result: T,
) -> Result<(), RunError> {
    let record = ResultRecord {
        version: VERSION,
        command: command.name(),
        config: cfg,
        result,
    };
    let text = toml::to_string(&record).expect("result records serialize");
    write_atomic(path, text.as_bytes())
}

fn branch_record(sol: &GapSolution, params: &ModelParams) -> BranchRecord {
    let spec = QuasiSpectrum::evaluate(
        &params.basis.dispersion,
        &params.basis.v,
        sol.gaps(),
        params.mu,
        params.beta,
    );
    BranchRecord {
        solution: *sol,
        energy_min: spec.energy.iter().copied().fold(f64::INFINITY, f64::min),
        energy_max: spec.energy.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        commutator_residual: commutator_residual(sol, params).max(),
    }
}

fn run_solve(cfg: &RunConfig, path: &Path) -> Result<RunOutput, RunError> {
    let params = cfg.params()?;
    let opts = SolverOptions::default();
    let sol = solve_coupled(&params, &opts);
    let phase = classify(&params, &opts).phase;
    let record = SolveRecord {
        phase,
        flagged: sol.flagged.clone(),
        branches: sol
            .branches
            .iter()
            .map(|b| branch_record(b, &params))
            .collect(),
    };
    write_record(path, Command::Solve, cfg, record)?;
    if phase == Phase::Indeterminate {
        return Err(RunError::NonConvergence(format!(
            "mean-field solve did not converge (result written to {})",
            path.display()
        )));
    }
    Ok(RunOutput {
        files: vec![path.to_path_buf()],
    })
}

fn run_tc(cfg: &RunConfig, path: &Path) -> Result<RunOutput, RunError> {
    let params = cfg.params()?;
    let bracket = cfg.tc.ok_or(ConfigError::MissingBlock("tc"))?;
    let opts = SolverOptions::default();
    let r = find_tc(&params, bracket.t_min, bracket.t_max, &opts)
        .map_err(|e| RunError::NonConvergence(e.to_string()))?;
    let below = params.with_temperature(r.t_below);
    let attractive = params.lambda_b < 0.0;
    let record = TcRecord {
        tc: r.tc,
        t_below: r.t_below,
        t_above: r.t_above,
        steps: r.steps,
        solution_below: r.solution_below,
        commutator_residual: commutator_residual(&r.solution_below, &below).max(),
        bound_at_solution: tc_bound(&r.solution_below, &below).ok(),
        bound_self_consistent: tc_bound_vanishing_gap(r.solution_below.delta_m, &below).ok(),
        bound_literal: attractive.then(|| tc_bound_closed_form(&below)),
    };
    write_record(path, Command::Tc, cfg, record)?;
    Ok(RunOutput {
        files: vec![path.to_path_buf()],
    })
}

/// 17 significant digits, round-trip exact.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn sweep_csv(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header: Vec<&str> = spec.axes().iter().map(|a| a.param.name()).collect();
    header.extend([
        "phase",
        "delta_m",
        "delta_b",
        "branch_count",
        "residual_m",
        "residual_b",
    ]);
    out.write_record(&header).expect("in-memory write");
    for row in rows {
        let p = &row.point;
        let mut fields: Vec<String> = row.coords.iter().map(|&c| format_number(c)).collect();
        fields.push(p.phase.as_str().into());
        fields.push(format_number(p.delta_m));
        fields.push(format_number(p.delta_b));
        fields.push(p.branch_count.to_string());
        fields.push(format_number(p.residual_m));
        fields.push(format_number(p.residual_b));
        out.write_record(&fields).expect("in-memory write");
    }
    String::from_utf8(out.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn record_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".record.toml");
    path.with_file_name(name)
}

fn run_sweep(cfg: &RunConfig, path: &Path, format: OutputFormat) -> Result<RunOutput, RunError> {
    let params = cfg.params()?;
    let axes = cfg
        .sweep
        .as_ref()
        .ok_or(ConfigError::MissingBlock("sweep"))?
        .axes
        .clone();
    let spec = SweepSpec::new(params, axes).map_err(|e| ConfigError::Invalid {
        key: "sweep.axes".into(),
        message: e.to_string(),
    })?;
    let rows = sweep(&spec, &SolverOptions::default());
    let count = |ph| rows.iter().filter(|r| r.point.phase == ph).count();
    match format {
        OutputFormat::Csv => {
            write_atomic(path, sweep_csv(&spec, &rows).as_bytes())?;
            let side = record_path(path);
            let summary = SweepSummary {
                table: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
                rows: rows.len(),
                normal: count(Phase::Normal),
                superconducting: count(Phase::Superconducting),
                indeterminate: count(Phase::Indeterminate),
            };
            write_record(&side, Command::Sweep, cfg, summary)?;
            Ok(RunOutput {
                files: vec![path.to_path_buf(), side],
            })
        }
        OutputFormat::Toml => {
            let record = SweepRecord {
                rows: rows
                    .into_iter()
                    .map(|r| SweepRowRecord {
                        coords: r.coords,
                        point: r.point,
                    })
                    .collect(),
            };
            write_record(path, Command::Sweep, cfg, record)?;
            Ok(RunOutput {
                files: vec![path.to_path_buf()],
            })
        }
    }
}

fn run_claims(cfg: &RunConfig, path: &Path) -> Result<RunOutput, RunError> {
    let claims = cfg.claims.clone().unwrap_or_default();
    let report: ClaimReport = check_phase_claims(cfg.model.mu, &claims, &SolverOptions::default());
    write_record(path, Command::Claims, cfg, &report)?;
    let failed: Vec<char> = report
        .claims
        .iter()
        .filter(|c| c.outcome == Outcome::Fail)
        .map(|c| c.label)
        .collect();
    if !failed.is_empty() {
        return Err(RunError::CheckFailed(format!("claims {failed:?} failed")));
    }
    Ok(RunOutput {
        files: vec![path.to_path_buf()],
    })
}

fn run_oracle(cfg: &RunConfig, path: &Path) -> Result<RunOutput, RunError> {
    let modes = cfg.mode_set()?;
    let tolerance = cfg.oracle.as_ref().map_or(1e-10, |o| o.tolerance);
    let beta = cfg.beta();
    let report = compare(&modes, beta, cfg.model.mu);
    let max_deviation = report.max_deviation();
    let passed = max_deviation <= tolerance;
    let record = OracleRecord {
        mu: cfg.model.mu,
        beta,
        tolerance,
        passed,
        max_deviation,
        report,
    };
    write_record(path, Command::Oracle, cfg, record)?;
    if !passed {
        return Err(RunError::CheckFailed(format!(
            "oracle deviation {max_deviation:e} exceeds {tolerance:e}"
        )));
    }
    Ok(RunOutput {
        files: vec![path.to_path_buf()],
    })
}

fn run_scaling(cfg: &RunConfig, path: &Path) -> Result<RunOutput, RunError> {
    let params = cfg.params()?;
    let octaves = cfg.scaling.map_or(DEFAULT_OCTAVES, |s| s.octaves);
    let sol = solve_coupled(&params, &SolverOptions::default());
    let state = match sol.principal() {
        Some(s) => *s,
        None if sol.mean_field().converged => *sol.mean_field(),
        None => {
            return Err(RunError::NonConvergence(
                "mean-field solve did not converge".into(),
            ))
        }
    };
    let kappas = kappa_ladder(&params.basis.grid, octaves);
    let pairing =
        probe(&params, state.gaps(), &kappas).map_err(|e| RunError::NonConvergence(e.to_string()))?;
    let density = probe_density(&params, state.gaps(), &kappas);
    let record = ScalingRecord {
        delta_m: state.delta_m,
        delta_b: state.delta_b,
        surviving_drift: pairing.surviving_drift(),
        pairing,
        density,
    };
    write_record(path, Command::Scaling, cfg, record)?;
    Ok(RunOutput {
        files: vec![path.to_path_buf()],
    })
}

/// One-line human summary of a finished run.
pub fn describe(output: &RunOutput) -> String {
    let mut s = String::new();
    for f in &output.files {
        let _ = writeln!(s, "wrote {}", f.display());
    }
    s
}

