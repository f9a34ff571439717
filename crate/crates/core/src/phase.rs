//! Phase classification, parameter sweeps and the phase-diagram claims.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SweepError;
use crate::solver::{
    find_tc, solve_coupled, tc_bound, tc_bound_closed_form, tc_bound_vanishing_gap, ModelBasis,
    ModelParams, SolverOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Normal,
    Superconducting,
    /// The mean-field solve failed somewhere and no pairing branch was found.
    Indeterminate,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::Superconducting => "superconducting",
            Phase::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub lambda_m: f64,
    pub lambda_b: f64,
    pub mu: f64,
    pub temperature: f64,
    pub beta: f64,
    pub phase: Phase,
    /// Number of converged mixed branches.
    pub branch_count: usize,
    /// Principal mixed branch if any, otherwise the mean-field branch.
    pub delta_m: f64,
    pub delta_b: f64,
    pub residual_m: f64,
    pub residual_b: f64,
}

pub fn classify(params: &ModelParams, opts: &SolverOptions) -> PhasePoint {
    let sol = solve_coupled(params, opts);
    let branch_count = sol.converged_mixed().count();
    let mean_field = sol.mean_field();
    let phase = if branch_count > 0 {
        Phase::Superconducting
    } else if !mean_field.converged || !sol.flagged.is_empty() {
        Phase::Indeterminate
    } else {
        Phase::Normal
    };
    let shown = sol.principal().unwrap_or(mean_field);
    PhasePoint {
        lambda_m: params.lambda_m,
        lambda_b: params.lambda_b,
        mu: params.mu,
        temperature: params.temperature(),
        beta: params.beta,
        phase,
        branch_count,
        delta_m: shown.delta_m,
        delta_b: shown.delta_b,
        residual_m: shown.residual_m,
        residual_b: shown.residual_b,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    LambdaM,
    LambdaB,
    Mu,
    Temperature,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::LambdaM => "lambda_m",
            SweepParam::LambdaB => "lambda_b",
            SweepParam::Mu => "mu",
            SweepParam::Temperature => "temperature",
        }
    }

    fn apply(self, params: &ModelParams, value: f64) -> ModelParams {
        let mut p = params.clone();
        match self {
            SweepParam::LambdaM => p.lambda_m = value,
            SweepParam::LambdaB => p.lambda_b = value,
            SweepParam::Mu => p.mu = value,
            SweepParam::Temperature => p.beta = 1.0 / value,
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    /// Evenly spaced values including both ends.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + (self.max - self.min) * (i as f64 / last)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    base: ModelParams,
    axes: Vec<Axis>,
}

impl SweepSpec {
    pub fn new(base: ModelParams, axes: Vec<Axis>) -> Result<Self, SweepError> {
        if axes.len() > 2 {
            return Err(SweepError::TooManyAxes(axes.len()));
        }
        for (i, a) in axes.iter().enumerate() {
            let name = a.param.name();
            if a.steps < 2 {
                return Err(SweepError::TooFewSteps { name, steps: a.steps });
            }
            if !(a.min.is_finite() && a.max.is_finite()) {
                return Err(SweepError::NonFiniteBounds(name));
            }
            if axes[..i].iter().any(|b| b.param == a.param) {
                return Err(SweepError::DuplicateAxis(name));
            }
        }
        Ok(Self { base, axes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn base(&self) -> &ModelParams {
        &self.base
    }

    /// Lattice points in row order, outer axis major.
    pub fn lattice(&self) -> Vec<Vec<f64>> {
        let mut rows = vec![Vec::new()];
        for axis in &self.axes {
            let values = axis.values();
            rows = rows
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut r = prefix.clone();
                        r.push(v);
                        r
                    })
                })
                .collect();
        }
        rows
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub point: PhasePoint,
}

/// Classifies every lattice point. Points whose parameters are invalid are
/// marked indeterminate rather than aborting the sweep.
pub fn sweep(spec: &SweepSpec, opts: &SolverOptions) -> Vec<SweepRow> {
    spec.lattice()
        .into_par_iter()
        .map(|coords| {
            let mut params = spec.base.clone();
            for (axis, &v) in spec.axes.iter().zip(&coords) {
                params = axis.param.apply(&params, v);
            }
            let point = match ModelParams::new(
                params.lambda_m,
                params.lambda_b,
                params.mu,
                params.beta,
                Arc::clone(&params.basis),
            ) {
                Ok(p) => classify(&p, opts),
                Err(_) => invalid_point(&params),
            };
            SweepRow { coords, point }
        })
        .collect()
}

fn invalid_point(params: &ModelParams) -> PhasePoint {
    PhasePoint {
        lambda_m: params.lambda_m,
        lambda_b: params.lambda_b,
        mu: params.mu,
        temperature: params.temperature(),
        beta: params.beta,
        phase: Phase::Indeterminate,
        branch_count: 0,
        delta_m: f64::NAN,
        delta_b: f64::NAN,
        residual_m: f64::NAN,
        residual_b: f64::NAN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    InsufficientData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub label: char,
    pub statement: String,
    pub outcome: Outcome,
    pub evidence: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcSample {
    pub lambda_m: f64,
    pub lambda_b: f64,
    pub tc: f64,
    /// Bound evaluated on the solved spectrum just below `tc`.
    pub bound_at_solution: f64,
    /// Bound with the solved mean field and the gap switched off.
    pub bound_self_consistent: f64,
    /// Closed form with `λ_M` in place of the solved mean field.
    pub bound_literal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub mu: f64,
    pub claims: Vec<ClaimResult>,
    pub tc_samples: Vec<TcSample>,
}

impl ClaimReport {
    pub fn outcome(&self, label: char) -> Option<Outcome> {
        self.claims.iter().find(|c| c.label == label).map(|c| c.outcome)
    }
}

/// Knobs of the claim checks; energies are in units of `μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClaimConfig {
    pub repulsive_couplings: Vec<f64>,
    pub strong_coupling: f64,
    pub scan_t_min: f64,
    pub scan_t_max: f64,
    pub scan_points: usize,
    pub attractive_pairing: f64,
    pub mean_field_path: Vec<f64>,
    pub tc_bracket: [f64; 2],
    pub strong_mean_field: Vec<f64>,
    pub probe_temperature: f64,
}

impl Default for ClaimConfig {
    fn default() -> Self {
        Self {
            repulsive_couplings: vec![0.25, 0.5, 0.75, 1.0],
            strong_coupling: 1.5,
            scan_t_min: 1e-3,
            scan_t_max: 10.0,
            scan_points: 41,
            attractive_pairing: -0.6,
            mean_field_path: vec![-0.5, -0.7, -0.9],
            tc_bracket: [1e-3, 100.0],
            strong_mean_field: vec![-1.25, -1.5, -2.0, -3.0, -5.0],
            probe_temperature: 0.05,
        }
    }
}

fn log_scan(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Checks the phase-diagram claims on the flat band `ω = μ`.
pub fn check_phase_claims(mu: f64, cfg: &ClaimConfig, opts: &SolverOptions) -> ClaimReport {
    let basis = Arc::new(ModelBasis::flat_band(mu));
    let at = |lm: f64, lb: f64, t: f64| {
        ModelParams::new(lm * mu, lb * mu, mu, 1.0 / (t * mu), Arc::clone(&basis))
            .expect("claim parameters are valid")
    };
    let temps = log_scan(cfg.scan_t_min, cfg.scan_t_max, cfg.scan_points.max(2));

    // (a) no pairing for 0 < λ_B <= μ
    let mut found = Vec::new();
    let mut indeterminate = 0;
    for &lb in &cfg.repulsive_couplings {
        let points: Vec<PhasePoint> = temps
            .par_iter()
            .map(|&t| classify(&at(0.0, lb, t), opts))
            .collect();
        for p in points {
            match p.phase {
                Phase::Superconducting => found.push((lb, p.temperature / mu)),
                Phase::Indeterminate => indeterminate += 1,
                Phase::Normal => {}
            }
        }
    }
    let total = cfg.repulsive_couplings.len() * temps.len();
    let claim_a = ClaimResult {
        label: 'a',
        statement: "positive pairing coupling must exceed mu".into(),
        outcome: if !found.is_empty() {
            Outcome::Fail
        } else if indeterminate == total {
            Outcome::InsufficientData
        } else {
            Outcome::Pass
        },
        evidence: if found.is_empty() {
            format!(
                "{} points scanned, none superconducting, {indeterminate} indeterminate",
                total
            )
        } else {
            format!("superconducting at (lambda_b/mu, T/mu) = {found:?}")
        },
    };

    // (b) pairing just above threshold
    let strong = classify(&at(0.0, cfg.strong_coupling, cfg.scan_t_min), opts);
    let claim_b = ClaimResult {
        label: 'b',
        statement: "superconducting solutions exist for lambda_b > mu".into(),
        outcome: match strong.phase {
            Phase::Superconducting => Outcome::Pass,
            Phase::Normal => Outcome::Fail,
            Phase::Indeterminate => Outcome::InsufficientData,
        },
        evidence: format!(
            "lambda_b = {} mu at T = {} mu: {} (delta_b = {})",
            cfg.strong_coupling,
            cfg.scan_t_min,
            strong.phase.as_str(),
            strong.delta_b
        ),
    };

    // (c), (d) transitions along the attractive path
    let tcs: Vec<Option<TcSample>> = cfg
        .mean_field_path
        .par_iter()
        .map(|&lm| {
            let template = at(lm, cfg.attractive_pairing, 1.0);
            let r = find_tc(
                &template,
                cfg.tc_bracket[0] * mu,
                cfg.tc_bracket[1] * mu,
                opts,
            )
            .ok()?;
            let below = template.with_temperature(r.t_below);
            Some(TcSample {
                lambda_m: template.lambda_m,
                lambda_b: template.lambda_b,
                tc: r.tc,
                bound_at_solution: tc_bound(&r.solution_below, &below).ok()?,
                bound_self_consistent: tc_bound_vanishing_gap(r.solution_below.delta_m, &below)
                    .ok()?,
                bound_literal: tc_bound_closed_form(&below),
            })
        })
        .collect();
    let samples: Vec<TcSample> = tcs.iter().flatten().copied().collect();

    let claim_c = if samples.is_empty() {
        ClaimResult {
            label: 'c',
            statement: "critical temperature obeys the negative-coupling bound".into(),
            outcome: Outcome::InsufficientData,
            evidence: "no transition found on the sampled path".into(),
        }
    } else {
        let ok = samples
            .iter()
            .all(|s| s.tc <= s.bound_at_solution && s.tc <= s.bound_self_consistent);
        let literal_ok = samples.iter().all(|s| s.tc <= s.bound_literal);
        ClaimResult {
            label: 'c',
            statement: "critical temperature obeys the negative-coupling bound".into(),
            outcome: if ok { Outcome::Pass } else { Outcome::Fail },
            evidence: format!(
                "{} samples; self-consistent bound {}; closed form with lambda_m {}",
                samples.len(),
                if ok { "holds" } else { "violated" },
                if literal_ok { "holds" } else { "violated" }
            ),
        }
    };

    let claim_d = if tcs.iter().any(Option::is_none) || tcs.len() < 2 {
        ClaimResult {
            label: 'd',
            statement: "critical temperature grows as lambda_m approaches -mu".into(),
            outcome: Outcome::InsufficientData,
            evidence: format!(
                "{} of {} transitions found",
                samples.len(),
                cfg.mean_field_path.len()
            ),
        }
    } else {
        let increasing = samples.windows(2).all(|w| w[1].tc > w[0].tc);
        ClaimResult {
            label: 'd',
            statement: "critical temperature grows as lambda_m approaches -mu".into(),
            outcome: if increasing { Outcome::Pass } else { Outcome::Fail },
            evidence: format!(
                "T_c/mu = {:?}",
                samples.iter().map(|s| s.tc / mu).collect::<Vec<_>>()
            ),
        }
    };

    // (e) too strong a mean field destroys pairing
    let t = cfg.probe_temperature;
    let reference = cfg
        .mean_field_path
        .iter()
        .map(|&lm| (lm, classify(&at(lm, cfg.attractive_pairing, t), opts)))
        .find(|(_, p)| p.phase == Phase::Superconducting);
    let strong_points: Vec<(f64, PhasePoint)> = cfg
        .strong_mean_field
        .par_iter()
        .map(|&lm| (lm, classify(&at(lm, cfg.attractive_pairing, t), opts)))
        .collect();
    let lost: Vec<f64> = strong_points
        .iter()
        .filter(|(_, p)| p.phase == Phase::Normal)
        .map(|(lm, _)| *lm)
        .collect();
    let claim_e = match reference {
        None => ClaimResult {
            label: 'e',
            statement: "too strong mean-field attraction destroys pairing".into(),
            outcome: Outcome::InsufficientData,
            evidence: format!("no pairing branch on the reference path at T = {t} mu"),
        },
        Some((lm_ref, _)) => ClaimResult {
            label: 'e',
            statement: "too strong mean-field attraction destroys pairing".into(),
            outcome: if lost.is_empty() {
                Outcome::Fail
            } else {
                Outcome::Pass
            },
            evidence: format!(
                "pairing at lambda_m = {lm_ref} mu; absent at lambda_m/mu = {lost:?} (T = {t} mu)"
            ),
        },
    };

    ClaimReport {
        mu,
        claims: vec![claim_a, claim_b, claim_c, claim_d, claim_e],
        tc_samples: samples,
    }
}
