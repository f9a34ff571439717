//! Coupled mean-field / pairing self-consistency under the separable ansatz.
//!
//! With `𝒱_B(k, p) = λ_B v(k) v(p)` and `𝒱_M(k, p) = λ_M u(p)` the two gap
//! equations collapse to scalar conditions on the amplitudes:
//!
//! ```text
//! Δ_M = 2 λ_M Σ_i w_i u_i {p_i}
//! 1   = G(Δ_B) = λ_B Σ_i w_i v_i² tanh(β (W_i - μ) / 2) / W_i     (Δ_B > 0)
//! ```
//!
//! where `W_i = sqrt((ω_i + Δ_M)² + Δ_B² v_i²)`. For every trial `Δ_B` the
//! mean field is solved first, so `G` is a function of `Δ_B` alone; mixed
//! branches are located by scanning `G - 1` on a geometric ladder and
//! bisecting every sign change.
//!
//! Absolute tolerances are expressed in units of `μ`, which keeps the whole
//! computation covariant under a joint rescaling of all energies.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{GridError, SolverError};
use crate::grid::{FormFactorV, MomentumGrid, Profile, QuadratureScheme, WeightU};
use crate::thermal::{
    brace_occupation, coherence_factors, quasiparticle_energy, Dispersion, DispersionKind, Gaps,
    QuasiSpectrum,
};

/// Momentum-space structure shared by every parameter point of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBasis {
    pub grid: MomentumGrid,
    pub dispersion: Dispersion,
    pub v: FormFactorV,
    pub u: WeightU,
}

impl ModelBasis {
    pub fn new(
        grid: MomentumGrid,
        dispersion: DispersionKind,
        v_profile: Profile,
        u_profile: Profile,
    ) -> Result<Self, GridError> {
        let v = FormFactorV::new(&grid, v_profile)?;
        let u = WeightU::new(&grid, u_profile)?;
        let dispersion = Dispersion::new(&grid, dispersion);
        Ok(Self {
            grid,
            dispersion,
            v,
            u,
        })
    }

    /// Flat band `ω = omega0` with flat form factors on `[-1/2, 1/2]`, so that
    /// `v² = u = 1` at every node and the scalar equations hold in closed form.
    pub fn flat_band(omega0: f64) -> Self {
        let grid = MomentumGrid::new(0.5, 16, QuadratureScheme::UniformMidpoint)
            .expect("static grid is valid");
        Self::new(grid, DispersionKind::Flat { omega0 }, Profile::Flat, Profile::Flat)
            .expect("flat profiles never degenerate")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub lambda_m: f64,
    pub lambda_b: f64,
    pub mu: f64,
    pub beta: f64,
    pub basis: Arc<ModelBasis>,
}

impl ModelParams {
    pub fn new(
        lambda_m: f64,
        lambda_b: f64,
        mu: f64,
        beta: f64,
        basis: Arc<ModelBasis>,
    ) -> Result<Self, SolverError> {
        if !(lambda_m.is_finite() && lambda_b.is_finite()) {
            return Err(SolverError::InvalidParams("couplings must be finite".into()));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(SolverError::InvalidParams(format!("mu must be > 0, got {mu}")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(SolverError::InvalidParams(format!(
                "beta must be finite and >= 0, got {beta}"
            )));
        }
        Ok(Self {
            lambda_m,
            lambda_b,
            mu,
            beta,
            basis,
        })
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Self {
            beta,
            ..self.clone()
        }
    }

    pub fn with_temperature(&self, temperature: f64) -> Self {
        self.with_beta(1.0 / temperature)
    }

    /// `1/β`, infinite at `β = 0`.
    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn energy_scale(&self) -> f64 {
        self.mu
    }

    fn mean_field_scale(&self) -> f64 {
        self.mu.max(self.lambda_m.abs())
    }
}

/// Numerical knobs of the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Damping `α` of the mean-field iteration.
    pub mixing: f64,
    /// Step tolerance of the mean-field iteration, in units of `μ`.
    pub mean_field_tol: f64,
    pub max_iterations: usize,
    /// Residual certificate required of every converged solution.
    pub residual_tol: f64,
    pub ladder_points: usize,
    /// Lowest ladder value, in units of `μ`.
    pub ladder_floor: f64,
    /// Ladder ceiling is this factor times `|λ_B| + |λ_M| + μ`.
    pub ladder_ceiling: f64,
    /// Bracket width at which root refinement stops, in units of `μ`.
    pub root_tol: f64,
    /// Relative tolerance of the critical-temperature bisection.
    pub tc_rel_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            mixing: 0.5,
            mean_field_tol: 1e-10,
            max_iterations: 100_000,
            residual_tol: 1e-8,
            ladder_points: 320,
            ladder_floor: 1e-6,
            ladder_ceiling: 10.0,
            root_tol: 1e-10,
            tc_rel_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    MeanFieldOnly,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapSolution {
    pub delta_m: f64,
    pub delta_b: f64,
    pub branch: Branch,
    /// `|Δ_M - rhs| / max(μ, |λ_M|)`.
    pub residual_m: f64,
    /// `|G(Δ_B) - 1|`, zero on the mean-field-only branch.
    pub residual_b: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl GapSolution {
    pub fn gaps(&self) -> Gaps {
        Gaps {
            delta_m: self.delta_m,
            delta_b: self.delta_b,
        }
    }
}

/// Every branch found at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSolution {
    pub branches: Vec<GapSolution>,
    /// Ladder values of `Δ_B` at which the mean-field solve failed.
    pub flagged: Vec<f64>,
}

impl CoupledSolution {
    pub fn mean_field(&self) -> &GapSolution {
        &self.branches[0]
    }

    pub fn mixed(&self) -> impl Iterator<Item = &GapSolution> {
        self.branches.iter().filter(|b| b.branch == Branch::Mixed)
    }

    pub fn converged_mixed(&self) -> impl Iterator<Item = &GapSolution> {
        self.mixed().filter(|b| b.converged)
    }

    pub fn has_mixed(&self) -> bool {
        self.converged_mixed().next().is_some()
    }

    /// Converged mixed branch with the largest gap.
    pub fn principal(&self) -> Option<&GapSolution> {
        self.converged_mixed()
            .max_by(|a, b| a.delta_b.total_cmp(&b.delta_b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldSolution {
    pub delta_m: f64,
    /// Scaled residual, see [`GapSolution::residual_m`].
    pub residual: f64,
    pub iterations: usize,
}

/// Right-hand side of the mean-field equation, `2 λ_M Σ w u {p}`.
pub fn mean_field_rhs(delta_m: f64, delta_b: f64, params: &ModelParams) -> f64 {
    if params.beta == 0.0 {
        return params.lambda_m;
    }
    if params.lambda_m == 0.0 {
        return 0.0;
    }
    let basis = &params.basis;
    let mut acc = 0.0;
    for (((&w, &u), &omega), &v) in basis
        .grid
        .weights()
        .iter()
        .zip(basis.u.values())
        .zip(basis.dispersion.values())
        .zip(basis.v.values())
    {
        let xi = omega + delta_m;
        let d = delta_b * v;
        let wq = quasiparticle_energy(xi, d);
        let (c, s) = coherence_factors(xi, d);
        acc += w * u * brace_occupation(c, s, wq, params.mu, params.beta);
    }
    2.0 * params.lambda_m * acc
}

/// `G(Δ_B)` at a given mean field.
pub fn gap_function(delta_m: f64, delta_b: f64, params: &ModelParams) -> f64 {
    if params.beta == 0.0 || params.lambda_b == 0.0 {
        return 0.0;
    }
    let basis = &params.basis;
    let mut acc = 0.0;
    for ((&w, &omega), &v) in basis
        .grid
        .weights()
        .iter()
        .zip(basis.dispersion.values())
        .zip(basis.v.values())
    {
        let wq = quasiparticle_energy(omega + delta_m, delta_b * v);
        acc += w * v * v * (0.5 * params.beta * (wq - params.mu)).tanh() / wq;
    }
    params.lambda_b * acc
}

/// Solves the mean-field equation at fixed `Δ_B`.
///
/// Damped iteration from `Δ_M = λ_M`. If it stalls, `Δ_M - rhs(Δ_M)` is
/// scanned on `[min(0, 2λ_M), max(0, 2λ_M)]`, where the rhs is confined,
/// every crossing is bisected, and the certified stable root nearest `λ_M` is
/// returned.
const MEAN_FIELD_SCAN_CELLS: usize = 1024;

pub fn solve_mean_field(
    delta_b: f64,
    params: &ModelParams,
    opts: &SolverOptions,
) -> Result<MeanFieldSolution, SolverError> {
    let scale = params.mean_field_scale();
    let step_tol = opts.mean_field_tol * params.energy_scale();
    let residual = |x: f64| (x - mean_field_rhs(x, delta_b, params)).abs() / scale;

    let alpha = opts.mixing;
    let mut x = params.lambda_m;
    let mut iterations = 0;
    let mut checkpoint = f64::INFINITY;
    while iterations < opts.max_iterations {
        iterations += 1;
        let r = mean_field_rhs(x, delta_b, params);
        let step = (r - x).abs();
        if step <= step_tol {
            let res = residual(r);
            if res <= opts.residual_tol {
                return Ok(MeanFieldSolution {
                    delta_m: r,
                    residual: res,
                    iterations,
                });
            }
            break;
        }
        if iterations % 1000 == 0 {
            if step > 0.5 * checkpoint {
                break;
            }
            checkpoint = step;
        }
        x = (1.0 - alpha) * x + alpha * r;
    }

    let h = |x: f64| x - mean_field_rhs(x, delta_b, params);
    let lo = params.lambda_m.min(0.0) * 2.0;
    let hi = params.lambda_m.max(0.0) * 2.0;
    // the rhs can jump where ω + Δ_M changes sign, so scan for every crossing
    let cells = MEAN_FIELD_SCAN_CELLS;
    let node = |k: usize| {
        if k == cells {
            hi
        } else {
            lo + (hi - lo) * (k as f64 / cells as f64)
        }
    };
    let mut candidates: Vec<(f64, bool)> = Vec::new();
    let mut a = lo;
    let mut h_a = h(a);
    iterations += 1;
    if h_a == 0.0 {
        candidates.push((a, true));
    }
    for k in 1..=cells {
        let b = node(k);
        let h_b = h(b);
        iterations += 1;
        if h_b == 0.0 {
            candidates.push((b, true));
        } else if h_a != 0.0 && (h_a < 0.0) != (h_b < 0.0) {
            let (root, n) = bisect_sign_change(&h, a, b, h_a);
            iterations += n;
            candidates.push((root, h_a < 0.0));
        }
        a = b;
        h_a = h_b;
    }
    let certified = |&&(x, _): &&(f64, bool)| residual(x) <= opts.residual_tol;
    let nearest = |pool: Vec<&(f64, bool)>| {
        pool.into_iter()
            .min_by(|p, q| {
                (p.0 - params.lambda_m)
                    .abs()
                    .total_cmp(&(q.0 - params.lambda_m).abs())
            })
            .map(|p| p.0)
    };
    let stable: Vec<_> = candidates.iter().filter(certified).filter(|c| c.1).collect();
    let any: Vec<_> = candidates.iter().filter(certified).collect();
    if let Some(x) = nearest(stable).or_else(|| nearest(any)) {
        return Ok(MeanFieldSolution {
            delta_m: x,
            residual: residual(x),
            iterations,
        });
    }
    let last = candidates
        .iter()
        .map(|c| c.0)
        .min_by(|p, q| residual(*p).total_cmp(&residual(*q)))
        .unwrap_or(x);
    Err(SolverError::MeanFieldNonConvergence {
        last,
        residual: residual(last),
    })
}

/// Bisects `[a, b]` to exhaustion given `h(a)` and a sign change across it.
fn bisect_sign_change(h: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, h_a: f64) -> (f64, usize) {
    let a_negative = h_a < 0.0;
    let mut n = 0;
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        n += 1;
        let h_mid = h(mid);
        if h_mid == 0.0 {
            return (mid, n);
        }
        if (h_mid < 0.0) == a_negative {
            a = mid;
        } else {
            b = mid;
        }
    }
    let pick = if h(a).abs() <= h(b).abs() { a } else { b };
    (pick, n)
}

/// `G(Δ_B)` with the mean field resolved self-consistently at that `Δ_B`.
pub fn gap_criterion(
    delta_b: f64,
    params: &ModelParams,
    opts: &SolverOptions,
) -> Result<f64, SolverError> {
    let mf = solve_mean_field(delta_b, params, opts)?;
    Ok(gap_function(mf.delta_m, delta_b, params))
}

#[derive(Clone, Copy)]
struct Sample {
    delta_b: f64,
    /// `G - 1`
    excess: f64,
    mean_field: MeanFieldSolution,
}

fn sample(delta_b: f64, params: &ModelParams, opts: &SolverOptions) -> Option<Sample> {
    let mf = solve_mean_field(delta_b, params, opts).ok()?;
    Some(Sample {
        delta_b,
        excess: gap_function(mf.delta_m, delta_b, params) - 1.0,
        mean_field: mf,
    })
}

/// Geometric ladder of trial gaps.
pub fn gap_ladder(params: &ModelParams, opts: &SolverOptions) -> Vec<f64> {
    let lo = opts.ladder_floor * params.energy_scale();
    let hi = opts.ladder_ceiling
        * (params.lambda_b.abs() + params.lambda_m.abs() + params.energy_scale());
    let n = opts.ladder_points.max(2);
    let ratio = (hi / lo).ln();
    (0..n)
        .map(|k| lo * (ratio * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Finds every solution branch at one parameter point.
pub fn solve_coupled(params: &ModelParams, opts: &SolverOptions) -> CoupledSolution {
    let mean_field = match solve_mean_field(0.0, params, opts) {
        Ok(mf) => GapSolution {
            delta_m: mf.delta_m,
            delta_b: 0.0,
            branch: Branch::MeanFieldOnly,
            residual_m: mf.residual,
            residual_b: 0.0,
            iterations: mf.iterations,
            converged: true,
        },
        Err(SolverError::MeanFieldNonConvergence { last, residual }) => GapSolution {
            delta_m: last,
            delta_b: 0.0,
            branch: Branch::MeanFieldOnly,
            residual_m: residual,
            residual_b: 0.0,
            iterations: opts.max_iterations,
            converged: false,
        },
        Err(e) => unreachable!("mean-field solve only fails by non-convergence: {e}"),
    };
    let mut out = CoupledSolution {
        branches: vec![mean_field],
        flagged: Vec::new(),
    };
    // G vanishes identically in these cases
    if params.beta == 0.0 || params.lambda_b == 0.0 {
        return out;
    }

    let ladder = gap_ladder(params, opts);
    let mut samples: Vec<Sample> = Vec::with_capacity(ladder.len() + 8);
    for &d in &ladder {
        match sample(d, params, opts) {
            Some(s) => samples.push(s),
            None => out.flagged.push(d),
        }
    }

    // Two roots can hide between neighbouring ladder points near a fold;
    // probe every negative local maximum.
    let mut extra = Vec::new();
    for win in samples.windows(3) {
        let (a, m, b) = (&win[0], &win[1], &win[2]);
        if m.excess < 0.0 && m.excess >= a.excess && m.excess >= b.excess {
            if let Some(peak) = probe_peak(a.delta_b, b.delta_b, params, opts) {
                if peak.excess >= 0.0 {
                    extra.push(peak);
                }
            }
        }
    }
    samples.extend(extra);
    samples.sort_by(|a, b| a.delta_b.total_cmp(&b.delta_b));

    for pair in samples.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if (a.excess < 0.0) != (b.excess < 0.0) {
            out.branches.push(refine_root(a, b, params, opts));
        }
    }
    out
}

/// Golden-section search for the maximum of `G` on `[lo, hi]`, in `log Δ_B`.
fn probe_peak(lo: f64, hi: f64, params: &ModelParams, opts: &SolverOptions) -> Option<Sample> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = sample(c.exp(), params, opts)?;
    let mut fd = sample(d.exp(), params, opts)?;
    for _ in 0..60 {
        if fc.excess >= 0.0 {
            return Some(fc);
        }
        if fd.excess >= 0.0 {
            return Some(fd);
        }
        if fc.excess > fd.excess {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = sample(c.exp(), params, opts)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = sample(d.exp(), params, opts)?;
        }
    }
    Some(if fc.excess > fd.excess { fc } else { fd })
}

fn refine_root(a: Sample, b: Sample, params: &ModelParams, opts: &SolverOptions) -> GapSolution {
    let (mut lo, mut hi) = (a, b);
    let width_tol = opts.root_tol * params.energy_scale();
    let mut steps = 0;
    let mut failed = false;
    // Bisect past the nominal width until the bracket is exhausted so the
    // residual certificate holds even where G is steep.
    while steps < 200 && lo.excess != 0.0 && hi.excess != 0.0 {
        let mid = 0.5 * (lo.delta_b + hi.delta_b);
        if mid <= lo.delta_b || mid >= hi.delta_b {
            break;
        }
        if hi.delta_b - lo.delta_b <= width_tol && lo.excess.abs().min(hi.excess.abs()) <= 1e-14 {
            break;
        }
        steps += 1;
        match sample(mid, params, opts) {
            Some(s) => {
                if (s.excess < 0.0) == (lo.excess < 0.0) {
                    lo = s;
                } else {
                    hi = s;
                }
            }
            None => {
                failed = true;
                break;
            }
        }
    }
    let best = if lo.excess.abs() <= hi.excess.abs() { lo } else { hi };
    let residual_b = best.excess.abs();
    GapSolution {
        delta_m: best.mean_field.delta_m,
        delta_b: best.delta_b,
        branch: Branch::Mixed,
        residual_m: best.mean_field.residual,
        residual_b,
        iterations: steps,
        converged: !failed
            && residual_b <= opts.residual_tol
            && best.mean_field.residual <= opts.residual_tol,
    }
}

/// Outcome of a critical-temperature search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TcResult {
    pub tc: f64,
    /// Highest temperature at which a mixed branch was confirmed.
    pub t_below: f64,
    /// Lowest temperature at which none was found.
    pub t_above: f64,
    /// Principal mixed branch at `t_below`.
    pub solution_below: GapSolution,
    pub steps: usize,
}

/// Bisects (in `log T`) on the existence of a converged mixed branch.
pub fn find_tc(
    template: &ModelParams,
    t_lo: f64,
    t_hi: f64,
    opts: &SolverOptions,
) -> Result<TcResult, SolverError> {
    if !(t_lo > 0.0 && t_hi > t_lo && t_hi.is_finite()) {
        return Err(SolverError::InvalidParams(format!(
            "temperature bracket must satisfy 0 < T_lo < T_hi, got [{t_lo}, {t_hi}]"
        )));
    }
    let at = |t: f64| solve_coupled(&template.with_temperature(t), opts);
    let below = at(t_lo);
    let above = at(t_hi);
    let (exists_lo, exists_hi) = (below.has_mixed(), above.has_mixed());
    if !exists_lo || exists_hi {
        return Err(SolverError::NoTransition {
            t_lo,
            t_hi,
            exists_lo,
            exists_hi,
        });
    }
    let mut best = *below.principal().expect("mixed branch exists");
    let (mut lo, mut hi) = (t_lo, t_hi);
    let mut steps = 0;
    while hi / lo - 1.0 > opts.tc_rel_tol {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        steps += 1;
        let sol = at(mid);
        match sol.principal() {
            Some(p) => {
                lo = mid;
                best = *p;
            }
            None => hi = mid,
        }
    }
    Ok(TcResult {
        tc: 0.5 * (lo + hi),
        t_below: lo,
        t_above: hi,
        solution_below: best,
        steps,
    })
}

fn require_attraction(params: &ModelParams) -> Result<(), SolverError> {
    if params.lambda_b >= 0.0 {
        return Err(SolverError::BoundRequiresAttraction(params.lambda_b));
    }
    Ok(())
}

/// Temperature bound `(|λ_B|/2) Σ w v² (μ/W - 1)` on the solution's spectrum.
pub fn tc_bound(solution: &GapSolution, params: &ModelParams) -> Result<f64, SolverError> {
    require_attraction(params)?;
    let spec = QuasiSpectrum::evaluate(
        &params.basis.dispersion,
        &params.basis.v,
        solution.gaps(),
        params.mu,
        params.beta,
    );
    Ok(bound_from_energies(params, &spec.energy))
}

/// The same bound with the gap switched off, `W = |ω + Δ_M|`.
pub fn tc_bound_vanishing_gap(delta_m: f64, params: &ModelParams) -> Result<f64, SolverError> {
    require_attraction(params)?;
    let energies: Vec<f64> = params
        .basis
        .dispersion
        .values()
        .iter()
        .map(|&omega| quasiparticle_energy(omega + delta_m, 0.0))
        .collect();
    Ok(bound_from_energies(params, &energies))
}

/// Closed-form bound `|λ_B| |λ_M| / (2 (μ - |λ_M|))` for a flat band at `ω = μ`.
pub fn tc_bound_closed_form(params: &ModelParams) -> f64 {
    params.lambda_b.abs() * params.lambda_m.abs() / (2.0 * (params.mu - params.lambda_m.abs()))
}

fn bound_from_energies(params: &ModelParams, energies: &[f64]) -> f64 {
    let basis = &params.basis;
    let sum: f64 = basis
        .grid
        .weights()
        .iter()
        .zip(basis.v.values())
        .zip(energies)
        .map(|((&w, &v), &e)| w * v * v * (params.mu / e - 1.0))
        .sum();
    0.5 * params.lambda_b.abs() * sum
}

/// Deviation between the commutator coefficients of the reduced potential and
/// those of the effective quadratic Hamiltonian at a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorCheck {
    /// `max_k |2 λ_B v_k Σ w v [p] - Δ_B v_k|`
    pub pairing: f64,
    /// `max_k |2 λ_M Σ w u {p} - Δ_M|`
    pub mean_field: f64,
}

impl CommutatorCheck {
    pub fn max(&self) -> f64 {
        self.pairing.max(self.mean_field)
    }
}

pub fn commutator_residual(solution: &GapSolution, params: &ModelParams) -> CommutatorCheck {
    let basis = &params.basis;
    let spec = QuasiSpectrum::evaluate(
        &basis.dispersion,
        &basis.v,
        solution.gaps(),
        params.mu,
        params.beta,
    );
    let w = basis.grid.weights();
    let v = basis.v.values();
    let u = basis.u.values();
    let pair_sum: f64 = (0..w.len()).map(|i| w[i] * v[i] * spec.bracket[i]).sum();
    let occ_sum: f64 = (0..w.len()).map(|i| w[i] * u[i] * spec.brace[i]).sum();
    let pairing = v
        .iter()
        .map(|&vk| (2.0 * params.lambda_b * vk * pair_sum - solution.delta_b * vk).abs())
        .fold(0.0, f64::max);
    let mean_coeff = if params.beta == 0.0 {
        params.lambda_m
    } else {
        2.0 * params.lambda_m * occ_sum
    };
    CommutatorCheck {
        pairing,
        mean_field: (mean_coeff - solution.delta_m).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn flat(lambda_m: f64, lambda_b: f64, beta: f64) -> ModelParams {
        ModelParams::new(lambda_m, lambda_b, 1.0, beta, Arc::new(ModelBasis::flat_band(1.0))).unwrap()
    }

    #[test]
    fn flat_basis_has_unit_form_factors() {
        let b = ModelBasis::flat_band(1.0);
        assert!(b.v.values()[..8].iter().all(|&x| x == -1.0));
        assert!(b.v.values()[8..].iter().all(|&x| x == 1.0));
        assert!(b.u.values().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn rhs_at_infinite_temperature_is_lambda_m() {
        let p = flat(-0.37, 2.0, 0.0);
        assert_eq!(mean_field_rhs(0.4, 1.3, &p), -0.37);
        assert_eq!(mean_field_rhs(0.4, 1.3, &flat(0.0, 1.0, 2.0)), 0.0);
    }

    #[test]
    fn rhs_flat_band_arithmetic() {
        let p = flat(-0.5, 0.0, 2.0);
        let got = mean_field_rhs(-0.5, 0.0, &p);
        assert_abs_diff_eq!(got, -1.0 / (1.0 + (-1f64).exp()), epsilon = 1e-14);
        assert_abs_diff_eq!(got, -0.731059, epsilon = 1e-6);
    }

    #[test]
    fn mean_field_examples() {
        let opts = SolverOptions::default();
        let mf = solve_mean_field(0.0, &flat(0.8, 1.0, 0.0), &opts).unwrap();
        assert_eq!(mf.delta_m, 0.8);
        assert_eq!(mf.iterations, 1);
        assert_eq!(solve_mean_field(0.3, &flat(0.0, 1.0, 5.0), &opts).unwrap().delta_m, 0.0);
    }

    /// Bisection on the scalar closed form `x = -1/(1 + e^{βx})`, ξ = 1 + x > 0.
    fn flat_band_oracle(beta: f64) -> f64 {
        let h = |x: f64| x + 1.0 / (1.0 + (beta * x).exp());
        let (mut lo, mut hi) = (-1.0, 0.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if h(m) < 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn mean_field_low_temperature_limit() {
        let opts = SolverOptions::default();
        for beta in [5.0, 20.0, 1e6] {
            let mf = solve_mean_field(0.0, &flat(-0.5, 0.0, beta), &opts).unwrap();
            assert_abs_diff_eq!(mf.delta_m, flat_band_oracle(beta), epsilon = 1e-9);
        }
        let mf = solve_mean_field(0.0, &flat(-0.5, 0.0, 1e6), &opts).unwrap();
        assert_abs_diff_eq!(mf.delta_m, -1.0, epsilon = 1e-9);
    }

    #[test]
    fn mean_field_fallback_handles_oscillation() {
        // steep occupation step around ξ ≈ 0 defeats plain damping
        let opts = SolverOptions::default();
        let p = flat(-0.9, -0.6, 1.0);
        for d in [1e-4, 2e-3, 0.05] {
            let mf = solve_mean_field(d, &p, &opts).unwrap();
            assert!(mf.residual <= 1e-8);
        }
    }

    #[test]
    fn mean_field_scan_steps_over_the_band_edge_jump() {
        // rhs jumps at ω + Δ_M = 0; below it the occupation is f(μ + ω + Δ_M)
        let opts = SolverOptions::default();
        let mf = solve_mean_field(0.0, &flat(-1.5, 0.0, 20.0), &opts).unwrap();
        let want = -3.0 / (1.0 + (20.0 * (2.0 + mf.delta_m)).exp());
        assert_abs_diff_eq!(mf.delta_m, want, epsilon = 1e-12);
        assert!(mf.delta_m < -2.99);
    }

    #[test]
    fn mean_field_without_fixed_point_is_reported() {
        // at λ_M = -μ the jump straddles zero and nothing else crosses
        let opts = SolverOptions::default();
        assert!(matches!(
            solve_mean_field(0.0, &flat(-1.0, 0.0, 20.0), &opts),
            Err(SolverError::MeanFieldNonConvergence { .. })
        ));
    }

    #[test]
    fn gap_criterion_examples() {
        let opts = SolverOptions::default();
        assert_eq!(gap_criterion(0.7, &flat(0.3, 2.0, 0.0), &opts).unwrap(), 0.0);
        assert_eq!(gap_criterion(0.7, &flat(0.3, 0.0, 3.0), &opts).unwrap(), 0.0);
        let g = gap_criterion(3f64.sqrt(), &flat(0.0, 2.0, 1e9), &opts).unwrap();
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn gap_is_even_in_delta_b() {
        let p = flat(-0.4, 1.7, 3.0);
        for d in [1e-3, 0.2, 1.1] {
            assert_eq!(gap_function(-0.3, d, &p), gap_function(-0.3, -d, &p));
        }
    }

    #[test]
    fn infinite_temperature_has_only_mean_field() {
        let opts = SolverOptions::default();
        let sol = solve_coupled(&flat(-0.3, 5.0, 0.0), &opts);
        assert_eq!(sol.branches.len(), 1);
        let mf = sol.mean_field();
        assert_eq!((mf.delta_m, mf.delta_b), (-0.3, 0.0));
        assert!(sol.flagged.is_empty());
    }

    #[test]
    fn zero_pairing_coupling_has_only_mean_field() {
        let sol = solve_coupled(&flat(-0.3, 0.0, 4.0), &SolverOptions::default());
        assert_eq!(sol.branches.len(), 1);
    }

    #[test]
    fn low_temperature_closed_form_gap() {
        let sol = solve_coupled(&flat(0.0, 2.0, 1e6), &SolverOptions::default());
        let p = sol.principal().unwrap();
        assert_abs_diff_eq!(p.delta_b, 3f64.sqrt(), epsilon = 1e-5);
        assert!(p.converged);
        assert!(p.residual_b <= 1e-8);
    }

    #[test]
    fn monotone_gap_for_repulsive_side() {
        // λ_B > 0 with sinh(β(W - μ)) > βW at every node: G strictly
        // decreasing in Δ_B at fixed Δ_M. Close to W = μ the tanh factor
        // still rises, so the margin is needed.
        let p = flat(0.0, 3.0, 4.0);
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let d = 0.02 * k as f64;
            let g = gap_function(2.0, d, &p);
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn tc_bound_examples() {
        let p = flat(-0.5, -0.6, 2.0);
        // Δ_M = 0, Δ_B = 0 -> W = μ everywhere
        let sol = GapSolution {
            delta_m: 0.0,
            delta_b: 0.0,
            branch: Branch::MeanFieldOnly,
            residual_m: 0.0,
            residual_b: 0.0,
            iterations: 0,
            converged: true,
        };
        assert_abs_diff_eq!(tc_bound(&sol, &p).unwrap(), 0.0, epsilon = 1e-15);
        let delta = 0.25;
        let sol = GapSolution {
            delta_m: -delta,
            ..sol
        };
        assert_abs_diff_eq!(
            tc_bound(&sol, &p).unwrap(),
            0.3 * delta / (1.0 - delta),
            epsilon = 1e-14
        );
        assert!(matches!(
            tc_bound(&sol, &flat(-0.5, 0.6, 2.0)),
            Err(SolverError::BoundRequiresAttraction(_))
        ));
        assert_abs_diff_eq!(tc_bound_closed_form(&p), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn find_tc_rejects_missing_transition() {
        let p = flat(0.0, 0.0, 1.0);
        assert!(matches!(
            find_tc(&p, 0.01, 10.0, &SolverOptions::default()),
            Err(SolverError::NoTransition { .. })
        ));
    }

    #[test]
    fn params_validation() {
        let b = Arc::new(ModelBasis::flat_band(1.0));
        assert!(ModelParams::new(0.0, 0.0, 0.0, 1.0, b.clone()).is_err());
        assert!(ModelParams::new(0.0, 0.0, 1.0, -1.0, b.clone()).is_err());
        assert!(ModelParams::new(f64::NAN, 0.0, 1.0, 1.0, b.clone()).is_err());
        assert!(ModelParams::new(0.0, 0.0, 1.0, 0.0, b).is_ok());
    }
}
