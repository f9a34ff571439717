//! Gaussian smearing of pair and density expectations as the smearing
//! parameter `κ` grows.
//!
//! In the pairing channel the term carrying `⟨a a⟩⟨a* a*⟩` is pinned to zero
//! total momentum by its delta functions and survives, while the exchange
//! term keeps a Gaussian in `p + p'` and decays like `κ^{-d/2}`. The density
//! channel mirrors this with `q - p` in place of `p + p'`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::ScalingError;
use crate::grid::MomentumGrid;
use crate::solver::ModelParams;
use crate::thermal::{fermi, Gaps, QuasiSpectrum};

/// Values at or below this are treated as underflowed when fitting.
pub const USABLE_FLOOR: f64 = 1e-14;
pub const MIN_USABLE_POINTS: usize = 6;

/// Geometric ladder `κ_k = 2^k / P²`, `k = 0 .. octaves`.
pub fn kappa_ladder(grid: &MomentumGrid, octaves: usize) -> Vec<f64> {
    let base = 1.0 / (grid.half_width() * grid.half_width());
    (0..=octaves).map(|k| base * 2f64.powi(k as i32)).collect()
}

pub const DEFAULT_OCTAVES: usize = 14;

/// `(Σ_i w_i e^{-κ(p_i + p_{-i})²} v_i [p_i])²`.
pub fn surviving_term(kappa: f64, grid: &MomentumGrid, v: &[f64], bracket: &[f64]) -> f64 {
    let p = grid.nodes();
    let w = grid.weights();
    let amp: f64 = (0..grid.len())
        .map(|i| {
            let total = p[i] + p[grid.reflect(i)];
            w[i] * (-kappa * total * total).exp() * v[i] * bracket[i]
        })
        .sum();
    amp * amp
}

/// `Σ_ij w_i w_j e^{-2κ(p_i + p_j)²} |v_i| |v_j| {p_i} {p_j}`.
pub fn vanishing_term(kappa: f64, grid: &MomentumGrid, v: &[f64], brace: &[f64]) -> f64 {
    let f: Vec<f64> = v.iter().zip(brace).map(|(a, b)| a.abs() * b).collect();
    smeared_quadratic(grid, &f, |pi, pj| {
        let s = pi + pj;
        (-2.0 * kappa * s * s).exp()
    })
}

/// Leading large-`κ` behaviour of [`vanishing_term`] on a line:
/// `sqrt(π / 2κ) Σ w v² {p}²`.
pub fn exchange_asymptote(kappa: f64, grid: &MomentumGrid, v: &[f64], brace: &[f64]) -> f64 {
    let moment: f64 = grid
        .weights()
        .iter()
        .zip(v)
        .zip(brace)
        .map(|((w, v), b)| w * v * v * b * b)
        .sum();
    (std::f64::consts::PI / (2.0 * kappa)).sqrt() * moment
}

/// `Σ_ij w_i w_j K(p_i, p_j) f_i f_j`, summed row by row in node order.
fn smeared_quadratic(grid: &MomentumGrid, f: &[f64], kernel: impl Fn(f64, f64) -> f64) -> f64 {
    let p = grid.nodes();
    let w = grid.weights();
    let mut total = 0.0;
    for i in 0..grid.len() {
        let mut row = 0.0;
        for j in 0..grid.len() {
            row += w[j] * kernel(p[i], p[j]) * f[j];
        }
        total += w[i] * f[i] * row;
    }
    total
}

/// Least-squares slope of `ln V` against `ln κ` over the tail half of the
/// usable points.
pub fn fit_decay_exponent(kappas: &[f64], values: &[f64]) -> Result<f64, ScalingError> {
    let usable: Vec<(f64, f64)> = kappas
        .iter()
        .zip(values)
        .filter(|(_, &v)| v.is_finite() && v > USABLE_FLOOR)
        .map(|(&k, &v)| (k.ln(), v.ln()))
        .collect();
    if usable.len() < MIN_USABLE_POINTS {
        return Err(ScalingError::InsufficientDynamicRange {
            usable: usable.len(),
            required: MIN_USABLE_POINTS,
        });
    }
    let tail = &usable[usable.len() / 2..];
    let n = tail.len() as f64;
    let mx = tail.iter().map(|t| t.0).sum::<f64>() / n;
    let my = tail.iter().map(|t| t.1).sum::<f64>() / n;
    let sxy: f64 = tail.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = tail.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaSeries {
    pub kappas: Vec<f64>,
    pub surviving: Vec<f64>,
    pub vanishing: Vec<f64>,
    pub asymptote: Vec<f64>,
    pub exponent: f64,
}

impl KappaSeries {
    /// Relative change of the surviving term over the last octave.
    pub fn surviving_drift(&self) -> f64 {
        let n = self.surviving.len();
        let (last, prev) = (self.surviving[n - 1], self.surviving[n - 2]);
        if last == 0.0 {
            return if prev == 0.0 { 0.0 } else { f64::INFINITY };
        }
        ((last - prev) / last).abs()
    }
}

/// Pairing-channel probe on the state with the given gaps.
pub fn probe(params: &ModelParams, gaps: Gaps, kappas: &[f64]) -> Result<KappaSeries, ScalingError> {
    let basis = &params.basis;
    let spec = QuasiSpectrum::evaluate(&basis.dispersion, &basis.v, gaps, params.mu, params.beta);
    let grid = &basis.grid;
    let v = basis.v.values();
    let rows: Vec<(f64, f64, f64)> = kappas
        .par_iter()
        .map(|&k| {
            (
                surviving_term(k, grid, v, &spec.bracket),
                vanishing_term(k, grid, v, &spec.brace),
                exchange_asymptote(k, grid, v, &spec.brace),
            )
        })
        .collect();
    let vanishing: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let exponent = fit_decay_exponent(kappas, &vanishing)?;
    Ok(KappaSeries {
        kappas: kappas.to_vec(),
        surviving: rows.iter().map(|r| r.0).collect(),
        vanishing,
        asymptote: rows.iter().map(|r| r.2).collect(),
        exponent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySeries {
    pub kappas: Vec<f64>,
    /// `Σ w u {p}` with the smearing pinned to `q = p`.
    pub diagonal: Vec<f64>,
    /// `Σ w u / (1 + e^{β(ω + Δ_M - μ)})`.
    pub fermi_reference: f64,
    /// `Σ_ij w_i w_j e^{-2κ(p_i - p_j)²} u_i u_j [p_i] [p_j]`.
    pub pairing_channel: Vec<f64>,
    pub exponent: Option<f64>,
}

/// Density-channel probe: smearing in `q - p` instead of `p + p'`.
pub fn probe_density(params: &ModelParams, gaps: Gaps, kappas: &[f64]) -> DensitySeries {
    let basis = &params.basis;
    let spec = QuasiSpectrum::evaluate(&basis.dispersion, &basis.v, gaps, params.mu, params.beta);
    let grid = &basis.grid;
    let u = basis.u.values();
    let w = grid.weights();
    let f: Vec<f64> = u.iter().zip(&spec.bracket).map(|(a, b)| a * b).collect();
    let rows: Vec<(f64, f64)> = kappas
        .par_iter()
        .map(|&k| {
            let diag: f64 = (0..grid.len())
                .map(|i| {
                    let gap = grid.nodes()[i] - grid.nodes()[i];
                    w[i] * (-k * gap * gap).exp() * u[i] * spec.brace[i]
                })
                .sum();
            let exchange = smeared_quadratic(grid, &f, |pi, pj| {
                let d = pi - pj;
                (-2.0 * k * d * d).exp()
            });
            (diag, exchange)
        })
        .collect();
    let fermi_reference = basis
        .dispersion
        .values()
        .iter()
        .zip(u)
        .zip(w)
        .map(|((omega, u), w)| w * u * fermi(omega + gaps.delta_m - params.mu, params.beta))
        .sum();
    let pairing_channel: Vec<f64> = rows.iter().map(|r| r.1).collect();
    DensitySeries {
        kappas: kappas.to_vec(),
        diagonal: rows.iter().map(|r| r.0).collect(),
        fermi_reference,
        exponent: fit_decay_exponent(kappas, &pairing_channel).ok(),
        pairing_channel,
    }
}
