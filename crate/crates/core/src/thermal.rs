//! Bogoliubov diagonalization data and the thermal two-point kernels.
//!
//! For a mode with single-particle energy `xi = ω + Δ_M` and pairing field
//! `d = Δ_B v(p)`, the quasiparticle energy is `W = sqrt(xi² + d²)` and the
//! coherence factors satisfy `c² - s² = xi / W`, `2cs = d / W`. The thermal
//! state weighs quasiparticles by `exp(-β (W - μ))`, which gives
//!
//! ```text
//! {p} = c² f(W - μ) + s² f(μ - W)        f(x) = 1 / (1 + e^{βx})
//! [p] = c s tanh(β (W - μ) / 2)
//! ```

use crate::grid::{FormFactorV, MomentumGrid};

/// Lower clamp applied to quasiparticle energies.
pub const ENERGY_FLOOR: f64 = 1e-12;

/// Below this value of `c` the transformation is treated as a pure particle-hole swap.
const C_DEGENERATE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DispersionKind {
    /// `ω(p) = omega0`.
    Flat { omega0: f64 },
    /// `ω(p) = p² + offset`.
    Quadratic { offset: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dispersion {
    kind: DispersionKind,
    values: Vec<f64>,
}

impl Dispersion {
    pub fn new(grid: &MomentumGrid, kind: DispersionKind) -> Self {
        let values = grid
            .nodes()
            .iter()
            .map(|&p| match kind {
                DispersionKind::Flat { omega0 } => omega0,
                // p² is bit-identical for ±p
                DispersionKind::Quadratic { offset } => p * p + offset,
            })
            .collect();
        Self { kind, values }
    }

    pub fn kind(&self) -> DispersionKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Scalar gap amplitudes; the momentum profile of the pairing gap is `Δ_B v(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaps {
    pub delta_m: f64,
    pub delta_b: f64,
}

/// `W = sqrt(xi² + d²)`, clamped below by [`ENERGY_FLOOR`].
#[inline]
pub fn quasiparticle_energy(xi: f64, delta_b_k: f64) -> f64 {
    xi.hypot(delta_b_k).max(ENERGY_FLOOR)
}

/// Real Bogoliubov coefficients `(c, s)` for a mode.
///
/// `c ≥ 0` always. Without pairing the map is the identity for `xi ≥ 0` and
/// a particle-hole swap (`c = 0`, `s = ±1`) for `xi < 0`.
pub fn coherence_factors(xi: f64, delta_b_k: f64) -> (f64, f64) {
    if delta_b_k == 0.0 {
        return if xi >= 0.0 {
            (1.0, 0.0)
        } else {
            (0.0, delta_b_k.signum())
        };
    }
    let w = quasiparticle_energy(xi, delta_b_k);
    // 1 + xi/W loses all precision when xi ≈ -W; use d²/(W(W - xi)) there
    let c2 = if xi >= 0.0 {
        0.5 * (1.0 + xi / w)
    } else {
        0.5 * delta_b_k * delta_b_k / (w * (w - xi))
    };
    let c = c2.sqrt();
    if c > C_DEGENERATE {
        (c, delta_b_k / (2.0 * c * w))
    } else {
        (0.0, delta_b_k.signum())
    }
}

/// Fermi function `1 / (1 + e^{βx})`, overflow-safe. Exactly 1/2 at `β = 0`.
#[inline]
pub fn fermi(x: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.5;
    }
    let y = beta * x;
    if y >= 0.0 {
        let e = (-y).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + y.exp())
    }
}

/// Occupation kernel `{p}`.
#[inline]
pub fn brace_occupation(c: f64, s: f64, w: f64, mu: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.5;
    }
    c * c * fermi(w - mu, beta) + s * s * fermi(mu - w, beta)
}

/// Pairing kernel `[p]`.
#[inline]
pub fn bracket_pairing(c: f64, s: f64, w: f64, mu: f64, beta: f64) -> f64 {
    if beta == 0.0 || s == 0.0 {
        return 0.0;
    }
    c * s * (0.5 * beta * (w - mu)).tanh()
}

/// Per-node Bogoliubov coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoCoeffs {
    pub c: Vec<f64>,
    pub s: Vec<f64>,
}

/// Quasiparticle spectrum and thermal kernels on every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiSpectrum {
    pub energy: Vec<f64>,
    pub brace: Vec<f64>,
    pub bracket: Vec<f64>,
    pub coeffs: BogoCoeffs,
}

impl QuasiSpectrum {
    pub fn evaluate(
        dispersion: &Dispersion,
        v: &FormFactorV,
        gaps: Gaps,
        mu: f64,
        beta: f64,
    ) -> Self {
        let n = dispersion.values().len();
        let mut energy = Vec::with_capacity(n);
        let mut brace = Vec::with_capacity(n);
        let mut bracket = Vec::with_capacity(n);
        let mut c_all = Vec::with_capacity(n);
        let mut s_all = Vec::with_capacity(n);
        for (&omega, &vk) in dispersion.values().iter().zip(v.values()) {
            let xi = omega + gaps.delta_m;
            let d = gaps.delta_b * vk;
            let w = quasiparticle_energy(xi, d);
            let (c, s) = coherence_factors(xi, d);
            energy.push(w);
            brace.push(brace_occupation(c, s, w, mu, beta));
            bracket.push(bracket_pairing(c, s, w, mu, beta));
            c_all.push(c);
            s_all.push(s);
        }
        Self {
            energy,
            brace,
            bracket,
            coeffs: BogoCoeffs { c: c_all, s: s_all },
        }
    }

    /// Discrete four-point function `⟨a*(q) a*(q') a(p) a(p')⟩` on grid nodes,
    /// with Dirac deltas realized as Kronecker deltas over quadrature weights.
    pub fn four_point(&self, grid: &MomentumGrid, q: usize, q2: usize, p: usize, p2: usize) -> f64 {
        let w = grid.weights();
        let mut out = 0.0;
        if q2 == grid.reflect(q) && p2 == grid.reflect(p) {
            out += self.bracket[q2] * self.bracket[p] / (w[q] * w[p]);
        }
        if p == q && p2 == q2 {
            out -= self.brace[p] * self.brace[p2] / (w[p] * w[p2]);
        }
        if p == q2 && p2 == q {
            out += self.brace[p] * self.brace[p2] / (w[p] * w[p2]);
        }
        out
    }
}

/// Wick combination for discrete modes with unit normalization.
///
/// `partner(i)` is the mode at the reflected momentum; `brace` and `bracket`
/// hold `⟨a*_i a_i⟩` and `⟨a_i a_{partner(i)}⟩`. The pairing contribution is
/// `⟨a*_q a*_{q'}⟩⟨a_p a_{p'}⟩ = [q'][p]`, which equals `-[q][p]` because the
/// pairing kernel is odd.
pub fn wick_four_point(
    partner: impl Fn(usize) -> usize,
    brace: &[f64],
    bracket: &[f64],
    (q, q2, p, p2): (usize, usize, usize, usize),
) -> f64 {
    let mut out = 0.0;
    if q2 == partner(q) && p2 == partner(p) {
        out += bracket[q2] * bracket[p];
    }
    if p == q && p2 == q2 {
        out -= brace[p] * brace[p2];
    }
    if p == q2 && p2 == q {
        out += brace[p] * brace[p2];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Profile, QuadratureScheme};
    use approx::assert_abs_diff_eq;

    #[test]
    fn energy_examples() {
        assert_eq!(quasiparticle_energy(1.0, 0.0), 1.0);
        assert_abs_diff_eq!(quasiparticle_energy(0.8, 0.6), 1.0, epsilon = 1e-15);
        assert_eq!(quasiparticle_energy(0.0, 0.0), 1e-12);
    }

    #[test]
    fn coherence_examples() {
        assert_eq!(coherence_factors(1.0, 0.0), (1.0, 0.0));
        let (c, s) = coherence_factors(0.0, 0.5);
        assert_abs_diff_eq!(c, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s, 0.5f64.sqrt(), epsilon = 1e-15);
        let (c, s) = coherence_factors(0.8, 0.6);
        assert_abs_diff_eq!(c, 0.9f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s, 0.1f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn inverted_band_without_pairing_swaps() {
        let (c, s) = coherence_factors(-2.0, 0.0);
        assert_eq!((c, s), (0.0, 1.0));
        let (c, s) = coherence_factors(-2.0, -0.0);
        assert_eq!((c, s), (0.0, -1.0));
    }

    #[test]
    fn deep_inverted_band_keeps_identities() {
        let (xi, d) = (-1.0, 1e-5);
        let (c, s) = coherence_factors(xi, d);
        let w = quasiparticle_energy(xi, d);
        assert_abs_diff_eq!(c * c + s * s, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c * c - s * s, xi / w, epsilon = 1e-10);
        assert_abs_diff_eq!(2.0 * c * s, d / w, epsilon = 1e-10);
    }

    #[test]
    fn brace_examples() {
        assert_eq!(brace_occupation(0.6, 0.8, 3.0, 1.0, 0.0), 0.5);
        assert_eq!(brace_occupation(1.0, 0.0, 2.0, 1.0, 1e9), 0.0);
        // 0.9/(1+e) + 0.1/(1+e^-1)
        let expected = 0.9 / (1.0 + 1f64.exp()) + 0.1 / (1.0 + (-1f64).exp());
        assert_abs_diff_eq!(expected, 0.315153, epsilon = 1e-6);
        let got = brace_occupation(0.9f64.sqrt(), 0.1f64.sqrt(), 2.0, 1.0, 1.0);
        assert_abs_diff_eq!(got, expected, epsilon = 1e-15);
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(bracket_pairing(0.6, 0.8, 3.0, 1.0, 0.0), 0.0);
        assert_eq!(bracket_pairing(1.0, 0.0, 3.0, 1.0, 2.0), 0.0);
        let r = 0.5f64.sqrt();
        let got = bracket_pairing(r, r, 3.0, 1.0, 1.0);
        assert_abs_diff_eq!(got, 0.380797, epsilon = 1e-6);
        assert_abs_diff_eq!(got, 0.5 * 1f64.tanh(), epsilon = 1e-15);
    }

    #[test]
    fn fermi_is_overflow_safe() {
        assert_eq!(fermi(1.0, 1e308), 0.0);
        assert_eq!(fermi(-1.0, 1e308), 1.0);
        assert_abs_diff_eq!(fermi(0.3, 2.0) + fermi(-0.3, 2.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn brace_decreases_with_energy_without_pairing() {
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let w = 0.1 + 0.05 * k as f64;
            let b = brace_occupation(1.0, 0.0, w, 1.0, 3.0);
            assert!(b < prev);
            prev = b;
        }
    }

    fn spectrum() -> (MomentumGrid, QuasiSpectrum) {
        let g = MomentumGrid::new(4.0, 64, QuadratureScheme::UniformMidpoint).unwrap();
        let v = FormFactorV::new(&g, Profile::Gaussian { center: 1.0, width: 0.5 }).unwrap();
        let d = Dispersion::new(&g, DispersionKind::Quadratic { offset: -0.5 });
        let gaps = Gaps { delta_m: -0.2, delta_b: 0.7 };
        let spec = QuasiSpectrum::evaluate(&d, &v, gaps, 0.4, 3.0);
        (g, spec)
    }

    #[test]
    fn kernels_respect_reflection() {
        let (g, spec) = spectrum();
        for i in 0..g.len() {
            let j = g.reflect(i);
            assert_eq!(spec.energy[i], spec.energy[j]);
            assert!((spec.brace[i] - spec.brace[j]).abs() <= 1e-14);
            assert!((spec.bracket[i] + spec.bracket[j]).abs() <= 1e-14);
            assert_eq!(spec.coeffs.c[i], spec.coeffs.c[j]);
            assert_eq!(spec.coeffs.s[i], -spec.coeffs.s[j]);
            assert!((0.0..=1.0).contains(&spec.brace[i]));
            assert!(spec.bracket[i].abs() <= 0.5);
        }
    }

    #[test]
    fn four_point_term_selection() {
        let (g, spec) = spectrum();
        let w = g.weights();
        let (q, p) = (10, 20);
        let (qr, pr) = (g.reflect(q), g.reflect(p));
        // pairing only
        let got = spec.four_point(&g, q, qr, p, pr);
        assert_abs_diff_eq!(got, -spec.bracket[q] * spec.bracket[p] / (w[q] * w[p]), epsilon = 1e-14);
        // direct only
        let got = spec.four_point(&g, p, 30, p, 30);
        assert_abs_diff_eq!(got, -spec.brace[p] * spec.brace[30] / (w[p] * w[30]), epsilon = 1e-14);
        // exchange only
        let got = spec.four_point(&g, 30, p, p, 30);
        assert_abs_diff_eq!(got, spec.brace[p] * spec.brace[30] / (w[p] * w[30]), epsilon = 1e-14);
        // Pauli: a*(q) a*(q) = 0
        assert_eq!(spec.four_point(&g, p, p, p, p), 0.0);
    }

    #[test]
    fn four_point_pairing_vanishes_at_infinite_temperature() {
        let g = MomentumGrid::new(4.0, 16, QuadratureScheme::UniformMidpoint).unwrap();
        let v = FormFactorV::new(&g, Profile::Flat).unwrap();
        let d = Dispersion::new(&g, DispersionKind::Flat { omega0: 1.0 });
        let spec = QuasiSpectrum::evaluate(&d, &v, Gaps { delta_m: 0.1, delta_b: 0.5 }, 1.0, 0.0);
        assert_eq!(spec.four_point(&g, 2, g.reflect(2), 5, g.reflect(5)), 0.0);
    }
}
