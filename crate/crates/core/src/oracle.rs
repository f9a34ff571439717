//! Brute-force check of the thermal kernels on a small fermionic Fock space.
//!
//! Each momentum pair `(p_j, -p_j)` contributes two modes, `2j` and `2j + 1`.
//! Creation and annihilation operators are dense matrices in the
//! occupation-number basis with Jordan-Wigner sign strings. The Gibbs state
//! `exp(-β (H - μ N_b)) / Z` comes from a symmetric eigendecomposition; the
//! closed-form kernels are never consulted while building it.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::OracleError;
use crate::thermal::{
    bracket_pairing, brace_occupation, coherence_factors, quasiparticle_energy, wick_four_point,
};

pub const MAX_PAIRS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePair {
    /// Dispersion `ω(p_j)`.
    pub omega: f64,
    /// Pairing field `Δ_B v(p_j)` on the positive member of the pair.
    pub delta_b_v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub delta_m: f64,
    pub pairs: Vec<ModePair>,
}

impl ModeSet {
    pub fn new(delta_m: f64, pairs: Vec<ModePair>) -> Result<Self, OracleError> {
        if pairs.is_empty() || pairs.len() > MAX_PAIRS {
            return Err(OracleError::PairCount {
                max: MAX_PAIRS,
                got: pairs.len(),
            });
        }
        if !delta_m.is_finite() || pairs.iter().any(|p| !(p.omega.is_finite() && p.delta_b_v.is_finite())) {
            return Err(OracleError::NonFinite);
        }
        Ok(Self { delta_m, pairs })
    }

    pub fn modes(&self) -> usize {
        2 * self.pairs.len()
    }

    /// `(xi, Δ_B v)` of mode `i`; the pairing field is odd across a pair.
    pub fn mode_fields(&self, i: usize) -> (f64, f64) {
        let pair = self.pairs[i / 2];
        let xi = pair.omega + self.delta_m;
        if i.is_multiple_of(2) {
            (xi, pair.delta_b_v)
        } else {
            (xi, -pair.delta_b_v)
        }
    }
}

/// Mode at the reflected momentum.
#[inline]
pub fn partner(i: usize) -> usize {
    i ^ 1
}

/// Dense annihilation operators `a_0 .. a_{M-1}` on `2^M` states.
#[derive(Debug, Clone)]
pub struct FockSpace {
    annihilators: Vec<DMatrix<f64>>,
}

impl FockSpace {
    pub fn new(modes: usize) -> Self {
        let dim = 1usize << modes;
        let annihilators = (0..modes)
            .map(|i| {
                let mut a = DMatrix::zeros(dim, dim);
                for n in 0..dim {
                    if n & (1 << i) != 0 {
                        let below = (n & ((1 << i) - 1)).count_ones();
                        let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
                        a[(n ^ (1 << i), n)] = sign;
                    }
                }
                a
            })
            .collect();
        Self { annihilators }
    }

    pub fn dim(&self) -> usize {
        self.annihilators.first().map_or(1, |a| a.nrows())
    }

    pub fn modes(&self) -> usize {
        self.annihilators.len()
    }

    pub fn a(&self, i: usize) -> &DMatrix<f64> {
        &self.annihilators[i]
    }

    pub fn a_dag(&self, i: usize) -> DMatrix<f64> {
        self.annihilators[i].transpose()
    }

    pub fn number(&self, i: usize) -> DMatrix<f64> {
        self.a_dag(i) * self.a(i)
    }
}

/// Maximum deviation of a family of operators from the canonical
/// anticommutation relations `{c_i, c_j†} = δ_ij`, `{c_i, c_j} = 0`.
pub fn car_residual(ops: &[DMatrix<f64>]) -> f64 {
    let dim = ops.first().map_or(0, |o| o.nrows());
    let id = DMatrix::<f64>::identity(dim, dim);
    let mut worst = 0.0f64;
    for (i, ci) in ops.iter().enumerate() {
        for (j, cj) in ops.iter().enumerate() {
            let cj_dag = cj.transpose();
            let mut mixed = ci * &cj_dag + &cj_dag * ci;
            if i == j {
                mixed -= &id;
            }
            let same = ci * cj + cj * ci;
            worst = worst.max(mixed.amax()).max(same.amax());
        }
    }
    worst
}

/// Quasiparticle annihilators `b_i = c a_i + s a†_{partner(i)}`.
pub fn bogoliubov_operators(modes: &ModeSet, space: &FockSpace) -> Vec<DMatrix<f64>> {
    (0..modes.modes())
        .map(|i| {
            let (xi, d) = modes.mode_fields(i);
            let (c, s) = coherence_factors(xi, d);
            space.a(i) * c + space.a_dag(partner(i)) * s
        })
        .collect()
}

/// Effective quadratic Hamiltonian and quasiparticle number operator.
pub fn build_operators(modes: &ModeSet) -> Result<(DMatrix<f64>, DMatrix<f64>), OracleError> {
    let space = FockSpace::new(modes.modes());
    Ok(build_on(modes, &space))
}

fn build_on(modes: &ModeSet, space: &FockSpace) -> (DMatrix<f64>, DMatrix<f64>) {
    let dim = space.dim();
    let mut h = DMatrix::zeros(dim, dim);
    for (j, pair) in modes.pairs.iter().enumerate() {
        let (p, m) = (2 * j, 2 * j + 1);
        let xi = pair.omega + modes.delta_m;
        h += (space.number(p) + space.number(m)) * xi;
        // both halves of the momentum integral collapse onto one term per pair
        let create_pair = space.a_dag(p) * space.a_dag(m);
        let annihilate_pair = space.a(m) * space.a(p);
        h += (create_pair + annihilate_pair) * pair.delta_b_v;
    }
    let mut n_b = DMatrix::zeros(dim, dim);
    for b in bogoliubov_operators(modes, space) {
        n_b += b.transpose() * &b;
    }
    (h, n_b)
}

/// Grand-canonical density matrix `exp(-β (H - μ N_b)) / Z`.
#[derive(Debug, Clone)]
pub struct GibbsState {
    rho: DMatrix<f64>,
}

impl GibbsState {
    pub fn new(h: &DMatrix<f64>, n_b: &DMatrix<f64>, beta: f64, mu: f64) -> Self {
        let dim = h.nrows();
        if beta == 0.0 {
            return Self {
                rho: DMatrix::identity(dim, dim) / dim as f64,
            };
        }
        let k = h - n_b * mu;
        let k = (&k + k.transpose()) * 0.5;
        let eig = SymmetricEigen::new(k);
        let e_min = eig.eigenvalues.min();
        let boltzmann = eig.eigenvalues.map(|e| (-beta * (e - e_min)).exp());
        let z = boltzmann.sum();
        let v = &eig.eigenvectors;
        let rho = v * DMatrix::from_diagonal(&(boltzmann / z)) * v.transpose();
        Self { rho }
    }

    pub fn rho(&self) -> &DMatrix<f64> {
        &self.rho
    }

    /// `tr(ρ X)`.
    pub fn expect(&self, op: &DMatrix<f64>) -> f64 {
        self.rho.component_mul(&op.transpose()).sum()
    }
}

/// Exact per-mode `⟨a†a⟩` and per-pair `⟨a(p) a(-p)⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsExpectations {
    pub occupation: Vec<f64>,
    pub pairing: Vec<f64>,
}

pub fn gibbs_expectations(
    h: &DMatrix<f64>,
    n_b: &DMatrix<f64>,
    beta: f64,
    mu: f64,
) -> GibbsExpectations {
    let modes = h.nrows().trailing_zeros() as usize;
    let space = FockSpace::new(modes);
    let state = GibbsState::new(h, n_b, beta, mu);
    let occupation = (0..modes).map(|i| state.expect(&space.number(i))).collect();
    let pairing = (0..modes / 2)
        .map(|j| state.expect(&(space.a(2 * j) * space.a(2 * j + 1))))
        .collect();
    GibbsExpectations {
        occupation,
        pairing,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub exact_occupation: f64,
    pub predicted_occupation: f64,
    pub exact_pairing: f64,
    pub predicted_pairing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub pairs: Vec<PairComparison>,
    /// Over all `⟨a†_i a_j⟩` and `⟨a_i a_j⟩`.
    pub two_point_max_dev: f64,
    /// Over all `⟨a†_q a†_q' a_p a_p'⟩` against the Wick combination.
    pub four_point_max_dev: f64,
    /// The same comparison with the pairing term entering as `+[q][p]`.
    pub flipped_pairing_max_dev: f64,
    pub four_point_count: usize,
}

impl OracleReport {
    pub fn max_deviation(&self) -> f64 {
        self.two_point_max_dev.max(self.four_point_max_dev)
    }
}

/// Closed-form `({p}, [p])` for every mode.
pub fn predicted_kernels(modes: &ModeSet, beta: f64, mu: f64) -> (Vec<f64>, Vec<f64>) {
    (0..modes.modes())
        .map(|i| {
            let (xi, d) = modes.mode_fields(i);
            let w = quasiparticle_energy(xi, d);
            let (c, s) = coherence_factors(xi, d);
            (
                brace_occupation(c, s, w, mu, beta),
                bracket_pairing(c, s, w, mu, beta),
            )
        })
        .unzip()
}

pub fn compare(modes: &ModeSet, beta: f64, mu: f64) -> OracleReport {
    let m = modes.modes();
    let space = FockSpace::new(m);
    let (h, n_b) = build_on(modes, &space);
    let state = GibbsState::new(&h, &n_b, beta, mu);
    let (brace, bracket) = predicted_kernels(modes, beta, mu);

    let mut two_point = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let hop = state.expect(&(space.a_dag(i) * space.a(j)));
            let want = if i == j { brace[i] } else { 0.0 };
            two_point = two_point.max((hop - want).abs());
            let pair = state.expect(&(space.a(i) * space.a(j)));
            let want = if j == partner(i) { bracket[i] } else { 0.0 };
            two_point = two_point.max((pair - want).abs());
        }
    }

    // ⟨a†_q a†_q' a_p a_p'⟩ = Σ (a_p a_p' ρ) ∘ (a_q' a_q)
    let pairs_ops: Vec<DMatrix<f64>> = (0..m * m)
        .map(|k| space.a(k / m) * space.a(k % m))
        .collect();
    let with_rho: Vec<DMatrix<f64>> = pairs_ops.iter().map(|b| b * state.rho()).collect();
    let mut four_point = 0.0f64;
    let mut flipped = 0.0f64;
    let mut count = 0;
    for q in 0..m {
        for q2 in 0..m {
            let creators = &pairs_ops[q2 * m + q];
            for p in 0..m {
                for p2 in 0..m {
                    let exact = with_rho[p * m + p2].component_mul(creators).sum();
                    let idx = (q, q2, p, p2);
                    let wick = wick_four_point(partner, &brace, &bracket, idx);
                    four_point = four_point.max((exact - wick).abs());
                    let pairing_term = if q2 == partner(q) && p2 == partner(p) {
                        bracket[q2] * bracket[p]
                    } else {
                        0.0
                    };
                    let printed = wick - 2.0 * pairing_term;
                    flipped = flipped.max((exact - printed).abs());
                    count += 1;
                }
            }
        }
    }

    let pairs = (0..modes.pairs.len())
        .map(|j| PairComparison {
            exact_occupation: state.expect(&space.number(2 * j)),
            predicted_occupation: brace[2 * j],
            exact_pairing: state.expect(&(space.a(2 * j) * space.a(2 * j + 1))),
            predicted_pairing: bracket[2 * j],
        })
        .collect();

    OracleReport {
        pairs,
        two_point_max_dev: two_point,
        four_point_max_dev: four_point,
        flipped_pairing_max_dev: flipped,
        four_point_count: count,
    }
}
