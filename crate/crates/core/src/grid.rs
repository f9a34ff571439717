//! Symmetric momentum grids and the separable form factors defined on them.
//!
//! Nodes are stored in ascending order with node `i` mirrored by node
//! `len - 1 - i`; the negative half is produced by negating the positive
//! half, so the reflection `p -> -p` is exact to the bit.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::GridError;

/// Quadrature rule used to place nodes on `[-P, P]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureScheme {
    UniformMidpoint,
    GaussLegendre,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    half_width: f64,
    scheme: QuadratureScheme,
}

impl MomentumGrid {
    pub fn new(half_width: f64, count: usize, scheme: QuadratureScheme) -> Result<Self, GridError> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(GridError::NonPositiveCutoff(half_width));
        }
        if count < 8 || !count.is_multiple_of(2) {
            return Err(GridError::BadCount(count));
        }
        let half = count / 2;
        let (pos_nodes, pos_weights): (Vec<f64>, Vec<f64>) = match scheme {
            QuadratureScheme::UniformMidpoint => {
                let h = 2.0 * half_width / count as f64;
                (0..half).map(|k| ((k as f64 + 0.5) * h, h)).unzip()
            }
            QuadratureScheme::GaussLegendre => {
                let rule = GaussLegendre::new(NonZeroUsize::new(half).expect("half >= 4"));
                // map [-1, 1] onto [0, P]
                let mut pairs: Vec<(f64, f64)> = rule
                    .as_node_weight_pairs()
                    .iter()
                    .map(|&(x, w)| (0.5 * half_width * (x + 1.0), 0.5 * half_width * w))
                    .collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                pairs.into_iter().unzip()
            }
        };

        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for k in (0..half).rev() {
            nodes.push(-pos_nodes[k]);
            weights.push(pos_weights[k]);
        }
        nodes.extend_from_slice(&pos_nodes);
        weights.extend_from_slice(&pos_weights);

        Ok(Self {
            nodes,
            weights,
            half_width,
            scheme,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn scheme(&self) -> QuadratureScheme {
        self.scheme
    }

    /// Index of the node at `-p_i`.
    #[inline]
    pub fn reflect(&self, i: usize) -> usize {
        self.nodes.len() - 1 - i
    }

    /// Smallest gap between adjacent nodes.
    pub fn min_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `Σ_i w_i f(p_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }

    /// `Σ_i w_i values_i`.
    pub fn weighted_sum(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).map(|(w, x)| w * x).sum()
    }
}

/// Radial envelope used for the form factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `exp(-(|p| - center)^2 / width^2)`.
    Gaussian { center: f64, width: f64 },
    /// Constant magnitude across the whole grid.
    Flat,
}

impl Profile {
    fn envelope(&self, abs_p: f64) -> f64 {
        match *self {
            Profile::Gaussian { center, width } => {
                let x = (abs_p - center) / width;
                (-x * x).exp()
            }
            Profile::Flat => 1.0,
        }
    }

    fn validate(&self) -> Result<(), GridError> {
        match *self {
            Profile::Gaussian { center, width } => {
                if !(width.is_finite() && width > 0.0) || !center.is_finite() {
                    return Err(GridError::NonPositiveWidth(width));
                }
                Ok(())
            }
            Profile::Flat => Ok(()),
        }
    }

    /// Envelope on the positive half of the grid, in ascending node order.
    fn positive_half(&self, grid: &MomentumGrid) -> Result<Vec<f64>, GridError> {
        self.validate()?;
        let half = grid.len() / 2;
        Ok(grid.nodes()[half..].iter().map(|&p| self.envelope(p)).collect())
    }
}

/// Odd, L²-normalized pairing form factor `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormFactorV {
    values: Vec<f64>,
    profile: Profile,
}

impl FormFactorV {
    pub fn new(grid: &MomentumGrid, profile: Profile) -> Result<Self, GridError> {
        let half = grid.len() / 2;
        let env = profile.positive_half(grid)?;
        let mass: f64 = 2.0 * env
            .iter()
            .zip(&grid.weights()[half..])
            .map(|(g, w)| w * g * g)
            .sum::<f64>();
        if mass.is_nan() || mass < 1e-300 {
            return Err(GridError::DegenerateMass(mass));
        }
        let norm = mass.sqrt();
        let pos: Vec<f64> = env.iter().map(|g| g / norm).collect();
        Ok(Self {
            values: mirror(&pos, |x| -x),
            profile,
        })
    }

    pub fn gaussian(grid: &MomentumGrid, center: f64, width: f64) -> Result<Self, GridError> {
        Self::new(grid, Profile::Gaussian { center, width })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }
}

/// Even, L¹-normalized weight `u` of the reduced mean-field kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightU {
    values: Vec<f64>,
    profile: Profile,
}

impl WeightU {
    pub fn new(grid: &MomentumGrid, profile: Profile) -> Result<Self, GridError> {
        let half = grid.len() / 2;
        let env = profile.positive_half(grid)?;
        let mass: f64 = 2.0 * env
            .iter()
            .zip(&grid.weights()[half..])
            .map(|(g, w)| w * g)
            .sum::<f64>();
        if mass.is_nan() || mass < 1e-300 {
            return Err(GridError::DegenerateMass(mass));
        }
        let pos: Vec<f64> = env.iter().map(|g| g / mass).collect();
        Ok(Self {
            values: mirror(&pos, |x| x),
            profile,
        })
    }

    pub fn gaussian(grid: &MomentumGrid, center: f64, width: f64) -> Result<Self, GridError> {
        Self::new(grid, Profile::Gaussian { center, width })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }
}

fn mirror(pos: &[f64], reflect: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out: Vec<f64> = pos.iter().rev().map(|&x| reflect(x)).collect();
    out.extend_from_slice(pos);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn midpoint_small_grid() {
        let g = MomentumGrid::new(1.0, 8, QuadratureScheme::UniformMidpoint).unwrap();
        assert_eq!(g.len(), 8);
        assert_abs_diff_eq!(g.nodes()[4], 0.125, epsilon = 1e-15);
        assert!(g.weights().iter().all(|&w| (w - 0.25).abs() < 1e-15));
    }

    #[test]
    fn four_node_example_layout() {
        // N = 4 is below the public minimum; check the layout rule directly.
        let h = 2.0 / 4.0;
        let pos: Vec<f64> = (0..2).map(|k| (k as f64 + 0.5) * h).collect();
        let nodes = mirror(&pos, |x| -x);
        assert_eq!(nodes, vec![-0.75, -0.25, 0.25, 0.75]);
    }

    #[test]
    fn rejects_bad_inputs() {
        use QuadratureScheme::*;
        assert_eq!(
            MomentumGrid::new(1.0, 9, UniformMidpoint),
            Err(GridError::BadCount(9))
        );
        assert_eq!(
            MomentumGrid::new(1.0, 6, UniformMidpoint),
            Err(GridError::BadCount(6))
        );
        assert!(matches!(
            MomentumGrid::new(0.0, 8, GaussLegendre),
            Err(GridError::NonPositiveCutoff(_))
        ));
        assert!(matches!(
            MomentumGrid::new(-2.0, 8, UniformMidpoint),
            Err(GridError::NonPositiveCutoff(_))
        ));
    }

    #[test]
    fn midpoint_weights_sum_to_length() {
        let g = MomentumGrid::new(10.0, 2048, QuadratureScheme::UniformMidpoint).unwrap();
        assert_abs_diff_eq!(g.weights().iter().sum::<f64>(), 20.0, epsilon = 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_p_squared() {
        let g = MomentumGrid::new(10.0, 256, QuadratureScheme::GaussLegendre).unwrap();
        assert_abs_diff_eq!(g.integrate(|p| p * p), 2000.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g.weights().iter().sum::<f64>(), 20.0, epsilon = 1e-10);
    }

    #[test]
    fn reflection_is_exact() {
        for scheme in [QuadratureScheme::UniformMidpoint, QuadratureScheme::GaussLegendre] {
            let g = MomentumGrid::new(3.0, 64, scheme).unwrap();
            for i in 0..g.len() {
                let j = g.reflect(i);
                assert_eq!(g.nodes()[j], -g.nodes()[i]);
                assert_eq!(g.weights()[j], g.weights()[i]);
                assert!(g.nodes()[i] != 0.0);
                assert!(g.weights()[i] > 0.0);
            }
            assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn v_is_odd_and_normalized() {
        let g = MomentumGrid::new(10.0, 2048, QuadratureScheme::UniformMidpoint).unwrap();
        let v = FormFactorV::gaussian(&g, 1.0, 0.5).unwrap();
        let vals = v.values();
        let l2: f64 = g.weighted_sum(&vals.iter().map(|x| x * x).collect::<Vec<_>>());
        assert_abs_diff_eq!(l2, 1.0, epsilon = 1e-12);
        let half = g.len() / 2;
        let w = g.weights();
        let paired: f64 = (0..half)
            .map(|i| w[i] * vals[i] + w[g.reflect(i)] * vals[g.reflect(i)])
            .sum();
        assert_eq!(paired, 0.0);
        for i in 0..g.len() {
            assert_eq!(vals[g.reflect(i)], -vals[i]);
        }
    }

    #[test]
    fn v_peaks_on_the_shell() {
        let g = MomentumGrid::new(10.0, 2048, QuadratureScheme::UniformMidpoint).unwrap();
        let v = FormFactorV::gaussian(&g, 1.0, 0.5).unwrap();
        let (imax, _) = v
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let (imin, _) = v
            .values()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let h = g.min_spacing();
        assert!((g.nodes()[imax] - 1.0).abs() <= h);
        assert!((g.nodes()[imin] + 1.0).abs() <= h);
    }

    #[test]
    fn u_is_even_and_normalized() {
        let g = MomentumGrid::new(10.0, 2048, QuadratureScheme::UniformMidpoint).unwrap();
        let u = WeightU::gaussian(&g, 1.0, 0.5).unwrap();
        assert_abs_diff_eq!(g.weighted_sum(u.values()), 1.0, epsilon = 1e-12);
        let vals = u.values();
        let max = vals.iter().cloned().fold(f64::MIN, f64::max);
        for i in 0..g.len() {
            assert_eq!(vals[g.reflect(i)], vals[i]);
            assert!(vals[i] >= 0.0);
        }
        let h = g.min_spacing();
        let i1 = vals.iter().position(|&x| x == max).unwrap();
        assert!((g.nodes()[i1].abs() - 1.0).abs() <= h);
    }

    #[test]
    fn u_flattens_for_wide_envelope() {
        let g = MomentumGrid::new(2.0, 64, QuadratureScheme::GaussLegendre).unwrap();
        let u = WeightU::gaussian(&g, 0.0, 1e6).unwrap();
        for &x in u.values() {
            assert_abs_diff_eq!(x, 0.25, epsilon = 1e-10);
        }
        let flat = WeightU::new(&g, Profile::Flat).unwrap();
        for &x in flat.values() {
            assert_abs_diff_eq!(x, 0.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn envelope_off_grid_is_rejected() {
        let g = MomentumGrid::new(1.0, 16, QuadratureScheme::UniformMidpoint).unwrap();
        assert!(matches!(
            FormFactorV::gaussian(&g, 500.0, 0.01),
            Err(GridError::DegenerateMass(_))
        ));
        assert!(matches!(
            WeightU::gaussian(&g, 500.0, 0.01),
            Err(GridError::DegenerateMass(_))
        ));
        assert!(matches!(
            FormFactorV::gaussian(&g, 0.0, 0.0),
            Err(GridError::NonPositiveWidth(_))
        ));
    }

    #[test]
    fn quadrature_converges_under_refinement() {
        let f = |p: f64| (-(p - 1.0).powi(2) / 0.5).exp() * (1.0 + p * p).recip();
        let mid = |n| {
            MomentumGrid::new(10.0, n, QuadratureScheme::UniformMidpoint)
                .unwrap()
                .integrate(f)
        };
        assert!((mid(1024) - mid(2048)).abs() < 1e-8);
        let gl = |n| {
            MomentumGrid::new(10.0, n, QuadratureScheme::GaussLegendre)
                .unwrap()
                .integrate(f)
        };
        assert!((gl(128) - gl(256)).abs() < 1e-8);
    }
}
