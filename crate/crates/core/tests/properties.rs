use std::sync::Arc;

use gapforge::grid::{FormFactorV, MomentumGrid, Profile, QuadratureScheme, WeightU};
use gapforge::solver::{gap_function, mean_field_rhs, ModelBasis, ModelParams};
use gapforge::thermal::{
    bracket_pairing, brace_occupation, coherence_factors, quasiparticle_energy, DispersionKind,
};
use proptest::prelude::*;

fn scheme() -> impl Strategy<Value = QuadratureScheme> {
    prop_oneof![
        Just(QuadratureScheme::UniformMidpoint),
        Just(QuadratureScheme::GaussLegendre)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_reflection_is_exact(p in 0.5f64..20.0, half in 4usize..300, s in scheme()) {
        let g = MomentumGrid::new(p, 2 * half, s).unwrap();
        for i in 0..g.len() {
            let j = g.reflect(i);
            prop_assert_eq!(g.nodes()[j], -g.nodes()[i]);
            prop_assert_eq!(g.weights()[j], g.weights()[i]);
            prop_assert!(g.nodes()[i] != 0.0);
            prop_assert!(g.weights()[i] > 0.0);
        }
        prop_assert!((g.weights().iter().sum::<f64>() - 2.0 * p).abs() < 1e-10 * p.max(1.0));
    }

    #[test]
    fn form_factor_symmetry(center in 0.0f64..3.0, width in 0.2f64..2.0, s in scheme()) {
        let g = MomentumGrid::new(10.0, 512, s).unwrap();
        let profile = Profile::Gaussian { center, width };
        let v = FormFactorV::new(&g, profile).unwrap();
        let u = WeightU::new(&g, profile).unwrap();
        for i in 0..g.len() {
            let j = g.reflect(i);
            prop_assert_eq!(v.values()[j], -v.values()[i]);
            prop_assert_eq!(u.values()[j], u.values()[i]);
            prop_assert!(u.values()[i] >= 0.0);
        }
        let l2: f64 = g.weights().iter().zip(v.values()).map(|(w, x)| w * x * x).sum();
        prop_assert!((l2 - 1.0).abs() < 1e-12);
        prop_assert!((g.weighted_sum(u.values()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_identities(xi in -5.0f64..5.0, d in -5.0f64..5.0) {
        let w = quasiparticle_energy(xi, d);
        let (c, s) = coherence_factors(xi, d);
        let (c2, s2) = coherence_factors(xi, -d);
        prop_assert!((c * c + s * s - 1.0).abs() < 1e-14);
        prop_assert_eq!(c2, c);
        prop_assert_eq!(s2, -s);
        prop_assert!(c >= 0.0);
        if d != 0.0 {
            prop_assert!((c * c - s * s - xi / w).abs() < 1e-12);
            prop_assert!((2.0 * c * s - d / w).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_symmetry(xi in -5.0f64..5.0, d in -5.0f64..5.0, mu in 0.1f64..3.0, beta in 0.0f64..50.0) {
        let w = quasiparticle_energy(xi, d);
        let (c, s) = coherence_factors(xi, d);
        let (c2, s2) = coherence_factors(xi, -d);
        let brace = brace_occupation(c, s, w, mu, beta);
        prop_assert!((0.0..=1.0).contains(&brace));
        prop_assert_eq!(brace_occupation(c2, s2, w, mu, beta), brace);
        prop_assert_eq!(bracket_pairing(c2, s2, w, mu, beta), -bracket_pairing(c, s, w, mu, beta));
        prop_assert!(bracket_pairing(c, s, w, mu, beta).abs() <= 0.5);
    }

    #[test]
    fn gap_function_is_even(lm in -2.0f64..2.0, lb in -3.0f64..3.0, dm in -2.0f64..2.0, db in 0.0f64..4.0, beta in 0.0f64..20.0) {
        let grid = MomentumGrid::new(6.0, 128, QuadratureScheme::UniformMidpoint).unwrap();
        let g = Profile::Gaussian { center: 1.0, width: 0.5 };
        let basis = ModelBasis::new(grid, DispersionKind::Quadratic { offset: 0.0 }, g, g).unwrap();
        let p = ModelParams::new(lm, lb, 1.0, beta, Arc::new(basis)).unwrap();
        prop_assert_eq!(gap_function(dm, db, &p), gap_function(dm, -db, &p));
        prop_assert_eq!(mean_field_rhs(dm, db, &p), mean_field_rhs(dm, -db, &p));
    }

    #[test]
    fn energy_rescaling_is_exact(lm in -2.0f64..2.0, lb in -3.0f64..3.0, dm in -2.0f64..2.0, db in 0.0f64..4.0, t in 0.01f64..5.0) {
        let one = ModelParams::new(lm, lb, 1.0, 1.0 / t, Arc::new(ModelBasis::flat_band(1.0))).unwrap();
        let two = ModelParams::new(2.0 * lm, 2.0 * lb, 2.0, 1.0 / (2.0 * t), Arc::new(ModelBasis::flat_band(2.0))).unwrap();
        prop_assert_eq!(gap_function(2.0 * dm, 2.0 * db, &two), gap_function(dm, db, &one));
        prop_assert_eq!(mean_field_rhs(2.0 * dm, 2.0 * db, &two), 2.0 * mean_field_rhs(dm, db, &one));
    }
}
