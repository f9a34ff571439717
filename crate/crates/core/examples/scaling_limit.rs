//! Smeared pair expectations along the κ ladder: the surviving term stays
//! put while the exchange term decays as κ^{-1/2} on a line.

use std::sync::Arc;

use gapforge::grid::{MomentumGrid, Profile, QuadratureScheme};
use gapforge::scaling::{kappa_ladder, probe, probe_density, DEFAULT_OCTAVES};
use gapforge::solver::{solve_coupled, ModelBasis, ModelParams, SolverOptions};
use gapforge::thermal::DispersionKind;

fn main() {
    let grid = MomentumGrid::new(10.0, 2048, QuadratureScheme::UniformMidpoint).unwrap();
    let shell = Profile::Gaussian { center: 2.0, width: 1.0 };
    let basis = ModelBasis::new(grid, DispersionKind::Flat { omega0: 1.0 }, shell, shell).unwrap();
    let params = ModelParams::new(0.0, 2.0, 1.0, 10.0, Arc::new(basis)).unwrap();
    let state = *solve_coupled(&params, &SolverOptions::default())
        .principal()
        .expect("paired state");
    println!("delta_m = {:.6}, delta_b = {:.6}", state.delta_m, state.delta_b);

    let kappas = kappa_ladder(&params.basis.grid, DEFAULT_OCTAVES);
    let s = probe(&params, state.gaps(), &kappas).unwrap();
    let d = probe_density(&params, state.gaps(), &kappas);
    println!("     kappa     surviving     exchange   exch/asym   density diag  density pair");
    for (i, kappa) in kappas.iter().enumerate() {
        println!(
            "{:10.4} {:13.6e} {:12.6e} {:11.6} {:14.6e} {:13.6e}",
            kappa,
            s.surviving[i],
            s.vanishing[i],
            s.vanishing[i] / s.asymptote[i],
            d.diagonal[i],
            d.pairing_channel[i]
        );
    }
    println!("exchange exponent {:.4}, surviving drift {:.1e}", s.exponent, s.surviving_drift());
    if let Some(e) = d.exponent {
        println!("density pairing-channel exponent {e:.4}");
    }
}
