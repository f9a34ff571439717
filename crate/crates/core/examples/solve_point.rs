//! Solves the coupled gap equations at single parameter points and lists
//! every branch with its residuals.

use std::sync::Arc;

use gapforge::grid::{MomentumGrid, Profile, QuadratureScheme};
use gapforge::solver::{commutator_residual, solve_coupled, ModelBasis, ModelParams, SolverOptions};
use gapforge::thermal::DispersionKind;

fn report(label: &str, params: &ModelParams) {
    let sol = solve_coupled(params, &SolverOptions::default());
    println!("{label}");
    for b in &sol.branches {
        println!(
            "  {:?}: delta_m = {:.12}  delta_b = {:.12}  residuals = ({:.1e}, {:.1e})  commutator = {:.1e}",
            b.branch,
            b.delta_m,
            b.delta_b,
            b.residual_m,
            b.residual_b,
            commutator_residual(b, params).max()
        );
    }
}

fn main() {
    let flat = Arc::new(ModelBasis::flat_band(1.0));
    report(
        "flat band, beta = 0",
        &ModelParams::new(-0.4, 3.0, 1.0, 0.0, flat.clone()).unwrap(),
    );
    report(
        "flat band, lambda_b = 2, T = 1e-6 (gap -> sqrt 3)",
        &ModelParams::new(0.0, 2.0, 1.0, 1e6, flat.clone()).unwrap(),
    );
    report(
        "flat band, lambda_m = -0.5, lambda_b = -0.6, T = 0.5",
        &ModelParams::new(-0.5, -0.6, 1.0, 2.0, flat).unwrap(),
    );

    let grid = MomentumGrid::new(10.0, 2048, QuadratureScheme::UniformMidpoint).unwrap();
    let shell = Profile::Gaussian { center: 1.0, width: 0.5 };
    let basis = ModelBasis::new(grid, DispersionKind::Quadratic { offset: 0.0 }, shell, shell).unwrap();
    report(
        "quadratic band, gaussian shell, lambda_m = -0.3, lambda_b = 3, T = 0.05",
        &ModelParams::new(-0.3, 3.0, 1.0, 20.0, Arc::new(basis)).unwrap(),
    );
}
