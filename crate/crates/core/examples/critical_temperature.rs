//! Critical temperature along the attractive-coupling line λ_B < 0 on a flat
//! band, compared against the temperature bounds at the solution.

use std::sync::Arc;

use gapforge::solver::{
    find_tc, tc_bound, tc_bound_closed_form, tc_bound_vanishing_gap, ModelBasis, ModelParams,
    SolverOptions,
};

fn main() {
    let mu = 1.0;
    let lambda_b = -0.6;
    let basis = Arc::new(ModelBasis::flat_band(mu));
    let opts = SolverOptions::default();

    println!("lambda_m      T_c           bound(W)      bound(|xi|)   closed form");
    for lambda_m in [-0.5, -0.7, -0.9] {
        let template = ModelParams::new(lambda_m, lambda_b, mu, 1.0, basis.clone()).unwrap();
        match find_tc(&template, 1e-3, 100.0, &opts) {
            Ok(tc) => {
                let at = template.with_temperature(tc.t_below);
                let sol = tc.solution_below;
                println!(
                    "{lambda_m:<12}  {:<12.6}  {:<12.6}  {:<12.6}  {:<12.6}",
                    tc.tc,
                    tc_bound(&sol, &at).unwrap(),
                    tc_bound_vanishing_gap(sol.delta_m, &at).unwrap(),
                    tc_bound_closed_form(&at),
                );
            }
            Err(e) => println!("{lambda_m:<12}  {e}"),
        }
    }
}
