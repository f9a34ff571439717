//! Independent check of the critical-temperature search on the flat band,
//! where `λ_M = 0` pins `Δ_M = 0` and `G(Δ) = λ_B tanh(β(W-μ)/2)/W` with
//! `W = sqrt(μ² + Δ²)`.

use std::sync::Arc;

use gapforge::solver::{find_tc, ModelBasis, ModelParams, SolverOptions};

fn paired_by_scan(t: f64, lambda_b: f64) -> bool {
    (1..=20_000).any(|k| {
        let d = k as f64 * 5e-4;
        let w = (1.0 + d * d).sqrt();
        lambda_b * ((w - 1.0) / (2.0 * t)).tanh() / w >= 1.0
    })
}

#[test]
fn tc_matches_two_variable_scan() {
    let lambda_b = 2.0;
    let mut tc_scan = 0.0;
    let mut t = 0.2;
    while t < 0.4 {
        if paired_by_scan(t, lambda_b) {
            tc_scan = t;
        }
        t += 1e-4;
    }
    let template =
        ModelParams::new(0.0, lambda_b, 1.0, 1.0, Arc::new(ModelBasis::flat_band(1.0))).unwrap();
    let r = find_tc(&template, 1e-3, 10.0, &SolverOptions::default()).unwrap();
    assert!(tc_scan > 0.2 && tc_scan < 0.4, "scan T_c {tc_scan}");
    assert!((r.tc - tc_scan).abs() <= 2e-4, "search {} vs scan {tc_scan}", r.tc);
}
