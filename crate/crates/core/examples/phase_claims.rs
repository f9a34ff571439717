//! Checks the phase-diagram claims on the flat band and prints the evidence.

use gapforge::phase::{check_phase_claims, ClaimConfig};
use gapforge::solver::SolverOptions;

fn main() {
    let started = std::time::Instant::now();
    let report = check_phase_claims(1.0, &ClaimConfig::default(), &SolverOptions::default());
    for c in &report.claims {
        println!("({}) {:?}: {}", c.label, c.outcome, c.statement);
        println!("    {}", c.evidence);
    }
    println!("\n lambda_m  lambda_b        T_c   at solution  self-consistent  closed form");
    for s in &report.tc_samples {
        println!(
            "{:9.3} {:9.3} {:10.6} {:13.6} {:16.6} {:12.6}",
            s.lambda_m, s.lambda_b, s.tc, s.bound_at_solution, s.bound_self_consistent, s.bound_literal
        );
    }
    println!("\nfinished in {:.1?}", started.elapsed());
}
