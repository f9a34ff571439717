//! Classifies a coupling-plane sweep on the flat band and draws it as a
//! character map (S superconducting, . normal, ? indeterminate).

use std::sync::Arc;

use gapforge::phase::{sweep, Axis, Phase, SweepParam, SweepSpec};
use gapforge::solver::{ModelBasis, ModelParams, SolverOptions};

fn main() {
    let base = ModelParams::new(0.0, 0.0, 1.0, 20.0, Arc::new(ModelBasis::flat_band(1.0))).unwrap();
    let axes = vec![
        Axis { param: SweepParam::LambdaB, min: 3.0, max: -2.0, steps: 21 },
        Axis { param: SweepParam::LambdaM, min: -2.0, max: 1.0, steps: 31 },
    ];
    let spec = SweepSpec::new(base, axes).unwrap();
    let rows = sweep(&spec, &SolverOptions::default());
    println!("T = 0.05 mu; rows lambda_b from 3 down to -2, columns lambda_m from -2 to 1");
    for line in rows.chunks(31) {
        let cells: String = line
            .iter()
            .map(|r| match r.point.phase {
                Phase::Superconducting => 'S',
                Phase::Normal => '.',
                Phase::Indeterminate => '?',
            })
            .collect();
        println!("{:6.2} {cells}", line[0].coords[0]);
    }
}
