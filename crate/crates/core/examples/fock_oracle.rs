//! Compares the closed-form thermal kernels and the Wick four-point function
//! against an exact Gibbs state on a small Fock space.

use gapforge::oracle::{compare, ModePair, ModeSet};

fn main() {
    let modes = ModeSet::new(
        -0.2,
        vec![
            ModePair { omega: 0.7, delta_b_v: 0.4 },
            ModePair { omega: 1.3, delta_b_v: -0.8 },
            ModePair { omega: 0.2, delta_b_v: 1.1 },
        ],
    )
    .unwrap();
    for beta in [0.0, 0.5, 2.0, 10.0] {
        let r = compare(&modes, beta, 0.9);
        println!(
            "beta = {beta:4}: two-point {:.1e}, four-point {:.1e} over {} entries, printed-sign variant {:.1e}",
            r.two_point_max_dev, r.four_point_max_dev, r.four_point_count, r.flipped_pairing_max_dev
        );
        for (j, p) in r.pairs.iter().enumerate() {
            println!(
                "    pair {j}: <a*a> {:.10} vs {:.10}   <a a> {:.10} vs {:.10}",
                p.exact_occupation, p.predicted_occupation, p.exact_pairing, p.predicted_pairing
            );
        }
    }
}
