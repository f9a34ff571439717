//! Quasiparticle energy, coherence factors and the occupation and pairing
//! kernels for a few representative modes.

use gapforge::thermal::{bracket_pairing, brace_occupation, coherence_factors, quasiparticle_energy};

fn main() {
    let (mu, beta) = (1.0, 1.0);
    println!("   xi  delta_b*v        W        c        s     {{p}}      [p]");
    for (xi, d) in [(1.0, 0.0), (0.8, 0.6), (0.0, 2.0), (-0.5, 0.3), (3.0, 0.0)] {
        let w = quasiparticle_energy(xi, d);
        let (c, s) = coherence_factors(xi, d);
        println!(
            "{xi:5.2} {d:10.2} {w:8.4} {c:8.4} {s:8.4} {:8.5} {:8.5}",
            brace_occupation(c, s, w, mu, beta),
            bracket_pairing(c, s, w, mu, beta)
        );
    }
}
