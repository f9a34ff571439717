//! Builds the symmetric momentum grids and the odd/even form factors, then
//! prints their symmetry and normalization figures.

use gapforge::grid::{FormFactorV, MomentumGrid, QuadratureScheme, WeightU};

fn main() {
    for scheme in [QuadratureScheme::UniformMidpoint, QuadratureScheme::GaussLegendre] {
        let grid = MomentumGrid::new(10.0, 256, scheme).unwrap();
        let v = FormFactorV::gaussian(&grid, 1.0, 0.5).unwrap();
        let u = WeightU::gaussian(&grid, 1.0, 0.5).unwrap();
        let odd = (0..grid.len())
            .map(|i| (v.values()[i] + v.values()[grid.reflect(i)]).abs())
            .fold(0.0, f64::max);
        let v_norm = grid.weighted_sum(&v.values().iter().map(|x| x * x).collect::<Vec<_>>());
        println!("{scheme:?}");
        println!("  sum of weights      {:.15}", grid.weights().iter().sum::<f64>());
        println!("  integral of p^2     {:.12} (exact {:.12})", grid.integrate(|p| p * p), 2000.0 / 3.0);
        println!("  max |v(p) + v(-p)|  {odd:e}");
        println!("  sum w v^2           {v_norm:.15}");
        println!("  sum w u             {:.15}", grid.weighted_sum(u.values()));
    }
}
