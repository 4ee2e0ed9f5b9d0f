//! Dyadic difference quotients of the canonical ℓ1 and c0 curves.

use banach_limits::curves::{differentiability_scan, uniform_grid, CoordinateCurve};
use banach_limits::error::Result;

fn main() -> Result<()> {
    let grid = uniform_grid(100, 4);
    for curve in [CoordinateCurve::l1_canonical(), CoordinateCurve::c0_canonical()] {
        let r = differentiability_scan(&curve, &grid, 4..=16, 20)?;
        println!(
            "{}: decaying {}, obstructed {}, indeterminate {} (tail bound {:?})",
            r.curve, r.decaying, r.obstructed, r.indeterminate, r.tail_bound
        );
        let p = &r.points[0];
        println!("  t = 0: gaps {:?}", p.gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>());
        let worst = r.points.iter().map(|p| p.floor).fold(f64::INFINITY, f64::min);
        println!("  smallest gap over the grid: {worst:.4}");
    }
    Ok(())
}
