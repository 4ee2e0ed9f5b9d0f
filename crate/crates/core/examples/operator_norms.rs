//! Operator norms between polytope and Euclidean spaces.

use std::sync::Arc;

use banach_limits::error::Result;
use banach_limits::linalg::Matrix;
use banach_limits::linmap::LinearMap;
use banach_limits::space::NormedSpace;

fn main() -> Result<()> {
    let a = Matrix::from_i64(&[&[1, 2], &[-1, 1], &[0, 3]]);
    let pairs = [
        (NormedSpace::l1(2), NormedSpace::linf(3)),
        (NormedSpace::linf(2), NormedSpace::l1(3)),
        (NormedSpace::l2(2), NormedSpace::l2(3)),
        (NormedSpace::l1(2), NormedSpace::l2(3)),
    ];
    for (x, y) in pairs {
        let t = LinearMap::new(Arc::new(x), Arc::new(y), a.clone())?;
        let n = t.operator_norm()?;
        println!(
            "{} -> {}: [{:.6}, {:.6}] {:?} witness {:?}",
            t.source().label(),
            t.target().label(),
            n.lower.to_f64(),
            n.upper.to_f64(),
            n.kind,
            n.witness.map(|w| w.iter().map(|s| s.to_string()).collect::<Vec<_>>())
        );
        let adj = t.adjoint().operator_norm()?;
        println!("  adjoint: [{:.6}, {:.6}]", adj.lower.to_f64(), adj.upper.to_f64());
    }
    Ok(())
}
