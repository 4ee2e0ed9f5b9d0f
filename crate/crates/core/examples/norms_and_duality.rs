//! Polytope norms, their duals and norming functionals.

use banach_limits::error::Result;
use banach_limits::scalar::{q, qr};
use banach_limits::space::{NormedSpace, PNorm};

fn main() -> Result<()> {
    let h = NormedSpace::hpoly(vec![vec![q(1), q(0)], vec![q(1), q(1)], vec![q(1), q(-2)]])?.with_label("H");
    let dual = h.dual();
    println!("{} has {} extreme points", h.label(), h.ball_extreme_points()?.len());
    println!("dual {} is {}", dual.label(), dual.spec().kind());

    for x in [vec![q(1), q(2)], vec![qr(-3, 2), q(1)]] {
        let (phi, value) = h.attaining_functional(&x)?;
        println!("‖{x:?}‖ = {}  attained by φ = {phi:?} with ‖φ‖* = {}", value, h.dual_norm(&phi)?);
    }

    assert_eq!(*dual.dual(), h);
    println!("double dual equals the original");

    let weighted = NormedSpace::lp(PNorm::One, vec![q(2), q(3)])?;
    println!("dual of weighted ℓ1: {:?}", weighted.dual().spec());

    let e = NormedSpace::l2(2);
    let r = e.norm(&[q(1), q(1)])?;
    println!("‖(1,1)‖₂ ≈ {} (exact: {})", r.to_f64(), e.norm_is_exact());
    Ok(())
}
