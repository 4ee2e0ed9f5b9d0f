//! Standard inverse systems, their duals, and limit norms of compatible
//! vectors.

use banach_limits::error::Result;
use banach_limits::scalar::{q, Scalar};
use banach_limits::systems::{CoordinateSequence, InverseSystem};

fn main() -> Result<()> {
    for sys in [InverseSystem::l1_drop(10), InverseSystem::random_quotient(5, 2, 5)] {
        let verdicts = sys.validate_standard();
        println!(
            "{:?}: {} bonds, all pass: {}",
            sys.describe().rule,
            verdicts.len(),
            verdicts.iter().all(|v| v.pass)
        );
        let dual = sys.dualize();
        println!("  dual isometric system: {}", dual.validate_standard().iter().all(|v| v.pass));
    }

    let sys = InverseSystem::l1_drop(12);
    let seq = CoordinateSequence::Geometric { first: q(1), ratio: Scalar::ratio(1, 2) };
    let v = banach_limits::systems::CompatibleVector::from_sequence(sys.clone(), &seq)?;
    let norms = v.stage_norms()?;
    for (j, n) in norms.norms.iter().enumerate().step_by(3) {
        println!("  ‖π_{}(v)‖ = {n}", j + 1);
    }
    println!("  limit {:?}, gap {:?}", norms.limit, norms.gap);

    let lifted = sys.lift_to_top(3, vec![q(1), q(-1), q(2)])?;
    println!("  min-norm lift of (1,-1,2): stage-12 norm {}", lifted.norm_at(12)?);
    Ok(())
}
