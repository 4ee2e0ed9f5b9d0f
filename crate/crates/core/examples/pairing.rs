//! The pairing between an inverse limit and the direct limit of duals.

use banach_limits::error::Result;
use banach_limits::random;
use banach_limits::systems::InverseSystem;

fn main() -> Result<()> {
    let sys = InverseSystem::random_quotient(3, 2, 4);
    let mut rng = random::rng(3, 1);
    let m = sys.max_stage();
    for _ in 0..4 {
        let tail = random::int_vector(&mut rng, sys.stage_dim(m)?, -4, 4);
        let v = sys.compatible_from_tail(tail)?;
        let p = v.pairing_isometry_check()?;
        println!(
            "‖v‖_{m} = {}  φ = {:?}  φ(v) = {}  ‖φ‖* = {}  extreme: {}  pass: {}",
            p.norm,
            p.functional.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            p.value,
            p.functional_norm,
            p.extreme,
            p.pass
        );
    }
    Ok(())
}
