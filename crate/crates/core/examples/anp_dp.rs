//! Norm-convergence versus uniform-projection diagnostics.

use banach_limits::determining::{equivalence_witness, DiagnosticOptions};
use banach_limits::error::Result;
use banach_limits::linalg;
use banach_limits::scalar::{q, Scalar};
use banach_limits::systems::InverseSystem;

fn main() -> Result<()> {
    let opts = DiagnosticOptions::new(Scalar::ratio(1, 100));

    let c0 = InverseSystem::linf_drop(12);
    let prefixes = (1..=10)
        .map(|k| c0.compatible_from_tail((0..12).map(|i| if i < k { q(1) } else { q(0) }).collect()))
        .collect::<Result<Vec<_>>>()?;
    let w = equivalence_witness(&prefixes, &opts)?;
    println!("c0 prefixes: norms converge {:?}, uniform {:?}, strong {}", w.anp, w.dp, w.strong_anp);

    let l1 = InverseSystem::l1_drop(8);
    let shrinking = (1..=16)
        .map(|k| {
            let mut v = linalg::unit(8, 0);
            v[1] = Scalar::pow2(-k);
            l1.compatible_from_tail(v)
        })
        .collect::<Result<Vec<_>>>()?;
    let w = equivalence_witness(&shrinking, &opts)?;
    println!("e1 + 2^-k e2: norms converge {:?}, uniform {:?}, strong {}", w.anp, w.dp, w.strong_anp);
    for t in w.terms.iter().step_by(3) {
        println!("  k={} at stage {}: {} + {} + {} = {}", t.k, t.stage, t.drop, t.stagewise, t.limit_drop, t.total);
    }

    let escaping = (0..12)
        .map(|k| {
            let mut v = linalg::unit(16, 0);
            v[k + 3] = q(1);
            InverseSystem::l1_drop(16).compatible_from_tail(v)
        })
        .collect::<Result<Vec<_>>>()?;
    let w = equivalence_witness(&escaping, &opts)?;
    println!("escaping mass: norms converge {:?}, uniform {:?}, agree {}", w.anp, w.dp, w.agree);
    Ok(())
}
