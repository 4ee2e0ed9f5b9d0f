//! Renorming the projected images makes every restriction a quotient map
//! and destroys the determining verdict.

use banach_limits::determining::{gfda_check, renorm_instance, renormed_images};
use banach_limits::error::Result;
use banach_limits::scalar::Scalar;

fn main() -> Result<()> {
    let q = renorm_instance(4, Scalar::ratio(1, 2))?;
    let original = gfda_check(&q, q.eval_stage)?;
    for s in &original.stages {
        println!("stage {}: image dim {}  quotient {}", s.stage, s.image_dim, s.quotient.pass);
    }
    println!("original determining verdict: {:?}", original.determining.verdict);

    let renormed = renormed_images(&q)?;
    let rq = renormed.query(&q)?;
    let after = gfda_check(&rq, rq.eval_stage)?;
    println!("renormed: all quotient {}", after.quotient_pass);
    println!("renormed determining verdict: {:?}", after.determining.verdict);
    if let Some(c) = after.determining.search.counterexample() {
        println!("violation {} (re-verified: {})", c.violation(), c.verify(&rq)?);
    }
    Ok(())
}
