//! The forced counterexample in the ℓ∞ drop system.

use banach_limits::determining::{c0_query, search, SearchOutcome};
use banach_limits::error::Result;
use banach_limits::scalar::Scalar;

fn main() -> Result<()> {
    let q = c0_query(10, Scalar::ratio(1, 2))?;
    let t = std::time::Instant::now();
    match search(&q)? {
        SearchOutcome::Counterexample(c) => {
            println!("counterexample in {:?}", t.elapsed());
            println!("a  = {:?}", c.a.iter().map(Scalar::to_f64).collect::<Vec<_>>());
            println!("a' = {:?}", c.a_prime.iter().map(Scalar::to_f64).collect::<Vec<_>>());
            println!("violation ‖v − v'‖ / max = {}", c.violation());
            println!("closeness slack at stage N: {}", c.evaluation.close_slack);
            println!("re-verified exactly: {}", c.verify(&q)?);
        }
        SearchOutcome::NotFound(miss) => println!("not found: {miss:?}"),
    }
    Ok(())
}
