//! Search and grid certification on random ℓ1 queries, at δ and δ/2.

use banach_limits::determining::{certify, search, CertifyOutcome, DeterminingQuery, RhoSchedule};
use banach_limits::error::Result;
use banach_limits::linalg::Matrix;
use banach_limits::random;
use banach_limits::scalar::Scalar;
use banach_limits::systems::{InverseSystem, SubspaceGenerator};

fn main() -> Result<()> {
    let m = 8;
    for seed in 0..6u64 {
        let mut rng = random::rng(seed, 7);
        let top = loop {
            let t = Matrix::from_rows((0..m).map(|_| random::int_vector(&mut rng, 2, -3, 3)).collect())?;
            if t.rank() == 2 {
                break t;
            }
        };
        let gen = SubspaceGenerator::from_top(InverseSystem::l1_drop(m), top)?;
        let n = 1 + seed as usize % 3;
        let rho = if seed % 2 == 0 { RhoSchedule::new(vec![Scalar::one(); n])? } else { RhoSchedule::harmonic(n) };
        let mut q = DeterminingQuery::new(gen, rho, Scalar::ratio(1, 4), m)?;
        let found = search(&q)?.counterexample().is_some();
        let coarse = certify(&q)?;
        q.certify.delta = Scalar::ratio(1, 200);
        let fine = certify(&q)?;
        let cells = |c: &CertifyOutcome| match c {
            CertifyOutcome::Certificate { cells, .. }
            | CertifyOutcome::Counterexample { cells, .. }
            | CertifyOutcome::Undecided { cells, .. } => *cells,
        };
        println!(
            "seed {seed} N={n}: search found {found:5}  δ: {:?} ({} cells)  δ/2: {:?} ({} cells)",
            coarse.verdict(),
            cells(&coarse),
            fine.verdict(),
            cells(&fine)
        );
    }
    Ok(())
}
