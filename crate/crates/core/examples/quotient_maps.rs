//! Quotient maps, isometric embeddings and the duality between them.

use banach_limits::error::Result;
use banach_limits::random;
use banach_limits::scalar::q;

fn main() -> Result<()> {
    let mut rng = random::rng(11, 0);
    for _ in 0..3 {
        let qmap = random::quotient_map(&mut rng, 3);
        let v = qmap.is_quotient_map()?;
        let adj = qmap.adjoint().is_isometric_embedding()?;
        println!(
            "{}x{} quotient: {}  adjoint isometric: {}",
            qmap.matrix().rows(),
            qmap.matrix().cols(),
            v.pass,
            adj.pass
        );
        let target = vec![q(1); qmap.target().dim()];
        let (pre, n) = qmap.min_norm_preimage(&target)?;
        println!("  min-norm preimage of {target:?}: norm {n} = ‖y‖ {}", qmap.target().norm(&target)?);
        assert_eq!(qmap.apply(&pre)?, target);

        let emb = random::isometric_embedding(&mut rng, 2);
        println!(
            "embedding isometric: {}  adjoint quotient: {}",
            emb.is_isometric_embedding()?.pass,
            emb.adjoint().is_quotient_map()?.pass
        );
    }
    Ok(())
}
