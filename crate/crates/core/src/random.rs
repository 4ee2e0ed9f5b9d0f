//! Seeded generators for random exact instances: polytope norms,
//! automorphisms, quotient maps and isometric embeddings.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{Matrix, Vector};
use crate::linmap::LinearMap;
use crate::scalar::Scalar;
use crate::space::{NormSpec, NormedSpace, PNorm};

/// Deterministic generator for `(seed, stream)`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn int<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> Scalar {
    Scalar::from_int(rng.gen_range(lo..=hi))
}

/// A rational `n/d` with `|n| <= num`, `1 <= d <= den`.
pub fn rational<R: Rng>(rng: &mut R, num: i64, den: i64) -> Scalar {
    Scalar::ratio(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

pub fn int_vector<R: Rng>(rng: &mut R, dim: usize, lo: i64, hi: i64) -> Vector {
    (0..dim).map(|_| int(rng, lo, hi)).collect()
}

pub fn rational_vector<R: Rng>(rng: &mut R, dim: usize, num: i64, den: i64) -> Vector {
    (0..dim).map(|_| rational(rng, num, den)).collect()
}

fn spanning_rows<R: Rng>(rng: &mut R, dim: usize, count: usize) -> Vec<Vector> {
    loop {
        let rows: Vec<Vector> = (0..count).map(|_| int_vector(rng, dim, -3, 3)).collect();
        if Matrix::from_rows_with_cols(rows.clone(), dim).map(|m| m.rank()).unwrap_or(0) == dim {
            return rows;
        }
    }
}

/// Random H- or V-polytope norm with `dim + 1 ..= 2 dim + 1` generators.
pub fn polytope_space<R: Rng>(rng: &mut R, dim: usize) -> NormedSpace {
    let count = rng.gen_range(dim + 1..=2 * dim + 1);
    let rows = spanning_rows(rng, dim, count);
    let spec = if rng.gen_bool(0.5) {
        NormSpec::HPolytope { functionals: rows }
    } else {
        NormSpec::VPolytope { vertices: rows }
    };
    NormedSpace::new("random", spec).expect("spanning generators")
}

/// Random V-polytope norm.
pub fn vpoly_space<R: Rng>(rng: &mut R, dim: usize) -> NormedSpace {
    let count = rng.gen_range(dim + 1..=dim + 2);
    NormedSpace::vpoly(spanning_rows(rng, dim, count)).expect("spanning vertices")
}

/// Random polytope norm of any kind: weighted `ℓ1`, `ℓ∞`, H or V.
pub fn any_polytope_space<R: Rng>(rng: &mut R, dim: usize) -> NormedSpace {
    match rng.gen_range(0..4) {
        0 | 1 => {
            let p = if rng.gen_bool(0.5) { PNorm::One } else { PNorm::Inf };
            let weights = (0..dim).map(|_| Scalar::ratio(rng.gen_range(1..=4), rng.gen_range(1..=3))).collect();
            NormedSpace::lp(p, weights).expect("positive weights")
        }
        _ => polytope_space(rng, dim),
    }
}

/// Random unimodular matrix (product of unit lower and upper triangular).
pub fn unimodular<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let mut lower = Matrix::identity(n);
    let mut upper = Matrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            lower[(i, j)] = int(rng, -1, 1);
            upper[(j, i)] = int(rng, -1, 1);
        }
    }
    lower.mul(&upper)
}

/// A quotient map `T : Y → X` onto `source_of_quotient = X`: `Y` has unit
/// ball `A·conv(±(v_j, r_j), ±(0, c))` over the extreme points `v_j` of the
/// ball of `X`, and `T = P ∘ A⁻¹` drops the last coordinate. `T` maps the
/// ball of `Y` onto the ball of `X`.
pub fn quotient_onto<R: Rng>(rng: &mut R, x: &Arc<NormedSpace>) -> (Arc<NormedSpace>, Matrix) {
    let d = x.dim();
    let ext = x.half_extreme_points().expect("enumerable ball");
    let mut lifted: Vec<Vector> = ext
        .iter()
        .map(|v| {
            let mut w = v.clone();
            w.push(int(rng, -2, 2));
            w
        })
        .collect();
    let mut top = vec![Scalar::zero(); d];
    top.push(int(rng, 1, 3));
    lifted.push(top);
    let a = unimodular(rng, d + 1);
    let verts = lifted.iter().map(|w| a.mul_vec(w)).collect();
    let y = NormedSpace::vpoly(verts).expect("lift spans");
    let ainv = a.inverse().expect("unimodular");
    let drop = Matrix::from_rows((0..d).map(|i| ainv.row(i).to_vec()).collect()).expect("rows");
    (Arc::new(y), drop)
}

/// A random quotient map from a random polytope space of dimension
/// `dim + 1` onto one of dimension `dim`.
pub fn quotient_map<R: Rng>(rng: &mut R, dim: usize) -> LinearMap {
    let x = Arc::new(any_polytope_space(rng, dim));
    let (y, m) = quotient_onto(rng, &x);
    LinearMap::new(y, x, m).expect("shapes")
}

/// A random isometric embedding `X → Y`, `dim X = dim`, `dim Y = dim + 1`:
/// `x ↦ A(x, 0)` into a space whose ball is `A` applied to either the
/// `ℓ1`-sum or the `ℓ∞`-sum of the ball of `X` with a segment.
pub fn isometric_embedding<R: Rng>(rng: &mut R, dim: usize) -> LinearMap {
    let x = Arc::new(any_polytope_space(rng, dim));
    let a = unimodular(rng, dim + 1);
    let c = int(rng, 1, 3);
    let pad = |v: &[Scalar], t: Scalar| -> Vector {
        let mut w = v.to_vec();
        w.push(t);
        w
    };
    let y = if rng.gen_bool(0.5) {
        let mut verts: Vec<Vector> = x
            .half_extreme_points()
            .expect("enumerable ball")
            .iter()
            .map(|v| a.mul_vec(&pad(v, Scalar::zero())))
            .collect();
        verts.push(a.mul_vec(&pad(&vec![Scalar::zero(); dim], c)));
        NormedSpace::vpoly(verts).expect("spans")
    } else {
        let ainv_t = a.inverse().expect("unimodular").transpose();
        let mut functionals: Vec<Vector> = x
            .h_representation()
            .expect("enumerable dual ball")
            .iter()
            .map(|f| ainv_t.mul_vec(&pad(f, Scalar::zero())))
            .collect();
        functionals.push(ainv_t.mul_vec(&pad(&vec![Scalar::zero(); dim], c.recip())));
        NormedSpace::hpoly(functionals).expect("spans")
    };
    let embed = Matrix::from_columns(
        &(0..dim).map(|j| a.column(j)).collect::<Vec<_>>(),
        dim + 1,
    );
    LinearMap::new(x, Arc::new(y), embed).expect("shapes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_reproducible() {
        let a = polytope_space(&mut rng(3, 1), 3);
        let b = polytope_space(&mut rng(3, 1), 3);
        assert_eq!(a, b);
        let u = unimodular(&mut rng(5, 0), 4);
        assert!(u.inverse().is_some());
    }

    #[test]
    fn constructed_maps_have_their_properties() {
        let mut r = rng(11, 0);
        for dim in 1..=3 {
            let q = quotient_map(&mut r, dim);
            assert!(q.is_quotient_map().unwrap().pass, "{q:?}");
            let e = isometric_embedding(&mut r, dim);
            assert!(e.is_isometric_embedding().unwrap().pass, "{e:?}");
        }
    }
}
