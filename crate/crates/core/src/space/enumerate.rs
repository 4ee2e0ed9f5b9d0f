//! Vertex enumeration for centrally symmetric polytopes `{x : |φ_k·x| <= 1}`
//! by the double description method on the homogenized cone
//! `{(t, x) : t ± φ_k·x >= 0}`.

use crate::linalg::{self, Matrix, Vector};
use crate::scalar::Scalar;

/// Fixed-width bitset over constraint indices.
#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn contains(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray {
    r: Vector,
    zeros: Bits,
}

/// Scale a ray to a canonical positive multiple: `t = 1` when `t > 0`,
/// otherwise the largest absolute coordinate becomes 1.
fn normalize(mut r: Vector) -> Vector {
    let s = if r[0].is_positive() {
        r[0].clone()
    } else {
        r.iter().map(Scalar::abs).max().unwrap_or_else(Scalar::one)
    };
    if !s.is_zero() && s != Scalar::one() {
        let inv = s.recip();
        for x in r.iter_mut() {
            *x = &*x * &inv;
        }
    }
    r
}

/// Sign-normalized representatives of the vertex pairs `±v` of the
/// symmetric polytope cut out by `functionals`, sorted. The functionals must
/// span the dual space (the polytope is then bounded).
pub fn symmetric_vertices(functionals: &[Vector], dim: usize) -> Vec<Vector> {
    let n = dim + 1;
    let mut rows: Vec<Vector> = Vec::with_capacity(2 * functionals.len());
    for phi in functionals {
        let mut plus = Vec::with_capacity(n);
        plus.push(Scalar::one());
        plus.extend(phi.iter().cloned());
        let mut minus = Vec::with_capacity(n);
        minus.push(Scalar::one());
        minus.extend(phi.iter().map(|x| -x));
        rows.push(plus);
        rows.push(minus);
    }
    let m = rows.len();
    let a = Matrix::from_rows_with_cols(rows.clone(), n).expect("rows have equal length");
    let init = a.independent_rows();
    assert_eq!(init.len(), n, "functionals do not span the dual space");

    let b = Matrix::from_rows(init.iter().map(|&i| rows[i].clone()).collect()).unwrap();
    let binv = b.inverse().expect("independent rows");
    let mut processed = vec![false; m];
    for &i in &init {
        processed[i] = true;
    }
    let zero_set = |r: &Vector, processed: &[bool]| {
        let mut z = Bits::new(m);
        for (i, row) in rows.iter().enumerate() {
            if processed[i] && linalg::dot(row, r).is_zero() {
                z.set(i);
            }
        }
        z
    };
    let mut rays: Vec<Ray> = (0..n)
        .map(|j| {
            let r = normalize(binv.column(j));
            let zeros = zero_set(&r, &processed);
            Ray { r, zeros }
        })
        .collect();

    for i in 0..m {
        if processed[i] {
            continue;
        }
        let row = &rows[i];
        let vals: Vec<Scalar> = rays.iter().map(|ray| linalg::dot(row, &ray.r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&j| vals[j].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&j| vals[j].is_negative()).collect();
        if neg.is_empty() {
            processed[i] = true;
            for (j, ray) in rays.iter_mut().enumerate() {
                if vals[j].is_zero() {
                    ray.zeros.set(i);
                }
            }
            continue;
        }
        let mut fresh: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].zeros.and(&rays[q].zeros);
                if common.count() + 2 < n {
                    continue;
                }
                let adjacent = rays.iter().enumerate().all(|(k, other)| {
                    k == p || k == q || !other.zeros.contains(&common)
                });
                if !adjacent {
                    continue;
                }
                let ap = &vals[p];
                let aq = &vals[q];
                let r: Vector = rays[q]
                    .r
                    .iter()
                    .zip(&rays[p].r)
                    .map(|(xq, xp)| ap * xq - aq * xp)
                    .collect();
                let r = normalize(r);
                let mut zeros = common;
                zeros.set(i);
                fresh.push(Ray { r, zeros });
            }
        }
        processed[i] = true;
        let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (j, mut ray) in rays.into_iter().enumerate() {
            if vals[j].is_negative() {
                continue;
            }
            if vals[j].is_zero() {
                ray.zeros.set(i);
            }
            kept.push(ray);
        }
        kept.extend(fresh);
        rays = kept;
    }

    let mut verts: Vec<Vector> = rays
        .into_iter()
        .map(|ray| {
            debug_assert!(ray.r[0].is_positive(), "unbounded direction in a bounded polytope");
            let t = ray.r[0].clone();
            let x: Vector = ray.r[1..].iter().map(|x| x / &t).collect();
            linalg::sign_normalize(&x)
        })
        .collect();
    verts.sort();
    verts.dedup();
    verts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qr};

    fn v(xs: &[i64]) -> Vector {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn cube_from_coordinate_functionals() {
        let f = vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])];
        let verts = symmetric_vertices(&f, 3);
        assert_eq!(verts.len(), 4);
        assert!(verts.contains(&v(&[1, 1, 1])));
        assert!(verts.contains(&v(&[1, -1, 1])));
    }

    #[test]
    fn cross_polytope_from_sign_functionals() {
        let f = vec![v(&[1, 1]), v(&[1, -1])];
        let verts = symmetric_vertices(&f, 2);
        assert_eq!(verts, vec![v(&[0, 1]), v(&[1, 0])]);
    }

    #[test]
    fn hexagon() {
        let f = vec![v(&[1, 0]), v(&[0, 1]), v(&[1, 1])];
        let verts = symmetric_vertices(&f, 2);
        // |x|<=1, |y|<=1, |x+y|<=1: vertices ±(1,0),±(0,1),±(1,-1)
        assert_eq!(verts, vec![v(&[0, 1]), v(&[1, -1]), v(&[1, 0])]);
        let f = vec![v(&[2, 0]), v(&[0, 1])];
        assert_eq!(
            symmetric_vertices(&f, 2),
            vec![vec![qr(1, 2), q(-1)], vec![qr(1, 2), q(1)]]
        );
    }
}
