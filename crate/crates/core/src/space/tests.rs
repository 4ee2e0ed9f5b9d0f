use super::*;
use crate::scalar::{q, qr};

fn v(xs: &[i64]) -> Vector {
    xs.iter().map(|&x| q(x)).collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Vertices of `{|φ·x| <= 1}` by solving every `d`-subset of tight
/// constraints with every sign pattern.
fn brute_vertices(functionals: &[Vector], dim: usize) -> Vec<Vector> {
    let mut out = Vec::new();
    for idx in subsets(functionals.len(), dim) {
        let m = Matrix::from_rows(idx.iter().map(|&i| functionals[i].clone()).collect()).unwrap();
        let Some(inv) = m.inverse() else { continue };
        for mask in 0..(1usize << dim) {
            let rhs: Vector = (0..dim)
                .map(|b| if mask & (1 << b) != 0 { -q(1) } else { q(1) })
                .collect();
            let x = inv.mul_vec(&rhs);
            if functionals.iter().all(|f| linalg::dot(f, &x).abs() <= q(1)) {
                out.push(linalg::sign_normalize(&x));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

#[test]
fn double_description_matches_brute_force() {
    let cases: Vec<(Vec<Vector>, usize)> = vec![
        (vec![v(&[1, 0]), v(&[0, 1]), v(&[1, 1]), v(&[2, -1])], 2),
        (vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1]), v(&[1, 1, 1])], 3),
        (vec![v(&[1, 2, 0]), v(&[0, 1, -1]), v(&[3, 0, 1]), v(&[1, 1, 1]), v(&[1, -1, 2])], 3),
        (
            vec![v(&[1, 0, 0, 0]), v(&[0, 1, 0, 0]), v(&[0, 0, 1, 0]), v(&[0, 0, 0, 1]), v(&[1, 1, 1, 1]), v(&[1, -1, 1, -1])],
            4,
        ),
    ];
    for (f, d) in cases {
        assert_eq!(symmetric_vertices(&f, d), brute_vertices(&f, d), "functionals {f:?}");
    }
}

#[test]
fn canonicalization_removes_redundancy() {
    let a = NormedSpace::vpoly(vec![v(&[1, 0]), v(&[0, 1]), v(&[-1, 0]), vec![qr(1, 3), qr(1, 3)], v(&[0, 0])]).unwrap();
    let b = NormedSpace::vpoly(vec![v(&[0, -1]), v(&[1, 0])]).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.spec(), &NormSpec::VPolytope { vertices: vec![v(&[0, 1]), v(&[1, 0])] });
    let h = NormedSpace::hpoly(vec![v(&[1, 0]), v(&[0, 1]), vec![qr(1, 2), qr(1, 2)]]).unwrap();
    assert_eq!(h, NormedSpace::hpoly(vec![v(&[0, 1]), v(&[1, 0])]).unwrap());
}

#[test]
fn invalid_specs_are_rejected() {
    let d = validate_norm(&NormSpec::Lp { p: PNorm::One, weights: vec![q(1), q(0)] });
    assert!(!d.pass);
    let d = validate_norm(&NormSpec::HPolytope { functionals: vec![v(&[1, 1]), v(&[2, 2])] });
    assert!(!d.pass);
    let d = validate_norm(&NormSpec::VPolytope { vertices: vec![v(&[1, 1]), v(&[2])] });
    assert!(!d.pass);
    assert!(NormedSpace::vpoly(vec![]).is_err());
}

#[test]
fn weighted_lp_norms() {
    let s = NormedSpace::lp(PNorm::One, vec![q(2), qr(1, 2)]).unwrap();
    assert_eq!(s.norm(&v(&[1, -4])).unwrap(), q(4));
    let s = NormedSpace::lp(PNorm::Inf, vec![q(2), qr(1, 2)]).unwrap();
    assert_eq!(s.norm(&v(&[1, -6])).unwrap(), q(3));
    let s = NormedSpace::l2(2);
    assert_eq!(s.norm(&v(&[3, 4])).unwrap(), q(5));
    let r = s.norm(&v(&[1, 1])).unwrap();
    assert!((r.to_f64() - 2f64.sqrt()).abs() < 1e-15);
    assert!(&r * &r <= q(2));
}

#[test]
fn vpoly_norm_matches_facets_brute_force() {
    let verts = vec![v(&[2, 1, 0]), v(&[0, 1, 1]), v(&[1, -1, 1]), v(&[1, 0, -2])];
    let s = NormedSpace::vpoly(verts.clone()).unwrap();
    // facet normals through d-subsets of ±vertices
    let mut all = verts.clone();
    all.extend(verts.iter().map(|x| linalg::neg(x)));
    let mut facets = Vec::new();
    for idx in subsets(all.len(), 3) {
        let m = Matrix::from_rows(idx.iter().map(|&i| all[i].clone()).collect()).unwrap();
        if let Some(phi) = m.transpose().inverse().map(|_| ()).and_then(|_| m.solve(&v(&[1, 1, 1]))) {
            if all.iter().all(|x| linalg::dot(&phi, x).abs() <= q(1)) {
                facets.push(phi);
            }
        }
    }
    for x in [v(&[1, 2, 3]), v(&[-3, 0, 1]), v(&[0, 0, 5]), vec![qr(1, 7), qr(-2, 3), q(1)]] {
        let oracle = facets.iter().map(|f| linalg::dot(f, &x).abs()).fold(q(0), Scalar::max);
        assert_eq!(s.norm(&x).unwrap(), oracle);
        assert_eq!(s.norm_by_lp(&x).unwrap(), oracle);
    }
}

#[test]
fn duality_round_trip() {
    let s = NormedSpace::hpoly(vec![v(&[1, 2]), v(&[3, -1]), v(&[1, 0])]).unwrap();
    let dd = s.dual().dual();
    assert_eq!(*dd, s);
    let l = NormedSpace::lp(PNorm::One, vec![q(2), q(3)]).unwrap();
    assert_eq!(
        l.dual().spec(),
        &NormSpec::Lp { p: PNorm::Inf, weights: vec![qr(1, 2), qr(1, 3)] }
    );
    assert_eq!(*l.dual().dual(), l);
}

#[test]
fn dual_norm_is_sup_over_ball() {
    let s = NormedSpace::hpoly(vec![v(&[1, 2]), v(&[3, -1]), v(&[1, 0])]).unwrap();
    let ext = s.ball_extreme_points().unwrap();
    for phi in [v(&[1, 1]), v(&[-2, 5]), v(&[0, 1])] {
        let sup = ext.iter().map(|x| linalg::dot(&phi, x)).fold(q(0), Scalar::max);
        assert_eq!(s.dual_norm(&phi).unwrap(), sup);
    }
}

#[test]
fn attaining_functionals_norm_one() {
    let spaces = vec![
        NormedSpace::lp(PNorm::One, vec![q(1), q(2), q(3)]).unwrap(),
        NormedSpace::lp(PNorm::Inf, vec![q(1), q(2), q(3)]).unwrap(),
        NormedSpace::hpoly(vec![v(&[1, 0, 1]), v(&[0, 1, 1]), v(&[1, 1, 0])]).unwrap(),
        NormedSpace::vpoly(vec![v(&[1, 0, 1]), v(&[0, 1, 1]), v(&[1, 1, 0]), v(&[1, 1, 1])]).unwrap(),
    ];
    for s in &spaces {
        for x in [v(&[1, -2, 3]), v(&[0, 0, 1]), v(&[5, 1, -1])] {
            let (phi, val) = s.attaining_functional(&x).unwrap();
            assert_eq!(val, s.norm(&x).unwrap());
            assert_eq!(linalg::dot(&phi, &x), val);
            assert_eq!(s.dual_norm(&phi).unwrap(), q(1));
        }
    }
}

#[test]
fn dimension_cap_applies_to_exponential_enumeration() {
    let s = NormedSpace::linf(cap_dim() + 1);
    assert!(matches!(s.half_extreme_points(), Err(Error::DimensionCap { .. })));
    let s = NormedSpace::l1(cap_dim() + 4);
    assert_eq!(s.half_extreme_points().unwrap().len(), cap_dim() + 4);
}

#[test]
fn section_of_l1_is_induced_norm() {
    let base = NormedSpace::l1(4);
    let b = Matrix::from_i64(&[&[1, 0], &[1, 1], &[0, 1], &[1, -1]]);
    let sec = base.section(&b, "sec").unwrap();
    for y in [v(&[1, 0]), v(&[0, 1]), v(&[2, -3]), vec![qr(1, 2), qr(5, 3)]] {
        assert_eq!(sec.norm(&y).unwrap(), base.norm(&b.mul_vec(&y)).unwrap());
    }
    let base = NormedSpace::linf(3);
    let b = Matrix::from_i64(&[&[1, 0], &[1, 1], &[0, 2]]);
    let sec = base.section(&b, "sec").unwrap();
    for y in [v(&[1, 0]), v(&[0, 1]), v(&[2, -3])] {
        assert_eq!(sec.norm(&y).unwrap(), base.norm(&b.mul_vec(&y)).unwrap());
    }
}

#[test]
fn serde_round_trip() {
    let s = NormedSpace::hpoly(vec![vec![qr(1, 2), q(1)], v(&[0, 1])]).unwrap().with_label("H");
    let json = serde_json::to_string(&SpaceDescription::from(&s)).unwrap();
    assert!(json.contains("\"kind\":\"hpoly\""));
    let back: SpaceDescription = serde_json::from_str(&json).unwrap();
    assert_eq!(NormedSpace::try_from(back).unwrap(), s);
    let lp: NormSpec = serde_json::from_str(r#"{"kind":"lp","p":"inf","weights":["1","1/2"]}"#).unwrap();
    assert_eq!(lp, NormSpec::Lp { p: PNorm::Inf, weights: vec![q(1), qr(1, 2)] });
}

#[test]
fn extreme_point_recognition() {
    let s = NormedSpace::hpoly(vec![v(&[1, 0]), v(&[0, 1]), v(&[1, 1])]).unwrap();
    for x in s.ball_extreme_points().unwrap() {
        assert!(s.is_extreme_point(&x).unwrap());
    }
    assert!(!s.is_extreme_point(&v(&[1, 0]).iter().map(|x| x * &qr(1, 2)).collect::<Vec<_>>()).unwrap());
    assert!(!s.is_extreme_point(&vec![qr(1, 2), qr(1, 2)]).unwrap());
    let l1 = NormedSpace::lp(PNorm::One, vec![q(2), q(1)]).unwrap();
    assert!(l1.is_extreme_point(&vec![qr(-1, 2), q(0)]).unwrap());
    assert!(!l1.is_extreme_point(&vec![qr(1, 4), qr(1, 2)]).unwrap());
    let linf = NormedSpace::linf(2);
    assert!(linf.is_extreme_point(&v(&[1, -1])).unwrap());
    assert!(!linf.is_extreme_point(&v(&[1, 0])).unwrap());
}
