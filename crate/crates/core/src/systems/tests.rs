use super::*;
use crate::scalar::{q, qr};
use crate::space::cap_dim;

fn v(xs: &[i64]) -> Vector {
    xs.iter().map(|&x| q(x)).collect()
}

#[test]
fn builtin_drop_systems_validate() {
    for sys in [InverseSystem::l1_drop(10), InverseSystem::linf_drop(cap_dim() + 1)] {
        let verdicts = sys.validate_standard();
        assert_eq!(verdicts.len(), sys.max_stage() - 1);
        assert!(verdicts.iter().all(|v| v.pass && v.structural.as_ref().unwrap().pass), "{verdicts:?}");
    }
    let over = InverseSystem::linf_drop(cap_dim() + 2).validate_standard();
    assert!(over.last().unwrap().error.as_ref().unwrap().contains("cap"));
    let l2 = InverseSystem::l2_drop(5).validate_standard();
    assert!(l2.iter().all(|v| v.pass));
}

#[test]
fn scaled_bond_fails_at_its_stage() {
    let spaces: Vec<Arc<NormedSpace>> = (1..=4).map(|d| Arc::new(NormedSpace::l1(d))).collect();
    let mut bonds: Vec<Matrix> = (1..4).map(|i| InverseSystem::l1_drop(4).bond(i).unwrap().matrix().clone()).collect();
    bonds[1] = bonds[1].scale(&q(2));
    let sys = InverseSystem::explicit(spaces, bonds, true).unwrap();
    let verdicts = sys.validate_standard();
    assert!(verdicts[0].pass && verdicts[2].pass);
    assert!(!verdicts[1].pass);
    assert_eq!(verdicts[1].stage, 2);
    assert!(verdicts[1].lipschitz.as_ref().unwrap().witness.is_some());
}

#[test]
fn random_quotient_system_validates() {
    let sys = InverseSystem::random_quotient(42, 2, 6);
    assert_eq!(sys.stage_dim(6).unwrap(), 7);
    assert!(sys.validate_standard().iter().all(|v| v.pass));
    let dual = sys.dualize();
    assert!(dual.validate_standard().iter().all(|v| v.pass));
    let again = InverseSystem::random_quotient(42, 2, 6);
    assert_eq!(*again.stage(5).unwrap(), *sys.stage(5).unwrap());
}

#[test]
fn dualization_of_builtins() {
    let pad = DirectSystem::linf_pad(6);
    let inv = pad.dualize();
    assert_eq!(inv.builtin_kind(), Some(Builtin::L1Drop));
    assert_eq!(inv.describe(), InverseSystem::l1_drop(6).describe());
    assert_eq!(inv.dualize().describe(), pad.describe());
    for i in 1..6 {
        assert_eq!(inv.bond(i).unwrap().matrix(), &pad.bond(i).unwrap().matrix().transpose());
    }
}

#[test]
fn explicit_double_dual_is_identical() {
    let spaces = vec![
        Arc::new(NormedSpace::hpoly(vec![v(&[1])]).unwrap()),
        Arc::new(NormedSpace::hpoly(vec![v(&[1, 0]), v(&[1, 1])]).unwrap()),
    ];
    let sys = System::Inverse(InverseSystem::explicit(spaces, vec![Matrix::from_i64(&[&[1, 0]])], false).unwrap());
    let json = serde_json::to_string(&sys.describe()).unwrap();
    let twice = serde_json::to_string(&sys.dualize().dualize().describe()).unwrap();
    assert_eq!(json, twice);
    let parsed: SystemDescription = serde_json::from_str(&json).unwrap();
    let back = System::from_description(&parsed).unwrap();
    assert_eq!(serde_json::to_string(&back.describe()).unwrap(), json);
}

#[test]
fn description_json() {
    let d: SystemDescription = serde_json::from_str(r#"{"builtin":"l1_drop","stages":20}"#).unwrap();
    let sys = System::from_description(&d).unwrap();
    assert_eq!(sys.max_stage(), 20);
    assert!(matches!(sys, System::Inverse(_)));
    let d: SystemDescription = serde_json::from_str(r#"{"random":{"seed":3,"base_dim":2},"stages":4}"#).unwrap();
    assert!(matches!(System::from_description(&d).unwrap(), System::Inverse(_)));
    let d: SystemDescription = serde_json::from_str(r#"{"kind":"direct","builtin":"l1_drop","stages":4}"#).unwrap();
    assert!(System::from_description(&d).is_err());
}

#[test]
fn tails_and_stage_norms() {
    let sys = InverseSystem::linf_drop(3);
    let cv = sys.compatible_from_tail(v(&[1, 1, 1])).unwrap();
    assert_eq!(cv.stages(), &[v(&[1]), v(&[1, 1]), v(&[1, 1, 1])]);
    assert!(sys.compatible_from_tail(v(&[0, 0, 0])).unwrap().is_zero());

    let m = 8;
    let sys = InverseSystem::l1_drop(m);
    let seq = CoordinateSequence::Geometric { first: q(1), ratio: qr(1, 2) };
    let cv = CompatibleVector::from_sequence(sys, &seq).unwrap();
    let norms = cv.stage_norms().unwrap();
    for (j, n) in norms.norms.iter().enumerate() {
        assert_eq!(*n, q(2) - Scalar::pow2(-(j as i32)));
    }
    assert_eq!(norms.limit, Some(q(2)));
    assert_eq!(norms.limit_estimate, q(2) - Scalar::pow2(1 - m as i32));
    assert_eq!(norms.gap, Some(Scalar::pow2(1 - m as i32)));
}

#[test]
fn lifting() {
    let sys = InverseSystem::l1_drop(5);
    assert_eq!(sys.lift_min_norm(1, &v(&[1])).unwrap(), v(&[1, 0]));
    let rsys = InverseSystem::random_quotient(9, 2, 5);
    let w = v(&[1, -2]);
    let cv = rsys.lift_to_top(1, w.clone()).unwrap();
    let n = rsys.stage(1).unwrap().norm(&w).unwrap();
    for j in 1..=5 {
        assert_eq!(cv.norm_at(j).unwrap(), n);
    }
    let spaces = vec![Arc::new(NormedSpace::l1(1)), Arc::new(NormedSpace::l1(2))];
    let shrink = InverseSystem::explicit(spaces, vec![Matrix::from_rows(vec![vec![qr(1, 2), qr(1, 2)]]).unwrap()], false).unwrap();
    assert!(matches!(shrink.lift_min_norm(1, &v(&[1])), Err(Error::NotQuotientBond { stage: 1 })));
}

#[test]
fn pairing_consistency_and_attainment() {
    let sys = InverseSystem::random_quotient(5, 2, 4);
    let cv = sys.compatible_from_tail(v(&[1, 2, -1, 3, 1])).unwrap();
    let phi = v(&[2, -1, 1, 1]);
    let pushed = sys.bond(3).unwrap().matrix().transpose().mul_vec(&phi);
    assert_eq!(cv.pairing(4, &pushed).unwrap(), cv.pairing(3, &phi).unwrap());
    let verdict = cv.pairing_isometry_check().unwrap();
    assert!(verdict.pass, "{verdict:?}");
    let sys = InverseSystem::linf_drop(2);
    let verdict = sys.compatible_from_tail(v(&[1, 1])).unwrap().pairing_isometry_check().unwrap();
    assert!(verdict.pass);
    assert_eq!(verdict.value, q(1));
}

#[test]
fn c0_prefixes_converge_stagewise_not_strongly() {
    let m = 12;
    let sys = InverseSystem::linf_drop(m);
    let seq: Vec<CompatibleVector> = (1..=m)
        .map(|k| CompatibleVector::from_sequence(sys.clone(), &CoordinateSequence::Finite { coords: vec![q(1); k] }).unwrap())
        .collect();
    let mut opts = ConvergenceOptions::new(Scalar::ratio(1, 1000));
    opts.check_through = Some(m / 2);
    let report = invlim_convergence(&seq, &opts).unwrap();
    assert!(report.pass);
    assert_eq!(report.strong_spread, q(1));
}

#[test]
fn direct_limit_norms() {
    let pad = DirectSystem::linf_pad(5);
    let r = pad.direct_limit_norm(2, &v(&[3, -1])).unwrap();
    assert_eq!(r.norms, vec![q(3); 4]);
    let spaces: Vec<Arc<NormedSpace>> = (0..4).map(|_| Arc::new(NormedSpace::l1(1))).collect();
    let half = Matrix::from_rows(vec![vec![qr(1, 2)]]).unwrap();
    let ds = DirectSystem::explicit(spaces, vec![half.clone(), half.clone(), half], false).unwrap();
    let r = ds.direct_limit_norm(1, &v(&[1])).unwrap();
    assert_eq!(r.value, qr(1, 8));
    assert_eq!(r.bound, Bound::Upper);
}

#[test]
fn generator_compatibility_is_checked() {
    let sys = InverseSystem::l1_drop(3);
    let top = Matrix::from_i64(&[&[1, 0], &[0, 1], &[1, 1]]);
    let gen = SubspaceGenerator::from_top(sys.clone(), top).unwrap();
    assert_eq!(gen.map(1).unwrap(), &Matrix::from_i64(&[&[1, 0]]));
    assert!(SubspaceGenerator::new(sys.clone(), gen.maps().to_vec()).is_ok());
    let mut bad = gen.maps().to_vec();
    bad[0] = Matrix::from_i64(&[&[2, 0]]);
    assert!(SubspaceGenerator::new(sys, bad).is_err());
    assert_eq!(gen.eval(&v(&[1, 2])).unwrap().tail(), &v(&[1, 2, 3]));
}

#[test]
fn diagonal_extraction() {
    let sys = InverseSystem::l1_drop(4);
    let mut rng = crate::random::rng(1, 0);
    let family: Vec<CompatibleVector> = (0..30)
        .map(|_| sys.compatible_from_tail(crate::random::rational_vector(&mut rng, 4, 3, 2)).unwrap())
        .collect();
    let mut opts = ConvergenceOptions::new(q(2));
    let idx = extract_convergent_subsequence(&family, &opts).unwrap();
    assert!(!idx.is_empty());
    let sub: Vec<CompatibleVector> = idx.iter().map(|&k| family[k].clone()).collect();
    opts.tail_from = Some(0);
    assert!(invlim_convergence(&sub, &opts).unwrap().pass);
}
