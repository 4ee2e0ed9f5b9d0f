use super::*;
use crate::scalar::{q, qr};
use crate::systems::CompatibleVector;

fn ones_prefix(m: usize, k: usize) -> Vector {
    (0..m).map(|i| if i < k { q(1) } else { q(0) }).collect()
}

#[test]
fn rho_schedule_validation() {
    assert!(RhoSchedule::new(vec![qr(1, 2), qr(1, 3)]).is_ok());
    assert!(RhoSchedule::new(vec![qr(1, 3), qr(1, 2)]).is_err());
    assert!(RhoSchedule::new(vec![q(0)]).is_err());
    assert!(RhoSchedule::new(vec![qr(3, 2)]).is_err());
    assert!(RhoSchedule::new(vec![]).is_err());
    let g = RhoSchedule::geometric(4, q(1), qr(1, 2)).unwrap();
    assert_eq!(g.get(4), &qr(1, 8));
    let json = serde_json::to_string(&g).unwrap();
    assert_eq!(serde_json::from_str::<RhoSchedule>(&json).unwrap(), g);
    assert!(serde_json::from_str::<RhoSchedule>(r#"["1/4","1/2"]"#).is_err());
}

#[test]
fn c0_pair_is_forced() {
    let query = c0_query(10, qr(1, 2)).unwrap();
    let e = query.evaluate(&[q(1), q(0)], &[q(0), q(1)]).unwrap();
    assert!(e.hypotheses_hold());
    assert_eq!(e.close_slack, qr(1, 10));
    for (i, s) in e.rho_slacks.iter().enumerate() {
        assert_eq!(s, query.rho.get(i + 1));
    }
    assert_eq!(e.violation, q(1));
    assert!(e.is_counterexample(&query.eps));
}

#[test]
fn c0_search_finds_counterexample() {
    let query = c0_query(10, qr(1, 2)).unwrap();
    let found = search(&query).unwrap();
    let c = found.counterexample().expect("counterexample");
    assert!(c.violation().to_f64() >= 0.9);
    assert!(c.verify(&query).unwrap());
    let report = determine(&query).unwrap();
    assert_eq!(report.verdict, Verdict::Counterexample);
    assert_eq!(report.verdict.exit_code(), 1);
    assert_eq!(report.limit_gap, Some(q(0)));
}

#[test]
fn c0_never_certifies() {
    let mut query = c0_query(4, qr(1, 2)).unwrap();
    query.certify.delta = qr(1, 16);
    let out = certify(&query).unwrap();
    let c = out.counterexample().expect("counterexample");
    assert!(c.verify(&query).unwrap());
}

fn line_query() -> DeterminingQuery {
    let sys = InverseSystem::linf_drop(8);
    let top = Matrix::from_rows((0..8).map(|_| vec![q(1)]).collect()).unwrap();
    let gen = SubspaceGenerator::from_top(sys, top).unwrap();
    DeterminingQuery::new(gen, RhoSchedule::harmonic(4), qr(1, 2), 8).unwrap()
}

#[test]
fn one_dimensional_slices_certify() {
    let query = line_query();
    assert!(search(&query).unwrap().counterexample().is_none());
    let out = certify(&query).unwrap();
    assert_eq!(out.verdict(), Verdict::Certificate, "{out:?}");
    match out {
        CertifyOutcome::Certificate { statement, .. } => assert_eq!(statement, CERTIFICATE_STATEMENT),
        _ => unreachable!(),
    }
    assert_eq!(determine(&query).unwrap().verdict.exit_code(), 0);
}

#[test]
fn certificates_are_monotone_in_eps() {
    let mut query = line_query();
    query.eps = qr(1, 3);
    assert_eq!(certify(&query).unwrap().verdict(), Verdict::Certificate);
    query.eps = q(1);
    assert_eq!(certify(&query).unwrap().verdict(), Verdict::Certificate);
}

#[test]
fn counterexample_tampering_is_detected() {
    let query = c0_query(3, qr(1, 2)).unwrap();
    let SearchOutcome::Counterexample(mut c) = search(&query).unwrap() else { panic!() };
    c.evaluation.violation = q(5);
    assert!(!c.verify(&query).unwrap());
}

#[test]
fn invalid_queries() {
    let sys = InverseSystem::l1_drop(4);
    let gen = SubspaceGenerator::from_top(sys, Matrix::identity(4)).unwrap();
    assert!(DeterminingQuery::new(gen.clone(), RhoSchedule::harmonic(5), qr(1, 2), 4).is_err());
    assert!(DeterminingQuery::new(gen.clone(), RhoSchedule::harmonic(2), q(3), 4).is_err());
    assert!(DeterminingQuery::new(gen.clone(), RhoSchedule::harmonic(2), qr(1, 2), 5).is_err());
    let mut query = DeterminingQuery::new(gen, RhoSchedule::harmonic(2), qr(1, 2), 4).unwrap();
    query.certify.max_param_dim = 3;
    assert!(matches!(certify(&query), Err(Error::InvalidQuery(_))));
}

#[test]
fn query_description_round_trip() {
    let json = r#"{
        "system": {"builtin": "linf_drop", "stages": 6},
        "generator": {"top": [["1","1"],["1","1"],["1","1"],["0","1"],["0","1"],["0","1"]]},
        "rho": ["1/2", "1/3", "1/4"],
        "eps": "1/2",
        "search": {"starts": 8, "budget": 200, "seed": 3}
    }"#;
    let d: QueryDescription = serde_json::from_str(json).unwrap();
    let query = d.build().unwrap();
    assert_eq!(query.eval_stage, 6);
    assert_eq!(query.n(), 3);
    assert_eq!(query.search.starts, 8);
    let back: QueryDescription = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
    assert_eq!(back, d);
}

#[test]
fn full_slice_restrictions_are_quotients() {
    let sys = InverseSystem::l1_drop(5);
    let mut top = Matrix::zeros(5, 2);
    top[(0, 0)] = q(1);
    top[(1, 1)] = q(1);
    let gen = SubspaceGenerator::from_top(sys, top).unwrap();
    let query = DeterminingQuery::new(gen, RhoSchedule::harmonic(2), qr(3, 4), 5).unwrap();
    let report = gfda_check(&query, 2).unwrap();
    assert_eq!(report.determining.verdict, Verdict::Certificate);
    assert!(report.pass);
    assert!(report.quotient_pass);
    assert_eq!(report.stages.iter().map(|s| s.image_dim).collect::<Vec<_>>(), vec![1, 2]);
}

#[test]
fn renorming_forces_quotients_and_breaks_determining() {
    let query = renorm_instance(3, qr(1, 2)).unwrap();
    let original = gfda_check(&query, query.eval_stage).unwrap();
    assert!(!original.quotient_pass);
    assert!(original.stages[..3].iter().all(|s| !s.quotient.pass));
    assert_eq!(original.determining.verdict, Verdict::Certificate);

    let renormed = renormed_images(&query).unwrap();
    assert!(renormed.system.validate_standard().iter().all(|v| v.pass));
    let rq = renormed.query(&query).unwrap();
    let report = gfda_check(&rq, rq.eval_stage).unwrap();
    assert!(report.quotient_pass);
    assert_eq!(report.determining.verdict, Verdict::Counterexample);
    let c = report.determining.search.counterexample().unwrap();
    assert!(c.verify(&rq).unwrap());
    assert!(!report.pass);
}

#[test]
fn coincident_boundaries_stay_undecided() {
    // π_2 is isometric on the slice, so (close) and (sep) share a boundary at ε = 1/2
    let sys = InverseSystem::l1_drop(3);
    let mut top = Matrix::zeros(3, 2);
    top[(0, 0)] = q(1);
    top[(1, 1)] = q(1);
    let gen = SubspaceGenerator::from_top(sys, top).unwrap();
    let mut query = DeterminingQuery::new(gen, RhoSchedule::harmonic(2), qr(1, 2), 3).unwrap();
    query.certify.delta = qr(1, 8);
    match certify(&query).unwrap() {
        CertifyOutcome::Undecided { delta, undecided_cells, .. } => {
            assert_eq!(delta, qr(1, 8));
            assert!(undecided_cells > 0);
        }
        other => panic!("{other:?}"),
    }
}

fn seq(system: &InverseSystem, tails: Vec<Vector>) -> Vec<CompatibleVector> {
    tails.into_iter().map(|t| system.compatible_from_tail(t).unwrap()).collect()
}

#[test]
fn constant_sequence_profile() {
    let sys = InverseSystem::l1_drop(5);
    let v = vec![q(1), q(2), q(0), qr(1, 2), q(-1)];
    let s = seq(&sys, vec![v.clone(); 4]);
    let dp = dp_diagnostic(&s, &DiagnosticOptions::new(qr(1, 10))).unwrap();
    let total = qr(9, 2);
    let expected: Vec<Scalar> = [q(1), q(3), q(3), qr(7, 2), qr(9, 2)].iter().map(|p| &total - p).collect();
    assert_eq!(dp.diagnostics.profile, expected);
    assert!(dp.diagnostics.nonincreasing);
    assert_eq!(dp.diagnostics.horizon, Some(5));
    assert_eq!(dp.uniform, Some(true));
    assert!(dp.strong);
    let dp = dp_diagnostic(&s, &DiagnosticOptions { horizon: Some(3), ..DiagnosticOptions::new(qr(1, 10)) }).unwrap();
    assert_eq!(dp.uniform, Some(false));
    assert_eq!(dp.blocks, vec![5]);
}

#[test]
fn c0_prefix_sequence_hypotheses_hold_without_strong_convergence() {
    let m = 12;
    let sys = InverseSystem::linf_drop(m);
    let s = seq(&sys, (1..=10).map(|k| ones_prefix(m, k)).collect());
    let opts = DiagnosticOptions::new(qr(1, 1000));
    let dp = dp_diagnostic(&s, &opts).unwrap();
    assert!(dp.diagnostics.profile.iter().all(Scalar::is_zero));
    assert_eq!(dp.uniform, Some(true));
    assert!(!dp.strong);
    let anp = anp_diagnostic(&s, &opts).unwrap();
    assert!(anp.weak_star);
    assert_eq!(anp.diagnostics.limit_norm, Some(q(1)));
    assert_eq!(anp.norms_converge, Some(true));
    assert!(!anp.strong);
    let w = equivalence_witness(&s, &opts).unwrap();
    assert!(w.agree);
    assert!(!w.strong_anp && !w.strong_dp);
}

#[test]
fn geometric_perturbation_converges_strongly() {
    let m = 6;
    let sys = InverseSystem::l1_drop(m);
    let tails = (1..=12)
        .map(|k| {
            let mut v = linalg::unit(m, 0);
            v[1] = Scalar::pow2(-(k as i32));
            v
        })
        .collect();
    let s = seq(&sys, tails);
    let opts = DiagnosticOptions { tail_from: Some(6), ..DiagnosticOptions::new(qr(1, 50)) };
    let anp = anp_diagnostic(&s, &opts).unwrap();
    let residuals: Vec<Scalar> = (7..=12).map(|k| Scalar::pow2(-k) - Scalar::pow2(-12)).collect();
    assert_eq!(anp.diagnostics.norm_residuals, residuals);
    assert!(anp.strong);
    let w = equivalence_witness(&s, &opts).unwrap();
    assert!(w.agree);
    assert!(w.terms.iter().all(|t| t.identity_holds));
    assert!(w.i1.is_some() && w.k1.is_some() && w.k2.is_some());
}

#[test]
fn escaping_mass_fails_both_criteria() {
    let m = 16;
    let sys = InverseSystem::l1_drop(m);
    let tails = (0..12)
        .map(|k| {
            let mut v = linalg::unit(m, 0);
            v[k + 3] = q(1);
            v
        })
        .collect();
    let s = seq(&sys, tails);
    let w = equivalence_witness(&s, &DiagnosticOptions::new(qr(1, 100))).unwrap();
    assert_eq!(w.anp, Some(false));
    assert_eq!(w.dp, Some(false));
    assert!(w.agree);
}
