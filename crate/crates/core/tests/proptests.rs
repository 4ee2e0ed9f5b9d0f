use std::sync::Arc;

use proptest::prelude::*;

use banach_limits::determining::{dp_diagnostic, search, DeterminingQuery, DiagnosticOptions, RhoSchedule, SearchConfig};
use banach_limits::linalg::{self, Matrix};
use banach_limits::linmap::LinearMap;
use banach_limits::random;
use banach_limits::scalar::Scalar;
use banach_limits::space::{NormSpec, NormedSpace};
use banach_limits::systems::{CompatibleVector, InverseSystem, SubspaceGenerator};

fn drop_system(kind: u8, m: usize) -> InverseSystem {
    match kind % 3 {
        0 => InverseSystem::l1_drop(m),
        1 => InverseSystem::linf_drop(m),
        _ => InverseSystem::l2_drop(m),
    }
}

fn random_map(seed: u64, dims: (usize, usize)) -> LinearMap {
    let mut rng = random::rng(seed, 1);
    let x = Arc::new(random::any_polytope_space(&mut rng, dims.0));
    let y = Arc::new(random::any_polytope_space(&mut rng, dims.1));
    let rows = (0..dims.1).map(|_| random::int_vector(&mut rng, dims.0, -3, 3)).collect();
    LinearMap::new(x, y, Matrix::from_rows_with_cols(rows, dims.0).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Against the defining formula for H-balls and a supporting-functional
    /// certificate checked vertex by vertex for V-balls.
    #[test]
    fn gauge_matches_direct_oracle(seed in any::<u64>(), dim in 1usize..=4) {
        let mut rng = random::rng(seed, 0);
        let space = random::polytope_space(&mut rng, dim);
        let x = random::rational_vector(&mut rng, dim, 12, 5);
        let norm = space.norm(&x).unwrap();
        match space.spec() {
            NormSpec::HPolytope { functionals } => {
                let direct = functionals.iter().map(|f| linalg::dot(f, &x).abs()).fold(Scalar::zero(), Scalar::max);
                prop_assert_eq!(norm, direct);
            }
            NormSpec::VPolytope { vertices } => {
                let (f, value) = space.attaining_functional(&x).unwrap();
                prop_assert_eq!(&value, &norm);
                prop_assert_eq!(linalg::dot(&f, &x), norm.clone());
                prop_assert!(vertices.iter().all(|v| linalg::dot(&f, v).abs() <= Scalar::one()));
                prop_assert!(vertices.iter().all(|v| space.norm(v).unwrap() <= Scalar::one()));
                prop_assert!((space.norm_f64(&linalg::to_f64(&x)) - norm.to_f64()).abs() < 1e-9);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn bipolar(seed in any::<u64>(), dim in 1usize..=4) {
        let mut rng = random::rng(seed, 0);
        let space = random::any_polytope_space(&mut rng, dim);
        let bidual = NormedSpace::new("bidual", space.dual().dual().spec().clone()).unwrap();
        for _ in 0..10 {
            let x = random::rational_vector(&mut rng, dim, 9, 4);
            prop_assert_eq!(space.norm(&x).unwrap(), bidual.norm(&x).unwrap());
        }
    }

    #[test]
    fn adjoint_preserves_operator_norm(seed in any::<u64>(), m in 1usize..=3, n in 1usize..=3) {
        let t = random_map(seed, (m, n));
        let norm = t.operator_norm().unwrap();
        let adjoint = t.adjoint().operator_norm().unwrap();
        prop_assert!(norm.is_exact() && adjoint.is_exact());
        prop_assert_eq!(norm.value(), adjoint.value());
    }

    #[test]
    fn composition_is_submultiplicative(seed in any::<u64>(), dims in (1usize..=3, 1usize..=3, 1usize..=3)) {
        let inner = random_map(seed, (dims.0, dims.1));
        let mut rng = random::rng(seed, 2);
        let z = Arc::new(random::any_polytope_space(&mut rng, dims.2));
        let rows = (0..dims.2).map(|_| random::int_vector(&mut rng, dims.1, -3, 3)).collect();
        let outer = LinearMap::new(inner.target().clone(), z, Matrix::from_rows_with_cols(rows, dims.1).unwrap()).unwrap();
        let composed = outer.compose(&inner).unwrap().operator_norm().unwrap();
        let bound = outer.operator_norm().unwrap().value() * inner.operator_norm().unwrap().value();
        prop_assert!(*composed.value() <= bound);
    }

    #[test]
    fn stage_norms_nondecreasing(seed in any::<u64>(), kind in 0u8..3, m in 2usize..=12) {
        let mut rng = random::rng(seed, 0);
        let sys = drop_system(kind, m);
        let v = sys.compatible_from_tail(random::rational_vector(&mut rng, m, 10, 3)).unwrap();
        let norms = v.stage_norms().unwrap().norms;
        prop_assert!(norms.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn drop_profile_nonincreasing(seed in any::<u64>(), kind in 0u8..2, len in 2usize..=8) {
        let mut rng = random::rng(seed, 0);
        let m = 10;
        let sys = drop_system(kind, m);
        let seq: Vec<CompatibleVector> = (0..len)
            .map(|_| sys.compatible_from_tail(random::rational_vector(&mut rng, m, 6, 5)).unwrap())
            .collect();
        let report = dp_diagnostic(&seq, &DiagnosticOptions::new(Scalar::ratio(1, 1000))).unwrap();
        let profile = &report.diagnostics.profile;
        prop_assert!(profile.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(report.diagnostics.tail_profile.iter().zip(profile).all(|(t, u)| t <= u));
        prop_assert!(profile[m - 1].is_zero());
    }
}

fn small_query(seed: u64, rho: RhoSchedule, eps: Scalar) -> DeterminingQuery {
    let mut rng = random::rng(seed, 3);
    let m = 6;
    let top = Matrix::from_rows_with_cols((0..m).map(|_| random::int_vector(&mut rng, 2, -2, 2)).collect(), 2).unwrap();
    let gen = SubspaceGenerator::from_top(InverseSystem::l1_drop(m), top).unwrap();
    let mut q = DeterminingQuery::new(gen, rho, eps, m).unwrap();
    q.search = SearchConfig { starts: 8, budget: 120, seed };
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn search_counterexamples_are_sound(seed in any::<u64>(), n in 1usize..=3, eps_den in 2i64..=8) {
        let q = small_query(seed, RhoSchedule::harmonic(n), Scalar::ratio(1, eps_den));
        if let Some(c) = search(&q).unwrap().counterexample() {
            prop_assert!(c.verify(&q).unwrap());
            let e = &c.evaluation;
            prop_assert!(e.rho_slacks.iter().chain(&e.rho_slacks_prime).all(Scalar::is_positive));
            prop_assert!(e.close_slack.is_positive());
            prop_assert!(e.separation >= &q.eps * &e.max_norm);
        }
    }

    /// A violating pair stays violating for smaller `ε` and larger `ρ`.
    #[test]
    fn violations_monotone_in_eps_and_rho(
        seed in any::<u64>(),
        a in proptest::collection::vec(-6i64..=6, 2),
        b in proptest::collection::vec(-6i64..=6, 2),
        eps_den in 1i64..=8,
    ) {
        let a: Vec<Scalar> = a.into_iter().map(Scalar::from).collect();
        let b: Vec<Scalar> = b.into_iter().map(Scalar::from).collect();
        let eps = Scalar::ratio(1, eps_den);
        let q = small_query(seed, RhoSchedule::harmonic(2), eps.clone());
        let base = q.evaluate(&a, &b).unwrap();
        let smaller_eps = Scalar::ratio(1, 2 * eps_den);
        let wider = small_query(seed, RhoSchedule::new(vec![Scalar::one(); 2]).unwrap(), eps.clone());
        let widened = wider.evaluate(&a, &b).unwrap();
        if base.is_counterexample(&eps) {
            prop_assert!(base.is_counterexample(&smaller_eps));
            prop_assert!(widened.is_counterexample(&eps));
        }
        if base.hypotheses_hold() {
            prop_assert!(widened.hypotheses_hold());
        }
    }
}
