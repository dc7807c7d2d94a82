mod common;

use ksharp::compile::compile;
use ksharp::ilp::LinearSystem;
use ksharp::random::{integer_net, FormulaGen};
use ksharp::sat::{sat, valid, SatConfig, SolverMode, Validity, Verdict};
use ksharp::verify::{verify, Answer, Problem};
use ksharp::{BigInt, FormulaId, FormulaStore};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn small_formula(seed: u64, depth: usize) -> (FormulaStore, FormulaId) {
    let mut s = FormulaStore::new();
    let gen = FormulaGen { max_size: 16, max_depth: depth, ..FormulaGen::default() };
    let f = gen.generate(&mut StdRng::seed_from_u64(seed), &mut s);
    (s, f)
}

fn system_strategy() -> impl Strategy<Value = (usize, Vec<(Vec<i64>, i64, bool)>)> {
    (1usize..=4).prop_flat_map(|n| {
        let row = (prop::collection::vec(-8i64..=8, n), -8i64..=8, prop::bool::weighted(0.2));
        (Just(n), prop::collection::vec(row, 0..=4))
    })
}

fn build(n: usize, rows: &[(Vec<i64>, i64, bool)], scale: &[i64]) -> LinearSystem {
    let mut sys = LinearSystem::with_vars(n);
    for (i, (coeffs, c, eq)) in rows.iter().enumerate() {
        let k = scale.get(i).copied().unwrap_or(1);
        let coeffs: Vec<BigInt> = coeffs.iter().map(|&a| BigInt::from(a * k)).collect();
        if *eq {
            sys.add_equality(coeffs, BigInt::from(c * k));
        } else {
            sys.add(coeffs, BigInt::from(c * k));
        }
    }
    for i in 0..n {
        let mut row = vec![0; n];
        row[i] = -1;
        sys.add_i64(&row, 6);
    }
    sys
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn ilp_agrees_with_box((n, rows) in system_strategy()) {
        let sys = build(n, &rows, &[]);
        let got = sys.feasible().unwrap();
        prop_assert_eq!(got.is_some(), common::box_search(&sys, 6).is_some(), "{}", sys.dump());
        if let Some(x) = got {
            prop_assert!(sys.is_satisfied_by(&x));
        }
    }

    #[test]
    fn ilp_ignores_positive_scaling((n, rows) in system_strategy(), scale in prop::collection::vec(1i64..=5, 4)) {
        let a = build(n, &rows, &[]).feasible().unwrap();
        let b = build(n, &rows, &scale).feasible().unwrap();
        prop_assert_eq!(a.is_some(), b.is_some());
    }

    #[test]
    fn sat_agrees_with_tree_search(seed in any::<u64>()) {
        let (mut s, f) = small_formula(seed, 2);
        prop_assume!(common::widest_level(&s, f) <= 3);
        let oracle = common::TreeSearch { store: &s, cap: 10 }.satisfiable(f);
        let r = sat(&mut s, f, SatConfig::default()).unwrap();
        match r.verdict {
            Verdict::Sat(w) => {
                prop_assert!(oracle, "solver found a model the search missed for {}", s.display(f));
                prop_assert!(w.satisfies(&s, f));
                prop_assert!(w.graph.is_tree_from(w.point));
                prop_assert!(w.graph.height_from(w.point) <= s.modal_depth(f));
            }
            Verdict::Unsat => prop_assert!(!oracle, "missed model for {}", s.display(f)),
            Verdict::Inconclusive(why) => prop_assert!(false, "{}", why),
        }
    }

    #[test]
    fn validity_is_dual_to_sat(seed in any::<u64>()) {
        let (mut s, f) = small_formula(seed, 3);
        let not_f = s.not(f);
        let (v, _) = valid(&mut s, f, SatConfig::default()).unwrap();
        let r = sat(&mut s, not_f, SatConfig::default()).unwrap();
        match v {
            Validity::Valid => prop_assert!(r.verdict.is_unsat()),
            Validity::Invalid(w) => {
                prop_assert!(r.verdict.is_sat());
                prop_assert!(!w.satisfies(&s, f));
            }
            Validity::Inconclusive(why) => prop_assert!(false, "{}", why),
        }
    }

    #[test]
    fn bounded_degree_is_a_restriction(seed in any::<u64>(), k in 1usize..=3) {
        let (mut s, f) = small_formula(seed, 2);
        let general = sat(&mut s, f, SatConfig::default()).unwrap().verdict;
        let config = SatConfig { mode: SolverMode::BoundedDegree(k), ..SatConfig::default() };
        let bounded = sat(&mut s, f, config).unwrap().verdict;
        if let Verdict::Sat(w) = &bounded {
            prop_assert!(w.satisfies(&s, f));
            prop_assert!(w.graph.max_out_degree() <= k);
            prop_assert!(general.is_sat());
        }
        if let Verdict::Sat(w) = &general {
            if w.graph.max_out_degree() <= k {
                prop_assert!(bounded.is_sat());
            }
        }
    }

    #[test]
    fn same_input_same_witness(seed in any::<u64>()) {
        let (mut s, f) = small_formula(seed, 3);
        let a = sat(&mut s, f, SatConfig::default()).unwrap();
        let b = sat(&mut s, f, SatConfig::default()).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn equivalence_is_both_inclusions(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut s = FormulaStore::new();
        let props = vec!["p".to_string(), "q".to_string()];
        let net = if seed % 2 == 0 {
            integer_net(&mut rng, &props, 3, 1, 2)
        } else {
            let g = FormulaGen { max_size: 10, max_depth: 2, props: props.clone(), ..FormulaGen::default() }
                .generate(&mut rng, &mut s);
            compile(&s, g)
        };
        let f = FormulaGen { max_size: 10, max_depth: 2, props, ..FormulaGen::default() }.generate(&mut rng, &mut s);
        let mut ask = |p| match verify(&mut s, p, &net, f, SatConfig::default()).unwrap().answer {
            Answer::Yes(_) => Some(true),
            Answer::No(_) => Some(false),
            Answer::Inconclusive(_) => None,
        };
        let (p1, p2, p3) = (ask(Problem::P1), ask(Problem::P2), ask(Problem::P3));
        if let (Some(p1), Some(p2), Some(p3)) = (p1, p2, p3) {
            prop_assert_eq!(p1, p2 && p3);
        }
    }
}
