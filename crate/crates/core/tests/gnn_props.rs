use ksharp::compile::{compile, compile_cnf, enumerate_subformulas};
use ksharp::gnn::Gnn;
use ksharp::random::{integer_net, FormulaGen, GraphGen};
use ksharp::translate::{size_bound, translate};
use ksharp::{check, BigRational, FormulaId, FormulaStore, LabeledGraph, Rational64};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

fn props() -> Vec<String> {
    vec!["p".into(), "q".into(), "r".into()]
}

fn formula(seed: u64) -> (FormulaStore, FormulaId) {
    let mut s = FormulaStore::new();
    let f = FormulaGen::default().generate(&mut StdRng::seed_from_u64(seed), &mut s);
    (s, f)
}

fn graphs(seed: u64, n: usize) -> Vec<LabeledGraph> {
    let mut rng = StdRng::seed_from_u64(seed ^ 0xa11ce);
    let gen = GraphGen::default();
    (0..n).map(|_| gen.generate(&mut rng)).collect()
}

fn net(seed: u64) -> Gnn<BigRational> {
    let mut rng = StdRng::seed_from_u64(seed);
    let dim = rng.gen_range(3..=5);
    let layers = rng.gen_range(0..=3);
    integer_net(&mut rng, &props(), dim, layers, 3)
}

/// Net with weights in `{k/4}`, which can leave `{0,1}`.
fn fractional_net(seed: u64) -> Gnn<BigRational> {
    let base = net(seed);
    let quarter = BigRational::new(1.into(), 4.into());
    let layers: Vec<_> = base
        .layers()
        .iter()
        .map(|l| {
            let mut l = l.clone();
            for x in l.c.iter_mut().chain(l.a.iter_mut()).flatten() {
                *x = &*x * &quarter;
            }
            l
        })
        .collect();
    Gnn::new(base.props().to_vec(), base.dimension(), layers, base.cls().to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn states_stay_in_unit_interval(seed in any::<u64>()) {
        let n = fractional_net(seed);
        for g in graphs(seed, 4) {
            let state = n.run(&g);
            for x in state.rows.iter().flatten() {
                prop_assert!(*x >= BigRational::zero() && *x <= BigRational::one());
            }
        }
        let n = net(seed);
        prop_assert!(n.has_boolean_states());
        for g in graphs(seed, 4) {
            prop_assert!(n.run(&g).is_boolean());
        }
    }

    #[test]
    fn classify_ignores_vertex_order(seed in any::<u64>()) {
        let n = net(seed);
        let mut rng = StdRng::seed_from_u64(seed);
        for g in graphs(seed, 4) {
            let mut perm: Vec<usize> = g.vertices().collect();
            perm.shuffle(&mut rng);
            let h = g.permuted(&perm);
            let a = n.classify_all(&g);
            let b = n.classify_all(&h);
            for v in g.vertices() {
                prop_assert_eq!(a[v], b[perm[v]]);
            }
        }
    }

    #[test]
    fn far_vertices_do_not_matter(seed in any::<u64>()) {
        // a new vertex pointing into the graph is reachable from nobody
        let n = net(seed);
        for g in graphs(seed, 4) {
            let mut h = g.clone();
            let x = h.add_vertex("fresh", &["p", "q"]).unwrap();
            for v in g.vertices() {
                h.add_edge(x, v);
            }
            let a = n.classify_all(&g);
            let b = n.classify_all(&h);
            prop_assert_eq!(&a[..], &b[..g.vertex_count()]);
        }
    }

    #[test]
    fn rational64_agrees_with_bigrational(seed in any::<u64>()) {
        let n = fractional_net(seed);
        let small: Gnn<Rational64> = n.convert().unwrap();
        for g in graphs(seed, 3) {
            prop_assert_eq!(n.classify_all(&g), small.classify_all(&g));
        }
    }

    #[test]
    fn gnn_json_round_trip(seed in any::<u64>()) {
        let n = fractional_net(seed);
        let text = serde_json::to_string(&n.to_json()).unwrap();
        prop_assert_eq!(Gnn::<BigRational>::parse_json(&text).unwrap(), n);
    }

    #[test]
    fn compiled_net_tracks_every_subformula(seed in any::<u64>()) {
        let (s, f) = formula(seed);
        let n = compile(&s, f);
        prop_assert!(n.has_boolean_states());
        let order = enumerate_subformulas(&s, f);
        prop_assert_eq!(n.layers().len(), order.len());
        for g in graphs(seed, 8) {
            let state = n.run(&g);
            prop_assert!(state.is_boolean());
            let verdicts = n.classify_all(&g);
            for v in g.vertices() {
                prop_assert_eq!(verdicts[v], check(&s, &g, v, f));
                for (l, &phi) in order.iter().enumerate() {
                    prop_assert_eq!(state.at(v)[l].is_one(), check(&s, &g, v, phi));
                }
            }
        }
    }

    #[test]
    fn cnf_net_agrees_and_is_shallower(seed in any::<u64>()) {
        let (s, f) = formula(seed);
        let Ok(n) = compile_cnf(&s, f) else { return Ok(()) };
        prop_assert!(n.layers().len() <= compile(&s, f).layers().len());
        prop_assert!(n.has_boolean_states());
        for g in graphs(seed, 8) {
            let verdicts = n.classify_all(&g);
            for v in g.vertices() {
                prop_assert_eq!(verdicts[v], check(&s, &g, v, f));
            }
        }
    }

    #[test]
    fn translation_matches_integer_nets(seed in any::<u64>()) {
        let n = net(seed);
        let mut s = FormulaStore::new();
        let tr = translate(&mut s, &n);
        prop_assert!(tr.boolean_states);
        prop_assert!(s.dag_size(tr.root) <= size_bound(&n) + n.dimension() + 1);
        for g in graphs(seed, 8) {
            let verdicts = n.classify_all(&g);
            for v in g.vertices() {
                prop_assert_eq!(check(&s, &g, v, tr.root), verdicts[v]);
            }
        }
    }

    #[test]
    fn translation_of_compiled_formula(seed in any::<u64>()) {
        let (mut s, f) = formula(seed);
        let n = compile(&s, f);
        let tr = translate(&mut s, &n);
        for g in graphs(seed, 8) {
            for v in g.vertices() {
                prop_assert_eq!(check(&s, &g, v, tr.root), check(&s, &g, v, f));
            }
        }
    }
}
