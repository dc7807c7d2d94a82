//! Independent oracles shared by the integration tests. Nothing here calls
//! the solver, the compiler or the ILP code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use ksharp::graph::fixtures;
use ksharp::ilp::LinearSystem;
use ksharp::random::GraphGen;
use ksharp::{Atom, BigInt, FormulaId, FormulaStore, LabeledGraph, Node};
use rand::rngs::StdRng;
use rand::SeedableRng;

/// Paper fixtures plus `extra` seeded random graphs over `p, q, r`.
pub fn corpus(seed: u64, extra: usize) -> Vec<LabeledGraph> {
    let mut out = vec![fixtures::figure_three().graph];
    for n in 1..=3 {
        out.push(fixtures::graph_a(n).graph);
        out.push(fixtures::graph_b(n).graph);
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let gen = GraphGen::default();
    out.extend((0..extra).map(|_| gen.generate(&mut rng)));
    out
}

/// Every point of `0..=cap` in each coordinate, checked directly.
pub fn box_search(system: &LinearSystem, cap: i64) -> Option<Vec<BigInt>> {
    let n = system.num_vars();
    let mut x = vec![0i64; n];
    loop {
        let big: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        if system.is_satisfied_by(&big) {
            return Some(big);
        }
        let mut i = 0;
        loop {
            if i == n {
                return None;
            }
            x[i] += 1;
            if x[i] <= cap {
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

/// Formulas under `#` reachable from `roots` without crossing another `#`.
pub fn counted_below(store: &FormulaStore, roots: &[FormulaId]) -> Vec<FormulaId> {
    let mut counted = BTreeSet::new();
    let mut seen = HashSet::new();
    let mut stack = roots.to_vec();
    while let Some(g) = stack.pop() {
        if !seen.insert(g) {
            continue;
        }
        match store.node(g) {
            Node::Prop(_) => {}
            Node::Not(a) => stack.push(*a),
            Node::Or(a, b) | Node::And(a, b) => stack.extend([*a, *b]),
            Node::GeqZero(e) => {
                for (atom, _) in e.terms() {
                    match atom {
                        Atom::Indicator(h) => stack.push(*h),
                        Atom::Count(h) => {
                            counted.insert(*h);
                        }
                    }
                }
            }
        }
    }
    counted.into_iter().collect()
}

/// Widest level of counted formulas, unioned across the whole level.
pub fn widest_level(store: &FormulaStore, f: FormulaId) -> usize {
    let mut level = vec![f];
    let mut widest = 0;
    while !level.is_empty() {
        level = counted_below(store, &level);
        widest = widest.max(level.len());
    }
    widest
}

/// Truth of `f` at a vertex given its label and how many successors satisfy
/// each counted formula.
fn eval_local(store: &FormulaStore, f: FormulaId, label: &BTreeSet<String>, counts: &HashMap<FormulaId, i64>) -> bool {
    match store.node(f) {
        Node::Prop(p) => label.contains(p.as_str()),
        Node::Not(a) => !eval_local(store, *a, label, counts),
        Node::Or(a, b) => eval_local(store, *a, label, counts) || eval_local(store, *b, label, counts),
        Node::And(a, b) => eval_local(store, *a, label, counts) && eval_local(store, *b, label, counts),
        Node::GeqZero(e) => {
            let mut total = e.constant_term().clone();
            for (atom, k) in e.terms() {
                let v = match atom {
                    Atom::Indicator(g) => i64::from(eval_local(store, *g, label, counts)),
                    Atom::Count(g) => counts[g],
                };
                total += k * BigInt::from(v);
            }
            total >= BigInt::from(0)
        }
    }
}

/// Exhaustive search over tree models of height `md(f)` in which every
/// counted subformula holds at no more than `cap` successors of any vertex.
/// Works on truth profiles: a level is summarised by which vectors of
/// truth values over its formulas some vertex can realise.
pub struct TreeSearch<'a> {
    pub store: &'a FormulaStore,
    pub cap: i64,
}

impl TreeSearch<'_> {
    pub fn satisfiable(&self, f: FormulaId) -> bool {
        let props: Vec<String> = self.store.props(f).into_iter().collect();
        let md = self.store.modal_depth(f);
        self.realizable(&[f], md, &props).iter().any(|v| v[0])
    }

    fn realizable(&self, level: &[FormulaId], height: usize, props: &[String]) -> HashSet<Vec<bool>> {
        let below = counted_below(self.store, level);
        let profiles: Vec<Vec<bool>> = if below.is_empty() || height == 0 {
            Vec::new()
        } else {
            self.realizable(&below, height - 1, props).into_iter().filter(|v| v.iter().any(|&b| b)).collect()
        };
        let mut vectors: HashSet<Vec<i64>> = HashSet::from([vec![0; below.len()]]);
        for prof in &profiles {
            let mut grown = vectors.clone();
            let mut frontier: Vec<Vec<i64>> = vectors.into_iter().collect();
            while let Some(v) = frontier.pop() {
                let w: Vec<i64> = v.iter().zip(prof).map(|(c, &b)| c + i64::from(b)).collect();
                if w.iter().all(|&c| c <= self.cap) && grown.insert(w.clone()) {
                    frontier.push(w);
                }
            }
            vectors = grown;
        }
        let mut out = HashSet::new();
        for mask in 0..(1u32 << props.len()) {
            let label: BTreeSet<String> =
                props.iter().enumerate().filter(|(i, _)| (mask >> i) & 1 == 1).map(|(_, p)| p.clone()).collect();
            for v in &vectors {
                let counts: HashMap<FormulaId, i64> = below.iter().copied().zip(v.iter().copied()).collect();
                out.insert(level.iter().map(|&g| eval_local(self.store, g, &label, &counts)).collect());
            }
        }
        out
    }
}

/// `u` has at least `k` successors where `f` holds, counted directly.
pub fn graded(store: &FormulaStore, g: &LabeledGraph, u: usize, k: usize, f: FormulaId) -> bool {
    g.successors(u).iter().filter(|&&v| ksharp::check(store, g, v, f)).count() >= k
}
