//! Seeded generators for formulas, graphs and integer-weight GNNs.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{Atom, FormulaId, FormulaStore, LinExpr};
use crate::gnn::{Gnn, Layer};
use crate::graph::LabeledGraph;

#[derive(Clone, Debug)]
pub struct FormulaGen {
    pub props: Vec<String>,
    /// Upper bound on the syntax tree size.
    pub max_size: usize,
    pub max_depth: usize,
    /// Coefficients and constants are drawn from `[-max_coef, max_coef]`.
    pub max_coef: i64,
    pub max_terms: usize,
}

impl Default for FormulaGen {
    fn default() -> Self {
        FormulaGen { props: vec!["p".into(), "q".into(), "r".into()], max_size: 25, max_depth: 3, max_coef: 8, max_terms: 2 }
    }
}

impl FormulaGen {
    pub fn generate<R: Rng>(&self, rng: &mut R, store: &mut FormulaStore) -> FormulaId {
        let size = rng.gen_range(1..=self.max_size);
        self.gen(rng, store, size, self.max_depth)
    }

    fn prop<R: Rng>(&self, rng: &mut R, store: &mut FormulaStore) -> FormulaId {
        let p = self.props.choose(rng).expect("at least one proposition");
        store.prop(p)
    }

    fn gen<R: Rng>(&self, rng: &mut R, store: &mut FormulaStore, size: usize, depth: usize) -> FormulaId {
        if size <= 1 {
            return self.prop(rng, store);
        }
        match rng.gen_range(0..10) {
            0 | 1 => {
                let a = self.gen(rng, store, size - 1, depth);
                store.not(a)
            }
            2..=5 if size >= 3 => {
                let left = rng.gen_range(1..=size - 2);
                let a = self.gen(rng, store, left, depth);
                let b = self.gen(rng, store, size - 1 - left, depth);
                if rng.gen_bool(0.5) {
                    store.or(a, b)
                } else {
                    store.and(a, b)
                }
            }
            _ => self.inequality(rng, store, size - 1, depth),
        }
    }

    /// `c + Σ kᵢ·atomᵢ >= 0` whose atoms share a budget of `size` nodes.
    fn inequality<R: Rng>(&self, rng: &mut R, store: &mut FormulaStore, size: usize, depth: usize) -> FormulaId {
        let terms = rng.gen_range(1..=self.max_terms.min(size).max(1));
        let mut budget = size;
        let mut parts = Vec::new();
        for i in 0..terms {
            let share = if i + 1 == terms { budget } else { rng.gen_range(1..=budget - (terms - 1 - i)) };
            budget -= share;
            let count = depth > 0 && rng.gen_bool(0.7);
            let inner = self.gen(rng, store, share, if count { depth - 1 } else { depth });
            let atom = if count { Atom::Count(inner) } else { Atom::Indicator(inner) };
            parts.push((atom, self.coefficient(rng)));
        }
        let c = BigInt::from(rng.gen_range(-self.max_coef..=self.max_coef));
        store.geq_zero(LinExpr::from_parts(c, parts))
    }

    fn coefficient<R: Rng>(&self, rng: &mut R) -> BigInt {
        loop {
            let k = rng.gen_range(-self.max_coef..=self.max_coef);
            if k != 0 {
                return BigInt::from(k);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct GraphGen {
    pub props: Vec<String>,
    pub max_vertices: usize,
    pub max_degree: usize,
}

impl Default for GraphGen {
    fn default() -> Self {
        GraphGen { props: vec!["p".into(), "q".into(), "r".into()], max_vertices: 8, max_degree: 3 }
    }
}

impl GraphGen {
    pub fn generate<R: Rng>(&self, rng: &mut R) -> LabeledGraph {
        let n = rng.gen_range(1..=self.max_vertices);
        let mut g = LabeledGraph::new(&self.props);
        for v in 0..n {
            let labels: Vec<&String> = self.props.iter().filter(|_| rng.gen_bool(0.5)).collect();
            g.add_vertex(&format!("v{v}"), &labels).expect("fresh vertex name");
        }
        let all: Vec<usize> = (0..n).collect();
        for u in 0..n {
            let k = rng.gen_range(0..=self.max_degree.min(n));
            for &v in all.choose_multiple(rng, k) {
                g.add_edge(u, v);
            }
        }
        g
    }
}

/// A net with weights in `[-max_weight, max_weight]`, so every reachable
/// state is `{0,1}`-valued.
pub fn integer_net<R: Rng>(
    rng: &mut R,
    props: &[String],
    dim: usize,
    layers: usize,
    max_weight: i64,
) -> Gnn<BigRational> {
    let w = |rng: &mut R| BigRational::from_integer(BigInt::from(rng.gen_range(-max_weight..=max_weight)));
    let mut ls = Vec::with_capacity(layers);
    for _ in 0..layers {
        let mut l = Layer::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                // sparse, like hand-written nets
                if rng.gen_bool(0.3) {
                    l.c[i][j] = w(rng);
                }
                if rng.gen_bool(0.2) {
                    l.a[i][j] = w(rng);
                }
            }
            l.b[i] = w(rng);
        }
        ls.push(l);
    }
    let cls = (0..dim).map(|_| w(rng)).collect();
    Gnn::new(props.to_vec(), dim, ls, cls).expect("generated dimensions are consistent")
}
