//! Labeled directed graphs, pointed graphs and the K# model checker.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::formula::{Atom, FormulaId, FormulaStore, LinExpr, Node};

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),
    #[error("label `{1}` of vertex `{0}` is not a declared proposition")]
    UndeclaredProposition(String, String),
    #[error("a point is required")]
    MissingPoint,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A finite directed graph (no parallel edges, self-loops allowed) whose
/// vertices are labeled with sets of propositions from a declared universe.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    props: Vec<String>,
    prop_index: HashMap<String, usize>,
    names: Vec<String>,
    name_index: HashMap<String, usize>,
    labels: Vec<BTreeSet<usize>>,
    succ: Vec<Vec<usize>>,
}

impl LabeledGraph {
    pub fn new<S: AsRef<str>>(props: &[S]) -> Self {
        let mut g = LabeledGraph::default();
        for p in props {
            g.declare_prop(p.as_ref());
        }
        g
    }

    /// Adds `p` to the proposition universe if absent.
    pub fn declare_prop(&mut self, p: &str) -> usize {
        if let Some(&i) = self.prop_index.get(p) {
            return i;
        }
        self.props.push(p.to_owned());
        self.prop_index.insert(p.to_owned(), self.props.len() - 1);
        self.props.len() - 1
    }

    pub fn add_vertex<S: AsRef<str>>(&mut self, name: &str, labels: &[S]) -> Result<usize, GraphError> {
        if self.name_index.contains_key(name) {
            return Err(GraphError::DuplicateVertex(name.to_owned()));
        }
        let mut set = BTreeSet::new();
        for l in labels {
            let i = self.prop_index.get(l.as_ref()).ok_or_else(|| {
                GraphError::UndeclaredProposition(name.to_owned(), l.as_ref().to_owned())
            })?;
            set.insert(*i);
        }
        let v = self.names.len();
        self.names.push(name.to_owned());
        self.name_index.insert(name.to_owned(), v);
        self.labels.push(set);
        self.succ.push(Vec::new());
        Ok(v)
    }

    /// Inserts the edge; returns `false` if it was already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        assert!(v < self.names.len(), "edge target out of range");
        match self.succ[u].binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.succ[u].insert(pos, v);
                true
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn vertices(&self) -> std::ops::Range<usize> {
        0..self.names.len()
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.name_index.get(name).copied()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.succ[v].len()
    }

    /// `ℓ(v)(p)`; propositions outside the universe are false.
    pub fn holds(&self, v: usize, p: &str) -> bool {
        self.prop_index.get(p).is_some_and(|i| self.labels[v].contains(i))
    }

    pub fn label(&self, v: usize) -> impl Iterator<Item = &str> {
        self.labels[v].iter().map(|&i| self.props[i].as_str())
    }

    /// The same graph with vertices renamed and reordered by `perm`
    /// (`perm[old] = new`).
    pub fn permuted(&self, perm: &[usize]) -> LabeledGraph {
        assert_eq!(perm.len(), self.vertex_count());
        let mut inverse = vec![0; perm.len()];
        for (old, &new) in perm.iter().enumerate() {
            inverse[new] = old;
        }
        let mut g = LabeledGraph::new(&self.props);
        for &old in &inverse {
            let labels: Vec<&str> = self.label(old).collect();
            g.add_vertex(&self.names[old], &labels).expect("names are unique");
        }
        for u in self.vertices() {
            for &v in self.successors(u) {
                g.add_edge(perm[u], perm[v]);
            }
        }
        g
    }

    /// Is the subgraph reachable from `root` a tree rooted there?
    pub fn is_tree_from(&self, root: usize) -> bool {
        let mut indegree = vec![0usize; self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(u) = stack.pop() {
            for &v in self.successors(u) {
                indegree[v] += 1;
                if indegree[v] > 1 || v == root {
                    return false;
                }
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        true
    }

    /// Length of the longest path from `root` (assumes acyclic reachability).
    pub fn height_from(&self, root: usize) -> usize {
        fn go(g: &LabeledGraph, u: usize, memo: &mut Vec<Option<usize>>) -> usize {
            if let Some(h) = memo[u] {
                return h;
            }
            let h = g.successors(u).iter().map(|&v| go(g, v, memo) + 1).max().unwrap_or(0);
            memo[u] = Some(h);
            h
        }
        go(self, root, &mut vec![None; self.vertex_count()])
    }

    pub fn max_out_degree(&self) -> usize {
        self.succ.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn to_json(&self, point: Option<usize>) -> GraphJson {
        GraphJson {
            propositions: self.props.clone(),
            vertices: self.names.clone(),
            edges: self
                .vertices()
                .flat_map(|u| self.succ[u].iter().map(move |&v| (u, v)))
                .map(|(u, v)| [self.names[u].clone(), self.names[v].clone()])
                .collect(),
            labels: self
                .vertices()
                .filter(|&v| !self.labels[v].is_empty())
                .map(|v| (self.names[v].clone(), self.label(v).map(str::to_owned).collect()))
                .collect(),
            point: point.map(|p| self.names[p].clone()),
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<(LabeledGraph, Option<usize>), GraphError> {
        let mut g = LabeledGraph::new(&j.propositions);
        for name in &j.vertices {
            let labels: &[String] = j.labels.get(name).map(Vec::as_slice).unwrap_or(&[]);
            g.add_vertex(name, labels)?;
        }
        if let Some(name) = j.labels.keys().find(|k| g.vertex(k).is_none()) {
            return Err(GraphError::UnknownVertex(name.clone()));
        }
        for [a, b] in &j.edges {
            let u = g.vertex(a).ok_or_else(|| GraphError::UnknownVertex(a.clone()))?;
            let v = g.vertex(b).ok_or_else(|| GraphError::UnknownVertex(b.clone()))?;
            if !g.add_edge(u, v) {
                return Err(GraphError::DuplicateEdge(a.clone(), b.clone()));
            }
        }
        let point = match &j.point {
            Some(p) => Some(g.vertex(p).ok_or_else(|| GraphError::UnknownVertex(p.clone()))?),
            None => None,
        };
        Ok((g, point))
    }

    pub fn parse_json(text: &str) -> Result<(LabeledGraph, Option<usize>), GraphError> {
        let j: GraphJson = serde_json::from_str(text)?;
        Self::from_json(&j)
    }
}

/// On-disk graph format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    #[serde(default)]
    pub propositions: Vec<String>,
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
    #[serde(default)]
    pub labels: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
}

/// A graph with a designated vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedGraph {
    pub graph: LabeledGraph,
    pub point: usize,
}

impl PointedGraph {
    pub fn new(graph: LabeledGraph, point: usize) -> Self {
        assert!(point < graph.vertex_count(), "point must be a vertex");
        PointedGraph { graph, point }
    }

    pub fn to_json(&self) -> GraphJson {
        self.graph.to_json(Some(self.point))
    }

    pub fn parse_json(text: &str) -> Result<PointedGraph, GraphError> {
        let (g, p) = LabeledGraph::parse_json(text)?;
        Ok(PointedGraph::new(g, p.ok_or(GraphError::MissingPoint)?))
    }

    pub fn satisfies(&self, store: &FormulaStore, f: FormulaId) -> bool {
        check(store, &self.graph, self.point, f)
    }
}

/// Evaluates formulas over one graph, memoizing per (formula, vertex).
pub struct ModelChecker<'a> {
    store: &'a FormulaStore,
    graph: &'a LabeledGraph,
    memo: HashMap<(FormulaId, usize), bool>,
}

impl<'a> ModelChecker<'a> {
    pub fn new(store: &'a FormulaStore, graph: &'a LabeledGraph) -> Self {
        ModelChecker { store, graph, memo: HashMap::new() }
    }

    pub fn check(&mut self, u: usize, f: FormulaId) -> bool {
        if let Some(&b) = self.memo.get(&(f, u)) {
            return b;
        }
        let b = match self.store.node(f) {
            Node::Prop(p) => self.graph.holds(u, p),
            Node::Not(a) => !self.check(u, *a),
            Node::Or(a, b) => self.check(u, *a) || self.check(u, *b),
            Node::And(a, b) => self.check(u, *a) && self.check(u, *b),
            Node::GeqZero(e) => {
                let e = e.clone();
                self.eval(u, &e) >= BigInt::default()
            }
        };
        self.memo.insert((f, u), b);
        b
    }

    /// `[[E]]` at `u`.
    pub fn eval(&mut self, u: usize, e: &LinExpr) -> BigInt {
        e.eval(|atom| match atom {
            Atom::Indicator(g) => BigInt::from(u8::from(self.check(u, g))),
            Atom::Count(g) => {
                let n = self.graph.successors(u).to_vec().into_iter().filter(|&v| self.check(v, g)).count();
                BigInt::from(n)
            }
        })
    }
}

/// `(G, u) ⊨ f`.
pub fn check(store: &FormulaStore, graph: &LabeledGraph, u: usize, f: FormulaId) -> bool {
    ModelChecker::new(store, graph).check(u, f)
}

/// `[[E]]_{G,u}`.
pub fn eval_expr(store: &FormulaStore, graph: &LabeledGraph, u: usize, e: &LinExpr) -> BigInt {
    ModelChecker::new(store, graph).eval(u, e)
}

/// Every corpus member satisfying `f` also satisfies `g`.
pub fn semantics_subset(corpus: &[PointedGraph], store: &FormulaStore, f: FormulaId, g: FormulaId) -> bool {
    corpus.iter().all(|pg| {
        let mut mc = ModelChecker::new(store, &pg.graph);
        !mc.check(pg.point, f) || mc.check(pg.point, g)
    })
}

/// Small named graphs used across tests and examples.
pub mod fixtures {
    use super::*;

    /// The four-vertex example: point `u` labeled `p` with two successors
    /// (`v` unlabeled and `w` labeled `q`), and `v -> y` with `y` labeled `p`.
    pub fn figure_three() -> PointedGraph {
        let mut g = LabeledGraph::new(&["p", "q"]);
        let u = g.add_vertex("u", &["p"]).unwrap();
        let v = g.add_vertex::<&str>("v", &[]).unwrap();
        let w = g.add_vertex("w", &["q"]).unwrap();
        let y = g.add_vertex("y", &["p"]).unwrap();
        g.add_edge(u, v);
        g.add_edge(u, w);
        g.add_edge(v, y);
        PointedGraph::new(g, u)
    }

    /// Centre `w` with `n` successors labeled `p` and `q_succ` labeled `q`.
    fn star(n: usize, q_succ: usize, centre: &str, prime: &str) -> PointedGraph {
        let mut g = LabeledGraph::new(&["p", "q"]);
        let w = g.add_vertex::<&str>(centre, &[]).unwrap();
        for i in 1..=n {
            let u = g.add_vertex(&format!("u{prime}{i}"), &["p"]).unwrap();
            g.add_edge(w, u);
        }
        for i in 1..=q_succ {
            let v = g.add_vertex(&format!("v{prime}{i}"), &["q"]).unwrap();
            g.add_edge(w, v);
        }
        PointedGraph::new(g, w)
    }

    /// `A_n`: `w` has `n` `p`-successors and `n` `q`-successors.
    pub fn graph_a(n: usize) -> PointedGraph {
        star(n, n, "w", "")
    }

    /// `B_n`: `w'` has `n` `p`-successors and `n + 1` `q`-successors.
    pub fn graph_b(n: usize) -> PointedGraph {
        star(n, n + 1, "w'", "'")
    }
}
