//! Syntax of K#: hash-consed formula DAG, linear expressions over `1_φ` and
//! `#φ`, subformula closure, modal depth and negation normal form.
//!
//! Formulas live in a [`FormulaStore`]. Structurally equal formulas are
//! interned to the same [`FormulaId`], and a node's children always have
//! smaller ids than the node itself, so ascending id order is a topological
//! order of the DAG.

mod dag_json;
mod expr;
mod parse;
mod print;

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use dag_json::{DagDump, DagError, DagNode, DagTerm};
pub use expr::{Atom, LinExpr};
pub use parse::{parse, ParseError};
pub use print::Printer;

/// Handle to a node of a [`FormulaStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormulaId(pub(crate) u32);

impl FormulaId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Prop(String),
    Not(FormulaId),
    Or(FormulaId, FormulaId),
    And(FormulaId, FormulaId),
    /// `E >= 0`.
    GeqZero(LinExpr),
}

impl Node {
    /// Direct children, including the formulas under `1_ψ` and `#ψ`.
    pub fn children(&self) -> Vec<FormulaId> {
        match self {
            Node::Prop(_) => Vec::new(),
            Node::Not(a) => vec![*a],
            Node::Or(a, b) | Node::And(a, b) => vec![*a, *b],
            Node::GeqZero(e) => e.terms().iter().map(|(atom, _)| atom.formula()).collect(),
        }
    }
}

/// Append-only interning arena for formulas.
#[derive(Clone, Debug, Default)]
pub struct FormulaStore {
    nodes: Vec<Node>,
    index: HashMap<Node, FormulaId>,
    nnf_cache: HashMap<(FormulaId, bool), FormulaId>,
}

impl FormulaStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: FormulaId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = FormulaId> {
        (0..self.nodes.len() as u32).map(FormulaId)
    }

    fn intern(&mut self, node: Node) -> FormulaId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        debug_assert!(node.children().iter().all(|c| c.index() < self.nodes.len()));
        let id = FormulaId(u32::try_from(self.nodes.len()).expect("formula store overflow"));
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    pub fn prop(&mut self, name: &str) -> FormulaId {
        self.intern(Node::Prop(name.to_owned()))
    }

    pub fn not(&mut self, a: FormulaId) -> FormulaId {
        self.intern(Node::Not(a))
    }

    pub fn or(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        self.intern(Node::Or(a, b))
    }

    pub fn and(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        self.intern(Node::And(a, b))
    }

    pub fn geq_zero(&mut self, e: LinExpr) -> FormulaId {
        self.intern(Node::GeqZero(e))
    }

    /// `E1 >= E2`, i.e. `E1 - E2 >= 0`.
    pub fn geq(&mut self, lhs: LinExpr, rhs: &LinExpr) -> FormulaId {
        self.geq_zero(lhs - rhs)
    }

    /// `0 >= 0`.
    pub fn top(&mut self) -> FormulaId {
        self.geq_zero(LinExpr::constant(0))
    }

    /// `-1 >= 0`.
    pub fn bottom(&mut self) -> FormulaId {
        self.geq_zero(LinExpr::constant(-1))
    }

    /// `¬a ∨ b`.
    pub fn implies(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        let na = self.not(a);
        self.or(na, b)
    }

    /// `(a → b) ∧ (b → a)`.
    pub fn iff(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        let ab = self.implies(a, b);
        let ba = self.implies(b, a);
        self.and(ab, ba)
    }

    /// Left-nested conjunction; `⊤` when empty.
    pub fn and_all<I: IntoIterator<Item = FormulaId>>(&mut self, items: I) -> FormulaId {
        let mut acc = None;
        for f in items {
            acc = Some(match acc {
                None => f,
                Some(a) => self.and(a, f),
            });
        }
        acc.unwrap_or_else(|| self.top())
    }

    /// Graded diamond: `#φ >= k`.
    pub fn at_least(&mut self, k: i64, f: FormulaId) -> FormulaId {
        self.geq_zero(LinExpr::count(f) - &LinExpr::constant(k))
    }

    /// Box: `#(¬φ) <= 0`.
    pub fn boxed(&mut self, f: FormulaId) -> FormulaId {
        let nf = self.not(f);
        self.geq_zero(-LinExpr::count(nf))
    }

    /// `sub(φ)`: every node reachable from `f`, including through `1_ψ` and `#ψ`.
    pub fn subformulas(&self, f: FormulaId) -> BTreeSet<FormulaId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![f];
        while let Some(id) = stack.pop() {
            if seen.insert(id) {
                stack.extend(self.node(id).children());
            }
        }
        seen
    }

    /// Propositions occurring in `f`, sorted.
    pub fn props(&self, f: FormulaId) -> BTreeSet<String> {
        self.subformulas(f)
            .into_iter()
            .filter_map(|id| match self.node(id) {
                Node::Prop(p) => Some(p.clone()),
                _ => None,
            })
            .collect()
    }

    /// Number of distinct DAG nodes reachable from `f`.
    pub fn dag_size(&self, f: FormulaId) -> usize {
        self.subformulas(f).len()
    }

    /// Size of the unshared syntax tree (formula nodes only), saturating.
    pub fn tree_size(&self, f: FormulaId) -> usize {
        let mut memo: HashMap<FormulaId, usize> = HashMap::new();
        for id in self.subformulas(f) {
            let s = 1usize.saturating_add(
                self.node(id)
                    .children()
                    .iter()
                    .fold(0usize, |acc, c| acc.saturating_add(memo[c])),
            );
            memo.insert(id, s);
        }
        memo[&f]
    }

    /// Modal depth: `md(#φ) = md(φ) + 1`, `md(1_φ) = md(φ)`, max elsewhere.
    pub fn modal_depth(&self, f: FormulaId) -> usize {
        let mut memo: HashMap<FormulaId, usize> = HashMap::new();
        // ascending ids visit children first
        for id in self.subformulas(f) {
            let d = match self.node(id) {
                Node::Prop(_) => 0,
                Node::Not(a) => memo[a],
                Node::Or(a, b) | Node::And(a, b) => memo[a].max(memo[b]),
                Node::GeqZero(e) => e
                    .terms()
                    .iter()
                    .map(|(atom, _)| match atom {
                        Atom::Indicator(g) => memo[g],
                        Atom::Count(g) => memo[g] + 1,
                    })
                    .max()
                    .unwrap_or(0),
            };
            memo.insert(id, d);
        }
        memo[&f]
    }

    /// Negation normal form. Negation ends up only on propositions;
    /// `¬(E >= 0)` becomes `-E - 1 >= 0`, which is sound because every
    /// expression is integer-valued. Formulas under `1_ψ` and `#ψ` are
    /// normalized too.
    pub fn nnf(&mut self, f: FormulaId) -> FormulaId {
        self.nnf_polarity(f, true)
    }

    /// `nnf(¬f)`.
    pub fn complement(&mut self, f: FormulaId) -> FormulaId {
        self.nnf_polarity(f, false)
    }

    fn nnf_polarity(&mut self, f: FormulaId, positive: bool) -> FormulaId {
        if let Some(&r) = self.nnf_cache.get(&(f, positive)) {
            return r;
        }
        let result = match self.node(f).clone() {
            Node::Prop(_) => {
                if positive {
                    f
                } else {
                    self.not(f)
                }
            }
            Node::Not(a) => self.nnf_polarity(a, !positive),
            Node::Or(a, b) => {
                let x = self.nnf_polarity(a, positive);
                let y = self.nnf_polarity(b, positive);
                if positive {
                    self.or(x, y)
                } else {
                    self.and(x, y)
                }
            }
            Node::And(a, b) => {
                let x = self.nnf_polarity(a, positive);
                let y = self.nnf_polarity(b, positive);
                if positive {
                    self.and(x, y)
                } else {
                    self.or(x, y)
                }
            }
            Node::GeqZero(e) => {
                let mapped = e.map_formulas(|g| self.nnf_polarity(g, true));
                if positive {
                    self.geq_zero(mapped)
                } else {
                    self.geq_zero(-mapped - &LinExpr::constant(1))
                }
            }
        };
        self.nnf_cache.insert((f, positive), result);
        result
    }

    /// True if `f` is in negation normal form (deeply).
    pub fn is_nnf(&self, f: FormulaId) -> bool {
        self.subformulas(f).into_iter().all(|id| match self.node(id) {
            Node::Not(a) => matches!(self.node(*a), Node::Prop(_)),
            _ => true,
        })
    }

    /// Renders `f` in the concrete syntax accepted by [`parse`].
    pub fn display(&self, f: FormulaId) -> Printer<'_> {
        Printer::new(self, f)
    }

    /// Largest number of distinct `#ψ` atoms that share one modal level,
    /// i.e. that occur in inequalities not separated by a `#`.
    pub fn max_count_atoms_per_level(&self, f: FormulaId) -> usize {
        let mut best = 0;
        let mut pending = vec![f];
        let mut visited_roots = BTreeSet::new();
        while let Some(root) = pending.pop() {
            if !visited_roots.insert(root) {
                continue;
            }
            let mut counts = BTreeSet::new();
            let mut seen = BTreeSet::new();
            let mut stack = vec![root];
            while let Some(id) = stack.pop() {
                if !seen.insert(id) {
                    continue;
                }
                match self.node(id) {
                    Node::Prop(_) => {}
                    Node::Not(a) => stack.push(*a),
                    Node::Or(a, b) | Node::And(a, b) => {
                        stack.push(*a);
                        stack.push(*b);
                    }
                    Node::GeqZero(e) => {
                        for (atom, _) in e.terms() {
                            match atom {
                                Atom::Indicator(g) => stack.push(*g),
                                Atom::Count(g) => {
                                    counts.insert(*g);
                                    pending.push(*g);
                                }
                            }
                        }
                    }
                }
            }
            best = best.max(counts.len());
        }
        best
    }
}

/// Integer-valued helper used by printing and tests.
pub(crate) fn is_unit(k: &BigInt) -> bool {
    k.is_one()
}

pub(crate) fn is_zero(k: &BigInt) -> bool {
    k.is_zero()
}
