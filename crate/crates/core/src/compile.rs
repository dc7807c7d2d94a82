//! Formula to GNN compilation.
//!
//! [`compile`] gives every subformula its own state component and applies
//! one fixed layer `|sub(f)|` times. [`compile_cnf`] turns each propositional
//! level into CNF and only needs a constant number of layers per nesting
//! level of inequalities. Both reserve a last component pinned to 1 so the
//! homogeneous classifier can express the threshold `x_f >= 1`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::formula::{Atom, FormulaId, FormulaStore, Node};
use crate::gnn::{Gnn, Layer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("CNF conversion exceeded the budget of {0} literals")]
    CnfBudget(usize),
}

/// Per-level literal budget for [`compile_cnf_with_budget`].
pub const DEFAULT_CNF_BUDGET: usize = 20_000;

fn q(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

fn q1() -> BigRational {
    BigRational::one()
}

/// Subformulas of `f` with propositions first, then the rest children
/// before parents.
pub fn enumerate_subformulas(store: &FormulaStore, f: FormulaId) -> Vec<FormulaId> {
    let sub = store.subformulas(f);
    let (mut props, rest): (Vec<_>, Vec<_>) = sub.into_iter().partition(|&g| matches!(store.node(g), Node::Prop(_)));
    props.extend(rest);
    props
}

/// One component per subformula plus a pinned-one component, the same
/// layer applied `|sub(f)|` times.
pub fn compile(store: &FormulaStore, f: FormulaId) -> Gnn<BigRational> {
    let order = enumerate_subformulas(store, f);
    let pos: HashMap<FormulaId, usize> = order.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let d = order.len() + 1;
    let one = d - 1;
    let mut layer = Layer::<BigRational>::zeros(d);
    let mut props = Vec::new();
    for (l, &g) in order.iter().enumerate() {
        match store.node(g) {
            Node::Prop(name) => {
                props.push(name.clone());
                layer.c[l][l] = q1();
            }
            Node::Not(a) => {
                layer.c[pos[a]][l] -= q1();
                layer.b[l] = q1();
            }
            Node::Or(a, b) => {
                layer.c[pos[a]][l] += q1();
                layer.c[pos[b]][l] += q1();
            }
            Node::And(a, b) => {
                layer.c[pos[a]][l] += q1();
                layer.c[pos[b]][l] += q1();
                layer.b[l] = -q1();
            }
            Node::GeqZero(e) => {
                for (atom, k) in e.terms() {
                    match atom {
                        Atom::Indicator(h) => layer.c[pos[h]][l] += q(k),
                        Atom::Count(h) => layer.a[pos[h]][l] += q(k),
                    }
                }
                layer.b[l] = q(e.constant_term()) + q1();
            }
        }
    }
    layer.b[one] = q1();
    let mut cls = vec![BigRational::zero(); d];
    cls[pos[&f]] = q1();
    cls[one] = -q1();
    let layers = vec![layer; order.len()];
    Gnn::new(props, d, layers, cls).expect("compiled dimensions are consistent")
}

pub fn compile_cnf(store: &FormulaStore, f: FormulaId) -> Result<Gnn<BigRational>, CompileError> {
    compile_cnf_with_budget(store, f, DEFAULT_CNF_BUDGET)
}

/// A CNF literal: an atom (proposition or inequality) and its polarity.
type Lit = (FormulaId, bool);
type Clause = BTreeSet<Lit>;
type Cnf = BTreeSet<Clause>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Gate {
    Prop(String),
    /// Inequality over level roots: indicator terms, count terms, constant.
    Ineq(Vec<(usize, BigInt)>, Vec<(usize, BigInt)>, BigInt),
    Or(Vec<(usize, bool)>),
    And(Vec<usize>),
    Const(bool),
}

struct Circuit<'a> {
    store: &'a FormulaStore,
    budget: usize,
    gates: Vec<Gate>,
    height: Vec<usize>,
    interned: HashMap<Gate, usize>,
    atoms: HashMap<FormulaId, usize>,
    roots: HashMap<FormulaId, usize>,
}

impl<'a> Circuit<'a> {
    fn gate(&mut self, g: Gate) -> usize {
        if let Some(&i) = self.interned.get(&g) {
            return i;
        }
        let h = match &g {
            Gate::Prop(_) | Gate::Const(false) => 0,
            // starts at 0 and is set by the bias of the first layer
            Gate::Const(true) => 1,
            Gate::Ineq(ind, cnt, _) => 1 + ind.iter().chain(cnt).map(|(i, _)| self.height[*i]).max().unwrap_or(0),
            Gate::Or(lits) => 1 + lits.iter().map(|(i, _)| self.height[*i]).max().unwrap_or(0),
            Gate::And(xs) => 1 + xs.iter().map(|i| self.height[*i]).max().unwrap_or(0),
        };
        let i = self.gates.len();
        self.gates.push(g.clone());
        self.height.push(h);
        self.interned.insert(g, i);
        i
    }

    fn atom(&mut self, a: FormulaId) -> Result<usize, CompileError> {
        if let Some(&i) = self.atoms.get(&a) {
            return Ok(i);
        }
        let i = match self.store.node(a) {
            Node::Prop(p) => self.gate(Gate::Prop(p.clone())),
            Node::GeqZero(e) => {
                let mut ind = Vec::new();
                let mut cnt = Vec::new();
                for (atom, k) in e.terms() {
                    let r = self.root(atom.formula())?;
                    match atom {
                        Atom::Indicator(_) => ind.push((r, k.clone())),
                        Atom::Count(_) => cnt.push((r, k.clone())),
                    }
                }
                self.gate(Gate::Ineq(ind, cnt, e.constant_term().clone()))
            }
            _ => unreachable!("CNF atoms are propositions or inequalities"),
        };
        self.atoms.insert(a, i);
        Ok(i)
    }

    /// Component computing the propositional level rooted at `f`.
    fn root(&mut self, f: FormulaId) -> Result<usize, CompileError> {
        if let Some(&i) = self.roots.get(&f) {
            return Ok(i);
        }
        let mut memo = HashMap::new();
        let cnf = to_cnf(self.store, f, true, self.budget, &mut memo)?;
        let mut clause_gates = BTreeSet::new();
        let mut is_false = false;
        for clause in &cnf {
            if clause.is_empty() {
                is_false = true;
                break;
            }
            let mut lits = Vec::with_capacity(clause.len());
            for &(a, pos) in clause {
                lits.push((self.atom(a)?, pos));
            }
            let g = match lits.as_slice() {
                [(i, true)] => *i,
                _ => self.gate(Gate::Or(lits)),
            };
            clause_gates.insert(g);
        }
        let i = if is_false {
            self.gate(Gate::Const(false))
        } else if clause_gates.is_empty() {
            self.gate(Gate::Const(true))
        } else if clause_gates.len() == 1 {
            *clause_gates.iter().next().unwrap()
        } else {
            self.gate(Gate::And(clause_gates.into_iter().collect()))
        };
        self.roots.insert(f, i);
        Ok(i)
    }
}

fn to_cnf(
    store: &FormulaStore,
    f: FormulaId,
    positive: bool,
    budget: usize,
    memo: &mut HashMap<(FormulaId, bool), Cnf>,
) -> Result<Cnf, CompileError> {
    if let Some(c) = memo.get(&(f, positive)) {
        return Ok(c.clone());
    }
    let conj = |a: Cnf, b: Cnf| -> Cnf { a.into_iter().chain(b).collect() };
    let disj = |a: &Cnf, b: &Cnf| -> Result<Cnf, CompileError> {
        let mut out = Cnf::new();
        let mut size = 0usize;
        for ca in a {
            for cb in b {
                let c: Clause = ca.union(cb).cloned().collect();
                if c.iter().any(|&(x, p)| c.contains(&(x, !p))) {
                    continue;
                }
                size += c.len();
                if size > budget {
                    return Err(CompileError::CnfBudget(budget));
                }
                out.insert(c);
            }
        }
        Ok(out)
    };
    let out = match store.node(f) {
        Node::Prop(_) | Node::GeqZero(_) => Cnf::from([Clause::from([(f, positive)])]),
        Node::Not(a) => to_cnf(store, *a, !positive, budget, memo)?,
        Node::And(a, b) | Node::Or(a, b) => {
            let ca = to_cnf(store, *a, positive, budget, memo)?;
            let cb = to_cnf(store, *b, positive, budget, memo)?;
            let is_and = matches!(store.node(f), Node::And(..));
            if is_and == positive {
                conj(ca, cb)
            } else {
                disj(&ca, &cb)?
            }
        }
    };
    if out.iter().map(BTreeSet::len).sum::<usize>() > budget {
        return Err(CompileError::CnfBudget(budget));
    }
    memo.insert((f, positive), out.clone());
    Ok(out)
}

/// CNF variant: wide disjunction and conjunction rows, layer count bounded
/// by three per nesting level of inequalities.
pub fn compile_cnf_with_budget(store: &FormulaStore, f: FormulaId, budget: usize) -> Result<Gnn<BigRational>, CompileError> {
    let mut circuit = Circuit {
        store,
        budget,
        gates: Vec::new(),
        height: Vec::new(),
        interned: HashMap::new(),
        atoms: HashMap::new(),
        roots: HashMap::new(),
    };
    // propositions take the first components
    for p in store.props(f) {
        circuit.gate(Gate::Prop(p));
    }
    let root = circuit.root(f)?;
    let n = circuit.gates.len();
    let d = n + 1;
    let one = n;
    let mut layer = Layer::<BigRational>::zeros(d);
    let mut props = BTreeMap::new();
    for (l, g) in circuit.gates.iter().enumerate() {
        match g {
            Gate::Prop(p) => {
                props.insert(l, p.clone());
                layer.c[l][l] = q1();
            }
            Gate::Const(v) => {
                if *v {
                    layer.b[l] = q1();
                }
            }
            Gate::Ineq(ind, cnt, k) => {
                for (i, c) in ind {
                    layer.c[*i][l] += q(c);
                }
                for (i, c) in cnt {
                    layer.a[*i][l] += q(c);
                }
                layer.b[l] = q(k) + q1();
            }
            Gate::Or(lits) => {
                let mut negatives = 0i64;
                for &(i, pos) in lits {
                    if pos {
                        layer.c[i][l] += q1();
                    } else {
                        layer.c[i][l] -= q1();
                        negatives += 1;
                    }
                }
                layer.b[l] = q(&BigInt::from(negatives));
            }
            Gate::And(xs) => {
                for &i in xs {
                    layer.c[i][l] += q1();
                }
                layer.b[l] = q(&BigInt::from(1 - xs.len() as i64));
            }
        }
    }
    layer.b[one] = q1();
    let props: Vec<String> = props.into_values().collect();
    debug_assert!(circuit.gates[..props.len()].iter().all(|g| matches!(g, Gate::Prop(_))));
    let mut cls = vec![BigRational::zero(); d];
    cls[root] = q1();
    cls[one] = -q1();
    let depth = circuit.height[root].max(1);
    Ok(Gnn::new(props, d, vec![layer; depth], cls).expect("compiled dimensions are consistent"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::graph::{check, fixtures, LabeledGraph};

    fn corpus() -> Vec<LabeledGraph> {
        let mut out = vec![
            fixtures::figure_three().graph,
            fixtures::graph_a(2).graph,
            fixtures::graph_b(2).graph,
            fixtures::graph_a(3).graph,
        ];
        let props = ["p", "q", "r", "s"];
        for mask in 0..16u32 {
            let mut g = LabeledGraph::new(&props);
            let labels: Vec<&str> = props.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| *p).collect();
            let u = g.add_vertex("u", &labels).unwrap();
            let v = g.add_vertex("v", &labels[..labels.len() / 2]).unwrap();
            let w = g.add_vertex("w", &["q"]).unwrap();
            g.add_edge(u, v);
            g.add_edge(u, w);
            if mask % 3 == 0 {
                g.add_edge(v, u);
                g.add_edge(u, u);
            }
            out.push(g);
        }
        out
    }

    fn agrees(text: &str) {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, text).unwrap();
        let a = compile(&s, f);
        let b = compile_cnf(&s, f).unwrap();
        for g in corpus() {
            let ca = a.classify_all(&g);
            let cb = b.classify_all(&g);
            for v in g.vertices() {
                let truth = check(&s, &g, v, f);
                assert_eq!(ca[v], truth, "compile on `{text}` at {}", g.name(v));
                assert_eq!(cb[v], truth, "compile_cnf on `{text}` at {}", g.name(v));
            }
            assert!(a.run(&g).is_boolean());
            assert!(b.run(&g).is_boolean());
        }
    }

    #[test]
    fn single_proposition() {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, "p").unwrap();
        let net = compile(&s, f);
        assert_eq!(net.dimension(), 2);
        assert_eq!(net.layers().len(), 1);
        assert_eq!(net.layers()[0].c[0][0], q1());
        assert_eq!(net.layers()[0].a[0][0], BigRational::zero());
        assert_eq!(net.layers()[0].b[0], BigRational::zero());
        assert_eq!(compile_cnf(&s, f).unwrap(), net);
        agrees("p");
    }

    #[test]
    fn count_comparison_row() {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, "#(p) >= #(q)").unwrap();
        let net = compile(&s, f);
        let l = enumerate_subformulas(&s, f).iter().position(|&g| g == f).unwrap();
        let layer = &net.layers()[0];
        assert_eq!(layer.a[0][l], q1());
        assert_eq!(layer.a[1][l], -q1());
        assert_eq!(layer.b[l], q1());
        for n in 1..=3 {
            let a = fixtures::graph_a(n);
            let b = fixtures::graph_b(n);
            assert!(net.classify(&a.graph, a.point));
            assert!(!net.classify(&b.graph, b.point));
        }
    }

    #[test]
    fn example_formula() {
        agrees("p & 8 <= 3 * #(q)");
    }

    #[test]
    fn wide_clause_is_one_row() {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, "!p | q | r").unwrap();
        let net = compile_cnf(&s, f).unwrap();
        assert_eq!(net.layers().len(), 1);
        // p, q, r, clause, one
        assert_eq!(net.dimension(), 5);
        assert_eq!(net.layers()[0].b[3], q1());
        agrees("!p | q | r");
    }

    #[test]
    fn distribution_over_two_conjunctions() {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, "(p & q) | (r & s)").unwrap();
        let net = compile_cnf(&s, f).unwrap();
        // four clauses feeding one conjunction
        assert_eq!(net.dimension(), 4 + 4 + 1 + 1);
        assert_eq!(net.layers().len(), 2);
        agrees("(p & q) | (r & s)");
    }

    #[test]
    fn assorted_formulas() {
        for text in [
            "!(p)",
            "p & !p",
            "p | !p",
            "true",
            "false",
            "#(p) = #(q)",
            "[p] + [q] >= 2 * [r]",
            "<>^2 (p | q)",
            "[] (p -> #(q) >= 1)",
            "!(#(!p) >= 2) & (#(#(p) >= 1) <= 1)",
            "[[p & #(q) <= 4] <= #(#(p) >= 2)] <= 4",
            "p & (p & q)",
            "#(p & p) - 3 >= -2",
        ] {
            agrees(text);
        }
    }

    #[test]
    fn cnf_layers_track_nesting_not_size() {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, "(p | q | r | s) & (!p | !q) & (r | !s) & (p | s) & (q | r)").unwrap();
        assert_eq!(compile_cnf(&s, f).unwrap().layers().len(), 2);
        assert!(compile(&s, f).layers().len() > 10);
    }

    #[test]
    fn tautology_under_an_indicator() {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, "0 - 3*[r | !r] >= 0").unwrap();
        let net = compile_cnf(&s, f).unwrap();
        for g in corpus() {
            assert!(net.classify_all(&g).iter().all(|x| !x));
        }
    }

    #[test]
    fn budget_error() {
        let mut s = FormulaStore::new();
        let text = (0..12).map(|i| format!("(a{i} & b{i})")).collect::<Vec<_>>().join(" | ");
        let f = parse(&mut s, &text).unwrap();
        assert_eq!(compile_cnf_with_budget(&s, f, 1000), Err(CompileError::CnfBudget(1000)));
    }

    #[test]
    fn intermediate_components_match_subformulas() {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, "p & (#(q | !p) >= 2 | [#(p) >= 1] <= 0)").unwrap();
        let net = compile(&s, f);
        let order = enumerate_subformulas(&s, f);
        for g in corpus() {
            let state = net.run(&g);
            for v in g.vertices() {
                for (l, &h) in order.iter().enumerate() {
                    let want = check(&s, &g, v, h);
                    assert_eq!(state.at(v)[l].is_one(), want);
                }
                assert!(state.at(v)[order.len()].is_one());
            }
        }
    }
}
