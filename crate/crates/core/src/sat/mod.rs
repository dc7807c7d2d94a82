//! Satisfiability and validity of K# formulas.
//!
//! For each Hintikka set of the formula, the counts `#ψ₁ … #ψₙ` of its
//! inequalities are replaced by sums over variables `x_w`, one per word
//! `w ∈ {0,1}ⁿ`, where `x_w` counts successors satisfying `conj_w`. Words
//! whose conjunction is unsatisfiable (decided recursively) are pinned to 0
//! and the resulting integer program is handed to [`crate::ilp`]. A
//! feasible assignment yields a tree model: the root carries the set's
//! valuation and gets `x_w` copies of a model of `conj_w`.

mod hintikka;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::formula::{FormulaId, FormulaStore, Node};
use crate::graph::{check, LabeledGraph, PointedGraph};
use crate::ilp::{IlpConfig, IlpError, LinearSystem};

pub use hintikka::{hintikka_sets, HintikkaSet, HintikkaStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverMode {
    #[default]
    General,
    /// Only models where every vertex has at most `k` successors.
    BoundedDegree(usize),
    /// Inputs whose inequalities all read `#ψ − #ψ' >= 0`; successors are
    /// bounded by `n² + n` for `n` count atoms per level.
    AutoFragment,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SatError {
    #[error("formula is outside the #ψ <= #ψ' fragment: {0}")]
    OutsideFragment(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SatConfig {
    pub mode: SolverMode,
    /// More count atoms than this in one Hintikka set gives up on it.
    pub max_count_atoms: usize,
    /// Branch-and-bound nodes per integer program.
    pub ilp_node_limit: usize,
    /// Hintikka sets examined over the whole run.
    pub max_hintikka_sets: usize,
    /// Largest witness the solver will materialize.
    pub max_witness_vertices: usize,
}

impl Default for SatConfig {
    fn default() -> Self {
        SatConfig {
            mode: SolverMode::General,
            max_count_atoms: 12,
            ilp_node_limit: IlpConfig::default().node_limit,
            max_hintikka_sets: 1_000_000,
            max_witness_vertices: 100_000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SatStats {
    pub hintikka_sets: usize,
    pub ilp_calls: usize,
    pub recursive_calls: usize,
    pub memo_hits: usize,
    pub max_depth: usize,
}

impl fmt::Display for SatStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "hintikka sets: {}, ilp calls: {}, recursive calls: {}, memo hits: {}, max depth: {}",
            self.hintikka_sets, self.ilp_calls, self.recursive_calls, self.memo_hits, self.max_depth
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(PointedGraph),
    Unsat,
    /// A resource limit was hit before a decision.
    Inconclusive(String),
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, Verdict::Unsat)
    }

    pub fn witness(&self) -> Option<&PointedGraph> {
        match self {
            Verdict::Sat(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SatResult {
    pub verdict: Verdict,
    pub stats: SatStats,
}

/// A tree model with shared subtrees: `x` copies of each child.
#[derive(Debug)]
struct Tree {
    props: Vec<String>,
    children: Vec<(Rc<Tree>, usize)>,
}

impl Tree {
    fn size(&self) -> Option<usize> {
        self.children.iter().try_fold(1usize, |acc, (t, n)| acc.checked_add(t.size()?.checked_mul(*n)?))
    }

    fn materialize(&self, g: &mut LabeledGraph) -> usize {
        let name = format!("v{}", g.vertex_count());
        let u = g.add_vertex(&name, &self.props).expect("fresh vertex name");
        for (child, n) in &self.children {
            for _ in 0..*n {
                let v = child.materialize(g);
                g.add_edge(u, v);
            }
        }
        u
    }
}

#[derive(Clone, Debug)]
enum Outcome {
    Sat(Rc<Tree>),
    Unsat,
    Unknown(String),
}

/// `⋀_{wᵢ=1} ψᵢ ∧ ⋀_{wᵢ=0} ¬ψᵢ`, in index order.
pub fn conj(store: &mut FormulaStore, w: &[bool], psis: &[FormulaId]) -> FormulaId {
    assert_eq!(w.len(), psis.len(), "word and formula list lengths");
    let parts: Vec<FormulaId> = w.iter().zip(psis).map(|(&b, &psi)| if b { psi } else { store.not(psi) }).collect();
    store.and_all(parts)
}

/// Every inequality of `f` reads `#ψ − #ψ' >= 0`, its strict form
/// `#ψ − #ψ' − 1 >= 0`, or is constant.
pub fn in_count_fragment(store: &FormulaStore, f: FormulaId) -> Result<(), SatError> {
    for g in store.subformulas(f) {
        let Node::GeqZero(e) = store.node(g) else { continue };
        if e.is_constant() {
            continue;
        }
        let c = e.constant_term();
        let shape_ok = (c.is_zero() || *c == BigInt::from(-1))
            && e.terms().len() == 2
            && e.terms().iter().all(|(atom, _)| atom.is_count())
            && {
                let mut ks: Vec<BigInt> = e.terms().iter().map(|(_, k)| k.clone()).collect();
                ks.sort();
                ks == [BigInt::from(-1), BigInt::from(1)]
            };
        if !shape_ok {
            return Err(SatError::OutsideFragment(store.display(g).to_string()));
        }
    }
    Ok(())
}

/// Decides satisfiability of `f`.
pub fn sat(store: &mut FormulaStore, f: FormulaId, config: SatConfig) -> Result<SatResult, SatError> {
    Solver::new(store, config).solve(f)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// A model of the negation.
    Invalid(PointedGraph),
    Inconclusive(String),
}

/// `f` is valid iff `¬f` is unsatisfiable.
pub fn valid(store: &mut FormulaStore, f: FormulaId, config: SatConfig) -> Result<(Validity, SatStats), SatError> {
    let nf = store.not(f);
    let r = sat(store, nf, config)?;
    let v = match r.verdict {
        Verdict::Sat(w) => Validity::Invalid(w),
        Verdict::Unsat => Validity::Valid,
        Verdict::Inconclusive(why) => Validity::Inconclusive(why),
    };
    Ok((v, r.stats))
}

/// Memoizing solver; reuse one instance for several queries in one mode.
pub struct Solver<'a> {
    store: &'a mut FormulaStore,
    config: SatConfig,
    memo: HashMap<FormulaId, Outcome>,
    stats: SatStats,
}

impl<'a> Solver<'a> {
    pub fn new(store: &'a mut FormulaStore, config: SatConfig) -> Self {
        Solver { store, config, memo: HashMap::new(), stats: SatStats::default() }
    }

    pub fn store(&mut self) -> &mut FormulaStore {
        self.store
    }

    pub fn stats(&self) -> &SatStats {
        &self.stats
    }

    pub fn solve(&mut self, f: FormulaId) -> Result<SatResult, SatError> {
        if self.config.mode == SolverMode::AutoFragment {
            in_count_fragment(self.store, f)?;
        }
        let g = self.store.nnf(f);
        let verdict = match self.sat_nnf(g, 0) {
            Outcome::Unsat => Verdict::Unsat,
            Outcome::Unknown(why) => Verdict::Inconclusive(why),
            Outcome::Sat(tree) => match tree.size() {
                Some(n) if n <= self.config.max_witness_vertices => {
                    let props: Vec<String> = self.store.props(f).into_iter().collect();
                    let mut graph = LabeledGraph::new(&props);
                    let root = tree.materialize(&mut graph);
                    assert!(check(self.store, &graph, root, f), "witness fails the model checker");
                    Verdict::Sat(PointedGraph::new(graph, root))
                }
                _ => Verdict::Inconclusive(format!(
                    "satisfiable, but the witness exceeds {} vertices",
                    self.config.max_witness_vertices
                )),
            },
        };
        Ok(SatResult { verdict, stats: self.stats.clone() })
    }

    fn sat_nnf(&mut self, f: FormulaId, depth: usize) -> Outcome {
        if let Some(o) = self.memo.get(&f) {
            self.stats.memo_hits += 1;
            return o.clone();
        }
        self.stats.recursive_calls += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        let mut stream = HintikkaStream::with_pruning(f, true);
        let mut unknown = None;
        let outcome = loop {
            let Some(h) = stream.next_set(self.store) else {
                break unknown.map_or(Outcome::Unsat, Outcome::Unknown);
            };
            self.stats.hintikka_sets += 1;
            if self.stats.hintikka_sets > self.config.max_hintikka_sets {
                break Outcome::Unknown(format!("more than {} Hintikka sets", self.config.max_hintikka_sets));
            }
            match self.try_set(&h, depth) {
                Outcome::Sat(t) => break Outcome::Sat(t),
                Outcome::Unsat => {}
                Outcome::Unknown(why) => unknown = Some(why),
            }
        };
        self.memo.insert(f, outcome.clone());
        outcome
    }

    fn try_set(&mut self, h: &HintikkaSet, depth: usize) -> Outcome {
        let mut rows = Vec::new();
        let mut atoms = BTreeSet::new();
        let ineqs: Vec<FormulaId> = h.inequalities(self.store).collect();
        for g in ineqs {
            let Node::GeqZero(e) = self.store.node(g) else { unreachable!() };
            let (constant, counts) = hintikka::bound_constant(e, &h.bindings).expect("indicators are bound");
            atoms.extend(counts.iter().map(|(psi, _)| *psi));
            rows.push((constant, counts));
        }
        let leaf = || Rc::new(Tree { props: h.true_props(self.store), children: Vec::new() });
        let psis: Vec<FormulaId> = atoms.into_iter().collect();
        let n = psis.len();
        if n == 0 {
            return if rows.iter().all(|(c, _)| !c.is_negative()) { Outcome::Sat(leaf()) } else { Outcome::Unsat };
        }
        if n > self.config.max_count_atoms {
            return Outcome::Unknown(format!("{n} count atoms on one level (limit {})", self.config.max_count_atoms));
        }
        let comps: Vec<FormulaId> = psis.iter().map(|&p| self.store.complement(p)).collect();
        // words with a satisfiable conjunction, found by extending prefixes
        let mut allowed: Vec<(Vec<bool>, Rc<Tree>)> = Vec::new();
        let mut undecided = 0usize;
        let mut stack: Vec<Vec<bool>> = vec![Vec::new()];
        while let Some(prefix) = stack.pop() {
            let len = prefix.len();
            for bit in [false, true] {
                let clash = (0..len).any(|j| prefix[j] == bit && psis[j] == comps[len]);
                if clash {
                    continue;
                }
                let mut w = prefix.clone();
                w.push(bit);
                let parts: Vec<FormulaId> =
                    w.iter().enumerate().map(|(i, &b)| if b { psis[i] } else { comps[i] }).collect();
                let c = self.store.and_all(parts);
                match self.sat_nnf(c, depth + 1) {
                    Outcome::Unsat => {}
                    Outcome::Sat(t) if w.len() == n => allowed.push((w, t)),
                    Outcome::Unknown(_) if w.len() == n => undecided += 1,
                    _ => stack.push(w),
                }
            }
        }
        let names = allowed.iter().map(|(w, _)| format!("x_{}", w.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>()));
        let mut sys = LinearSystem::new(names);
        for (constant, counts) in &rows {
            let coeffs: Vec<BigInt> = allowed
                .iter()
                .map(|(w, _)| {
                    counts
                        .iter()
                        .filter(|(psi, _)| w[psis.iter().position(|p| p == psi).unwrap()])
                        .map(|(_, k)| k.clone())
                        .sum()
                })
                .collect();
            sys.add(coeffs, constant.clone());
        }
        let degree = match self.config.mode {
            SolverMode::General => None,
            SolverMode::BoundedDegree(k) => Some(k),
            SolverMode::AutoFragment => Some(n * n + n),
        };
        if let Some(k) = degree {
            sys.add(vec![BigInt::from(-1); allowed.len()], BigInt::from(k));
        }
        self.stats.ilp_calls += 1;
        match sys.feasible_with::<num_rational::BigRational>(IlpConfig { node_limit: self.config.ilp_node_limit }) {
            Ok(Some(x)) => {
                let mut children = Vec::new();
                for ((_, t), xw) in allowed.iter().zip(&x) {
                    if xw.is_zero() {
                        continue;
                    }
                    match xw.to_usize() {
                        Some(k) if k <= self.config.max_witness_vertices => children.push((t.clone(), k)),
                        _ => return Outcome::Unknown(format!("witness needs {xw} copies of a subtree")),
                    }
                }
                Outcome::Sat(Rc::new(Tree { props: h.true_props(self.store), children }))
            }
            Ok(None) if undecided == 0 => Outcome::Unsat,
            Ok(None) => Outcome::Unknown(format!("{undecided} successor types could not be decided")),
            Err(e @ IlpError::BudgetExceeded(_)) | Err(e @ IlpError::Unrepresentable) => Outcome::Unknown(e.to_string()),
        }
    }
}
