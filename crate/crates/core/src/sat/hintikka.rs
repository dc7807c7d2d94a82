//! Hintikka set enumeration.
//!
//! A Hintikka set for an NNF formula `φ` is a smallest set of formulas that
//! contains `φ`, contains both conjuncts of each conjunction, one disjunct of
//! each disjunction, never a formula together with its complement, and
//! decides `1_ψ` (by containing `ψ` or its complement) for every indicator
//! occurring in one of its inequalities.
//!
//! The search is a depth-first choice over disjunctions and indicator
//! bindings, left disjunct and `1_ψ = 1` first.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::formula::{Atom, FormulaId, FormulaStore, Node};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HintikkaSet {
    pub members: BTreeSet<FormulaId>,
    /// `ψ ↦ 1_ψ` for every indicator of a member inequality.
    pub bindings: BTreeMap<FormulaId, bool>,
}

impl HintikkaSet {
    /// Members of the form `E >= 0`.
    pub fn inequalities<'a>(&'a self, store: &'a FormulaStore) -> impl Iterator<Item = FormulaId> + 'a {
        self.members.iter().copied().filter(|&g| matches!(store.node(g), Node::GeqZero(_)))
    }

    /// Propositions occurring positively.
    pub fn true_props(&self, store: &FormulaStore) -> Vec<String> {
        self.members
            .iter()
            .filter_map(|&g| match store.node(g) {
                Node::Prop(p) => Some(p.clone()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
enum Task {
    Add(FormulaId),
    Bind(FormulaId),
    Check(FormulaId),
}

#[derive(Clone, Debug)]
struct Partial {
    members: BTreeSet<FormulaId>,
    /// Members plus everything they force; only tracked when pruning.
    pool: HashSet<FormulaId>,
    bindings: BTreeMap<FormulaId, bool>,
    agenda: Vec<Task>,
}

impl Partial {
    fn knows(&self, g: FormulaId, pooled: bool) -> bool {
        if pooled {
            self.pool.contains(&g)
        } else {
            self.members.contains(&g)
        }
    }

    fn new(root: FormulaId) -> Self {
        Partial { members: BTreeSet::new(), pool: HashSet::new(), bindings: BTreeMap::new(), agenda: vec![Task::Add(root)] }
    }
}

/// Lazy stream of Hintikka sets. It borrows the store only while advancing,
/// because complements are interned on demand.
#[derive(Debug)]
pub struct HintikkaStream {
    root: FormulaId,
    stack: Vec<Partial>,
    seen: HashSet<BTreeSet<FormulaId>>,
    prune: bool,
    cache: Cache,
}

/// `None` marks a formula with no consistent closure.
type Implied = Option<Rc<BTreeSet<FormulaId>>>;

#[derive(Debug, Default)]
struct Cache {
    complements: HashMap<FormulaId, FormulaId>,
    implied: HashMap<FormulaId, Implied>,
}

/// Indicators per inequality beyond which no forced members are derived.
const IMPLIED_INDICATOR_LIMIT: usize = 10;

impl HintikkaStream {
    /// All Hintikka sets of the NNF formula `f`.
    pub fn new(f: FormulaId) -> Self {
        Self::with_pruning(f, false)
    }

    /// With `prune`, partial sets are dropped as soon as one of their
    /// inequalities is false for every value of its `#` terms.
    pub fn with_pruning(f: FormulaId, prune: bool) -> Self {
        let start = Partial::new(f);
        HintikkaStream { root: f, stack: vec![start], seen: HashSet::new(), prune, cache: Cache::default() }
    }

    pub fn next_set(&mut self, store: &mut FormulaStore) -> Option<HintikkaSet> {
        while let Some(p) = self.stack.pop() {
            let mut cx = Search { store, cache: &mut self.cache, prune: self.prune, allowed: None };
            let Some(done) = cx.advance(p, &mut self.stack) else { continue };
            if self.seen.contains(&done.members) {
                continue;
            }
            self.seen.insert(done.members.clone());
            let mut cx = Search { store, cache: &mut self.cache, prune: false, allowed: Some(&done.members) };
            if cx.has_smaller(self.root, &done.members) {
                continue;
            }
            return Some(HintikkaSet { members: done.members, bindings: done.bindings });
        }
        None
    }
}

/// Every Hintikka set of the NNF formula `f`, in search order.
pub fn hintikka_sets(store: &mut FormulaStore, f: FormulaId) -> Vec<HintikkaSet> {
    let mut stream = HintikkaStream::new(f);
    let mut out = Vec::new();
    while let Some(h) = stream.next_set(store) {
        out.push(h);
    }
    out
}

struct Search<'a> {
    store: &'a mut FormulaStore,
    cache: &'a mut Cache,
    prune: bool,
    /// Restricts every choice to members of this set.
    allowed: Option<&'a BTreeSet<FormulaId>>,
}

impl Search<'_> {
    fn complement(&mut self, f: FormulaId) -> FormulaId {
        if let Some(&c) = self.cache.complements.get(&f) {
            return c;
        }
        let c = self.store.complement(f);
        self.cache.complements.insert(f, c);
        self.cache.complements.insert(c, f);
        c
    }

    fn consistent(&mut self, set: &BTreeSet<FormulaId>) -> bool {
        set.iter().all(|&x| {
            let c = self.complement(x);
            !set.contains(&c)
        })
    }

    /// Formulas contained in every Hintikka set that contains `g`, under
    /// the pruning rule for inequalities.
    fn implied(&mut self, g: FormulaId) -> Implied {
        if let Some(r) = self.cache.implied.get(&g) {
            return r.clone();
        }
        let own = || BTreeSet::from([g]);
        let result = match self.store.node(g).clone() {
            Node::Prop(_) | Node::Not(_) => Some(own()),
            Node::And(a, b) => match (self.implied(a), self.implied(b)) {
                (Some(x), Some(y)) => {
                    let mut u = own();
                    u.extend(x.iter());
                    u.extend(y.iter());
                    self.consistent(&u).then_some(u)
                }
                _ => None,
            },
            Node::Or(a, b) => match (self.implied(a), self.implied(b)) {
                (None, None) => None,
                (Some(x), None) | (None, Some(x)) => {
                    let mut u = own();
                    u.extend(x.iter());
                    Some(u)
                }
                (Some(x), Some(y)) => {
                    let mut u = own();
                    u.extend(x.intersection(&y));
                    Some(u)
                }
            },
            Node::GeqZero(e) => {
                let mut psis: Vec<FormulaId> = Vec::new();
                for (atom, _) in e.terms() {
                    if let Atom::Indicator(psi) = atom {
                        if !psis.contains(psi) {
                            psis.push(*psi);
                        }
                    }
                }
                if psis.len() > IMPLIED_INDICATOR_LIMIT {
                    Some(own())
                } else {
                    let mut acc: Option<BTreeSet<FormulaId>> = None;
                    'assignments: for bits in 0u32..(1 << psis.len()) {
                        let bindings: BTreeMap<FormulaId, bool> =
                            psis.iter().enumerate().map(|(i, &psi)| (psi, bits >> i & 1 == 1)).collect();
                        if !self.may_hold(g, &bindings) {
                            continue;
                        }
                        let mut u = own();
                        for (&psi, &v) in &bindings {
                            let h = if v { psi } else { self.complement(psi) };
                            match self.implied(h) {
                                Some(x) => u.extend(x.iter()),
                                None => continue 'assignments,
                            }
                        }
                        if !self.consistent(&u) {
                            continue;
                        }
                        acc = Some(match acc {
                            None => u,
                            Some(a) => a.intersection(&u).copied().collect(),
                        });
                    }
                    acc.map(|mut a| {
                        a.insert(g);
                        a
                    })
                }
            }
        };
        let result = result.map(Rc::new);
        self.cache.implied.insert(g, result.clone());
        result
    }

    fn allowed(&self, f: FormulaId) -> bool {
        self.allowed.is_none_or(|s| s.contains(&f))
    }

    /// Runs `p` until it completes, dies, or branches. Branches go onto
    /// `stack` with the preferred one on top.
    fn advance(&mut self, mut p: Partial, stack: &mut Vec<Partial>) -> Option<Partial> {
        while let Some(task) = p.agenda.pop() {
            match task {
                Task::Add(g) => {
                    if p.members.contains(&g) {
                        continue;
                    }
                    if !self.allowed(g) {
                        return None;
                    }
                    if self.prune {
                        let forced = self.implied(g)?;
                        for &x in forced.iter() {
                            let c = self.complement(x);
                            if p.pool.contains(&c) {
                                return None;
                            }
                        }
                        p.pool.extend(forced.iter());
                    } else {
                        let c = self.complement(g);
                        if p.members.contains(&c) {
                            return None;
                        }
                    }
                    p.members.insert(g);
                    match self.store.node(g).clone() {
                        Node::Prop(_) | Node::Not(_) => {}
                        Node::And(a, b) => {
                            p.agenda.push(Task::Add(b));
                            p.agenda.push(Task::Add(a));
                        }
                        Node::Or(a, b) => {
                            if p.knows(a, self.prune) {
                                p.agenda.push(Task::Add(a));
                                continue;
                            }
                            if p.knows(b, self.prune) {
                                p.agenda.push(Task::Add(b));
                                continue;
                            }
                            let options: Vec<FormulaId> = [a, b].into_iter().filter(|&x| self.allowed(x)).collect();
                            match options.as_slice() {
                                [] => return None,
                                [only] => p.agenda.push(Task::Add(*only)),
                                _ => {
                                    let mut right = p.clone();
                                    right.agenda.push(Task::Add(b));
                                    stack.push(right);
                                    p.agenda.push(Task::Add(a));
                                }
                            }
                        }
                        Node::GeqZero(e) => {
                            if self.prune {
                                p.agenda.push(Task::Check(g));
                            }
                            for (atom, _) in e.terms().iter().rev() {
                                if let Atom::Indicator(psi) = atom {
                                    p.agenda.push(Task::Bind(*psi));
                                }
                            }
                        }
                    }
                }
                Task::Bind(psi) => {
                    if p.bindings.contains_key(&psi) {
                        continue;
                    }
                    let c = self.complement(psi);
                    let value = if p.knows(psi, self.prune) {
                        Some(true)
                    } else if p.knows(c, self.prune) {
                        Some(false)
                    } else {
                        None
                    };
                    match value {
                        Some(v) => {
                            p.bindings.insert(psi, v);
                            p.agenda.push(Task::Add(if v { psi } else { c }));
                        }
                        None => {
                            let can_true = self.allowed(psi);
                            let can_false = self.allowed(c);
                            if can_false && can_true {
                                let mut off = p.clone();
                                off.bindings.insert(psi, false);
                                off.agenda.push(Task::Add(c));
                                stack.push(off);
                            }
                            if can_true {
                                p.bindings.insert(psi, true);
                                p.agenda.push(Task::Add(psi));
                            } else if can_false {
                                p.bindings.insert(psi, false);
                                p.agenda.push(Task::Add(c));
                            } else {
                                return None;
                            }
                        }
                    }
                }
                Task::Check(g) => {
                    if !self.may_hold(g, &p.bindings) {
                        return None;
                    }
                }
            }
        }
        Some(p)
    }

    /// Upper bound test: with indicators fixed, can `E >= 0` still hold
    /// for some choice of the `#` terms?
    fn may_hold(&self, g: FormulaId, bindings: &BTreeMap<FormulaId, bool>) -> bool {
        let Node::GeqZero(e) = self.store.node(g) else { return true };
        let mut best = e.constant_term().clone();
        for (atom, k) in e.terms() {
            match atom {
                Atom::Indicator(psi) => {
                    if bindings.get(psi).copied().unwrap_or(k.is_positive()) {
                        best += k;
                    }
                }
                Atom::Count(_) => {
                    if k.is_positive() {
                        return true;
                    }
                }
            }
        }
        !best.is_negative()
    }

    /// Is there a closed set strictly inside `set`?
    fn has_smaller(&mut self, root: FormulaId, set: &BTreeSet<FormulaId>) -> bool {
        let mut stack = vec![Partial::new(root)];
        while let Some(p) = stack.pop() {
            if let Some(done) = self.advance(p, &mut stack) {
                if done.members.len() < set.len() {
                    return true;
                }
            }
        }
        false
    }
}

/// Value of the inequality's indicator part, `None` if some indicator is unbound.
pub(crate) fn bound_constant(
    e: &crate::formula::LinExpr,
    bindings: &BTreeMap<FormulaId, bool>,
) -> Option<(BigInt, Vec<(FormulaId, BigInt)>)> {
    let mut constant = e.constant_term().clone();
    let mut counts = Vec::new();
    for (atom, k) in e.terms() {
        match atom {
            Atom::Indicator(psi) => {
                if *bindings.get(psi)? {
                    constant += k;
                }
            }
            Atom::Count(psi) => {
                if !k.is_zero() {
                    counts.push((*psi, k.clone()));
                }
            }
        }
    }
    Some((constant, counts))
}
