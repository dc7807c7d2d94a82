//! Verification questions about a GNN `A` and a formula `φ`, answered
//! through the translation `tr(A)`:
//!
//! * P1: `[[A]] = [[φ]]`, i.e. `tr(A) ↔ φ` is valid
//! * P2: `[[A]] ⊆ [[φ]]`, i.e. `tr(A) → φ` is valid
//! * P3: `[[φ]] ⊆ [[A]]`, i.e. `φ → tr(A)` is valid
//! * P4: `[[A]] ∩ [[φ]] ≠ ∅`, i.e. `φ ∧ tr(A)` is satisfiable

use std::fmt;
use std::str::FromStr;

use crate::formula::{FormulaId, FormulaStore};
use crate::gnn::Gnn;
use crate::graph::PointedGraph;
use crate::num::Scalar;
use crate::sat::{sat, valid, SatConfig, SatError, SatStats, Validity, Verdict};
use crate::translate::translate;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    P1,
    P2,
    P3,
    P4,
}

impl FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(Problem::P1),
            "p2" => Ok(Problem::P2),
            "p3" => Ok(Problem::P3),
            "p4" => Ok(Problem::P4),
            other => Err(format!("unknown problem `{other}` (expected p1, p2, p3 or p4)")),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Problem::P1 => "p1",
            Problem::P2 => "p2",
            Problem::P3 => "p3",
            Problem::P4 => "p4",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    /// For P4 the graph is a pointed graph accepted by the net and
    /// satisfying the formula.
    Yes(Option<PointedGraph>),
    /// For P1 to P3 the graph separates the net from the formula.
    No(Option<PointedGraph>),
    Inconclusive(String),
}

impl Answer {
    pub fn is_yes(&self) -> bool {
        matches!(self, Answer::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Answer::No(_))
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub answer: Answer,
    /// `false` if the translation may not represent the net exactly.
    pub boolean_states: bool,
    pub stats: SatStats,
}

/// The formula whose validity (P1 to P3) or satisfiability (P4) answers `problem`.
pub fn reduction(store: &mut FormulaStore, problem: Problem, tr: FormulaId, f: FormulaId) -> FormulaId {
    match problem {
        Problem::P1 => store.iff(tr, f),
        Problem::P2 => store.implies(tr, f),
        Problem::P3 => store.implies(f, tr),
        Problem::P4 => store.and(f, tr),
    }
}

pub fn verify<T: Scalar>(
    store: &mut FormulaStore,
    problem: Problem,
    net: &Gnn<T>,
    f: FormulaId,
    config: SatConfig,
) -> Result<Report, SatError> {
    let tr = translate(store, net);
    let g = reduction(store, problem, tr.root, f);
    let (answer, stats) = if problem == Problem::P4 {
        let r = sat(store, g, config)?;
        let answer = match r.verdict {
            Verdict::Sat(w) => {
                if tr.boolean_states {
                    assert!(net.classify(&w.graph, w.point), "P4 witness rejected by the net");
                    assert!(w.satisfies(store, f), "P4 witness fails the formula");
                }
                Answer::Yes(Some(w))
            }
            Verdict::Unsat => Answer::No(None),
            Verdict::Inconclusive(why) => Answer::Inconclusive(why),
        };
        (answer, r.stats)
    } else {
        let (v, stats) = valid(store, g, config)?;
        let answer = match v {
            Validity::Valid => Answer::Yes(None),
            Validity::Invalid(w) => Answer::No(Some(w)),
            Validity::Inconclusive(why) => Answer::Inconclusive(why),
        };
        (answer, stats)
    };
    Ok(Report { answer, boolean_states: tr.boolean_states, stats })
}
