use std::fmt;

use num_traits::{Signed, Zero};

use super::{is_unit, is_zero, Atom, FormulaId, FormulaStore, LinExpr, Node};

/// Displays a formula in the parser's concrete syntax. Binary connectives
/// are always parenthesized, so the output re-parses to the same node.
pub struct Printer<'a> {
    store: &'a FormulaStore,
    root: FormulaId,
}

impl<'a> Printer<'a> {
    pub(super) fn new(store: &'a FormulaStore, root: FormulaId) -> Self {
        Printer { store, root }
    }

    fn formula(&self, f: &mut fmt::Formatter<'_>, id: FormulaId, nested: bool) -> fmt::Result {
        match self.store.node(id) {
            Node::Prop(p) => f.write_str(p),
            Node::Not(a) => {
                f.write_str("!")?;
                self.formula(f, *a, true)
            }
            Node::Or(a, b) | Node::And(a, b) => {
                let op = if matches!(self.store.node(id), Node::Or(..)) { " | " } else { " & " };
                f.write_str("(")?;
                self.formula(f, *a, true)?;
                f.write_str(op)?;
                self.formula(f, *b, true)?;
                f.write_str(")")
            }
            Node::GeqZero(e) => {
                if nested {
                    f.write_str("(")?;
                }
                self.expr(f, e)?;
                f.write_str(" >= 0")?;
                if nested {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }

    fn expr(&self, f: &mut fmt::Formatter<'_>, e: &LinExpr) -> fmt::Result {
        let c = e.constant_term();
        let mut first = true;
        let lead_negative = e.terms().first().is_some_and(|(_, k)| k.is_negative());
        if !is_zero(c) || e.terms().is_empty() || lead_negative {
            if c.is_negative() {
                write!(f, "0 - {}", c.abs())?;
            } else {
                write!(f, "{c}")?;
            }
            first = false;
        }
        for (atom, k) in e.terms() {
            if first {
                first = false;
            } else if k.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            let mag = k.abs();
            if !is_unit(&mag) {
                write!(f, "{mag}*")?;
            }
            match atom {
                Atom::Indicator(g) => {
                    f.write_str("[")?;
                    self.formula(f, *g, false)?;
                    f.write_str("]")?;
                }
                Atom::Count(g) => {
                    f.write_str("#(")?;
                    self.formula(f, *g, false)?;
                    f.write_str(")")?;
                }
            }
        }
        debug_assert!(!first || c.is_zero());
        Ok(())
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.formula(f, self.root, false)
    }
}
