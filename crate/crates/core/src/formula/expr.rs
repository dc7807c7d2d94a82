use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::FormulaId;

/// An expression atom: `1_φ` or `#φ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Indicator(FormulaId),
    Count(FormulaId),
}

impl Atom {
    pub fn formula(self) -> FormulaId {
        match self {
            Atom::Indicator(f) | Atom::Count(f) => f,
        }
    }

    pub fn is_count(self) -> bool {
        matches!(self, Atom::Count(_))
    }
}

/// `c₀ + Σ kᵢ·atomᵢ` in canonical form: terms sorted by atom, one term per
/// atom, no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LinExpr {
    constant: BigInt,
    terms: Vec<(Atom, BigInt)>,
}

impl LinExpr {
    pub fn constant<C: Into<BigInt>>(c: C) -> Self {
        LinExpr { constant: c.into(), terms: Vec::new() }
    }

    pub fn indicator(f: FormulaId) -> Self {
        Self::atom(Atom::Indicator(f))
    }

    pub fn count(f: FormulaId) -> Self {
        Self::atom(Atom::Count(f))
    }

    pub fn atom(a: Atom) -> Self {
        LinExpr { constant: BigInt::zero(), terms: vec![(a, BigInt::from(1))] }
    }

    pub fn from_parts<I>(constant: BigInt, terms: I) -> Self
    where
        I: IntoIterator<Item = (Atom, BigInt)>,
    {
        let mut e = LinExpr { constant, terms: terms.into_iter().collect() };
        e.normalize();
        e
    }

    fn normalize(&mut self) {
        self.terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(Atom, BigInt)> = Vec::with_capacity(self.terms.len());
        for (atom, k) in self.terms.drain(..) {
            match merged.last_mut() {
                Some((last, acc)) if *last == atom => *acc += k,
                _ => merged.push((atom, k)),
            }
        }
        merged.retain(|(_, k)| !k.is_zero());
        self.terms = merged;
    }

    pub fn constant_term(&self) -> &BigInt {
        &self.constant
    }

    pub fn terms(&self) -> &[(Atom, BigInt)] {
        &self.terms
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_counts(&self) -> bool {
        self.terms.iter().any(|(a, _)| a.is_count())
    }

    pub fn scale<C: Into<BigInt>>(&self, c: C) -> Self {
        let c = c.into();
        if c.is_zero() {
            return LinExpr::default();
        }
        LinExpr {
            constant: &self.constant * &c,
            terms: self.terms.iter().map(|(a, k)| (*a, k * &c)).collect(),
        }
    }

    /// Replace the formula under every atom; merges atoms that collide.
    pub fn map_formulas<F: FnMut(FormulaId) -> FormulaId>(&self, mut f: F) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(a, k)| {
                let atom = match *a {
                    Atom::Indicator(g) => Atom::Indicator(f(g)),
                    Atom::Count(g) => Atom::Count(f(g)),
                };
                (atom, k.clone())
            })
            .collect::<Vec<_>>();
        LinExpr::from_parts(self.constant.clone(), terms)
    }

    /// Evaluate given the value of each atom.
    pub fn eval<F: FnMut(Atom) -> BigInt>(&self, mut value: F) -> BigInt {
        let mut acc = self.constant.clone();
        for (a, k) in &self.terms {
            let v = value(*a);
            if !v.is_zero() {
                acc += k * v;
            }
        }
        acc
    }

    /// Largest absolute coefficient or constant.
    pub fn max_abs(&self) -> BigInt {
        self.terms
            .iter()
            .map(|(_, k)| k.abs())
            .chain(std::iter::once(self.constant.abs()))
            .max()
            .unwrap_or_default()
    }
}

impl Add<&LinExpr> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: &LinExpr) -> LinExpr {
        self.constant += &rhs.constant;
        self.terms.extend(rhs.terms.iter().cloned());
        self.normalize();
        self
    }
}

impl Sub<&LinExpr> for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: &LinExpr) -> LinExpr {
        self + &rhs.scale(-1)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scale(-1)
    }
}

impl Mul<&BigInt> for LinExpr {
    type Output = LinExpr;
    fn mul(self, rhs: &BigInt) -> LinExpr {
        self.scale(rhs.clone())
    }
}
