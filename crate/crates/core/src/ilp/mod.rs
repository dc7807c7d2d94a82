//! Feasibility of integer linear systems over nonnegative integer variables.
//!
//! The oracle is branch-and-bound over the LP relaxation, solved exactly
//! with a phase-one simplex. Every variable is boxed by a small-solution
//! bound so the search tree is finite: if the system has a nonnegative
//! integer solution, it has one inside the box.

mod simplex;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::num::Scalar;

pub use simplex::{find_feasible_point, Row};

/// `Σ cᵢ·xᵢ + constant >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<BigInt>,
    pub constant: BigInt,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearSystem {
    names: Vec<String>,
    constraints: Vec<Constraint>,
    fixed_zero: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum IlpError {
    #[error("branch-and-bound node budget of {0} exhausted")]
    BudgetExceeded(usize),
    #[error("search bound does not fit the chosen scalar type")]
    Unrepresentable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IlpConfig {
    /// Maximum number of LP relaxations solved.
    pub node_limit: usize,
}

impl Default for IlpConfig {
    fn default() -> Self {
        IlpConfig { node_limit: 100_000 }
    }
}

impl LinearSystem {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(names: I) -> Self {
        LinearSystem { names: names.into_iter().map(Into::into).collect(), ..Default::default() }
    }

    /// System over `n` variables named `x0`, `x1`, ...
    pub fn with_vars(n: usize) -> Self {
        Self::new((0..n).map(|i| format!("x{i}")))
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn fixed_zero(&self) -> &BTreeSet<usize> {
        &self.fixed_zero
    }

    /// Adds `Σ coeffs·x + constant >= 0`.
    pub fn add(&mut self, coeffs: Vec<BigInt>, constant: BigInt) {
        assert_eq!(coeffs.len(), self.names.len(), "coefficient vector length");
        self.constraints.push(Constraint { coeffs, constant });
    }

    pub fn add_i64(&mut self, coeffs: &[i64], constant: i64) {
        self.add(coeffs.iter().map(|&c| BigInt::from(c)).collect(), BigInt::from(constant));
    }

    /// Adds `Σ coeffs·x + constant = 0` as two inequalities.
    pub fn add_equality(&mut self, coeffs: Vec<BigInt>, constant: BigInt) {
        let neg: Vec<BigInt> = coeffs.iter().map(|c| -c).collect();
        self.add(coeffs, constant.clone());
        self.add(neg, -constant);
    }

    pub fn fix_zero(&mut self, var: usize) {
        assert!(var < self.names.len());
        self.fixed_zero.insert(var);
    }

    pub fn is_satisfied_by(&self, x: &[BigInt]) -> bool {
        x.len() == self.names.len()
            && x.iter().all(|v| !v.is_negative())
            && self.fixed_zero.iter().all(|&i| x[i].is_zero())
            && self.constraints.iter().all(|c| {
                let lhs: BigInt = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<BigInt>() + &c.constant;
                !lhs.is_negative()
            })
    }

    /// Bound `B` such that a feasible system has a solution in `[0, B]^n`:
    /// with slack columns the system reads `[A | -I] (x, s) = b` with `m`
    /// rows and `n + m` columns, so some solution has every entry at most
    /// `(n + m)·(m·a)^(2m+1)`, `a` the largest absolute entry.
    pub fn solution_bound(&self) -> BigInt {
        let m = self.constraints.len();
        let n = self.names.len();
        let a = self
            .constraints
            .iter()
            .flat_map(|c| c.coeffs.iter().chain(std::iter::once(&c.constant)))
            .map(|v| v.abs())
            .max()
            .unwrap_or_default()
            .max(BigInt::one());
        let base = BigInt::from(m.max(1)) * a;
        BigInt::from(n + m) * num_traits::pow(base, 2 * m + 1)
    }

    /// Feasibility over arbitrary-precision rationals.
    pub fn feasible(&self) -> Result<Option<Vec<BigInt>>, IlpError> {
        self.feasible_with::<BigRational>(IlpConfig::default())
    }

    /// Branch-and-bound over the field `T`. Returns a satisfying assignment,
    /// `None` when the system is infeasible, or an error when the node
    /// budget runs out before the search is complete.
    pub fn feasible_with<T: Scalar>(&self, config: IlpConfig) -> Result<Option<Vec<BigInt>>, IlpError> {
        let n = self.names.len();
        if n == 0 {
            let ok = self.constraints.iter().all(|c| !c.constant.is_negative());
            return Ok(ok.then(Vec::new));
        }
        let to_t = |v: &BigInt| T::from_bigint(v).ok_or(IlpError::Unrepresentable);
        let mut base_rows = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            let c = tighten(c);
            base_rows.push(Row {
                coeffs: c.coeffs.iter().map(to_t).collect::<Result<_, _>>()?,
                rhs: to_t(&-&c.constant)?,
            });
        }
        let bound = self.solution_bound();
        let mut upper: Vec<BigInt> = vec![bound; n];
        for &i in &self.fixed_zero {
            upper[i] = BigInt::zero();
        }
        let lower: Vec<BigInt> = vec![BigInt::zero(); n];
        let mut stack = vec![(lower, upper)];
        let mut nodes = 0usize;
        while let Some((lo, hi)) = stack.pop() {
            if lo.iter().zip(&hi).any(|(l, h)| l > h) {
                continue;
            }
            nodes += 1;
            if nodes > config.node_limit {
                return Err(IlpError::BudgetExceeded(config.node_limit));
            }
            let mut rows = base_rows.clone();
            for j in 0..n {
                let mut unit = vec![T::zero(); n];
                unit[j] = T::one();
                if lo[j].is_positive() {
                    rows.push(Row { coeffs: unit.clone(), rhs: to_t(&lo[j])? });
                }
                unit[j] = -T::one();
                rows.push(Row { coeffs: unit, rhs: to_t(&-&hi[j])? });
            }
            let Some(x) = find_feasible_point(n, &rows) else { continue };
            // most fractional variable
            let mut branch: Option<(usize, BigInt, T)> = None;
            let half = T::one() / (T::one() + T::one());
            for (j, v) in x.iter().enumerate() {
                if v.is_integral() {
                    continue;
                }
                let fl = v.floor_int();
                let frac = v.clone() - to_t(&fl)?;
                let dist = (frac - half.clone()).abs();
                if branch.as_ref().is_none_or(|(_, _, d)| dist < *d) {
                    branch = Some((j, fl, dist));
                }
            }
            match branch {
                None => {
                    let sol: Vec<BigInt> = x.iter().map(Scalar::floor_int).collect();
                    debug_assert!(self.is_satisfied_by(&sol));
                    return Ok(Some(sol));
                }
                Some((j, fl, _)) => {
                    let mut up_lo = lo.clone();
                    up_lo[j] = &fl + 1;
                    let mut down_hi = hi.clone();
                    down_hi[j] = fl;
                    stack.push((up_lo, hi));
                    stack.push((lo, down_hi));
                }
            }
        }
        Ok(None)
    }

    /// Debug dump, one constraint per line: `c1*x1 + c2*x2 + k >= 0`.
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

/// Divides a constraint by the gcd of its coefficients and rounds the
/// constant down, which keeps every integer solution.
fn tighten(c: &Constraint) -> Constraint {
    let g = c.coeffs.iter().fold(BigInt::zero(), |g, k| g.gcd(k));
    if g.is_zero() || g.is_one() {
        return c.clone();
    }
    Constraint {
        coeffs: c.coeffs.iter().map(|k| k / &g).collect(),
        constant: c.constant.div_floor(&g),
    }
}

impl fmt::Display for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            let mut parts: Vec<String> = c
                .coeffs
                .iter()
                .zip(&self.names)
                .filter(|(k, _)| !k.is_zero())
                .map(|(k, name)| format!("{k}*{name}"))
                .collect();
            parts.push(c.constant.to_string());
            writeln!(f, "{} >= 0", parts.join(" + "))?;
        }
        for &i in &self.fixed_zero {
            writeln!(f, "{} = 0", self.names[i])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use num_rational::Rational64;
    use proptest::prelude::*;

    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn interval_is_feasible() {
        let mut s = LinearSystem::with_vars(1);
        s.add_i64(&[1], -1);
        s.add_i64(&[-1], 2);
        let x = s.feasible().unwrap().unwrap();
        assert!(x[0] == BigInt::from(1) || x[0] == BigInt::from(2));
    }

    #[test]
    fn contradictory_bounds() {
        let mut s = LinearSystem::with_vars(2);
        s.add_i64(&[1, 1], -3);
        s.add_i64(&[-1, -1], 2);
        assert_eq!(s.feasible().unwrap(), None);
    }

    #[test]
    fn lp_feasible_but_integer_infeasible() {
        // 2x = 1
        let mut s = LinearSystem::with_vars(1);
        s.add_equality(ints(&[2]), BigInt::from(-1));
        assert_eq!(s.feasible().unwrap(), None);
        // 2x + 2y = 3 + ... parity argument with two vars
        let mut t = LinearSystem::with_vars(2);
        t.add_equality(ints(&[2, -2]), BigInt::from(1));
        assert_eq!(t.feasible().unwrap(), None);
    }

    #[test]
    fn counting_identity_system() {
        // variables x1010, x1001, x0110, x0101 (others pinned to zero and dropped);
        // #p - #q = 0 where #p = x1010 + x1001 and #q = x1010 + x0110
        let mut s = LinearSystem::new(["x1010", "x1001", "x0110", "x0101"]);
        s.add_equality(ints(&[0, 1, -1, 0]), BigInt::zero());
        let x = s.feasible().unwrap().unwrap();
        assert!(s.is_satisfied_by(&x));
        // (#p + #¬p) - (#q + #¬q) - 1 >= 0 is infeasible
        let mut t = LinearSystem::new(["x1010", "x1001", "x0110", "x0101"]);
        t.add_i64(&[0, 0, 0, 0], -1);
        assert_eq!(t.feasible().unwrap(), None);
    }

    #[test]
    fn no_variables() {
        let mut s = LinearSystem::with_vars(0);
        s.add(vec![], BigInt::from(0));
        assert_eq!(s.feasible().unwrap(), Some(vec![]));
        s.add(vec![], BigInt::from(-1));
        assert_eq!(s.feasible().unwrap(), None);
    }

    #[test]
    fn fixed_zero_is_respected() {
        let mut s = LinearSystem::with_vars(2);
        s.add_i64(&[1, 1], -1);
        s.fix_zero(0);
        let x = s.feasible().unwrap().unwrap();
        assert_eq!(x[0], BigInt::zero());
        s.fix_zero(1);
        assert_eq!(s.feasible().unwrap(), None);
    }

    #[test]
    fn budget_is_reported_not_infeasible() {
        // x + y = 2z + 1 and x - y = 2w force 2x odd; the LP cannot see parity
        let mut s = LinearSystem::with_vars(4);
        s.add_equality(ints(&[1, 1, -2, 0]), BigInt::from(-1));
        s.add_equality(ints(&[1, -1, 0, -2]), BigInt::zero());
        let r = s.feasible_with::<BigRational>(IlpConfig { node_limit: 3 });
        assert_eq!(r, Err(IlpError::BudgetExceeded(3)));
    }

    #[test]
    fn dump_format() {
        let mut s = LinearSystem::with_vars(2);
        s.add_i64(&[3, -1], 4);
        s.fix_zero(1);
        assert_eq!(s.dump(), "3*x0 + -1*x1 + 4 >= 0\nx1 = 0\n");
    }

    #[test]
    fn small_scalar_agrees_on_small_system() {
        let mut s = LinearSystem::with_vars(2);
        s.add_i64(&[3, -2], -1);
        s.add_i64(&[-1, 4], -2);
        let a = s.feasible().unwrap();
        let b = s.feasible_with::<Rational64>(IlpConfig::default());
        // the box bound overflows i64 for larger systems; here it fits
        assert_eq!(a.is_some(), b.unwrap().is_some());
    }

    fn brute_force(s: &LinearSystem, box_max: i64) -> bool {
        let n = s.num_vars();
        let mut x = vec![0i64; n];
        loop {
            let xs: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
            if s.is_satisfied_by(&xs) {
                return true;
            }
            let mut i = 0;
            loop {
                if i == n {
                    return false;
                }
                x[i] += 1;
                if x[i] <= box_max {
                    break;
                }
                x[i] = 0;
                i += 1;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn agrees_with_brute_force_on_boxed_systems(
            n in 1usize..=3,
            rows in proptest::collection::vec((proptest::collection::vec(-8i64..=8, 3), -8i64..=8), 1..4),
            caps in proptest::collection::vec(0i64..=5, 3),
        ) {
            let mut s = LinearSystem::with_vars(n);
            for (c, k) in &rows {
                s.add_i64(&c[..n], *k);
            }
            for (i, cap) in caps.iter().take(n).enumerate() {
                let mut unit = vec![0i64; n];
                unit[i] = -1;
                s.add_i64(&unit, *cap);
            }
            let got = s.feasible().unwrap();
            if let Some(x) = &got {
                prop_assert!(s.is_satisfied_by(x));
            }
            prop_assert_eq!(got.is_some(), brute_force(&s, 5));
        }

        #[test]
        fn positive_scaling_preserves_answer(
            rows in proptest::collection::vec((proptest::collection::vec(-6i64..=6, 2), -6i64..=6), 1..4),
            scale in 1i64..=5,
        ) {
            let mut s = LinearSystem::with_vars(2);
            let mut t = LinearSystem::with_vars(2);
            for (c, k) in &rows {
                s.add_i64(c, *k);
                let scaled: Vec<i64> = c.iter().map(|v| v * scale).collect();
                t.add_i64(&scaled, k * scale);
            }
            prop_assert_eq!(s.feasible().unwrap().is_some(), t.feasible().unwrap().is_some());
        }
    }
}
