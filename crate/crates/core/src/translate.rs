//! GNN to formula translation, and tuning a net against a formula.
//!
//! Component `ℓ` after layer `t + 1` is represented by
//! `Σᵢ C_iℓ·1_{φᵢ} + Σᵢ A_iℓ·#φᵢ + b_ℓ >= 1` over the formulas `φᵢ`
//! representing layer `t`. Each inequality is multiplied by the least
//! common multiple of its denominators so every coefficient is an integer.
//! The representation is exact when every reachable state is `{0,1}`-valued,
//! which integer weights guarantee.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

use crate::compile::compile;
use crate::formula::{Atom, FormulaId, FormulaStore, LinExpr};
use crate::gnn::Gnn;
use crate::num::Scalar;

/// Shown whenever a net might reach fractional states.
pub const BOOLEAN_STATE_CAVEAT: &str =
    "warning: the net has non-integer weights, so states may leave {0,1} and the formula may disagree with the net";

#[derive(Clone, Debug)]
pub struct Translation {
    pub root: FormulaId,
    /// `false` when non-integer weights could produce fractional states.
    pub boolean_states: bool,
}

impl Translation {
    pub fn warning(&self) -> Option<&'static str> {
        (!self.boolean_states).then_some(BOOLEAN_STATE_CAVEAT)
    }
}

fn lcm_of_denominators<'a, I: IntoIterator<Item = &'a BigRational>>(xs: I) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |m, x| m.lcm(x.denom()))
}

fn scaled(x: &BigRational, m: &BigInt) -> BigInt {
    (x * BigRational::from_integer(m.clone())).to_integer()
}

/// Formula equivalent to `net` on graphs where its states stay Boolean.
pub fn translate<T: Scalar>(store: &mut FormulaStore, net: &Gnn<T>) -> Translation {
    let d = net.dimension();
    let bottom = store.bottom();
    let mut phi: Vec<FormulaId> = (0..d)
        .map(|i| match net.props().get(i) {
            Some(p) => store.prop(p),
            None => bottom,
        })
        .collect();
    for layer in net.layers() {
        let c: Vec<Vec<BigRational>> = layer.c.iter().map(|r| r.iter().map(Scalar::to_big_rational).collect()).collect();
        let a: Vec<Vec<BigRational>> = layer.a.iter().map(|r| r.iter().map(Scalar::to_big_rational).collect()).collect();
        let b: Vec<BigRational> = layer.b.iter().map(Scalar::to_big_rational).collect();
        let next: Vec<FormulaId> = (0..d)
            .map(|l| {
                let column = (0..d).flat_map(|i| [&c[i][l], &a[i][l]]);
                let m = lcm_of_denominators(column.chain(std::iter::once(&b[l])));
                let mut terms = Vec::new();
                for i in 0..d {
                    terms.push((Atom::Indicator(phi[i]), scaled(&c[i][l], &m)));
                    terms.push((Atom::Count(phi[i]), scaled(&a[i][l], &m)));
                }
                let constant = scaled(&b[l], &m) - &m;
                store.geq_zero(LinExpr::from_parts(constant, terms))
            })
            .collect();
        phi = next;
    }
    let cls: Vec<BigRational> = net.cls().iter().map(Scalar::to_big_rational).collect();
    let m = lcm_of_denominators(&cls);
    let terms = phi.iter().zip(&cls).map(|(&f, x)| (Atom::Indicator(f), scaled(x, &m)));
    let root = store.geq_zero(LinExpr::from_parts(BigInt::from(0), terms));
    Translation { root, boolean_states: net.has_boolean_states() }
}

/// `L·d·(d+1) + 1`: the layer inequalities and their coefficient cells
/// plus the final inequality.
pub fn size_bound<T: Scalar>(net: &Gnn<T>) -> usize {
    let d = net.dimension();
    net.layers().len() * d * (d + 1) + 1
}

#[derive(Clone, Debug)]
pub struct Tuned {
    pub net: Gnn<BigRational>,
    pub formula: FormulaId,
    pub boolean_states: bool,
}

/// A net accepting exactly what `net` accepts and `f` holds on:
/// `compile(translate(net) ∧ f)`.
pub fn tune<T: Scalar>(store: &mut FormulaStore, net: &Gnn<T>, f: FormulaId) -> Tuned {
    let tr = translate(store, net);
    let formula = store.and(tr.root, f);
    Tuned { net: compile(store, formula), formula, boolean_states: tr.boolean_states }
}
