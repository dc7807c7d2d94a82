//! Aggregate-combine GNNs with sum aggregation, truncated-ReLU combination
//! `σ(xC + yA + b)` and a homogeneous linear classifier `Σ aᵢxᵢ >= 0`.
//!
//! Matrices use the row-vector convention: a state is a row vector `x`,
//! column `ℓ` of `C` and `A` computes output component `ℓ`.

use serde::{Deserialize, Serialize};

use crate::graph::LabeledGraph;
use crate::num::{format_rational, Scalar};

#[derive(Debug, thiserror::Error)]
pub enum GnnError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{0} propositions do not fit in dimension {1}")]
    TooManyPropositions(usize, usize),
    #[error("invalid rational `{0}`")]
    BadRational(String),
    #[error("unsupported aggregation `{0}` (only `sum` is supported)")]
    Aggregation(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One layer: self weights `C`, aggregate weights `A`, bias `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layer<T> {
    pub c: Vec<Vec<T>>,
    pub a: Vec<Vec<T>>,
    pub b: Vec<T>,
}

impl<T: Scalar> Layer<T> {
    pub fn zeros(d: usize) -> Self {
        Layer { c: vec![vec![T::zero(); d]; d], a: vec![vec![T::zero(); d]; d], b: vec![T::zero(); d] }
    }

    fn dimension_ok(&self, d: usize) -> bool {
        self.c.len() == d
            && self.a.len() == d
            && self.b.len() == d
            && self.c.iter().chain(&self.a).all(|row| row.len() == d)
    }

    fn columns(&self) -> SparseLayer<T> {
        let d = self.b.len();
        let mut c_cols = vec![Vec::new(); d];
        let mut a_cols = vec![Vec::new(); d];
        for i in 0..d {
            for l in 0..d {
                if !self.c[i][l].is_zero() {
                    c_cols[l].push((i, self.c[i][l].clone()));
                }
                if !self.a[i][l].is_zero() {
                    a_cols[l].push((i, self.a[i][l].clone()));
                }
            }
        }
        let uses_aggregate = a_cols.iter().any(|c| !c.is_empty());
        SparseLayer { c_cols, a_cols, uses_aggregate }
    }

    fn map<U, F: Fn(&T) -> Option<U>>(&self, f: &F) -> Option<Layer<U>> {
        let m = |rows: &Vec<Vec<T>>| -> Option<Vec<Vec<U>>> {
            rows.iter().map(|r| r.iter().map(f).collect()).collect()
        };
        Some(Layer { c: m(&self.c)?, a: m(&self.a)?, b: self.b.iter().map(f).collect::<Option<_>>()? })
    }
}

struct SparseLayer<T> {
    c_cols: Vec<Vec<(usize, T)>>,
    a_cols: Vec<Vec<(usize, T)>>,
    uses_aggregate: bool,
}

/// Per-vertex state vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State<T> {
    pub rows: Vec<Vec<T>>,
}

impl<T: Scalar> State<T> {
    pub fn at(&self, v: usize) -> &[T] {
        &self.rows[v]
    }

    /// Every component is 0 or 1.
    pub fn is_boolean(&self) -> bool {
        self.rows.iter().flatten().all(|x| x.is_zero() || x.is_one())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gnn<T> {
    props: Vec<String>,
    dim: usize,
    layers: Vec<Layer<T>>,
    cls: Vec<T>,
}

fn dot_accumulate<T: Scalar>(acc: &mut T, x: &T, w: &T) {
    if x.is_zero() {
        return;
    }
    if x.is_one() {
        *acc = acc.clone() + w.clone();
    } else {
        *acc = acc.clone() + x.clone() * w.clone();
    }
}

impl<T: Scalar> Gnn<T> {
    pub fn new(props: Vec<String>, dim: usize, layers: Vec<Layer<T>>, cls: Vec<T>) -> Result<Self, GnnError> {
        if props.len() > dim {
            return Err(GnnError::TooManyPropositions(props.len(), dim));
        }
        if cls.len() != dim {
            return Err(GnnError::Dimension(format!("cls has length {}, expected {dim}", cls.len())));
        }
        if let Some(i) = layers.iter().position(|l| !l.dimension_ok(dim)) {
            return Err(GnnError::Dimension(format!("layer {i} is not {dim}x{dim}")));
        }
        Ok(Gnn { props, dim, layers, cls })
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn cls(&self) -> &[T] {
        &self.cls
    }

    /// `x₀(u) = (ℓ(u)(p₁), …, ℓ(u)(p_k), 0, …, 0)`.
    pub fn initial_state(&self, g: &LabeledGraph) -> State<T> {
        let rows = g
            .vertices()
            .map(|v| {
                let mut row = vec![T::zero(); self.dim];
                for (i, p) in self.props.iter().enumerate() {
                    if g.holds(v, p) {
                        row[i] = T::one();
                    }
                }
                row
            })
            .collect();
        State { rows }
    }

    /// One application of `σ(x(u)C + (Σ_{u→v} x(v))A + b)`.
    pub fn apply_layer(&self, g: &LabeledGraph, s: &State<T>, layer: &Layer<T>) -> State<T> {
        apply_sparse(g, s, &layer.columns(), &layer.b, self.dim)
    }

    pub fn run(&self, g: &LabeledGraph) -> State<T> {
        let mut s = self.initial_state(g);
        for layer in &self.layers {
            s = apply_sparse(g, &s, &layer.columns(), &layer.b, self.dim);
        }
        s
    }

    /// Does the classifier accept the final state `x`?
    pub fn accepts(&self, x: &[T]) -> bool {
        let mut acc = T::zero();
        for (xi, ai) in x.iter().zip(&self.cls) {
            dot_accumulate(&mut acc, xi, ai);
        }
        !acc.is_negative()
    }

    pub fn classify(&self, g: &LabeledGraph, u: usize) -> bool {
        self.accepts(self.run(g).at(u))
    }

    /// Verdict for every vertex, one run.
    pub fn classify_all(&self, g: &LabeledGraph) -> Vec<bool> {
        let s = self.run(g);
        g.vertices().map(|v| self.accepts(s.at(v))).collect()
    }

    /// Every `C`, `A` and `b` entry is an integer, so `{0,1}` inputs produce
    /// integer pre-activations and the truncation keeps states in `{0,1}`.
    pub fn has_boolean_states(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.b.iter().chain(l.c.iter().flatten()).chain(l.a.iter().flatten()).all(T::is_integral))
    }

    /// Exact conversion to another scalar type.
    pub fn convert<U: Scalar>(&self) -> Option<Gnn<U>> {
        let f = |x: &T| U::from_big_rational(&x.to_big_rational());
        Some(Gnn {
            props: self.props.clone(),
            dim: self.dim,
            layers: self.layers.iter().map(|l| l.map(&f)).collect::<Option<_>>()?,
            cls: self.cls.iter().map(f).collect::<Option<_>>()?,
        })
    }

    pub fn to_json(&self) -> GnnJson {
        let m = |rows: &Vec<Vec<T>>| rows.iter().map(|r| r.iter().map(RationalRepr::from_scalar).collect()).collect();
        GnnJson {
            propositions: self.props.clone(),
            dimension: self.dim,
            aggregation: None,
            layers: self
                .layers
                .iter()
                .map(|l| LayerJson {
                    c: m(&l.c),
                    a: m(&l.a),
                    b: l.b.iter().map(RationalRepr::from_scalar).collect(),
                    aggregation: None,
                })
                .collect(),
            cls: self.cls.iter().map(RationalRepr::from_scalar).collect(),
        }
    }

    pub fn from_json(j: &GnnJson) -> Result<Self, GnnError> {
        let check_agg = |a: &Option<String>| match a.as_deref() {
            None | Some("sum") => Ok(()),
            Some(other) => Err(GnnError::Aggregation(other.to_owned())),
        };
        check_agg(&j.aggregation)?;
        let vec = |v: &[RationalRepr]| v.iter().map(RationalRepr::to_scalar::<T>).collect::<Result<Vec<_>, _>>();
        let mat = |m: &[Vec<RationalRepr>]| m.iter().map(|r| vec(r)).collect::<Result<Vec<_>, _>>();
        let mut layers = Vec::with_capacity(j.layers.len());
        for l in &j.layers {
            check_agg(&l.aggregation)?;
            layers.push(Layer { c: mat(&l.c)?, a: mat(&l.a)?, b: vec(&l.b)? });
        }
        Gnn::new(j.propositions.clone(), j.dimension, layers, vec(&j.cls)?)
    }

    pub fn parse_json(text: &str) -> Result<Self, GnnError> {
        Self::from_json(&serde_json::from_str(text)?)
    }
}

fn apply_sparse<T: Scalar>(g: &LabeledGraph, s: &State<T>, layer: &SparseLayer<T>, b: &[T], d: usize) -> State<T> {
    let rows = g
        .vertices()
        .map(|u| {
            let agg = if layer.uses_aggregate {
                let mut agg = vec![T::zero(); d];
                for &v in g.successors(u) {
                    for (acc, x) in agg.iter_mut().zip(&s.rows[v]) {
                        if !x.is_zero() {
                            *acc = acc.clone() + x.clone();
                        }
                    }
                }
                agg
            } else {
                Vec::new()
            };
            let x = &s.rows[u];
            (0..d)
                .map(|l| {
                    let mut acc = b[l].clone();
                    for (i, w) in &layer.c_cols[l] {
                        dot_accumulate(&mut acc, &x[*i], w);
                    }
                    for (i, w) in &layer.a_cols[l] {
                        dot_accumulate(&mut acc, &agg[*i], w);
                    }
                    acc.clamp_unit()
                })
                .collect()
        })
        .collect();
    State { rows }
}

/// A rational in JSON: either an integer literal or a `"n/d"` string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalRepr {
    Int(i64),
    Text(String),
}

impl RationalRepr {
    fn from_scalar<T: Scalar>(x: &T) -> Self {
        RationalRepr::Text(format_rational(x))
    }

    fn to_scalar<T: Scalar>(&self) -> Result<T, GnnError> {
        match self {
            RationalRepr::Int(n) => T::from_i64(*n).ok_or_else(|| GnnError::BadRational(n.to_string())),
            RationalRepr::Text(s) => T::parse_rational(s).ok_or_else(|| GnnError::BadRational(s.clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerJson {
    #[serde(rename = "C")]
    pub c: Vec<Vec<RationalRepr>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<RationalRepr>>,
    pub b: Vec<RationalRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregation: Option<String>,
}

/// On-disk GNN format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GnnJson {
    pub propositions: Vec<String>,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregation: Option<String>,
    pub layers: Vec<LayerJson>,
    pub cls: Vec<RationalRepr>,
}

/// Hand-built networks.
pub mod fixtures {
    use num_rational::BigRational;

    use super::*;

    /// Network for `p ∧ (8 ≤ 3·#q)`: components `p`, `q`, `8 ≤ 3·#q`, the
    /// conjunction, plus a component pinned to 1 so the classifier can read
    /// `x₃ − x₄ >= 0`. Four identical layers.
    pub fn example_net() -> Gnn<BigRational> {
        let z = |v: &[i64]| v.iter().map(|&x| BigRational::from_integer(x.into())).collect::<Vec<_>>();
        let c = vec![
            z(&[1, 0, 0, 1, 0]),
            z(&[0, 1, 0, 0, 0]),
            z(&[0, 0, 0, 1, 0]),
            z(&[0, 0, 0, 0, 0]),
            z(&[0, 0, 0, 0, 0]),
        ];
        let a = vec![
            z(&[0, 0, 0, 0, 0]),
            z(&[0, 0, 3, 0, 0]),
            z(&[0, 0, 0, 0, 0]),
            z(&[0, 0, 0, 0, 0]),
            z(&[0, 0, 0, 0, 0]),
        ];
        let layer = Layer { c, a, b: z(&[0, 0, -7, -1, 1]) };
        Gnn::new(vec!["p".into(), "q".into()], 5, vec![layer; 4], z(&[0, 0, 0, 1, -1])).expect("well-formed")
    }
}
