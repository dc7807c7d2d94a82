//! Counting modal logic K#: formulas whose atoms are linear inequalities
//! over `1_φ` (is `φ` true here) and `#φ` (how many successors satisfy `φ`).
//!
//! The crate provides a hash-consed formula store with a parser, a model
//! checker over labeled graphs, an exact aggregate-combine GNN runtime,
//! translations between formulas and GNNs in both directions, an exact
//! integer feasibility oracle, and a satisfiability procedure that returns
//! tree-shaped witnesses. [`verify`] combines them to decide inclusion and
//! equivalence questions between a GNN and a formula.

pub mod compile;
pub mod formula;
pub mod gnn;
pub mod graph;
pub mod ilp;
pub mod num;
pub mod random;
pub mod sat;
pub mod translate;
pub mod verify;

pub use num_bigint::BigInt;
pub use num_rational::{BigRational, Rational64};

pub use formula::{parse, Atom, FormulaId, FormulaStore, LinExpr, Node};
pub use graph::{check, eval_expr, LabeledGraph, PointedGraph};

/// Arbitrary-precision exact rational, the default scalar.
pub type Rational = BigRational;
/// GNN over arbitrary-precision rationals.
pub type ExactGnn = gnn::Gnn<BigRational>;
/// GNN over 64-bit rationals, for small weights.
pub type SmallGnn = gnn::Gnn<Rational64>;
pub type ExactLayer = gnn::Layer<BigRational>;
