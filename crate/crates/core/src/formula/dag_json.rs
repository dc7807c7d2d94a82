//! JSON dump of a formula DAG:
//! `{"nodes": [{"id", "kind", "children", ...}], "root": id}`.

use std::collections::HashMap;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{Atom, FormulaId, FormulaStore, LinExpr, Node};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagDump {
    pub nodes: Vec<DagNode>,
    pub root: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagNode {
    pub id: u32,
    /// One of `prop`, `not`, `or`, `and`, `geq`.
    pub kind: String,
    pub children: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<DagTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagTerm {
    /// `indicator` or `count`.
    pub atom: String,
    pub formula: u32,
    pub coefficient: String,
}

#[derive(Debug, thiserror::Error)]
pub enum DagError {
    #[error("node {0} refers to unknown or later node {1}")]
    BadReference(u32, u32),
    #[error("node {0}: {1}")]
    Malformed(u32, String),
    #[error("root {0} is not a node")]
    BadRoot(u32),
}

impl FormulaStore {
    /// Dump the nodes reachable from `f`, in ascending (topological) order.
    pub fn to_dag(&self, f: FormulaId) -> DagDump {
        let nodes = self
            .subformulas(f)
            .into_iter()
            .map(|id| {
                let node = self.node(id);
                let children = node.children().iter().map(|c| c.0).collect();
                let mut out = DagNode {
                    id: id.0,
                    kind: String::new(),
                    children,
                    name: None,
                    constant: None,
                    terms: Vec::new(),
                };
                match node {
                    Node::Prop(p) => {
                        out.kind = "prop".into();
                        out.name = Some(p.clone());
                    }
                    Node::Not(_) => out.kind = "not".into(),
                    Node::Or(..) => out.kind = "or".into(),
                    Node::And(..) => out.kind = "and".into(),
                    Node::GeqZero(e) => {
                        out.kind = "geq".into();
                        out.constant = Some(e.constant_term().to_string());
                        out.terms = e
                            .terms()
                            .iter()
                            .map(|(a, k)| DagTerm {
                                atom: if a.is_count() { "count" } else { "indicator" }.into(),
                                formula: a.formula().0,
                                coefficient: k.to_string(),
                            })
                            .collect();
                    }
                }
                out
            })
            .collect();
        DagDump { nodes, root: f.0 }
    }

    /// Re-intern a dumped DAG into this store.
    pub fn from_dag(&mut self, dag: &DagDump) -> Result<FormulaId, DagError> {
        let mut map: HashMap<u32, FormulaId> = HashMap::new();
        for n in &dag.nodes {
            let child = |i: usize| -> Result<FormulaId, DagError> {
                let c = *n
                    .children
                    .get(i)
                    .ok_or_else(|| DagError::Malformed(n.id, "missing child".into()))?;
                map.get(&c).copied().ok_or(DagError::BadReference(n.id, c))
            };
            let id = match n.kind.as_str() {
                "prop" => {
                    let name = n
                        .name
                        .as_deref()
                        .ok_or_else(|| DagError::Malformed(n.id, "prop without name".into()))?;
                    self.prop(name)
                }
                "not" => {
                    let a = child(0)?;
                    self.not(a)
                }
                "or" | "and" => {
                    let (a, b) = (child(0)?, child(1)?);
                    if n.kind == "or" {
                        self.or(a, b)
                    } else {
                        self.and(a, b)
                    }
                }
                "geq" => {
                    let parse_int = |s: &str| {
                        BigInt::from_str(s)
                            .map_err(|_| DagError::Malformed(n.id, format!("bad integer `{s}`")))
                    };
                    let constant = parse_int(n.constant.as_deref().unwrap_or("0"))?;
                    let mut terms = Vec::new();
                    for t in &n.terms {
                        let g = map
                            .get(&t.formula)
                            .copied()
                            .ok_or(DagError::BadReference(n.id, t.formula))?;
                        let atom = match t.atom.as_str() {
                            "count" => Atom::Count(g),
                            "indicator" => Atom::Indicator(g),
                            other => {
                                return Err(DagError::Malformed(n.id, format!("unknown atom `{other}`")))
                            }
                        };
                        terms.push((atom, parse_int(&t.coefficient)?));
                    }
                    self.geq_zero(LinExpr::from_parts(constant, terms))
                }
                other => return Err(DagError::Malformed(n.id, format!("unknown kind `{other}`"))),
            };
            map.insert(n.id, id);
        }
        map.get(&dag.root).copied().ok_or(DagError::BadRoot(dag.root))
    }
}
