//! Edge types, their normal form and path encodings, and graph types with
//! strict checking.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{CommonGraph, EdgeTriple, Name, NodeId, TypeRegistry};
use crate::report::ValidationReport;
use crate::shacl::builtins;

use super::content::{content_member, ContentType};
use super::{Pg, PgError, PgPathExpr, PgRule, PgSchema};

/// Allowed labels: `*` or a finite set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "LabelsDoc", into = "LabelsDoc")]
pub enum Labels {
    Wildcard,
    Set(BTreeSet<Name>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LabelsDoc {
    Wildcard(WildcardMark),
    Set(BTreeSet<Name>),
}

#[derive(Serialize, Deserialize)]
enum WildcardMark {
    #[serde(rename = "*")]
    Star,
}

impl From<LabelsDoc> for Labels {
    fn from(d: LabelsDoc) -> Self {
        match d {
            LabelsDoc::Wildcard(_) => Labels::Wildcard,
            LabelsDoc::Set(s) => Labels::Set(s),
        }
    }
}

impl From<Labels> for LabelsDoc {
    fn from(l: Labels) -> Self {
        match l {
            Labels::Wildcard => LabelsDoc::Wildcard(WildcardMark::Star),
            Labels::Set(s) => LabelsDoc::Set(s),
        }
    }
}

impl Labels {
    pub fn set<I: IntoIterator<Item = S>, S: Into<String>>(ps: I) -> Self {
        Labels::Set(ps.into_iter().map(Name::new).collect())
    }

    /// `⊓`: intersection, with `*` as the unit.
    pub fn meet(&self, other: &Labels) -> Labels {
        match (self, other) {
            (Labels::Wildcard, x) | (x, Labels::Wildcard) => x.clone(),
            (Labels::Set(a), Labels::Set(b)) => Labels::Set(a.intersection(b).cloned().collect()),
        }
    }

    pub fn contains(&self, p: &Name) -> bool {
        match self {
            Labels::Wildcard => true,
            Labels::Set(s) => s.contains(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum EdgeType {
    Et {
        src: ContentType,
        labels: Labels,
        dst: ContentType,
    },
    Both {
        left: Box<EdgeType>,
        right: Box<EdgeType>,
    },
    Either {
        left: Box<EdgeType>,
        right: Box<EdgeType>,
    },
}

impl EdgeType {
    pub fn et(src: ContentType, labels: Labels, dst: ContentType) -> Self {
        EdgeType::Et { src, labels, dst }
    }

    /// `⊤ : * : ⊤`
    pub fn trivial() -> Self {
        EdgeType::et(ContentType::any(), Labels::Wildcard, ContentType::any())
    }

    pub fn both(self, right: EdgeType) -> Self {
        EdgeType::Both {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn either(self, right: EdgeType) -> Self {
        EdgeType::Either {
            left: Box::new(self),
            right: Box::new(right),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimLabel {
    Any,
    One(Name),
    NoLabel,
}

/// `ν1 : * : ν2`, `ν1 : {p} : ν2` or `ν1 : ∅ : ν2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimitiveEdgeType {
    pub src: ContentType,
    pub label: PrimLabel,
    pub dst: ContentType,
}

impl PrimitiveEdgeType {
    pub fn admits(&self, g: &CommonGraph, e: &EdgeTriple, types: &TypeRegistry) -> bool {
        let label_ok = match &self.label {
            PrimLabel::Any => true,
            PrimLabel::One(p) => p == &e.pred,
            PrimLabel::NoLabel => false,
        };
        label_ok
            && content_member(&g.content(&e.source), &self.src, types)
            && content_member(&g.content(&e.target), &self.dst, types)
    }

    fn to_path(&self) -> PgPathExpr {
        let step = match &self.label {
            PrimLabel::Any => PgPathExpr::not_preds(Vec::<String>::new()),
            PrimLabel::One(p) => PgPathExpr::Pred { p: p.clone() },
            PrimLabel::NoLabel => return PgPathExpr::bottom(),
        };
        PgPathExpr::of_type(self.src.clone())
            .concat(step)
            .concat(PgPathExpr::of_type(self.dst.clone()))
    }
}

fn unsplit(t: &EdgeType) -> Vec<(ContentType, Labels, ContentType)> {
    match t {
        EdgeType::Et { src, labels, dst } => {
            let mut out = Vec::new();
            for s in src.alternatives() {
                for d in dst.alternatives() {
                    out.push((s.clone(), labels.clone(), d.clone()));
                }
            }
            out
        }
        EdgeType::Either { left, right } => {
            let mut v = unsplit(left);
            v.extend(unsplit(right));
            v
        }
        EdgeType::Both { left, right } => {
            let r = unsplit(right);
            let mut out = Vec::new();
            for (s1, l1, d1) in unsplit(left) {
                for (s2, l2, d2) in &r {
                    out.push((s1.clone().both(s2.clone()), l1.meet(l2), d1.clone().both(d2.clone())));
                }
            }
            out
        }
    }
}

/// Pushes `|` to the top, merges `&` with `⊓` and splits label sets into
/// singletons.
pub fn normalize_edge_type(t: &EdgeType) -> Vec<PrimitiveEdgeType> {
    let mut out = Vec::new();
    for (src, labels, dst) in unsplit(t) {
        match labels {
            Labels::Wildcard => out.push(PrimitiveEdgeType { src, label: PrimLabel::Any, dst }),
            Labels::Set(s) if s.is_empty() => out.push(PrimitiveEdgeType { src, label: PrimLabel::NoLabel, dst }),
            Labels::Set(s) => {
                for p in s {
                    out.push(PrimitiveEdgeType {
                        src: src.clone(),
                        label: PrimLabel::One(p),
                        dst: dst.clone(),
                    });
                }
            }
        }
    }
    out
}

pub fn edge_type_member_with(g: &CommonGraph, e: &EdgeTriple, t: &EdgeType, types: &TypeRegistry) -> bool {
    normalize_edge_type(t).iter().any(|p| p.admits(g, e, types))
}

pub fn edge_type_member(g: &CommonGraph, e: &EdgeTriple, t: &EdgeType) -> bool {
    edge_type_member_with(g, e, t, builtins())
}

/// One way for an edge to miss every primitive: its source fails all of
/// `src`, its label is outside `labels` and its target fails all of `dst`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Miss {
    src: BTreeSet<ContentType>,
    labels: BTreeSet<Name>,
    dst: BTreeSet<ContentType>,
}

impl Miss {
    /// Every edge `other` describes is also described by `self`.
    fn weaker(&self, other: &Miss) -> bool {
        self.src.is_subset(&other.src) && self.labels.is_subset(&other.labels) && self.dst.is_subset(&other.dst)
    }

    fn to_path(&self) -> PgPathExpr {
        self.src
            .iter()
            .map(|t| PgPathExpr::not_of_type(t.clone()))
            .chain(std::iter::once(PgPathExpr::NotPreds { ps: self.labels.clone() }))
            .chain(self.dst.iter().map(|t| PgPathExpr::not_of_type(t.clone())))
            .reduce(|a, b| a.concat(b))
            .expect("non-empty")
    }
}

/// Drops rows implied by a weaker one.
fn minimal(rows: BTreeSet<Miss>) -> BTreeSet<Miss> {
    rows.iter()
        .filter(|r| !rows.iter().any(|o| o != *r && o.weaker(r)))
        .cloned()
        .collect()
}

fn balanced_union(mut parts: Vec<PgPathExpr>) -> PgPathExpr {
    match parts.len() {
        0 => PgPathExpr::bottom(),
        1 => parts.pop().expect("one part"),
        n => {
            let right = parts.split_off(n / 2);
            balanced_union(parts).union(balanced_union(right))
        }
    }
}

/// Path with the same node pairs as the edges of type `t`, or of the edges
/// not of type `t` when `negated`.
///
/// The negated form is a union with one term per choice, for every
/// primitive, of why an edge misses it: its source, its label or its target.
/// Primitives with label `∅` admit nothing and take no part.
pub fn edge_type_to_path(t: &EdgeType, negated: bool) -> PgPathExpr {
    let prims: BTreeSet<PrimitiveEdgeType> = normalize_edge_type(t).into_iter().collect();
    if !negated {
        return balanced_union(prims.iter().map(PrimitiveEdgeType::to_path).collect());
    }
    let mut rows = BTreeSet::from([Miss {
        src: BTreeSet::new(),
        labels: BTreeSet::new(),
        dst: BTreeSet::new(),
    }]);
    for p in prims.iter().filter(|p| p.label != PrimLabel::NoLabel) {
        let mut next = BTreeSet::new();
        for row in &rows {
            let mut by_src = row.clone();
            by_src.src.insert(p.src.clone());
            next.insert(by_src);
            if let PrimLabel::One(q) = &p.label {
                let mut by_label = row.clone();
                by_label.labels.insert(q.clone());
                next.insert(by_label);
            }
            let mut by_dst = row.clone();
            by_dst.dst.insert(p.dst.clone());
            next.insert(by_dst);
        }
        rows = minimal(next);
    }
    balanced_union(rows.iter().map(Miss::to_path).collect())
}

/// Node types, edge types and constraints, all checked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphType {
    pub node_types: Vec<ContentType>,
    pub edge_types: Vec<EdgeType>,
    pub constraints: Vec<PgRule>,
}

impl GraphType {
    /// Only the constraints matter: node types `{⊤}`, edge types `{⊤:*:⊤}`.
    pub fn loose(constraints: Vec<PgRule>) -> Self {
        GraphType {
            node_types: vec![ContentType::any()],
            edge_types: vec![EdgeType::trivial()],
            constraints,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphTypeReport {
    pub valid: bool,
    /// Nodes whose content is in no node type.
    pub node_violations: Vec<NodeId>,
    /// Edges matching no edge type.
    pub edge_violations: Vec<EdgeTriple>,
    pub constraints: ValidationReport,
}

pub fn validate_graph_type(g: &CommonGraph, gt: &GraphType) -> Result<GraphTypeReport, PgError> {
    let types = builtins();
    let node_violations: Vec<NodeId> = g
        .nodes()
        .iter()
        .filter(|n| !gt.node_types.iter().any(|t| content_member(&g.content(n), t, types)))
        .cloned()
        .collect();
    let edge_violations: Vec<EdgeTriple> = g
        .edges()
        .filter(|e| !gt.edge_types.iter().any(|t| edge_type_member_with(g, e, t, types)))
        .cloned()
        .collect();
    let constraints = Pg::with_types(g, types).validate(&PgSchema::new(gt.constraints.clone()))?;
    Ok(GraphTypeReport {
        valid: node_violations.is_empty() && edge_violations.is_empty() && constraints.valid,
        node_violations,
        edge_violations,
        constraints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{Focus, PropTriple, ValueType};
    use crate::pgschema::eval_pg_path;

    fn nu(k: &str) -> ContentType {
        ContentType::field(k, ValueType::Int).opened()
    }

    #[test]
    fn member_basics() {
        let g = CommonGraph::build(vec![EdgeTriple::new("u", "ownsAccount", "a")], vec![PropTriple::new("u", "email", "x")])
            .unwrap();
        let e = EdgeTriple::new("u", "ownsAccount", "a");
        let t = EdgeType::et(ContentType::field("email", ValueType::Str).opened(), Labels::set(["ownsAccount"]), ContentType::any());
        assert!(edge_type_member(&g, &e, &t));
        assert!(edge_type_member(&g, &e, &EdgeType::trivial()));
        let q = EdgeType::et(ContentType::any(), Labels::set(["q"]), ContentType::any());
        assert!(!edge_type_member(&g, &e, &q));
    }

    #[test]
    fn normalization_rules() {
        let (a, b, c) = (nu("a"), nu("b"), nu("c"));
        let t = EdgeType::et(a.clone().either(b.clone()), Labels::set(["p"]), c.clone());
        let prims = normalize_edge_type(&t);
        assert_eq!(prims.len(), 2);
        assert_eq!(prims[0].src, a);
        assert_eq!(prims[1].src, b);
        let m = EdgeType::et(a.clone(), Labels::set(["p", "q"]), b.clone())
            .both(EdgeType::et(c.clone(), Labels::set(["q"]), nu("d")));
        let prims = normalize_edge_type(&m);
        assert_eq!(prims.len(), 1);
        assert_eq!(prims[0].label, PrimLabel::One(Name::from("q")));
        assert_eq!(prims[0].src, a.both(c));
        assert_eq!(prims[0].dst, b.both(nu("d")));
        let prim = EdgeType::et(nu("x"), Labels::Wildcard, nu("y"));
        assert_eq!(normalize_edge_type(&prim).len(), 1);
    }

    #[test]
    fn positive_paths() {
        let t = EdgeType::et(nu("a"), Labels::set(["p"]), nu("b"));
        let expected = PgPathExpr::of_type(nu("a")).concat(PgPathExpr::pred("p")).concat(PgPathExpr::of_type(nu("b")));
        assert_eq!(edge_type_to_path(&t, false), expected);
        let empty = EdgeType::et(nu("a"), Labels::set(Vec::<String>::new()), nu("b"));
        assert_eq!(edge_type_to_path(&empty, false), PgPathExpr::bottom());
    }

    #[test]
    fn negated_two_primitives() {
        let (n1, n2, m1, m2) = (nu("a"), nu("b"), nu("c"), nu("d"));
        let t = EdgeType::et(n1.clone(), Labels::set(["p"]), n2.clone())
            .either(EdgeType::et(m1.clone(), Labels::set(["p'"]), m2.clone()));
        let nf = |t: &ContentType| PgPathExpr::not_of_type(t.clone());
        let np = |ps: &[&str]| PgPathExpr::not_preds(ps.iter().copied());
        let terms = vec![
            nf(&n1).concat(nf(&m1)).concat(np(&[])),
            nf(&n1).concat(np(&["p'"])),
            nf(&n1).concat(np(&[])).concat(nf(&m2)),
            nf(&m1).concat(np(&["p"])),
            np(&["p", "p'"]),
            np(&["p"]).concat(nf(&m2)),
            nf(&m1).concat(np(&[])).concat(nf(&n2)),
            np(&["p'"]).concat(nf(&n2)),
            np(&[]).concat(nf(&n2)).concat(nf(&m2)),
        ];
        fn union_terms(p: PgPathExpr, out: &mut BTreeSet<PgPathExpr>) {
            match p {
                PgPathExpr::Union { left, right } => {
                    union_terms(*left, out);
                    union_terms(*right, out);
                }
                other => {
                    out.insert(other);
                }
            }
        }
        let mut got = BTreeSet::new();
        union_terms(edge_type_to_path(&t, true), &mut got);
        assert_eq!(got, terms.into_iter().collect());
    }

    #[test]
    fn negated_path_finds_bad_edges() {
        let g = fixtures::media_graph();
        let t = EdgeType::et(ContentType::field("email", ValueType::Str).opened(), Labels::Wildcard, ContentType::any());
        let bad = edge_type_to_path(&t, true);
        // u4 has no email
        let from_u4 = eval_pg_path(&g, &Focus::node("u4"), &bad).unwrap();
        assert_eq!(from_u4, BTreeSet::from([Focus::node("a2")]));
        assert!(eval_pg_path(&g, &Focus::node("u1"), &bad).unwrap().is_empty());
    }

    #[test]
    fn graph_types() {
        let g = fixtures::media_graph();
        let loose = GraphType::loose(fixtures::pg_c1_c5().rules);
        assert!(validate_graph_type(&g, &loose).unwrap().valid);
        let strict = GraphType {
            node_types: vec![ContentType::field("card", ValueType::Int).both(ContentType::field("privileged", ValueType::Bool))],
            edge_types: vec![EdgeType::trivial()],
            constraints: vec![],
        };
        let r = validate_graph_type(&g, &strict).unwrap();
        assert!(!r.valid);
        assert_eq!(r.node_violations.len(), 4);
        let empty = GraphType {
            node_types: vec![],
            edge_types: vec![],
            constraints: vec![],
        };
        assert!(validate_graph_type(&CommonGraph::empty(), &empty).unwrap().valid);
    }

    #[test]
    fn labels_json() {
        let t: EdgeType = serde_json::from_str(
            r#"{"op":"et","src":{"op":"any"},"labels":"*","dst":{"op":"any"}}"#,
        )
        .unwrap();
        assert_eq!(t, EdgeType::trivial());
        let s: Labels = serde_json::from_str(r#"["p","q"]"#).unwrap();
        assert_eq!(s, Labels::set(["p", "q"]));
        assert_eq!(serde_json::to_string(&Labels::Wildcard).unwrap(), r#""*""#);
    }
}
