//! PG-Schema core: content types, PG-path expressions, PG-shapes and
//! validation, plus edge types and graph types.

pub mod content;
pub mod edge;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CommonGraph, Focus, Name, TypeRegistry, Value, ValueType};
use crate::report::{compact_json, run_rules, ValidationReport};
use crate::shacl::builtins;

pub use content::{content_dnf, content_member, ContentType, Disjunct};
pub use edge::{
    edge_type_member, edge_type_to_path, normalize_edge_type, validate_graph_type, EdgeType, GraphType,
    GraphTypeReport, Labels, PrimLabel, PrimitiveEdgeType,
};

/// Endpoint sort of a PG-path expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sort {
    Node,
    Value,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Node => write!(f, "node"),
            Sort::Value => write!(f, "value"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgError {
    #[error("ill-sorted path {path}: {reason}")]
    IllSorted { path: String, reason: String },
    #[error("focus {focus} is a {found} but the expression starts at a {expected}")]
    SortMismatch { focus: Focus, expected: Sort, found: Sort },
}

/// Sub-identity tests on nodes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PgFilter {
    KeyIsVal { k: Name, c: Value },
    NotKeyIsVal { k: Name, c: Value },
    OfType { t: ContentType },
    NotOfType { t: ContentType },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum PgPathExpr {
    Filter { test: PgFilter },
    Pred { p: Name },
    /// `¬P`: any edge whose label is outside `ps`.
    NotPreds { ps: BTreeSet<Name> },
    Inv { path: Box<PgPathExpr> },
    Concat { left: Box<PgPathExpr>, right: Box<PgPathExpr> },
    Union { left: Box<PgPathExpr>, right: Box<PgPathExpr> },
    Star { path: Box<PgPathExpr> },
    /// `k`, from a node to its value.
    KeyStep { k: Name },
    /// `k⁻`, from a value to the nodes holding it.
    InvKeyStep { k: Name },
}

impl PgPathExpr {
    pub fn filter(test: PgFilter) -> Self {
        PgPathExpr::Filter { test }
    }

    pub fn of_type(t: ContentType) -> Self {
        PgPathExpr::filter(PgFilter::OfType { t })
    }

    pub fn not_of_type(t: ContentType) -> Self {
        PgPathExpr::filter(PgFilter::NotOfType { t })
    }

    pub fn key_is_val(k: impl Into<String>, c: impl Into<Value>) -> Self {
        PgPathExpr::filter(PgFilter::KeyIsVal { k: Name::new(k), c: c.into() })
    }

    pub fn not_key_is_val(k: impl Into<String>, c: impl Into<Value>) -> Self {
        PgPathExpr::filter(PgFilter::NotKeyIsVal { k: Name::new(k), c: c.into() })
    }

    /// The trivial filter `⊤`.
    pub fn top() -> Self {
        PgPathExpr::of_type(ContentType::any())
    }

    /// `¬⊤`, the empty relation.
    pub fn bottom() -> Self {
        PgPathExpr::not_of_type(ContentType::any())
    }

    pub fn pred(p: impl Into<String>) -> Self {
        PgPathExpr::Pred { p: Name::new(p) }
    }

    pub fn not_preds<I: IntoIterator<Item = S>, S: Into<String>>(ps: I) -> Self {
        PgPathExpr::NotPreds {
            ps: ps.into_iter().map(Name::new).collect(),
        }
    }

    pub fn key(k: impl Into<String>) -> Self {
        PgPathExpr::KeyStep { k: Name::new(k) }
    }

    pub fn inv_key(k: impl Into<String>) -> Self {
        PgPathExpr::InvKeyStep { k: Name::new(k) }
    }

    pub fn inv(self) -> Self {
        PgPathExpr::Inv { path: Box::new(self) }
    }

    pub fn concat(self, right: PgPathExpr) -> Self {
        PgPathExpr::Concat {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn union(self, right: PgPathExpr) -> Self {
        PgPathExpr::Union {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn star(self) -> Self {
        PgPathExpr::Star { path: Box::new(self) }
    }

    /// Source and target sorts, or why the expression is ill-sorted.
    pub fn sorts(&self) -> Result<(Sort, Sort), PgError> {
        let bad = |reason: &str| PgError::IllSorted {
            path: compact_json(self),
            reason: reason.to_string(),
        };
        let node_only = |p: &PgPathExpr, what: &str| -> Result<(), PgError> {
            match p.sorts()? {
                (Sort::Node, Sort::Node) => Ok(()),
                _ => Err(bad(&format!("{what} applies to node-to-node expressions only"))),
            }
        };
        match self {
            PgPathExpr::Filter { .. } | PgPathExpr::Pred { .. } | PgPathExpr::NotPreds { .. } => {
                Ok((Sort::Node, Sort::Node))
            }
            PgPathExpr::KeyStep { .. } => Ok((Sort::Node, Sort::Value)),
            PgPathExpr::InvKeyStep { .. } => Ok((Sort::Value, Sort::Node)),
            PgPathExpr::Inv { path } => node_only(path, "inversion").map(|_| (Sort::Node, Sort::Node)),
            PgPathExpr::Star { path } => node_only(path, "star").map(|_| (Sort::Node, Sort::Node)),
            PgPathExpr::Union { left, right } => {
                node_only(left, "union")?;
                node_only(right, "union")?;
                Ok((Sort::Node, Sort::Node))
            }
            PgPathExpr::Concat { left, right } => {
                let (a, b) = left.sorts()?;
                let (c, d) = right.sorts()?;
                if b != Sort::Node || c != Sort::Node {
                    return Err(bad("key steps may only occur at the ends of a path"));
                }
                Ok((a, d))
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            PgPathExpr::Inv { path } | PgPathExpr::Star { path } => 1 + path.size(),
            PgPathExpr::Concat { left, right } | PgPathExpr::Union { left, right } => {
                1 + left.size() + right.size()
            }
            _ => 1,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            PgPathExpr::Inv { path } | PgPathExpr::Star { path } => 1 + path.depth(),
            PgPathExpr::Concat { left, right } | PgPathExpr::Union { left, right } => {
                1 + left.depth().max(right.depth())
            }
            _ => 1,
        }
    }

    pub(crate) fn collect(&self, names: &mut BTreeSet<Name>, consts: &mut BTreeSet<Value>, types: &mut BTreeSet<ValueType>) {
        match self {
            PgPathExpr::Filter { test } => match test {
                PgFilter::KeyIsVal { k, c } | PgFilter::NotKeyIsVal { k, c } => {
                    names.insert(k.clone());
                    consts.insert(c.clone());
                }
                PgFilter::OfType { t } | PgFilter::NotOfType { t } => {
                    names.extend(t.keys());
                    types.extend(t.value_types());
                }
            },
            PgPathExpr::Pred { p } => {
                names.insert(p.clone());
            }
            PgPathExpr::NotPreds { ps } => names.extend(ps.iter().cloned()),
            PgPathExpr::KeyStep { k } | PgPathExpr::InvKeyStep { k } => {
                names.insert(k.clone());
            }
            PgPathExpr::Inv { path } | PgPathExpr::Star { path } => path.collect(names, consts, types),
            PgPathExpr::Concat { left, right } | PgPathExpr::Union { left, right } => {
                left.collect(names, consts, types);
                right.collect(names, consts, types);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum PgShape {
    Geq { n: usize, path: PgPathExpr },
    Leq { n: usize, path: PgPathExpr },
    And { left: Box<PgShape>, right: Box<PgShape> },
}

impl PgShape {
    pub fn exists(path: PgPathExpr) -> Self {
        PgShape::Geq { n: 1, path }
    }

    pub fn not_exists(path: PgPathExpr) -> Self {
        PgShape::Leq { n: 0, path }
    }

    pub fn geq(n: usize, path: PgPathExpr) -> Self {
        PgShape::Geq { n, path }
    }

    pub fn leq(n: usize, path: PgPathExpr) -> Self {
        PgShape::Leq { n, path }
    }

    pub fn and(self, right: PgShape) -> Self {
        PgShape::And {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    /// Conjuncts in left-to-right order.
    pub fn atoms(&self) -> Vec<&PgShape> {
        match self {
            PgShape::And { left, right } => {
                let mut v = left.atoms();
                v.extend(right.atoms());
                v
            }
            a => vec![a],
        }
    }

    /// Sort of the foci the shape applies to.
    pub fn source_sort(&self) -> Result<Sort, PgError> {
        match self {
            PgShape::Geq { path, .. } | PgShape::Leq { path, .. } => Ok(path.sorts()?.0),
            PgShape::And { left, right } => {
                let (a, b) = (left.source_sort()?, right.source_sort()?);
                if a != b {
                    return Err(PgError::IllSorted {
                        path: compact_json(self),
                        reason: format!("conjunction of a {a} shape and a {b} shape"),
                    });
                }
                Ok(a)
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            PgShape::Geq { path, .. } | PgShape::Leq { path, .. } => 1 + path.size(),
            PgShape::And { left, right } => 1 + left.size() + right.size(),
        }
    }

    pub(crate) fn collect(&self, names: &mut BTreeSet<Name>, consts: &mut BTreeSet<Value>, types: &mut BTreeSet<ValueType>) {
        match self {
            PgShape::Geq { path, .. } | PgShape::Leq { path, .. } => path.collect(names, consts, types),
            PgShape::And { left, right } => {
                left.collect(names, consts, types);
                right.collect(names, consts, types);
            }
        }
    }
}

/// `∃π`, written as the path alone.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PgSelector(pub PgPathExpr);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgRule {
    pub sel: PgSelector,
    pub shape: PgShape,
}

impl PgRule {
    pub fn new(sel: PgPathExpr, shape: PgShape) -> Self {
        PgRule {
            sel: PgSelector(sel),
            shape,
        }
    }

    pub fn check(&self) -> Result<Sort, PgError> {
        let s = self.sel.0.sorts()?.0;
        let t = self.shape.source_sort()?;
        if s != t {
            return Err(PgError::IllSorted {
                path: compact_json(self),
                reason: format!("selector picks {s}s but the shape applies to {t}s"),
            });
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgSchema {
    pub rules: Vec<PgRule>,
}

impl PgSchema {
    pub fn new(rules: Vec<PgRule>) -> Self {
        PgSchema { rules }
    }

    pub fn check(&self) -> Result<(), PgError> {
        self.rules.iter().try_for_each(|r| r.check().map(|_| ()))
    }

    fn collected(&self) -> (BTreeSet<Name>, BTreeSet<Value>, BTreeSet<ValueType>) {
        let (mut n, mut c, mut t) = (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
        for r in &self.rules {
            r.sel.0.collect(&mut n, &mut c, &mut t);
            r.shape.collect(&mut n, &mut c, &mut t);
        }
        (n, c, t)
    }

    pub fn names(&self) -> BTreeSet<Name> {
        self.collected().0
    }

    pub fn constants(&self) -> BTreeSet<Value> {
        self.collected().1
    }

    pub fn value_types(&self) -> BTreeSet<ValueType> {
        self.collected().2
    }
}

fn sort_of(f: &Focus) -> Sort {
    match f {
        Focus::Node(_) => Sort::Node,
        Focus::Val(_) => Sort::Value,
    }
}

/// Evaluator bound to one graph and one type registry.
pub struct Pg<'a> {
    g: &'a CommonGraph,
    types: &'a TypeRegistry,
}

impl<'a> Pg<'a> {
    pub fn new(g: &'a CommonGraph) -> Self {
        Pg { g, types: builtins() }
    }

    pub fn with_types(g: &'a CommonGraph, types: &'a TypeRegistry) -> Self {
        Pg { g, types }
    }

    pub fn filter_holds(&self, v: &Focus, test: &PgFilter) -> bool {
        let Focus::Node(n) = v else { return false };
        if !self.g.has_node(n) {
            return false;
        }
        match test {
            PgFilter::KeyIsVal { k, c } => self.g.prop(n, k) == Some(c),
            PgFilter::NotKeyIsVal { k, c } => self.g.prop(n, k) != Some(c),
            PgFilter::OfType { t } => content_member(&self.g.content(n), t, self.types),
            PgFilter::NotOfType { t } => !content_member(&self.g.content(n), t, self.types),
        }
    }

    /// Image of a set of foci; the path is assumed well sorted.
    pub fn image(&self, from: &BTreeSet<Focus>, path: &PgPathExpr) -> BTreeSet<Focus> {
        self.image_dir(from, path, false)
    }

    fn arcs(&self, x: &Focus, inverted: bool) -> &[crate::model::Adjacent] {
        if inverted {
            self.g.in_arcs(x)
        } else {
            self.g.out_arcs(x)
        }
    }

    fn image_dir(&self, from: &BTreeSet<Focus>, path: &PgPathExpr, inverted: bool) -> BTreeSet<Focus> {
        match path {
            PgPathExpr::Filter { test } => from.iter().filter(|f| self.filter_holds(f, test)).cloned().collect(),
            PgPathExpr::Pred { p } => self.edge_image(from, inverted, |q| q == p),
            PgPathExpr::NotPreds { ps } => self.edge_image(from, inverted, |q| !ps.contains(q)),
            PgPathExpr::KeyStep { k } => self.key_image(from, k, !inverted),
            PgPathExpr::InvKeyStep { k } => self.key_image(from, k, inverted),
            PgPathExpr::Inv { path } => self.image_dir(from, path, !inverted),
            PgPathExpr::Concat { left, right } => {
                let (a, b) = if inverted { (right, left) } else { (left, right) };
                let mid = self.image_dir(from, a, inverted);
                self.image_dir(&mid, b, inverted)
            }
            PgPathExpr::Union { left, right } => {
                let mut out = self.image_dir(from, left, inverted);
                out.extend(self.image_dir(from, right, inverted));
                out
            }
            PgPathExpr::Star { path } => {
                let start: BTreeSet<Focus> = from
                    .iter()
                    .filter(|f| matches!(f, Focus::Node(n) if self.g.has_node(n)))
                    .cloned()
                    .collect();
                let mut seen = start.clone();
                let mut frontier = start;
                while !frontier.is_empty() {
                    let next: BTreeSet<Focus> = self
                        .image_dir(&frontier, path, inverted)
                        .into_iter()
                        .filter(|f| !seen.contains(f))
                        .collect();
                    seen.extend(next.iter().cloned());
                    frontier = next;
                }
                seen
            }
        }
    }

    fn edge_image(&self, from: &BTreeSet<Focus>, inverted: bool, label_ok: impl Fn(&Name) -> bool) -> BTreeSet<Focus> {
        from.iter()
            .filter(|f| f.is_node())
            .flat_map(|x| self.arcs(x, inverted))
            .filter(|a| a.other.is_node() && label_ok(&a.name))
            .map(|a| a.other.clone())
            .collect()
    }

    /// Follows property triples named `k`, node to value when `forward`.
    fn key_image(&self, from: &BTreeSet<Focus>, k: &Name, forward: bool) -> BTreeSet<Focus> {
        from.iter()
            .filter(|f| f.is_node() == forward)
            .flat_map(|x| self.arcs(x, !forward))
            .filter(|a| &a.name == k && a.other.is_node() != forward)
            .map(|a| a.other.clone())
            .collect()
    }

    pub fn eval_path(&self, v: &Focus, path: &PgPathExpr) -> Result<BTreeSet<Focus>, PgError> {
        let (src, _) = path.sorts()?;
        if sort_of(v) != src {
            return Err(PgError::SortMismatch {
                focus: v.clone(),
                expected: src,
                found: sort_of(v),
            });
        }
        Ok(self.image(&BTreeSet::from([v.clone()]), path))
    }

    pub fn satisfies(&self, v: &Focus, shape: &PgShape) -> Result<bool, PgError> {
        let src = shape.source_sort()?;
        if sort_of(v) != src {
            return Err(PgError::SortMismatch {
                focus: v.clone(),
                expected: src,
                found: sort_of(v),
            });
        }
        Ok(self.sat(v, shape))
    }

    fn sat(&self, v: &Focus, shape: &PgShape) -> bool {
        let count = |path: &PgPathExpr| self.image(&BTreeSet::from([v.clone()]), path).len();
        match shape {
            PgShape::Geq { n, path } => *n == 0 || count(path) >= *n,
            PgShape::Leq { n, path } => count(path) <= *n,
            PgShape::And { left, right } => self.sat(v, left) && self.sat(v, right),
        }
    }

    /// Foci with at least one outgoing path; candidates are the graph
    /// elements of the selector's source sort.
    pub fn select(&self, sel: &PgSelector) -> Result<BTreeSet<Focus>, PgError> {
        let (src, _) = sel.0.sorts()?;
        let candidates: Vec<Focus> = match src {
            Sort::Node => self.g.nodes().iter().cloned().map(Focus::Node).collect(),
            Sort::Value => self.g.values().into_iter().map(Focus::Val).collect(),
        };
        Ok(candidates
            .into_iter()
            .filter(|f| !self.image(&BTreeSet::from([f.clone()]), &sel.0).is_empty())
            .collect())
    }

    pub fn validate(&self, s: &PgSchema) -> Result<ValidationReport, PgError> {
        s.check()?;
        run_rules(
            &s.rules,
            |r| self.select(&r.sel),
            |r, f| Ok(self.sat(f, &r.shape)),
            |r| (compact_json(&r.sel), compact_json(&r.shape)),
        )
    }
}

pub fn eval_pg_path(g: &CommonGraph, v: &Focus, path: &PgPathExpr) -> Result<BTreeSet<Focus>, PgError> {
    Pg::new(g).eval_path(v, path)
}

pub fn pg_satisfies(g: &CommonGraph, v: &Focus, shape: &PgShape) -> Result<bool, PgError> {
    Pg::new(g).satisfies(v, shape)
}

pub fn pg_select(g: &CommonGraph, sel: &PgSelector) -> Result<BTreeSet<Focus>, PgError> {
    Pg::new(g).select(sel)
}

pub fn pg_validate(g: &CommonGraph, s: &PgSchema) -> Result<ValidationReport, PgError> {
    Pg::new(g).validate(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{EdgeTriple, PropTriple};
    use proptest::prelude::*;

    #[test]
    fn key_step_reads_value() {
        let g = fixtures::media_graph();
        assert_eq!(
            eval_pg_path(&g, &Focus::node("u2"), &PgPathExpr::key("email")).unwrap(),
            BTreeSet::from([Focus::val("d@d.d")])
        );
        assert_eq!(
            eval_pg_path(&g, &Focus::val("d@d.d"), &PgPathExpr::inv_key("email")).unwrap(),
            BTreeSet::from([Focus::node("u2")])
        );
    }

    #[test]
    fn trivial_filter_keeps_node() {
        let g = fixtures::media_graph();
        let f = PgPathExpr::of_type(ContentType::empty().opened());
        assert_eq!(eval_pg_path(&g, &Focus::node("u1"), &f).unwrap(), BTreeSet::from([Focus::node("u1")]));
        assert!(eval_pg_path(&g, &Focus::node("ghost"), &PgPathExpr::top()).unwrap().is_empty());
    }

    #[test]
    fn star_of_any_edge() {
        let g = CommonGraph::build(vec![EdgeTriple::new("a", "p", "b"), EdgeTriple::new("b", "q", "c")], vec![])
            .unwrap();
        let got = eval_pg_path(&g, &Focus::node("a"), &PgPathExpr::not_preds(Vec::<String>::new()).star()).unwrap();
        assert_eq!(got, BTreeSet::from([Focus::node("a"), Focus::node("b"), Focus::node("c")]));
        let not_p = eval_pg_path(&g, &Focus::node("a"), &PgPathExpr::not_preds(["p"])).unwrap();
        assert!(not_p.is_empty());
    }

    #[test]
    fn not_preds_ignores_properties() {
        let g = CommonGraph::build(vec![], vec![PropTriple::new("a", "k", 1)]).unwrap();
        assert!(eval_pg_path(&g, &Focus::node("a"), &PgPathExpr::not_preds(Vec::<String>::new()))
            .unwrap()
            .is_empty());
        let back = PgPathExpr::not_preds(Vec::<String>::new()).inv();
        assert!(eval_pg_path(&g, &Focus::node("a"), &back).unwrap().is_empty());
    }

    #[test]
    fn sort_errors() {
        let g = fixtures::media_graph();
        let err = eval_pg_path(&g, &Focus::val(1234), &PgPathExpr::pred("hasAccess"));
        assert!(matches!(err, Err(PgError::SortMismatch { .. })));
        let bad = PgPathExpr::key("email").concat(PgPathExpr::pred("p"));
        assert!(matches!(bad.sorts(), Err(PgError::IllSorted { .. })));
        let star_key = PgPathExpr::key("email").star();
        assert!(star_key.sorts().is_err());
        let vv = PgPathExpr::inv_key("email").concat(PgPathExpr::key("card"));
        assert_eq!(vv.sorts().unwrap(), (Sort::Value, Sort::Value));
        let mixed = PgRule::new(PgPathExpr::key("email"), PgShape::exists(PgPathExpr::inv_key("email")));
        assert!(PgSchema::new(vec![mixed]).check().is_err());
    }

    #[test]
    fn media_is_valid() {
        let g = fixtures::media_graph();
        let r = pg_validate(&g, &fixtures::pg_c1_c5()).unwrap();
        assert!(r.valid, "{r:?}");
        assert!(pg_validate(&g, &PgSchema::default()).unwrap().valid);
    }

    #[test]
    fn phone_key_breaks_whitelist() {
        let g = CommonGraph::build(
            vec![EdgeTriple::new("u", "ownsAccount", "a")],
            vec![
                PropTriple::new("u", "email", "e"),
                PropTriple::new("u", "privileged", true),
                PropTriple::new("u", "phone", "123"),
                PropTriple::new("a", "card", 1),
                PropTriple::new("a", "privileged", false),
            ],
        )
        .unwrap();
        let r = pg_validate(&g, &fixtures::pg_whitelist()).unwrap();
        assert_eq!(r.violating(0), BTreeSet::from([Focus::node("u")]));
        assert!(r.violating(1).is_empty());
        // u4 carries only a privileged flag
        let media = pg_validate(&fixtures::media_graph(), &fixtures::pg_whitelist()).unwrap();
        assert_eq!(media.violating(0), BTreeSet::from([Focus::node("u4")]));
        assert!(media.violating(1).is_empty());
    }

    #[test]
    fn c4_flags_unprivileged_accessor() {
        let g = fixtures::mutation(fixtures::Mutation::UnprivilegedAccessor);
        let r = pg_validate(&g, &fixtures::pg_c1_c5()).unwrap();
        assert_eq!(r.failed_rules(), BTreeSet::from([3]));
        assert_eq!(r.violating(3), BTreeSet::from([Focus::node("a1")]));
    }

    #[test]
    fn json_round_trip() {
        let s = fixtures::pg_c1_c5();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains(r#""kind":"key_is_val""#));
        let back: PgSchema = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    fn arb_node_path() -> impl Strategy<Value = PgPathExpr> {
        let leaf = prop_oneof![
            prop_oneof![Just("p"), Just("q")].prop_map(PgPathExpr::pred),
            Just(PgPathExpr::not_preds(["p"])),
            Just(PgPathExpr::key_is_val("k", 1)),
            Just(PgPathExpr::top()),
        ];
        leaf.prop_recursive(3, 10, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(PgPathExpr::inv),
                inner.clone().prop_map(PgPathExpr::star),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.concat(b)),
                (inner.clone(), inner).prop_map(|(a, b)| a.union(b)),
            ]
        })
    }

    fn arb_graph() -> impl Strategy<Value = CommonGraph> {
        let edge = (0..4u8, prop_oneof![Just("p"), Just("q"), Just("r")], 0..4u8);
        let prop = (0..4u8, 1..3i64);
        (proptest::collection::vec(edge, 0..8), proptest::collection::btree_map(0..4u8, prop.prop_map(|x| x.1), 0..3))
            .prop_map(|(es, ps)| {
                CommonGraph::build(
                    es.into_iter().map(|(s, p, o)| EdgeTriple::new(format!("n{s}"), p, format!("n{o}"))),
                    ps.into_iter().map(|(n, v)| PropTriple::new(format!("n{n}"), "k", v)),
                )
                .unwrap()
            })
    }

    proptest! {
        #[test]
        fn filters_are_sub_identity(g in arb_graph(), n in 0..5u8) {
            let v = Focus::node(format!("n{n}"));
            for f in [PgPathExpr::top(), PgPathExpr::key_is_val("k", 1), PgPathExpr::not_key_is_val("k", 1)] {
                let img = eval_pg_path(&g, &v, &f).unwrap();
                prop_assert!(img.is_subset(&BTreeSet::from([v.clone()])));
            }
        }

        #[test]
        fn node_paths_stay_on_nodes(g in arb_graph(), p in arb_node_path(), n in 0..4u8) {
            let img = eval_pg_path(&g, &Focus::node(format!("n{n}")), &p).unwrap();
            prop_assert!(img.iter().all(Focus::is_node));
        }

        #[test]
        fn inverse_is_converse(g in arb_graph(), p in arb_node_path()) {
            let nodes: Vec<Focus> = g.nodes().iter().cloned().map(Focus::Node).collect();
            for a in &nodes {
                for b in &nodes {
                    let fwd = eval_pg_path(&g, a, &p).unwrap().contains(b);
                    let back = eval_pg_path(&g, b, &p.clone().inv()).unwrap().contains(a);
                    prop_assert_eq!(fwd, back);
                }
            }
        }
    }
}
