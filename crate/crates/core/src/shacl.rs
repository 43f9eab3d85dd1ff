//! SHACL core: path expressions, shapes, selectors and validation.
//!
//! Path expressions are evaluated as images of a focus. The relation of a path
//! only ever links elements of the graph, so restricting evaluation to the
//! active domain plus the focus itself loses nothing.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{CommonGraph, Focus, Name, TypeRegistry, Value, ValueType};
use crate::report::{compact_json, run_rules, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathExpr {
    Id,
    Step {
        q: Name,
    },
    #[serde(rename = "inv")]
    Inverse {
        path: Box<PathExpr>,
    },
    Concat {
        left: Box<PathExpr>,
        right: Box<PathExpr>,
    },
    Union {
        left: Box<PathExpr>,
        right: Box<PathExpr>,
    },
    Star {
        path: Box<PathExpr>,
    },
}

impl PathExpr {
    pub fn step(q: impl Into<String>) -> Self {
        PathExpr::Step { q: Name::new(q) }
    }

    pub fn inv(self) -> Self {
        PathExpr::Inverse { path: Box::new(self) }
    }

    pub fn concat(self, right: PathExpr) -> Self {
        PathExpr::Concat {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn union(self, right: PathExpr) -> Self {
        PathExpr::Union {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn star(self) -> Self {
        PathExpr::Star { path: Box::new(self) }
    }

    pub fn depth(&self) -> usize {
        match self {
            PathExpr::Id | PathExpr::Step { .. } => 1,
            PathExpr::Inverse { path } | PathExpr::Star { path } => 1 + path.depth(),
            PathExpr::Concat { left, right } | PathExpr::Union { left, right } => {
                1 + left.depth().max(right.depth())
            }
        }
    }

    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            PathExpr::Id => {}
            PathExpr::Step { q } => {
                out.insert(q.clone());
            }
            PathExpr::Inverse { path } | PathExpr::Star { path } => path.collect_names(out),
            PathExpr::Concat { left, right } | PathExpr::Union { left, right } => {
                left.collect_names(out);
                right.collect_names(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", from = "ShapeDoc")]
pub enum ShaclShape {
    Top,
    TestConst {
        c: Value,
    },
    TestType {
        t: ValueType,
    },
    Closed {
        q: BTreeSet<Name>,
    },
    Eq {
        path: PathExpr,
        p: Name,
    },
    Disj {
        path: PathExpr,
        p: Name,
    },
    Not {
        shape: Box<ShaclShape>,
    },
    And {
        left: Box<ShaclShape>,
        right: Box<ShaclShape>,
    },
    Or {
        left: Box<ShaclShape>,
        right: Box<ShaclShape>,
    },
    #[serde(rename = "geq")]
    GeqCount {
        n: usize,
        path: PathExpr,
        shape: Box<ShaclShape>,
    },
    #[serde(rename = "leq")]
    LeqCount {
        n: usize,
        path: PathExpr,
        shape: Box<ShaclShape>,
    },
}

fn top() -> Box<ShaclShape> {
    Box::new(ShaclShape::Top)
}

/// Input form of shapes: the core grammar plus the usual abbreviations.
#[derive(Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
enum ShapeDoc {
    Top {},
    TestConst {
        c: Value,
    },
    TestType {
        t: ValueType,
    },
    Closed {
        q: BTreeSet<Name>,
    },
    Eq {
        path: PathExpr,
        p: Name,
    },
    Disj {
        path: PathExpr,
        p: Name,
    },
    Not {
        shape: Box<ShaclShape>,
    },
    And {
        left: Box<ShaclShape>,
        right: Box<ShaclShape>,
    },
    Or {
        left: Box<ShaclShape>,
        right: Box<ShaclShape>,
    },
    Geq {
        n: usize,
        path: PathExpr,
        #[serde(default = "top")]
        shape: Box<ShaclShape>,
    },
    Leq {
        n: usize,
        path: PathExpr,
        #[serde(default = "top")]
        shape: Box<ShaclShape>,
    },
    Exists {
        path: PathExpr,
    },
    Forall {
        path: PathExpr,
        shape: Box<ShaclShape>,
    },
    Exactly {
        n: usize,
        path: PathExpr,
        #[serde(default = "top")]
        shape: Box<ShaclShape>,
    },
}

impl From<ShapeDoc> for ShaclShape {
    fn from(d: ShapeDoc) -> Self {
        match d {
            ShapeDoc::Top {} => ShaclShape::Top,
            ShapeDoc::TestConst { c } => ShaclShape::TestConst { c },
            ShapeDoc::TestType { t } => ShaclShape::TestType { t },
            ShapeDoc::Closed { q } => ShaclShape::Closed { q },
            ShapeDoc::Eq { path, p } => ShaclShape::Eq { path, p },
            ShapeDoc::Disj { path, p } => ShaclShape::Disj { path, p },
            ShapeDoc::Not { shape } => ShaclShape::Not { shape },
            ShapeDoc::And { left, right } => ShaclShape::And { left, right },
            ShapeDoc::Or { left, right } => ShaclShape::Or { left, right },
            ShapeDoc::Geq { n, path, shape } => ShaclShape::GeqCount { n, path, shape },
            ShapeDoc::Leq { n, path, shape } => ShaclShape::LeqCount { n, path, shape },
            ShapeDoc::Exists { path } => ShaclShape::exists(path),
            ShapeDoc::Forall { path, shape } => ShaclShape::forall(path, *shape),
            ShapeDoc::Exactly { n, path, shape } => ShaclShape::exactly(n, path, *shape),
        }
    }
}

impl ShaclShape {
    pub fn test_const(c: impl Into<Value>) -> Self {
        ShaclShape::TestConst { c: c.into() }
    }

    pub fn test_type(t: ValueType) -> Self {
        ShaclShape::TestType { t }
    }

    pub fn closed<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ShaclShape::Closed {
            q: names.into_iter().map(Name::new).collect(),
        }
    }

    pub fn not(self) -> Self {
        ShaclShape::Not { shape: Box::new(self) }
    }

    pub fn and(self, right: ShaclShape) -> Self {
        ShaclShape::And {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn or(self, right: ShaclShape) -> Self {
        ShaclShape::Or {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    /// Left-nested conjunction; the empty conjunction is `Top`.
    pub fn and_all(shapes: impl IntoIterator<Item = ShaclShape>) -> Self {
        shapes
            .into_iter()
            .reduce(|a, b| a.and(b))
            .unwrap_or(ShaclShape::Top)
    }

    /// Left-nested disjunction; the empty disjunction is `¬⊤`.
    pub fn or_any(shapes: impl IntoIterator<Item = ShaclShape>) -> Self {
        shapes
            .into_iter()
            .reduce(|a, b| a.or(b))
            .unwrap_or_else(|| ShaclShape::Top.not())
    }

    pub fn geq(n: usize, path: PathExpr, shape: ShaclShape) -> Self {
        ShaclShape::GeqCount {
            n,
            path,
            shape: Box::new(shape),
        }
    }

    pub fn leq(n: usize, path: PathExpr, shape: ShaclShape) -> Self {
        ShaclShape::LeqCount {
            n,
            path,
            shape: Box::new(shape),
        }
    }

    /// `∃π.⊤`
    pub fn exists(path: PathExpr) -> Self {
        Self::geq(1, path, ShaclShape::Top)
    }

    /// `∀π.φ`, i.e. `≤0 π.¬φ`
    pub fn forall(path: PathExpr, shape: ShaclShape) -> Self {
        Self::leq(0, path, shape.not())
    }

    /// `=n π.φ`
    pub fn exactly(n: usize, path: PathExpr, shape: ShaclShape) -> Self {
        Self::leq(n, path.clone(), shape.clone()).and(Self::geq(n, path, shape))
    }

    pub fn size(&self) -> usize {
        match self {
            ShaclShape::Top
            | ShaclShape::TestConst { .. }
            | ShaclShape::TestType { .. }
            | ShaclShape::Closed { .. }
            | ShaclShape::Eq { .. }
            | ShaclShape::Disj { .. } => 1,
            ShaclShape::Not { shape } => 1 + shape.size(),
            ShaclShape::And { left, right } | ShaclShape::Or { left, right } => {
                1 + left.size() + right.size()
            }
            ShaclShape::GeqCount { shape, .. } | ShaclShape::LeqCount { shape, .. } => {
                1 + shape.size()
            }
        }
    }

    fn collect(&self, names: &mut BTreeSet<Name>, consts: &mut BTreeSet<Value>, types: &mut BTreeSet<ValueType>) {
        match self {
            ShaclShape::Top => {}
            ShaclShape::TestConst { c } => {
                consts.insert(c.clone());
            }
            ShaclShape::TestType { t } => {
                types.insert(t.clone());
            }
            ShaclShape::Closed { q } => names.extend(q.iter().cloned()),
            ShaclShape::Eq { path, p } | ShaclShape::Disj { path, p } => {
                path.collect_names(names);
                names.insert(p.clone());
            }
            ShaclShape::Not { shape } => shape.collect(names, consts, types),
            ShaclShape::And { left, right } | ShaclShape::Or { left, right } => {
                left.collect(names, consts, types);
                right.collect(names, consts, types);
            }
            ShaclShape::GeqCount { path, shape, .. } | ShaclShape::LeqCount { path, shape, .. } => {
                path.collect_names(names);
                shape.collect(names, consts, types);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShaclSelector {
    ExistsOut { q: Name },
    ExistsIn { q: Name },
    TestConst { c: Value },
}

impl ShaclSelector {
    pub fn out(q: impl Into<String>) -> Self {
        ShaclSelector::ExistsOut { q: Name::new(q) }
    }

    pub fn inc(q: impl Into<String>) -> Self {
        ShaclSelector::ExistsIn { q: Name::new(q) }
    }

    /// The selector read as an ordinary shape.
    pub fn to_shape(&self) -> ShaclShape {
        match self {
            ShaclSelector::ExistsOut { q } => ShaclShape::exists(PathExpr::Step { q: q.clone() }),
            ShaclSelector::ExistsIn { q } => {
                ShaclShape::exists(PathExpr::Step { q: q.clone() }.inv())
            }
            ShaclSelector::TestConst { c } => ShaclShape::TestConst { c: c.clone() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShaclRule {
    pub sel: ShaclSelector,
    pub shape: ShaclShape,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShaclSchema {
    pub rules: Vec<ShaclRule>,
}

impl ShaclSchema {
    pub fn new(rules: Vec<ShaclRule>) -> Self {
        ShaclSchema { rules }
    }

    /// Value types mentioned anywhere in the schema.
    pub fn value_types(&self) -> BTreeSet<ValueType> {
        let (mut n, mut c, mut t) = (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
        for r in &self.rules {
            r.shape.collect(&mut n, &mut c, &mut t);
        }
        t
    }

    /// Value constants mentioned anywhere in the schema, selectors included.
    pub fn constants(&self) -> BTreeSet<Value> {
        let (mut n, mut c, mut t) = (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
        for r in &self.rules {
            r.shape.collect(&mut n, &mut c, &mut t);
            if let ShaclSelector::TestConst { c: k } = &r.sel {
                c.insert(k.clone());
            }
        }
        c
    }
}

/// Evaluator bound to one graph and one type registry.
pub struct Shacl<'a> {
    g: &'a CommonGraph,
    types: &'a TypeRegistry,
}

static BUILTINS: std::sync::OnceLock<TypeRegistry> = std::sync::OnceLock::new();

pub(crate) fn builtins() -> &'static TypeRegistry {
    BUILTINS.get_or_init(TypeRegistry::new)
}

impl<'a> Shacl<'a> {
    pub fn new(g: &'a CommonGraph) -> Self {
        Shacl { g, types: builtins() }
    }

    pub fn with_types(g: &'a CommonGraph, types: &'a TypeRegistry) -> Self {
        Shacl { g, types }
    }

    pub fn image(&self, from: &BTreeSet<Focus>, path: &PathExpr) -> BTreeSet<Focus> {
        self.image_dir(from, path, false)
    }

    fn image_dir(&self, from: &BTreeSet<Focus>, path: &PathExpr, inverted: bool) -> BTreeSet<Focus> {
        match path {
            PathExpr::Id => from.clone(),
            PathExpr::Step { q } => {
                let mut out = BTreeSet::new();
                for x in from {
                    let arcs = if inverted { self.g.in_arcs(x) } else { self.g.out_arcs(x) };
                    out.extend(arcs.iter().filter(|a| &a.name == q).map(|a| a.other.clone()));
                }
                out
            }
            PathExpr::Inverse { path } => self.image_dir(from, path, !inverted),
            PathExpr::Concat { left, right } => {
                if inverted {
                    let mid = self.image_dir(from, right, true);
                    self.image_dir(&mid, left, true)
                } else {
                    let mid = self.image_dir(from, left, false);
                    self.image_dir(&mid, right, false)
                }
            }
            PathExpr::Union { left, right } => {
                let mut out = self.image_dir(from, left, inverted);
                out.extend(self.image_dir(from, right, inverted));
                out
            }
            PathExpr::Star { path } => {
                let mut seen = from.clone();
                let mut frontier = from.clone();
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

    pub fn eval_path(&self, v: &Focus, path: &PathExpr) -> BTreeSet<Focus> {
        self.image(&BTreeSet::from([v.clone()]), path)
    }

    pub fn satisfies(&self, v: &Focus, shape: &ShaclShape) -> bool {
        match shape {
            ShaclShape::Top => true,
            ShaclShape::TestConst { c } => matches!(v, Focus::Val(w) if w == c),
            ShaclShape::TestType { t } => matches!(v, Focus::Val(w) if self.types.holds(w, t)),
            ShaclShape::Closed { q } => self.g.out_arcs(v).iter().all(|a| q.contains(&a.name)),
            ShaclShape::Eq { path, p } => {
                self.eval_path(v, path) == self.eval_path(v, &PathExpr::Step { q: p.clone() })
            }
            ShaclShape::Disj { path, p } => {
                let rhs = self.eval_path(v, &PathExpr::Step { q: p.clone() });
                self.eval_path(v, path).is_disjoint(&rhs)
            }
            ShaclShape::Not { shape } => !self.satisfies(v, shape),
            ShaclShape::And { left, right } => self.satisfies(v, left) && self.satisfies(v, right),
            ShaclShape::Or { left, right } => self.satisfies(v, left) || self.satisfies(v, right),
            ShaclShape::GeqCount { n, path, shape } => {
                if *n == 0 {
                    return true;
                }
                let mut count = 0;
                for u in self.eval_path(v, path) {
                    if self.satisfies(&u, shape) {
                        count += 1;
                        if count >= *n {
                            return true;
                        }
                    }
                }
                false
            }
            ShaclShape::LeqCount { n, path, shape } => {
                let mut count = 0;
                for u in self.eval_path(v, path) {
                    if self.satisfies(&u, shape) {
                        count += 1;
                        if count > *n {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    pub fn select(&self, sel: &ShaclSelector) -> BTreeSet<Focus> {
        match sel {
            ShaclSelector::ExistsOut { q } => self
                .g
                .sources()
                .filter(|(_, arcs)| arcs.iter().any(|a| &a.name == q))
                .map(|(f, _)| f.clone())
                .collect(),
            ShaclSelector::ExistsIn { q } => self
                .g
                .targets()
                .filter(|(_, arcs)| arcs.iter().any(|a| &a.name == q))
                .map(|(f, _)| f.clone())
                .collect(),
            ShaclSelector::TestConst { c } => BTreeSet::from([Focus::Val(c.clone())]),
        }
    }

    pub fn validate(&self, s: &ShaclSchema) -> ValidationReport {
        let r: Result<_, std::convert::Infallible> = run_rules(
            &s.rules,
            |r| Ok(self.select(&r.sel)),
            |r, f| Ok(self.satisfies(f, &r.shape)),
            |r| (compact_json(&r.sel), compact_json(&r.shape)),
        );
        match r {
            Ok(report) => report,
            Err(never) => match never {},
        }
    }
}

pub fn eval_path(g: &CommonGraph, v: &Focus, path: &PathExpr) -> BTreeSet<Focus> {
    Shacl::new(g).eval_path(v, path)
}

pub fn shacl_satisfies(g: &CommonGraph, v: &Focus, shape: &ShaclShape) -> bool {
    Shacl::new(g).satisfies(v, shape)
}

pub fn shacl_select(g: &CommonGraph, sel: &ShaclSelector) -> BTreeSet<Focus> {
    Shacl::new(g).select(sel)
}

pub fn shacl_validate(g: &CommonGraph, s: &ShaclSchema) -> ValidationReport {
    Shacl::new(g).validate(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{EdgeTriple, PropTriple};
    use proptest::prelude::*;

    fn chain() -> CommonGraph {
        CommonGraph::build(
            vec![EdgeTriple::new("a", "p", "b"), EdgeTriple::new("b", "p", "c")],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn step_and_id() {
        let g = fixtures::media_graph();
        assert_eq!(
            eval_path(&g, &Focus::node("u3"), &PathExpr::step("invited")),
            BTreeSet::from([Focus::node("u2")])
        );
        let fresh = Focus::val(99);
        assert_eq!(eval_path(&g, &fresh, &PathExpr::Id), BTreeSet::from([fresh.clone()]));
    }

    #[test]
    fn star_closure_on_chain() {
        let got = eval_path(&chain(), &Focus::node("a"), &PathExpr::step("p").star());
        assert_eq!(
            got,
            BTreeSet::from([Focus::node("a"), Focus::node("b"), Focus::node("c")])
        );
        let back = eval_path(&chain(), &Focus::node("c"), &PathExpr::step("p").star().inv());
        assert_eq!(back.len(), 3);
    }

    #[test]
    fn inverse_of_concat() {
        let g = chain();
        let pp = PathExpr::step("p").concat(PathExpr::step("p"));
        assert_eq!(eval_path(&g, &Focus::node("c"), &pp.inv()), BTreeSet::from([Focus::node("a")]));
    }

    #[test]
    fn eq_compares_images() {
        let g = CommonGraph::build(vec![EdgeTriple::new("u", "ownsAccount", "a")], vec![]).unwrap();
        let shape = ShaclShape::Eq {
            path: PathExpr::step("hasAccess").union(PathExpr::step("ownsAccount")),
            p: Name::from("hasAccess"),
        };
        assert!(!shacl_satisfies(&g, &Focus::node("u"), &shape));
        let eq_id = ShaclShape::Eq { path: PathExpr::Id, p: Name::from("p") };
        assert!(!shacl_satisfies(&g, &Focus::node("u"), &eq_id));
    }

    #[test]
    fn top_and_counting() {
        let g = CommonGraph::build(
            vec![],
            vec![PropTriple::new("u1", "email", "x"), PropTriple::new("u2", "email", "x")],
        )
        .unwrap();
        assert!(shacl_satisfies(&g, &Focus::node("zzz"), &ShaclShape::Top));
        let c3 = ShaclShape::leq(1, PathExpr::step("email").inv(), ShaclShape::Top);
        assert!(!shacl_satisfies(&g, &Focus::val("x"), &c3));
    }

    #[test]
    fn closed_ignores_incoming() {
        let g = chain();
        let shape = ShaclShape::closed(["p"]);
        assert!(shacl_satisfies(&g, &Focus::node("b"), &shape));
        assert!(shacl_satisfies(&g, &Focus::node("c"), &ShaclShape::closed(Vec::<String>::new())));
        assert!(!shacl_satisfies(&g, &Focus::node("a"), &ShaclShape::closed(["q"])));
    }

    #[test]
    fn selectors() {
        let g = fixtures::media_graph();
        assert_eq!(
            shacl_select(&g, &ShaclSelector::inc("card")),
            BTreeSet::from([Focus::val(1234), Focus::val(5678)])
        );
        let e = CommonGraph::empty();
        assert!(shacl_select(&e, &ShaclSelector::out("p")).is_empty());
        assert_eq!(
            shacl_select(&e, &ShaclSelector::TestConst { c: Value::Int(7) }),
            BTreeSet::from([Focus::val(7)])
        );
    }

    #[test]
    fn media_is_valid() {
        let g = fixtures::media_graph();
        let r = shacl_validate(&g, &fixtures::shacl_c1_c5());
        assert!(r.valid, "{r:?}");
        assert!(shacl_validate(&g, &ShaclSchema::default()).valid);
    }

    #[test]
    fn card_as_string_violates_c1() {
        let g = fixtures::mutation(fixtures::Mutation::CardAsString);
        let r = shacl_validate(&g, &fixtures::shacl_c1_c5());
        assert_eq!(r.failed_rules(), BTreeSet::from([0]));
        assert_eq!(r.violating(0), BTreeSet::from([Focus::val("oops")]));
    }

    #[test]
    fn json_sugar() {
        let s: ShaclShape = serde_json::from_str(
            r#"{"op":"forall","path":{"op":"inv","path":{"op":"step","q":"hasAccess"}},
                "shape":{"op":"exists","path":{"op":"step","q":"privileged"}}}"#,
        )
        .unwrap();
        assert_eq!(
            s,
            ShaclShape::forall(
                PathExpr::step("hasAccess").inv(),
                ShaclShape::exists(PathExpr::step("privileged"))
            )
        );
        let text = serde_json::to_string(&s).unwrap();
        let back: ShaclShape = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<ShaclShape>(r#"{"op":"top","x":1}"#).is_err());
    }

    fn arb_path() -> impl Strategy<Value = PathExpr> {
        let leaf = prop_oneof![
            Just(PathExpr::Id),
            (0..2u8).prop_map(|i| PathExpr::step(format!("p{i}"))),
            Just(PathExpr::step("k0")),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(PathExpr::inv),
                inner.clone().prop_map(PathExpr::star),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.concat(b)),
                (inner.clone(), inner).prop_map(|(a, b)| a.union(b)),
            ]
        })
    }

    fn arb_shape() -> impl Strategy<Value = ShaclShape> {
        let leaf = prop_oneof![
            Just(ShaclShape::Top),
            (0..3i64).prop_map(ShaclShape::test_const),
            Just(ShaclShape::test_type(ValueType::Int)),
            Just(ShaclShape::closed(["p0"])),
            arb_path().prop_map(|path| ShaclShape::Eq { path, p: Name::from("p1") }),
        ];
        leaf.prop_recursive(3, 10, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(ShaclShape::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                (0..3usize, arb_path(), inner.clone()).prop_map(|(n, p, s)| ShaclShape::geq(n, p, s)),
                (0..3usize, arb_path(), inner).prop_map(|(n, p, s)| ShaclShape::leq(n, p, s)),
            ]
        })
    }

    fn arb_graph() -> impl Strategy<Value = CommonGraph> {
        let node = (0..4u8).prop_map(|i| format!("n{i}"));
        let edges = proptest::collection::vec((node.clone(), 0..2u8, node.clone()), 0..8);
        let props = proptest::collection::btree_map(node, 0..3i64, 0..3);
        (edges, props).prop_map(|(es, ps)| {
            CommonGraph::build(
                es.into_iter().map(|(s, p, o)| EdgeTriple::new(s, format!("p{p}"), o)),
                ps.into_iter().map(|(n, v)| PropTriple::new(n, "k0", v)),
            )
            .unwrap()
        })
    }

    fn foci(g: &CommonGraph) -> Vec<Focus> {
        let mut all: Vec<Focus> = g.elements().into_iter().collect();
        all.push(Focus::node("outside"));
        all.push(Focus::val(2));
        all
    }

    proptest! {
        #[test]
        fn image_stays_in_domain(g in arb_graph(), path in arb_path()) {
            let sh = Shacl::new(&g);
            let domain = g.elements();
            for v in foci(&g) {
                for u in sh.eval_path(&v, &path) {
                    prop_assert!(u == v || domain.contains(&u));
                }
            }
        }

        #[test]
        fn union_is_pointwise(g in arb_graph(), a in arb_path(), b in arb_path()) {
            let sh = Shacl::new(&g);
            for v in foci(&g) {
                let mut both = sh.eval_path(&v, &a);
                both.extend(sh.eval_path(&v, &b));
                prop_assert_eq!(sh.eval_path(&v, &a.clone().union(b.clone())), both);
            }
        }

        #[test]
        fn star_is_least_closed_set(g in arb_graph(), a in arb_path()) {
            let sh = Shacl::new(&g);
            for v in foci(&g) {
                let s = sh.eval_path(&v, &a.clone().star());
                prop_assert!(s.contains(&v));
                prop_assert!(sh.image(&s, &a).is_subset(&s));
            }
        }

        #[test]
        fn de_morgan(g in arb_graph(), a in arb_shape(), b in arb_shape()) {
            let sh = Shacl::new(&g);
            let lhs = a.clone().and(b.clone()).not();
            let rhs = a.not().or(b.not());
            for v in foci(&g) {
                prop_assert_eq!(sh.satisfies(&v, &lhs), sh.satisfies(&v, &rhs));
            }
        }

        #[test]
        fn counting_duality(g in arb_graph(), n in 0..3usize, p in arb_path(), s in arb_shape()) {
            let sh = Shacl::new(&g);
            let leq = ShaclShape::leq(n, p.clone(), s.clone());
            let ngeq = ShaclShape::geq(n + 1, p.clone(), s.clone()).not();
            let zero = ShaclShape::geq(0, p, s);
            for v in foci(&g) {
                prop_assert_eq!(sh.satisfies(&v, &leq), sh.satisfies(&v, &ngeq));
                prop_assert!(sh.satisfies(&v, &zero));
            }
        }

        #[test]
        fn selector_matches_its_shape(g in arb_graph(), q in 0..3u8) {
            let name = if q == 2 { "k0".to_string() } else { format!("p{q}") };
            let sh = Shacl::new(&g);
            for sel in [ShaclSelector::out(name.clone()), ShaclSelector::inc(name.clone())] {
                let shape = sel.to_shape();
                let expected: BTreeSet<Focus> =
                    g.elements().into_iter().filter(|f| sh.satisfies(f, &shape)).collect();
                prop_assert_eq!(sh.select(&sel), expected);
            }
        }
    }
}
