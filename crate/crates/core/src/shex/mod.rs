//! ShEx core: triple expressions over signed neighborhoods, shapes,
//! selectors and validation.

pub mod matcher;
pub mod sshex;

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CommonGraph, Direction, Focus, Name, TypeRegistry, Value, ValueType};
use crate::report::{compact_json, run_rules, ValidationReport};
use crate::shacl::builtins;

pub use matcher::LeafRef;
use matcher::{Compiler, Matcher, SignedArc};

/// Default bound on the signed neighborhood size handled by the matcher.
pub const DEFAULT_CAP: usize = 24;
/// Largest cap the bitmask representation supports.
pub const MAX_CAP: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShexError {
    #[error("neighborhood of {focus} has {size} signed triples, above the cap of {cap}")]
    NeighborhoodTooLarge { focus: Focus, size: usize, cap: usize },
    #[error("wildcards may only appear in the openness of a shape")]
    WildcardInExpression,
    #[error("expression is not normalized: {0}")]
    NotNormalized(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum TripleExpr {
    Eps,
    Tc {
        q: Name,
        dir: Direction,
        shape: Box<ShexShape>,
    },
    Seq {
        left: Box<TripleExpr>,
        right: Box<TripleExpr>,
    },
    Alt {
        left: Box<TripleExpr>,
        right: Box<TripleExpr>,
    },
    Star {
        expr: Box<TripleExpr>,
    },
    WildOut {
        excluded: BTreeSet<Name>,
    },
    WildIn {
        excluded: BTreeSet<Name>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Openness {
    HalfOpen { r: BTreeSet<Name> },
    Open { r: BTreeSet<Name>, q: BTreeSet<Name> },
}

impl Openness {
    pub fn half_open<I: IntoIterator<Item = S>, S: Into<String>>(r: I) -> Self {
        Openness::HalfOpen {
            r: r.into_iter().map(Name::new).collect(),
        }
    }

    pub fn open<I, J, S, T>(r: I, q: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        Openness::Open {
            r: r.into_iter().map(Name::new).collect(),
            q: q.into_iter().map(Name::new).collect(),
        }
    }

    /// The wildcard stars appended to a neighborhood expression.
    pub fn suffix(&self) -> TripleExpr {
        match self {
            Openness::HalfOpen { r } => TripleExpr::WildIn { excluded: r.clone() }.star(),
            Openness::Open { r, q } => TripleExpr::WildIn { excluded: r.clone() }
                .star()
                .then(TripleExpr::WildOut { excluded: q.clone() }.star()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ShexShape {
    TestConst {
        c: Value,
    },
    TestType {
        t: ValueType,
    },
    Neigh {
        expr: TripleExpr,
        #[serde(flatten)]
        openness: Openness,
    },
    And {
        left: Box<ShexShape>,
        right: Box<ShexShape>,
    },
    Or {
        left: Box<ShexShape>,
        right: Box<ShexShape>,
    },
    Not {
        shape: Box<ShexShape>,
    },
}

impl TripleExpr {
    pub fn tc(q: impl Into<String>, dir: Direction, shape: ShexShape) -> Self {
        TripleExpr::Tc {
            q: Name::new(q),
            dir,
            shape: Box::new(shape),
        }
    }

    /// `q.⌊⊤⌉`
    pub fn tc_any(q: impl Into<String>, dir: Direction) -> Self {
        Self::tc(q, dir, ShexShape::top())
    }

    pub fn then(self, right: TripleExpr) -> Self {
        TripleExpr::Seq {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn alt(self, right: TripleExpr) -> Self {
        TripleExpr::Alt {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn star(self) -> Self {
        TripleExpr::Star { expr: Box::new(self) }
    }

    pub fn has_wildcards(&self) -> bool {
        match self {
            TripleExpr::Eps | TripleExpr::Tc { .. } => false,
            TripleExpr::WildOut { .. } | TripleExpr::WildIn { .. } => true,
            TripleExpr::Seq { left, right } | TripleExpr::Alt { left, right } => {
                left.has_wildcards() || right.has_wildcards()
            }
            TripleExpr::Star { expr } => expr.has_wildcards(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TripleExpr::Eps
            | TripleExpr::Tc { .. }
            | TripleExpr::WildOut { .. }
            | TripleExpr::WildIn { .. } => 1,
            TripleExpr::Seq { left, right } | TripleExpr::Alt { left, right } => {
                1 + left.depth().max(right.depth())
            }
            TripleExpr::Star { expr } => 1 + expr.depth(),
        }
    }

    fn check(&self) -> Result<(), ShexError> {
        match self {
            TripleExpr::Eps => Ok(()),
            TripleExpr::Tc { shape, .. } => shape.check(),
            TripleExpr::WildOut { .. } | TripleExpr::WildIn { .. } => {
                Err(ShexError::WildcardInExpression)
            }
            TripleExpr::Seq { left, right } | TripleExpr::Alt { left, right } => {
                left.check()?;
                right.check()
            }
            TripleExpr::Star { expr } => expr.check(),
        }
    }
}

impl ShexShape {
    /// `⌊⊤⌉`, satisfied everywhere.
    pub fn top() -> Self {
        ShexShape::Neigh {
            expr: TripleExpr::Eps,
            openness: Openness::Open {
                r: BTreeSet::new(),
                q: BTreeSet::new(),
            },
        }
    }

    /// `⌊e ; ⊤⌉`: some part of the neighborhood matches `e`.
    pub fn some(e: TripleExpr) -> Self {
        ShexShape::Neigh {
            expr: e,
            openness: Openness::Open {
                r: BTreeSet::new(),
                q: BTreeSet::new(),
            },
        }
    }

    /// Neighborhood shape; rejects wildcards inside `expr`.
    pub fn neigh(expr: TripleExpr, openness: Openness) -> Result<Self, ShexError> {
        if expr.has_wildcards() {
            return Err(ShexError::WildcardInExpression);
        }
        Ok(ShexShape::Neigh { expr, openness })
    }

    pub fn test_const(c: impl Into<Value>) -> Self {
        ShexShape::TestConst { c: c.into() }
    }

    pub fn test_type(t: ValueType) -> Self {
        ShexShape::TestType { t }
    }

    pub fn and(self, right: ShexShape) -> Self {
        ShexShape::And {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn or(self, right: ShexShape) -> Self {
        ShexShape::Or {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn not(self) -> Self {
        ShexShape::Not { shape: Box::new(self) }
    }

    /// Left-nested conjunction; the empty conjunction is `⌊⊤⌉`.
    pub fn and_all(shapes: impl IntoIterator<Item = ShexShape>) -> Self {
        shapes.into_iter().reduce(|a, b| a.and(b)).unwrap_or_else(ShexShape::top)
    }

    /// Left-nested disjunction; the empty disjunction is `¬⌊⊤⌉`.
    pub fn or_any(shapes: impl IntoIterator<Item = ShexShape>) -> Self {
        shapes
            .into_iter()
            .reduce(|a, b| a.or(b))
            .unwrap_or_else(|| ShexShape::top().not())
    }

    /// Rejects wildcards nested inside neighborhood expressions.
    pub fn check(&self) -> Result<(), ShexError> {
        match self {
            ShexShape::TestConst { .. } | ShexShape::TestType { .. } => Ok(()),
            ShexShape::Neigh { expr, .. } => expr.check(),
            ShexShape::And { left, right } | ShexShape::Or { left, right } => {
                left.check()?;
                right.check()
            }
            ShexShape::Not { shape } => shape.check(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            ShexShape::TestConst { .. } | ShexShape::TestType { .. } => 1,
            ShexShape::Neigh { expr, .. } => 1 + expr_size(expr),
            ShexShape::And { left, right } | ShexShape::Or { left, right } => {
                1 + left.size() + right.size()
            }
            ShexShape::Not { shape } => 1 + shape.size(),
        }
    }

    fn collect(&self, consts: &mut BTreeSet<Value>, types: &mut BTreeSet<ValueType>) {
        match self {
            ShexShape::TestConst { c } => {
                consts.insert(c.clone());
            }
            ShexShape::TestType { t } => {
                types.insert(t.clone());
            }
            ShexShape::Neigh { expr, .. } => collect_expr(expr, consts, types),
            ShexShape::And { left, right } | ShexShape::Or { left, right } => {
                left.collect(consts, types);
                right.collect(consts, types);
            }
            ShexShape::Not { shape } => shape.collect(consts, types),
        }
    }
}

fn expr_size(e: &TripleExpr) -> usize {
    match e {
        TripleExpr::Eps | TripleExpr::WildIn { .. } | TripleExpr::WildOut { .. } => 1,
        TripleExpr::Tc { shape, .. } => 1 + shape.size(),
        TripleExpr::Seq { left, right } | TripleExpr::Alt { left, right } => {
            1 + expr_size(left) + expr_size(right)
        }
        TripleExpr::Star { expr } => 1 + expr_size(expr),
    }
}

fn collect_expr(e: &TripleExpr, consts: &mut BTreeSet<Value>, types: &mut BTreeSet<ValueType>) {
    match e {
        TripleExpr::Tc { shape, .. } => shape.collect(consts, types),
        TripleExpr::Seq { left, right } | TripleExpr::Alt { left, right } => {
            collect_expr(left, consts, types);
            collect_expr(right, consts, types);
        }
        TripleExpr::Star { expr } => collect_expr(expr, consts, types),
        _ => {}
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShexSelector {
    TestConst { c: Value },
    OutConst { q: Name, c: Value },
    Out { q: Name },
    In { q: Name },
}

impl ShexSelector {
    pub fn out(q: impl Into<String>) -> Self {
        ShexSelector::Out { q: Name::new(q) }
    }

    pub fn inc(q: impl Into<String>) -> Self {
        ShexSelector::In { q: Name::new(q) }
    }

    /// The selector written as a shape.
    pub fn to_shape(&self) -> ShexShape {
        match self {
            ShexSelector::TestConst { c } => ShexShape::TestConst { c: c.clone() },
            ShexSelector::OutConst { q, c } => ShexShape::some(TripleExpr::Tc {
                q: q.clone(),
                dir: Direction::Forward,
                shape: Box::new(ShexShape::TestConst { c: c.clone() }),
            }),
            ShexSelector::Out { q } => ShexShape::some(TripleExpr::Tc {
                q: q.clone(),
                dir: Direction::Forward,
                shape: Box::new(ShexShape::top()),
            }),
            ShexSelector::In { q } => ShexShape::some(TripleExpr::Tc {
                q: q.clone(),
                dir: Direction::Inverse,
                shape: Box::new(ShexShape::top()),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShexRule {
    pub sel: ShexSelector,
    pub shape: ShexShape,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShexSchema {
    pub rules: Vec<ShexRule>,
}

impl ShexSchema {
    pub fn new(rules: Vec<ShexRule>) -> Self {
        ShexSchema { rules }
    }

    pub fn check(&self) -> Result<(), ShexError> {
        self.rules.iter().try_for_each(|r| r.shape.check())
    }

    pub fn value_types(&self) -> BTreeSet<ValueType> {
        let (mut c, mut t) = (BTreeSet::new(), BTreeSet::new());
        for r in &self.rules {
            r.shape.collect(&mut c, &mut t);
        }
        t
    }

    pub fn constants(&self) -> BTreeSet<Value> {
        let (mut c, mut t) = (BTreeSet::new(), BTreeSet::new());
        for r in &self.rules {
            r.shape.collect(&mut c, &mut t);
            match &r.sel {
                ShexSelector::TestConst { c: k } | ShexSelector::OutConst { c: k, .. } => {
                    c.insert(k.clone());
                }
                _ => {}
            }
        }
        c
    }
}

/// Repetition forms that desugar into core triple expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repetition {
    Exactly,
    AtMost,
    AtLeast,
}

/// `e^n`, `e^{≤n}` and `e^{≥n}` in terms of `;`, `|`, `ε` and `*`.
pub fn desugar_repetition(e: TripleExpr, kind: Repetition, n: usize) -> TripleExpr {
    let power = |k: usize| {
        (0..k)
            .map(|_| e.clone())
            .reduce(|a, b| a.then(b))
            .unwrap_or(TripleExpr::Eps)
    };
    match kind {
        Repetition::Exactly => power(n),
        Repetition::AtMost => (1..=n).fold(TripleExpr::Eps, |acc, k| acc.alt(power(k))),
        Repetition::AtLeast => {
            if n == 0 {
                e.clone().star()
            } else {
                power(n).then(e.clone().star())
            }
        }
    }
}

/// Names appearing directly in `e`, with their direction.
pub fn preds(e: &TripleExpr) -> BTreeSet<(Name, Direction)> {
    let mut out = BTreeSet::new();
    fn go(e: &TripleExpr, out: &mut BTreeSet<(Name, Direction)>) {
        match e {
            TripleExpr::Tc { q, dir, .. } => {
                out.insert((q.clone(), *dir));
            }
            TripleExpr::Seq { left, right } | TripleExpr::Alt { left, right } => {
                go(left, out);
                go(right, out);
            }
            TripleExpr::Star { expr } => go(expr, out),
            _ => {}
        }
    }
    go(e, &mut out);
    out
}

pub(crate) fn split_preds(ps: &BTreeSet<(Name, Direction)>) -> (BTreeSet<Name>, BTreeSet<Name>) {
    let mut fwd = BTreeSet::new();
    let mut inv = BTreeSet::new();
    for (q, d) in ps {
        match d {
            Direction::Forward => fwd.insert(q.clone()),
            Direction::Inverse => inv.insert(q.clone()),
        };
    }
    (fwd, inv)
}

/// `⌊e⌉`: `e` with every name it mentions directly closed, all others open.
pub fn open_closure(e: TripleExpr) -> ShexShape {
    let (q, r) = split_preds(&preds(&e));
    ShexShape::Neigh {
        expr: e,
        openness: Openness::Open { r, q },
    }
}

/// Evaluator bound to one graph, with a per-run cache of nested results.
pub struct Shex<'a> {
    g: &'a CommonGraph,
    types: &'a TypeRegistry,
    cap: usize,
    cache: RefCell<HashMap<(usize, Focus), bool>>,
}

impl<'a> Shex<'a> {
    pub fn new(g: &'a CommonGraph) -> Self {
        Shex {
            g,
            types: builtins(),
            cap: DEFAULT_CAP,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn with_types(mut self, types: &'a TypeRegistry) -> Self {
        self.types = types;
        self
    }

    /// Sets the neighborhood cap, clamped to [`MAX_CAP`].
    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap.min(MAX_CAP);
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn arcs(&self, v: &Focus) -> Result<Vec<SignedArc>, ShexError> {
        let size = self.g.signed_degree(v);
        if size > self.cap {
            return Err(ShexError::NeighborhoodTooLarge {
                focus: v.clone(),
                size,
                cap: self.cap,
            });
        }
        let mut arcs = Vec::with_capacity(size);
        for a in self.g.out_arcs(v) {
            arcs.push(SignedArc {
                name: a.name.clone(),
                dir: Direction::Forward,
                other: a.other.clone(),
            });
        }
        for a in self.g.in_arcs(v) {
            arcs.push(SignedArc {
                name: a.name.clone(),
                dir: Direction::Inverse,
                other: a.other.clone(),
            });
        }
        Ok(arcs)
    }

    fn leaf_ok(&self, leaf: &TripleExpr, arc: &SignedArc) -> Result<bool, ShexError> {
        match leaf {
            TripleExpr::Tc { q, dir, shape } => {
                Ok(&arc.name == q && arc.dir == *dir && self.sat(&arc.other, shape)?)
            }
            TripleExpr::WildOut { excluded } => {
                Ok(arc.dir == Direction::Forward && !excluded.contains(&arc.name))
            }
            TripleExpr::WildIn { excluded } => {
                Ok(arc.dir == Direction::Inverse && !excluded.contains(&arc.name))
            }
            _ => unreachable!("only leaves are tested"),
        }
    }

    fn compile(
        &self,
        arcs: &[SignedArc],
        expr: &TripleExpr,
        openness: Option<&Openness>,
    ) -> Result<matcher::Compiled, ShexError> {
        let mut c = Compiler::new(arcs, |leaf: &TripleExpr, arc: &SignedArc| self.leaf_ok(leaf, arc));
        let mut root = c.expr(expr)?;
        match openness {
            Some(Openness::HalfOpen { r }) => {
                let w = c.wildcard(&TripleExpr::WildIn { excluded: r.clone() })?;
                let s = c.star(w);
                root = c.seq(root, s);
            }
            Some(Openness::Open { r, q }) => {
                let wi = c.wildcard(&TripleExpr::WildIn { excluded: r.clone() })?;
                let si = c.star(wi);
                let wo = c.wildcard(&TripleExpr::WildOut { excluded: q.clone() })?;
                let so = c.star(wo);
                let suffix = c.seq(si, so);
                root = c.seq(root, suffix);
            }
            None => {}
        }
        Ok(c.finish(root))
    }

    /// Whether the signed neighborhood of `v` matches `expr` followed by the
    /// wildcards of `openness`.
    pub fn match_expr(&self, v: &Focus, expr: &TripleExpr, openness: &Openness) -> Result<bool, ShexError> {
        self.scoped(|| self.match_inner(v, expr, openness))
    }

    fn match_inner(&self, v: &Focus, expr: &TripleExpr, openness: &Openness) -> Result<bool, ShexError> {
        let arcs = self.arcs(v)?;
        let c = self.compile(&arcs, expr, Some(openness))?;
        Ok(Matcher::new(&c).run())
    }

    /// Runs `f` with a fresh nested-result cache. The cache is keyed by shape
    /// address, so it must not outlive the shapes of one call.
    fn scoped<T>(&self, f: impl FnOnce() -> T) -> T {
        self.cache.borrow_mut().clear();
        let r = f();
        self.cache.borrow_mut().clear();
        r
    }

    /// Whether the whole signed neighborhood of `v` lies in the denotation of
    /// `expr`, wildcards included.
    pub fn match_bare(&self, v: &Focus, expr: &TripleExpr) -> Result<bool, ShexError> {
        self.scoped(|| {
            let arcs = self.arcs(v)?;
            let c = self.compile(&arcs, expr, None)?;
            Ok(Matcher::new(&c).run())
        })
    }

    /// A successful match as (consuming leaf, signed triple) pairs.
    pub fn match_witness(
        &self,
        v: &Focus,
        expr: &TripleExpr,
        openness: &Openness,
    ) -> Result<Option<Vec<(LeafRef, crate::model::SignedTriple)>>, ShexError> {
        let arcs = self.arcs(v)?;
        let c = self.scoped(|| self.compile(&arcs, expr, Some(openness)))?;
        let signed = self.g.neigh_signed(v);
        let w = Matcher::new(&c).witness();
        Ok(w.map(|pairs| {
            pairs
                .into_iter()
                .map(|(leaf, i)| {
                    let a = &arcs[i];
                    let t = signed
                        .iter()
                        .find(|t| t.direction == a.dir && t.base.name() == &a.name && t.other() == a.other)
                        .expect("arc comes from the neighborhood")
                        .clone();
                    (leaf, t)
                })
                .collect()
        }))
    }

    fn sat(&self, v: &Focus, shape: &ShexShape) -> Result<bool, ShexError> {
        match shape {
            ShexShape::TestConst { c } => Ok(matches!(v, Focus::Val(w) if w == c)),
            ShexShape::TestType { t } => Ok(matches!(v, Focus::Val(w) if self.types.holds(w, t))),
            ShexShape::And { left, right } => Ok(self.sat(v, left)? && self.sat(v, right)?),
            ShexShape::Or { left, right } => Ok(self.sat(v, left)? || self.sat(v, right)?),
            ShexShape::Not { shape } => Ok(!self.sat(v, shape)?),
            ShexShape::Neigh { expr, openness } => {
                let key = (shape as *const ShexShape as usize, v.clone());
                if let Some(&r) = self.cache.borrow().get(&key) {
                    return Ok(r);
                }
                let r = self.match_inner(v, expr, openness)?;
                self.cache.borrow_mut().insert(key, r);
                Ok(r)
            }
        }
    }

    pub fn satisfies(&self, v: &Focus, shape: &ShexShape) -> Result<bool, ShexError> {
        self.scoped(|| self.sat(v, shape))
    }

    pub fn select(&self, sel: &ShexSelector) -> BTreeSet<Focus> {
        let with_out = |q: &Name, pred: &dyn Fn(&Focus) -> bool| -> BTreeSet<Focus> {
            self.g
                .sources()
                .filter(|(_, arcs)| arcs.iter().any(|a| &a.name == q && pred(&a.other)))
                .map(|(f, _)| f.clone())
                .collect()
        };
        match sel {
            ShexSelector::TestConst { c } => BTreeSet::from([Focus::Val(c.clone())]),
            ShexSelector::OutConst { q, c } => with_out(q, &|o| matches!(o, Focus::Val(w) if w == c)),
            ShexSelector::Out { q } => with_out(q, &|_| true),
            ShexSelector::In { q } => self
                .g
                .targets()
                .filter(|(_, arcs)| arcs.iter().any(|a| &a.name == q))
                .map(|(f, _)| f.clone())
                .collect(),
        }
    }

    pub fn validate(&self, s: &ShexSchema) -> Result<ValidationReport, ShexError> {
        self.scoped(|| {
            run_rules(
                &s.rules,
                |r| Ok(self.select(&r.sel)),
                |r, f| self.sat(f, &r.shape),
                |r| (compact_json(&r.sel), compact_json(&r.shape)),
            )
        })
    }
}

pub fn match_triple_expr(
    g: &CommonGraph,
    v: &Focus,
    expr: &TripleExpr,
    openness: &Openness,
) -> Result<bool, ShexError> {
    Shex::new(g).match_expr(v, expr, openness)
}

pub fn shex_satisfies(g: &CommonGraph, v: &Focus, shape: &ShexShape) -> Result<bool, ShexError> {
    Shex::new(g).satisfies(v, shape)
}

pub fn shex_select(g: &CommonGraph, sel: &ShexSelector) -> BTreeSet<Focus> {
    Shex::new(g).select(sel)
}

pub fn shex_validate(g: &CommonGraph, s: &ShexSchema) -> Result<ValidationReport, ShexError> {
    Shex::new(g).validate(s)
}
