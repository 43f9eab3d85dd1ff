//! Standard-style ShEx ("s-ShEx") abstract syntax and its translation to and
//! from the core ShEx shapes.
//!
//! s-ShEx uses repetition intervals, dot constraints, `extra` sets and a
//! `closed` flag instead of `ε`, `*` and explicit wildcards. Lowering goes
//! through three steps: [`normalize_intervals`], [`eliminate_extra`] and
//! [`sshex_to_shex`].

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Direction, Name, Value, ValueType};

use super::{preds, split_preds, Openness, ShexError, ShexRule, ShexSchema, ShexSelector, ShexShape, TripleExpr};

/// A possibly inverse name, written `p` or `^p`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub struct SignedName {
    pub name: Name,
    pub dir: Direction,
}

impl SignedName {
    pub fn fwd(n: impl Into<String>) -> Self {
        SignedName {
            name: Name::new(n),
            dir: Direction::Forward,
        }
    }

    pub fn inv(n: impl Into<String>) -> Self {
        SignedName {
            name: Name::new(n),
            dir: Direction::Inverse,
        }
    }
}

impl From<String> for SignedName {
    fn from(s: String) -> Self {
        match s.strip_prefix('^') {
            Some(rest) => SignedName::inv(rest),
            None => SignedName::fwd(s),
        }
    }
}

impl From<SignedName> for String {
    fn from(s: SignedName) -> Self {
        s.to_string()
    }
}

impl fmt::Display for SignedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dir {
            Direction::Forward => write!(f, "{}", self.name),
            Direction::Inverse => write!(f, "^{}", self.name),
        }
    }
}

/// Repetition interval `[min; max]`, `max = None` meaning `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(u32, MaxDoc)", into = "(u32, MaxDoc)")]
pub struct Interval {
    pub min: u32,
    pub max: Option<u32>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaxDoc {
    Bounded(u32),
    Star(StarMark),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum StarMark {
    #[serde(rename = "*")]
    Star,
}

impl TryFrom<(u32, MaxDoc)> for Interval {
    type Error = String;

    fn try_from((min, max): (u32, MaxDoc)) -> Result<Self, String> {
        match max {
            MaxDoc::Bounded(m) if m < min => Err(format!("interval [{min};{m}] has max below min")),
            MaxDoc::Bounded(m) => Ok(Interval { min, max: Some(m) }),
            MaxDoc::Star(_) => Ok(Interval { min, max: None }),
        }
    }
}

impl From<Interval> for (u32, MaxDoc) {
    fn from(i: Interval) -> Self {
        (
            i.min,
            match i.max {
                Some(m) => MaxDoc::Bounded(m),
                None => MaxDoc::Star(StarMark::Star),
            },
        )
    }
}

impl Interval {
    pub const STAR: Interval = Interval { min: 0, max: None };
    pub const OPT: Interval = Interval { min: 0, max: Some(1) };
    pub const NONE: Interval = Interval { min: 0, max: Some(0) };

    pub fn new(min: u32, max: Option<u32>) -> Option<Self> {
        match max {
            Some(m) if m < min => None,
            _ => Some(Interval { min, max }),
        }
    }

    /// Normalized intervals are `[0;1]`, `[0;*]` and `[0;0]`.
    pub fn is_normal(&self) -> bool {
        self.min == 0 && matches!(self.max, None | Some(0) | Some(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum STripleExpr {
    /// `q se`, or the dot constraint `q .` when `shape` is absent.
    Tc {
        q: Name,
        dir: Direction,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shape: Option<Box<SShexExpr>>,
    },
    Seq {
        left: Box<STripleExpr>,
        right: Box<STripleExpr>,
    },
    Alt {
        left: Box<STripleExpr>,
        right: Box<STripleExpr>,
    },
    Repeat {
        expr: Box<STripleExpr>,
        interval: Interval,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum SShexExpr {
    TestConst {
        c: Value,
    },
    TestType {
        t: ValueType,
    },
    /// `closed? extra Q { te }`; an absent `expr` is the empty expression.
    Shape {
        #[serde(default)]
        closed: bool,
        #[serde(default)]
        extra: BTreeSet<SignedName>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expr: Option<STripleExpr>,
    },
    And {
        left: Box<SShexExpr>,
        right: Box<SShexExpr>,
    },
    Or {
        left: Box<SShexExpr>,
        right: Box<SShexExpr>,
    },
    Not {
        shape: Box<SShexExpr>,
    },
}

impl STripleExpr {
    pub fn tc(q: impl Into<String>, dir: Direction, shape: SShexExpr) -> Self {
        STripleExpr::Tc {
            q: Name::new(q),
            dir,
            shape: Some(Box::new(shape)),
        }
    }

    pub fn dot(q: impl Into<String>, dir: Direction) -> Self {
        STripleExpr::Tc {
            q: Name::new(q),
            dir,
            shape: None,
        }
    }

    pub fn then(self, right: STripleExpr) -> Self {
        STripleExpr::Seq {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn alt(self, right: STripleExpr) -> Self {
        STripleExpr::Alt {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn repeat(self, interval: Interval) -> Self {
        STripleExpr::Repeat {
            expr: Box::new(self),
            interval,
        }
    }

    /// Names appearing directly in the expression, with their direction.
    pub fn preds(&self) -> BTreeSet<(Name, Direction)> {
        let mut out = BTreeSet::new();
        self.collect_preds(&mut out);
        out
    }

    fn collect_preds(&self, out: &mut BTreeSet<(Name, Direction)>) {
        match self {
            STripleExpr::Tc { q, dir, .. } => {
                out.insert((q.clone(), *dir));
            }
            STripleExpr::Seq { left, right } | STripleExpr::Alt { left, right } => {
                left.collect_preds(out);
                right.collect_preds(out);
            }
            STripleExpr::Repeat { expr, .. } => expr.collect_preds(out),
        }
    }

    /// Shapes of the constraints on `q` that appear directly in the
    /// expression; `None` stands for a dot.
    pub fn direct_constraints(&self, q: &SignedName) -> Vec<Option<&SShexExpr>> {
        let mut out = Vec::new();
        self.collect_direct(q, &mut out);
        out
    }

    fn collect_direct<'a>(&'a self, target: &SignedName, out: &mut Vec<Option<&'a SShexExpr>>) {
        match self {
            STripleExpr::Tc { q, dir, shape } => {
                if q == &target.name && *dir == target.dir {
                    out.push(shape.as_deref());
                }
            }
            STripleExpr::Seq { left, right } | STripleExpr::Alt { left, right } => {
                left.collect_direct(target, out);
                right.collect_direct(target, out);
            }
            STripleExpr::Repeat { expr, .. } => expr.collect_direct(target, out),
        }
    }

    pub fn is_normalized(&self) -> bool {
        match self {
            STripleExpr::Tc { shape, .. } => shape.as_ref().map_or(true, |s| s.is_normalized()),
            STripleExpr::Seq { left, right } | STripleExpr::Alt { left, right } => {
                left.is_normalized() && right.is_normalized()
            }
            STripleExpr::Repeat { expr, interval } => interval.is_normal() && expr.is_normalized(),
        }
    }

    fn power(&self, n: u32) -> Option<STripleExpr> {
        (0..n).map(|_| self.clone()).reduce(|a, b| a.then(b))
    }
}

impl SShexExpr {
    pub fn shape(closed: bool, extra: impl IntoIterator<Item = SignedName>, expr: Option<STripleExpr>) -> Self {
        SShexExpr::Shape {
            closed,
            extra: extra.into_iter().collect(),
            expr,
        }
    }

    /// The non-closed shape with an empty expression, satisfied everywhere.
    pub fn any() -> Self {
        SShexExpr::shape(false, [], None)
    }

    pub fn and(self, right: SShexExpr) -> Self {
        SShexExpr::And {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn or(self, right: SShexExpr) -> Self {
        SShexExpr::Or {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn not(self) -> Self {
        SShexExpr::Not { shape: Box::new(self) }
    }

    pub fn is_normalized(&self) -> bool {
        match self {
            SShexExpr::TestConst { .. } | SShexExpr::TestType { .. } => true,
            SShexExpr::Shape { expr, .. } => expr.as_ref().map_or(true, |e| e.is_normalized()),
            SShexExpr::And { left, right } | SShexExpr::Or { left, right } => {
                left.is_normalized() && right.is_normalized()
            }
            SShexExpr::Not { shape } => shape.is_normalized(),
        }
    }

    pub fn has_extra(&self) -> bool {
        match self {
            SShexExpr::TestConst { .. } | SShexExpr::TestType { .. } => false,
            SShexExpr::Shape { extra, expr, .. } => {
                !extra.is_empty() || expr.as_ref().map_or(false, te_has_extra)
            }
            SShexExpr::And { left, right } | SShexExpr::Or { left, right } => {
                left.has_extra() || right.has_extra()
            }
            SShexExpr::Not { shape } => shape.has_extra(),
        }
    }
}

fn te_has_extra(te: &STripleExpr) -> bool {
    match te {
        STripleExpr::Tc { shape, .. } => shape.as_ref().map_or(false, |s| s.has_extra()),
        STripleExpr::Seq { left, right } | STripleExpr::Alt { left, right } => {
            te_has_extra(left) || te_has_extra(right)
        }
        STripleExpr::Repeat { expr, .. } => te_has_extra(expr),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SShexRule {
    pub sel: ShexSelector,
    pub shape: SShexExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SShexSchema {
    pub rules: Vec<SShexRule>,
}

impl SShexSchema {
    /// Normalizes, removes `extra` and translates every rule to core ShEx.
    pub fn lower(&self) -> Result<ShexSchema, ShexError> {
        let rules = self
            .rules
            .iter()
            .map(|r| {
                let se = eliminate_extra(&normalize_shape(&r.shape));
                Ok(ShexRule {
                    sel: r.sel.clone(),
                    shape: sshex_to_shex(&se)?,
                })
            })
            .collect::<Result<_, ShexError>>()?;
        Ok(ShexSchema { rules })
    }
}

/// Rewrites every interval into `[0;1]`, `[0;*]` or `[0;0]`, including inside
/// nested shapes.
///
/// `[0;0]` is kept as is: it matches nothing but still mentions its names,
/// and s-ShEx has no `ε` to rewrite it into.
pub fn normalize_intervals(te: &STripleExpr) -> STripleExpr {
    match te {
        STripleExpr::Tc { q, dir, shape } => STripleExpr::Tc {
            q: q.clone(),
            dir: *dir,
            shape: shape.as_ref().map(|s| Box::new(normalize_shape(s))),
        },
        STripleExpr::Seq { left, right } => normalize_intervals(left).then(normalize_intervals(right)),
        STripleExpr::Alt { left, right } => normalize_intervals(left).alt(normalize_intervals(right)),
        STripleExpr::Repeat { expr, interval } => {
            let e = normalize_intervals(expr);
            if interval.is_normal() {
                return e.repeat(*interval);
            }
            match interval.max {
                None => {
                    let base = e.clone().repeat(Interval::STAR);
                    match e.power(interval.min) {
                        Some(p) => base.then(p),
                        None => base,
                    }
                }
                Some(max) => {
                    let required = e.power(interval.min);
                    let optional = e.clone().repeat(Interval::OPT).power(max - interval.min);
                    match (required, optional) {
                        (Some(r), Some(o)) => r.then(o),
                        (Some(r), None) => r,
                        (None, Some(o)) => o,
                        (None, None) => e.repeat(Interval::NONE),
                    }
                }
            }
        }
    }
}

/// [`normalize_intervals`] applied to every triple expression of a shape.
pub fn normalize_shape(se: &SShexExpr) -> SShexExpr {
    match se {
        SShexExpr::TestConst { .. } | SShexExpr::TestType { .. } => se.clone(),
        SShexExpr::Shape { closed, extra, expr } => SShexExpr::Shape {
            closed: *closed,
            extra: extra.clone(),
            expr: expr.as_ref().map(normalize_intervals),
        },
        SShexExpr::And { left, right } => normalize_shape(left).and(normalize_shape(right)),
        SShexExpr::Or { left, right } => normalize_shape(left).or(normalize_shape(right)),
        SShexExpr::Not { shape } => normalize_shape(shape).not(),
    }
}

/// Removes `extra` sets. Each extra name `q` constrained directly in the
/// expression gets a trailing `(q ¬se1 ∧ … ∧ ¬sen)[0;*]`; a dot constraint on
/// `q` already accepts every triple, so no star is needed. Extra names not
/// mentioned at all get `(q .)[0;*]`.
pub fn eliminate_extra(se: &SShexExpr) -> SShexExpr {
    match se {
        SShexExpr::TestConst { .. } | SShexExpr::TestType { .. } => se.clone(),
        SShexExpr::And { left, right } => eliminate_extra(left).and(eliminate_extra(right)),
        SShexExpr::Or { left, right } => eliminate_extra(left).or(eliminate_extra(right)),
        SShexExpr::Not { shape } => eliminate_extra(shape).not(),
        SShexExpr::Shape { closed, extra, expr } => {
            let expr = expr.as_ref().map(eliminate_in_te);
            let mut extras = Vec::new();
            for q in extra {
                let direct = expr.as_ref().map(|e| e.direct_constraints(q)).unwrap_or_default();
                if direct.is_empty() {
                    extras.push(STripleExpr::dot(q.name.as_str(), q.dir).repeat(Interval::STAR));
                    continue;
                }
                if direct.iter().any(Option::is_none) {
                    continue;
                }
                let body = direct
                    .into_iter()
                    .flatten()
                    .map(|s| s.clone().not())
                    .reduce(|a, b| a.and(b))
                    .expect("at least one constraint");
                extras.push(STripleExpr::tc(q.name.as_str(), q.dir, body).repeat(Interval::STAR));
            }
            let expr = expr.into_iter().chain(extras).reduce(|a, b| a.then(b));
            SShexExpr::Shape {
                closed: *closed,
                extra: BTreeSet::new(),
                expr,
            }
        }
    }
}

fn eliminate_in_te(te: &STripleExpr) -> STripleExpr {
    match te {
        STripleExpr::Tc { q, dir, shape } => STripleExpr::Tc {
            q: q.clone(),
            dir: *dir,
            shape: shape.as_ref().map(|s| Box::new(eliminate_extra(s))),
        },
        STripleExpr::Seq { left, right } => eliminate_in_te(left).then(eliminate_in_te(right)),
        STripleExpr::Alt { left, right } => eliminate_in_te(left).alt(eliminate_in_te(right)),
        STripleExpr::Repeat { expr, interval } => eliminate_in_te(expr).repeat(*interval),
    }
}

/// Translates a normalized, `extra`-free s-ShEx shape into core ShEx.
pub fn sshex_to_shex(se: &SShexExpr) -> Result<ShexShape, ShexError> {
    Ok(match se {
        SShexExpr::TestConst { c } => ShexShape::TestConst { c: c.clone() },
        SShexExpr::TestType { t } => ShexShape::TestType { t: t.clone() },
        SShexExpr::And { left, right } => sshex_to_shex(left)?.and(sshex_to_shex(right)?),
        SShexExpr::Or { left, right } => sshex_to_shex(left)?.or(sshex_to_shex(right)?),
        SShexExpr::Not { shape } => sshex_to_shex(shape)?.not(),
        SShexExpr::Shape { closed, extra, expr } => {
            if !extra.is_empty() {
                return Err(ShexError::NotNormalized("shape still has an extra set".into()));
            }
            let (e, ps) = match expr {
                Some(te) => (te_to_shex(te)?, te.preds()),
                None => (TripleExpr::Eps, BTreeSet::new()),
            };
            let (q, r) = split_preds(&ps);
            let openness = if *closed {
                Openness::HalfOpen { r }
            } else {
                Openness::Open { r, q }
            };
            ShexShape::Neigh { expr: e, openness }
        }
    })
}

fn te_to_shex(te: &STripleExpr) -> Result<TripleExpr, ShexError> {
    Ok(match te {
        STripleExpr::Tc { q, dir, shape } => TripleExpr::Tc {
            q: q.clone(),
            dir: *dir,
            shape: Box::new(match shape {
                Some(s) => sshex_to_shex(s)?,
                None => ShexShape::top(),
            }),
        },
        STripleExpr::Seq { left, right } => te_to_shex(left)?.then(te_to_shex(right)?),
        STripleExpr::Alt { left, right } => te_to_shex(left)?.alt(te_to_shex(right)?),
        STripleExpr::Repeat { expr, interval } => {
            let e = te_to_shex(expr)?;
            match (interval.min, interval.max) {
                (0, None) => e.star(),
                (0, Some(1)) => e.alt(TripleExpr::Eps),
                (0, Some(0)) => TripleExpr::Eps,
                (min, max) => {
                    let max = max.map_or("*".to_string(), |m| m.to_string());
                    return Err(ShexError::NotNormalized(format!("interval [{min};{max}]")));
                }
            }
        }
    })
}

/// ε-normal form of a closed triple expression: `ε` only at the top.
#[derive(Debug, Clone)]
enum Norm {
    Tc(Name, Direction, ShexShape),
    Seq(Box<Norm>, Box<Norm>),
    Alt(Box<Norm>, Box<Norm>),
    Star(Box<Norm>),
    Opt(Box<Norm>),
}

fn eps_normalize(e: &TripleExpr) -> Result<Option<Norm>, ShexError> {
    Ok(match e {
        TripleExpr::Eps => None,
        TripleExpr::Tc { q, dir, shape } => Some(Norm::Tc(q.clone(), *dir, (**shape).clone())),
        TripleExpr::WildIn { .. } | TripleExpr::WildOut { .. } => {
            return Err(ShexError::WildcardInExpression)
        }
        TripleExpr::Seq { left, right } => match (eps_normalize(left)?, eps_normalize(right)?) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => Some(Norm::Seq(Box::new(a), Box::new(b))),
        },
        TripleExpr::Alt { left, right } => match (eps_normalize(left)?, eps_normalize(right)?) {
            (None, None) => None,
            (None, Some(x)) | (Some(x), None) => Some(opt(x)),
            (Some(a), Some(b)) => Some(Norm::Alt(Box::new(a), Box::new(b))),
        },
        TripleExpr::Star { expr } => eps_normalize(expr)?.map(|x| match x {
            Norm::Star(y) | Norm::Opt(y) => Norm::Star(y),
            y => Norm::Star(Box::new(y)),
        }),
    })
}

fn opt(x: Norm) -> Norm {
    match x {
        Norm::Opt(_) | Norm::Star(_) => x,
        y => Norm::Opt(Box::new(y)),
    }
}

fn norm_to_sshex(n: &Norm) -> Result<STripleExpr, ShexError> {
    Ok(match n {
        Norm::Tc(q, dir, shape) => STripleExpr::Tc {
            q: q.clone(),
            dir: *dir,
            shape: Some(Box::new(shex_to_sshex(shape)?)),
        },
        Norm::Seq(a, b) => norm_to_sshex(a)?.then(norm_to_sshex(b)?),
        Norm::Alt(a, b) => norm_to_sshex(a)?.alt(norm_to_sshex(b)?),
        Norm::Star(a) => norm_to_sshex(a)?.repeat(Interval::STAR),
        Norm::Opt(a) => norm_to_sshex(a)?.repeat(Interval::OPT),
    })
}

/// Translates a core ShEx shape into s-ShEx.
///
/// A neighborhood `⌊e ; (¬P⁻)* ; (¬Q)*⌉` becomes a non-closed shape and
/// `⌊e ; (¬P⁻)*⌉` a closed one. Names of `e` that the wildcards leave open get
/// an `(q .)[0;*]` to absorb leftover triples, and names the wildcards close
/// but `e` never mentions get `q .[0;0]` so that their triples are rejected.
pub fn shex_to_sshex(shape: &ShexShape) -> Result<SShexExpr, ShexError> {
    Ok(match shape {
        ShexShape::TestConst { c } => SShexExpr::TestConst { c: c.clone() },
        ShexShape::TestType { t } => SShexExpr::TestType { t: t.clone() },
        ShexShape::And { left, right } => shex_to_sshex(left)?.and(shex_to_sshex(right)?),
        ShexShape::Or { left, right } => shex_to_sshex(left)?.or(shex_to_sshex(right)?),
        ShexShape::Not { shape } => shex_to_sshex(shape)?.not(),
        ShexShape::Neigh { expr, openness } => {
            let (fwd, inv) = split_preds(&preds(expr));
            let main = match eps_normalize(expr)? {
                Some(n) => Some(norm_to_sshex(&n)?),
                None => None,
            };
            let mut parts: Vec<STripleExpr> = main.into_iter().collect();
            let (closed_inv, closed_fwd, is_closed) = match openness {
                Openness::HalfOpen { r } => (r, None, true),
                Openness::Open { r, q } => (r, Some(q), false),
            };
            for r in inv.difference(closed_inv) {
                parts.push(STripleExpr::dot(r.as_str(), Direction::Inverse).repeat(Interval::STAR));
            }
            for r in closed_inv.difference(&inv) {
                parts.push(STripleExpr::dot(r.as_str(), Direction::Inverse).repeat(Interval::NONE));
            }
            if let Some(q) = closed_fwd {
                for p in fwd.difference(q) {
                    parts.push(STripleExpr::dot(p.as_str(), Direction::Forward).repeat(Interval::STAR));
                }
                for p in q.difference(&fwd) {
                    parts.push(STripleExpr::dot(p.as_str(), Direction::Forward).repeat(Interval::NONE));
                }
            }
            SShexExpr::Shape {
                closed: is_closed,
                extra: BTreeSet::new(),
                expr: parts.into_iter().reduce(|a, b| a.then(b)),
            }
        }
    })
}
