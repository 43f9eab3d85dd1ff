//! One compiler, two target algebras.

use std::collections::BTreeSet;

use crate::model::{Direction, Name, Value, ValueType};
use crate::pgschema::{content_dnf, ContentType, PgFilter, PgPathExpr, PgRule};
use crate::shacl::{PathExpr, ShaclRule, ShaclSelector, ShaclShape};
use crate::shex::{desugar_repetition, Openness, Repetition, ShexRule, ShexSelector, ShexShape, TripleExpr};

use super::{classify_selector, classify_shape, path_normal_form, Atom, CommonAtom, SelectorForm, SingleStep, Step};

/// The shape constructors both targets offer.
pub trait Algebra {
    type Shape: Clone;
    type Rule;

    fn top(&self) -> Self::Shape;
    fn not(&self, s: Self::Shape) -> Self::Shape;
    fn and_all(&self, s: Vec<Self::Shape>) -> Self::Shape;
    fn or_any(&self, s: Vec<Self::Shape>) -> Self::Shape;
    fn test_const(&self, c: &Value) -> Self::Shape;
    fn test_type(&self, t: &ValueType) -> Self::Shape;
    /// At least `n` distinct `step`-successors satisfy `s`.
    fn at_least(&self, n: usize, step: &Step, s: Self::Shape) -> Self::Shape;
    /// At most `n` distinct `step`-successors satisfy `s`.
    fn at_most(&self, n: usize, step: &Step, s: Self::Shape) -> Self::Shape;
    /// Outgoing names restricted to `keys ∪ ps`.
    fn closed(&self, keys: &BTreeSet<Name>, ps: &BTreeSet<Name>) -> Self::Shape;
    fn rule(&self, sel: &SelectorForm, shape: Self::Shape) -> Self::Rule;
}

fn step_name(s: &Step) -> (&Name, Direction) {
    match s {
        Step::Fwd(p) | Step::Key(p) => (p, Direction::Forward),
        Step::Bwd(p) | Step::InvKey(p) => (p, Direction::Inverse),
    }
}

pub struct ShaclAlgebra;

impl ShaclAlgebra {
    fn path(step: &Step) -> PathExpr {
        let (q, d) = step_name(step);
        let p = PathExpr::step(q.as_str());
        match d {
            Direction::Forward => p,
            Direction::Inverse => p.inv(),
        }
    }
}

impl Algebra for ShaclAlgebra {
    type Shape = ShaclShape;
    type Rule = ShaclRule;

    fn top(&self) -> ShaclShape {
        ShaclShape::Top
    }
    fn not(&self, s: ShaclShape) -> ShaclShape {
        s.not()
    }
    fn and_all(&self, s: Vec<ShaclShape>) -> ShaclShape {
        ShaclShape::and_all(s)
    }
    fn or_any(&self, s: Vec<ShaclShape>) -> ShaclShape {
        ShaclShape::or_any(s)
    }
    fn test_const(&self, c: &Value) -> ShaclShape {
        ShaclShape::test_const(c.clone())
    }
    fn test_type(&self, t: &ValueType) -> ShaclShape {
        ShaclShape::test_type(t.clone())
    }
    fn at_least(&self, n: usize, step: &Step, s: ShaclShape) -> ShaclShape {
        ShaclShape::geq(n, Self::path(step), s)
    }
    fn at_most(&self, n: usize, step: &Step, s: ShaclShape) -> ShaclShape {
        ShaclShape::leq(n, Self::path(step), s)
    }
    fn closed(&self, keys: &BTreeSet<Name>, ps: &BTreeSet<Name>) -> ShaclShape {
        ShaclShape::closed(keys.iter().chain(ps).map(|n| n.as_str().to_string()))
    }
    fn rule(&self, sel: &SelectorForm, shape: ShaclShape) -> ShaclRule {
        let sel = match sel {
            SelectorForm::Key(k) | SelectorForm::Pred(k) | SelectorForm::KeyIsVal(k) | SelectorForm::KeyOfType(k) => {
                ShaclSelector::out(k.as_str())
            }
            SelectorForm::InvPred(k) | SelectorForm::InvKey(k) => ShaclSelector::inc(k.as_str()),
        };
        ShaclRule { sel, shape }
    }
}

pub struct ShexAlgebra;

impl ShexAlgebra {
    fn tc(step: &Step, s: ShexShape) -> TripleExpr {
        let (q, d) = step_name(step);
        TripleExpr::tc(q.as_str(), d, s)
    }
}

impl Algebra for ShexAlgebra {
    type Shape = ShexShape;
    type Rule = ShexRule;

    fn top(&self) -> ShexShape {
        ShexShape::top()
    }
    fn not(&self, s: ShexShape) -> ShexShape {
        s.not()
    }
    fn and_all(&self, s: Vec<ShexShape>) -> ShexShape {
        ShexShape::and_all(s)
    }
    fn or_any(&self, s: Vec<ShexShape>) -> ShexShape {
        ShexShape::or_any(s)
    }
    fn test_const(&self, c: &Value) -> ShexShape {
        ShexShape::test_const(c.clone())
    }
    fn test_type(&self, t: &ValueType) -> ShexShape {
        ShexShape::test_type(t.clone())
    }
    fn at_least(&self, n: usize, step: &Step, s: ShexShape) -> ShexShape {
        ShexShape::some(desugar_repetition(Self::tc(step, s), Repetition::Exactly, n))
    }
    fn at_most(&self, n: usize, step: &Step, s: ShexShape) -> ShexShape {
        self.at_least(n + 1, step, s).not()
    }
    fn closed(&self, keys: &BTreeSet<Name>, ps: &BTreeSet<Name>) -> ShexShape {
        let block = |ns: &BTreeSet<Name>| {
            ns.iter()
                .map(|n| TripleExpr::tc_any(n.as_str(), Direction::Forward))
                .reduce(|a, b| a.alt(b))
                .map(|e| e.star())
        };
        let expr = [block(keys), block(ps)]
            .into_iter()
            .flatten()
            .reduce(|a, b| a.then(b))
            .unwrap_or(TripleExpr::Eps);
        ShexShape::Neigh {
            expr,
            openness: Openness::HalfOpen { r: BTreeSet::new() },
        }
    }
    fn rule(&self, sel: &SelectorForm, shape: ShexShape) -> ShexRule {
        let sel = match sel {
            SelectorForm::Key(k) | SelectorForm::Pred(k) | SelectorForm::KeyIsVal(k) | SelectorForm::KeyOfType(k) => {
                ShexSelector::out(k.as_str())
            }
            SelectorForm::InvPred(k) | SelectorForm::InvKey(k) => ShexSelector::inc(k.as_str()),
        };
        ShexRule { sel, shape }
    }
}

fn has_key<A: Algebra>(a: &A, k: &Name, s: A::Shape) -> A::Shape {
    a.at_least(1, &Step::Key(k.clone()), s)
}

/// Shape for an open content type `τ & ⊤`: some disjunct's fields are present.
fn open_content<A: Algebra>(a: &A, t: &ContentType) -> A::Shape {
    let ds = content_dnf(t)
        .into_iter()
        .map(|d| {
            let reqs = d.reqs.iter().map(|(k, b)| has_key(a, k, a.test_type(b))).collect();
            a.and_all(reqs)
        })
        .collect();
    a.or_any(ds)
}

pub fn filter<A: Algebra>(a: &A, f: &PgFilter) -> A::Shape {
    match f {
        PgFilter::KeyIsVal { k, c } => has_key(a, k, a.test_const(c)),
        PgFilter::NotKeyIsVal { k, c } => a.not(has_key(a, k, a.test_const(c))),
        PgFilter::OfType { t } => open_content(a, t),
        PgFilter::NotOfType { t } => a.not(open_content(a, t)),
    }
}

fn filters<A: Algebra>(a: &A, fs: &[PgFilter]) -> A::Shape {
    a.and_all(fs.iter().map(|f| filter(a, f)).collect())
}

fn chain<A: Algebra>(a: &A, atoms: &[Atom]) -> A::Shape {
    match atoms.split_first() {
        None => a.top(),
        Some((Atom::Filter(f), [])) => filter(a, f),
        Some((Atom::Filter(f), rest)) => a.and_all(vec![filter(a, f), chain(a, rest)]),
        Some((Atom::Step(s), rest)) => a.at_least(1, s, chain(a, rest)),
    }
}

/// `∃π` for a star-free, `¬P`-free path.
pub fn exists<A: Algebra>(a: &A, p: &PgPathExpr) -> A::Shape {
    a.or_any(path_normal_form(p).iter().map(|d| chain(a, d)).collect())
}

fn count<A: Algebra>(a: &A, at_least: bool, n: usize, s: &SingleStep) -> A::Shape {
    let post = filters(a, &s.post);
    if at_least {
        if n == 0 {
            return a.top();
        }
        let mut parts: Vec<_> = s.pre.iter().map(|f| filter(a, f)).collect();
        parts.push(a.at_least(n, &s.step, post));
        a.and_all(parts)
    } else if s.pre.is_empty() {
        a.at_most(n, &s.step, post)
    } else {
        a.or_any(vec![a.not(filters(a, &s.pre)), a.at_most(n, &s.step, post)])
    }
}

fn closed<A: Algebra>(a: &A, t: &ContentType, ps: &BTreeSet<Name>) -> A::Shape {
    let ds = content_dnf(t)
        .into_iter()
        .map(|d| {
            let keys: BTreeSet<Name> = d.reqs.iter().map(|(k, _)| k.clone()).collect();
            let mut parts: Vec<_> = d.reqs.iter().map(|(k, b)| has_key(a, k, a.test_type(b))).collect();
            parts.push(a.closed(&keys, ps));
            a.and_all(parts)
        })
        .collect();
    a.or_any(ds)
}

pub fn atom<A: Algebra>(a: &A, c: &CommonAtom) -> A::Shape {
    match c {
        CommonAtom::Exists(p) => exists(a, p),
        CommonAtom::AtLeast(n, s) => count(a, true, *n, s),
        CommonAtom::AtMost(n, s) => count(a, false, *n, s),
        CommonAtom::Closed { content, ps } => closed(a, content, ps),
    }
}

/// `sel ⇒ φ` becomes `sel' ⇒ ¬∃sel ∨ φ`; the rule must be common.
pub fn rule<A: Algebra>(a: &A, r: &PgRule) -> A::Rule {
    let form = classify_selector(&r.sel.0, "sel").expect("common selector");
    let atoms = classify_shape(&r.shape, "shape").expect("common shape");
    let body = a.and_all(atoms.iter().map(|c| atom(a, c)).collect());
    let shape = a.or_any(vec![a.not(exists(a, &r.sel.0)), body]);
    a.rule(&form, shape)
}
