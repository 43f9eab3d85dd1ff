//! CoGSL: the fragment of PG-Schema expressible in SHACL and ShEx alike,
//! its checker, and its compilers to both.
//!
//! Shapes are read as conjunctions of atoms: `∃π` with a star-free, `¬P`-free
//! path, counting atoms over a single step flanked by filters, and closed
//! atoms `∃τ ∧ ∄¬P` with `τ` free of `⊤`. Inside a conjunction the `i`-th
//! `∃τ` is paired with the `i`-th `∄¬P`.

mod compile;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CommonGraph, Name};
use crate::pgschema::{ContentType, PgError, PgFilter, PgPathExpr, PgSchema, PgShape};
use crate::report::ValidationReport;
use crate::shacl::ShaclSchema;
use crate::shex::ShexSchema;

pub use compile::{Algebra, ShaclAlgebra, ShexAlgebra};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub location: String,
    pub rule: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub in_fragment: bool,
    pub violations: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CogslError {
    #[error("schema is not in the common fragment ({} violations)", .0.violations.len())]
    NotInFragment(Diagnostics),
    #[error(transparent)]
    Pg(#[from] PgError),
}

/// A single edge or key step.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Step {
    Fwd(Name),
    Bwd(Name),
    Key(Name),
    InvKey(Name),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Atom {
    Filter(PgFilter),
    Step(Step),
}

/// A counting path `π0 · step · π0'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleStep {
    pub pre: Vec<PgFilter>,
    pub step: Step,
    pub post: Vec<PgFilter>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommonAtom {
    Exists(PgPathExpr),
    AtLeast(usize, SingleStep),
    AtMost(usize, SingleStep),
    Closed { content: ContentType, ps: BTreeSet<Name> },
}

/// The six selector forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectorForm {
    Key(Name),
    Pred(Name),
    InvPred(Name),
    KeyIsVal(Name),
    KeyOfType(Name),
    InvKey(Name),
}

fn diag(location: String, rule: &str, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        location,
        rule: rule.to_string(),
        message: message.into(),
    }
}

fn concat_items(p: &PgPathExpr) -> Vec<&PgPathExpr> {
    match p {
        PgPathExpr::Concat { left, right } => {
            let mut v = concat_items(left);
            v.extend(concat_items(right));
            v
        }
        x => vec![x],
    }
}

/// `τ & ⊤` (either order) with `τ` free of `⊤`.
fn open_content(t: &ContentType) -> bool {
    match t {
        ContentType::Both { left, right } => match (&**left, &**right) {
            (ContentType::Any {}, x) | (x, ContentType::Any {}) => !x.contains_any(),
            _ => false,
        },
        _ => false,
    }
}

fn is_trivial_filter(p: &PgPathExpr) -> bool {
    match p {
        PgPathExpr::Filter {
            test: PgFilter::OfType { t },
        } => matches!(t, ContentType::Any {}) || (open_content(t) && content_is_trivially_open(t)),
        _ => false,
    }
}

fn content_is_trivially_open(t: &ContentType) -> bool {
    t.keys().is_empty() && crate::pgschema::content_dnf(t).iter().all(|d| d.open)
}

fn check_filter(f: &PgFilter, loc: &str, out: &mut Vec<Diagnostic>) {
    if let PgFilter::OfType { t } | PgFilter::NotOfType { t } = f {
        if !open_content(t) {
            out.push(diag(
                loc.to_string(),
                "filter",
                "content types in paths must have the form τ & ⊤ with τ free of ⊤",
            ));
        }
    }
}

/// Star-free, `¬P`-free, open content types only.
fn check_path(p: &PgPathExpr, loc: &str, out: &mut Vec<Diagnostic>) {
    match p {
        PgPathExpr::Star { .. } => out.push(diag(loc.to_string(), "path", "star-free required")),
        PgPathExpr::NotPreds { .. } => out.push(diag(
            loc.to_string(),
            "path",
            "¬P is only allowed as the ∄¬P guard of a closed-content atom",
        )),
        PgPathExpr::Filter { test } => check_filter(test, loc, out),
        PgPathExpr::Pred { .. } | PgPathExpr::KeyStep { .. } | PgPathExpr::InvKeyStep { .. } => {}
        PgPathExpr::Inv { path } => check_path(path, &format!("{loc}.path"), out),
        PgPathExpr::Concat { left, right } | PgPathExpr::Union { left, right } => {
            check_path(left, &format!("{loc}.left"), out);
            check_path(right, &format!("{loc}.right"), out);
        }
    }
}

fn as_filter(p: &PgPathExpr) -> Option<&PgFilter> {
    match p {
        PgPathExpr::Filter { test } => Some(test),
        _ => None,
    }
}

fn as_step(p: &PgPathExpr) -> Option<Step> {
    match p {
        PgPathExpr::Pred { p } => Some(Step::Fwd(p.clone())),
        PgPathExpr::Inv { path } => match &**path {
            PgPathExpr::Pred { p } => Some(Step::Bwd(p.clone())),
            _ => None,
        },
        PgPathExpr::KeyStep { k } => Some(Step::Key(k.clone())),
        PgPathExpr::InvKeyStep { k } => Some(Step::InvKey(k.clone())),
        _ => None,
    }
}

/// Reads a path as `π0 · step · π0'`, the filters being optional.
pub fn single_step(p: &PgPathExpr) -> Option<SingleStep> {
    let items = concat_items(p);
    let pos = items.iter().position(|x| as_filter(x).is_none())?;
    let step = as_step(items[pos])?;
    let pre: Option<Vec<PgFilter>> = items[..pos].iter().map(|x| as_filter(x).cloned()).collect();
    let post: Option<Vec<PgFilter>> = items[pos + 1..].iter().map(|x| as_filter(x).cloned()).collect();
    let (pre, post) = (pre?, post?);
    match step {
        Step::Key(_) if !post.is_empty() => None,
        Step::InvKey(_) if !pre.is_empty() => None,
        _ => Some(SingleStep { pre, step, post }),
    }
}

fn closed_content(a: &PgShape) -> Option<&ContentType> {
    match a {
        PgShape::Geq {
            n: 1,
            path: PgPathExpr::Filter {
                test: PgFilter::OfType { t },
            },
        } if !t.contains_any() => Some(t),
        _ => None,
    }
}

fn closure_guard(a: &PgShape) -> Option<&BTreeSet<Name>> {
    match a {
        PgShape::Leq {
            n: 0,
            path: PgPathExpr::NotPreds { ps },
        } => Some(ps),
        _ => None,
    }
}

/// Splits a shape into common atoms, or reports why it is not common.
pub fn classify_shape(shape: &PgShape, loc: &str) -> Result<Vec<CommonAtom>, Vec<Diagnostic>> {
    let mut out = Vec::new();
    let mut errs = Vec::new();
    let mut contents = Vec::new();
    let mut guards = Vec::new();
    for (i, a) in shape.atoms().into_iter().enumerate() {
        let at = format!("{loc}.atoms[{i}]");
        if let Some(t) = closed_content(a) {
            contents.push((t.clone(), out.len()));
            continue;
        }
        if let Some(ps) = closure_guard(a) {
            guards.push(ps.clone());
            continue;
        }
        match a {
            PgShape::Geq { n, path } | PgShape::Leq { n, path } => {
                let path_loc = format!("{at}.path");
                let mut local = Vec::new();
                check_path(path, &path_loc, &mut local);
                if !local.is_empty() {
                    errs.extend(local);
                    continue;
                }
                let is_geq = matches!(a, PgShape::Geq { .. });
                match (single_step(path), is_geq, *n) {
                    (Some(s), true, n) => out.push(CommonAtom::AtLeast(n, s)),
                    (Some(s), false, n) => out.push(CommonAtom::AtMost(n, s)),
                    (None, true, 1) => out.push(CommonAtom::Exists(path.clone())),
                    _ => errs.push(diag(
                        path_loc,
                        "counting",
                        "counting atoms must traverse exactly one edge or key step flanked by filters",
                    )),
                }
            }
            PgShape::And { .. } => unreachable!("atoms are flattened"),
        }
    }
    if contents.len() != guards.len() {
        errs.push(diag(
            loc.to_string(),
            "closed",
            format!(
                "closed content atoms ∃τ and guards ∄¬P must come in pairs, found {} and {}",
                contents.len(),
                guards.len()
            ),
        ));
    } else {
        for ((content, _), ps) in contents.into_iter().zip(guards) {
            out.push(CommonAtom::Closed { content, ps });
        }
    }
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(errs)
    }
}

/// Recognises the selector form from the first step of the path.
pub fn classify_selector(sel: &PgPathExpr, loc: &str) -> Result<SelectorForm, Vec<Diagnostic>> {
    let mut errs = Vec::new();
    check_path(sel, loc, &mut errs);
    let items = concat_items(sel);
    let first = items[0];
    let form = match first {
        PgPathExpr::KeyStep { k } if items.len() == 1 => Some(SelectorForm::Key(k.clone())),
        PgPathExpr::Pred { p } => Some(SelectorForm::Pred(p.clone())),
        PgPathExpr::Inv { path } => match &**path {
            PgPathExpr::Pred { p } => Some(SelectorForm::InvPred(p.clone())),
            _ => None,
        },
        PgPathExpr::Filter {
            test: PgFilter::KeyIsVal { k, .. },
        } => Some(SelectorForm::KeyIsVal(k.clone())),
        PgPathExpr::Filter {
            test: PgFilter::OfType { t },
        } => match t {
            ContentType::Both { left, right } => match (&**left, &**right) {
                (ContentType::Field { k, .. }, ContentType::Any {}) => Some(SelectorForm::KeyOfType(k.clone())),
                _ => None,
            },
            _ => None,
        },
        PgPathExpr::InvKeyStep { k } => Some(SelectorForm::InvKey(k.clone())),
        _ => None,
    };
    match form {
        Some(f) if errs.is_empty() => Ok(f),
        Some(_) => Err(errs),
        None => {
            let message = if is_trivial_filter(first) {
                "⊤ is not a common selector"
            } else {
                "selector must start with k, p, p⁻, {k:c}, ({k:β} & ⊤) or k⁻"
            };
            errs.push(diag(loc.to_string(), "selector", message));
            Err(errs)
        }
    }
}

fn name_sorts(p: &PgPathExpr, preds: &mut BTreeSet<Name>, keys: &mut BTreeSet<Name>) {
    match p {
        PgPathExpr::Filter { test } => match test {
            PgFilter::KeyIsVal { k, .. } | PgFilter::NotKeyIsVal { k, .. } => {
                keys.insert(k.clone());
            }
            PgFilter::OfType { t } | PgFilter::NotOfType { t } => keys.extend(t.keys()),
        },
        PgPathExpr::Pred { p } => {
            preds.insert(p.clone());
        }
        PgPathExpr::NotPreds { ps } => preds.extend(ps.iter().cloned()),
        PgPathExpr::KeyStep { k } | PgPathExpr::InvKeyStep { k } => {
            keys.insert(k.clone());
        }
        PgPathExpr::Inv { path } | PgPathExpr::Star { path } => name_sorts(path, preds, keys),
        PgPathExpr::Concat { left, right } | PgPathExpr::Union { left, right } => {
            name_sorts(left, preds, keys);
            name_sorts(right, preds, keys);
        }
    }
}

/// Predicates and keys a schema mentions.
pub fn schema_names(s: &PgSchema) -> (BTreeSet<Name>, BTreeSet<Name>) {
    let (mut preds, mut keys) = (BTreeSet::new(), BTreeSet::new());
    for r in &s.rules {
        name_sorts(&r.sel.0, &mut preds, &mut keys);
        for a in r.shape.atoms() {
            if let PgShape::Geq { path, .. } | PgShape::Leq { path, .. } = a {
                name_sorts(path, &mut preds, &mut keys);
            }
        }
    }
    (preds, keys)
}

pub fn check_common(s: &PgSchema) -> Diagnostics {
    let mut violations = Vec::new();
    for (i, r) in s.rules.iter().enumerate() {
        let loc = format!("rules[{i}]");
        if let Err(e) = r.check() {
            violations.push(diag(loc.clone(), "sorts", e.to_string()));
        }
        if let Err(e) = classify_selector(&r.sel.0, &format!("{loc}.sel")) {
            violations.extend(e);
        }
        if let Err(e) = classify_shape(&r.shape, &format!("{loc}.shape")) {
            violations.extend(e);
        }
    }
    let (preds, keys) = schema_names(s);
    for n in preds.intersection(&keys) {
        violations.push(diag(
            "rules".into(),
            "names",
            format!("{n} is used both as a predicate and as a key"),
        ));
    }
    Diagnostics {
        in_fragment: violations.is_empty(),
        violations,
    }
}

fn ensure_common(s: &PgSchema) -> Result<(), CogslError> {
    let d = check_common(s);
    if d.in_fragment {
        Ok(())
    } else {
        Err(CogslError::NotInFragment(d))
    }
}

/// Validation with the PG-Schema semantics, after the fragment check.
pub fn cogsl_validate(g: &CommonGraph, s: &PgSchema) -> Result<ValidationReport, CogslError> {
    ensure_common(s)?;
    Ok(crate::pgschema::pg_validate(g, s)?)
}

pub fn cogsl_to_shacl(s: &PgSchema) -> Result<ShaclSchema, CogslError> {
    ensure_common(s)?;
    let rules = s.rules.iter().map(|r| compile::rule(&ShaclAlgebra, r)).collect();
    Ok(ShaclSchema::new(rules))
}

pub fn cogsl_to_shex(s: &PgSchema) -> Result<ShexSchema, CogslError> {
    ensure_common(s)?;
    let rules = s.rules.iter().map(|r| compile::rule(&ShexAlgebra, r)).collect();
    Ok(ShexSchema::new(rules))
}

/// Union of concatenations of atoms, inverses pushed to the steps.
pub fn path_normal_form(p: &PgPathExpr) -> Vec<Vec<Atom>> {
    fn go(p: &PgPathExpr, inv: bool) -> Vec<Vec<Atom>> {
        match p {
            PgPathExpr::Filter { test } => vec![vec![Atom::Filter(test.clone())]],
            PgPathExpr::Pred { p } => vec![vec![Atom::Step(if inv { Step::Bwd(p.clone()) } else { Step::Fwd(p.clone()) })]],
            PgPathExpr::KeyStep { k } => vec![vec![Atom::Step(if inv { Step::InvKey(k.clone()) } else { Step::Key(k.clone()) })]],
            PgPathExpr::InvKeyStep { k } => vec![vec![Atom::Step(if inv { Step::Key(k.clone()) } else { Step::InvKey(k.clone()) })]],
            PgPathExpr::Inv { path } => go(path, !inv),
            PgPathExpr::Union { left, right } => {
                let mut v = go(left, inv);
                v.extend(go(right, inv));
                v
            }
            PgPathExpr::Concat { left, right } => {
                let (a, b) = if inv { (right, left) } else { (left, right) };
                let tail = go(b, inv);
                let mut out = Vec::new();
                for x in go(a, inv) {
                    for y in &tail {
                        let mut c = x.clone();
                        c.extend(y.iter().cloned());
                        out.push(c);
                    }
                }
                out
            }
            PgPathExpr::Star { .. } | PgPathExpr::NotPreds { .. } => {
                unreachable!("star and ¬P are rejected by the fragment check")
            }
        }
    }
    go(p, false)
}

/// The trivial filter `{} & ⊤`.
pub fn trivial_filter() -> PgFilter {
    PgFilter::OfType {
        t: ContentType::empty().opened(),
    }
}
