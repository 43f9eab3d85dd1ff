//! Exhaustive reference semantics for small instances. Nothing here calls
//! the evaluators it is meant to check.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::model::{CommonGraph, Direction, EdgeTriple, Focus, Name, Record, Triple, Value, ValueType};
use crate::pgschema::{ContentType, EdgeType, Labels, PgFilter, PgPathExpr};
use crate::shacl::PathExpr;
use crate::shex::sshex::{SShexExpr, STripleExpr, SignedName};
use crate::shex::{Openness, ShexShape, TripleExpr};

use super::HarnessError;

/// Largest signed neighborhood the matching oracles accept.
pub const MATCH_LIMIT: usize = 8;
/// Largest domain (elements plus the focus) the path oracles accept.
pub const PATH_LIMIT: usize = 12;

fn holds(w: &Value, t: &ValueType) -> bool {
    match (t, w) {
        (ValueType::Any, _) => true,
        (ValueType::Int, Value::Int(_)) | (ValueType::Str, Value::Str(_)) | (ValueType::Bool, Value::Bool(_)) => true,
        _ => false,
    }
}

#[derive(Debug, Clone)]
struct Arc {
    name: Name,
    dir: Direction,
    other: Focus,
}

/// Outgoing triples, then incoming ones flipped; a loop shows up in both.
fn signed(g: &CommonGraph, v: &Focus) -> Result<Vec<Arc>, HarnessError> {
    let mut out = Vec::new();
    for t in g.triples() {
        if &t.subject() == v {
            out.push(Arc {
                name: t.name().clone(),
                dir: Direction::Forward,
                other: t.object(),
            });
        }
        if &t.object() == v {
            out.push(Arc {
                name: t.name().clone(),
                dir: Direction::Inverse,
                other: t.subject(),
            });
        }
    }
    if out.len() > MATCH_LIMIT {
        return Err(HarnessError::InstanceTooLarge {
            what: "signed neighborhood",
            size: out.len(),
            limit: MATCH_LIMIT,
        });
    }
    Ok(out)
}

fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

struct Matcher<'a> {
    g: &'a CommonGraph,
    arcs: Vec<Arc>,
    memo: HashMap<(usize, u32), bool>,
}

impl Matcher<'_> {
    fn leaf(&self, e: &TripleExpr, a: &Arc) -> Result<bool, HarnessError> {
        Ok(match e {
            TripleExpr::Tc { q, dir, shape } => {
                &a.name == q && a.dir == *dir && brute_shex_satisfies(self.g, &a.other, shape)?
            }
            TripleExpr::WildOut { excluded } => a.dir == Direction::Forward && !excluded.contains(&a.name),
            TripleExpr::WildIn { excluded } => a.dir == Direction::Inverse && !excluded.contains(&a.name),
            _ => false,
        })
    }

    fn run(&mut self, e: &TripleExpr, mask: u32) -> Result<bool, HarnessError> {
        let key = (e as *const TripleExpr as usize, mask);
        if let Some(b) = self.memo.get(&key) {
            return Ok(*b);
        }
        let r = match e {
            TripleExpr::Eps => mask == 0,
            TripleExpr::Tc { .. } | TripleExpr::WildOut { .. } | TripleExpr::WildIn { .. } => {
                mask.count_ones() == 1 && self.leaf(e, &self.arcs[mask.trailing_zeros() as usize].clone())?
            }
            TripleExpr::Seq { left, right } => {
                let mut found = false;
                for s in submasks(mask) {
                    if self.run(left, s)? && self.run(right, mask ^ s)? {
                        found = true;
                        break;
                    }
                }
                found
            }
            TripleExpr::Alt { left, right } => self.run(left, mask)? || self.run(right, mask)?,
            TripleExpr::Star { expr } => {
                if mask == 0 {
                    true
                } else {
                    let low = mask & mask.wrapping_neg();
                    let mut found = false;
                    for s in submasks(mask) {
                        if s & low != 0 && self.run(expr, s)? && self.run(e, mask ^ s)? {
                            found = true;
                            break;
                        }
                    }
                    found
                }
            }
        };
        self.memo.insert(key, r);
        Ok(r)
    }
}

/// Whether some split of the signed neighborhood of `v` matches `expr`
/// followed by the wildcards of `openness`.
pub fn brute_match_oracle(g: &CommonGraph, v: &Focus, expr: &TripleExpr, openness: &Openness) -> Result<bool, HarnessError> {
    let full = expr.clone().then(openness.suffix());
    let arcs = signed(g, v)?;
    let all = (1u32 << arcs.len()) - 1;
    Matcher {
        g,
        arcs,
        memo: HashMap::new(),
    }
    .run(&full, all)
}

pub fn brute_shex_satisfies(g: &CommonGraph, v: &Focus, shape: &ShexShape) -> Result<bool, HarnessError> {
    Ok(match shape {
        ShexShape::TestConst { c } => matches!(v, Focus::Val(w) if w == c),
        ShexShape::TestType { t } => matches!(v, Focus::Val(w) if holds(w, t)),
        ShexShape::Neigh { expr, openness } => brute_match_oracle(g, v, expr, openness)?,
        ShexShape::And { left, right } => brute_shex_satisfies(g, v, left)? && brute_shex_satisfies(g, v, right)?,
        ShexShape::Or { left, right } => brute_shex_satisfies(g, v, left)? || brute_shex_satisfies(g, v, right)?,
        ShexShape::Not { shape } => !brute_shex_satisfies(g, v, shape)?,
    })
}

struct SMatcher<'a> {
    g: &'a CommonGraph,
    arcs: Vec<Arc>,
    memo: RefCell<HashMap<(usize, u32, u32, Option<u32>), bool>>,
}

impl SMatcher<'_> {
    fn run(&self, e: &STripleExpr, mask: u32) -> Result<bool, HarnessError> {
        let key = (e as *const STripleExpr as usize, mask, u32::MAX, None);
        if let Some(&hit) = self.memo.borrow().get(&key) {
            return Ok(hit);
        }
        let out = self.run_uncached(e, mask)?;
        self.memo.borrow_mut().insert(key, out);
        Ok(out)
    }

    fn run_uncached(&self, e: &STripleExpr, mask: u32) -> Result<bool, HarnessError> {
        Ok(match e {
            STripleExpr::Tc { q, dir, shape } => {
                if mask.count_ones() != 1 {
                    return Ok(false);
                }
                let a = &self.arcs[mask.trailing_zeros() as usize];
                &a.name == q
                    && a.dir == *dir
                    && match shape {
                        Some(s) => brute_sshex_satisfies(self.g, &a.other, s)?,
                        None => true,
                    }
            }
            STripleExpr::Seq { left, right } => {
                for s in submasks(mask) {
                    if self.run(left, s)? && self.run(right, mask ^ s)? {
                        return Ok(true);
                    }
                }
                false
            }
            STripleExpr::Alt { left, right } => self.run(left, mask)? || self.run(right, mask)?,
            STripleExpr::Repeat { expr, interval } => self.repeat(expr, mask, interval.min, interval.max)?,
        })
    }

    /// `mask` splits into between `min` and `max` parts, each matching `e`.
    fn repeat(&self, e: &STripleExpr, mask: u32, min: u32, max: Option<u32>) -> Result<bool, HarnessError> {
        let key = (e as *const STripleExpr as usize, mask, min, max);
        if let Some(&hit) = self.memo.borrow().get(&key) {
            return Ok(hit);
        }
        let out = self.repeat_uncached(e, mask, min, max)?;
        self.memo.borrow_mut().insert(key, out);
        Ok(out)
    }

    fn repeat_uncached(&self, e: &STripleExpr, mask: u32, min: u32, max: Option<u32>) -> Result<bool, HarnessError> {
        if max == Some(0) {
            return Ok(mask == 0);
        }
        if mask == 0 {
            return Ok(min == 0 || self.run(e, 0)?);
        }
        let low = mask & mask.wrapping_neg();
        for s in submasks(mask) {
            if s & low != 0
                && self.run(e, s)?
                && self.repeat(e, mask ^ s, min.saturating_sub(1), max.map(|m| m - 1))?
            {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// s-ShEx read directly: the neighborhood splits into a part matching the
/// expression, extra triples that fail every constraint on their name, and
/// triples the shape leaves open.
pub fn brute_sshex_satisfies(g: &CommonGraph, v: &Focus, se: &SShexExpr) -> Result<bool, HarnessError> {
    Ok(match se {
        SShexExpr::TestConst { c } => matches!(v, Focus::Val(w) if w == c),
        SShexExpr::TestType { t } => matches!(v, Focus::Val(w) if holds(w, t)),
        SShexExpr::And { left, right } => brute_sshex_satisfies(g, v, left)? && brute_sshex_satisfies(g, v, right)?,
        SShexExpr::Or { left, right } => brute_sshex_satisfies(g, v, left)? || brute_sshex_satisfies(g, v, right)?,
        SShexExpr::Not { shape } => !brute_sshex_satisfies(g, v, shape)?,
        SShexExpr::Shape { closed, extra, expr } => {
            let arcs = signed(g, v)?;
            let mentioned = expr.as_ref().map(|e| e.preds()).unwrap_or_default();
            let mut required = 0u32;
            for (i, a) in arcs.iter().enumerate() {
                let free = !mentioned.contains(&(a.name.clone(), a.dir)) && (!closed || a.dir == Direction::Inverse);
                let sn = SignedName {
                    name: a.name.clone(),
                    dir: a.dir,
                };
                let mut spare = extra.contains(&sn);
                if spare {
                    for c in expr.as_ref().map(|e| e.direct_constraints(&sn)).unwrap_or_default() {
                        let hit = match c {
                            Some(s) => brute_sshex_satisfies(g, &a.other, s)?,
                            None => true,
                        };
                        if hit {
                            spare = false;
                            break;
                        }
                    }
                }
                if !free && !spare {
                    required |= 1 << i;
                }
            }
            let all = (1u32 << arcs.len()) - 1;
            let m = SMatcher {
                g,
                arcs,
                memo: RefCell::new(HashMap::new()),
            };
            let mut ok = false;
            for s in submasks(all) {
                if s & required != required {
                    continue;
                }
                let hit = match expr {
                    Some(e) => m.run(e, s)?,
                    None => s == 0,
                };
                if hit {
                    ok = true;
                    break;
                }
            }
            ok
        }
    })
}

type Rel = BTreeSet<(Focus, Focus)>;

fn domain(g: &CommonGraph, v: &Focus) -> Result<BTreeSet<Focus>, HarnessError> {
    let mut d = g.elements();
    d.insert(v.clone());
    if d.len() > PATH_LIMIT {
        return Err(HarnessError::InstanceTooLarge {
            what: "path domain",
            size: d.len(),
            limit: PATH_LIMIT,
        });
    }
    Ok(d)
}

fn identity<'a>(xs: impl IntoIterator<Item = &'a Focus>) -> Rel {
    xs.into_iter().map(|x| (x.clone(), x.clone())).collect()
}

fn compose(a: &Rel, b: &Rel) -> Rel {
    let mut out = Rel::new();
    for (x, y) in a {
        for (y2, z) in b {
            if y == y2 {
                out.insert((x.clone(), z.clone()));
            }
        }
    }
    out
}

fn converse(a: &Rel) -> Rel {
    a.iter().map(|(x, y)| (y.clone(), x.clone())).collect()
}

/// Reflexive-transitive closure, reflexive on `base`.
fn closure(r: &Rel, base: &Rel) -> Rel {
    let mut acc: Rel = base.union(r).cloned().collect();
    loop {
        let next: Rel = acc.union(&compose(&acc, r)).cloned().collect();
        if next.len() == acc.len() {
            return acc;
        }
        acc = next;
    }
}

fn named(g: &CommonGraph, q: &Name) -> Rel {
    g.triples()
        .into_iter()
        .filter(|t| t.name() == q)
        .map(|t| (t.subject(), t.object()))
        .collect()
}

fn image(r: &Rel, v: &Focus) -> BTreeSet<Focus> {
    r.iter().filter(|(x, _)| x == v).map(|(_, y)| y.clone()).collect()
}

/// SHACL path semantics by relation algebra over the whole domain.
pub fn brute_path_oracle(g: &CommonGraph, v: &Focus, path: &PathExpr) -> Result<BTreeSet<Focus>, HarnessError> {
    let d = domain(g, v)?;
    fn rel(g: &CommonGraph, d: &BTreeSet<Focus>, p: &PathExpr) -> Rel {
        match p {
            PathExpr::Id => identity(d),
            PathExpr::Step { q } => named(g, q),
            PathExpr::Inverse { path } => converse(&rel(g, d, path)),
            PathExpr::Concat { left, right } => compose(&rel(g, d, left), &rel(g, d, right)),
            PathExpr::Union { left, right } => rel(g, d, left).union(&rel(g, d, right)).cloned().collect(),
            PathExpr::Star { path } => closure(&rel(g, d, path), &identity(d)),
        }
    }
    Ok(image(&rel(g, &d, path), v))
}

/// Record membership straight from the definition: `r ∈ τ1 & τ2` when `r`
/// is the union of a record of `τ1` and a record of `τ2`.
fn member(r: &Record, t: &ContentType) -> bool {
    match t {
        ContentType::Any {} => true,
        ContentType::Empty {} => r.is_empty(),
        ContentType::Field { k, t } => r.len() == 1 && r.get(k).is_some_and(|w| holds(w, t)),
        ContentType::Either { left, right } => member(r, left) || member(r, right),
        ContentType::Both { left, right } => splits(r).iter().any(|(a, b)| member(a, left) && member(b, right)),
    }
}

fn record_of(g: &CommonGraph, n: &crate::model::NodeId) -> Record {
    g.triples()
        .into_iter()
        .filter_map(|t| match t {
            Triple::Prop(p) if &p.node == n => Some((p.key, p.value)),
            _ => None,
        })
        .collect::<BTreeMap<_, _>>()
}

/// All ways of writing `r` as `r1 ∪ r2`.
fn splits(r: &Record) -> Vec<(Record, Record)> {
    let entries: Vec<(&Name, &Value)> = r.iter().collect();
    let pick = |m: u32| -> Record {
        entries
            .iter()
            .enumerate()
            .filter(|(i, _)| m & (1 << i) != 0)
            .map(|(_, (k, w))| ((*k).clone(), (*w).clone()))
            .collect()
    };
    let all = (1u32 << entries.len()) - 1;
    let mut out = Vec::new();
    for a in 0..=all {
        for b in submasks(all) {
            if a | b == all {
                out.push((pick(a), pick(b)));
            }
        }
    }
    out
}

fn edge_value_member(src: &Record, p: &Name, dst: &Record, t: &EdgeType) -> bool {
    match t {
        EdgeType::Et { src: s, labels, dst: d } => {
            let label_ok = match labels {
                Labels::Wildcard => true,
                Labels::Set(ps) => ps.contains(p),
            };
            label_ok && member(src, s) && member(dst, d)
        }
        EdgeType::Either { left, right } => {
            edge_value_member(src, p, dst, left) || edge_value_member(src, p, dst, right)
        }
        EdgeType::Both { left, right } => splits(src).iter().any(|(r1, s1)| {
            splits(dst).iter().any(|(r2, s2)| {
                edge_value_member(r1, p, r2, left) && edge_value_member(s1, p, s2, right)
            })
        }),
    }
}

/// `(ρ(u), p, ρ(v)) ∈ ⟦t⟧` by the value semantics of edge types.
pub fn brute_edge_type_member(g: &CommonGraph, e: &EdgeTriple, t: &EdgeType) -> bool {
    edge_value_member(&record_of(g, &e.source), &e.pred, &record_of(g, &e.target), t)
}

fn filter_ok(g: &CommonGraph, f: &Focus, test: &PgFilter) -> bool {
    let Focus::Node(n) = f else { return false };
    if !g.has_node(n) {
        return false;
    }
    let rec = record_of(g, n);
    match test {
        PgFilter::KeyIsVal { k, c } => rec.get(k) == Some(c),
        PgFilter::NotKeyIsVal { k, c } => rec.get(k) != Some(c),
        PgFilter::OfType { t } => member(&rec, t),
        PgFilter::NotOfType { t } => !member(&rec, t),
    }
}

/// PG-path semantics by relation algebra. Filters and the reflexive part of
/// `*` range over the nodes of the graph.
pub fn brute_pg_path_oracle(g: &CommonGraph, v: &Focus, path: &PgPathExpr) -> Result<BTreeSet<Focus>, HarnessError> {
    domain(g, v)?;
    let nodes: BTreeSet<Focus> = g.nodes().iter().map(|n| Focus::Node(n.clone())).collect();
    fn edges_where(g: &CommonGraph, keep: impl Fn(&Name) -> bool) -> Rel {
        g.triples()
            .into_iter()
            .filter_map(|t| match t {
                Triple::Edge(e) if keep(&e.pred) => Some((Focus::Node(e.source), Focus::Node(e.target))),
                _ => None,
            })
            .collect()
    }
    fn props_named(g: &CommonGraph, k: &Name) -> Rel {
        g.triples()
            .into_iter()
            .filter_map(|t| match t {
                Triple::Prop(p) if &p.key == k => Some((Focus::Node(p.node), Focus::Val(p.value))),
                _ => None,
            })
            .collect()
    }
    fn rel(g: &CommonGraph, nodes: &BTreeSet<Focus>, p: &PgPathExpr) -> Rel {
        match p {
            PgPathExpr::Filter { test } => nodes
                .iter()
                .filter(|n| filter_ok(g, n, test))
                .map(|n| (n.clone(), n.clone()))
                .collect(),
            PgPathExpr::Pred { p } => edges_where(g, |q| q == p),
            PgPathExpr::NotPreds { ps } => edges_where(g, |q| !ps.contains(q)),
            PgPathExpr::KeyStep { k } => props_named(g, k),
            PgPathExpr::InvKeyStep { k } => converse(&props_named(g, k)),
            PgPathExpr::Inv { path } => converse(&rel(g, nodes, path)),
            PgPathExpr::Concat { left, right } => compose(&rel(g, nodes, left), &rel(g, nodes, right)),
            PgPathExpr::Union { left, right } => rel(g, nodes, left).union(&rel(g, nodes, right)).cloned().collect(),
            PgPathExpr::Star { path } => closure(&rel(g, nodes, path), &identity(nodes)),
        }
    }
    Ok(image(&rel(g, &nodes, path), v))
}
