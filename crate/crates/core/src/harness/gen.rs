//! Seeded generators for graphs, schemas and expressions.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::model::{CommonGraph, Direction, EdgeTriple, Name, NodeId, PropTriple, Value, ValueType};
use crate::pgschema::{ContentType, EdgeType, Labels, PgFilter, PgPathExpr, PgRule, PgSchema, PgShape};
use crate::shacl::{PathExpr, ShaclRule, ShaclSchema, ShaclSelector, ShaclShape};
use crate::shex::sshex::{Interval, SShexExpr, STripleExpr, SignedName};
use crate::shex::{Openness, ShexRule, ShexSchema, ShexSelector, ShexShape, TripleExpr};

use super::GenParams;

const GRAPH: u64 = 0;
const SCHEMA: u64 = 1;

fn pick<T: Clone>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    xs.choose(rng).expect("non-empty pool").clone()
}

fn subset<T: Clone>(rng: &mut ChaCha8Rng, xs: &[T]) -> Vec<T> {
    xs.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()
}

fn value_type(rng: &mut ChaCha8Rng) -> ValueType {
    pick(rng, &[ValueType::Int, ValueType::Str, ValueType::Bool, ValueType::Any])
}

/// Nodes `n0 … n(k-1)`; each ordered pair gets an edge with probability
/// `edge_density` and each node–key pair a value with `prop_density`.
pub fn gen_graph(p: &GenParams) -> CommonGraph {
    let mut rng = p.rng(GRAPH);
    let nodes: Vec<NodeId> = (0..p.node_count).map(|i| NodeId::new(format!("n{i}"))).collect();
    let (preds, keys, values) = (p.preds(), p.keys(), p.values());
    let mut edges = Vec::new();
    for s in &nodes {
        for o in &nodes {
            if rng.gen_bool(p.edge_density) {
                edges.push(EdgeTriple::new(s.as_str(), pick(&mut rng, &preds).as_str(), o.as_str()));
            }
        }
    }
    let mut props = Vec::new();
    for n in &nodes {
        for k in &keys {
            if rng.gen_bool(p.prop_density) {
                props.push(PropTriple::new(n.as_str(), k.as_str(), pick(&mut rng, &values)));
            }
        }
    }
    CommonGraph::build(edges, props).expect("generated names are well sorted")
}

/// A content type without `⊤`.
pub fn gen_content(rng: &mut ChaCha8Rng, keys: &[Name], depth: usize) -> ContentType {
    if depth == 0 || rng.gen_bool(0.5) {
        if rng.gen_bool(0.15) {
            return ContentType::empty();
        }
        return ContentType::Field {
            k: pick(rng, keys),
            t: value_type(rng),
        };
    }
    let (a, b) = (gen_content(rng, keys, depth - 1), gen_content(rng, keys, depth - 1));
    if rng.gen_bool(0.5) {
        ContentType::both(a, b)
    } else {
        ContentType::either(a, b)
    }
}

struct Pools {
    preds: Vec<Name>,
    keys: Vec<Name>,
    values: Vec<Value>,
}

impl Pools {
    fn of(p: &GenParams) -> Self {
        Pools {
            preds: p.preds(),
            keys: p.keys(),
            values: p.values(),
        }
    }

    fn filter(&self, rng: &mut ChaCha8Rng) -> PgFilter {
        match rng.gen_range(0..4) {
            0 => PgFilter::KeyIsVal {
                k: pick(rng, &self.keys),
                c: pick(rng, &self.values),
            },
            1 => PgFilter::NotKeyIsVal {
                k: pick(rng, &self.keys),
                c: pick(rng, &self.values),
            },
            2 => PgFilter::OfType {
                t: gen_content(rng, &self.keys, 1).opened(),
            },
            _ => PgFilter::NotOfType {
                t: gen_content(rng, &self.keys, 1).opened(),
            },
        }
    }

    fn filters(&self, rng: &mut ChaCha8Rng) -> Vec<PgFilter> {
        (0..rng.gen_range(0..=1)).map(|_| self.filter(rng)).collect()
    }

    /// Star-free node-to-node path.
    fn node_path(&self, rng: &mut ChaCha8Rng, depth: usize) -> PgPathExpr {
        if depth == 0 || rng.gen_bool(0.45) {
            return match rng.gen_range(0..5) {
                0 | 1 => PgPathExpr::pred(pick(rng, &self.preds).as_str()),
                2 => PgPathExpr::pred(pick(rng, &self.preds).as_str()).inv(),
                _ => PgPathExpr::filter(self.filter(rng)),
            };
        }
        match rng.gen_range(0..5) {
            0 => self.node_path(rng, depth - 1).inv(),
            1 => self.node_path(rng, depth - 1).union(self.node_path(rng, depth - 1)),
            _ => self.node_path(rng, depth - 1).concat(self.node_path(rng, depth - 1)),
        }
    }

    /// Star-free path from a node, possibly ending in a key step.
    fn path(&self, rng: &mut ChaCha8Rng, depth: usize) -> PgPathExpr {
        let p = self.node_path(rng, depth);
        if rng.gen_bool(0.25) {
            p.concat(PgPathExpr::key(pick(rng, &self.keys).as_str()))
        } else {
            p
        }
    }

    fn chain(parts: impl IntoIterator<Item = PgPathExpr>) -> PgPathExpr {
        parts.into_iter().reduce(|a, b| a.concat(b)).expect("non-empty chain")
    }

    fn count(&self, rng: &mut ChaCha8Rng, max_n: usize, from_value: bool) -> PgShape {
        let n = rng.gen_range(0..=max_n);
        let path = if from_value {
            let k = PgPathExpr::inv_key(pick(rng, &self.keys).as_str());
            Self::chain(std::iter::once(k).chain(self.filters(rng).into_iter().map(PgPathExpr::filter)))
        } else {
            let pre = self.filters(rng).into_iter().map(PgPathExpr::filter);
            let (step, keyed) = match rng.gen_range(0..4) {
                0 => (PgPathExpr::key(pick(rng, &self.keys).as_str()), true),
                1 => (PgPathExpr::pred(pick(rng, &self.preds).as_str()).inv(), false),
                _ => (PgPathExpr::pred(pick(rng, &self.preds).as_str()), false),
            };
            let post: Vec<_> = if keyed { Vec::new() } else { self.filters(rng) };
            Self::chain(pre.chain(std::iter::once(step)).chain(post.into_iter().map(PgPathExpr::filter)))
        };
        if rng.gen_bool(0.5) {
            PgShape::geq(n, path)
        } else {
            PgShape::leq(n, path)
        }
    }

    fn atom(&self, rng: &mut ChaCha8Rng, max_n: usize, from_value: bool) -> PgShape {
        if from_value {
            return if rng.gen_bool(0.5) {
                self.count(rng, max_n, true)
            } else {
                PgShape::exists(PgPathExpr::inv_key(pick(rng, &self.keys).as_str()).concat(self.path(rng, 2)))
            };
        }
        match rng.gen_range(0..5) {
            0 | 1 => PgShape::exists(self.path(rng, 2)),
            2 | 3 => self.count(rng, max_n, false),
            _ => {
                let t = gen_content(rng, &self.keys, 2);
                let ps = subset(rng, &self.preds);
                PgShape::exists(PgPathExpr::of_type(t)).and(PgShape::not_exists(PgPathExpr::NotPreds {
                    ps: ps.into_iter().collect(),
                }))
            }
        }
    }

    /// A selector in one of the six common forms, with its source sort.
    fn selector(&self, rng: &mut ChaCha8Rng) -> (PgPathExpr, bool) {
        let rest = |rng: &mut ChaCha8Rng, this: &Self, head: PgPathExpr| {
            if rng.gen_bool(0.5) {
                head.concat(this.path(rng, 1))
            } else {
                head
            }
        };
        match rng.gen_range(0..6) {
            0 => (PgPathExpr::key(pick(rng, &self.keys).as_str()), false),
            1 => {
                let head = PgPathExpr::pred(pick(rng, &self.preds).as_str());
                (rest(rng, self, head), false)
            }
            2 => {
                let head = PgPathExpr::pred(pick(rng, &self.preds).as_str()).inv();
                (rest(rng, self, head), false)
            }
            3 => {
                let head = PgPathExpr::key_is_val(pick(rng, &self.keys).as_str(), pick(rng, &self.values));
                (rest(rng, self, head), false)
            }
            4 => {
                let head = PgPathExpr::of_type(ContentType::field(pick(rng, &self.keys).as_str(), value_type(rng)).opened());
                (rest(rng, self, head), false)
            }
            _ => {
                let head = PgPathExpr::inv_key(pick(rng, &self.keys).as_str());
                let sel = if rng.gen_bool(0.5) {
                    head.concat(self.path(rng, 1))
                } else {
                    head
                };
                (sel, true)
            }
        }
    }
}

/// Splits the budget into rules, each with at least one atom.
fn rule_sizes(rng: &mut ChaCha8Rng, budget: usize) -> Vec<usize> {
    let rules = rng.gen_range(1..=budget.min(3));
    let per = (budget / rules).max(1);
    (0..rules).map(|_| rng.gen_range(1..=per)).collect()
}

/// A CoGSL schema; it passes the fragment check by construction.
pub fn gen_cogsl_schema(p: &GenParams) -> PgSchema {
    let mut rng = p.rng(SCHEMA);
    let pools = Pools::of(p);
    let rules = rule_sizes(&mut rng, p.schema_size_budget)
        .into_iter()
        .map(|atoms| {
            let (sel, from_value) = pools.selector(&mut rng);
            let shape = (0..atoms)
                .map(|_| pools.atom(&mut rng, p.max_count_n, from_value))
                .reduce(|a, b| a.and(b))
                .expect("at least one atom");
            PgRule::new(sel, shape)
        })
        .collect();
    PgSchema::new(rules)
}

/// A PG path of at most the given depth, stars and `¬P` included.
pub fn gen_pg_path(rng: &mut ChaCha8Rng, p: &GenParams, depth: usize) -> PgPathExpr {
    let pools = Pools::of(p);
    fn go(rng: &mut ChaCha8Rng, pools: &Pools, depth: usize) -> PgPathExpr {
        if depth <= 1 || rng.gen_bool(0.3) {
            return match rng.gen_range(0..6) {
                0 | 1 => PgPathExpr::pred(pick(rng, &pools.preds).as_str()),
                2 => PgPathExpr::NotPreds {
                    ps: subset(rng, &pools.preds).into_iter().collect(),
                },
                _ => PgPathExpr::filter(pools.filter(rng)),
            };
        }
        match rng.gen_range(0..5) {
            0 => go(rng, pools, depth - 1).inv(),
            1 => go(rng, pools, depth - 1).union(go(rng, pools, depth - 1)),
            2 => go(rng, pools, depth - 1).star(),
            _ => go(rng, pools, depth - 1).concat(go(rng, pools, depth - 1)),
        }
    }
    let body = go(rng, &pools, depth);
    match rng.gen_range(0..6) {
        0 => body.concat(PgPathExpr::key(pick(rng, &pools.keys).as_str())),
        1 => PgPathExpr::key(pick(rng, &pools.keys).as_str()),
        _ => body,
    }
}

/// A SHACL path of the given depth over the predicate and key pools.
pub fn gen_shacl_path(rng: &mut ChaCha8Rng, names: &[Name], depth: usize) -> PathExpr {
    if depth <= 1 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.1) {
            PathExpr::Id
        } else {
            PathExpr::step(pick(rng, names).as_str())
        };
    }
    match rng.gen_range(0..5) {
        0 => gen_shacl_path(rng, names, depth - 1).inv(),
        1 => gen_shacl_path(rng, names, depth - 1).union(gen_shacl_path(rng, names, depth - 1)),
        2 => gen_shacl_path(rng, names, depth - 1).star(),
        _ => gen_shacl_path(rng, names, depth - 1).concat(gen_shacl_path(rng, names, depth - 1)),
    }
}

fn gen_shacl_shape(rng: &mut ChaCha8Rng, p: &GenParams, names: &[Name], consts: &[Value], depth: usize) -> ShaclShape {
    let k = p.max_count_n;
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 => ShaclShape::Top,
            1 => ShaclShape::test_const(pick(rng, consts)),
            2 => ShaclShape::test_type(value_type(rng)),
            3 => ShaclShape::closed(subset(rng, names).iter().map(|n| n.as_str().to_string())),
            _ => {
                let path = gen_shacl_path(rng, names, 2);
                let q = pick(rng, names);
                if rng.gen_bool(0.5) {
                    ShaclShape::Eq { path, p: q }
                } else {
                    ShaclShape::Disj { path, p: q }
                }
            }
        };
    }
    let sub = |rng: &mut ChaCha8Rng| gen_shacl_shape(rng, p, names, consts, depth - 1);
    match rng.gen_range(0..6) {
        0 => sub(rng).not(),
        1 => sub(rng).and(sub(rng)),
        2 => sub(rng).or(sub(rng)),
        3 | 4 => {
            let n = rng.gen_range(0..=k);
            let path = gen_shacl_path(rng, names, 3);
            ShaclShape::geq(n, path, sub(rng))
        }
        _ => {
            let n = rng.gen_range(0..=k);
            let path = gen_shacl_path(rng, names, 3);
            ShaclShape::leq(n, path, sub(rng))
        }
    }
}

/// A SHACL schema over the predicate pool whose counting bounds stay within
/// `max_count_n` and whose constants are drawn from `consts`.
pub fn gen_shacl_schema(p: &GenParams, consts: &[Value]) -> ShaclSchema {
    let mut rng = p.rng(SCHEMA);
    let names = p.preds();
    let rules = rule_sizes(&mut rng, p.schema_size_budget)
        .into_iter()
        .map(|size| {
            let sel = match rng.gen_range(0..5) {
                0 => ShaclSelector::TestConst { c: pick(&mut rng, consts) },
                1 | 2 => ShaclSelector::inc(pick(&mut rng, &names).as_str()),
                _ => ShaclSelector::out(pick(&mut rng, &names).as_str()),
            };
            let shape = gen_shacl_shape(&mut rng, p, &names, consts, size.min(3));
            ShaclRule { sel, shape }
        })
        .collect();
    ShaclSchema::new(rules)
}

fn openness(rng: &mut ChaCha8Rng, names: &[Name]) -> Openness {
    let r: BTreeSet<Name> = subset(rng, names).into_iter().collect();
    if rng.gen_bool(0.3) {
        Openness::HalfOpen { r }
    } else {
        Openness::Open {
            r,
            q: subset(rng, names).into_iter().collect(),
        }
    }
}

/// A wildcard-free triple expression; leaves carry nested shapes while
/// `nest > 0`.
pub fn gen_triple_expr(rng: &mut ChaCha8Rng, names: &[Name], consts: &[Value], depth: usize, nest: usize) -> TripleExpr {
    if depth <= 1 || rng.gen_bool(0.3) {
        if rng.gen_bool(0.1) {
            return TripleExpr::Eps;
        }
        let dir = if rng.gen_bool(0.7) { Direction::Forward } else { Direction::Inverse };
        let shape = if nest > 0 && rng.gen_bool(0.5) {
            gen_shex_shape(rng, names, consts, 2, nest - 1)
        } else {
            ShexShape::top()
        };
        return TripleExpr::tc(pick(rng, names).as_str(), dir, shape);
    }
    let sub = |rng: &mut ChaCha8Rng| gen_triple_expr(rng, names, consts, depth - 1, nest);
    match rng.gen_range(0..4) {
        0 => sub(rng).then(sub(rng)),
        1 => sub(rng).alt(sub(rng)),
        2 => sub(rng).star(),
        _ => sub(rng).then(sub(rng)).star(),
    }
}

pub fn gen_shex_shape(rng: &mut ChaCha8Rng, names: &[Name], consts: &[Value], depth: usize, nest: usize) -> ShexShape {
    if depth <= 1 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..6) {
            0 => ShexShape::test_const(pick(rng, consts)),
            1 => ShexShape::test_type(value_type(rng)),
            _ => ShexShape::Neigh {
                expr: gen_triple_expr(rng, names, consts, 3, nest),
                openness: openness(rng, names),
            },
        };
    }
    let sub = |rng: &mut ChaCha8Rng| gen_shex_shape(rng, names, consts, depth - 1, nest);
    match rng.gen_range(0..4) {
        0 => sub(rng).not(),
        1 => sub(rng).and(sub(rng)),
        _ => sub(rng).or(sub(rng)),
    }
}

/// A ShEx schema over both name pools with constants drawn from `consts`.
pub fn gen_shex_schema(p: &GenParams, consts: &[Value]) -> ShexSchema {
    let mut rng = p.rng(SCHEMA);
    let (preds, keys) = (p.preds(), p.keys());
    let names: Vec<Name> = preds.iter().chain(&keys).cloned().collect();
    let rules = rule_sizes(&mut rng, p.schema_size_budget)
        .into_iter()
        .map(|size| {
            let sel = match rng.gen_range(0..6) {
                0 => ShexSelector::TestConst { c: pick(&mut rng, consts) },
                1 => ShexSelector::OutConst {
                    q: pick(&mut rng, &keys),
                    c: pick(&mut rng, consts),
                },
                2 => ShexSelector::inc(pick(&mut rng, &names).as_str()),
                _ => ShexSelector::out(pick(&mut rng, &names).as_str()),
            };
            let shape = gen_shex_shape(&mut rng, &names, consts, size.min(3), 1);
            ShexRule { sel, shape }
        })
        .collect();
    ShexSchema::new(rules)
}

fn interval(rng: &mut ChaCha8Rng) -> Interval {
    let min = rng.gen_range(0..=2);
    let max = match rng.gen_range(0..3) {
        0 => None,
        _ => Some(min + rng.gen_range(0..=2)),
    };
    Interval::new(min, max).expect("min ≤ max")
}

fn gen_sshex_te(rng: &mut ChaCha8Rng, names: &[Name], consts: &[Value], depth: usize, nest: usize) -> STripleExpr {
    if depth <= 1 || rng.gen_bool(0.3) {
        let dir = if rng.gen_bool(0.7) { Direction::Forward } else { Direction::Inverse };
        let q = pick(rng, names);
        return if nest > 0 && rng.gen_bool(0.5) {
            STripleExpr::tc(q.as_str(), dir, gen_sshex_shape(rng, names, consts, 2, nest - 1))
        } else {
            STripleExpr::dot(q.as_str(), dir)
        };
    }
    let sub = |rng: &mut ChaCha8Rng| gen_sshex_te(rng, names, consts, depth - 1, nest);
    match rng.gen_range(0..3) {
        0 => sub(rng).then(sub(rng)),
        1 => sub(rng).alt(sub(rng)),
        _ => sub(rng).repeat(interval(rng)),
    }
}

/// An s-ShEx shape expression with arbitrary intervals and extra sets.
pub fn gen_sshex_shape(rng: &mut ChaCha8Rng, names: &[Name], consts: &[Value], depth: usize, nest: usize) -> SShexExpr {
    if depth <= 1 || rng.gen_bool(0.35) {
        return match rng.gen_range(0..6) {
            0 => SShexExpr::TestConst { c: pick(rng, consts) },
            1 => SShexExpr::TestType { t: value_type(rng) },
            _ => {
                let extra: Vec<SignedName> = subset(rng, names)
                    .into_iter()
                    .map(|n| SignedName {
                        name: n,
                        dir: if rng.gen_bool(0.7) { Direction::Forward } else { Direction::Inverse },
                    })
                    .collect();
                let expr = if rng.gen_bool(0.1) {
                    None
                } else {
                    Some(gen_sshex_te(rng, names, consts, 3, nest))
                };
                SShexExpr::shape(rng.gen_bool(0.4), extra, expr)
            }
        };
    }
    let sub = |rng: &mut ChaCha8Rng| gen_sshex_shape(rng, names, consts, depth - 1, nest);
    match rng.gen_range(0..4) {
        0 => sub(rng).not(),
        1 => sub(rng).and(sub(rng)),
        _ => sub(rng).or(sub(rng)),
    }
}

fn labels(rng: &mut ChaCha8Rng, preds: &[Name]) -> Labels {
    if rng.gen_bool(0.25) {
        Labels::Wildcard
    } else {
        Labels::set(subset(rng, preds).iter().map(|n| n.as_str().to_string()))
    }
}

fn endpoint(rng: &mut ChaCha8Rng, keys: &[Name]) -> ContentType {
    match rng.gen_range(0..4) {
        0 => ContentType::any(),
        1 => gen_content(rng, keys, 1).opened(),
        _ => gen_content(rng, keys, 1),
    }
}

/// An edge type built from `&` and `|` over atomic edge types.
pub fn gen_edge_type(rng: &mut ChaCha8Rng, p: &GenParams, depth: usize) -> EdgeType {
    let (preds, keys) = (p.preds(), p.keys());
    if depth <= 1 || rng.gen_bool(0.4) {
        return EdgeType::et(endpoint(rng, &keys), labels(rng, &preds), endpoint(rng, &keys));
    }
    let (a, b) = (gen_edge_type(rng, p, depth - 1), gen_edge_type(rng, p, depth - 1));
    if rng.gen_bool(0.5) {
        a.both(b)
    } else {
        a.either(b)
    }
}
