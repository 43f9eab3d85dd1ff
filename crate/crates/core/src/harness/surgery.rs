//! Graph doubles, copyswap and star-shaped neighbourhoods.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::model::{CommonGraph, EdgeTriple, Name, NodeId, PropTriple, Value};

use super::{GenParams, HarnessError};

/// How a double treats property values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueCopy {
    /// The copy points at the same values.
    Shared,
    /// Int and string values get fresh counterparts in the copy; booleans are
    /// shared.
    Fresh,
}

fn fresh_node(n: &NodeId, taken: &BTreeSet<NodeId>) -> NodeId {
    let mut id = format!("{}'", n.as_str());
    while taken.contains(&NodeId::new(id.as_str())) {
        id.push('\'');
    }
    NodeId::new(id)
}

fn fresh_values(g: &CommonGraph, avoid: &BTreeSet<Value>) -> BTreeMap<Value, Value> {
    let mut taken: BTreeSet<Value> = g.values().into_iter().chain(avoid.iter().cloned()).collect();
    let mut next_int = taken
        .iter()
        .filter_map(|v| match v {
            Value::Int(i) => Some(*i),
            _ => None,
        })
        .max()
        .map_or(0, |m| m.saturating_add(1));
    let mut map = BTreeMap::new();
    for v in g.values() {
        let w = match &v {
            Value::Int(_) => {
                while taken.contains(&Value::Int(next_int)) {
                    next_int += 1;
                }
                Value::Int(next_int)
            }
            Value::Str(s) => {
                let mut t = format!("{s}'");
                while taken.contains(&Value::Str(t.clone())) {
                    t.push('\'');
                }
                Value::Str(t)
            }
            Value::Bool(_) => v.clone(),
        };
        taken.insert(w.clone());
        map.insert(v, w);
    }
    map
}

fn double_parts(
    g: &CommonGraph,
    policy: ValueCopy,
    avoid: &BTreeSet<Value>,
) -> (Vec<EdgeTriple>, Vec<PropTriple>, BTreeMap<NodeId, NodeId>) {
    let mut taken = g.nodes().clone();
    let mut d = BTreeMap::new();
    for n in g.nodes() {
        let m = fresh_node(n, &taken);
        taken.insert(m.clone());
        d.insert(n.clone(), m);
    }
    let values = match policy {
        ValueCopy::Shared => BTreeMap::new(),
        ValueCopy::Fresh => fresh_values(g, avoid),
    };
    let mut edges: Vec<EdgeTriple> = g.edges().cloned().collect();
    edges.extend(g.edges().map(|e| EdgeTriple {
        source: d[&e.source].clone(),
        pred: e.pred.clone(),
        target: d[&e.target].clone(),
    }));
    let mut props: Vec<PropTriple> = g.props().collect();
    props.extend(g.props().map(|p| PropTriple {
        node: d[&p.node].clone(),
        key: p.key.clone(),
        value: values.get(&p.value).cloned().unwrap_or(p.value),
    }));
    (edges, props, d)
}

/// `G` together with a disjoint copy of it, and the node bijection into the
/// copy. Values are copied with [`ValueCopy::Fresh`].
pub fn double(g: &CommonGraph) -> (CommonGraph, BTreeMap<NodeId, NodeId>) {
    let (edges, props, d) = double_parts(g, ValueCopy::Fresh, &BTreeSet::new());
    (CommonGraph::build(edges, props).expect("a double is well formed"), d)
}

/// The double of `g` with `e = (u,p,v)` and its copy replaced by the crossed
/// edges `(u,p,d(v))` and `(d(u),p,v)`.
pub fn copyswap(g: &CommonGraph, e: &EdgeTriple) -> Result<CommonGraph, HarnessError> {
    copyswap_with(g, e, ValueCopy::Fresh, &BTreeSet::new())
}

/// [`copyswap`] with an explicit value policy; fresh values avoid `avoid`.
pub fn copyswap_with(
    g: &CommonGraph,
    e: &EdgeTriple,
    policy: ValueCopy,
    avoid: &BTreeSet<Value>,
) -> Result<CommonGraph, HarnessError> {
    if !g.contains_edge(e) {
        return Err(HarnessError::EdgeNotInGraph(e.clone()));
    }
    let (edges, props, d) = double_parts(g, policy, avoid);
    let (du, dv) = (d[&e.source].clone(), d[&e.target].clone());
    let de = EdgeTriple {
        source: du.clone(),
        pred: e.pred.clone(),
        target: dv.clone(),
    };
    let mut edges: Vec<EdgeTriple> = edges.into_iter().filter(|x| x != e && *x != de).collect();
    edges.push(EdgeTriple {
        source: e.source.clone(),
        pred: e.pred.clone(),
        target: dv,
    });
    edges.push(EdgeTriple {
        source: du,
        pred: e.pred.clone(),
        target: e.target.clone(),
    });
    Ok(CommonGraph::build(edges, props)?)
}

/// A star around `c`: every predicate of `preds` leads from `c` to between
/// `n` and `n + 2` fresh targets, all distinct.
pub fn gen_cn_neighbourhood(c: &NodeId, n: usize, preds: &BTreeSet<Name>, p: &GenParams) -> CommonGraph {
    let mut rng = p.rng(2);
    let mut edges = Vec::new();
    let mut t = 0;
    for q in preds {
        for _ in 0..n + rng.gen_range(0..=2) {
            edges.push(EdgeTriple::new(c.as_str(), q.as_str(), format!("{}_t{t}", c.as_str())));
            t += 1;
        }
    }
    CommonGraph::build(edges, []).expect("edges only")
}

/// Same occurring predicates and keys.
pub fn similar(g1: &CommonGraph, g2: &CommonGraph) -> bool {
    g1.preds() == g2.preds() && g1.keys() == g2.keys()
}
