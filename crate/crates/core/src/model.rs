//! Common graph data model: nodes, values, names, triples and neighborhoods.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque node identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A predicate or key name. Whether a name is a predicate or a key is decided
/// by how a graph uses it; the two namespaces must not overlap.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Name(pub String);

impl Name {
    pub fn new(name: impl Into<String>) -> Self {
        Name(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name(s.to_string())
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

/// Atomic value. Equality compares tag and payload, so `Int(1) != Str("1")`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "t", content = "val", rename_all = "lowercase", deny_unknown_fields)]
pub enum Value {
    Int(i64),
    Str(String),
    Bool(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

/// Value type identifier. Serialized as a plain string; anything other than
/// the builtins is a custom type looked up in a [`TypeRegistry`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum ValueType {
    Int,
    Str,
    Bool,
    Any,
    Custom(String),
}

impl From<String> for ValueType {
    fn from(s: String) -> Self {
        match s.as_str() {
            "int" => ValueType::Int,
            "str" => ValueType::Str,
            "bool" => ValueType::Bool,
            "any" => ValueType::Any,
            _ => ValueType::Custom(s),
        }
    }
}

impl From<ValueType> for String {
    fn from(t: ValueType) -> Self {
        t.to_string()
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Int => f.write_str("int"),
            ValueType::Str => f.write_str("str"),
            ValueType::Bool => f.write_str("bool"),
            ValueType::Any => f.write_str("any"),
            ValueType::Custom(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown value type `{0}`")]
pub struct UnknownValueType(pub String);

type Membership = Arc<dyn Fn(&Value) -> bool + Send + Sync>;

/// Registry of custom value types. Builtins are always available.
#[derive(Clone, Default)]
pub struct TypeRegistry {
    custom: BTreeMap<String, Membership>,
}

impl fmt::Debug for TypeRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TypeRegistry")
            .field("custom", &self.custom.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl TypeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        member: impl Fn(&Value) -> bool + Send + Sync + 'static,
    ) {
        self.custom.insert(name.into(), Arc::new(member));
    }

    pub fn is_known(&self, t: &ValueType) -> bool {
        match t {
            ValueType::Custom(name) => self.custom.contains_key(name),
            _ => true,
        }
    }

    pub fn member(&self, w: &Value, t: &ValueType) -> Result<bool, UnknownValueType> {
        Ok(match t {
            ValueType::Int => matches!(w, Value::Int(_)),
            ValueType::Str => matches!(w, Value::Str(_)),
            ValueType::Bool => matches!(w, Value::Bool(_)),
            ValueType::Any => true,
            ValueType::Custom(name) => match self.custom.get(name) {
                Some(f) => f(w),
                None => return Err(UnknownValueType(name.clone())),
            },
        })
    }

    /// Membership where an unregistered type accepts nothing. Schemas are
    /// checked for unknown types at load time, so evaluators use this.
    pub fn holds(&self, w: &Value, t: &ValueType) -> bool {
        self.member(w, t).unwrap_or(false)
    }
}

/// Builtin-only membership test.
pub fn value_type_member(w: &Value, t: &ValueType) -> Result<bool, UnknownValueType> {
    TypeRegistry::default().member(w, t)
}

/// A record: the key-value pairs of one node.
pub type Record = BTreeMap<Name, Value>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeTriple {
    #[serde(rename = "s")]
    pub source: NodeId,
    #[serde(rename = "p")]
    pub pred: Name,
    #[serde(rename = "o")]
    pub target: NodeId,
}

impl EdgeTriple {
    pub fn new(source: impl Into<String>, pred: impl Into<String>, target: impl Into<String>) -> Self {
        EdgeTriple {
            source: NodeId(source.into()),
            pred: Name(pred.into()),
            target: NodeId(target.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropTriple {
    #[serde(rename = "n")]
    pub node: NodeId,
    #[serde(rename = "k")]
    pub key: Name,
    #[serde(rename = "v")]
    pub value: Value,
}

impl PropTriple {
    pub fn new(node: impl Into<String>, key: impl Into<String>, value: impl Into<Value>) -> Self {
        PropTriple {
            node: NodeId(node.into()),
            key: Name(key.into()),
            value: value.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Triple {
    Edge(EdgeTriple),
    Prop(PropTriple),
}

impl Triple {
    pub fn name(&self) -> &Name {
        match self {
            Triple::Edge(e) => &e.pred,
            Triple::Prop(p) => &p.key,
        }
    }

    pub fn subject(&self) -> Focus {
        match self {
            Triple::Edge(e) => Focus::Node(e.source.clone()),
            Triple::Prop(p) => Focus::Node(p.node.clone()),
        }
    }

    pub fn object(&self) -> Focus {
        match self {
            Triple::Edge(e) => Focus::Node(e.target.clone()),
            Triple::Prop(p) => Focus::Val(p.value.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "fwd")]
    Forward,
    #[serde(rename = "inv")]
    Inverse,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignedTriple {
    pub base: Triple,
    pub direction: Direction,
}

impl SignedTriple {
    /// The endpoint opposite to the focus the triple was collected for.
    pub fn other(&self) -> Focus {
        match self.direction {
            Direction::Forward => self.base.object(),
            Direction::Inverse => self.base.subject(),
        }
    }
}

/// The element a shape is evaluated at.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Focus {
    Node(NodeId),
    Val(Value),
}

impl Focus {
    pub fn node(id: impl Into<String>) -> Self {
        Focus::Node(NodeId(id.into()))
    }

    pub fn val(v: impl Into<Value>) -> Self {
        Focus::Val(v.into())
    }

    pub fn as_node(&self) -> Option<&NodeId> {
        match self {
            Focus::Node(n) => Some(n),
            Focus::Val(_) => None,
        }
    }

    pub fn is_node(&self) -> bool {
        matches!(self, Focus::Node(_))
    }
}

impl fmt::Display for Focus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Focus::Node(n) => write!(f, "{n}"),
            Focus::Val(v) => write!(f, "{v}"),
        }
    }
}

/// One adjacent triple seen from a focus: the name and the opposite endpoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Adjacent {
    pub name: Name,
    pub other: Focus,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node `{node}` has two values for key `{key}`: {first} and {second}")]
    DuplicateKeyValue {
        node: NodeId,
        key: Name,
        first: Value,
        second: Value,
    },
    #[error("name `{0}` is used both as a predicate and as a key")]
    SortClash(Name),
}

/// An immutable common graph: a set of edges plus a functional property map.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommonGraph {
    edges: BTreeSet<EdgeTriple>,
    props: BTreeMap<(NodeId, Name), Value>,
    nodes: BTreeSet<NodeId>,
    preds: BTreeSet<Name>,
    keys: BTreeSet<Name>,
    out: BTreeMap<Focus, Vec<Adjacent>>,
    inc: BTreeMap<Focus, Vec<Adjacent>>,
}

impl CommonGraph {
    pub fn build(
        edges: impl IntoIterator<Item = EdgeTriple>,
        props: impl IntoIterator<Item = PropTriple>,
    ) -> Result<Self, GraphError> {
        let edges: BTreeSet<EdgeTriple> = edges.into_iter().collect();
        let mut map: BTreeMap<(NodeId, Name), Value> = BTreeMap::new();
        for p in props {
            match map.get(&(p.node.clone(), p.key.clone())) {
                Some(existing) if *existing != p.value => {
                    return Err(GraphError::DuplicateKeyValue {
                        node: p.node,
                        key: p.key,
                        first: existing.clone(),
                        second: p.value,
                    });
                }
                Some(_) => {}
                None => {
                    map.insert((p.node, p.key), p.value);
                }
            }
        }
        let preds: BTreeSet<Name> = edges.iter().map(|e| e.pred.clone()).collect();
        let keys: BTreeSet<Name> = map.keys().map(|(_, k)| k.clone()).collect();
        if let Some(clash) = preds.intersection(&keys).next() {
            return Err(GraphError::SortClash(clash.clone()));
        }
        let mut nodes = BTreeSet::new();
        let mut out: BTreeMap<Focus, Vec<Adjacent>> = BTreeMap::new();
        let mut inc: BTreeMap<Focus, Vec<Adjacent>> = BTreeMap::new();
        for e in &edges {
            nodes.insert(e.source.clone());
            nodes.insert(e.target.clone());
            out.entry(Focus::Node(e.source.clone())).or_default().push(Adjacent {
                name: e.pred.clone(),
                other: Focus::Node(e.target.clone()),
            });
            inc.entry(Focus::Node(e.target.clone())).or_default().push(Adjacent {
                name: e.pred.clone(),
                other: Focus::Node(e.source.clone()),
            });
        }
        for ((n, k), v) in &map {
            nodes.insert(n.clone());
            out.entry(Focus::Node(n.clone())).or_default().push(Adjacent {
                name: k.clone(),
                other: Focus::Val(v.clone()),
            });
            inc.entry(Focus::Val(v.clone())).or_default().push(Adjacent {
                name: k.clone(),
                other: Focus::Node(n.clone()),
            });
        }
        for arcs in out.values_mut().chain(inc.values_mut()) {
            arcs.sort();
        }
        Ok(CommonGraph {
            edges,
            props: map,
            nodes,
            preds,
            keys,
            out,
            inc,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a graph from its triple-set view.
    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        let mut props = Vec::new();
        for t in triples {
            match t {
                Triple::Edge(e) => edges.push(e),
                Triple::Prop(p) => props.push(p),
            }
        }
        Self::build(edges, props)
    }

    pub fn edges(&self) -> impl Iterator<Item = &EdgeTriple> {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, e: &EdgeTriple) -> bool {
        self.edges.contains(e)
    }

    pub fn props(&self) -> impl Iterator<Item = PropTriple> + '_ {
        self.props.iter().map(|((n, k), v)| PropTriple {
            node: n.clone(),
            key: k.clone(),
            value: v.clone(),
        })
    }

    pub fn prop(&self, node: &NodeId, key: &Name) -> Option<&Value> {
        self.props.get(&(node.clone(), key.clone()))
    }

    /// The triple-set view of the graph.
    pub fn triples(&self) -> BTreeSet<Triple> {
        self.edges
            .iter()
            .cloned()
            .map(Triple::Edge)
            .chain(self.props().map(Triple::Prop))
            .collect()
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn preds(&self) -> &BTreeSet<Name> {
        &self.preds
    }

    pub fn keys(&self) -> &BTreeSet<Name> {
        &self.keys
    }

    pub fn values(&self) -> BTreeSet<Value> {
        self.props.values().cloned().collect()
    }

    pub fn has_node(&self, n: &NodeId) -> bool {
        self.nodes.contains(n)
    }

    /// Nodes and values of the graph.
    pub fn elements(&self) -> BTreeSet<Focus> {
        self.nodes
            .iter()
            .cloned()
            .map(Focus::Node)
            .chain(self.props.values().cloned().map(Focus::Val))
            .collect()
    }

    pub fn content(&self, v: &NodeId) -> Record {
        self.props
            .range((v.clone(), Name(String::new()))..)
            .take_while(|((n, _), _)| n == v)
            .map(|((_, k), w)| (k.clone(), w.clone()))
            .collect()
    }

    /// Outgoing triples of `v` as (name, target) pairs, sorted.
    pub fn out_arcs(&self, v: &Focus) -> &[Adjacent] {
        self.out.get(v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Incoming triples of `v` as (name, source) pairs, sorted.
    pub fn in_arcs(&self, v: &Focus) -> &[Adjacent] {
        self.inc.get(v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Elements with at least one outgoing triple.
    pub fn sources(&self) -> impl Iterator<Item = (&Focus, &[Adjacent])> {
        self.out.iter().map(|(f, a)| (f, a.as_slice()))
    }

    /// Elements with at least one incoming triple.
    pub fn targets(&self) -> impl Iterator<Item = (&Focus, &[Adjacent])> {
        self.inc.iter().map(|(f, a)| (f, a.as_slice()))
    }

    pub fn neigh(&self, v: &Focus) -> BTreeSet<Triple> {
        self.neigh_signed(v).into_iter().map(|s| s.base).collect()
    }

    pub fn neigh_signed(&self, v: &Focus) -> Vec<SignedTriple> {
        let mut out = Vec::new();
        for a in self.out_arcs(v) {
            out.push(SignedTriple {
                base: make_triple(v, &a.name, &a.other),
                direction: Direction::Forward,
            });
        }
        for a in self.in_arcs(v) {
            out.push(SignedTriple {
                base: make_triple(&a.other, &a.name, v),
                direction: Direction::Inverse,
            });
        }
        out.sort();
        out
    }

    /// Number of signed triples around `v`, without materializing them.
    pub fn signed_degree(&self, v: &Focus) -> usize {
        self.out_arcs(v).len() + self.in_arcs(v).len()
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            edges: self.edges.iter().cloned().collect(),
            props: self.props().collect(),
        }
    }
}

fn make_triple(s: &Focus, name: &Name, o: &Focus) -> Triple {
    match (s, o) {
        (Focus::Node(a), Focus::Node(b)) => Triple::Edge(EdgeTriple {
            source: a.clone(),
            pred: name.clone(),
            target: b.clone(),
        }),
        (Focus::Node(a), Focus::Val(w)) => Triple::Prop(PropTriple {
            node: a.clone(),
            key: name.clone(),
            value: w.clone(),
        }),
        _ => unreachable!("triples always start at a node"),
    }
}

/// On-disk graph format.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    #[serde(default)]
    pub edges: Vec<EdgeTriple>,
    #[serde(default)]
    pub props: Vec<PropTriple>,
}

impl TryFrom<GraphDoc> for CommonGraph {
    type Error = GraphError;

    fn try_from(doc: GraphDoc) -> Result<Self, GraphError> {
        CommonGraph::build(doc.edges, doc.props)
    }
}

impl Serialize for CommonGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_doc().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CommonGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = GraphDoc::deserialize(d)?;
        CommonGraph::try_from(doc).map_err(serde::de::Error::custom)
    }
}

/// Checks that the predicate and key names used by a schema do not clash with
/// each other or with the graph.
pub fn check_universe(
    graph: &CommonGraph,
    schema_preds: &BTreeSet<Name>,
    schema_keys: &BTreeSet<Name>,
) -> Result<(), GraphError> {
    let preds: BTreeSet<&Name> = graph.preds().iter().chain(schema_preds).collect();
    let keys: BTreeSet<&Name> = graph.keys().iter().chain(schema_keys).collect();
    match preds.intersection(&keys).next() {
        Some(n) => Err(GraphError::SortClash((*n).clone())),
        None => Ok(()),
    }
}
