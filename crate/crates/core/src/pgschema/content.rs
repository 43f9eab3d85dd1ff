//! Content types: record types over keys, closed unless extended with `⊤`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{Name, Record, TypeRegistry, ValueType};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContentType {
    /// `⊤`, every record.
    Any {},
    /// `{}`, only the empty record.
    Empty {},
    /// `{k : t}`
    Field { k: Name, t: ValueType },
    /// `&`, compatible union of records.
    Both {
        left: Box<ContentType>,
        right: Box<ContentType>,
    },
    /// `|`
    Either {
        left: Box<ContentType>,
        right: Box<ContentType>,
    },
}

/// One disjunct of [`content_dnf`]: the listed keys must be present with
/// values in every listed type; a closed disjunct allows no other key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Disjunct {
    pub reqs: Vec<(Name, ValueType)>,
    pub open: bool,
}

impl ContentType {
    pub fn any() -> Self {
        ContentType::Any {}
    }

    pub fn empty() -> Self {
        ContentType::Empty {}
    }

    pub fn field(k: impl Into<String>, t: ValueType) -> Self {
        ContentType::Field { k: Name::new(k), t }
    }

    pub fn both(self, right: ContentType) -> Self {
        ContentType::Both {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn either(self, right: ContentType) -> Self {
        ContentType::Either {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    /// `τ & ⊤`
    pub fn opened(self) -> Self {
        self.both(ContentType::any())
    }

    pub fn contains_any(&self) -> bool {
        match self {
            ContentType::Any {} => true,
            ContentType::Empty {} | ContentType::Field { .. } => false,
            ContentType::Both { left, right } | ContentType::Either { left, right } => {
                left.contains_any() || right.contains_any()
            }
        }
    }

    pub fn keys(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect(&mut out, &mut BTreeSet::new());
        out
    }

    pub fn value_types(&self) -> BTreeSet<ValueType> {
        let mut out = BTreeSet::new();
        self.collect(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect(&self, keys: &mut BTreeSet<Name>, types: &mut BTreeSet<ValueType>) {
        match self {
            ContentType::Any {} | ContentType::Empty {} => {}
            ContentType::Field { k, t } => {
                keys.insert(k.clone());
                types.insert(t.clone());
            }
            ContentType::Both { left, right } | ContentType::Either { left, right } => {
                left.collect(keys, types);
                right.collect(keys, types);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ContentType::Both { left, right } | ContentType::Either { left, right } => {
                1 + left.depth().max(right.depth())
            }
            _ => 1,
        }
    }

    /// Top-level alternatives.
    pub fn alternatives(&self) -> Vec<&ContentType> {
        match self {
            ContentType::Either { left, right } => {
                let mut v = left.alternatives();
                v.extend(right.alternatives());
                v
            }
            t => vec![t],
        }
    }
}

/// Distributes `&` over `|`.
pub fn content_dnf(t: &ContentType) -> Vec<Disjunct> {
    match t {
        ContentType::Any {} => vec![Disjunct { reqs: vec![], open: true }],
        ContentType::Empty {} => vec![Disjunct { reqs: vec![], open: false }],
        ContentType::Field { k, t } => vec![Disjunct {
            reqs: vec![(k.clone(), t.clone())],
            open: false,
        }],
        ContentType::Either { left, right } => {
            let mut v = content_dnf(left);
            v.extend(content_dnf(right));
            v
        }
        ContentType::Both { left, right } => {
            let r = content_dnf(right);
            let mut out = Vec::new();
            for a in content_dnf(left) {
                for b in &r {
                    let mut reqs = a.reqs.clone();
                    reqs.extend(b.reqs.iter().cloned());
                    out.push(Disjunct {
                        reqs,
                        open: a.open || b.open,
                    });
                }
            }
            out
        }
    }
}

impl Disjunct {
    pub fn admits(&self, r: &Record, types: &TypeRegistry) -> bool {
        let all_present = self
            .reqs
            .iter()
            .all(|(k, t)| r.get(k).map_or(false, |w| types.holds(w, t)));
        if !all_present {
            return false;
        }
        self.open || r.keys().all(|k| self.reqs.iter().any(|(rk, _)| rk == k))
    }
}

pub fn content_member(r: &Record, t: &ContentType, types: &TypeRegistry) -> bool {
    content_dnf(t).iter().any(|d| d.admits(r, types))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Value;
    use proptest::prelude::*;

    fn rec(pairs: &[(&str, Value)]) -> Record {
        pairs.iter().map(|(k, v)| (Name::from(*k), v.clone())).collect()
    }

    fn reg() -> TypeRegistry {
        TypeRegistry::default()
    }

    #[test]
    fn email_optional_card() {
        let t = ContentType::field("email", ValueType::Str)
            .both(ContentType::field("card", ValueType::Int).either(ContentType::empty()));
        assert!(content_member(&rec(&[("email", "x".into())]), &t, &reg()));
        assert!(content_member(&rec(&[("email", "x".into()), ("card", 5.into())]), &t, &reg()));
        assert!(!content_member(&rec(&[("email", "x".into()), ("phone", "y".into())]), &t, &reg()));
    }

    #[test]
    fn empty_and_clashing_fields() {
        assert!(content_member(&Record::new(), &ContentType::empty(), &reg()));
        let clash = ContentType::field("k", ValueType::Int).both(ContentType::field("k", ValueType::Str));
        assert!(!content_member(&rec(&[("k", 1.into())]), &clash, &reg()));
        let same = ContentType::field("k", ValueType::Int).both(ContentType::field("k", ValueType::Int));
        assert!(content_member(&rec(&[("k", 1.into())]), &same, &reg()));
    }

    #[test]
    fn dnf_shapes() {
        let t = ContentType::field("a", ValueType::Int)
            .both(ContentType::field("b", ValueType::Str).either(ContentType::empty()));
        let d = content_dnf(&t);
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|x| !x.open));
        assert_eq!(d[0].reqs.len(), 2);
        assert_eq!(d[1].reqs.len(), 1);
        assert_eq!(content_dnf(&ContentType::any()), vec![Disjunct { reqs: vec![], open: true }]);
        let o = ContentType::field("a", ValueType::Int)
            .either(ContentType::field("b", ValueType::Str))
            .opened();
        let d = content_dnf(&o);
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|x| x.open && x.reqs.len() == 1));
    }

    #[test]
    fn json_tags() {
        let t: ContentType =
            serde_json::from_str(r#"{"op":"both","left":{"op":"field","k":"card","t":"int"},"right":{"op":"any"}}"#)
                .unwrap();
        assert_eq!(t, ContentType::field("card", ValueType::Int).opened());
        assert!(serde_json::from_str::<ContentType>(r#"{"op":"any","x":1}"#).is_err());
    }

    fn arb_type() -> impl Strategy<Value = ContentType> {
        let leaf = prop_oneof![
            Just(ContentType::any()),
            Just(ContentType::empty()),
            (0..3usize, prop_oneof![Just(ValueType::Int), Just(ValueType::Str), Just(ValueType::Any)])
                .prop_map(|(k, t)| ContentType::field(format!("k{k}"), t)),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.both(b)),
                (inner.clone(), inner).prop_map(|(a, b)| a.either(b)),
            ]
        })
    }

    fn arb_record() -> impl Strategy<Value = Record> {
        proptest::collection::btree_map(
            (0..3usize).prop_map(|k| Name::new(format!("k{k}"))),
            prop_oneof![Just(Value::Int(1)), Just(Value::Int(2)), Just(Value::from("s")), Just(Value::Bool(true))],
            0..=3,
        )
    }

    proptest! {
        #[test]
        fn open_types_are_upward_closed(t in arb_type(), r in arb_record()) {
            let o = t.clone().opened();
            if content_member(&r, &t, &reg()) {
                prop_assert!(content_member(&r, &o, &reg()));
            }
        }

        #[test]
        fn either_is_union(a in arb_type(), b in arb_type(), r in arb_record()) {
            let u = a.clone().either(b.clone());
            prop_assert_eq!(
                content_member(&r, &u, &reg()),
                content_member(&r, &a, &reg()) || content_member(&r, &b, &reg())
            );
        }
    }
}
