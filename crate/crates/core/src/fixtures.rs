//! The running media example: a small graph of users and accounts, the
//! constraints C1-C5 in every dialect, and targeted mutations.

use crate::model::{CommonGraph, Direction, EdgeTriple, PropTriple, ValueType};
use crate::pgschema::{ContentType, PgPathExpr, PgRule, PgSchema, PgShape};
use crate::shacl::{PathExpr, ShaclRule, ShaclSchema, ShaclSelector, ShaclShape};
use crate::shex::{
    desugar_repetition, open_closure, Openness, Repetition, ShexRule, ShexSchema, ShexSelector, ShexShape, TripleExpr,
};

fn media_edges() -> Vec<EdgeTriple> {
    vec![
        EdgeTriple::new("u1", "ownsAccount", "a1"),
        EdgeTriple::new("u1", "hasAccess", "a1"),
        EdgeTriple::new("u1", "invited", "u4"),
        EdgeTriple::new("u2", "hasAccess", "a1"),
        EdgeTriple::new("u3", "invited", "u2"),
        EdgeTriple::new("u3", "ownsAccount", "a2"),
        EdgeTriple::new("u3", "hasAccess", "a2"),
        EdgeTriple::new("u4", "hasAccess", "a2"),
    ]
}

fn media_props() -> Vec<PropTriple> {
    vec![
        PropTriple::new("u1", "email", "a@a.a"),
        PropTriple::new("u1", "privileged", true),
        PropTriple::new("u2", "email", "d@d.d"),
        PropTriple::new("u2", "privileged", true),
        PropTriple::new("u3", "email", "c@c.c"),
        PropTriple::new("u3", "privileged", false),
        PropTriple::new("u4", "privileged", false),
        PropTriple::new("a1", "card", 1234),
        PropTriple::new("a1", "privileged", true),
        PropTriple::new("a2", "card", 5678),
        PropTriple::new("a2", "privileged", false),
    ]
}

pub fn media_graph() -> CommonGraph {
    CommonGraph::build(media_edges(), media_props()).expect("media graph is well formed")
}

/// Single edits of the media graph, each breaking exactly one of C1-C5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mutation {
    CardAsString,
    OwnerWithoutEmail,
    DuplicatedEmail,
    UnprivilegedAccessor,
    SixHasAccess,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::CardAsString,
        Mutation::OwnerWithoutEmail,
        Mutation::DuplicatedEmail,
        Mutation::UnprivilegedAccessor,
        Mutation::SixHasAccess,
    ];

    /// Index of the rule the mutation breaks.
    pub fn rule(self) -> usize {
        self as usize
    }
}

pub fn mutation(m: Mutation) -> CommonGraph {
    let mut edges = media_edges();
    let mut props = media_props();
    match m {
        Mutation::CardAsString => {
            props.retain(|p| !(p.node.as_str() == "a1" && p.key.as_str() == "card"));
            props.push(PropTriple::new("a1", "card", "oops"));
        }
        Mutation::OwnerWithoutEmail => {
            props.retain(|p| !(p.node.as_str() == "u3" && p.key.as_str() == "email"));
        }
        Mutation::DuplicatedEmail => props.push(PropTriple::new("u4", "email", "d@d.d")),
        Mutation::UnprivilegedAccessor => edges.push(EdgeTriple::new("u3", "hasAccess", "a1")),
        Mutation::SixHasAccess => {
            edges.push(EdgeTriple::new("u1", "hasAccess", "a2"));
            for i in 1..=4 {
                edges.push(EdgeTriple::new("u1", "hasAccess", format!("x{i}")));
            }
        }
    }
    CommonGraph::build(edges, props).expect("mutated graph is well formed")
}

fn step(q: &str) -> PathExpr {
    PathExpr::step(q)
}

pub fn shacl_c1_c5() -> ShaclSchema {
    let privileged_true = ShaclShape::geq(1, step("privileged"), ShaclShape::test_const(true));
    ShaclSchema::new(vec![
        ShaclRule {
            sel: ShaclSelector::inc("card"),
            shape: ShaclShape::test_type(ValueType::Int),
        },
        ShaclRule {
            sel: ShaclSelector::out("ownsAccount"),
            shape: ShaclShape::exists(step("email")),
        },
        ShaclRule {
            sel: ShaclSelector::inc("email"),
            shape: ShaclShape::leq(1, step("email").inv(), ShaclShape::Top),
        },
        ShaclRule {
            sel: ShaclSelector::out("card"),
            shape: ShaclShape::geq(1, step("privileged"), ShaclShape::test_const(true).not())
                .or(ShaclShape::forall(step("hasAccess").inv(), privileged_true)),
        },
        ShaclRule {
            sel: ShaclSelector::out("email"),
            shape: ShaclShape::leq(5, step("hasAccess"), ShaclShape::Top),
        },
    ])
}

pub fn shex_c1_c5() -> ShexSchema {
    use Direction::{Forward as F, Inverse as I};
    let privileged_true = open_closure(TripleExpr::tc("privileged", F, ShexShape::test_const(true)));
    ShexSchema::new(vec![
        ShexRule {
            sel: ShexSelector::inc("card"),
            shape: ShexShape::test_type(ValueType::Int),
        },
        ShexRule {
            sel: ShexSelector::out("ownsAccount"),
            shape: ShexShape::some(TripleExpr::tc_any("email", F)),
        },
        ShexRule {
            sel: ShexSelector::inc("email"),
            shape: open_closure(desugar_repetition(TripleExpr::tc_any("email", I), Repetition::AtMost, 1)),
        },
        ShexRule {
            sel: ShexSelector::out("card"),
            shape: open_closure(TripleExpr::tc("privileged", F, ShexShape::test_const(true).not()))
                .or(open_closure(TripleExpr::tc("hasAccess", I, privileged_true).star())),
        },
        ShexRule {
            sel: ShexSelector::out("email"),
            shape: open_closure(desugar_repetition(TripleExpr::tc_any("hasAccess", F), Repetition::AtMost, 5)),
        },
    ])
}

pub fn pg_c1_c5() -> PgSchema {
    type P = PgPathExpr;
    PgSchema::new(vec![
        PgRule::new(
            P::key("card"),
            PgShape::exists(P::of_type(ContentType::field("card", ValueType::Int).opened())),
        ),
        PgRule::new(P::pred("ownsAccount"), PgShape::exists(P::key("email"))),
        PgRule::new(P::inv_key("email"), PgShape::leq(1, P::inv_key("email"))),
        PgRule::new(
            P::of_type(ContentType::field("card", ValueType::Any).opened()).concat(P::key_is_val("privileged", true)),
            PgShape::not_exists(P::pred("hasAccess").inv().concat(P::not_key_is_val("privileged", true))),
        ),
        PgRule::new(P::key("email"), PgShape::leq(5, P::pred("hasAccess"))),
    ])
}

/// Whole-graph closure with a `⊤` selector: a content whitelist and a
/// predicate whitelist. Not a common schema.
pub fn pg_whitelist() -> PgSchema {
    type P = PgPathExpr;
    let content = ContentType::field("privileged", ValueType::Bool).both(
        ContentType::field("card", ValueType::Int).either(ContentType::field("email", ValueType::Str)),
    );
    PgSchema::new(vec![
        PgRule::new(P::top(), PgShape::exists(P::of_type(content))),
        PgRule::new(
            P::top(),
            PgShape::not_exists(P::not_preds(["ownsAccount", "hasAccess", "invited"])),
        ),
    ])
}

/// A user owning and accessing the same account.
pub fn counting_left() -> CommonGraph {
    CommonGraph::build(
        vec![EdgeTriple::new("u", "hasAccess", "a"), EdgeTriple::new("u", "ownsAccount", "a")],
        vec![],
    )
    .expect("well formed")
}

/// Two users, each owning one account and accessing the other one.
pub fn counting_right() -> CommonGraph {
    CommonGraph::build(
        vec![
            EdgeTriple::new("u", "hasAccess", "a'"),
            EdgeTriple::new("u", "ownsAccount", "a"),
            EdgeTriple::new("u'", "hasAccess", "a"),
            EdgeTriple::new("u'", "ownsAccount", "a'"),
        ],
        vec![],
    )
    .expect("well formed")
}

/// `∃hasAccess ⇒ ∃^{=2}(hasAccess ∪ ownsAccount).⊤`
pub fn shacl_exactly_two() -> ShaclSchema {
    ShaclSchema::new(vec![ShaclRule {
        sel: ShaclSelector::out("hasAccess"),
        shape: ShaclShape::exactly(2, step("hasAccess").union(step("ownsAccount")), ShaclShape::Top),
    }])
}

/// `⌊hasAccess.⌊⊤⌉;⊤⌉ ⇒ ⌊(hasAccess.⌊⊤⌉ | ownsAccount.⌊⊤⌉)^2 ; (¬∅⁻)*⌉`
pub fn shex_two_edges() -> ShexSchema {
    use Direction::Forward as F;
    let body = TripleExpr::tc_any("hasAccess", F).alt(TripleExpr::tc_any("ownsAccount", F));
    ShexSchema::new(vec![ShexRule {
        sel: ShexSelector::out("hasAccess"),
        shape: ShexShape::Neigh {
            expr: desugar_repetition(body, Repetition::Exactly, 2),
            openness: Openness::half_open(Vec::<String>::new()),
        },
    }])
}
