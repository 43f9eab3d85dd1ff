//! Three-way differential validation and campaigns.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cogsl::{cogsl_to_shacl, cogsl_to_shex, cogsl_validate, schema_names};
use crate::model::{check_universe, CommonGraph, Focus, Triple};
use crate::pgschema::PgSchema;
use crate::report::ValidationReport;
use crate::shacl::shacl_validate;
use crate::shex::{Shex, ShexError, DEFAULT_CAP};

use super::{gen_cogsl_schema, gen_graph, GenParams, HarnessError};

/// First `(rule, focus)` on which the dialects disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    pub rule: usize,
    pub focus: Focus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub verdict_pg: bool,
    pub verdict_shacl: bool,
    pub verdict_shex: bool,
    pub agree: bool,
    /// Set when the violation lists differ, even if the verdicts agree.
    pub witness: Option<Divergence>,
}

impl AgreementReport {
    /// Same verdicts and the same violations.
    pub fn full_agreement(&self) -> bool {
        self.agree && self.witness.is_none()
    }
}

fn violations(r: &ValidationReport) -> BTreeSet<(usize, Focus)> {
    r.violations.iter().map(|v| (v.rule_index, v.focus.clone())).collect()
}

pub fn differential_check(g: &CommonGraph, s: &PgSchema) -> Result<AgreementReport, HarnessError> {
    differential_check_with(g, s, DEFAULT_CAP)
}

/// Validates `g` against `s` natively and through both translations.
pub fn differential_check_with(g: &CommonGraph, s: &PgSchema, cap: usize) -> Result<AgreementReport, HarnessError> {
    let (preds, keys) = schema_names(s);
    check_universe(g, &preds, &keys)?;
    let pg = cogsl_validate(g, s)?;
    let shacl = shacl_validate(g, &cogsl_to_shacl(s)?);
    let shex = Shex::new(g).with_cap(cap).validate(&cogsl_to_shex(s)?)?;
    let (a, b, c) = (violations(&pg), violations(&shacl), violations(&shex));
    let witness = a
        .symmetric_difference(&b)
        .chain(a.symmetric_difference(&c))
        .min()
        .map(|(rule, focus)| Divergence {
            rule: *rule,
            focus: focus.clone(),
        });
    Ok(AgreementReport {
        verdict_pg: pg.valid,
        verdict_shacl: shacl.valid,
        verdict_shex: shex.valid,
        agree: pg.valid == shacl.valid && shacl.valid == shex.valid,
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceRecord {
    pub seed: u64,
    pub rule: Option<usize>,
    pub focus: Option<Focus>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub trials: usize,
    pub agreed: usize,
    /// Trials skipped because a ShEx neighborhood exceeded the cap.
    pub capped: usize,
    pub divergences: Vec<DivergenceRecord>,
}

/// Runs `trials` seeded trials starting at `params.seed`.
pub fn run_campaign(params: &GenParams, trials: usize, cap: usize) -> Result<CampaignSummary, HarnessError> {
    params.check()?;
    let mut out = CampaignSummary {
        trials,
        ..Default::default()
    };
    for i in 0..trials as u64 {
        let p = params.with_seed(params.seed.wrapping_add(i));
        let (g, s) = (gen_graph(&p), gen_cogsl_schema(&p));
        match differential_check_with(&g, &s, cap) {
            Ok(r) if r.full_agreement() => out.agreed += 1,
            Ok(r) => out.divergences.push(DivergenceRecord {
                seed: p.seed,
                rule: r.witness.as_ref().map(|w| w.rule),
                focus: r.witness.map(|w| w.focus),
            }),
            Err(HarnessError::Shex(ShexError::NeighborhoodTooLarge { .. })) => out.capped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Greedy triple deletion: drops triples one at a time while `fails` keeps
/// holding, until no single deletion does.
pub fn shrink_graph(g: &CommonGraph, fails: impl Fn(&CommonGraph) -> bool) -> CommonGraph {
    let mut triples: Vec<Triple> = g.triples().into_iter().collect();
    let mut changed = true;
    while changed {
        changed = false;
        let mut i = 0;
        while i < triples.len() {
            let mut t = triples.clone();
            t.remove(i);
            match CommonGraph::from_triples(t.clone()) {
                Ok(h) if fails(&h) => {
                    triples = t;
                    changed = true;
                }
                _ => i += 1,
            }
        }
    }
    CommonGraph::from_triples(triples).expect("subgraph of a valid graph")
}
