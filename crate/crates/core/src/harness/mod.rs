//! Random generators, brute-force oracles, the differential runner and the
//! graph surgeries behind the metamorphic suites.

mod diff;
mod gen;
mod oracle;
mod surgery;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cogsl::CogslError;
use crate::model::{EdgeTriple, GraphError, Name, Value};
use crate::pgschema::PgError;
use crate::shex::ShexError;

pub use diff::{differential_check, differential_check_with, run_campaign, shrink_graph, AgreementReport, CampaignSummary, Divergence, DivergenceRecord};
pub use gen::{
    gen_cogsl_schema, gen_content, gen_edge_type, gen_graph, gen_pg_path, gen_shacl_path, gen_shacl_schema,
    gen_shex_schema, gen_shex_shape, gen_sshex_shape, gen_triple_expr,
};
pub use oracle::{
    brute_edge_type_member, brute_match_oracle, brute_path_oracle, brute_pg_path_oracle, brute_shex_satisfies, brute_sshex_satisfies,
    MATCH_LIMIT, PATH_LIMIT,
};
pub use surgery::{copyswap, copyswap_with, double, gen_cn_neighbourhood, similar, ValueCopy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("edge {0:?} is not in the graph")]
    EdgeNotInGraph(EdgeTriple),
    #[error("{what} has size {size}, above the oracle limit {limit}")]
    InstanceTooLarge { what: &'static str, size: usize, limit: usize },
    #[error("invalid generator parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Cogsl(#[from] CogslError),
    #[error(transparent)]
    Shex(#[from] ShexError),
    #[error(transparent)]
    Pg(#[from] PgError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Generator settings. Densities are probabilities; everything else is a
/// count. Generation is a pure function of the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    pub seed: u64,
    pub node_count: usize,
    /// Chance that an ordered node pair carries an edge.
    pub edge_density: f64,
    /// Chance that a node carries a given key.
    pub prop_density: f64,
    pub value_pool: usize,
    pub pred_pool: usize,
    pub key_pool: usize,
    /// Upper bound on rules and on atoms per schema.
    pub schema_size_budget: usize,
    pub max_count_n: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            node_count: 6,
            edge_density: 0.2,
            prop_density: 0.4,
            value_pool: 6,
            pred_pool: 2,
            key_pool: 2,
            schema_size_budget: 4,
            max_count_n: 2,
        }
    }
}

impl GenParams {
    pub fn with_seed(&self, seed: u64) -> Self {
        GenParams { seed, ..self.clone() }
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::BadParams(m.to_string()));
        if !(0.0..=1.0).contains(&self.edge_density) || !(0.0..=1.0).contains(&self.prop_density) {
            return bad("densities must lie in [0, 1]");
        }
        if self.value_pool == 0 || self.pred_pool == 0 || self.key_pool == 0 {
            return bad("pools must be non-empty");
        }
        if self.schema_size_budget == 0 {
            return bad("schema_size_budget must be positive");
        }
        Ok(())
    }

    /// An independent random stream per use, all derived from the seed.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    pub fn preds(&self) -> Vec<Name> {
        (0..self.pred_pool).map(|i| Name::new(format!("p{i}"))).collect()
    }

    pub fn keys(&self) -> Vec<Name> {
        (0..self.key_pool).map(|i| Name::new(format!("k{i}"))).collect()
    }

    /// The value pool cycles through ints, strings and booleans.
    pub fn values(&self) -> Vec<Value> {
        (0..self.value_pool)
            .map(|i| match i % 3 {
                0 => Value::Int((i / 3) as i64),
                1 => Value::Str(format!("s{}", i / 3)),
                _ => Value::Bool(i / 3 % 2 == 1),
            })
            .collect()
    }
}
