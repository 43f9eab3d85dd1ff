//! On-disk documents: graphs and dialect-tagged schemas.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Result};
use serde::{Deserialize, Serialize};
use triform_core::pgschema::{GraphType, PgSchema};
use triform_core::shacl::ShaclSchema;
use triform_core::shex::sshex::SShexSchema;
use triform_core::shex::ShexSchema;
use triform_core::CommonGraph;

/// A schema file: `{"dialect": "...", "rules": [...]}`, or the three graph
/// type lists for `pg_graph_type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dialect", rename_all = "snake_case")]
pub enum SchemaDoc {
    Shacl(ShaclSchema),
    Shex(ShexSchema),
    Sshex(SShexSchema),
    Pg(PgSchema),
    PgGraphType(GraphType),
}

impl SchemaDoc {
    pub fn tag(&self) -> &'static str {
        match self {
            SchemaDoc::Shacl(_) => "shacl",
            SchemaDoc::Shex(_) => "shex",
            SchemaDoc::Sshex(_) => "sshex",
            SchemaDoc::Pg(_) => "pg",
            SchemaDoc::PgGraphType(_) => "pg_graph_type",
        }
    }
}

fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

pub fn load_graph(path: &Path) -> Result<CommonGraph> {
    read(path)
}

pub fn load_schema(path: &Path) -> Result<SchemaDoc> {
    read(path)
}
