mod doc;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use triform_core::cogsl::{check_common, cogsl_to_shacl, cogsl_to_shex, cogsl_validate, schema_names, CogslError};
use triform_core::harness::{brute_shex_satisfies, brute_sshex_satisfies, run_campaign, GenParams};
use triform_core::model::check_universe;
use triform_core::pgschema::{pg_validate, validate_graph_type};
use triform_core::shacl::shacl_validate;
use triform_core::shex::{shex_select, Shex, ShexError, DEFAULT_CAP, MAX_CAP};
use triform_core::CommonGraph;

use doc::{load_graph, load_schema, SchemaDoc};

#[derive(Parser, Debug)]
#[command(name = "triform", version, about = "Validate common graphs against SHACL, ShEx and PG-Schema cores")]
struct Cli {
    /// Pretty-print JSON output
    #[arg(long, global = true)]
    pretty: bool,

    /// Neighborhood cap for ShEx matching
    #[arg(long, global = true, env = "TRIFORM_CAP", default_value_t = DEFAULT_CAP)]
    cap: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a graph against a schema
    Validate {
        graph: PathBuf,
        schema: PathBuf,
        #[arg(long, value_enum)]
        dialect: Dialect,
    },
    /// Translate a common PG schema to SHACL or ShEx
    Translate {
        schema: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
    },
    /// Check whether a PG schema lies in the common fragment
    CheckCommon { schema: PathBuf },
    /// Run a differential campaign over generated graphs and schemas
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 6)]
        node_count: usize,
        #[arg(long, default_value_t = 4)]
        budget: usize,
    },
    /// Compare the ShEx evaluator with the brute-force oracle
    #[command(hide = true)]
    Oracle { graph: PathBuf, schema: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Dialect {
    Shacl,
    Shex,
    Pg,
    Cogsl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    Shacl,
    Shex,
}

/// What a command prints on stdout, and its exit code.
struct Done {
    compact: String,
    pretty: String,
    code: u8,
}

fn done<T: Serialize>(t: &T, code: u8) -> Result<Done> {
    Ok(Done {
        compact: serde_json::to_string(t)?,
        pretty: serde_json::to_string_pretty(t)?,
        code,
    })
}

fn verdict(valid: bool) -> u8 {
    if valid {
        0
    } else {
        1
    }
}

fn not_in_fragment(e: CogslError) -> Result<Done> {
    match e {
        CogslError::NotInFragment(d) => {
            eprintln!("error: schema is not in the common fragment");
            done(&d, 2)
        }
        other => Err(other.into()),
    }
}

fn mismatch(doc: &SchemaDoc, dialect: &str) -> anyhow::Error {
    anyhow!("schema is tagged `{}` but --dialect is `{dialect}`", doc.tag())
}

fn validate(cli: &Cli, g: &CommonGraph, doc: SchemaDoc, dialect: Dialect) -> Result<Done> {
    match (dialect, doc) {
        (Dialect::Shacl, SchemaDoc::Shacl(s)) => {
            let r = shacl_validate(g, &s);
            done(&r, verdict(r.valid))
        }
        (Dialect::Shex, SchemaDoc::Shex(s)) => {
            let r = Shex::new(g).with_cap(cli.cap).validate(&s)?;
            done(&r, verdict(r.valid))
        }
        (Dialect::Shex, SchemaDoc::Sshex(s)) => {
            let r = Shex::new(g).with_cap(cli.cap).validate(&s.lower()?)?;
            done(&r, verdict(r.valid))
        }
        (Dialect::Pg, SchemaDoc::Pg(s)) => {
            let (preds, keys) = schema_names(&s);
            check_universe(g, &preds, &keys)?;
            let r = pg_validate(g, &s)?;
            done(&r, verdict(r.valid))
        }
        (Dialect::Pg, SchemaDoc::PgGraphType(t)) => {
            let r = validate_graph_type(g, &t)?;
            done(&r, verdict(r.valid))
        }
        (Dialect::Cogsl, SchemaDoc::Pg(s)) => {
            let (preds, keys) = schema_names(&s);
            check_universe(g, &preds, &keys)?;
            match cogsl_validate(g, &s) {
                Ok(r) => done(&r, verdict(r.valid)),
                Err(e) => not_in_fragment(e),
            }
        }
        (d, doc) => Err(mismatch(&doc, &format!("{d:?}").to_lowercase())),
    }
}

fn pg_input(doc: SchemaDoc) -> Result<triform_core::pgschema::PgSchema> {
    match doc {
        SchemaDoc::Pg(s) => Ok(s),
        other => Err(mismatch(&other, "pg")),
    }
}

#[derive(Serialize)]
struct OracleRow {
    rule_index: usize,
    focus: triform_core::Focus,
    engine: bool,
    oracle: bool,
}

fn oracle(cli: &Cli, g: &CommonGraph, doc: SchemaDoc) -> Result<Done> {
    let engine = Shex::new(g).with_cap(cli.cap);
    let mut rows = Vec::new();
    match doc {
        SchemaDoc::Shex(s) => {
            for (i, r) in s.rules.iter().enumerate() {
                for v in shex_select(g, &r.sel) {
                    rows.push(OracleRow {
                        rule_index: i,
                        engine: engine.satisfies(&v, &r.shape)?,
                        oracle: brute_shex_satisfies(g, &v, &r.shape)?,
                        focus: v,
                    });
                }
            }
        }
        SchemaDoc::Sshex(s) => {
            let lowered = s.lower()?;
            for (i, (r, l)) in s.rules.iter().zip(&lowered.rules).enumerate() {
                for v in shex_select(g, &r.sel) {
                    rows.push(OracleRow {
                        rule_index: i,
                        engine: engine.satisfies(&v, &l.shape)?,
                        oracle: brute_sshex_satisfies(g, &v, &r.shape)?,
                        focus: v,
                    });
                }
            }
        }
        other => bail!("the oracle runs on `shex` or `sshex` schemas, not `{}`", other.tag()),
    }
    let agree = rows.iter().all(|r| r.engine == r.oracle);
    done(&rows, verdict(agree))
}

fn run(cli: &Cli) -> Result<Done> {
    if cli.cap > MAX_CAP {
        bail!("--cap {} is above the maximum of {MAX_CAP}", cli.cap);
    }
    match &cli.command {
        Command::Validate { graph, schema, dialect } => {
            let g = load_graph(graph)?;
            let doc = load_schema(schema)?;
            validate(cli, &g, doc, *dialect)
        }
        Command::Translate { schema, to } => {
            let s = pg_input(load_schema(schema)?)?;
            let out = match to {
                Target::Shacl => cogsl_to_shacl(&s).map(SchemaDoc::Shacl),
                Target::Shex => cogsl_to_shex(&s).map(SchemaDoc::Shex),
            };
            match out {
                Ok(doc) => done(&doc, 0),
                Err(e) => not_in_fragment(e),
            }
        }
        Command::CheckCommon { schema } => {
            let d = check_common(&pg_input(load_schema(schema)?)?);
            let code = if d.in_fragment { 0 } else { 2 };
            done(&d, code)
        }
        Command::Fuzz {
            seed,
            trials,
            node_count,
            budget,
        } => {
            let params = GenParams {
                seed: *seed,
                node_count: *node_count,
                schema_size_budget: *budget,
                ..GenParams::default()
            };
            params.check()?;
            let summary = run_campaign(&params, *trials, cli.cap)?;
            done(&summary, verdict(summary.divergences.is_empty()))
        }
        Command::Oracle { graph, schema } => {
            let g = load_graph(graph)?;
            oracle(cli, &g, load_schema(schema)?)
        }
    }
}

fn capped(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(c.downcast_ref::<ShexError>(), Some(ShexError::NeighborhoodTooLarge { .. }))
            || matches!(
                c.downcast_ref::<triform_core::harness::HarnessError>(),
                Some(triform_core::harness::HarnessError::Shex(ShexError::NeighborhoodTooLarge { .. }))
            )
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(d) => {
            let text = if cli.pretty { d.pretty } else { d.compact };
            // a closed pipe downstream is not our failure
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(d.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if capped(&e) { 3 } else { 2 })
        }
    }
}
