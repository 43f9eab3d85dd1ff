use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use triform_core::fixtures::{media_graph, mutation, pg_c1_c5, pg_whitelist, shacl_c1_c5, shex_c1_c5, Mutation};
use triform_core::CommonGraph;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn triform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triform"))
        .args(args)
        .env_remove("TRIFORM_CAP")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn tagged<T: serde::Serialize>(t: &T, dialect: &str) -> Value {
    let mut v = serde_json::to_value(t).unwrap();
    v["dialect"] = dialect.into();
    v
}

fn write_graph(dir: &TempDir, name: &str, g: &CommonGraph) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string(g).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

fn schema_path(dialect: &str) -> String {
    let file = match dialect {
        "cogsl" => "media_pg.json".to_string(),
        d => format!("media_{d}.json"),
    };
    data(&file).to_string_lossy().into_owned()
}

#[test]
fn data_files_match_fixtures() {
    let read = |f: &str| -> Value { serde_json::from_str(&std::fs::read_to_string(data(f)).unwrap()).unwrap() };
    assert_eq!(read("media_graph.json"), serde_json::to_value(media_graph()).unwrap());
    assert_eq!(read("media_six_access.json"), serde_json::to_value(mutation(Mutation::SixHasAccess)).unwrap());
    assert_eq!(read("media_pg.json"), tagged(&pg_c1_c5(), "pg"));
    assert_eq!(read("media_shacl.json"), tagged(&shacl_c1_c5(), "shacl"));
    assert_eq!(read("media_shex.json"), tagged(&shex_c1_c5(), "shex"));
    assert_eq!(read("whitelist_pg.json"), tagged(&pg_whitelist(), "pg"));
}

#[test]
fn media_graph_is_valid_in_every_dialect() {
    let g = data("media_graph.json");
    for d in ["shacl", "shex", "pg", "cogsl"] {
        let o = triform(&["validate", g.to_str().unwrap(), &schema_path(d), "--dialect", d]);
        assert_eq!(code(&o), 0, "{d}: {}", String::from_utf8_lossy(&o.stderr));
        let r = stdout_json(&o);
        assert_eq!(r["valid"], true);
        assert_eq!(r["violations"], Value::Array(vec![]));
    }
}

#[test]
fn mutations_fail_their_rule() {
    let dir = TempDir::new().unwrap();
    for m in Mutation::ALL {
        let g = write_graph(&dir, &format!("{m:?}.json"), &mutation(m));
        for d in ["shacl", "shex", "pg", "cogsl"] {
            let o = triform(&["validate", &g, &schema_path(d), "--dialect", d]);
            assert_eq!(code(&o), 1, "{m:?} {d}");
            let r = stdout_json(&o);
            let rules: Vec<u64> = r["violations"].as_array().unwrap().iter().map(|v| v["rule_index"].as_u64().unwrap()).collect();
            assert!(!rules.is_empty());
            assert!(rules.iter().all(|&i| i == m.rule() as u64), "{m:?} {d}: {rules:?}");
        }
    }
}

#[test]
fn six_accesses_name_the_fifth_rule() {
    let o = triform(&["validate", data("media_six_access.json").to_str().unwrap(), &schema_path("pg"), "--dialect", "pg"]);
    assert_eq!(code(&o), 1);
    let r = stdout_json(&o);
    assert_eq!(r["violations"].as_array().unwrap().len(), 1);
    assert_eq!(r["violations"][0]["rule_index"], 4);
    assert_eq!(r["violations"][0]["focus"], serde_json::json!({"node": "u1"}));
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"edges\": [\n  {\"s\": \"a\", \"p\": \"q\"}\n]}").unwrap();
    let o = triform(&["validate", bad.to_str().unwrap(), &schema_path("pg"), "--dialect", "pg"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("`o`"), "{err}");

    std::fs::write(&bad, r#"{"edges": [], "nodes": []}"#).unwrap();
    let o = triform(&["validate", bad.to_str().unwrap(), &schema_path("pg"), "--dialect", "pg"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nodes"));

    let o = triform(&["validate", "/nonexistent.json", &schema_path("pg"), "--dialect", "pg"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn dialect_must_match_the_tag() {
    let g = data("media_graph.json");
    let o = triform(&["validate", g.to_str().unwrap(), &schema_path("shex"), "--dialect", "pg"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("tagged `shex`"));
    let o = triform(&["translate", &schema_path("shacl"), "--to", "shex"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&triform(&["validate"])), 2);
    assert_eq!(code(&triform(&["frobnicate"])), 2);
    let g = data("media_graph.json");
    let o = triform(&["validate", g.to_str().unwrap(), &schema_path("shex"), "--dialect", "shex", "--cap", "64"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn cap_overflow_exits_three() {
    let g = data("media_graph.json");
    let o = triform(&["validate", g.to_str().unwrap(), &schema_path("shex"), "--dialect", "shex", "--cap", "2"]);
    assert_eq!(code(&o), 3);
    assert!(o.stdout.is_empty());
    let o = Command::new(env!("CARGO_BIN_EXE_triform"))
        .args(["validate", g.to_str().unwrap(), &schema_path("shex"), "--dialect", "shex"])
        .env("TRIFORM_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
}

#[test]
fn translations_agree_with_pg() {
    let dir = TempDir::new().unwrap();
    let mut graphs = vec![write_graph(&dir, "media.json", &media_graph())];
    for m in Mutation::ALL {
        graphs.push(write_graph(&dir, &format!("{m:?}.json"), &mutation(m)));
    }
    for to in ["shacl", "shex"] {
        let o = triform(&["translate", &schema_path("pg"), "--to", to]);
        assert_eq!(code(&o), 0);
        assert_eq!(stdout_json(&o)["dialect"], to);
        let out = dir.path().join(format!("translated_{to}.json"));
        std::fs::write(&out, &o.stdout).unwrap();
        for g in &graphs {
            let pg = triform(&["validate", g, &schema_path("pg"), "--dialect", "pg"]);
            let tr = triform(&["validate", g, out.to_str().unwrap(), "--dialect", to]);
            assert_eq!(code(&pg), code(&tr), "{g} via {to}");
        }
    }
}

#[test]
fn whitelist_is_not_common() {
    let o = triform(&["check-common", &data("whitelist_pg.json").to_string_lossy()]);
    assert_eq!(code(&o), 2);
    let d = stdout_json(&o);
    assert_eq!(d["in_fragment"], false);
    assert!(d["violations"].as_array().unwrap().iter().any(|v| v["rule"] == "selector"));

    let o = triform(&["translate", &data("whitelist_pg.json").to_string_lossy(), "--to", "shacl"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stdout_json(&o)["in_fragment"], false);

    let o = triform(&["validate", data("media_graph.json").to_str().unwrap(), &data("whitelist_pg.json").to_string_lossy(), "--dialect", "cogsl"]);
    assert_eq!(code(&o), 2);

    let o = triform(&["check-common", &schema_path("pg")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o), serde_json::json!({"in_fragment": true, "violations": []}));
}

#[test]
fn empty_fuzz_campaign() {
    let o = triform(&["fuzz", "--trials", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), r#"{"trials":0,"agreed":0,"capped":0,"divergences":[]}"#);
}

#[test]
fn small_fuzz_campaign_agrees() {
    let o = triform(&["fuzz", "--trials", "30", "--seed", "11", "--node-count", "5"]);
    assert_eq!(code(&o), 0);
    let s = stdout_json(&o);
    assert_eq!(s["trials"], 30);
    assert_eq!(s["divergences"], Value::Array(vec![]));
}

#[test]
fn reports_are_deterministic() {
    let g = data("media_six_access.json");
    for d in ["shacl", "shex", "pg"] {
        let a = triform(&["validate", g.to_str().unwrap(), &schema_path(d), "--dialect", d, "--pretty"]);
        let b = triform(&["validate", g.to_str().unwrap(), &schema_path(d), "--dialect", d, "--pretty"]);
        assert_eq!(a.stdout, b.stdout);
        assert!(String::from_utf8_lossy(&a.stdout).contains("\n  "));
    }
}

#[test]
fn oracle_is_hidden_but_runs() {
    let help = triform(&["--help"]);
    assert!(!String::from_utf8_lossy(&help.stdout).contains("oracle"));
    let o = triform(&["oracle", data("media_graph.json").to_str().unwrap(), &schema_path("shex")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = stdout_json(&o);
    assert!(rows.as_array().unwrap().iter().all(|r| r["engine"] == r["oracle"]));
}
