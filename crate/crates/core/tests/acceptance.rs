//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! of them fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use triform_core::fixtures::{
    counting_left, counting_right, media_graph, mutation, pg_c1_c5, shacl_c1_c5, shacl_exactly_two, shex_c1_c5,
    shex_two_edges, Mutation,
};
use triform_core::harness::{
    brute_edge_type_member, brute_match_oracle, brute_path_oracle, brute_pg_path_oracle, brute_shex_satisfies,
    brute_sshex_satisfies, copyswap_with, differential_check_with, gen_cn_neighbourhood, gen_edge_type, gen_graph,
    gen_pg_path, gen_shacl_path, gen_shacl_schema, gen_shex_schema, gen_shex_shape, gen_sshex_shape, similar,
    GenParams, HarnessError, ValueCopy,
};
use triform_core::model::{CommonGraph, Direction, EdgeTriple, Focus, Name, NodeId, PropTriple, TypeRegistry, Value};
use triform_core::pgschema::{edge_type_to_path, eval_pg_path, normalize_edge_type, pg_validate, Sort};
use triform_core::shacl::{eval_path, shacl_satisfies, shacl_validate};
use triform_core::shex::sshex::{eliminate_extra, normalize_shape, shex_to_sshex, sshex_to_shex, SShexExpr};
use triform_core::shex::{shex_validate, Openness, Shex, ShexError, ShexShape, TripleExpr, DEFAULT_CAP};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn capped(e: &HarnessError) -> bool {
    matches!(
        e,
        HarnessError::InstanceTooLarge { .. } | HarnessError::Shex(ShexError::NeighborhoodTooLarge { .. })
    )
}

fn too_large(e: &ShexError) -> bool {
    matches!(e, ShexError::NeighborhoodTooLarge { .. })
}

fn consts() -> Vec<Value> {
    vec![Value::Int(0), Value::Str("s0".into())]
}

fn names(p: &GenParams) -> Vec<Name> {
    p.preds().into_iter().chain(p.keys()).collect()
}

fn small(seed: u64, node_count: usize) -> GenParams {
    GenParams {
        seed,
        node_count,
        edge_density: 0.25,
        prop_density: 0.3,
        value_pool: 3,
        ..GenParams::default()
    }
}

// ---- golden ----

fn golden() -> Outcome {
    let g = media_graph();
    let (shacl, shex, pg) = (shacl_c1_c5(), shex_c1_c5(), pg_c1_c5());
    let failed = |g: &CommonGraph| -> Result<[BTreeSet<usize>; 3], String> {
        let a = shacl_validate(g, &shacl).failed_rules();
        let b = shex_validate(g, &shex).map_err(|e| e.to_string())?.failed_rules();
        let c = pg_validate(g, &pg).map_err(|e| e.to_string())?.failed_rules();
        Ok([a, b, c])
    };
    let mut problems = Vec::new();
    match failed(&g) {
        Ok(f) if f.iter().all(BTreeSet::is_empty) => {}
        Ok(f) => problems.push(format!("media graph fails {f:?}")),
        Err(e) => problems.push(e),
    }
    for m in Mutation::ALL {
        let want = BTreeSet::from([m.rule()]);
        match failed(&mutation(m)) {
            Ok(f) if f.iter().all(|x| x == &want) => {}
            Ok(f) => problems.push(format!("{m:?} fails {f:?}")),
            Err(e) => problems.push(e),
        }
    }
    outcome(problems.is_empty(), if problems.is_empty() { "media valid, 5/5 mutations isolated".into() } else { problems.join("; ") })
}

// ---- differential campaign ----

fn campaign() -> Outcome {
    let trials = 1000u64;
    let (mut agreed, mut invalid, mut capped_n, mut diverged) = (0, 0, 0, Vec::new());
    for i in 0..trials {
        let p = GenParams {
            seed: i,
            node_count: 1 + (i % 10) as usize,
            schema_size_budget: 1 + (i % 6) as usize,
            ..GenParams::default()
        };
        let (g, s) = (gen_graph(&p), triform_core::harness::gen_cogsl_schema(&p));
        match differential_check_with(&g, &s, DEFAULT_CAP) {
            Ok(r) if r.full_agreement() => {
                agreed += 1;
                invalid += usize::from(!r.verdict_pg);
            }
            Ok(_) => diverged.push(i),
            Err(e) if capped(&e) => capped_n += 1,
            Err(e) => return outcome(false, format!("seed {i}: {e}")),
        }
    }
    outcome(
        diverged.is_empty(),
        format!("{trials} trials: {agreed} agreed ({invalid} invalid), {capped_n} capped, divergent seeds {diverged:?}"),
    )
}

// ---- copyswap ----

fn strip(g: &CommonGraph, consts: &[Value]) -> CommonGraph {
    let props: Vec<PropTriple> = g
        .props()
        .filter(|p| !matches!(p.value, Value::Bool(_)) && !consts.contains(&p.value))
        .collect();
    CommonGraph::build(g.edges().cloned(), props).expect("subgraph of a common graph")
}

fn copyswap_suite() -> Outcome {
    let cs = consts();
    let avoid: BTreeSet<Value> = cs.iter().cloned().collect();
    let (mut valid, mut swaps, mut failures) = (0, 0, Vec::new());
    for seed in 0..50_000u64 {
        if valid >= 500 {
            break;
        }
        let p = GenParams {
            seed,
            node_count: 2 + (seed % 4) as usize,
            edge_density: 0.3,
            schema_size_budget: 1 + (seed % 3) as usize,
            ..GenParams::default()
        };
        let g = strip(&gen_graph(&p), &cs);
        if g.edge_count() == 0 {
            continue;
        }
        let s = gen_shex_schema(&p, &cs);
        let report = match shex_validate(&g, &s) {
            Ok(r) => r,
            Err(e) if too_large(&e) => continue,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        if !report.valid || report.stats.iter().all(|st| st.selected == 0) {
            continue;
        }
        valid += 1;
        for e in g.edges() {
            let h = match copyswap_with(&g, e, ValueCopy::Fresh, &avoid) {
                Ok(h) => h,
                Err(err) => return outcome(false, format!("seed {seed}: {err}")),
            };
            swaps += 1;
            match shex_validate(&h, &s) {
                Ok(r) if r.valid => {}
                Ok(_) => failures.push((seed, e.clone())),
                Err(err) => return outcome(false, format!("seed {seed}: {err}")),
            }
        }
    }
    outcome(
        valid >= 500 && failures.is_empty(),
        format!("{valid} valid trials, {swaps} swapped graphs, {} failures {:?}", failures.len(), failures.iter().take(3).collect::<Vec<_>>()),
    )
}

// ---- neighbourhoods ----

fn neighbourhood_suite() -> Outcome {
    let c = NodeId::new("c");
    let consts = vec![Value::Int(0)];
    let (mut pairs, mut distinct, mut mismatches) = (0, 0, Vec::new());
    for i in 0..5000u64 {
        if pairs >= 200 {
            break;
        }
        let k = 1 + (i % 3) as usize;
        let p = GenParams {
            seed: i,
            max_count_n: k,
            schema_size_budget: 1 + (i % 4) as usize,
            ..GenParams::default()
        };
        let mut rng = p.rng(9);
        let preds: BTreeSet<Name> = p.preds().into_iter().filter(|_| rng.gen_bool(0.6)).collect();
        if preds.is_empty() {
            continue;
        }
        let s = gen_shacl_schema(&p, &consts);
        let g1 = gen_cn_neighbourhood(&c, k + 1, &preds, &p.with_seed(2 * i + 100_000));
        let g2 = gen_cn_neighbourhood(&c, k + 1, &preds, &p.with_seed(2 * i + 100_001));
        if !similar(&g1, &g2) {
            continue;
        }
        pairs += 1;
        if g1 != g2 {
            distinct += 1;
        }
        let at_c = |g: &CommonGraph| -> Vec<bool> {
            s.rules.iter().map(|r| shacl_satisfies(g, &Focus::Node(c.clone()), &r.shape)).collect()
        };
        if shacl_validate(&g1, &s).valid != shacl_validate(&g2, &s).valid || at_c(&g1) != at_c(&g2) {
            mismatches.push(i);
        }
    }
    outcome(
        pairs >= 200 && mismatches.is_empty(),
        format!("{pairs} pairs ({distinct} non-identical), mismatching seeds {mismatches:?}"),
    )
}

// ---- counting ----

fn counting() -> Outcome {
    let (left, right) = (counting_left(), counting_right());
    let shacl = shacl_exactly_two();
    let shacl_splits = !shacl_validate(&left, &shacl).valid && shacl_validate(&right, &shacl).valid;
    let shex = shex_two_edges();
    let verdicts = (shex_validate(&left, &shex), shex_validate(&right, &shex));
    let (Ok(l), Ok(r)) = verdicts else {
        return outcome(false, "ShEx evaluation failed");
    };
    let rule = &shex.rules[0].shape;
    let u = Focus::node("u");
    let at_u = [&left, &right].map(|g| Shex::new(g).satisfies(&u, rule).unwrap_or(false));
    let shex_blind = l.valid == r.valid && at_u == [true, true];
    outcome(
        shacl_splits && shex_blind,
        format!("SHACL separates: {shacl_splits}, ShEx verdicts {} / {}, hub accepted {at_u:?}", l.valid, r.valid),
    )
}

// ---- oracles ----

fn grid_exprs() -> Vec<TripleExpr> {
    use Direction::{Forward as F, Inverse as I};
    let leaves = vec![
        TripleExpr::Eps,
        TripleExpr::tc_any("p", F),
        TripleExpr::tc_any("p", I),
        TripleExpr::tc_any("q", F),
    ];
    let grow = |below: &[TripleExpr]| -> Vec<TripleExpr> {
        let mut out = leaves.clone();
        for a in below {
            for b in below {
                out.push(a.clone().then(b.clone()));
                out.push(a.clone().alt(b.clone()));
            }
            out.push(a.clone().star());
        }
        out
    };
    grow(&grow(&leaves))
}

/// Every neighbourhood of `v` with at most five triples over the kinds
/// `p→`, `p←`, `q→`, `q←`, `r→`.
fn grid_graphs() -> Vec<CommonGraph> {
    let mut out = Vec::new();
    let mut counts = [0usize; 5];
    fn rec(i: usize, left: usize, counts: &mut [usize; 5], out: &mut Vec<CommonGraph>) {
        if i == 5 {
            let kinds = [("p", true), ("p", false), ("q", true), ("q", false), ("r", true)];
            let mut edges = Vec::new();
            for (j, (name, outgoing)) in kinds.iter().enumerate() {
                for n in 0..counts[j] {
                    let other = format!("x{j}_{n}");
                    edges.push(if *outgoing {
                        EdgeTriple::new("v", *name, other)
                    } else {
                        EdgeTriple::new(other, *name, "v")
                    });
                }
            }
            out.push(CommonGraph::build(edges, []).expect("edges only"));
            return;
        }
        for c in 0..=left {
            counts[i] = c;
            rec(i + 1, left - c, counts, out);
        }
        counts[i] = 0;
    }
    rec(0, 5, &mut counts, &mut out);
    out
}

fn shex_grid() -> Result<(usize, Vec<String>), String> {
    let exprs = grid_exprs();
    let graphs = grid_graphs();
    let opens = [
        Openness::half_open(Vec::<String>::new()),
        Openness::half_open(["p"]),
        Openness::open(Vec::<String>::new(), ["q"]),
    ];
    let v = Focus::node("v");
    let (mut n, mut bad) = (0, Vec::new());
    for g in &graphs {
        let engine = Shex::new(g);
        for e in &exprs {
            for o in &opens {
                let got = engine.match_expr(&v, e, o).map_err(|x| x.to_string())?;
                let want = brute_match_oracle(g, &v, e, o).map_err(|x| x.to_string())?;
                n += 1;
                if got != want && bad.len() < 3 {
                    bad.push(format!("{e:?} {o:?} on {} triples", g.edge_count()));
                }
            }
        }
    }
    Ok((n, bad))
}

fn shex_random() -> (usize, Vec<u64>) {
    let cs = consts();
    let (mut cases, mut bad) = (0, Vec::new());
    for seed in 0..5000u64 {
        if cases >= 500 {
            break;
        }
        let p = small(seed, 4);
        let g = gen_graph(&p);
        let shape = gen_shex_shape(&mut p.rng(7), &names(&p), &cs, 3, 1);
        let mut ok = true;
        let mut agree = true;
        for v in g.elements() {
            match (Shex::new(&g).satisfies(&v, &shape), brute_shex_satisfies(&g, &v, &shape)) {
                (Ok(a), Ok(b)) => agree &= a == b,
                _ => ok = false,
            }
        }
        if ok {
            cases += 1;
            if !agree {
                bad.push(seed);
            }
        }
    }
    (cases, bad)
}

fn path_family() -> (usize, Vec<String>) {
    let (mut checks, mut bad) = (0, Vec::new());
    for seed in 0..600u64 {
        let p = small(seed, 1 + (seed % 6) as usize);
        let g = gen_graph(&p);
        let mut rng = p.rng(8);
        let sp = gen_shacl_path(&mut rng, &names(&p), 3);
        let pp = gen_pg_path(&mut rng, &p, 3);
        let Ok((source, _)) = pp.sorts() else {
            bad.push(format!("pg seed {seed}: ill-sorted path"));
            continue;
        };
        for v in g.elements() {
            match brute_path_oracle(&g, &v, &sp) {
                Ok(want) => {
                    checks += 1;
                    if eval_path(&g, &v, &sp) != want {
                        bad.push(format!("shacl seed {seed}"));
                    }
                }
                Err(e) => bad.push(format!("shacl seed {seed}: {e}")),
            }
            if v.is_node() != (source == Sort::Node) {
                continue;
            }
            match (eval_pg_path(&g, &v, &pp), brute_pg_path_oracle(&g, &v, &pp)) {
                (Ok(a), Ok(b)) => {
                    checks += 1;
                    if a != b {
                        bad.push(format!("pg seed {seed}"));
                    }
                }
                (a, b) => bad.push(format!("pg seed {seed}: {a:?} {b:?}")),
            }
        }
    }
    (checks, bad)
}

fn oracles() -> Outcome {
    let (grid_n, grid_bad) = match shex_grid() {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("grid: {e}")),
    };
    let (rand_n, rand_bad) = shex_random();
    let (path_n, path_bad) = path_family();
    outcome(
        grid_bad.is_empty() && rand_n >= 500 && rand_bad.is_empty() && path_bad.is_empty(),
        format!(
            "grid {grid_n} matches, {} mismatches {grid_bad:?}; random {rand_n} cases, mismatches {rand_bad:?}; paths {path_n} checks, mismatches {:?}",
            grid_bad.len(),
            path_bad.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

// ---- rewrites ----

#[derive(Default)]
struct Tally {
    instances: usize,
    mismatches: Vec<u64>,
}

impl Tally {
    fn record(&mut self, seed: u64, agree: bool) {
        self.instances += 1;
        if !agree {
            self.mismatches.push(seed);
        }
    }

    fn ok(&self) -> bool {
        self.instances >= 300 && self.mismatches.is_empty()
    }

    fn show(&self, name: &str) -> String {
        format!("{name} {}/{:?}", self.instances, self.mismatches)
    }
}

/// Verdicts of `f` on every element, or `None` if some instance is too large.
fn verdicts(g: &CommonGraph, f: impl Fn(&Focus) -> Result<bool, String>) -> Result<Option<Vec<bool>>, String> {
    let mut out = Vec::new();
    for v in g.elements() {
        match f(&v) {
            Ok(b) => out.push(b),
            Err(e) if e.starts_with("too large") => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(out))
}

fn oracle_of<'a>(g: &'a CommonGraph, se: &SShexExpr) -> impl Fn(&Focus) -> Result<bool, String> + 'a {
    let se = se.clone();
    move |v| {
        brute_sshex_satisfies(g, v, &se).map_err(|e| if capped(&e) { format!("too large: {e}") } else { e.to_string() })
    }
}

fn engine_of<'a>(g: &'a CommonGraph, sh: &ShexShape) -> impl Fn(&Focus) -> Result<bool, String> + 'a {
    let sh = sh.clone();
    move |v| Shex::new(g).satisfies(v, &sh).map_err(|e| if too_large(&e) { format!("too large: {e}") } else { e.to_string() })
}

fn sshex_rewrites(t: &mut [Tally; 4]) -> Result<(), String> {
    let cs = consts();
    for seed in 0..2000u64 {
        let p = small(seed, 3);
        let g = gen_graph(&p);
        let mut rng = p.rng(10);
        let se = gen_sshex_shape(&mut rng, &names(&p), &cs, 3, 1);
        let Some(base) = verdicts(&g, oracle_of(&g, &se))? else { continue };

        let normal = normalize_shape(&se);
        if let Some(v) = verdicts(&g, oracle_of(&g, &normal))? {
            t[0].record(seed, v == base);
        }
        let plain = eliminate_extra(&normal);
        if let Some(v) = verdicts(&g, oracle_of(&g, &plain))? {
            t[1].record(seed, v == base);
        }
        let lowered = sshex_to_shex(&plain).map_err(|e| format!("seed {seed}: {e}"))?;
        if let Some(v) = verdicts(&g, engine_of(&g, &lowered))? {
            t[2].record(seed, v == base);
        }

        let sh = gen_shex_shape(&mut rng, &names(&p), &cs, 3, 1);
        let Some(base) = verdicts(&g, engine_of(&g, &sh))? else { continue };
        let lifted = shex_to_sshex(&sh).map_err(|e| format!("seed {seed}: {e}"))?;
        let back = sshex_to_shex(&normalize_shape(&lifted)).map_err(|e| format!("seed {seed}: {e}"))?;
        if let (Some(a), Some(b)) = (verdicts(&g, oracle_of(&g, &lifted))?, verdicts(&g, engine_of(&g, &back))?) {
            t[3].record(seed, a == base && b == base);
        }
    }
    Ok(())
}

fn edge_rewrites(norm: &mut Tally, to_path: &mut Tally) -> Result<(), String> {
    let types = TypeRegistry::new();
    for seed in 0..400u64 {
        let p = GenParams {
            prop_density: 0.5,
            ..small(seed, 4)
        };
        let g = gen_graph(&p);
        if g.edge_count() == 0 {
            continue;
        }
        let t = gen_edge_type(&mut p.rng(11), &p, 3);
        let prims = normalize_edge_type(&t);
        let agree = g
            .edges()
            .all(|e| prims.iter().any(|pt| pt.admits(&g, e, &types)) == brute_edge_type_member(&g, e, &t));
        norm.record(seed, agree);

        let mut agree = true;
        for negated in [false, true] {
            let path = edge_type_to_path(&t, negated);
            let mut got = BTreeSet::new();
            for v in g.nodes().iter().map(|n| Focus::Node(n.clone())) {
                for w in eval_pg_path(&g, &v, &path).map_err(|e| format!("seed {seed}: {e}"))? {
                    got.insert((v.clone(), w));
                }
            }
            let want: BTreeSet<(Focus, Focus)> = g
                .edges()
                .filter(|e| brute_edge_type_member(&g, e, &t) != negated)
                .map(|e| (Focus::Node(e.source.clone()), Focus::Node(e.target.clone())))
                .collect();
            agree &= got == want;
        }
        to_path.record(seed, agree);
    }
    Ok(())
}

fn rewrites() -> Outcome {
    let mut s: [Tally; 4] = Default::default();
    let (mut norm, mut to_path) = (Tally::default(), Tally::default());
    if let Err(e) = sshex_rewrites(&mut s).and_then(|_| edge_rewrites(&mut norm, &mut to_path)) {
        return outcome(false, e);
    }
    let all = [&s[0], &s[1], &s[2], &s[3], &norm, &to_path];
    let labels = [
        "normalize_intervals",
        "eliminate_extra",
        "sshex_to_shex",
        "shex_to_sshex",
        "normalize_edge_type",
        "edge_type_to_path",
    ];
    let detail: Vec<String> = all.iter().zip(labels).map(|(t, l)| t.show(l)).collect();
    outcome(all.iter().all(|t| t.ok()), detail.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 7] = [
        ("golden-c1-c5", golden, Some(Duration::from_secs(1))),
        ("differential-campaign", campaign, Some(Duration::from_secs(60))),
        ("copyswap-invariance", copyswap_suite, None),
        ("neighbourhood-indistinguishability", neighbourhood_suite, None),
        ("counting-divergence", counting, None),
        ("oracle-equivalence", oracles, Some(Duration::from_secs(120))),
        ("rewrite-preservation", rewrites, None),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let in_time = budget.map_or(true, |b| took < b);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        let limit = budget.map(|b| format!(" (limit {b:.0?})")).unwrap_or_default();
        println!(
            "{} {name}: {} [{took:.2?}{limit}]",
            if pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
