//! The nine acceptance criteria, each timed against its budget.
//!
//! Runs as a single test so the timings are not skewed by sibling tests.
//! Prints one `PASS`/`FAIL` line per criterion.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::Signed;

use common::{path, q, BENCHMARKS};
use tvp::automata::{DomainValue, InferenceQuery, Mode};
use tvp::pipeline::{corpus_cases, Loaded};
use tvp::rational::{parse_rational, Rational};
use tvp::semantics::{wp_product, wp_sync, WpResult};
use tvp::sps::{simplify, transform_context, transform_type};
use tvp::syntax::{typecheck, Context};

fn tvp(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_tvp")).args(args).output().expect("runs tvp");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn wp_json(args: &[&str]) -> (i32, serde_json::Value) {
    let mut a = vec!["wp"];
    a.extend_from_slice(args);
    a.extend_from_slice(&["--format", "json"]);
    let (code, out) = tvp(&a);
    (code, serde_json::from_str(&out).unwrap_or(serde_json::Value::Null))
}

fn rat(v: &serde_json::Value) -> Option<Rational> {
    parse_rational(v.as_str()?).ok()
}

fn close(a: &Rational, b: &str, tol: &str) -> bool {
    (a - q(b)).abs() < q(tol)
}

/// Per-state `prev <= cur` and values within their domain.
fn monotone(prev: &WpResult, cur: &WpResult) -> Result<(), String> {
    for ((s, a), (_, b)) in prev.per_state.iter().zip(&cur.per_state) {
        if !a.leq(b) {
            return Err(format!("state {s}: {a} then {b} at fuel {}", cur.fuel));
        }
        if !b.within_bounds() {
            return Err(format!("state {s}: {b} out of bounds"));
        }
    }
    Ok(())
}

fn product_series(l: &Loaded, qq: &InferenceQuery, fuels: std::ops::RangeInclusive<u32>) -> Result<(), String> {
    let s = l.simplified();
    let mut prev: Option<WpResult> = None;
    for n in fuels {
        let cur = wp_product(&s, &l.product.signature, qq, n).map_err(|e| e.to_string())?;
        if let Some(p) = &prev {
            monotone(p, &cur)?;
        }
        prev = Some(cur);
    }
    Ok(())
}

fn coin() -> Result<(), String> {
    let (code, v) =
        wp_json(&[&path("coin_flip.tvp"), "--spec", &path("coin_flip.json"), "--mode", "prob", "--tol", "1e-9"]);
    let y1 = rat(&v["perState"]["y1"]).ok_or("no value for y1")?;
    if code != 0 || v["converged"] != true {
        return Err(format!("exit {code}, not converged"));
    }
    if !close(&y1, "1/7", "1/1000000") {
        return Err(format!("y1 = {y1}"));
    }
    Ok(())
}

fn gr() -> Result<(), String> {
    let (code, v) = wp_json(&[&path("gr.tvp"), "--spec", &path("gr.json"), "--mode", "probreward", "--tol", "1e-9"]);
    let r = rat(&v["perState"]["y1"]["reward"]).ok_or("no reward for y1")?;
    if code != 0 {
        return Err(format!("exit {code}"));
    }
    if !close(&r, "6/25", "1/1000000") {
        return Err(format!("reward at y1 = {r}"));
    }
    Ok(())
}

fn one_step() -> Result<(), String> {
    let l = common::load("one_step", "coin_flip");
    let qq = l.query(Mode::Prob).map_err(|e| e.to_string())?;
    let r = wp_sync(&l.program.term, &l.program.signature, &qq, 0).map_err(|e| e.to_string())?;
    match r.get("y1") {
        Some(DomainValue::Prob(p)) if *p == q("1/2") => Ok(()),
        other => Err(format!("y1 = {other:?}")),
    }
}

fn emptiness() -> Result<(), String> {
    let l = common::load("file_writing", "file_writing");
    let qq = l.query(Mode::Reach).map_err(|e| e.to_string())?;
    let s = l.simplified();
    for n in 0..=3 {
        let r = wp_product(&s, &l.product.signature, &qq, n).map_err(|e| e.to_string())?;
        if r.get("closed") == Some(&DomainValue::Reach(true)) {
            return Ok(());
        }
    }
    Err("closed is not top at fuel 3".into())
}

fn three_way() -> Result<(), String> {
    let (code, out) = tvp(&["corpus", "--seed", "1", "--count", "200", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    if code != 0 || v["passed"] != 200 || v["fuels"] != 5 {
        return Err(format!("exit {code}: {} passed, {} failed", v["passed"], v["failed"]));
    }
    Ok(())
}

fn corpus() -> Vec<(String, Loaded, InferenceQuery)> {
    let mut v = Vec::new();
    for (p, s, m) in BENCHMARKS {
        let l = common::load(p, s);
        let qq = l.query(m).expect("benchmark query");
        v.push((format!("{p}/{s}"), l, qq));
    }
    for c in corpus_cases(1, 200, 4) {
        let l = Loaded::from_texts(&c.program, &c.spec).expect("corpus case loads");
        let qq = l.query(c.mode).expect("corpus query");
        v.push((format!("corpus #{}", c.index), l, qq));
    }
    v
}

fn monotonicity() -> Result<(), String> {
    for (name, l, qq) in corpus() {
        product_series(&l, &qq, 0..=21).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(())
}

fn type_preservation() -> Result<(), String> {
    let ctx = transform_context(&Context::new()).map_err(|e| e.to_string())?;
    for c in corpus_cases(1, 200, 4) {
        let l = Loaded::from_texts(&c.program, &c.spec).map_err(|e| e.to_string())?;
        let want = transform_type(&l.ty).map_err(|e| e.to_string())?;
        for t in [&l.product.term, &simplify(&l.product.term)] {
            let got = typecheck(&ctx, t, &l.product.signature).map_err(|e| format!("#{}: {e}", c.index))?;
            if got != want {
                return Err(format!("#{}: {got} is not {want}", c.index));
            }
        }
    }
    Ok(())
}

fn ho_rw() -> Result<(), String> {
    let (code, v) =
        wp_json(&[&path("ho_rw.tvp"), "--spec", &path("ho_rw.json"), "--mode", "prob", "--fuel-cap", "500"]);
    if code != 0 && code != 2 {
        return Err(format!("exit {code}"));
    }
    let states = v["perState"].as_object().ok_or("no states")?;
    for (s, x) in states {
        let p = rat(x).ok_or(format!("{s}: not a rational"))?;
        if p < q("0") || p > q("1") {
            return Err(format!("{s} = {p}"));
        }
    }
    let l = common::load("ho_rw", "ho_rw");
    let qq = l.query(Mode::Prob).map_err(|e| e.to_string())?;
    let cap = v["fuel"].as_u64().ok_or("no fuel")? as u32;
    product_series(&l, &qq, 0..=cap.min(40))
}

fn simplify_soundness() -> Result<(), String> {
    for (p, s, m) in BENCHMARKS {
        let l = common::load(p, s);
        let qq = l.query(m).map_err(|e| e.to_string())?;
        let simp = l.simplified();
        for n in 0..=10 {
            let a = wp_product(&l.product.term, &l.product.signature, &qq, n).map_err(|e| e.to_string())?;
            let b = wp_product(&simp, &l.product.signature, &qq, n).map_err(|e| e.to_string())?;
            if a.per_state != b.per_state {
                return Err(format!("{p}/{s} at fuel {n}"));
            }
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    type Check = fn() -> Result<(), String>;
    let criteria: [(&str, f64, Check); 9] = [
        ("1 coin_flip limit within 1e-6 of 1/7", 1.0, coin),
        ("2 gr partial expected reward within 1e-6 of 0.24", 1.0, gr),
        ("3 one-step wp_sync at y1 is exactly 1/2", 0.1, one_step),
        ("4 file writing reaches a bad prefix by fuel 3", 0.1, emptiness),
        ("5 three-way equality on corpus seed 1 count 200", 60.0, three_way),
        ("6 monotone approximants, fuels 0..=21", 30.0, monotonicity),
        ("7 product programs re-typecheck", 10.0, type_preservation),
        ("8 ho_rw monotone, bounded, exit 0 or 2", 120.0, ho_rw),
        ("9 simplify preserves wp at fuels 0..=10", 10.0, simplify_soundness),
    ];
    let mut failed = Vec::new();
    for (name, budget, check) in criteria {
        let t = Instant::now();
        let r = check();
        let took = t.elapsed();
        let slow = took > Duration::from_secs_f64(budget);
        let line = match (&r, slow) {
            (Ok(()), false) => format!("PASS {name} ({:.3} s, budget {budget} s)", took.as_secs_f64()),
            (Ok(()), true) => format!("FAIL {name}: {:.3} s over budget {budget} s", took.as_secs_f64()),
            (Err(e), _) => format!("FAIL {name}: {e}"),
        };
        println!("{line}");
        if r.is_err() || slow {
            failed.push(line);
        }
    }
    assert!(failed.is_empty(), "{failed:#?}");
}
