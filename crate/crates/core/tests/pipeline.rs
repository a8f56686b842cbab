mod common;

use std::process::Command;

use num_traits::Signed;

use common::{path, q, BENCHMARKS};
use tvp::automata::{DomainValue, Mode};
use tvp::pipeline::{corpus_check, export_product, run_verification, Loaded, PipelineError, RunConfig};
use tvp::rational::Ext;
use tvp::syntax::{parse_term, STATE_VAR};

fn cfg(prog: &str, spec: &str, mode: Mode) -> RunConfig {
    RunConfig::new(path(&format!("{prog}.tvp")), path(&format!("{spec}.json")), mode)
}

#[test]
fn coin_report() {
    let r = run_verification(&RunConfig {
        check_theorems: true,
        fuel_cap: 10,
        ..cfg("coin_flip", "coin_flip", Mode::Prob)
    })
    .unwrap();
    assert!(r.equal_at_fuel);
    assert_eq!(r.compare_fuel, 5);
    assert_eq!(r.initial_state, "y1");
    let t = r.theorem_check.as_ref().unwrap();
    assert!(t.all_equal && t.first_mismatch.is_none());
    assert_eq!(r.lhs.per_state, r.rhs.per_state);
    // Cap 10 is not enough for tol 1e-9.
    assert!(!r.limit_estimate.converged);
    assert_eq!(r.exit_code(), 2);

    let r = run_verification(&cfg("coin_flip", "coin_flip", Mode::Prob)).unwrap();
    assert_eq!(r.exit_code(), 0);
    match r.limit_estimate.get("y1") {
        Some(DomainValue::Prob(p)) => assert!((p - q("1/7")).abs() < q("1/1000000000")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn gr_report() {
    let r = run_verification(&cfg("gr", "gr", Mode::ProbReward)).unwrap();
    assert_eq!(r.exit_code(), 0);
    match r.limit_estimate.get("y1") {
        Some(DomainValue::ProbReward(p, Ext::Fin(w))) => {
            assert!((p - q("2/5")).abs() < q("1/1000000000"));
            assert!((w - q("6/25")).abs() < q("1/1000000000"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn file_writing_report() {
    let r = run_verification(&RunConfig {
        check_theorems: true,
        fuel_cap: 6,
        ..cfg("file_writing", "file_writing", Mode::Reach)
    })
    .unwrap();
    assert_eq!(r.exit_code(), 0);
    assert_eq!(r.limit_estimate.fuel, 3);
    assert_eq!(r.limit_estimate.get("closed"), Some(&DomainValue::Reach(true)));
}

#[test]
fn initial_state_override() {
    let r =
        run_verification(&RunConfig { initial_state: Some("y2".into()), ..cfg("coin_flip", "coin_flip", Mode::Prob) })
            .unwrap();
    assert_eq!(r.initial_state, "y2");
    let e =
        run_verification(&RunConfig { initial_state: Some("y9".into()), ..cfg("coin_flip", "coin_flip", Mode::Prob) })
            .unwrap_err();
    assert_eq!(e.stage(), "spec");
}

#[test]
fn failed_equality_is_exit_three() {
    let mut r = run_verification(&cfg("one_step", "coin_flip", Mode::Prob)).unwrap();
    assert_eq!(r.exit_code(), 0);
    r.equal_at_fuel = false;
    assert_eq!(r.exit_code(), 3);
}

#[test]
fn reports_are_byte_identical() {
    let c = RunConfig { check_theorems: true, fuel_cap: 8, ..cfg("ho_rw", "ho_rw", Mode::Prob) };
    let a = run_verification(&c).unwrap();
    let b = run_verification(&c).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_text(), b.to_text());
    assert!(!a.to_json().contains("timings"));
    let t = run_verification(&RunConfig { timings: true, ..c }).unwrap();
    assert!(t.to_json().contains("limitMs"));
}

#[test]
fn errors_name_their_stage() {
    let stage = |prog: &str, spec: &str, mode: Mode| -> &'static str {
        let l = Loaded::from_texts(prog, spec).and_then(|l| l.query(mode).map(|_| ()));
        l.unwrap_err().stage()
    };
    let dfa = common::read("coin_flip.json");
    assert_eq!(stage("let x = in ()", &dfa, Mode::Prob), "parse");
    assert_eq!(stage("(fun (x : unit) -> x) 1.0", &dfa, Mode::Prob), "typecheck");
    assert_eq!(stage("()", "{\"kind\":\"dfa\"}", Mode::Prob), "spec");
    assert_eq!(stage("emit \"zz\"; ()", &dfa, Mode::Prob), "transform");
    assert_eq!(stage("()", &dfa, Mode::OptReward), "spec");

    let c = RunConfig { fuel_cap: 0, ..cfg("coin_flip", "coin_flip", Mode::Prob) };
    assert_eq!(run_verification(&c).unwrap_err().stage(), "config");
    let c = RunConfig { tol: q("0"), ..cfg("coin_flip", "coin_flip", Mode::Prob) };
    assert_eq!(run_verification(&c).unwrap_err().stage(), "config");
    let c = cfg("missing", "coin_flip", Mode::Prob);
    assert!(matches!(run_verification(&c), Err(PipelineError::Io { .. })));
    let c = cfg("coin_flip", "coin_flip", Mode::Reach);
    assert_eq!(run_verification(&c).unwrap_err().stage(), "evaluate");
}

#[test]
fn export_round_trips() {
    for (prog, spec, _) in BENCHMARKS {
        let l = common::load(prog, spec);
        for simplified in [false, true] {
            let e = export_product(&l, simplified).unwrap();
            let back = parse_term(&e.text, &l.product.signature, &[STATE_VAR.to_string()], true).unwrap();
            let want = if simplified { l.simplified() } else { l.product.term.clone() };
            assert!(back.term.alpha_eq(&want), "{prog}");
            assert!(e.ast["node"].is_string());
            assert_eq!(e.simplified, simplified);
        }
    }
}

#[test]
fn export_json_ast() {
    let l = Loaded::from_texts("()", &common::read("coin_flip.json")).unwrap();
    let e = export_product(&l, true).unwrap();
    assert_eq!(e.ty, "unit * state");
    assert_eq!(e.ast["node"], "pair");
    assert_eq!(e.ast["fst"]["node"], "unit");
    assert_eq!(e.ast["snd"]["node"], "var");
    assert_eq!(e.ast["snd"]["name"], STATE_VAR);
}

#[test]
fn small_corpus() {
    let s = corpus_check(3, 1, 3);
    assert_eq!((s.count, s.passed, s.failed), (1, 1, 0));
    let a = corpus_check(9, 12, 4);
    assert_eq!(a.failed, 0, "{:?}", a.failures);
    assert_eq!(a.type_preserved, 12);
    assert_eq!(a, corpus_check(9, 12, 4));
}

fn tvp(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_tvp")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn cli_typecheck() {
    let (code, out, _) = tvp(&["typecheck", &path("coin_flip.tvp")]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "unit");
}

#[test]
fn cli_wp_fixed_fuel() {
    let (code, out, _) = tvp(&[
        "wp",
        &path("coin_flip.tvp"),
        "--spec",
        &path("coin_flip.json"),
        "--mode",
        "prob",
        "--fuel",
        "2",
        "--state",
        "y1",
    ]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "y1: 3/32"), "{out}");
    for side in ["source", "sync"] {
        let (_, o, _) = tvp(&[
            "wp",
            &path("coin_flip.tvp"),
            "--spec",
            &path("coin_flip.json"),
            "--mode",
            "prob",
            "--fuel",
            "2",
            "--side",
            side,
        ]);
        assert!(o.contains("y1: 3/32"), "{o}");
    }
}

#[test]
fn cli_exit_codes() {
    let coin = path("coin_flip.tvp");
    let dfa = path("coin_flip.json");
    let (c, out, _) = tvp(&["wp", &coin, "--spec", &dfa, "--mode", "prob", "--fuel-cap", "2"]);
    assert_eq!(c, 2, "{out}");
    assert!(out.contains("not converged"));
    let (c, _, err) = tvp(&["wp", &coin, "--spec", &path("nope.json"), "--mode", "prob"]);
    assert_eq!(c, 4);
    assert!(err.starts_with("error[input]"), "{err}");
    let (c, _, err) = tvp(&["wp", &coin, "--spec", &dfa, "--mode", "prob", "--tol=-1"]);
    assert_eq!(c, 4);
    assert!(err.starts_with("error[config]"), "{err}");
    let (c, _, _) = tvp(&["wp", &coin, "--spec", &dfa, "--mode", "maybe"]);
    assert_eq!(c, 4);
    let (c, _, err) = tvp(&["wp", &coin, "--spec", &dfa, "--mode", "prob", "--state", "q7"]);
    assert_eq!(c, 4, "{err}");
    let (c, out, _) = tvp(&["check", &coin, "--spec", &dfa, "--mode", "prob", "--fuel-cap", "6"]);
    assert_eq!(c, 2, "{out}");
    assert!(out.contains("three-way equality at fuels 1..6: ok"), "{out}");
}

#[test]
fn cli_transform_and_corpus() {
    let (c, out, _) =
        tvp(&["transform", &path("one_step.tvp"), "--spec", &path("coin_flip.json"), "--simplify", "--format", "json"]);
    assert_eq!(c, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["simplified"], true);
    assert_eq!(v["type"], "unit * state");
    let (c, out, _) = tvp(&["corpus", "--seed", "4", "--count", "6"]);
    assert_eq!(c, 0, "{out}");
    assert!(out.contains("6 passed, 0 failed"), "{out}");
    let (c, _, _) = tvp(&["corpus", "--count", "0"]);
    assert_eq!(c, 4);
}

#[test]
fn cli_verify_json_is_deterministic() {
    let args = ["verify", &path("gr.tvp"), "--spec", &path("gr.json"), "--mode", "probreward", "--format", "json"];
    let (c1, a, _) = tvp(&args);
    let (c2, b, _) = tvp(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["equalAtFuel"], true);
    assert_eq!(v["lhs"]["perState"]["y1"]["prob"], "6505/16384");
}
