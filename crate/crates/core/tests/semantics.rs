mod common;

use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use common::{q, BENCHMARKS};
use tvp::automata::{DomainValue, InferenceQuery, Mode, Spec};
use tvp::exec::{self, Policy};
use tvp::pipeline::{generate_case, Loaded};
use tvp::rational::{Ext, Rational};
use tvp::semantics::{
    eval_traces, wp_iterate, wp_product, wp_source, wp_sync, Algebra, EvalError, Ground, Kind, WpOp, WpResult,
};

fn traces(text: &str, fuel: u32) -> tvp::semantics::Valuation {
    let p = common::parse(text);
    eval_traces(&p.term, &p.signature, fuel).unwrap()
}

const ONE_STEP: &str = "flip 1/2 { emit \"h\" } { emit \"t\" }; ()";

#[test]
fn one_step_traces() {
    let v = traces(ONE_STEP, 0);
    assert_eq!(v.kind, Kind::Weighted);
    assert_eq!(v.outcomes.len(), 2);
    assert_eq!(v.weight_of(&Ground::Unit, &["h"]), q("1/2"));
    assert_eq!(v.weight_of(&Ground::Unit, &["t"]), q("1/2"));
}

#[test]
fn pure_program_is_dirac() {
    let v = traces("()", 0);
    assert_eq!(v.outcomes.len(), 1);
    assert_eq!(v.weight_of(&Ground::Unit, &[]), q("1"));
}

#[test]
fn coin_traces_at_fuel_two() {
    let p = common::program("coin_flip");
    let v = eval_traces(&p.term, &p.signature, 2).unwrap();
    assert_eq!(v.outcomes.len(), 3);
    assert_eq!(v.weight_of(&Ground::Unit, &[]), q("3/4"));
    assert_eq!(v.weight_of(&Ground::Unit, &["h"]), q("3/32"));
    assert_eq!(v.weight_of(&Ground::Unit, &["t"]), q("3/32"));
    assert_eq!(v.mass(), q("15/16"));
}

#[test]
fn rewards_are_kept_per_outcome() {
    let v = traces("flipr 1/2 1 { reward 2; () } { () }", 0);
    let mut got: Vec<(Rational, Rational)> = v.outcomes.iter().map(|o| (o.reward.clone(), o.weight.clone())).collect();
    got.sort();
    assert_eq!(got, vec![(q("1"), q("1/2")), (q("3"), q("1/2"))]);
}

#[test]
fn choose_gives_a_set() {
    let v = traces("choose { emit \"a\" } { emit \"b\"; emit \"a\" }", 0);
    assert_eq!(v.kind, Kind::Set);
    assert_eq!(v.outcomes.len(), 2);
    assert!(v.outcomes.iter().all(|o| o.weight.is_one()));
}

#[test]
fn mixing_flip_and_choose_is_rejected() {
    let p = common::parse("flip 1/2 { () } { choose { () } { () } }");
    match eval_traces(&p.term, &p.signature, 1) {
        Err(EvalError::MixedEffects(names)) => {
            assert!(names.iter().any(|n| n.starts_with("flip")));
            assert!(names.iter().any(|n| n == "choose"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn non_ground_result_is_rejected() {
    let p = common::parse("fun (x : unit) -> x");
    assert!(matches!(eval_traces(&p.term, &p.signature, 1), Err(EvalError::NonGround(_))));
}

#[test]
fn mode_must_match_effects() {
    let l = common::load("coin_flip", "coin_flip");
    let reach = l.query(Mode::Reach).unwrap();
    let err = wp_source(&l.program.term, &l.program.signature, &reach, 1).unwrap_err();
    assert!(matches!(err, EvalError::ModeKind { .. }), "{err:?}");
}

fn src(l: &Loaded, qq: &InferenceQuery, n: u32) -> WpResult {
    wp_source(&l.program.term, &l.program.signature, qq, n).unwrap()
}

fn sync(l: &Loaded, qq: &InferenceQuery, n: u32) -> WpResult {
    wp_sync(&l.program.term, &l.program.signature, qq, n).unwrap()
}

fn prod(l: &Loaded, qq: &InferenceQuery, n: u32) -> WpResult {
    wp_product(&l.product.term, &l.product.signature, qq, n).unwrap()
}

#[test]
fn one_step_is_one_half_on_every_side() {
    let l = common::load("one_step", "coin_flip");
    let qq = l.query(Mode::Prob).unwrap();
    for r in [src(&l, &qq, 0), sync(&l, &qq, 0), prod(&l, &qq, 0)] {
        assert_eq!(r.get("y1"), Some(&DomainValue::Prob(q("1/2"))));
        assert_eq!(r.get("y2"), Some(&DomainValue::Prob(q("1"))));
    }
}

#[test]
fn effect_free_program_reads_the_empty_word() {
    let l = Loaded::from_texts("(true, ())", &common::read("ho_rw.json")).unwrap();
    let qq = l.query(Mode::Prob).unwrap();
    for r in [src(&l, &qq, 1), sync(&l, &qq, 1), prod(&l, &qq, 1)] {
        let want: Vec<_> =
            qq.spec.start_states().iter().map(|s| (qq.spec.label(s), qq.apply(&[] as &[&str], s).unwrap())).collect();
        assert_eq!(r.per_state, want);
    }
}

#[test]
fn zero_fuel_is_bottom_for_recursive_programs() {
    for (prog, spec, mode) in BENCHMARKS {
        if prog == "one_step" {
            continue;
        }
        let l = common::load(prog, spec);
        let qq = l.query(mode).unwrap();
        for r in [src(&l, &qq, 0), sync(&l, &qq, 0), prod(&l, &qq, 0)] {
            assert!(r.values().all(|v| *v == DomainValue::bottom(mode)), "{prog}: {r:?}");
        }
    }
}

#[test]
fn coin_sync_at_fuel_two() {
    let l = common::load("coin_flip", "coin_flip");
    let qq = l.query(Mode::Prob).unwrap();
    assert_eq!(sync(&l, &qq, 2).get("y1"), Some(&DomainValue::Prob(q("3/32"))));
}

/// Coin from y1 at fuel n: `P(n) = 1/4 (1/2 T(n-1) + 1/2 P(n-1))`, where
/// `T(n) = 3/4 + 1/4 T(n-1)` is the termination mass (y2 absorbs).
fn coin_oracle(n: u32) -> (Rational, Rational) {
    let (mut p, mut t) = (Rational::zero(), Rational::zero());
    for _ in 0..n {
        let np = q("1/4") * (q("1/2") * &t + q("1/2") * &p);
        t = q("3/4") + q("1/4") * &t;
        p = np;
    }
    (p, t)
}

/// gr from y1: `P(n) = 1/4 + 3/8 P(n-1)`, `R(n) = 3/8 (P(n-1) + R(n-1))`.
fn gr_oracle(n: u32) -> (Rational, Rational) {
    let (mut p, mut r) = (Rational::zero(), Rational::zero());
    for _ in 0..n {
        let np = q("1/4") + q("3/8") * &p;
        r = q("3/8") * (&p + &r);
        p = np;
    }
    (p, r)
}

#[test]
fn coin_matches_recurrence() {
    let l = common::load("coin_flip", "coin_flip");
    let qq = l.query(Mode::Prob).unwrap();
    for n in 0..=12 {
        let (p, t) = coin_oracle(n);
        let r = prod(&l, &qq, n);
        assert_eq!(r.get("y1"), Some(&DomainValue::Prob(p)), "fuel {n}");
        assert_eq!(r.get("y2"), Some(&DomainValue::Prob(t)), "fuel {n}");
        assert_eq!(sync(&l, &qq, n).per_state, r.per_state);
    }
}

#[test]
fn gr_matches_recurrence() {
    let l = common::load("gr", "gr");
    let qq = l.query(Mode::ProbReward).unwrap();
    for n in 0..=12 {
        let (p, r) = gr_oracle(n);
        let want = DomainValue::ProbReward(p, Ext::Fin(r));
        assert_eq!(prod(&l, &qq, n).get("y1"), Some(&want), "fuel {n}");
        if n <= 6 {
            assert_eq!(src(&l, &qq, n).get("y1"), Some(&want), "fuel {n}");
        }
    }
    // ho_gr only adds reward-free flips after the last emission.
    let h = common::load("ho_gr", "ho_gr");
    for n in 0..=8 {
        assert_eq!(prod(&h, &qq, n).per_state, prod(&l, &qq, n).per_state, "fuel {n}");
    }
}

#[test]
fn gr_oracle_limits() {
    let (p, r) = gr_oracle(200);
    assert!((p - q("2/5")).abs() < q("1/1000000000000"));
    assert!((r - q("6/25")).abs() < q("1/1000000000000"));
}

#[test]
fn file_writing_reaches_bad_at_fuel_three() {
    let l = common::load("file_writing", "file_writing");
    let qq = l.query(Mode::Reach).unwrap();
    for n in 0..=2 {
        assert_eq!(src(&l, &qq, n).get("closed"), Some(&DomainValue::Reach(false)), "fuel {n}");
    }
    for r in [src(&l, &qq, 3), sync(&l, &qq, 3), prod(&l, &qq, 3)] {
        assert_eq!(r.get("closed"), Some(&DomainValue::Reach(true)));
    }
}

#[test]
fn file_writing_reward_machine() {
    let l = common::load("file_writing", "file_writing_rm");
    let qq = l.query(Mode::OptReward).unwrap();
    assert_eq!(prod(&l, &qq, 1).get("s0:false"), Some(&DomainValue::OptReward(Ext::zero())));
    for n in 2..=4 {
        let r = prod(&l, &qq, n);
        assert_eq!(r.get("s0:false"), Some(&DomainValue::OptReward(Ext::Fin(q("1")))), "fuel {n}");
        assert_eq!(src(&l, &qq, n).per_state, r.per_state);
    }
}

#[test]
fn iterate_coin_to_one_seventh() {
    let l = common::load("coin_flip", "coin_flip");
    let qq = l.query(Mode::Prob).unwrap();
    let s = l.simplified();
    let op = WpOp::Product { term: &s, sig: &l.product.signature, query: &qq };
    let r = wp_iterate(&op, &q("1/1000000000"), 500).unwrap();
    assert!(r.converged);
    assert!(r.fuel <= 80);
    match r.get("y1") {
        Some(DomainValue::Prob(p)) => assert!((p - q("1/7")).abs() < q("1/1000000000")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn iterate_reach_stops_at_top() {
    let l = common::load("file_writing", "file_writing");
    let qq = l.query(Mode::Reach).unwrap();
    let op = WpOp::Source { term: &l.program.term, sig: &l.program.signature, query: &qq };
    let r = wp_iterate(&op, &q("1/1000000000"), 50).unwrap();
    assert!(r.converged);
    assert_eq!(r.fuel, 3);
    assert!(r.values().all(|v| *v == DomainValue::Reach(true)));
}

#[test]
fn iterate_cap_reports_non_convergence() {
    let l = common::load("coin_flip", "coin_flip");
    let qq = l.query(Mode::Prob).unwrap();
    let op = WpOp::Sync { term: &l.program.term, sig: &l.program.signature, query: &qq };
    let r = wp_iterate(&op, &q("1/1000000000"), 1).unwrap();
    assert!(!r.converged);
    assert_eq!(r.fuel, 1);
    assert_eq!(r.per_state, sync(&l, &qq, 1).per_state);
}

#[test]
fn iterate_does_not_stop_on_a_plateau() {
    let l = common::load("ho_rw", "ho_rw");
    let qq = l.query(Mode::Prob).unwrap();
    assert_eq!(prod(&l, &qq, 2).per_state, prod(&l, &qq, 3).per_state);
    let s = l.simplified();
    let op = WpOp::Product { term: &s, sig: &l.product.signature, query: &qq };
    let r = wp_iterate(&op, &q("1/1000000000"), 500).unwrap();
    assert!(r.converged);
    assert_eq!(r.get("y3"), Some(&DomainValue::Prob(q("1"))));
}

#[test]
fn product_needs_lifted_signature() {
    let l = common::load("coin_flip", "coin_flip");
    let qq = l.query(Mode::Prob).unwrap();
    let err = wp_product(&l.product.term, &l.program.signature, &qq, 1).unwrap_err();
    assert_eq!(err, EvalError::NotProduct);
}

#[test]
fn json_shape() {
    let l = common::load("coin_flip", "coin_flip");
    let qq = l.query(Mode::Prob).unwrap();
    let v: serde_json::Value = serde_json::to_value(prod(&l, &qq, 2)).unwrap();
    assert_eq!(v["mode"], "prob");
    assert_eq!(v["fuel"], 2);
    assert_eq!(v["perState"]["y1"], "3/32");
    assert!(v["delta"].is_string());
}

#[test]
fn algebra_laws_on_examples() {
    let a = Algebra::new(Mode::Prob);
    let x = DomainValue::Prob(q("2/3"));
    assert_eq!(a.combine_flip(&q("1/5"), &x, &x), x);
    assert_eq!(
        a.combine_flip(&q("1/4"), &DomainValue::Prob(q("1")), &DomainValue::Prob(q("0"))),
        DomainValue::Prob(q("1/4"))
    );
    let pr = Algebra::new(Mode::ProbReward);
    let one = DomainValue::ProbReward(q("1"), Ext::zero());
    assert_eq!(
        pr.combine_flip_reward(&q("1/2"), &q("1"), &one, &one),
        DomainValue::ProbReward(q("1"), Ext::Fin(q("1")))
    );
    let r = Algebra::new(Mode::Reach);
    assert_eq!(r.combine_choose(&DomainValue::Reach(false), &DomainValue::Reach(true)), DomainValue::Reach(true));
    assert!(r.leq(&r.bottom(), &DomainValue::Reach(true)));
}

fn cases() -> Vec<(Loaded, InferenceQuery)> {
    let mut v: Vec<(Loaded, InferenceQuery)> = BENCHMARKS
        .iter()
        .filter(|(p, _, _)| *p != "ho_gr")
        .map(|(p, s, m)| {
            let l = common::load(p, s);
            let qq = l.query(*m).unwrap();
            (l, qq)
        })
        .collect();
    for c in tvp::pipeline::corpus_cases(11, 24, 4) {
        let l = Loaded::from_texts(&c.program, &c.spec).unwrap();
        let qq = l.query(c.mode).unwrap();
        v.push((l, qq));
    }
    v
}

#[test]
fn approximants_are_monotone_and_bounded() {
    for (l, qq) in cases() {
        let mut prev = sync(&l, &qq, 0);
        for n in 1..=12 {
            let cur = sync(&l, &qq, n);
            for ((s, a), (_, b)) in prev.per_state.iter().zip(&cur.per_state) {
                assert!(a.leq(b), "{}: {s} fuel {n}: {a} > {b}", l.source);
                assert!(b.within_bounds());
            }
            if qq.mode.is_weighted() {
                for (a, b) in prev.mass.iter().zip(&cur.mass) {
                    assert!(a <= b && *b <= Rational::one(), "{}", l.source);
                }
            }
            prev = cur;
        }
    }
}

#[test]
fn valuations_are_well_formed() {
    for (l, qq) in cases() {
        let v = eval_traces(&l.program.term, &l.program.signature, 4).unwrap();
        assert!(v.outcomes.iter().all(|o| o.weight > Rational::zero()));
        if qq.mode.is_weighted() {
            assert!(v.mass() <= Rational::one());
        }
    }
}

#[test]
fn parallel_and_sequential_agree() {
    let l = common::load("ho_rw", "ho_rw");
    let qq = l.query(Mode::Prob).unwrap();
    exec::set_policy(Policy::Sequential);
    let a = serde_json::to_string(&prod(&l, &qq, 9)).unwrap();
    let s = tvp::pipeline::corpus_check(5, 16, 4);
    exec::set_policy(Policy::Parallel);
    let b = serde_json::to_string(&prod(&l, &qq, 9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(s, tvp::pipeline::corpus_check(5, 16, 4));
}

fn arb_value(mode: Mode) -> BoxedStrategy<DomainValue> {
    let rat = (0u32..=8, 1u32..=8).prop_map(|(n, d)| Rational::new(n.min(d).into(), d.into()));
    let ext =
        prop_oneof![(0u32..20, 1u32..5).prop_map(|(n, d)| Ext::Fin(Rational::new(n.into(), d.into()))), Just(Ext::Inf)];
    match mode {
        Mode::Prob => rat.prop_map(DomainValue::Prob).boxed(),
        Mode::ProbReward => (rat, ext).prop_map(|(p, r)| DomainValue::ProbReward(p, r)).boxed(),
        Mode::Reach => any::<bool>().prop_map(DomainValue::Reach).boxed(),
        Mode::OptReward => ext.prop_map(DomainValue::OptReward).boxed(),
    }
}

fn arb_prob() -> impl Strategy<Value = Rational> {
    (0u32..=6, 1u32..=6).prop_map(|(n, d)| Rational::new(n.min(d).into(), d.into()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flip_of_equal_points(p in arb_prob(), a in arb_value(Mode::Prob)) {
        prop_assert_eq!(Algebra::new(Mode::Prob).combine_flip(&p, &a, &a), a);
    }

    #[test]
    fn flip_is_monotone(p in arb_prob(), a in arb_value(Mode::ProbReward), b in arb_value(Mode::ProbReward), c in arb_value(Mode::ProbReward), r in 0u32..4) {
        let alg = Algebra::new(Mode::ProbReward);
        let r = Rational::from_integer(r.into());
        if a.leq(&b) {
            prop_assert!(alg.combine_flip_reward(&p, &r, &a, &c).leq(&alg.combine_flip_reward(&p, &r, &b, &c)));
            prop_assert!(alg.combine_flip_reward(&p, &r, &c, &a).leq(&alg.combine_flip_reward(&p, &r, &c, &b)));
        }
        prop_assert!(alg.bottom().leq(&a));
    }

    #[test]
    fn choose_is_a_semilattice(m in prop_oneof![Just(Mode::Reach), Just(Mode::OptReward)].prop_flat_map(|m| (Just(m), arb_value(m), arb_value(m), arb_value(m)))) {
        let (mode, a, b, c) = m;
        let alg = Algebra::new(mode);
        prop_assert_eq!(alg.combine_choose(&a, &a), a.clone());
        prop_assert_eq!(alg.combine_choose(&a, &b), alg.combine_choose(&b, &a));
        prop_assert_eq!(
            alg.combine_choose(&alg.combine_choose(&a, &b), &c),
            alg.combine_choose(&a, &alg.combine_choose(&b, &c))
        );
        prop_assert!(alg.bottom().leq(&a));
        prop_assert!(a.leq(&alg.combine_choose(&a, &b)));
    }

    #[test]
    fn three_sides_agree_on_random_programs(seed in any::<u64>(), reach in any::<bool>(), n in 0u32..4) {
        let mode = if reach { Mode::Reach } else { Mode::Prob };
        let c = generate_case(0, seed, 4, mode);
        let l = Loaded::from_texts(&c.program, &c.spec).unwrap();
        let qq = l.query(mode).unwrap();
        let a = src(&l, &qq, n);
        prop_assert_eq!(&a.per_state, &sync(&l, &qq, n).per_state);
        prop_assert_eq!(&a.per_state, &prod(&l, &qq, n).per_state);
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>()) {
        let c = generate_case(0, seed, 4, Mode::Prob);
        let l = Loaded::from_texts(&c.program, &c.spec).unwrap();
        let v1 = eval_traces(&l.program.term, &l.program.signature, 3).unwrap();
        let v2 = eval_traces(&l.program.term, &l.program.signature, 3).unwrap();
        prop_assert_eq!(v1, v2);
    }
}

#[test]
fn reward_machine_spec_drives_opt_reward() {
    let json = r#"{"kind":"rm","states":["u","v"],"alphabet":["a"],"initial":"u",
        "edges":{"u":{"a":{"to":"v","accept":true,"reward":"3/2"}},"v":{"a":{"to":"v","accept":false,"reward":"5"}}}}"#;
    let l = Loaded::with_spec("choose { emit \"a\" } { emit \"a\"; emit \"a\" }", Spec::from_json(json).unwrap(), json)
        .unwrap();
    let qq = l.query(Mode::OptReward).unwrap();
    for r in [src(&l, &qq, 0), sync(&l, &qq, 0), prod(&l, &qq, 0)] {
        assert_eq!(r.get("u:false"), Some(&DomainValue::OptReward(Ext::Fin(q("3/2")))));
    }
}
