mod common;

use proptest::prelude::*;

use common::parse;
use tvp::automata::Mode;
use tvp::pipeline::generate_case;
use tvp::syntax::term::{pair, var};
use tvp::syntax::{
    elaborate, parse_program, parse_term, pretty_print, pretty_print_in, typecheck, Context, ParseError, Signature,
    Term, Type,
};

#[test]
fn if_desugars_to_case() {
    let p = parse("if true then () else ()");
    match p.term {
        Term::Case { scrutinee, left_body, right_body, .. } => {
            assert!(matches!(*scrutinee, Term::Inj { index: 1, .. }));
            assert_eq!(*left_body, Term::Unit);
            assert_eq!(*right_body, Term::Unit);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn sequencing_is_application_of_an_unused_lambda() {
    let p = parse("(); ()");
    match p.term {
        Term::App { fun, arg } => {
            assert_eq!(*arg, Term::Unit);
            match *fun {
                Term::Lam { body, .. } => {
                    assert_eq!(*body, Term::Unit);
                    assert!(!body.has_free(0));
                }
                other => panic!("{other:?}"),
            }
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unit_literal() {
    assert_eq!(parse("()").term, Term::Unit);
}

#[test]
fn false_is_the_second_injection() {
    assert!(matches!(parse("false").term, Term::Inj { index: 2, .. }));
}

#[test]
fn syntax_errors_carry_line_and_column() {
    match parse_program("// c\nlet x = in ()", &Signature::standard()) {
        Err(ParseError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 9)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_effect_is_rejected() {
    let err = parse_program("eff teleport ()", &Signature::standard()).unwrap_err();
    assert!(matches!(err, ParseError::UnknownEffect { .. }), "{err:?}");
}

#[test]
fn reserved_state_name_is_rejected() {
    let err = parse_program("let __y = () in __y", &Signature::standard()).unwrap_err();
    assert!(matches!(err, ParseError::Reserved { .. }), "{err:?}");
}

#[test]
fn unbound_names_are_rejected() {
    let err = parse_program("x", &Signature::standard()).unwrap_err();
    assert!(matches!(err, ParseError::Unbound { .. }), "{err:?}");
}

#[test]
fn coin_has_type_unit() {
    let p = common::program("coin_flip");
    assert_eq!(typecheck(&Context::new(), &p.term, &p.signature).unwrap(), Type::Unit);
}

#[test]
fn variable_takes_its_context_type() {
    let ctx = Context::new().push("x", Type::real());
    assert_eq!(typecheck(&ctx, &var(0, "x"), &Signature::standard()).unwrap(), Type::real());
}

#[test]
fn self_application_is_ill_typed() {
    let p = parse("fun (x : unit) -> x x");
    assert!(typecheck(&Context::new(), &p.term, &p.signature).is_err());
}

#[test]
fn effect_at_wrong_arity_is_ill_typed() {
    let p = parse("eff flip[1/2] true");
    assert!(typecheck(&Context::new(), &p.term, &p.signature).is_err());
}

#[test]
fn benchmarks_are_ground_typed() {
    for name in ["coin_flip", "one_step", "gr", "ho_gr", "ho_rw", "file_writing"] {
        let p = common::program(name);
        let t = typecheck(&Context::new(), &p.term, &p.signature).unwrap();
        assert!(t.is_ground(), "{name}: {t}");
    }
}

#[test]
fn elaboration_annotates_every_binder() {
    let p = common::program("ho_rw");
    let (t, _) = elaborate(&Context::new(), &p.term, &p.signature).unwrap();
    t.walk(&mut |s| match s {
        Term::Lam { param, .. } => assert!(param.ty.is_some(), "{s:?}"),
        Term::Rec { param, ret, .. } => assert!(param.ty.is_some() && ret.is_some()),
        Term::Case { left, right, .. } => assert!(left.ty.is_some() && right.ty.is_some()),
        _ => {}
    });
}

#[test]
fn printing_small_terms() {
    assert_eq!(pretty_print(&Term::Unit), "()");
    assert_eq!(pretty_print_in(&pair(var(0, "x"), Term::Unit), &["x".to_string()]), "(x, ())");
}

#[test]
fn printed_benchmarks_parse_back() {
    for name in ["coin_flip", "one_step", "gr", "ho_gr", "ho_rw", "file_writing"] {
        let p = common::program(name);
        let text = pretty_print(&p.term);
        let back = parse_program(&text, &Signature::standard()).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
        assert!(back.term.alpha_eq(&p.term), "{name}:\n{text}");
    }
}

#[test]
fn product_terms_parse_with_state() {
    let lifted = tvp::sps::transform_signature(&Signature::standard(), &common::spec("coin_flip")).unwrap();
    let p = parse_term("((), __y)", &lifted, &["__y".to_string()], true).unwrap();
    assert_eq!(p.term, pair(Term::Unit, var(0, "__y")));
    let ctx = Context::new().push("__y", Type::State);
    assert_eq!(typecheck(&ctx, &p.term, &lifted).unwrap(), Type::prod(Type::Unit, Type::State));
}

fn arb_type() -> impl Strategy<Value = Type> {
    let leaf = prop_oneof![Just(Type::Unit), Just(Type::Empty), Just(Type::real()), Just(Type::bool())];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::prod(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::sum(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Type::arrow(a, b)),
        ]
    })
}

fn has_arrow(t: &Type) -> bool {
    match t {
        Type::Arrow(..) => true,
        Type::Prod(a, b) | Type::Sum(a, b) => has_arrow(a) || has_arrow(b),
        _ => false,
    }
}

/// Every subterm of an elaborated term with the context it is typed in.
fn subterms<'a>(t: &'a Term, ctx: &Context, out: &mut Vec<(&'a Term, Context)>) {
    out.push((t, ctx.clone()));
    let bind = |b: &tvp::syntax::Binder| ctx.clone().push(b.name.clone(), b.ty.clone().expect("annotated"));
    match t {
        Term::Lam { param, body } => subterms(body, &bind(param), out),
        Term::Case { scrutinee, left, left_body, right, right_body } => {
            subterms(scrutinee, ctx, out);
            subterms(left_body, &bind(left), out);
            subterms(right_body, &bind(right), out);
        }
        Term::Rec { fun, param, ret, body } => {
            let a = param.ty.clone().expect("annotated");
            let f = Type::arrow(a.clone(), ret.clone().expect("annotated"));
            subterms(body, &ctx.clone().push(fun.clone(), f).push(param.name.clone(), a), out);
        }
        _ => {
            for c in t.children() {
                subterms(c, ctx, out);
            }
        }
    }
}

fn corpus_program(seed: u64, mode: Mode) -> tvp::syntax::Program {
    let case = generate_case(0, seed, 4, mode);
    parse_program(&case.program, &Signature::standard()).unwrap_or_else(|e| panic!("{e}\n{}", case.program))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ground_iff_no_arrow(t in arb_type()) {
        prop_assert_eq!(t.is_ground(), !has_arrow(&t));
    }

    #[test]
    fn types_print_and_parse_back(t in arb_type()) {
        let back = tvp::syntax::parse_type(&t.to_string(), false).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>(), reach in any::<bool>()) {
        let p = corpus_program(seed, if reach { Mode::Reach } else { Mode::Prob });
        let text = pretty_print(&p.term);
        let back = parse_program(&text, &Signature::standard()).unwrap();
        prop_assert!(back.term.alpha_eq(&p.term), "{}", text);
    }

    #[test]
    fn elaborated_terms_round_trip(seed in any::<u64>()) {
        let p = corpus_program(seed, Mode::Prob);
        let (t, _) = elaborate(&Context::new(), &p.term, &p.signature).unwrap();
        let text = pretty_print(&t);
        let back = parse_program(&text, &Signature::standard()).unwrap();
        prop_assert!(back.term.alpha_eq(&t), "{}", text);
    }

    #[test]
    fn typing_is_unique(seed in any::<u64>()) {
        let p = corpus_program(seed, Mode::Prob);
        let (t, ty) = elaborate(&Context::new(), &p.term, &p.signature).unwrap();
        prop_assert_eq!(typecheck(&Context::new(), &p.term, &p.signature).unwrap(), ty.clone());
        prop_assert_eq!(typecheck(&Context::new(), &t, &p.signature).unwrap(), ty);
    }

    #[test]
    fn weakening(seed in any::<u64>(), extra in arb_type()) {
        let p = corpus_program(seed, Mode::Reach);
        let (t, _) = elaborate(&Context::new(), &p.term, &p.signature).unwrap();
        let mut subs = Vec::new();
        subterms(&t, &Context::new(), &mut subs);
        for (s, ctx) in subs {
            let ty = typecheck(&ctx, s, &p.signature).unwrap();
            // Fresh innermost binding: indices shift past it.
            let inner = ctx.clone().push("fresh", extra.clone());
            prop_assert_eq!(typecheck(&inner, &s.shift(1, 0), &p.signature).unwrap(), ty.clone());
            // Fresh outermost binding: indices are unchanged.
            let mut outer = vec![("fresh".to_string(), extra.clone())];
            outer.extend(ctx.0.iter().cloned());
            prop_assert_eq!(typecheck(&Context(outer), s, &p.signature).unwrap(), ty);
        }
    }
}
