use crate::syntax::term::{app, case, lam, pair, var};
use crate::syntax::{Binder, Term, Type};

const MAX_PASSES: usize = 10_000;

/// Pure, always-terminating arguments that may be substituted freely:
/// variables, literals, projections of variables, λ/μ, and tuples or
/// injections of those.
fn trivial(t: &Term) -> bool {
    match t {
        Term::Var { .. } | Term::Unit | Term::Real { .. } | Term::Lam { .. } | Term::Rec { .. } => true,
        Term::Proj { arg, .. } => access_path(arg),
        Term::Pair { fst, snd } => trivial(fst) && trivial(snd),
        Term::Inj { arg, .. } => trivial(arg),
        _ => false,
    }
}

fn access_path(t: &Term) -> bool {
    match t {
        Term::Var { .. } => true,
        Term::Proj { arg, .. } => access_path(arg),
        _ => false,
    }
}

fn has_code(t: &Term) -> bool {
    let mut hit = false;
    t.walk(&mut |s| hit |= matches!(s, Term::Lam { .. } | Term::Rec { .. }));
    hit
}

fn occurrences(body: &Term) -> usize {
    let mut n = 0;
    body.map_free(&mut |i, name, d| {
        if i == d {
            n += 1;
        }
        var(i, name)
    });
    n
}

/// Substituting `v` for the bound variable of `body` neither drops effects
/// nor duplicates code.
fn substitutable(v: &Term, body: &Term) -> bool {
    trivial(v) && (!has_code(v) || occurrences(body) <= 1)
}

/// One bottom-up pass. Returns the rewritten term and whether anything fired.
fn pass(t: &Term) -> (Term, bool) {
    let mut changed = false;
    let kids: Vec<Term> = t
        .children()
        .into_iter()
        .map(|c| {
            let (c, ch) = pass(c);
            changed |= ch;
            c
        })
        .collect();
    let t = rebuild(t, kids);
    match &t {
        Term::App { fun, arg } => {
            if let Term::Lam { param, body } = fun.as_ref() {
                if substitutable(arg, body) {
                    return (body.instantiate(arg), true);
                }
                if let Term::Pair { fst, snd } = arg.as_ref() {
                    if trivial(fst) && trivial(snd) {
                        return (split(param, body, fst, snd), true);
                    }
                }
            }
        }
        Term::Proj { index, arg } => {
            if let Term::Pair { fst, snd } = arg.as_ref() {
                if trivial(fst) && trivial(snd) {
                    let keep = if *index == 1 { fst } else { snd };
                    return ((**keep).clone(), true);
                }
            }
        }
        Term::Case { scrutinee, left, left_body, right, right_body } => {
            if let Term::Inj { index, arg, .. } = scrutinee.as_ref() {
                let body = if *index == 1 { left_body } else { right_body };
                if substitutable(arg, body) {
                    return (body.instantiate(arg), true);
                }
            }
            // case (let z = e in n) of .. ~> let z = e in case n of ..
            if let Term::App { fun, arg } = scrutinee.as_ref() {
                if let Term::Lam { param, body } = fun.as_ref() {
                    let inner = Term::Case {
                        scrutinee: body.clone(),
                        left: left.clone(),
                        left_body: Box::new(left_body.shift(1, 1)),
                        right: right.clone(),
                        right_body: Box::new(right_body.shift(1, 1)),
                    };
                    return (app(Term::Lam { param: param.clone(), body: Box::new(inner) }, (**arg).clone()), true);
                }
            }
            // case of a case whose branches are injections
            if let Term::Case { scrutinee: s, left: l1, left_body: a, right: r1, right_body: b } = scrutinee.as_ref() {
                let pick = |inner: &Term| -> Option<Term> {
                    let Term::Inj { index, arg, .. } = inner else { return None };
                    let outer = if *index == 1 { left_body } else { right_body };
                    let outer = outer.shift(1, 1);
                    substitutable(arg, &outer).then(|| outer.instantiate(arg))
                };
                if let (Some(a), Some(b)) = (pick(a), pick(b)) {
                    return (case((**s).clone(), l1.clone(), a, r1.clone(), b), true);
                }
            }
        }
        _ => {}
    }
    (t, changed)
}

/// `(λz. body) (a, b)` ~> `(λz1. (λz2. body[(z1, z2)/z]) b) a`, so each
/// component is substituted on its own terms.
fn split(param: &Binder, body: &Term, a: &Term, b: &Term) -> Term {
    let (ta, tb) = match &param.ty {
        Some(Type::Prod(x, y)) => (Some((**x).clone()), Some((**y).clone())),
        _ => (None, None),
    };
    let n1 = format!("{}_1", param.name);
    let n2 = format!("{}_2", param.name);
    let body = body.shift(1, 1).subst(0, &pair(var(1, n1.clone()), var(0, n2.clone())));
    let inner = app(lam(Binder::new(n2, tb), body), b.shift(1, 0));
    app(lam(Binder::new(n1, ta), inner), a.clone())
}

fn rebuild(t: &Term, kids: Vec<Term>) -> Term {
    let mut it = kids.into_iter().map(Box::new);
    let mut next = || it.next().expect("child count");
    match t {
        Term::Var { .. } | Term::Unit | Term::Real { .. } => t.clone(),
        Term::Const { name, .. } => Term::Const { name: name.clone(), arg: next() },
        Term::Effect { name, .. } => Term::Effect { name: name.clone(), arg: next() },
        Term::Proj { index, .. } => Term::Proj { index: *index, arg: next() },
        Term::Absurd { ty, .. } => Term::Absurd { ty: ty.clone(), arg: next() },
        Term::Inj { index, ty, .. } => Term::Inj { index: *index, ty: ty.clone(), arg: next() },
        Term::Pair { .. } => Term::Pair { fst: next(), snd: next() },
        Term::Case { left, right, .. } => Term::Case {
            scrutinee: next(),
            left: left.clone(),
            left_body: next(),
            right: right.clone(),
            right_body: next(),
        },
        Term::Lam { param, .. } => Term::Lam { param: param.clone(), body: next() },
        Term::App { .. } => Term::App { fun: next(), arg: next() },
        Term::Rec { fun, param, ret, .. } => {
            Term::Rec { fun: fun.clone(), param: param.clone(), ret: ret.clone(), body: next() }
        }
    }
}

/// Removes administrative redexes: β for λ applied to a trivial argument,
/// projections of pairs of trivial components, and case on a known
/// injection. Effectful arguments are never moved or dropped, so effect
/// order and the weakest pre-condition are preserved. Runs to a fixpoint.
pub fn simplify(m: &Term) -> Term {
    let mut cur = m.clone();
    for _ in 0..MAX_PASSES {
        let (next, changed) = pass(&cur);
        if !changed {
            return next;
        }
        cur = next;
    }
    cur
}
