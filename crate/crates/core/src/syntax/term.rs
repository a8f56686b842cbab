use serde::{Deserialize, Serialize};

use super::types::Type;

/// A binding occurrence. The name is for display only; `_` marks a binder
/// that source text cannot reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binder {
    pub name: String,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub ty: Option<Type>,
}

impl Binder {
    pub fn new(name: impl Into<String>, ty: Option<Type>) -> Self {
        Binder { name: name.into(), ty }
    }

    pub fn typed(name: impl Into<String>, ty: Type) -> Self {
        Binder::new(name, Some(ty))
    }

    pub fn unused() -> Self {
        Binder::new("_", None)
    }
}

/// Terms with de Bruijn indices. `Var { index: 0 }` is the innermost binder.
///
/// `Inj` carries the whole sum type and `Absurd` its target type once
/// elaborated. `Rec` binds the function first and the parameter second, so
/// inside `body` the parameter has index 0 and the function index 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Term {
    Var {
        index: usize,
        name: String,
    },
    Const {
        name: String,
        arg: Box<Term>,
    },
    Effect {
        name: String,
        arg: Box<Term>,
    },
    Unit,
    Real {
        value: f64,
    },
    Pair {
        fst: Box<Term>,
        snd: Box<Term>,
    },
    Proj {
        index: u8,
        arg: Box<Term>,
    },
    Absurd {
        #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
        ty: Option<Type>,
        arg: Box<Term>,
    },
    Inj {
        index: u8,
        #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
        ty: Option<Type>,
        arg: Box<Term>,
    },
    Case {
        scrutinee: Box<Term>,
        left: Binder,
        left_body: Box<Term>,
        right: Binder,
        right_body: Box<Term>,
    },
    Lam {
        param: Binder,
        body: Box<Term>,
    },
    App {
        fun: Box<Term>,
        arg: Box<Term>,
    },
    Rec {
        fun: String,
        param: Binder,
        #[serde(rename = "returns", default, skip_serializing_if = "Option::is_none")]
        ret: Option<Type>,
        body: Box<Term>,
    },
}

pub fn var(index: usize, name: impl Into<String>) -> Term {
    Term::Var { index, name: name.into() }
}

pub fn pair(a: Term, b: Term) -> Term {
    Term::Pair { fst: Box::new(a), snd: Box::new(b) }
}

pub fn proj(index: u8, t: Term) -> Term {
    Term::Proj { index, arg: Box::new(t) }
}

pub fn app(f: Term, a: Term) -> Term {
    Term::App { fun: Box::new(f), arg: Box::new(a) }
}

pub fn lam(param: Binder, body: Term) -> Term {
    Term::Lam { param, body: Box::new(body) }
}

pub fn inj(index: u8, ty: Option<Type>, t: Term) -> Term {
    Term::Inj { index, ty, arg: Box::new(t) }
}

pub fn constant(name: impl Into<String>, arg: Term) -> Term {
    Term::Const { name: name.into(), arg: Box::new(arg) }
}

pub fn effect(name: impl Into<String>, arg: Term) -> Term {
    Term::Effect { name: name.into(), arg: Box::new(arg) }
}

pub fn case(scrutinee: Term, left: Binder, l: Term, right: Binder, r: Term) -> Term {
    Term::Case { scrutinee: Box::new(scrutinee), left, left_body: Box::new(l), right, right_body: Box::new(r) }
}

/// `M; N` as `(fun _ -> N) M`, with `n` already in scope of the extra binder.
pub fn seq(m: Term, n: Term) -> Term {
    app(lam(Binder::unused(), n), m)
}

impl Term {
    /// Rewrites every free variable. `f(index, name, depth)` sees variables
    /// whose index is at least `depth`, i.e. those bound outside the term.
    pub fn map_free(&self, f: &mut dyn FnMut(usize, &str, usize) -> Term) -> Term {
        self.map_free_at(0, f)
    }

    fn map_free_at(&self, depth: usize, f: &mut dyn FnMut(usize, &str, usize) -> Term) -> Term {
        fn go(t: &Term, d: usize, f: &mut dyn FnMut(usize, &str, usize) -> Term) -> Box<Term> {
            Box::new(t.map_free_at(d, f))
        }
        match self {
            Term::Var { index, name } => {
                if *index >= depth {
                    f(*index, name, depth)
                } else {
                    self.clone()
                }
            }
            Term::Const { name, arg } => Term::Const { name: name.clone(), arg: go(arg, depth, f) },
            Term::Effect { name, arg } => Term::Effect { name: name.clone(), arg: go(arg, depth, f) },
            Term::Unit | Term::Real { .. } => self.clone(),
            Term::Pair { fst, snd } => Term::Pair { fst: go(fst, depth, f), snd: go(snd, depth, f) },
            Term::Proj { index, arg } => Term::Proj { index: *index, arg: go(arg, depth, f) },
            Term::Absurd { ty, arg } => Term::Absurd { ty: ty.clone(), arg: go(arg, depth, f) },
            Term::Inj { index, ty, arg } => Term::Inj { index: *index, ty: ty.clone(), arg: go(arg, depth, f) },
            Term::Case { scrutinee, left, left_body, right, right_body } => Term::Case {
                scrutinee: go(scrutinee, depth, f),
                left: left.clone(),
                left_body: go(left_body, depth + 1, f),
                right: right.clone(),
                right_body: go(right_body, depth + 1, f),
            },
            Term::Lam { param, body } => Term::Lam { param: param.clone(), body: go(body, depth + 1, f) },
            Term::App { fun, arg } => Term::App { fun: go(fun, depth, f), arg: go(arg, depth, f) },
            Term::Rec { fun, param, ret, body } => {
                Term::Rec { fun: fun.clone(), param: param.clone(), ret: ret.clone(), body: go(body, depth + 2, f) }
            }
        }
    }

    /// Adds `by` to every free index at or above `cutoff`.
    pub fn shift(&self, by: isize, cutoff: usize) -> Term {
        self.map_free(&mut |i, n, d| {
            if i >= cutoff + d {
                var((i as isize + by) as usize, n)
            } else {
                var(i, n)
            }
        })
    }

    /// Replaces the free variable `j` with `s`; other indices are untouched.
    pub fn subst(&self, j: usize, s: &Term) -> Term {
        self.map_free(&mut |i, n, d| if i == j + d { s.shift(d as isize, 0) } else { var(i, n) })
    }

    /// Body of a binder with index 0 instantiated by `v` (which lives outside
    /// the binder).
    pub fn instantiate(&self, v: &Term) -> Term {
        self.subst(0, &v.shift(1, 0)).shift(-1, 0)
    }

    pub fn has_free(&self, j: usize) -> bool {
        let mut hit = false;
        self.map_free(&mut |i, n, d| {
            if i == j + d {
                hit = true;
            }
            var(i, n)
        });
        hit
    }

    /// Sorted, deduplicated free indices relative to this term.
    pub fn free_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.map_free(&mut |i, n, d| {
            out.push(i - d);
            var(i, n)
        });
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_indices().is_empty()
    }

    /// Syntactic values: variables, literals, λ, μ, and tuples/injections of values.
    pub fn is_value(&self) -> bool {
        match self {
            Term::Var { .. } | Term::Unit | Term::Real { .. } | Term::Lam { .. } | Term::Rec { .. } => true,
            Term::Pair { fst, snd } => fst.is_value() && snd.is_value(),
            Term::Inj { arg, .. } => arg.is_value(),
            _ => false,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var { .. } | Term::Unit | Term::Real { .. } => vec![],
            Term::Const { arg, .. }
            | Term::Effect { arg, .. }
            | Term::Proj { arg, .. }
            | Term::Absurd { arg, .. }
            | Term::Inj { arg, .. } => vec![arg],
            Term::Pair { fst, snd } => vec![fst, snd],
            Term::Case { scrutinee, left_body, right_body, .. } => vec![scrutinee, left_body, right_body],
            Term::Lam { body, .. } | Term::Rec { body, .. } => vec![body],
            Term::App { fun, arg } => vec![fun, arg],
        }
    }

    /// Effect names in left-to-right occurrence order.
    pub fn effects(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let Term::Effect { name, .. } = t {
                out.push(name.as_str());
            }
        });
        out
    }

    /// Constant names in left-to-right occurrence order.
    pub fn constants(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let Term::Const { name, .. } = t {
                out.push(name.as_str());
            }
        });
        out
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Structural equality ignoring display names.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        use Term::*;
        let b = |x: &Binder, y: &Binder| x.ty == y.ty;
        match (self, other) {
            (Var { index: a, .. }, Var { index: c, .. }) => a == c,
            (Const { name: n1, arg: a1 }, Const { name: n2, arg: a2 })
            | (Effect { name: n1, arg: a1 }, Effect { name: n2, arg: a2 }) => n1 == n2 && a1.alpha_eq(a2),
            (Unit, Unit) => true,
            (Real { value: a }, Real { value: c }) => a.to_bits() == c.to_bits(),
            (Pair { fst: a, snd: b1 }, Pair { fst: c, snd: d }) => a.alpha_eq(c) && b1.alpha_eq(d),
            (Proj { index: i, arg: a }, Proj { index: j, arg: c }) => i == j && a.alpha_eq(c),
            (Absurd { ty: t1, arg: a }, Absurd { ty: t2, arg: c }) => t1 == t2 && a.alpha_eq(c),
            (Inj { index: i, ty: t1, arg: a }, Inj { index: j, ty: t2, arg: c }) => i == j && t1 == t2 && a.alpha_eq(c),
            (
                Case { scrutinee: s1, left: l1, left_body: lb1, right: r1, right_body: rb1 },
                Case { scrutinee: s2, left: l2, left_body: lb2, right: r2, right_body: rb2 },
            ) => s1.alpha_eq(s2) && b(l1, l2) && lb1.alpha_eq(lb2) && b(r1, r2) && rb1.alpha_eq(rb2),
            (Lam { param: p1, body: b1 }, Lam { param: p2, body: b2 }) => b(p1, p2) && b1.alpha_eq(b2),
            (App { fun: f1, arg: a1 }, App { fun: f2, arg: a2 }) => f1.alpha_eq(f2) && a1.alpha_eq(a2),
            (Rec { param: p1, ret: t1, body: b1, .. }, Rec { param: p2, ret: t2, body: b2, .. }) => {
                b(p1, p2) && t1 == t2 && b1.alpha_eq(b2)
            }
            _ => false,
        }
    }
}
