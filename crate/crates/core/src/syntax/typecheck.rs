//! Monomorphic type checking by unification. Missing binder annotations are
//! inferred; afterwards every binder, injection and `absurd` is annotated.

use thiserror::Error;

use super::signature::Signature;
use super::term::{Binder, Term};
use super::types::Type;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("type mismatch: expected {expected}, found {found}")]
    Mismatch { expected: String, found: String },
    #[error("unbound variable #{0}")]
    Unbound(usize),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("unknown effect `{0}`")]
    UnknownEffect(String),
    #[error("infinite type: {0} occurs in {1}")]
    Occurs(String, String),
    #[error("unknown base type `{0}`")]
    UnknownBase(String),
    #[error("annotation of injection must be a sum type, found {0}")]
    NotASum(String),
}

/// Ordered typing context, outermost binding first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Context(pub Vec<(String, Type)>);

impl Context {
    pub fn new() -> Self {
        Context(Vec::new())
    }

    pub fn push(mut self, name: impl Into<String>, t: Type) -> Self {
        self.0.push((name.into(), t));
        self
    }

    pub fn names(&self) -> Vec<String> {
        self.0.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum T {
    Meta(usize),
    Base(String),
    Unit,
    Empty,
    State,
    Prod(Box<T>, Box<T>),
    Sum(Box<T>, Box<T>),
    Arrow(Box<T>, Box<T>),
}

impl T {
    fn from_type(t: &Type) -> T {
        match t {
            Type::Base(n) => T::Base(n.clone()),
            Type::Unit => T::Unit,
            Type::Empty => T::Empty,
            Type::State => T::State,
            Type::Prod(a, b) => T::Prod(Box::new(T::from_type(a)), Box::new(T::from_type(b))),
            Type::Sum(a, b) => T::Sum(Box::new(T::from_type(a)), Box::new(T::from_type(b))),
            Type::Arrow(a, b) => T::Arrow(Box::new(T::from_type(a)), Box::new(T::from_type(b))),
        }
    }
}

struct Infer<'a> {
    sig: &'a Signature,
    subst: Vec<Option<T>>,
    /// Annotation sites in pre-order: binders, injections, absurds.
    sites: Vec<T>,
}

pub fn typecheck(ctx: &Context, term: &Term, sig: &Signature) -> Result<Type, TypeError> {
    elaborate(ctx, term, sig).map(|(_, t)| t)
}

/// Type checks and returns the fully annotated term with its type.
pub fn elaborate(ctx: &Context, term: &Term, sig: &Signature) -> Result<(Term, Type), TypeError> {
    let mut inf = Infer { sig, subst: Vec::new(), sites: Vec::new() };
    let mut env: Vec<T> = Vec::with_capacity(ctx.len());
    for (_, t) in &ctx.0 {
        env.push(inf.check_type(t)?);
    }
    let ty = inf.infer(&mut env, term)?;
    let sites: Vec<Type> = inf.sites.clone().iter().map(|s| inf.resolve(s)).collect();
    let mut it = sites.into_iter();
    let annotated = annotate(term, &mut it);
    Ok((annotated, inf.resolve(&ty)))
}

fn annotate(t: &Term, sites: &mut impl Iterator<Item = Type>) -> Term {
    fn take(sites: &mut impl Iterator<Item = Type>) -> Type {
        sites.next().expect("one site per annotation point")
    }
    match t {
        Term::Var { .. } | Term::Unit | Term::Real { .. } => t.clone(),
        Term::Const { name, arg } => Term::Const { name: name.clone(), arg: Box::new(annotate(arg, sites)) },
        Term::Effect { name, arg } => Term::Effect { name: name.clone(), arg: Box::new(annotate(arg, sites)) },
        Term::Pair { fst, snd } => {
            let a = annotate(fst, sites);
            Term::Pair { fst: Box::new(a), snd: Box::new(annotate(snd, sites)) }
        }
        Term::Proj { index, arg } => Term::Proj { index: *index, arg: Box::new(annotate(arg, sites)) },
        Term::Absurd { arg, .. } => {
            let ty = Some(take(sites));
            Term::Absurd { ty, arg: Box::new(annotate(arg, sites)) }
        }
        Term::Inj { index, arg, .. } => {
            let ty = Some(take(sites));
            Term::Inj { index: *index, ty, arg: Box::new(annotate(arg, sites)) }
        }
        Term::Case { scrutinee, left, left_body, right, right_body } => {
            let lt = take(sites);
            let rt = take(sites);
            let s = annotate(scrutinee, sites);
            let lb = annotate(left_body, sites);
            let rb = annotate(right_body, sites);
            Term::Case {
                scrutinee: Box::new(s),
                left: Binder::typed(left.name.clone(), lt),
                left_body: Box::new(lb),
                right: Binder::typed(right.name.clone(), rt),
                right_body: Box::new(rb),
            }
        }
        Term::Lam { param, body } => {
            let pt = take(sites);
            Term::Lam { param: Binder::typed(param.name.clone(), pt), body: Box::new(annotate(body, sites)) }
        }
        Term::App { fun, arg } => {
            let f = annotate(fun, sites);
            Term::App { fun: Box::new(f), arg: Box::new(annotate(arg, sites)) }
        }
        Term::Rec { fun, param, body, .. } => {
            let pt = take(sites);
            let rt = take(sites);
            Term::Rec {
                fun: fun.clone(),
                param: Binder::typed(param.name.clone(), pt),
                ret: Some(rt),
                body: Box::new(annotate(body, sites)),
            }
        }
    }
}

impl<'a> Infer<'a> {
    fn fresh(&mut self) -> T {
        self.subst.push(None);
        T::Meta(self.subst.len() - 1)
    }

    fn check_type(&self, t: &Type) -> Result<T, TypeError> {
        let mut bad = None;
        fn walk(t: &Type, sig: &Signature, bad: &mut Option<String>) {
            match t {
                Type::Base(n) if !sig.bases.contains(n) => *bad = Some(n.clone()),
                Type::Prod(a, b) | Type::Sum(a, b) | Type::Arrow(a, b) => {
                    walk(a, sig, bad);
                    walk(b, sig, bad);
                }
                _ => {}
            }
        }
        walk(t, self.sig, &mut bad);
        match bad {
            Some(n) => Err(TypeError::UnknownBase(n)),
            None => Ok(T::from_type(t)),
        }
    }

    fn annotation(&mut self, t: &Option<Type>) -> Result<T, TypeError> {
        match t {
            Some(t) => self.check_type(t),
            None => Ok(self.fresh()),
        }
    }

    fn shallow(&self, t: &T) -> T {
        let mut cur = t.clone();
        while let T::Meta(m) = cur {
            match &self.subst[m] {
                Some(next) => cur = next.clone(),
                None => break,
            }
        }
        cur
    }

    fn zonk(&self, t: &T) -> T {
        match self.shallow(t) {
            T::Prod(a, b) => T::Prod(Box::new(self.zonk(&a)), Box::new(self.zonk(&b))),
            T::Sum(a, b) => T::Sum(Box::new(self.zonk(&a)), Box::new(self.zonk(&b))),
            T::Arrow(a, b) => T::Arrow(Box::new(self.zonk(&a)), Box::new(self.zonk(&b))),
            other => other,
        }
    }

    /// Final type; unconstrained variables become `unit`.
    fn resolve(&self, t: &T) -> Type {
        match self.shallow(t) {
            T::Meta(_) | T::Unit => Type::Unit,
            T::Base(n) => Type::Base(n),
            T::Empty => Type::Empty,
            T::State => Type::State,
            T::Prod(a, b) => Type::prod(self.resolve(&a), self.resolve(&b)),
            T::Sum(a, b) => Type::sum(self.resolve(&a), self.resolve(&b)),
            T::Arrow(a, b) => Type::arrow(self.resolve(&a), self.resolve(&b)),
        }
    }

    fn show(&self, t: &T) -> String {
        fn go(t: &T, out: &mut String, prec: u8) {
            let open = match t {
                T::Arrow(..) => prec > 0,
                T::Sum(..) => prec > 1,
                T::Prod(..) => prec > 2,
                _ => false,
            };
            if open {
                out.push('(');
            }
            match t {
                T::Meta(m) => out.push_str(&format!("?{m}")),
                T::Base(n) => out.push_str(n),
                T::Unit => out.push_str("unit"),
                T::Empty => out.push_str("empty"),
                T::State => out.push_str("state"),
                T::Arrow(a, b) => {
                    go(a, out, 1);
                    out.push_str(" -> ");
                    go(b, out, 0);
                }
                T::Sum(a, b) => {
                    go(a, out, 1);
                    out.push_str(" + ");
                    go(b, out, 2);
                }
                T::Prod(a, b) => {
                    go(a, out, 2);
                    out.push_str(" * ");
                    go(b, out, 3);
                }
            }
            if open {
                out.push(')');
            }
        }
        let mut s = String::new();
        go(&self.zonk(t), &mut s, 0);
        s
    }

    fn occurs(&self, m: usize, t: &T) -> bool {
        match self.shallow(t) {
            T::Meta(n) => n == m,
            T::Prod(a, b) | T::Sum(a, b) | T::Arrow(a, b) => self.occurs(m, &a) || self.occurs(m, &b),
            _ => false,
        }
    }

    /// Unifies `found` against `expected`.
    fn unify(&mut self, expected: &T, found: &T) -> Result<(), TypeError> {
        let (a, b) = (self.shallow(expected), self.shallow(found));
        match (&a, &b) {
            (T::Meta(m), T::Meta(n)) if m == n => Ok(()),
            (T::Meta(m), other) | (other, T::Meta(m)) => {
                if self.occurs(*m, other) {
                    return Err(TypeError::Occurs(format!("?{m}"), self.show(other)));
                }
                self.subst[*m] = Some(other.clone());
                Ok(())
            }
            (T::Unit, T::Unit) | (T::Empty, T::Empty) | (T::State, T::State) => Ok(()),
            (T::Base(x), T::Base(y)) if x == y => Ok(()),
            (T::Prod(a1, a2), T::Prod(b1, b2))
            | (T::Sum(a1, a2), T::Sum(b1, b2))
            | (T::Arrow(a1, a2), T::Arrow(b1, b2)) => {
                self.unify(a1, b1).map_err(|_| self.mismatch(&a, &b))?;
                self.unify(a2, b2).map_err(|_| self.mismatch(&a, &b))
            }
            _ => Err(self.mismatch(&a, &b)),
        }
    }

    fn mismatch(&self, expected: &T, found: &T) -> TypeError {
        TypeError::Mismatch { expected: self.show(expected), found: self.show(found) }
    }

    fn infer(&mut self, env: &mut Vec<T>, t: &Term) -> Result<T, TypeError> {
        match t {
            Term::Var { index, .. } => {
                if *index >= env.len() {
                    return Err(TypeError::Unbound(*index));
                }
                Ok(env[env.len() - 1 - index].clone())
            }
            Term::Const { name, arg } => {
                let op = self.sig.constant(name).ok_or_else(|| TypeError::UnknownConstant(name.clone()))?;
                let (ar, car) = (T::from_type(&op.arity), T::from_type(&op.coarity));
                let a = self.infer(env, arg)?;
                self.unify(&ar, &a)?;
                Ok(car)
            }
            Term::Effect { name, arg } => {
                let op = self.sig.effect(name).ok_or_else(|| TypeError::UnknownEffect(name.clone()))?;
                let (ar, car) = (T::from_type(&op.arity), T::from_type(&op.coarity));
                let a = self.infer(env, arg)?;
                self.unify(&ar, &a)?;
                Ok(car)
            }
            Term::Unit => Ok(T::Unit),
            Term::Real { .. } => {
                let real = Type::real();
                self.check_type(&real)
            }
            Term::Pair { fst, snd } => {
                let a = self.infer(env, fst)?;
                let b = self.infer(env, snd)?;
                Ok(T::Prod(Box::new(a), Box::new(b)))
            }
            Term::Proj { index, arg } => {
                let a = self.infer(env, arg)?;
                let (l, r) = (self.fresh(), self.fresh());
                self.unify(&T::Prod(Box::new(l.clone()), Box::new(r.clone())), &a)?;
                Ok(if *index == 1 { l } else { r })
            }
            Term::Absurd { ty, arg } => {
                let target = self.annotation(ty)?;
                self.sites.push(target.clone());
                let a = self.infer(env, arg)?;
                self.unify(&T::Empty, &a)?;
                Ok(target)
            }
            Term::Inj { index, ty, arg } => {
                let whole = match ty {
                    Some(t @ Type::Sum(..)) => self.check_type(t)?,
                    Some(other) => return Err(TypeError::NotASum(other.to_string())),
                    None => {
                        let (l, r) = (self.fresh(), self.fresh());
                        T::Sum(Box::new(l), Box::new(r))
                    }
                };
                self.sites.push(whole.clone());
                let a = self.infer(env, arg)?;
                let T::Sum(l, r) = &whole else { unreachable!() };
                self.unify(if *index == 1 { l } else { r }, &a)?;
                Ok(whole)
            }
            Term::Case { scrutinee, left, left_body, right, right_body } => {
                let lt = self.annotation(&left.ty)?;
                let rt = self.annotation(&right.ty)?;
                self.sites.push(lt.clone());
                self.sites.push(rt.clone());
                let s = self.infer(env, scrutinee)?;
                self.unify(&T::Sum(Box::new(lt.clone()), Box::new(rt.clone())), &s)?;
                env.push(lt);
                let a = self.infer(env, left_body);
                env.pop();
                let a = a?;
                env.push(rt);
                let b = self.infer(env, right_body);
                env.pop();
                let b = b?;
                self.unify(&a, &b)?;
                Ok(a)
            }
            Term::Lam { param, body } => {
                let pt = self.annotation(&param.ty)?;
                self.sites.push(pt.clone());
                env.push(pt.clone());
                let b = self.infer(env, body);
                env.pop();
                Ok(T::Arrow(Box::new(pt), Box::new(b?)))
            }
            Term::App { fun, arg } => {
                let f = self.infer(env, fun)?;
                let a = self.infer(env, arg)?;
                let r = self.fresh();
                match self.shallow(&f) {
                    T::Arrow(p, res) => {
                        self.unify(&p, &a)?;
                        self.unify(&res, &r)?;
                    }
                    _ => self.unify(&f, &T::Arrow(Box::new(a), Box::new(r.clone())))?,
                }
                Ok(r)
            }
            Term::Rec { param, ret, body, .. } => {
                let pt = self.annotation(&param.ty)?;
                let rt = self.annotation(ret)?;
                self.sites.push(pt.clone());
                self.sites.push(rt.clone());
                let ft = T::Arrow(Box::new(pt.clone()), Box::new(rt.clone()));
                env.push(ft.clone());
                env.push(pt);
                let b = self.infer(env, body);
                env.pop();
                env.pop();
                self.unify(&rt, &b?)?;
                Ok(ft)
            }
        }
    }
}
