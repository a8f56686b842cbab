use super::TransformError;
use crate::syntax::signature::{step_name, EffectKind, OpSig};
use crate::syntax::term::{app, constant, effect, inj, lam, pair, proj, var};
use crate::syntax::{elaborate, Binder, Context, Signature, Term, Type, STATE_VAR};

#[derive(Debug, Clone, PartialEq)]
pub struct TransformOutput {
    pub term: Term,
    pub ty: Type,
    pub context: Context,
    pub signature: Signature,
}

/// `t′`: arrows become state-passing, everything else is structural.
pub fn transform_prime(t: &Type) -> Result<Type, TransformError> {
    Ok(match t {
        Type::Base(_) | Type::Unit | Type::Empty => t.clone(),
        Type::Prod(a, b) => Type::prod(transform_prime(a)?, transform_prime(b)?),
        Type::Sum(a, b) => Type::sum(transform_prime(a)?, transform_prime(b)?),
        Type::Arrow(a, b) => Type::arrow(transform_type(a)?, transform_type(b)?),
        Type::State => return Err(TransformError::StateInInput(t.to_string())),
    })
}

/// `↑t = t′ × state`.
pub fn transform_type(t: &Type) -> Result<Type, TransformError> {
    Ok(Type::prod(transform_prime(t)?, Type::State))
}

pub fn transform_context(ctx: &Context) -> Result<Context, TransformError> {
    let mut out = Context::new();
    for (n, t) in &ctx.0 {
        if n == STATE_VAR {
            return Err(TransformError::ReservedVariable);
        }
        out = out.push(n.clone(), transform_prime(t)?);
    }
    Ok(out.push(STATE_VAR, Type::State))
}

/// Lifted signature without checking emits against an alphabet.
pub(crate) fn lift_signature(sig: &Signature) -> Signature {
    let lift = |t: &Type| Type::prod(t.clone(), Type::State);
    let mut out = Signature { bases: sig.bases.clone(), lifted: true, ..Signature::empty() };
    for (n, o) in &sig.constants {
        out.constants
            .insert(n.clone(), OpSig { kind: o.kind.clone(), arity: lift(&o.arity), coarity: lift(&o.coarity) });
    }
    for (n, o) in &sig.effects {
        let (arity, coarity) = (lift(&o.arity), lift(&o.coarity));
        match &o.kind {
            EffectKind::Emit(a) => {
                out.constants
                    .insert(step_name(a), OpSig { kind: crate::syntax::ConstKind::Step(a.clone()), arity, coarity });
            }
            k => {
                out.effects.insert(n.clone(), OpSig { kind: k.clone(), arity, coarity });
            }
        }
    }
    out
}

/// Transforms a term typed in `ctx`. The output is elaborated in the lifted
/// context and signature, so every binder is annotated.
pub fn transform_term(m: &Term, ctx: &Context, sig: &Signature) -> Result<TransformOutput, TransformError> {
    if sig.lifted {
        return Err(TransformError::AlreadyLifted);
    }
    let mut mentions_y = false;
    m.walk(&mut |t| {
        if let Term::Var { name, .. } = t {
            mentions_y |= name == STATE_VAR;
        }
    });
    if mentions_y {
        return Err(TransformError::ReservedVariable);
    }
    let (m, t) = elaborate(ctx, m, sig)?;
    let context = transform_context(ctx)?;
    let signature = lift_signature(sig);
    let mut tr = Transformer { sig, fresh: 0 };
    let env: Vec<Path> = (0..ctx.len()).map(Path::at).collect();
    let raw = tr.go(&m, &mut env.clone(), &Path::at(ctx.len()), ctx.len() + 1)?;
    let (term, ty) = elaborate(&context, &raw, &signature).map_err(TransformError::Output)?;
    let want = transform_type(&t)?;
    if ty != want {
        return Err(TransformError::Output(crate::syntax::TypeError::Mismatch {
            expected: want.to_string(),
            found: ty.to_string(),
        }));
    }
    Ok(TransformOutput { term, ty, context, signature })
}

/// Where a source variable lives in the output: a binder level (counted
/// from the outermost context entry) under a chain of projections, applied
/// first to last.
#[derive(Debug, Clone)]
struct Path {
    level: usize,
    projs: Vec<u8>,
}

impl Path {
    fn at(level: usize) -> Path {
        Path { level, projs: Vec::new() }
    }

    fn proj(level: usize, i: u8) -> Path {
        Path { level, projs: vec![i] }
    }

    fn emit(&self, depth: usize, name: &str) -> Term {
        self.projs.iter().fold(var(depth - 1 - self.level, name), |t, i| proj(*i, t))
    }
}

struct Transformer<'s> {
    sig: &'s Signature,
    fresh: usize,
}

fn y_at(y: &Path, depth: usize) -> Term {
    y.emit(depth, STATE_VAR)
}

impl Transformer<'_> {
    fn z(&mut self) -> String {
        self.fresh += 1;
        format!("z{}", self.fresh)
    }

    /// `λz. body`; inside `body`, `z(&[i, j])` builds `πi πj z`.
    fn admin(&mut self, body: impl FnOnce(&dyn Fn(&[u8]) -> Term) -> Term) -> Term {
        let z = self.z();
        let zn = z.clone();
        let zr = move |ps: &[u8]| ps.iter().rev().fold(var(0, zn.clone()), |t, i| proj(*i, t));
        lam(Binder::new(z, None), body(&zr))
    }

    fn go(&mut self, m: &Term, env: &mut Vec<Path>, y: &Path, d: usize) -> Result<Term, TransformError> {
        Ok(match m {
            Term::Var { index, name } => {
                let p = &env[env.len() - 1 - index];
                pair(p.emit(d, name), y_at(y, d))
            }
            Term::Const { name, arg } => constant(name.clone(), self.go(arg, env, y, d)?),
            Term::Effect { name, arg } => {
                let a = self.go(arg, env, y, d)?;
                match self.sig.effect(name).map(|o| &o.kind) {
                    Some(EffectKind::Emit(s)) => constant(step_name(s), a),
                    _ => effect(name.clone(), a),
                }
            }
            Term::Unit => pair(Term::Unit, y_at(y, d)),
            Term::Real { .. } => pair(m.clone(), y_at(y, d)),
            Term::Pair { fst, snd } => {
                // (λz. ((π1 z, π1 π2 z), π2 π2 z)) ((λz. (π1 z, (λy. ↑N)(π2 z))) ↑M)
                let tm = self.go(fst, env, y, d)?;
                let outer = self.admin(|z| pair(pair(z(&[1]), z(&[1, 2])), z(&[2, 2])));
                let zi = self.z();
                let tn = self.go(snd, env, &Path::at(d + 1), d + 2)?;
                let inner = lam(
                    Binder::new(zi.clone(), None),
                    pair(proj(1, var(0, zi.clone())), app(lam(Binder::new(STATE_VAR, None), tn), proj(2, var(0, zi)))),
                );
                app(outer, app(inner, tm))
            }
            Term::Proj { index, arg } => {
                let tm = self.go(arg, env, y, d)?;
                let i = *index;
                let f = self.admin(|z| pair(z(&[i, 1]), z(&[2])));
                app(f, tm)
            }
            Term::Absurd { ty, arg } => {
                let tm = self.go(arg, env, y, d)?;
                let ty = ty.as_ref().map(transform_prime).transpose()?;
                let f = self.admin(|z| pair(Term::Absurd { ty, arg: Box::new(z(&[1])) }, z(&[2])));
                app(f, tm)
            }
            Term::Inj { index, ty, arg } => {
                let tm = self.go(arg, env, y, d)?;
                let ty = ty.as_ref().map(transform_prime).transpose()?;
                let i = *index;
                let f = self.admin(|z| pair(inj(i, ty, z(&[1])), z(&[2])));
                app(f, tm)
            }
            Term::Case { scrutinee, left, left_body, right, right_body } => {
                let tm = self.go(scrutinee, env, y, d)?;
                let t1 = left.ty.as_ref().map(transform_prime).transpose()?;
                let t2 = right.ty.as_ref().map(transform_prime).transpose()?;
                let sum = match (&t1, &t2) {
                    (Some(a), Some(b)) => {
                        Some(Type::sum(Type::prod(a.clone(), Type::State), Type::prod(b.clone(), Type::State)))
                    }
                    _ => None,
                };
                // N := (λz. δ(π1 z, x1. ι1(x1, π2 z), x2. ι2(x2, π2 z))) ↑M
                let zn = self.z();
                let z_in = |k: usize| proj(2, var(k, zn.clone()));
                let n = app(
                    lam(
                        Binder::new(zn.clone(), None),
                        crate::syntax::term::case(
                            proj(1, var(0, zn.clone())),
                            Binder::new(left.name.clone(), t1.clone()),
                            inj(1, sum.clone(), pair(var(0, left.name.clone()), z_in(1))),
                            Binder::new(right.name.clone(), t2.clone()),
                            inj(2, sum, pair(var(0, right.name.clone()), z_in(1))),
                        ),
                    ),
                    tm,
                );
                let mut branch = |this: &mut Self, b: &Binder, body: &Term| -> Result<(Binder, Term), TransformError> {
                    let z = this.z();
                    let ty = b.ty.as_ref().map(transform_type).transpose()?;
                    env.push(Path::proj(d, 1));
                    let out = this.go(body, env, &Path::proj(d, 2), d + 1);
                    env.pop();
                    Ok((Binder::new(z, ty), out?))
                };
                let (lb, lt) = branch(self, left, left_body)?;
                let (rb, rt) = branch(self, right, right_body)?;
                crate::syntax::term::case(n, lb, lt, rb, rt)
            }
            Term::Lam { param, body } => {
                let z = self.z();
                let ty = param.ty.as_ref().map(transform_type).transpose()?;
                env.push(Path::proj(d, 1));
                let out = self.go(body, env, &Path::proj(d, 2), d + 1);
                env.pop();
                pair(lam(Binder::new(z, ty), out?), y_at(y, d))
            }
            Term::App { fun, arg } => {
                // (λz. (π1 z) ((λy. ↑N)(π2 z))) ↑M
                let tm = self.go(fun, env, y, d)?;
                let z = self.z();
                let tn = self.go(arg, env, &Path::at(d + 1), d + 2)?;
                let f = lam(
                    Binder::new(z.clone(), None),
                    app(proj(1, var(0, z.clone())), app(lam(Binder::new(STATE_VAR, None), tn), proj(2, var(0, z)))),
                );
                app(f, tm)
            }
            Term::Rec { fun, param, ret, body } => {
                // (μ f z. ↑M[π1 z/x, π2 z/y], y)
                let z = self.z();
                let pty = param.ty.as_ref().map(transform_type).transpose()?;
                let rty = ret.as_ref().map(transform_type).transpose()?;
                env.push(Path::at(d));
                env.push(Path::proj(d + 1, 1));
                let out = self.go(body, env, &Path::proj(d + 1, 2), d + 2);
                env.pop();
                env.pop();
                let rec = Term::Rec { fun: fun.clone(), param: Binder::new(z, pty), ret: rty, body: Box::new(out?) };
                pair(rec, y_at(y, d))
            }
        })
    }
}
