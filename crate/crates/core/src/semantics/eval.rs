use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;
use std::rc::Rc;

use num_traits::{One, Zero};

use super::value::{Env, Value, V};
use super::EvalError;
use crate::automata::{Spec, SpecState};
use crate::rational::Rational;
use crate::syntax::signature::{ConstKind, EffectKind, Prim};
use crate::syntax::{Signature, Term};

type Map<K, W> = HashMap<K, W, BuildHasherDefault<DefaultHasher>>;

/// Probabilistic programs carry weights; angelic ones only a support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Weighted,
    Set,
}

/// How emissions are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interp {
    /// Writer monad: record the trace.
    Trace,
    /// Thread the specification state through every emission.
    Sync,
    /// Lifted signature: emissions are already `step` constants.
    Product,
}

/// What a path carries besides its value and reward. `Word` is relative to
/// the start of the computation; `At` is the absolute specification state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Aux {
    Nil,
    Word(Rc<[u16]>),
    At(SpecState),
}

impl Aux {
    /// The input for the continuation after this output.
    fn restart(&self) -> Aux {
        match self {
            Aux::Word(_) => Aux::Word(Rc::from(Vec::new())),
            other => other.clone(),
        }
    }

    fn then(&self, next: &Aux) -> Aux {
        match (self, next) {
            (Aux::Word(a), Aux::Word(b)) if b.is_empty() => Aux::Word(a.clone()),
            (Aux::Word(a), Aux::Word(b)) if a.is_empty() => Aux::Word(b.clone()),
            (Aux::Word(a), Aux::Word(b)) => Aux::Word(a.iter().chain(b.iter()).copied().collect()),
            (_, n) => n.clone(),
        }
    }
}

pub type Outcome<'a> = (Value<'a>, Aux, Rational);

/// Probability mass `w` and reward mass `wr = Σ w·reward` of the paths
/// collapsed into one outcome. Set-valued runs use `w = 1`, `wr = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    pub w: Rational,
    pub wr: Rational,
}

impl Weight {
    fn one() -> Self {
        Weight { w: Rational::one(), wr: Rational::zero() }
    }

    fn then(&self, next: &Weight) -> Weight {
        Weight { w: &self.w * &next.w, wr: &self.wr * &next.w + &self.w * &next.wr }
    }
}

/// A finite valuation of outcomes. The reward component of the key is the
/// path reward when rewards are keyed, and zero when they are summarised in
/// [`Weight::wr`]. In `Set` kind every weight is one.
#[derive(Clone)]
pub struct Outcomes<'a> {
    pub map: Map<Outcome<'a>, Weight>,
}

impl<'a> Outcomes<'a> {
    fn empty() -> Self {
        Outcomes { map: Map::default() }
    }

    fn single(v: Value<'a>, aux: Aux) -> Self {
        let mut o = Outcomes::empty();
        o.map.insert((v, aux, Rational::zero()), Weight::one());
        o
    }

    fn add(&mut self, kind: Kind, key: Outcome<'a>, w: Weight) {
        if w.w.is_zero() {
            return;
        }
        match kind {
            Kind::Weighted => match self.map.get_mut(&key) {
                Some(slot) => {
                    slot.w += w.w;
                    slot.wr += w.wr;
                }
                None => {
                    self.map.insert(key, w);
                }
            },
            Kind::Set => {
                self.map.insert(key, Weight::one());
            }
        }
    }
}

pub struct Evaluator<'a> {
    sig: &'a Signature,
    spec: Option<&'a Spec>,
    interp: Interp,
    kind: Kind,
    fuel: u32,
    keyed_rewards: bool,
    symbols: Vec<String>,
    memo: Map<(Value<'a>, Value<'a>, Aux), Rc<Outcomes<'a>>>,
    free: Map<usize, Rc<[usize]>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(sig: &'a Signature, spec: Option<&'a Spec>, interp: Interp, kind: Kind, fuel: u32) -> Self {
        let mut symbols = sig.emit_symbols();
        symbols.sort();
        symbols.dedup();
        Evaluator {
            sig,
            spec,
            interp,
            kind,
            fuel,
            keyed_rewards: false,
            symbols,
            memo: Map::default(),
            free: Map::default(),
        }
    }

    /// Keep each path reward in the outcome key instead of summarising it.
    pub fn keyed_rewards(mut self) -> Self {
        self.keyed_rewards = true;
        self
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn start(&self, st: Option<&SpecState>) -> Aux {
        match (self.interp, st) {
            (Interp::Trace, _) => Aux::Word(Rc::from(Vec::new())),
            (Interp::Sync, Some(s)) => Aux::At(s.clone()),
            _ => Aux::Nil,
        }
    }

    pub fn run(&mut self, t: &'a Term, env: &Env<'a>, pre: &Aux) -> Result<Outcomes<'a>, EvalError> {
        self.eval(t, env, pre)
    }

    fn free_of(&mut self, code: &'a Term) -> Rc<[usize]> {
        self.free.entry(code as *const Term as usize).or_insert_with(|| Rc::from(code.free_indices())).clone()
    }

    fn bind(
        &mut self,
        outs: Outcomes<'a>,
        mut k: impl FnMut(&mut Self, Value<'a>, &Aux) -> Result<Outcomes<'a>, EvalError>,
    ) -> Result<Outcomes<'a>, EvalError> {
        let mut acc = Outcomes::empty();
        for ((v, aux, r), w) in outs.map {
            let sub = k(self, v, &aux.restart())?;
            for ((v2, aux2, r2), w2) in sub.map {
                acc.add(self.kind, (v2, aux.then(&aux2), &r + r2), w.then(&w2));
            }
        }
        Ok(acc)
    }

    fn map_values(
        &mut self,
        outs: Outcomes<'a>,
        mut f: impl FnMut(Value<'a>) -> Result<Value<'a>, EvalError>,
    ) -> Result<Outcomes<'a>, EvalError> {
        let mut acc = Outcomes::empty();
        for ((v, aux, r), w) in outs.map {
            acc.add(self.kind, (f(v)?, aux, r), w);
        }
        Ok(acc)
    }

    fn eval(&mut self, t: &'a Term, env: &Env<'a>, pre: &Aux) -> Result<Outcomes<'a>, EvalError> {
        match t {
            Term::Var { index, name } => {
                let v = env.get(*index).ok_or_else(|| EvalError::Stuck(format!("unbound variable `{name}`")))?;
                Ok(Outcomes::single(v.clone(), pre.clone()))
            }
            Term::Unit => Ok(Outcomes::single(Value::unit(), pre.clone())),
            Term::Real { value } => Ok(Outcomes::single(Value::real(*value), pre.clone())),
            Term::Pair { fst, snd } => {
                let a = self.eval(fst, env, pre)?;
                self.bind(a, |this, va, p| {
                    let b = this.eval(snd, env, p)?;
                    this.map_values(b, |vb| Ok(Value::pair(va.clone(), vb)))
                })
            }
            Term::Proj { index, arg } => {
                let a = self.eval(arg, env, pre)?;
                let i = *index;
                self.map_values(a, |v| match v.kind() {
                    V::Pair(x, y) => Ok(if i == 1 { x.clone() } else { y.clone() }),
                    _ => Err(EvalError::Stuck(format!("projection of {v:?}"))),
                })
            }
            Term::Inj { index, arg, .. } => {
                let a = self.eval(arg, env, pre)?;
                let i = *index;
                self.map_values(a, |v| Ok(Value::inj(i, v)))
            }
            Term::Absurd { arg, .. } => {
                let a = self.eval(arg, env, pre)?;
                self.bind(a, |_, v, _| Err(EvalError::Stuck(format!("absurd applied to {v:?}"))))
            }
            Term::Case { scrutinee, left_body, right_body, .. } => {
                let s = self.eval(scrutinee, env, pre)?;
                self.bind(s, |this, v, p| match v.kind() {
                    V::Inj(1, x) => this.eval(left_body, &env.push(x.clone()), p),
                    V::Inj(2, x) => this.eval(right_body, &env.push(x.clone()), p),
                    _ => Err(EvalError::Stuck(format!("case on {v:?}"))),
                })
            }
            Term::Lam { .. } => {
                Ok(Outcomes::single(Value::closure(t, env.clone(), None, self.free_of(t)), pre.clone()))
            }
            Term::Rec { .. } => {
                let free = self.free_of(t);
                Ok(Outcomes::single(Value::closure(t, env.clone(), Some(self.fuel), free), pre.clone()))
            }
            Term::App { fun, arg } => {
                let f = self.eval(fun, env, pre)?;
                self.bind(f, |this, vf, p| {
                    let a = this.eval(arg, env, p)?;
                    this.bind(a, |this, va, p2| this.apply(&vf, va, p2))
                })
            }
            Term::Const { name, arg } => {
                let a = self.eval(arg, env, pre)?;
                let op = self.sig.constant(name).ok_or_else(|| EvalError::UnknownConstant(name.clone()))?;
                let kind = op.kind.clone();
                let lifted = self.sig.lifted;
                let spec = self.spec;
                self.map_values(a, |v| constant(&kind, lifted, spec, v))
            }
            Term::Effect { name, arg } => {
                let a = self.eval(arg, env, pre)?;
                let op = self.sig.effect(name).ok_or_else(|| EvalError::UnknownEffect(name.clone()))?;
                let kind = op.kind.clone();
                self.bind(a, |this, v, p| this.effect(&kind, v, p))
            }
        }
    }

    fn apply(&mut self, f: &Value<'a>, x: Value<'a>, pre: &Aux) -> Result<Outcomes<'a>, EvalError> {
        let V::Closure { code, env, fuel, free } = f.kind() else {
            return Err(EvalError::Stuck(format!("application of {f:?}")));
        };
        if *fuel == Some(0) {
            return Ok(Outcomes::empty());
        }
        let key = (f.clone(), x, pre.clone());
        if let Some(hit) = self.memo.get(&key) {
            return Ok((**hit).clone());
        }
        let out = match (code, fuel) {
            (Term::Lam { body, .. }, None) => self.eval(body, &env.push(key.1.clone()), pre)?,
            (Term::Rec { body, .. }, Some(n)) => {
                let me = Value::closure(code, env.clone(), Some(n - 1), free.clone());
                self.eval(body, &env.push(me).push(key.1.clone()), pre)?
            }
            _ => return Err(EvalError::Stuck("malformed closure".into())),
        };
        self.memo.insert(key, Rc::new(out.clone()));
        Ok(out)
    }

    fn effect(&self, kind: &EffectKind, v: Value<'a>, pre: &Aux) -> Result<Outcomes<'a>, EvalError> {
        // In the lifted signature the argument is (x, y) and y is handed back
        // unchanged alongside the result.
        let wrap = |r: Value<'a>| -> Result<Value<'a>, EvalError> {
            if self.sig.lifted {
                match v.kind() {
                    V::Pair(_, y) => Ok(Value::pair(r, y.clone())),
                    _ => Err(EvalError::Stuck(format!("lifted effect applied to {v:?}"))),
                }
            } else {
                Ok(r)
            }
        };
        let mut out = Outcomes::empty();
        let keyed = self.keyed_rewards;
        let branch = |out: &mut Outcomes<'a>, kind: Kind, b: bool, r: Rational, w: Rational| -> Result<(), EvalError> {
            let weight = Weight { wr: &w * &r, w };
            let key = if keyed { r } else { Rational::zero() };
            out.add(kind, (wrap(Value::boolean(b))?, pre.clone(), key), weight);
            Ok(())
        };
        match kind {
            EffectKind::Flip(p) => {
                branch(&mut out, self.kind, true, Rational::zero(), p.clone())?;
                branch(&mut out, self.kind, false, Rational::zero(), Rational::one() - p)?;
            }
            EffectKind::FlipReward(p, r) => {
                branch(&mut out, self.kind, true, r.clone(), p.clone())?;
                branch(&mut out, self.kind, false, r.clone(), Rational::one() - p)?;
            }
            EffectKind::Choose => {
                branch(&mut out, self.kind, true, Rational::zero(), Rational::one())?;
                branch(&mut out, self.kind, false, Rational::zero(), Rational::one())?;
            }
            EffectKind::Emit(a) => {
                let aux = match (self.interp, pre) {
                    (Interp::Trace, _) => {
                        let id = self.symbols.iter().position(|s| s == a).expect("emit symbol registered");
                        Aux::Word(Rc::from(vec![id as u16]))
                    }
                    (Interp::Sync, Aux::At(s)) => {
                        let spec = self.spec.ok_or(EvalError::MissingSpec)?;
                        Aux::At(spec.step(s, a)?)
                    }
                    _ => return Err(EvalError::Stuck(format!("emission of `{a}` in a product program"))),
                };
                out.add(self.kind, (wrap(Value::unit())?, aux, Rational::zero()), Weight::one());
            }
        }
        Ok(out)
    }
}

fn real_of(v: &Value<'_>) -> Result<f64, EvalError> {
    match v.kind() {
        V::Real(x) => Ok(*x),
        _ => Err(EvalError::Stuck(format!("expected a real, found {v:?}"))),
    }
}

fn prim<'a>(p: Prim, v: &Value<'a>) -> Result<Value<'a>, EvalError> {
    if p == Prim::Neg {
        return Ok(Value::real(-real_of(v)?));
    }
    let V::Pair(a, b) = v.kind() else {
        return Err(EvalError::Stuck(format!("`{}` applied to {v:?}", p.name())));
    };
    let (x, y) = (real_of(a)?, real_of(b)?);
    Ok(match p {
        Prim::Add => Value::real(x + y),
        Prim::Sub => Value::real(x - y),
        Prim::Mul => Value::real(x * y),
        Prim::Div => Value::real(x / y),
        Prim::Ge => Value::boolean(x >= y),
        Prim::Gt => Value::boolean(x > y),
        Prim::Le => Value::boolean(x <= y),
        Prim::Lt => Value::boolean(x < y),
        Prim::Eq => Value::boolean(x == y),
        Prim::Neg => unreachable!(),
    })
}

fn constant<'a>(kind: &ConstKind, lifted: bool, spec: Option<&Spec>, v: Value<'a>) -> Result<Value<'a>, EvalError> {
    if !lifted {
        return match kind {
            ConstKind::Prim(p) => prim(*p, &v),
            ConstKind::Step(a) => Err(EvalError::Stuck(format!("step[{a}] outside a product program"))),
        };
    }
    let V::Pair(x, y) = v.kind() else {
        return Err(EvalError::Stuck(format!("lifted constant applied to {v:?}")));
    };
    match kind {
        ConstKind::Prim(p) => Ok(Value::pair(prim(*p, x)?, y.clone())),
        ConstKind::Step(a) => {
            let V::State(s) = y.kind() else {
                return Err(EvalError::Stuck(format!("state expected, found {y:?}")));
            };
            let spec = spec.ok_or(EvalError::MissingSpec)?;
            Ok(Value::pair(x.clone(), Value::state(spec.step(s, a)?)))
        }
    }
}
