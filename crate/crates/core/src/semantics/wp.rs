use num_traits::{One, Signed};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::algebra::Algebra;
use super::eval::{Aux, Evaluator, Interp, Kind, Outcomes};
use super::value::{Env, Ground, Value, V};
use super::EvalError;
use crate::automata::{DomainValue, InferenceQuery, Mode, SpecState};
use crate::exec;
use crate::rational::{self, Ext, Rational};
use crate::syntax::signature::EffectKind;
use crate::syntax::{typecheck, Context, Signature, Term, Type, STATE_VAR};

/// One terminating path of the trace semantics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceOutcome {
    pub value: Ground,
    pub trace: Vec<String>,
    #[serde(with = "rational::as_string")]
    pub reward: Rational,
    #[serde(with = "rational::as_string")]
    pub weight: Rational,
}

/// Finite-support valuation of `(value, trace, reward)`, sorted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Valuation {
    pub kind: Kind,
    pub outcomes: Vec<TraceOutcome>,
}

impl Valuation {
    /// Total weight; the support size for set-valued valuations.
    pub fn mass(&self) -> Rational {
        self.outcomes.iter().map(|o| o.weight.clone()).sum()
    }

    pub fn weight_of(&self, value: &Ground, trace: &[&str]) -> Rational {
        self.outcomes
            .iter()
            .filter(|o| &o.value == value && o.trace.iter().map(String::as_str).eq(trace.iter().copied()))
            .map(|o| o.weight.clone())
            .sum()
    }
}

/// Per-state result of a weakest pre-condition computation.
#[derive(Debug, Clone, PartialEq)]
pub struct WpResult {
    pub mode: Mode,
    pub fuel: u32,
    pub converged: bool,
    pub delta: Ext,
    pub per_state: Vec<(String, DomainValue)>,
    /// Outcome mass per state (support size in set-valued modes). Used by
    /// the stopping rule, not serialized.
    pub mass: Vec<Rational>,
}

impl WpResult {
    pub fn get(&self, label: &str) -> Option<&DomainValue> {
        self.per_state.iter().find(|(l, _)| l == label).map(|(_, v)| v)
    }

    pub fn values(&self) -> impl Iterator<Item = &DomainValue> {
        self.per_state.iter().map(|(_, v)| v)
    }

    /// Same per-state values, ignoring bookkeeping fields.
    pub fn same_values(&self, other: &WpResult) -> bool {
        self.per_state == other.per_state
    }
}

struct PerState<'a>(&'a [(String, DomainValue)]);

impl Serialize for PerState<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl Serialize for WpResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("mode", &self.mode)?;
        m.serialize_entry("fuel", &self.fuel)?;
        m.serialize_entry("converged", &self.converged)?;
        m.serialize_entry("delta", &self.delta.to_string())?;
        m.serialize_entry("perState", &PerState(&self.per_state))?;
        m.end()
    }
}

/// Weighted for flips, set-valued for angelic choice. A mode, when given,
/// must agree with the program's effects.
pub fn program_kind(term: &Term, sig: &Signature, mode: Option<Mode>) -> Result<Kind, EvalError> {
    let mut weighted = Vec::new();
    let mut set = Vec::new();
    for name in term.effects() {
        match sig.effect(name).map(|o| &o.kind) {
            Some(EffectKind::Flip(_) | EffectKind::FlipReward(..)) => weighted.push(name.to_string()),
            Some(EffectKind::Choose) => set.push(name.to_string()),
            Some(EffectKind::Emit(_)) => {}
            None => return Err(EvalError::UnknownEffect(name.to_string())),
        }
    }
    weighted.dedup();
    set.dedup();
    if !weighted.is_empty() && !set.is_empty() {
        let mut all = weighted;
        all.extend(set);
        all.sort();
        all.dedup();
        return Err(EvalError::MixedEffects(all));
    }
    let natural = if !set.is_empty() {
        Some(Kind::Set)
    } else if !weighted.is_empty() {
        Some(Kind::Weighted)
    } else {
        None
    };
    match (mode, natural) {
        (None, k) => Ok(k.unwrap_or(Kind::Weighted)),
        (Some(m), None) => Ok(if m.is_weighted() { Kind::Weighted } else { Kind::Set }),
        (Some(m), Some(k)) => {
            if m.is_weighted() == (k == Kind::Weighted) {
                Ok(k)
            } else {
                let effects = if k == Kind::Set { set } else { weighted };
                Err(EvalError::ModeKind { mode: m.to_string(), effects })
            }
        }
    }
}

fn ground_program_type(term: &Term, sig: &Signature) -> Result<Type, EvalError> {
    let t = typecheck(&Context::new(), term, sig)?;
    if !t.is_ground() || t.mentions_state() {
        return Err(EvalError::NonGround(t.to_string()));
    }
    Ok(t)
}

fn product_type(term: &Term, sig: &Signature) -> Result<Type, EvalError> {
    if !sig.lifted {
        return Err(EvalError::NotProduct);
    }
    let t = typecheck(&Context::new().push(STATE_VAR, Type::State), term, sig)?;
    match &t {
        Type::Prod(a, b) if **b == Type::State && a.is_ground() && !a.mentions_state() => Ok(t),
        _ => Err(EvalError::NonGround(t.to_string())),
    }
}

fn mass_of(kind: Kind, outs: &Outcomes<'_>) -> Rational {
    match kind {
        Kind::Weighted => outs.map.values().map(|w| &w.w).sum(),
        Kind::Set => Rational::from_integer(outs.map.len().into()),
    }
}

/// The fuel-indexed trace semantics of a closed ground program.
pub fn eval_traces(term: &Term, sig: &Signature, fuel: u32) -> Result<Valuation, EvalError> {
    ground_program_type(term, sig)?;
    let kind = program_kind(term, sig, None)?;
    exec::with_stack(|| {
        let mut ev = Evaluator::new(sig, None, Interp::Trace, kind, fuel).keyed_rewards();
        let pre = ev.start(None);
        let outs = ev.run(term, &Env::empty(), &pre)?;
        let symbols = ev.symbols().to_vec();
        let mut outcomes = Vec::with_capacity(outs.map.len());
        for ((v, aux, r), w) in outs.map {
            let value = v.ground(None).ok_or_else(|| EvalError::NonGround(format!("{v:?}")))?;
            let trace = match aux {
                Aux::Word(w) => w.iter().map(|i| symbols[*i as usize].clone()).collect(),
                _ => Vec::new(),
            };
            outcomes.push(TraceOutcome { value, trace, reward: r, weight: w.w });
        }
        outcomes.sort_by(|a, b| (&a.trace, &a.value, &a.reward).cmp(&(&b.trace, &b.value, &b.reward)));
        Ok(Valuation { kind, outcomes })
    })
}

fn result(q: &InferenceQuery, fuel: u32, rows: Vec<(SpecState, DomainValue, Rational)>) -> WpResult {
    let mut per_state = Vec::with_capacity(rows.len());
    let mut mass = Vec::with_capacity(rows.len());
    for (st, v, m) in rows {
        per_state.push((q.spec.label(&st), v));
        mass.push(m);
    }
    WpResult { mode: q.mode, fuel, converged: false, delta: Ext::zero(), per_state, mass }
}

/// `q ∘ wp(M)`: enumerate traces once, then read them from every start state.
pub fn wp_source(term: &Term, sig: &Signature, q: &InferenceQuery, fuel: u32) -> Result<WpResult, EvalError> {
    ground_program_type(term, sig)?;
    let kind = program_kind(term, sig, Some(q.mode))?;
    let alg = Algebra::new(q.mode);
    exec::with_stack(|| {
        let mut ev = Evaluator::new(sig, None, Interp::Trace, kind, fuel);
        let pre = ev.start(None);
        let outs = ev.run(term, &Env::empty(), &pre)?;
        let symbols = ev.symbols().to_vec();
        let mass = mass_of(kind, &outs);
        let paths: Vec<(Vec<&str>, &Rational, &Rational)> = outs
            .map
            .iter()
            .map(|((_, aux, _), w)| {
                let word = match aux {
                    Aux::Word(ids) => ids.iter().map(|i| symbols[*i as usize].as_str()).collect(),
                    _ => Vec::new(),
                };
                (word, &w.w, &w.wr)
            })
            .collect();
        let mut rows = Vec::new();
        for st in q.spec.start_states() {
            let mut items = Vec::with_capacity(paths.len());
            for (word, w, wr) in &paths {
                items.push((q.apply(word, &st)?, *w, *wr));
            }
            rows.push((st, alg.aggregate(items), mass.clone()));
        }
        Ok(result(q, fuel, rows))
    })
}

/// The synchronised semantics: the original program, with every emission
/// stepping the specification state instead of being recorded.
pub fn wp_sync(term: &Term, sig: &Signature, q: &InferenceQuery, fuel: u32) -> Result<WpResult, EvalError> {
    ground_program_type(term, sig)?;
    let kind = program_kind(term, sig, Some(q.mode))?;
    let alg = Algebra::new(q.mode);
    exec::with_stack(|| {
        let rows = exec::map(q.spec.start_states(), |st| -> Result<_, EvalError> {
            let mut ev = Evaluator::new(sig, Some(&q.spec), Interp::Sync, kind, fuel);
            let pre = ev.start(Some(&st));
            let outs = ev.run(term, &Env::empty(), &pre)?;
            let mut items = Vec::with_capacity(outs.map.len());
            for ((_, aux, _), w) in &outs.map {
                let Aux::At(end) = aux else {
                    return Err(EvalError::Stuck("synchronised run lost its state".into()));
                };
                items.push((q.terminal(end), &w.w, &w.wr));
            }
            let v = alg.aggregate(items);
            Ok((st, v, mass_of(kind, &outs)))
        });
        Ok(result(q, fuel, rows.into_iter().collect::<Result<_, _>>()?))
    })
}

/// Weakest pre-condition of a product program in context `__y : state`,
/// with the builtin post-condition read off the final state.
pub fn wp_product(term: &Term, lifted: &Signature, q: &InferenceQuery, fuel: u32) -> Result<WpResult, EvalError> {
    product_type(term, lifted)?;
    let kind = program_kind(term, lifted, Some(q.mode))?;
    let alg = Algebra::new(q.mode);
    exec::with_stack(|| {
        let rows = exec::map(q.spec.start_states(), |st| -> Result<_, EvalError> {
            let mut ev = Evaluator::new(lifted, Some(&q.spec), Interp::Product, kind, fuel);
            let env = Env::empty().push(Value::state(st.clone()));
            let outs = ev.run(term, &env, &Aux::Nil)?;
            let mut items = Vec::with_capacity(outs.map.len());
            for ((v, _, _), w) in &outs.map {
                let end = match v.kind() {
                    V::Pair(_, y) => match y.kind() {
                        V::State(s) => s.clone(),
                        _ => return Err(EvalError::Stuck(format!("product result without state: {v:?}"))),
                    },
                    _ => return Err(EvalError::Stuck(format!("product result without state: {v:?}"))),
                };
                items.push((q.terminal(&end), &w.w, &w.wr));
            }
            let v = alg.aggregate(items);
            Ok((st, v, mass_of(kind, &outs)))
        });
        Ok(result(q, fuel, rows.into_iter().collect::<Result<_, _>>()?))
    })
}

/// A weakest pre-condition computation parametrised by fuel.
#[derive(Debug, Clone, Copy)]
pub enum WpOp<'a> {
    Source { term: &'a Term, sig: &'a Signature, query: &'a InferenceQuery },
    Sync { term: &'a Term, sig: &'a Signature, query: &'a InferenceQuery },
    Product { term: &'a Term, sig: &'a Signature, query: &'a InferenceQuery },
}

impl WpOp<'_> {
    pub fn at(&self, fuel: u32) -> Result<WpResult, EvalError> {
        match *self {
            WpOp::Source { term, sig, query } => wp_source(term, sig, query, fuel),
            WpOp::Sync { term, sig, query } => wp_sync(term, sig, query, fuel),
            WpOp::Product { term, sig, query } => wp_product(term, sig, query, fuel),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            WpOp::Source { query, .. } | WpOp::Sync { query, .. } | WpOp::Product { query, .. } => query.mode,
        }
    }
}

fn max_distance(a: &WpResult, b: &WpResult) -> Ext {
    a.values().zip(b.values()).map(|(x, y)| x.distance(y)).max().unwrap_or_else(Ext::zero)
}

/// Next fuel in the iteration schedule: unit steps below 8, then steps of
/// a quarter of the current fuel.
fn next_fuel(n: u32, cap: u32) -> u32 {
    (n + (n / 4).max(1)).min(cap)
}

/// Kleene iteration over an increasing fuel schedule `0, 1, 2, …, cap`.
///
/// Approximants grow with fuel, so the change between two scheduled fuels
/// bounds every change in between. Each fuel is evaluated from scratch; the
/// geometric schedule keeps the total cost within a constant factor of the
/// last evaluation.
///
/// Stops once two successive scheduled steps each change every state by
/// less than `tol` while the outcome footprint has settled (mass change
/// below `tol` in weighted modes, unchanged support sizes in set-valued
/// ones) and is not empty. One quiet step is not enough: a walk can pause
/// for a fuel before new paths terminate. Two shortcuts are sound on their
/// own: in `prob` mode the unreached mass `1 - mass` bounds the remaining
/// gain, and `reach` cannot rise above all-top. Hitting `cap` reports
/// `converged: false`.
pub fn wp_iterate(op: &WpOp<'_>, tol: &Rational, cap: u32) -> Result<WpResult, EvalError> {
    let mode = op.mode();
    let tol_ext = Ext::Fin(tol.clone());
    let cap = cap.max(1);
    let mut prev = op.at(0)?;
    let mut n = 0;
    let mut was_stable = false;
    loop {
        n = next_fuel(n, cap);
        let mut cur = op.at(n)?;
        let delta = max_distance(&prev, &cur);
        let footprint_settled = cur.mass.iter().any(|m| m.is_positive())
            && prev
                .mass
                .iter()
                .zip(&cur.mass)
                .all(|(a, b)| if mode.is_weighted() { (b - a).abs() < *tol } else { a == b });
        let gap_closed = mode == Mode::Prob && cur.mass.iter().all(|m| Rational::one() - m < *tol);
        let all_top = mode == Mode::Reach && cur.values().all(|v| *v == DomainValue::Reach(true));
        cur.delta = delta.clone();
        let stable = delta < tol_ext && footprint_settled;
        if (stable && was_stable) || gap_closed || all_top {
            cur.converged = true;
            return Ok(cur);
        }
        if n >= cap {
            return Ok(cur);
        }
        was_stable = stable;
        prev = cur;
    }
}
