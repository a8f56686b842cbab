use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use thiserror::Error;

use super::types::{Type, REAL};
use crate::rational::{is_probability, parse_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
}

impl Prim {
    pub const ALL: [Prim; 10] =
        [Prim::Add, Prim::Sub, Prim::Mul, Prim::Div, Prim::Neg, Prim::Ge, Prim::Gt, Prim::Le, Prim::Lt, Prim::Eq];

    pub fn name(self) -> &'static str {
        match self {
            Prim::Add => "add",
            Prim::Sub => "sub",
            Prim::Mul => "mul",
            Prim::Div => "div",
            Prim::Neg => "neg",
            Prim::Ge => "ge",
            Prim::Gt => "gt",
            Prim::Le => "le",
            Prim::Lt => "lt",
            Prim::Eq => "eq",
        }
    }

    fn arity(self) -> (Type, Type) {
        let rr = Type::prod(Type::real(), Type::real());
        match self {
            Prim::Add | Prim::Sub | Prim::Mul | Prim::Div => (rr, Type::real()),
            Prim::Neg => (Type::real(), Type::real()),
            _ => (rr, Type::bool()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstKind {
    Prim(Prim),
    /// Lifted emission: `(x, y) ↦ (x, δ(y, a))`.
    Step(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EffectKind {
    /// Left branch with probability p.
    Flip(Rational),
    /// As `Flip`, accumulating reward r on both branches.
    FlipReward(Rational, Rational),
    Choose,
    Emit(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpSig<K> {
    pub kind: K,
    pub arity: Type,
    pub coarity: Type,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("unknown effect `{0}`")]
    UnknownEffect(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("flip probability {0} outside [0, 1]")]
    BadProbability(String),
    #[error("negative reward {0}")]
    NegativeReward(String),
    #[error("arity of `{0}` is not a ground type")]
    NotGround(String),
}

/// Base types, constants and effects. In a lifted signature every arity and
/// coarity carries the trailing state component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub bases: BTreeSet<String>,
    pub constants: BTreeMap<String, OpSig<ConstKind>>,
    pub effects: BTreeMap<String, OpSig<EffectKind>>,
    pub lifted: bool,
}

pub fn effect_name(kind: &EffectKind) -> String {
    match kind {
        EffectKind::Flip(p) => format!("flip[{p}]"),
        EffectKind::FlipReward(p, r) => format!("flipr[{p},{r}]"),
        EffectKind::Choose => "choose".to_string(),
        EffectKind::Emit(a) => format!("emit[{}]", quote(a)),
    }
}

pub fn step_name(symbol: &str) -> String {
    format!("step[{}]", quote(symbol))
}

pub fn quote(s: &str) -> String {
    serde_json::to_string(s).unwrap_or_else(|_| format!("\"{s}\""))
}

fn bracket_args<'a>(name: &'a str, head: &str) -> Option<&'a str> {
    name.strip_prefix(head)?.strip_prefix('[')?.strip_suffix(']')
}

/// Recognises canonical effect names such as `flip[1/4]` or `emit["h"]`.
pub fn parse_effect_name(name: &str) -> Result<EffectKind, SignatureError> {
    let unknown = || SignatureError::UnknownEffect(name.to_string());
    let kind = if name == "choose" {
        EffectKind::Choose
    } else if let Some(a) = bracket_args(name, "flipr") {
        let (p, r) = a.split_once(',').ok_or_else(unknown)?;
        EffectKind::FlipReward(parse_rational(p).map_err(|_| unknown())?, parse_rational(r).map_err(|_| unknown())?)
    } else if let Some(a) = bracket_args(name, "flip") {
        EffectKind::Flip(parse_rational(a).map_err(|_| unknown())?)
    } else if let Some(a) = bracket_args(name, "emit") {
        EffectKind::Emit(serde_json::from_str(a).map_err(|_| unknown())?)
    } else {
        return Err(unknown());
    };
    validate(&kind)?;
    Ok(kind)
}

fn validate(kind: &EffectKind) -> Result<(), SignatureError> {
    match kind {
        EffectKind::Flip(p) | EffectKind::FlipReward(p, _) if !is_probability(p) => {
            Err(SignatureError::BadProbability(p.to_string()))
        }
        EffectKind::FlipReward(_, r) if r.is_negative() => Err(SignatureError::NegativeReward(r.to_string())),
        _ => Ok(()),
    }
}

pub fn effect_arity(kind: &EffectKind) -> (Type, Type) {
    match kind {
        EffectKind::Flip(_) | EffectKind::FlipReward(..) | EffectKind::Choose => (Type::Unit, Type::bool()),
        EffectKind::Emit(_) => (Type::Unit, Type::Unit),
    }
}

impl Signature {
    pub fn empty() -> Self {
        Signature { bases: BTreeSet::new(), constants: BTreeMap::new(), effects: BTreeMap::new(), lifted: false }
    }

    /// `real` with arithmetic and comparisons; effects are added on use.
    pub fn standard() -> Self {
        let mut s = Signature::empty();
        s.bases.insert(REAL.to_string());
        for p in Prim::ALL {
            let (arity, coarity) = p.arity();
            s.constants.insert(p.name().to_string(), OpSig { kind: ConstKind::Prim(p), arity, coarity });
        }
        s
    }

    pub fn constant(&self, name: &str) -> Option<&OpSig<ConstKind>> {
        self.constants.get(name)
    }

    pub fn effect(&self, name: &str) -> Option<&OpSig<EffectKind>> {
        self.effects.get(name)
    }

    /// Looks an effect up, admitting any builtin name into an unlifted
    /// signature on first use. Returns the canonical name.
    pub fn resolve_effect(&mut self, name: &str) -> Result<String, SignatureError> {
        if self.effects.contains_key(name) {
            return Ok(name.to_string());
        }
        if self.lifted {
            return Err(SignatureError::UnknownEffect(name.to_string()));
        }
        let kind = parse_effect_name(name)?;
        Ok(self.add_effect(kind))
    }

    pub fn add_effect(&mut self, kind: EffectKind) -> String {
        let name = effect_name(&kind);
        let (arity, coarity) = effect_arity(&kind);
        self.effects.entry(name.clone()).or_insert(OpSig { kind, arity, coarity });
        name
    }

    pub fn check_ground(&self) -> Result<(), SignatureError> {
        let bad = self
            .constants
            .iter()
            .map(|(n, o)| (n, &o.arity, &o.coarity))
            .chain(self.effects.iter().map(|(n, o)| (n, &o.arity, &o.coarity)))
            .find(|(_, a, c)| !a.is_ground() || !c.is_ground());
        match bad {
            Some((n, ..)) => Err(SignatureError::NotGround(n.clone())),
            None => Ok(()),
        }
    }

    pub fn emit_symbols(&self) -> Vec<String> {
        self.effects
            .values()
            .filter_map(|o| match &o.kind {
                EffectKind::Emit(a) => Some(a.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn has_reward(&self) -> bool {
        self.effects.values().any(|o| match &o.kind {
            EffectKind::FlipReward(_, r) => !r.is_zero(),
            _ => false,
        })
    }
}
