use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::spec::{Spec, SpecState};
use super::SpecError;
use crate::rational::{Ext, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Prob,
    ProbReward,
    Reach,
    OptReward,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Prob, Mode::ProbReward, Mode::Reach, Mode::OptReward];

    /// Probabilistic modes aggregate weighted valuations; the others sets.
    pub fn is_weighted(self) -> bool {
        matches!(self, Mode::Prob | Mode::ProbReward)
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Prob => "prob",
            Mode::ProbReward => "probreward",
            Mode::Reach => "reach",
            Mode::OptReward => "optreward",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Mode, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown mode `{s}` (expected prob, probreward, reach or optreward)"))
    }
}

/// An element of one of the four semantic domains.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DomainValue {
    /// `[0, 1]`
    Prob(Rational),
    /// `[0, 1] × [0, ∞]`: acceptance probability and partial expected reward.
    ProbReward(Rational, Ext),
    /// `{⊥, ⊤}`
    Reach(bool),
    /// `[0, ∞]`
    OptReward(Ext),
}

impl DomainValue {
    pub fn bottom(mode: Mode) -> DomainValue {
        match mode {
            Mode::Prob => DomainValue::Prob(Rational::zero()),
            Mode::ProbReward => DomainValue::ProbReward(Rational::zero(), Ext::zero()),
            Mode::Reach => DomainValue::Reach(false),
            Mode::OptReward => DomainValue::OptReward(Ext::zero()),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            DomainValue::Prob(_) => Mode::Prob,
            DomainValue::ProbReward(..) => Mode::ProbReward,
            DomainValue::Reach(_) => Mode::Reach,
            DomainValue::OptReward(_) => Mode::OptReward,
        }
    }

    /// The domain order; values of different modes are incomparable.
    pub fn leq(&self, other: &DomainValue) -> bool {
        match (self, other) {
            (DomainValue::Prob(a), DomainValue::Prob(b)) => a <= b,
            (DomainValue::ProbReward(p, r), DomainValue::ProbReward(q, s)) => p <= q && r <= s,
            (DomainValue::Reach(a), DomainValue::Reach(b)) => !a || *b,
            (DomainValue::OptReward(a), DomainValue::OptReward(b)) => a <= b,
            _ => false,
        }
    }

    pub fn within_bounds(&self) -> bool {
        let unit = |r: &Rational| !(r < &Rational::zero()) && r <= &Rational::one();
        match self {
            DomainValue::Prob(p) => unit(p),
            DomainValue::ProbReward(p, r) => unit(p) && *r >= Ext::zero(),
            DomainValue::Reach(_) => true,
            DomainValue::OptReward(r) => *r >= Ext::zero(),
        }
    }

    /// Largest componentwise gap, infinity for unbounded or boolean changes.
    pub fn distance(&self, other: &DomainValue) -> Ext {
        match (self, other) {
            (DomainValue::Prob(a), DomainValue::Prob(b)) => Ext::Fin((a - b).abs()),
            (DomainValue::ProbReward(p, r), DomainValue::ProbReward(q, s)) => {
                Ext::Fin((p - q).abs()).max(r.distance(s))
            }
            (DomainValue::Reach(a), DomainValue::Reach(b)) => {
                if a == b {
                    Ext::zero()
                } else {
                    Ext::Fin(Rational::one())
                }
            }
            (DomainValue::OptReward(a), DomainValue::OptReward(b)) => a.distance(b),
            _ => Ext::Inf,
        }
    }
}

impl fmt::Display for DomainValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainValue::Prob(p) => write!(f, "{p}"),
            DomainValue::ProbReward(p, r) => write!(f, "({p}, {r})"),
            DomainValue::Reach(true) => f.write_str("top"),
            DomainValue::Reach(false) => f.write_str("bottom"),
            DomainValue::OptReward(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for DomainValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            DomainValue::Prob(p) => s.serialize_str(&p.to_string()),
            DomainValue::ProbReward(p, r) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("prob", &p.to_string())?;
                m.serialize_entry("reward", &r.to_string())?;
                m.end()
            }
            DomainValue::Reach(b) => s.serialize_bool(*b),
            DomainValue::OptReward(r) => s.serialize_str(&r.to_string()),
        }
    }
}

/// A mode together with the specification it reads traces against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceQuery {
    pub mode: Mode,
    pub spec: Spec,
}

impl InferenceQuery {
    pub fn new(mode: Mode, spec: Spec) -> Result<InferenceQuery, SpecError> {
        match (&spec, mode) {
            (Spec::Rm(_), Mode::OptReward) | (Spec::Dfa(_), Mode::Prob | Mode::ProbReward | Mode::Reach) => {
                Ok(InferenceQuery { mode, spec })
            }
            (Spec::Dfa(_), _) => Err(SpecError::ModeMismatch(mode.to_string(), "a reward machine")),
            (Spec::Rm(_), _) => Err(SpecError::ModeMismatch(mode.to_string(), "a DFA")),
        }
    }

    /// The query read off a final specification state: what the
    /// post-condition yields once the trace has been consumed.
    pub fn terminal(&self, st: &SpecState) -> DomainValue {
        match (&self.spec, st) {
            (Spec::Dfa(d), SpecState::Dfa(y)) => {
                let acc = d.is_accepting(*y);
                match self.mode {
                    Mode::Prob => DomainValue::Prob(if acc { Rational::one() } else { Rational::zero() }),
                    Mode::ProbReward => {
                        DomainValue::ProbReward(if acc { Rational::one() } else { Rational::zero() }, Ext::zero())
                    }
                    Mode::Reach => DomainValue::Reach(acc),
                    Mode::OptReward => DomainValue::bottom(Mode::OptReward),
                }
            }
            (Spec::Rm(_), SpecState::Rm { accept, reward, .. }) => {
                DomainValue::OptReward(if *accept { Ext::Fin(reward.clone()) } else { Ext::zero() })
            }
            _ => DomainValue::bottom(self.mode),
        }
    }

    /// `q(w)(st)`: run the trace from `st` and read the result.
    pub fn apply<S: AsRef<str>>(&self, w: &[S], st: &SpecState) -> Result<DomainValue, SpecError> {
        Ok(self.terminal(&self.spec.run(st, w)?))
    }
}

pub fn query_apply<S: AsRef<str>>(q: &InferenceQuery, w: &[S], st: &SpecState) -> Result<DomainValue, SpecError> {
    q.apply(w, st)
}

impl Serialize for Mode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}
