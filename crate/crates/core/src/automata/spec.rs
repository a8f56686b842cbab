use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::dfa::Dfa;
use super::reward_machine::{EdgeSpec, RewardMachine};
use super::SpecError;
use crate::rational::{self, Rational};

/// A temporal specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Spec {
    Dfa(Dfa),
    Rm(RewardMachine),
}

/// Runtime state of a specification. For reward machines this is the
/// triple (state, accept bit, accumulated reward).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpecState {
    Dfa(usize),
    Rm { u: usize, accept: bool, reward: Rational },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SpecFile {
    Dfa {
        states: Vec<String>,
        alphabet: Vec<String>,
        initial: String,
        accepting: Vec<String>,
        delta: BTreeMap<String, BTreeMap<String, String>>,
    },
    Rm {
        states: Vec<String>,
        alphabet: Vec<String>,
        initial: String,
        edges: BTreeMap<String, BTreeMap<String, EdgeFile>>,
    },
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    to: String,
    accept: bool,
    #[serde(with = "rational::as_string")]
    reward: Rational,
}

impl Spec {
    pub fn from_json(text: &str) -> Result<Spec, SpecError> {
        let file: SpecFile = serde_json::from_str(text).map_err(|e| SpecError::Json(e.to_string()))?;
        match file {
            SpecFile::Dfa { states, alphabet, initial, accepting, delta } => {
                Ok(Spec::Dfa(Dfa::new(states, alphabet, &delta, &accepting, &initial)?))
            }
            SpecFile::Rm { states, alphabet, initial, edges } => {
                let edges = edges
                    .into_iter()
                    .map(|(u, row)| {
                        let row = row
                            .into_iter()
                            .map(|(a, e)| (a, EdgeSpec { to: e.to, accept: e.accept, reward: e.reward }))
                            .collect();
                        (u, row)
                    })
                    .collect();
                Ok(Spec::Rm(RewardMachine::new(states, alphabet, &edges, &initial)?))
            }
        }
    }

    pub fn to_json(&self) -> String {
        let file = match self {
            Spec::Dfa(d) => SpecFile::Dfa {
                states: d.states().to_vec(),
                alphabet: d.alphabet().to_vec(),
                initial: d.state_name(d.initial()).to_string(),
                accepting: d.accepting_names(),
                delta: d.delta_map(),
            },
            Spec::Rm(m) => SpecFile::Rm {
                states: m.states().to_vec(),
                alphabet: m.alphabet().to_vec(),
                initial: m.state_name(m.initial()).to_string(),
                edges: m
                    .edge_map()
                    .into_iter()
                    .map(|(u, row)| {
                        let row = row
                            .into_iter()
                            .map(|(a, e)| (a, EdgeFile { to: e.to, accept: e.accept, reward: e.reward }))
                            .collect();
                        (u, row)
                    })
                    .collect(),
            },
        };
        serde_json::to_string(&file).expect("spec serializes")
    }

    pub fn alphabet(&self) -> &[String] {
        match self {
            Spec::Dfa(d) => d.alphabet(),
            Spec::Rm(m) => m.alphabet(),
        }
    }

    pub fn has_symbol(&self, a: &str) -> bool {
        self.alphabet().iter().any(|s| s == a)
    }

    /// States from which a wp is reported, in declared order. Reward
    /// machines start every pair (u, b) with zero reward.
    pub fn start_states(&self) -> Vec<SpecState> {
        match self {
            Spec::Dfa(d) => (0..d.states().len()).map(SpecState::Dfa).collect(),
            Spec::Rm(m) => (0..m.states().len())
                .flat_map(|u| [false, true].map(|accept| SpecState::Rm { u, accept, reward: Rational::zero() }))
                .collect(),
        }
    }

    pub fn initial_state(&self) -> SpecState {
        match self {
            Spec::Dfa(d) => SpecState::Dfa(d.initial()),
            Spec::Rm(m) => SpecState::Rm { u: m.initial(), accept: false, reward: Rational::zero() },
        }
    }

    /// `y1` for DFAs, `u0:false` for reward machines.
    pub fn label(&self, st: &SpecState) -> String {
        match (self, st) {
            (Spec::Dfa(d), SpecState::Dfa(y)) => d.state_name(*y).to_string(),
            (Spec::Rm(m), SpecState::Rm { u, accept, reward }) if reward.is_zero() => {
                format!("{}:{accept}", m.state_name(*u))
            }
            (Spec::Rm(m), SpecState::Rm { u, accept, reward }) => {
                format!("{}:{accept}:{reward}", m.state_name(*u))
            }
            _ => format!("{st:?}"),
        }
    }

    /// Inverse of [`Spec::label`]. A bare reward-machine state name means
    /// accept bit false.
    pub fn parse_label(&self, label: &str) -> Result<SpecState, SpecError> {
        let unknown = || SpecError::UnknownState(label.to_string());
        match self {
            Spec::Dfa(d) => d.state(label).map(SpecState::Dfa).ok_or_else(unknown),
            Spec::Rm(m) => {
                let mut parts = label.splitn(3, ':');
                let u = m.state(parts.next().unwrap_or_default()).ok_or_else(unknown)?;
                let accept = match parts.next() {
                    None | Some("false") => false,
                    Some("true") => true,
                    Some(_) => return Err(unknown()),
                };
                let reward = match parts.next() {
                    Some(r) => rational::parse_rational(r).map_err(|_| unknown())?,
                    None => Rational::zero(),
                };
                Ok(SpecState::Rm { u, accept, reward })
            }
        }
    }

    /// One transition on symbol `a`.
    pub fn step(&self, st: &SpecState, a: &str) -> Result<SpecState, SpecError> {
        match (self, st) {
            (Spec::Dfa(d), SpecState::Dfa(y)) => Ok(SpecState::Dfa(d.step(*y, a)?)),
            (Spec::Rm(m), SpecState::Rm { u, reward, .. }) => {
                let e = m.edge(*u, a)?;
                Ok(SpecState::Rm { u: e.to, accept: e.accept, reward: reward + &e.reward })
            }
            _ => Err(SpecError::StateKind),
        }
    }

    pub fn run<S: AsRef<str>>(&self, st: &SpecState, w: &[S]) -> Result<SpecState, SpecError> {
        w.iter().try_fold(st.clone(), |s, a| self.step(&s, a.as_ref()))
    }
}
