pub mod dfa;
pub mod query;
pub mod reward_machine;
pub mod spec;

use thiserror::Error;

pub use dfa::{dfa_accepts, dfa_run, Dfa};
pub use query::{query_apply, DomainValue, InferenceQuery, Mode};
pub use reward_machine::{rm_run, Edge, EdgeSpec, RewardMachine};
pub use spec::{Spec, SpecState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate {0} `{1}`")]
    Duplicate(String, String),
    #[error("transition from `{0}` on `{1}` is missing")]
    NotTotal(String, String),
    #[error("negative reward on edge `{0}` --{1}-->")]
    NegativeReward(String, String),
    #[error("specification has no states")]
    NoStates,
    #[error("mode {0} requires {1}")]
    ModeMismatch(String, &'static str),
    #[error("state does not belong to this kind of specification")]
    StateKind,
    #[error("malformed specification: {0}")]
    Json(String),
}
