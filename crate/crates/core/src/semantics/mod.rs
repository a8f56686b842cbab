//! Fuel-bounded denotational evaluation and weakest pre-conditions.
//!
//! Every `μ` closure carries its own approximant index: applying a closure
//! with fuel 0 yields the empty valuation, and each unfolding hands the body
//! a copy with one less. Evaluating the same `μ` term again starts afresh.

mod algebra;
mod eval;
mod value;
mod wp;

pub use algebra::Algebra;
pub use eval::{Interp, Kind};
pub use value::Ground;
pub use wp::{
    eval_traces, program_kind, wp_iterate, wp_product, wp_source, wp_sync, TraceOutcome, Valuation, WpOp, WpResult,
};

use thiserror::Error;

use crate::automata::SpecError;
use crate::syntax::TypeError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("cannot mix probabilistic and angelic effects: {}", .0.join(", "))]
    MixedEffects(Vec<String>),
    #[error("mode {mode} does not fit the program's effects {}", .effects.join(", "))]
    ModeKind { mode: String, effects: Vec<String> },
    #[error("result type `{0}` is not ground")]
    NonGround(String),
    #[error("expected a product program over the lifted signature")]
    NotProduct,
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("unknown effect `{0}`")]
    UnknownEffect(String),
    #[error("a specification is required to interpret emissions")]
    MissingSpec,
    #[error("evaluation stuck: {0}")]
    Stuck(String),
}
