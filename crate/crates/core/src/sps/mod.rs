//! Store-passing product construction: the specification state becomes an
//! explicit value `__y` threaded through every term.

mod simplify;
mod transform;

pub use simplify::simplify;
pub use transform::{transform_context, transform_prime, transform_term, transform_type, TransformOutput};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::automata::Spec;
use crate::syntax::signature::{step_name, ConstKind, EffectKind, OpSig};
use crate::syntax::{Signature, Type, TypeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("type `{0}` already mentions the state type")]
    StateInInput(String),
    #[error("input term is ill-typed: {0}")]
    IllTyped(#[from] TypeError),
    #[error("transformed term is ill-typed: {0}")]
    Output(TypeError),
    #[error("`__y` is reserved for the specification state")]
    ReservedVariable,
    #[error("emitted symbol `{0}` is not in the specification alphabet")]
    Alphabet(String),
    #[error("signature is already lifted")]
    AlreadyLifted,
}

/// Lifts every arity and coarity by `× state`. Emits become effect-free
/// `step["a"]` constants; the other effects keep their kind.
pub fn transform_signature(sig: &Signature, spec: &Spec) -> Result<Signature, TransformError> {
    if sig.lifted {
        return Err(TransformError::AlreadyLifted);
    }
    let lift = |t: &Type| Type::prod(t.clone(), Type::State);
    let mut constants: BTreeMap<String, OpSig<ConstKind>> = sig
        .constants
        .iter()
        .map(|(n, o)| (n.clone(), OpSig { kind: o.kind.clone(), arity: lift(&o.arity), coarity: lift(&o.coarity) }))
        .collect();
    let mut effects = BTreeMap::new();
    for (n, o) in &sig.effects {
        match &o.kind {
            EffectKind::Emit(a) => {
                if !spec.has_symbol(a) {
                    return Err(TransformError::Alphabet(a.clone()));
                }
                constants.insert(
                    step_name(a),
                    OpSig { kind: ConstKind::Step(a.clone()), arity: lift(&o.arity), coarity: lift(&o.coarity) },
                );
            }
            kind => {
                effects
                    .insert(n.clone(), OpSig { kind: kind.clone(), arity: lift(&o.arity), coarity: lift(&o.coarity) });
            }
        }
    }
    Ok(Signature { bases: sig.bases.clone(), constants, effects, lifted: true })
}
