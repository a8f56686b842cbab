pub mod parser;
pub mod pretty;
pub mod signature;
pub mod term;
pub mod typecheck;
pub mod types;

pub use parser::{parse_program, parse_term, parse_type, ParseError, Program, STATE_VAR};
pub use pretty::{pretty_print, pretty_print_in};
pub use signature::{ConstKind, EffectKind, OpSig, Prim, Signature, SignatureError};
pub use term::{Binder, Term};
pub use typecheck::{elaborate, typecheck, Context, TypeError};
pub use types::Type;
