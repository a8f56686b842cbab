//! Temporal verification of effectful higher-order programs by a
//! store-passing product construction and weakest pre-conditions.

pub mod automata;
pub mod exec;
pub mod pipeline;
pub mod rational;
pub mod semantics;
pub mod sps;
pub mod syntax;
