//! Linearization, bisimulation on linear specifications, and the
//! definitional bisimulation oracle used to cross-check both.

pub mod bisim;
pub mod linearize;
pub mod oracle;

pub use bisim::{bisim_linear, signature, LinearVerdict, StateSignature, TransitionGraph};
pub use linearize::{linearize, linearize_term, LinearSpec};
pub use oracle::{bisim_definitional, relevant_instants, OracleVerdict, Witness};
