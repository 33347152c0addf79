//! Space-time process algebra workbench.
//!
//! Exact signed-meadow arithmetic for time and space, process terms with
//! timed and located send/receive actions, a directed axiom engine with
//! semi-head and head normal forms, a structural operational semantics with
//! symbolic idle sets, linearization into linear recursive specifications,
//! bisimulation checking, and an executable PAR protocol model.

pub mod analysis;
pub mod axioms;
pub mod comm;
pub mod error;
pub mod meadow;
pub mod protocols;
pub mod semantics;
pub mod syntax;
pub mod terms;

pub use comm::{rcpt, record_send, CommState, SendRecord, SpeedConfig};
pub use error::{Error, Result};
pub use meadow::{ExtScalar, Point, Scalar};
pub use semantics::{Ambient, IdleSet, Successor, Transition};
pub use terms::{Action, ActionKind, ActionPattern, Name, PatternAtom, PatternKind, RecSpec, Term, Timing};
