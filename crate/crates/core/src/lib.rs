//! Finite fragments of generalized measurement theories.
//!
//! A measurement theory assigns to each finite outcome set `X` a set `M(X)` of
//! measurements and to each function `f : X → Y` a post-processing
//! `f_* : M(X) → M(Y)`, functorially, with exactly one measurement over a
//! single outcome. This crate works with finite pieces of such theories
//! ([`fragment::Fragment`]) and answers questions about them exactly:
//! natural deterministic, probabilistic and possibilistic states (with
//! checkable infeasibility certificates), compatibility and projectivity,
//! the polytope of probabilistic states and its effects, and recovery of the
//! underlying state set for Boolean theories.

pub mod error;
pub mod family;
pub mod finset;
pub mod fragment;
pub mod gpt;
pub mod laws;
pub mod lp;
pub mod rational;
pub mod reconstruct;
pub mod states;
pub mod structure;

pub use error::{Error, Result};
pub use family::{Family, FamilyRef, Payload};
pub use finset::{FinFun, FinObj};
pub use fragment::{Fragment, Measurement};
