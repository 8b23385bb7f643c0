//! Satisfiability of symbolic finite automata, with and without
//! cardinality constraints on how often each kind of letter occurs.
//!
//! The pipeline: an automaton over a predicate algebra is propositionalized
//! into a table automaton over finitely many letters ([`sfa`]), the letter
//! counts of its accepted words are captured by an integer linear formula
//! ([`parikh`]), cardinality constraints over predicate sets are reduced to
//! counts of Venn regions ([`qfbapa`]), and the combined system is decided
//! by an integer arithmetic solver ([`presburger`]). [`decide`] ties the
//! stages together and reconstructs witness words from solver models.

pub mod algebra;
pub mod cli;
pub mod decide;
pub mod error;
pub mod harness;
pub mod parikh;
pub mod presburger;
pub mod qfbapa;
pub mod sfa;
pub mod sfa_file;

pub use error::{Error, Result};
