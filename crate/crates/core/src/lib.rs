//! Two-tier Hoare-logic verification.
//!
//! Assertions pair a description-logic tier with a first-order state tier.
//! The crate provides both logics, the lifting between them, kernel
//! generation, a small imperative language with a relational interpreter,
//! the proof calculus with a checker and an automatic strategy, and
//! empirical validation of judgements.

pub mod calculus;
pub mod cli;
pub mod dl;
pub mod kernel;
pub mod lang;
pub mod lifting;
pub mod state;

#[cfg(test)]
mod fixtures;
