//! Core of the Critters mutation-testing game.
//!
//! The crate is split along the game's moving parts:
//!
//! - [`blocklang`]: the block language AST, its interpreter and type checker.
//! - [`mutation`]: AST edits, mutant generation, divergence analysis and the
//!   brute-force oracle solver.
//! - [`engine`]: deterministic simulation of base (portal) and loop (signpost)
//!   levels, event timelines and scoring.
//! - [`levels`]: the level file format, validation and the built-in catalog.
//!
//! Every JSON document produced by this crate goes through [`canonical`] so
//! that equal values always serialize to equal bytes.

pub mod blocklang;
pub mod canonical;
pub mod diagnostic;
pub mod engine;
pub mod levels;
pub mod mutation;

pub use diagnostic::{DiagCode, Diagnostic, Location, Severity};
