//! Exact solver and verifier for preference evolution under stable matching.
//!
//! A continuum population carries two preference types; agents choose both
//! whom to match with and how to play a finite symmetric material game, and
//! the material payoffs earned in stable outcomes determine which preferences
//! survive. This crate evaluates everything in exact rational arithmetic:
//! equilibrium enumeration ([`equilibrium`]), stability of matching profiles
//! under complete ([`matching`]) and incomplete ([`incomplete`]) information,
//! fitness and evolutionary-stability verdicts ([`evolution`]), and the
//! bundled replication cases ([`cases`]). Scenario files and deterministic
//! JSON reports live in [`scenario`] and [`report`].

pub mod cases;
pub mod equilibrium;
pub mod evolution;
pub mod game;
pub mod incomplete;
pub mod linalg;
pub mod matching;
pub mod preference;
pub mod rational;
pub mod report;
pub mod scenario;
