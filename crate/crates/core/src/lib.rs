//! Neuro-symbolic agents for a procedurally generated coin-collector text
//! game.
//!
//! The pipeline runs observation text through a templated-grammar parser and
//! an episode map to get propositional facts, grounds them per candidate
//! word using a category lexicon, and scores actions with per-category
//! weighted logic networks trained by Q-learning. Trained networks read back
//! as conjunctive rules.

pub mod agent;
pub mod factextract;
pub mod harness;
pub mod lexicon;
pub mod lnn;
pub mod rng;
pub mod worldsim;
