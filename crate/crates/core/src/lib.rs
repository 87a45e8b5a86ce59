//! Projectional editing engine.
//!
//! A language definition ([`langdef`]) gives abstract clauses plus transform
//! and reduce rules. A [`session::Session`] owns the abstract tree, reduces it
//! to a normal form, lays that out as a [`scene::Scene`] and turns user events
//! into transformations.

pub mod corpus;
pub mod langdef;
pub mod matching;
pub mod persist;
pub mod rewrite;
pub mod scene;
pub mod session;
pub mod sexpr;
pub mod term;
