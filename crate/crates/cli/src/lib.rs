//! Experiment runner, verification suite, corpus and report rendering for
//! the `isoslice` command.

pub mod app;
pub mod config;
pub mod corpus;
pub mod error;
pub mod gen;
pub mod render;
pub mod suite;
