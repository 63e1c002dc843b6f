//! Experiment harness for the `mbqc` simulator: configs, runners, fits,
//! artifacts and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod fit;
pub mod output;
pub mod plot;
pub mod runners;
