//! Experiment harness for the orbit-dichotomy laboratory: dense truncations
//! and spectral diagnostics, a typed configuration format, a deterministic
//! experiment runner, and the property suites behind the CLI.

pub mod config;
pub mod matrices;
pub mod run;
pub mod spectral;
pub mod suite;
