//! Library surface of the experiment runner: configuration handling,
//! subcommand implementations, and the acceptance suite. The binary in
//! `main.rs` is a thin argument-parsing shell over these.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod patterns;
