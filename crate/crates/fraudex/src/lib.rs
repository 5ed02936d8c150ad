//! File formats, persistence, the experiment harness and the CLI commands
//! on top of `fraudex-core`.

pub mod bench;
pub mod commands;
pub mod config;
pub mod ingest;
pub mod persist;
pub mod report;

pub use fraudex_core as core;
