//! Command implementations and report plumbing behind the `bss-lca` binary.

pub mod commands;
pub mod report;
