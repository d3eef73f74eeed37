//! Batch commands and the HTTP facade behind the `npisim` binary.

pub mod commands;
pub mod server;
mod svg;

pub use server::router;
