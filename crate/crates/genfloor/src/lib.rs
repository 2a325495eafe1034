//! Command-line and HTTP front ends for `genfloor-core`.

pub mod cli;
pub mod server;
