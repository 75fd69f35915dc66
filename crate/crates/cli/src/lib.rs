//! Command-line front end and the local HTTP service for `segment-forge`.

pub mod app;
pub mod server;
mod shared;
