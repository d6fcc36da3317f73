//! HTTP/JSON service and command line over the digital twin.

pub mod api;
pub mod cli;
pub mod config;
pub mod error;
pub mod http;

pub use error::ApiError;
