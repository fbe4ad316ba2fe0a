//! File formats, command-line front end and the random-graph sweep harness
//! around [`iabc_core`].

pub mod cli;
pub mod config;
pub mod format;
pub mod output;
pub mod sweep;
