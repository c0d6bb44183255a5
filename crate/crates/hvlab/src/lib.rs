//! File formats, reports and the command-line driver for `hvlab-core`.

pub mod cli;
pub mod format;
pub mod report;
