//! Standard-library companion of `heisqc-core`: JSON run configs, JSON/CSV reports,
//! the experiment catalog and the `heisqc` command-line front end.

pub mod catalog;
pub mod cli;
pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use heisqc_core as core;
