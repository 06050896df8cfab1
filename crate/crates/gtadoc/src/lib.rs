//! Corpus ingestion, the GTDC file format, a thread-pool executor, and the
//! `gtadoc` command line on top of [`gtadoc_core`].

pub mod cli;
pub mod corpus;
pub mod error;
pub mod format;
pub mod manifest;
pub mod parallel;
pub mod run;
pub mod synth;
pub mod tokenize;
pub mod tsv;

pub use corpus::Corpus;
pub use error::CliError;
pub use parallel::Workers;
