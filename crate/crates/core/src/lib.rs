//! Text analytics directly on grammar-compressed corpora.
//!
//! A corpus is turned into a Sequitur grammar whose rules form a DAG. The
//! analytics never decompress: they push rule weights down the DAG
//! ([`traversal::top_down_traverse`]) or merge per-rule local tables up the
//! DAG ([`traversal::bottom_up_traverse`]) in bulk-synchronous rounds driven
//! by per-rule readiness masks.
//!
//! The crate is `no_std` (it needs `alloc`). Parallelism is injected through
//! the [`exec::Executor`] trait; [`exec::Sequential`] is the built-in
//! single-threaded executor.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dag;
pub mod error;
pub mod exec;
pub mod fileset;
pub mod grammar;
pub mod laws;
pub mod naive;
pub mod partition;
pub mod pool;
pub mod sequence;
pub mod sequitur;
pub mod symbol;
pub mod table;
pub mod tasks;
pub mod traversal;

#[cfg(test)]
pub(crate) mod fixtures;

pub use dag::{Dag, Rule, Segment};
pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use grammar::{build_corpus_stream, expand, Grammar};
pub use symbol::{Dictionary, SymbolId, SymbolKind};
pub use table::{ConcurrentCountTable, TableView};
pub use tasks::{run_task, Task, TaskOutput, TaskReport};
pub use traversal::{Direction, Strategy, TraversalConfig};
