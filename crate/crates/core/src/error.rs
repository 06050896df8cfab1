use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    /// A grammar or DAG violates a structural invariant (cycle, dangling
    /// symbol, misplaced splitter, runaway traversal).
    #[error("corrupt grammar: {0}")]
    Corruption(String),

    #[error("count table out of node capacity ({capacity} nodes)")]
    Capacity { capacity: usize },

    #[error("64-bit count overflow")]
    Overflow,

    #[error("resource error: {0}")]
    Resource(String),
}
