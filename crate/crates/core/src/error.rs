//! Error type shared across the crate.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid UTF-8 at byte {offset}")]
    InvalidUtf8 { offset: usize },

    #[error("document parse error at byte {offset} ({context}): {msg}")]
    DocParse {
        offset: usize,
        context: String,
        msg: String,
    },

    #[error("topic parse error at byte {offset}: {msg}")]
    TopicParse { offset: usize, msg: String },

    #[error("qrels line {line}: {msg}")]
    QrelsParse { line: usize, msg: String },

    #[error("run file line {line}: {msg}")]
    RunParse { line: usize, msg: String },

    #[error("invalid run: {0}")]
    InvalidRun(String),

    #[error("duplicate docno {0:?}")]
    DuplicateDocno(String),

    #[error("collection contains no documents")]
    EmptyCollection,

    #[error("query produced no terms")]
    EmptyQuery,

    #[error("unknown model {name:?}; valid models: {valid}")]
    UnknownModel { name: String, valid: String },

    #[error("invalid model parameter: {0}")]
    InvalidParam(String),

    #[error("invalid scoring inputs: {0}")]
    InvalidInputs(String),

    #[error("no index found at {}", .0.display())]
    IndexMissing(PathBuf),

    #[error("not an index file (bad magic bytes)")]
    IndexBadMagic,

    #[error("index version {found} not supported (expected {expected})")]
    IndexVersion { found: u32, expected: u32 },

    #[error("index checksum mismatch: file is corrupt")]
    IndexChecksum,

    #[error("index file truncated")]
    IndexTruncated,

    #[error(
        "run and qrels share no topics (run topics: {run_only:?}; qrels topics: {qrels_only:?})"
    )]
    DisjointTopics {
        run_only: Vec<String>,
        qrels_only: Vec<String>,
    },

    #[error("no topic with relevance judgments to evaluate")]
    NoEvaluableTopics,

    #[error("{0}")]
    InvalidArg(String),
}
