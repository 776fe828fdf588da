//! Ad hoc retrieval engine and evaluation harness for TREC-style test collections.
//!
//! The crate is organised as a pipeline:
//!
//! * [`trec_io`] — parsers and writers for the four exchange formats
//!   (SGML-tagged documents, topics, qrels, run files);
//! * [`text_analysis`] — tokenization and query-bag construction;
//! * [`index`] — inverted index build, persistence, and statistics;
//! * [`models`] — the seventeen term-weighting models behind one registry;
//! * [`search`] — document-at-a-time top-k retrieval over an index;
//! * [`eval`] — trec_eval-style measures (MAP, GMAP, Rprec, bpref,
//!   reciprocal rank, P@5, interpolated precision-recall curves).

pub mod error;
pub mod eval;
pub mod index;
pub mod models;
pub mod search;
pub mod text_analysis;
pub mod trec_io;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
