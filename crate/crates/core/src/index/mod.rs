//! Inverted index: build, persist, and serve postings plus the global and
//! per-term statistics every weighting model consumes.
//!
//! An [`Index`] is immutable once built and safely shareable across
//! concurrent queries. Documents get dense internal ids in ingestion
//! order; run output always carries docno strings, never internal ids.

mod builder;
mod storage;

use std::collections::BTreeMap;
use std::path::Path;

use crate::text_analysis::Analyzer;
use crate::trec_io::RawDocument;
use crate::Result;

pub use builder::{IndexBuilder, IndexConfig};

/// Collection-wide statistics. `avg_doc_len` is derived from the stored
/// token and document counts, so `avg_l * N == TC` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollectionStats {
    pub num_docs: u64,
    pub total_tokens: u64,
    pub vocab_size: u64,
}

impl CollectionStats {
    pub fn avg_doc_len(&self) -> f64 {
        self.total_tokens as f64 / self.num_docs as f64
    }
}

/// Per-term statistics: document frequency and collection frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermStats {
    /// Number of documents containing the term.
    pub df: u64,
    /// Total occurrences of the term across the collection.
    pub cf: u64,
}

/// One posting: a document and the term's frequency within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc_id: u32,
    pub tf: u32,
}

/// Document table entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocEntry {
    pub docno: String,
    /// Document length in tokens. May be zero.
    pub len: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct TermEntry {
    pub cf: u64,
    pub postings: Vec<Posting>,
}

/// An immutable inverted index.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    total_tokens: u64,
    docs: Vec<DocEntry>,
    terms: BTreeMap<String, TermEntry>,
}

impl Index {
    pub(crate) fn from_parts(
        total_tokens: u64,
        docs: Vec<DocEntry>,
        terms: BTreeMap<String, TermEntry>,
    ) -> Self {
        Self {
            total_tokens,
            docs,
            terms,
        }
    }

    pub fn stats(&self) -> CollectionStats {
        CollectionStats {
            num_docs: self.docs.len() as u64,
            total_tokens: self.total_tokens,
            vocab_size: self.terms.len() as u64,
        }
    }

    pub fn num_docs(&self) -> u64 {
        self.docs.len() as u64
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn vocab_size(&self) -> u64 {
        self.terms.len() as u64
    }

    pub fn doc(&self, doc_id: u32) -> &DocEntry {
        &self.docs[doc_id as usize]
    }

    pub fn term_stats(&self, term: &str) -> Option<TermStats> {
        self.terms.get(term).map(|e| TermStats {
            df: e.postings.len() as u64,
            cf: e.cf,
        })
    }

    /// Postings and statistics for a term. Unknown terms are absent, never
    /// an error.
    pub fn postings(&self, term: &str) -> Option<(TermStats, &[Posting])> {
        self.terms.get(term).map(|e| {
            (
                TermStats {
                    df: e.postings.len() as u64,
                    cf: e.cf,
                },
                e.postings.as_slice(),
            )
        })
    }

    /// Iterates the vocabulary in sorted term order.
    pub fn terms(&self) -> impl Iterator<Item = (&str, TermStats)> {
        self.terms.iter().map(|(t, e)| {
            (
                t.as_str(),
                TermStats {
                    df: e.postings.len() as u64,
                    cf: e.cf,
                },
            )
        })
    }

    /// Writes the index directory: a versioned, checksummed binary file
    /// plus a human-readable `stats.txt`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        storage::save(self, dir)
    }

    /// Loads an index directory, verifying magic bytes, checksum, and
    /// format version.
    pub fn load(dir: &Path) -> Result<Index> {
        storage::load(dir)
    }
}

/// Builds an index over a document slice in one call.
pub fn build_index(
    docs: &[RawDocument],
    analyzer: &Analyzer,
    config: &IndexConfig,
) -> Result<Index> {
    let mut builder = IndexBuilder::new(analyzer.clone(), config.clone());
    builder.add_documents(docs)?;
    builder.finish()
}
