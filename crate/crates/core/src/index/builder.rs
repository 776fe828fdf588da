//! Index construction with bounded memory.
//!
//! Documents are tokenized (optionally fanned out across worker threads)
//! and applied strictly in ingestion order. The in-memory dictionary is
//! spilled to sorted on-disk segments whenever it exceeds the configured
//! postings budget; `finish` merges the segments by term. Because every
//! segment covers a contiguous, increasing range of doc ids, the merge
//! concatenates postings per term and the result is identical regardless
//! of batch size, worker count, or spill budget.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::PathBuf;

use tempfile::TempDir;

use super::{DocEntry, Index, Posting, TermEntry};
use crate::text_analysis::Analyzer;
use crate::trec_io::RawDocument;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct IndexConfig {
    /// Number of tokenization worker threads.
    pub workers: usize,
    /// Maximum buffered postings before the dictionary is spilled to disk.
    pub spill_postings: usize,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self {
            workers: 1,
            spill_postings: 2_000_000,
        }
    }
}

pub struct IndexBuilder {
    analyzer: Analyzer,
    config: IndexConfig,
    dict: BTreeMap<String, Vec<Posting>>,
    buffered_postings: usize,
    docs: Vec<DocEntry>,
    docnos: HashSet<String>,
    total_tokens: u64,
    spill_dir: Option<TempDir>,
    segments: Vec<PathBuf>,
}

impl IndexBuilder {
    pub fn new(analyzer: Analyzer, config: IndexConfig) -> Self {
        Self {
            analyzer,
            config,
            dict: BTreeMap::new(),
            buffered_postings: 0,
            docs: Vec::new(),
            docnos: HashSet::new(),
            total_tokens: 0,
            spill_dir: None,
            segments: Vec::new(),
        }
    }

    pub fn add_document(&mut self, doc: &RawDocument) -> Result<()> {
        let counts = count_terms(&self.analyzer.tokenize(&doc.text));
        self.apply(&doc.docno, counts)
    }

    /// Adds a batch. Tokenization fans out across `workers` threads; the
    /// per-document results are applied in input order, so the built index
    /// does not depend on scheduling.
    pub fn add_documents(&mut self, docs: &[RawDocument]) -> Result<()> {
        let workers = self.config.workers.max(1).min(docs.len().max(1));
        if workers <= 1 {
            for doc in docs {
                self.add_document(doc)?;
            }
            return Ok(());
        }

        let chunk = docs.len().div_ceil(workers);
        let analyzer = &self.analyzer;
        let counted: Vec<DocCounts> = std::thread::scope(|scope| {
            let handles: Vec<_> = docs
                .chunks(chunk)
                .map(|slice| {
                    scope.spawn(move || {
                        slice
                            .iter()
                            .map(|d| count_terms(&analyzer.tokenize(&d.text)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("tokenizer worker panicked"))
                .collect()
        });

        for (doc, counts) in docs.iter().zip(counted) {
            self.apply(&doc.docno, counts)?;
        }
        Ok(())
    }

    fn apply(&mut self, docno: &str, counts: DocCounts) -> Result<()> {
        if docno.is_empty() {
            return Err(Error::InvalidArg("empty docno".to_string()));
        }
        if !self.docnos.insert(docno.to_string()) {
            return Err(Error::DuplicateDocno(docno.to_string()));
        }
        let doc_id = u32::try_from(self.docs.len())
            .map_err(|_| Error::InvalidArg("too many documents".into()))?;

        self.total_tokens += counts.len;
        self.docs.push(DocEntry {
            docno: docno.to_string(),
            len: counts.len,
        });
        for (term, tf) in counts.terms {
            self.dict
                .entry(term)
                .or_default()
                .push(Posting { doc_id, tf });
            self.buffered_postings += 1;
        }
        if self.buffered_postings >= self.config.spill_postings {
            self.spill()?;
        }
        Ok(())
    }

    fn spill(&mut self) -> Result<()> {
        if self.dict.is_empty() {
            return Ok(());
        }
        if self.spill_dir.is_none() {
            self.spill_dir = Some(tempfile::tempdir()?);
        }
        let dir = self.spill_dir.as_ref().unwrap();
        let path = dir
            .path()
            .join(format!("seg{:05}.bin", self.segments.len()));
        let mut w = BufWriter::new(File::create(&path)?);
        for (term, postings) in &self.dict {
            write_varint(&mut w, term.len() as u64)?;
            w.write_all(term.as_bytes())?;
            write_varint(&mut w, postings.len() as u64)?;
            let mut prev = 0u32;
            for p in postings {
                write_varint(&mut w, u64::from(p.doc_id - prev))?;
                write_varint(&mut w, u64::from(p.tf))?;
                prev = p.doc_id;
            }
        }
        w.flush()?;
        self.segments.push(path);
        self.dict.clear();
        self.buffered_postings = 0;
        Ok(())
    }

    pub fn finish(mut self) -> Result<Index> {
        if self.docs.is_empty() {
            return Err(Error::EmptyCollection);
        }

        let terms = if self.segments.is_empty() {
            self.dict
                .into_iter()
                .map(|(term, postings)| {
                    let cf = postings.iter().map(|p| u64::from(p.tf)).sum();
                    (term, TermEntry { cf, postings })
                })
                .collect()
        } else {
            self.spill()?;
            merge_segments(&self.segments)?
        };

        // Build-time consistency check: postings must account for every
        // token exactly once.
        let cf_sum: u64 = terms.values().map(|e| e.cf).sum();
        assert_eq!(
            cf_sum, self.total_tokens,
            "postings do not sum to token count"
        );
        for entry in terms.values() {
            debug_assert!(entry.postings.windows(2).all(|w| w[0].doc_id < w[1].doc_id));
        }

        Ok(Index::from_parts(self.total_tokens, self.docs, terms))
    }
}

struct DocCounts {
    len: u64,
    terms: HashMap<String, u32>,
}

fn count_terms(tokens: &[String]) -> DocCounts {
    let mut terms: HashMap<String, u32> = HashMap::new();
    for t in tokens {
        *terms.entry(t.clone()).or_insert(0) += 1;
    }
    DocCounts {
        len: tokens.len() as u64,
        terms,
    }
}

struct SegmentReader {
    reader: BufReader<File>,
    head: Option<(String, Vec<Posting>)>,
}

impl SegmentReader {
    fn open(path: &PathBuf) -> Result<Self> {
        let mut r = Self {
            reader: BufReader::new(File::open(path)?),
            head: None,
        };
        r.advance()?;
        Ok(r)
    }

    fn advance(&mut self) -> Result<()> {
        self.head = read_record(&mut self.reader)?;
        Ok(())
    }
}

fn merge_segments(paths: &[PathBuf]) -> Result<BTreeMap<String, TermEntry>> {
    let mut readers = paths
        .iter()
        .map(SegmentReader::open)
        .collect::<Result<Vec<_>>>()?;
    let mut terms: BTreeMap<String, TermEntry> = BTreeMap::new();

    loop {
        let min_term = readers
            .iter()
            .filter_map(|r| r.head.as_ref().map(|(t, _)| t.clone()))
            .min();
        let Some(term) = min_term else { break };

        let mut postings = Vec::new();
        // Segment order equals doc-id order: segment i holds strictly
        // smaller doc ids than segment i+1 for any given term.
        for reader in readers.iter_mut() {
            if reader.head.as_ref().is_some_and(|(t, _)| *t == term) {
                let (_, mut chunk) = reader.head.take().unwrap();
                postings.append(&mut chunk);
                reader.advance()?;
            }
        }
        let cf = postings.iter().map(|p| u64::from(p.tf)).sum();
        terms.insert(term, TermEntry { cf, postings });
    }
    Ok(terms)
}

fn read_record(r: &mut BufReader<File>) -> Result<Option<(String, Vec<Posting>)>> {
    let Some(term_len) = try_read_varint(r)? else {
        return Ok(None);
    };
    let mut term_bytes = vec![0u8; term_len as usize];
    r.read_exact(&mut term_bytes)?;
    let term = String::from_utf8(term_bytes)
        .map_err(|_| Error::InvalidArg("segment term is not UTF-8".into()))?;

    let count = try_read_varint(r)?.ok_or(Error::IndexTruncated)?;
    let mut postings = Vec::with_capacity(count as usize);
    let mut doc_id = 0u32;
    for i in 0..count {
        let gap = try_read_varint(r)?.ok_or(Error::IndexTruncated)? as u32;
        let tf = try_read_varint(r)?.ok_or(Error::IndexTruncated)? as u32;
        doc_id = if i == 0 { gap } else { doc_id + gap };
        postings.push(Posting { doc_id, tf });
    }
    Ok(Some((term, postings)))
}

pub(crate) fn write_varint<W: Write>(w: &mut W, mut value: u64) -> std::io::Result<()> {
    loop {
        let byte = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            return w.write_all(&[byte]);
        }
        w.write_all(&[byte | 0x80])?;
    }
}

fn try_read_varint<R: Read>(r: &mut R) -> Result<Option<u64>> {
    let mut value = 0u64;
    let mut shift = 0u32;
    let mut first = true;
    loop {
        let mut buf = [0u8; 1];
        match r.read(&mut buf)? {
            0 if first => return Ok(None),
            0 => return Err(Error::IndexTruncated),
            _ => {}
        }
        first = false;
        value |= u64::from(buf[0] & 0x7f) << shift;
        if buf[0] & 0x80 == 0 {
            return Ok(Some(value));
        }
        shift += 7;
        if shift >= 64 {
            return Err(Error::IndexTruncated);
        }
    }
}
