//! Document-at-a-time top-k retrieval over an [`Index`].
//!
//! A document's score is the sum of [`score_term`] over the query terms it
//! contains; documents matching no query term are never materialised.
//! Results are kept in a bounded min-heap of size k and emitted in the
//! canonical order: score descending, ties broken by docno descending.
//! Query terms absent from the vocabulary are skipped silently — topic
//! narratives routinely mention words no document contains.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::index::{Index, Posting};
use crate::models::{score_term, ModelId, ModelInputs, ModelParams};
use crate::text_analysis::{build_query_bag, Analyzer, FieldMode, QueryBag};
use crate::trec_io::{RunEntry, Topic};
use crate::{Error, Result};

/// Default retrieval depth (the TREC convention).
pub const DEFAULT_K: usize = 1000;

/// Ranked retrieval output for one topic.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub num: String,
    /// (docno, score) in canonical order; at most k items.
    pub items: Vec<(String, f64)>,
}

/// One system run: a tagged ranked list per topic, topic order preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub tag: String,
    pub lists: Vec<RankedList>,
}

impl Run {
    /// Flattens the run into TREC run-file entries with 1-based ranks.
    pub fn to_entries(&self) -> Vec<RunEntry> {
        let mut entries = Vec::new();
        for list in &self.lists {
            for (i, (docno, score)) in list.items.iter().enumerate() {
                entries.push(RunEntry {
                    num: list.num.clone(),
                    docno: docno.clone(),
                    rank: (i + 1) as u32,
                    score: *score,
                    tag: self.tag.clone(),
                });
            }
        }
        entries
    }

    /// Serializes to run-file bytes via [`crate::trec_io::write_run`].
    pub fn to_run_file(&self) -> Result<String> {
        crate::trec_io::write_run(&self.to_entries())
    }
}

struct Candidate<'a> {
    score: f64,
    docno: &'a str,
}

impl Candidate<'_> {
    fn cmp_canonical(&self, other: &Self) -> Ordering {
        // Greater = better: higher score, then docno descending wins.
        self.score
            .partial_cmp(&other.score)
            .expect("scores are finite")
            .then_with(|| self.docno.cmp(other.docno))
    }
}

impl PartialEq for Candidate<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_canonical(other) == Ordering::Equal
    }
}
impl Eq for Candidate<'_> {}
impl PartialOrd for Candidate<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_canonical(other)
    }
}

struct TermCursor<'a> {
    postings: &'a [Posting],
    pos: usize,
    qtf: u32,
    df: u64,
    cf: u64,
}

/// Executes a query bag against the index, returning the top-k documents.
pub fn run_query(
    index: &Index,
    model: ModelId,
    params: &ModelParams,
    bag: &QueryBag,
    num: &str,
    k: usize,
) -> Result<RankedList> {
    if bag.is_empty() {
        return Err(Error::EmptyQuery);
    }
    if k == 0 {
        return Err(Error::InvalidArg("retrieval depth k must be >= 1".into()));
    }
    params.validate()?;

    let stats = index.stats();
    // Cursors in sorted term order (the bag is a BTreeMap), so score
    // accumulation order is independent of internal doc-id assignment.
    let mut cursors: Vec<TermCursor> = bag
        .terms
        .iter()
        .filter_map(|(term, &qtf)| {
            index.postings(term).map(|(ts, postings)| TermCursor {
                postings,
                pos: 0,
                qtf,
                df: ts.df,
                cf: ts.cf,
            })
        })
        .collect();

    // Min-heap of size k: the canonical-worst candidate sits on top.
    let mut heap: BinaryHeap<std::cmp::Reverse<Candidate>> = BinaryHeap::with_capacity(k + 1);

    loop {
        let mut next_doc = u32::MAX;
        for c in &cursors {
            if let Some(p) = c.postings.get(c.pos) {
                next_doc = next_doc.min(p.doc_id);
            }
        }
        if next_doc == u32::MAX {
            break;
        }

        let doc = index.doc(next_doc);
        let mut score = 0.0;
        for c in cursors.iter_mut() {
            if c.postings.get(c.pos).map(|p| p.doc_id) == Some(next_doc) {
                let tf = c.postings[c.pos].tf;
                c.pos += 1;
                let input = ModelInputs {
                    tf,
                    qtf: c.qtf,
                    doc_len: doc.len,
                    avg_doc_len: stats.avg_doc_len(),
                    num_docs: stats.num_docs,
                    total_tokens: stats.total_tokens,
                    df: c.df,
                    cf: c.cf,
                };
                score += score_term(model, &input, params)?;
            }
        }

        let candidate = Candidate {
            score,
            docno: &doc.docno,
        };
        if heap.len() < k {
            heap.push(std::cmp::Reverse(candidate));
        } else if heap
            .peek()
            .is_some_and(|worst| candidate.cmp_canonical(&worst.0) == Ordering::Greater)
        {
            heap.pop();
            heap.push(std::cmp::Reverse(candidate));
        }
    }

    let mut top: Vec<Candidate> = heap.into_iter().map(|r| r.0).collect();
    top.sort_by(|a, b| b.cmp_canonical(a));
    Ok(RankedList {
        num: num.to_string(),
        items: top
            .into_iter()
            .map(|c| (c.docno.to_string(), c.score))
            .collect(),
    })
}

/// Runs a whole topic set. Topics whose selected fields tokenize to
/// nothing retrieve zero documents instead of aborting the batch.
#[allow(clippy::too_many_arguments)]
pub fn run_topics(
    index: &Index,
    model: ModelId,
    params: &ModelParams,
    analyzer: &Analyzer,
    topics: &[Topic],
    mode: FieldMode,
    k: usize,
    tag: &str,
) -> Result<Run> {
    let mut lists = Vec::with_capacity(topics.len());
    for topic in topics {
        let list = match build_query_bag(analyzer, topic, mode) {
            Ok(bag) => run_query(index, model, params, &bag, &topic.num, k)?,
            Err(Error::EmptyQuery) => RankedList {
                num: topic.num.clone(),
                items: Vec::new(),
            },
            Err(e) => return Err(e),
        };
        lists.push(list);
    }
    Ok(Run {
        tag: tag.to_string(),
        lists,
    })
}
