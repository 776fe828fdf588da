//! Parsers and writers for the four TREC exchange formats.
//!
//! * documents: `<DOC>` blocks with `<DOCNO>` and `<TEXT>` children;
//! * topics: `<top>` blocks with `<num>`, `<title>`, `<desc>`, `<narr>`;
//! * qrels: `num 0 docno grade` lines;
//! * runs: `num Q0 docno rank score tag` lines.
//!
//! The tag grammar is SGML-lite: tags are matched case-sensitively,
//! attributes are not supported, and no entity decoding is performed.
//! All streams must be valid UTF-8; invalid byte sequences are a hard
//! error, never replacement characters.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::{Error, Result};

/// One document of a collection: its unique identifier and raw body text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub docno: String,
    pub text: String,
}

/// A TREC topic: title (T), description (D), and narrative (N) sections.
///
/// `desc` and `narr` may be empty; `num` and `title` never are.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub num: String,
    pub title: String,
    pub desc: String,
    pub narr: String,
}

/// Relevance judgments: topic num -> docno -> integer grade (>= 0).
///
/// A document is *relevant* when its grade is greater than zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a judgment. Re-stating the same grade is accepted;
    /// a conflicting grade for the same (num, docno) pair is an error.
    pub fn insert(&mut self, num: &str, docno: &str, grade: u32) -> Result<()> {
        let per_topic = self.judgments.entry(num.to_string()).or_default();
        match per_topic.get(docno) {
            Some(&g) if g != grade => Err(Error::InvalidArg(format!(
                "conflicting grades for topic {num} docno {docno}: {g} vs {grade}"
            ))),
            _ => {
                per_topic.insert(docno.to_string(), grade);
                Ok(())
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    /// Topic nums with at least one judgment, in sorted order.
    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    /// All judgments for one topic.
    pub fn judgments(&self, num: &str) -> Option<&BTreeMap<String, u32>> {
        self.judgments.get(num)
    }

    pub fn grade(&self, num: &str, docno: &str) -> Option<u32> {
        self.judgments.get(num).and_then(|m| m.get(docno)).copied()
    }

    pub fn is_relevant(&self, num: &str, docno: &str) -> bool {
        self.grade(num, docno).is_some_and(|g| g > 0)
    }

    /// R(num): number of judged-relevant documents for the topic.
    pub fn num_relevant(&self, num: &str) -> usize {
        self.judgments
            .get(num)
            .map(|m| m.values().filter(|&&g| g > 0).count())
            .unwrap_or(0)
    }

    /// Number of judged-nonrelevant (grade 0) documents for the topic.
    pub fn num_judged_nonrelevant(&self, num: &str) -> usize {
        self.judgments
            .get(num)
            .map(|m| m.values().filter(|&&g| g == 0).count())
            .unwrap_or(0)
    }
}

/// One line of a TREC run file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub num: String,
    pub docno: String,
    /// 1-based rank within the topic.
    pub rank: u32,
    pub score: f64,
    pub tag: String,
}

fn utf8(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        offset: e.valid_up_to(),
    })
}

/// An opening tag whose closing counterpart is missing; carries the
/// absolute byte offset of the opener.
struct UnclosedTag {
    offset: usize,
    tag: String,
}

/// Finds `<tag>...</tag>` inside `block` and returns the inner text.
/// `base` is the block's offset in the whole stream, used to report
/// stream-absolute positions for unclosed tags.
fn find_tag<'a>(
    block: &'a str,
    tag: &str,
    base: usize,
) -> std::result::Result<Option<&'a str>, UnclosedTag> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let Some(start) = block.find(&open) else {
        return Ok(None);
    };
    let inner_start = start + open.len();
    match block[inner_start..].find(&close) {
        Some(rel_end) => Ok(Some(&block[inner_start..inner_start + rel_end])),
        None => Err(UnclosedTag {
            offset: base + start,
            tag: tag.to_string(),
        }),
    }
}

/// Parses a stream of `<DOC>` blocks into documents, in stream order.
///
/// Anything outside `<DOC>...</DOC>` is ignored. Within a block a
/// `<DOCNO>` child is required; a missing `<TEXT>` child yields an empty
/// body. Nested `<DOC>` tags, unterminated blocks, and duplicate docnos
/// are errors.
pub fn parse_documents(bytes: &[u8]) -> Result<Vec<RawDocument>> {
    let stream = utf8(bytes)?;
    let mut docs = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut pos = 0usize;

    while let Some(rel) = stream[pos..].find("<DOC>") {
        let start = pos + rel;
        let body_start = start + "<DOC>".len();
        let rest = &stream[body_start..];

        let end_rel = rest.find("</DOC>");
        let next_rel = rest.find("<DOC>");
        if let (Some(n), e) = (next_rel, end_rel) {
            if e.is_none() || n < e.unwrap() {
                return Err(Error::DocParse {
                    offset: body_start + n,
                    context: doc_context(&docs),
                    msg: "nested <DOC> before </DOC>".to_string(),
                });
            }
        }
        let Some(end_rel) = end_rel else {
            return Err(Error::DocParse {
                offset: start,
                context: doc_context(&docs),
                msg: "missing </DOC>".to_string(),
            });
        };
        let block = &rest[..end_rel];

        let unclosed = |u: UnclosedTag, parsed: &[RawDocument]| Error::DocParse {
            offset: u.offset,
            context: doc_context(parsed),
            msg: format!("missing </{}>", u.tag),
        };
        let docno = match find_tag(block, "DOCNO", body_start).map_err(|u| unclosed(u, &docs))? {
            Some(raw) => raw.trim().to_string(),
            None => {
                return Err(Error::DocParse {
                    offset: start,
                    context: doc_context(&docs),
                    msg: "missing <DOCNO>".to_string(),
                })
            }
        };
        if docno.is_empty() {
            return Err(Error::DocParse {
                offset: start,
                context: doc_context(&docs),
                msg: "empty <DOCNO>".to_string(),
            });
        }
        if !seen.insert(docno.clone()) {
            return Err(Error::DuplicateDocno(docno));
        }

        // The body is the raw content between <TEXT> and </TEXT>, untrimmed.
        let text = find_tag(block, "TEXT", body_start)
            .map_err(|u| unclosed(u, &docs))?
            .map(str::to_string)
            .unwrap_or_default();

        docs.push(RawDocument { docno, text });
        pos = body_start + end_rel + "</DOC>".len();
    }
    Ok(docs)
}

fn doc_context(parsed: &[RawDocument]) -> String {
    match parsed.last() {
        Some(d) => format!("after docno {:?}", d.docno),
        None => "at start of stream".to_string(),
    }
}

/// Serializes documents back to the tagged layout accepted by
/// [`parse_documents`]. Mainly fixture support: round-trips exactly for
/// docnos without surrounding whitespace and texts free of tag markers.
pub fn write_documents(docs: &[RawDocument]) -> String {
    let mut out = String::new();
    for d in docs {
        let _ = write!(
            out,
            "<DOC>\n<DOCNO>{}</DOCNO>\n<TEXT>{}</TEXT>\n</DOC>\n",
            d.docno, d.text
        );
    }
    out
}

/// Parses `<top>` blocks into topics. `<num>` and `<title>` are required;
/// `<desc>` and `<narr>` default to empty. All fields are trimmed.
pub fn parse_topics(bytes: &[u8]) -> Result<Vec<Topic>> {
    let stream = utf8(bytes)?;
    let mut topics = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut pos = 0usize;

    while let Some(rel) = stream[pos..].find("<top>") {
        let start = pos + rel;
        let body_start = start + "<top>".len();
        let rest = &stream[body_start..];

        let end_rel = rest.find("</top>");
        let next_rel = rest.find("<top>");
        if let (Some(n), e) = (next_rel, end_rel) {
            if e.is_none() || n < e.unwrap() {
                return Err(Error::TopicParse {
                    offset: body_start + n,
                    msg: "nested <top> before </top>".to_string(),
                });
            }
        }
        let Some(end_rel) = end_rel else {
            return Err(Error::TopicParse {
                offset: start,
                msg: "missing </top>".to_string(),
            });
        };
        let block = &rest[..end_rel];

        let field = |tag: &str| -> Result<Option<String>> {
            let found = find_tag(block, tag, body_start).map_err(|u| Error::TopicParse {
                offset: u.offset,
                msg: format!("missing </{}>", u.tag),
            })?;
            Ok(found.map(|s| s.trim().to_string()))
        };

        let num = field("num")?
            .filter(|s| !s.is_empty())
            .ok_or(Error::TopicParse {
                offset: start,
                msg: "missing or empty <num>".to_string(),
            })?;
        let title = field("title")?
            .filter(|s| !s.is_empty())
            .ok_or(Error::TopicParse {
                offset: start,
                msg: format!("topic {num}: missing or empty <title>"),
            })?;
        if !seen.insert(num.clone()) {
            return Err(Error::TopicParse {
                offset: start,
                msg: format!("duplicate topic num {num:?}"),
            });
        }

        topics.push(Topic {
            num,
            title,
            desc: field("desc")?.unwrap_or_default(),
            narr: field("narr")?.unwrap_or_default(),
        });
        pos = body_start + end_rel + "</top>".len();
    }
    Ok(topics)
}

/// Serializes topics to the `<top>` layout accepted by [`parse_topics`].
pub fn write_topics(topics: &[Topic]) -> String {
    let mut out = String::new();
    for t in topics {
        let _ = write!(
            out,
            "<top>\n<num>{}</num>\n<title>{}</title>\n<desc>{}</desc>\n<narr>{}</narr>\n</top>\n",
            t.num, t.title, t.desc, t.narr
        );
    }
    out
}

/// Parses qrels lines `num iter docno grade`. The second column (the TREC
/// "iteration" field) is accepted and ignored. Blank lines are skipped.
pub fn parse_qrels(bytes: &[u8]) -> Result<Qrels> {
    let stream = utf8(bytes)?;
    let mut qrels = Qrels::new();
    for (idx, line) in stream.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(Error::QrelsParse {
                line: lineno,
                msg: format!("expected 4 columns, got {}", cols.len()),
            });
        }
        let grade: u32 = cols[3].parse().map_err(|_| Error::QrelsParse {
            line: lineno,
            msg: format!(
                "invalid grade {:?} (must be a non-negative integer)",
                cols[3]
            ),
        })?;
        qrels
            .insert(cols[0], cols[2], grade)
            .map_err(|e| Error::QrelsParse {
                line: lineno,
                msg: e.to_string(),
            })?;
    }
    Ok(qrels)
}

/// Parses run-file lines `num Q0 docno rank score tag`. The second column
/// is ignored. Blank lines are skipped.
pub fn parse_run(bytes: &[u8]) -> Result<Vec<RunEntry>> {
    let stream = utf8(bytes)?;
    let mut entries = Vec::new();
    for (idx, line) in stream.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 6 {
            return Err(Error::RunParse {
                line: lineno,
                msg: format!("expected 6 columns, got {}", cols.len()),
            });
        }
        let rank: u32 = cols[3].parse().map_err(|_| Error::RunParse {
            line: lineno,
            msg: format!("invalid rank {:?}", cols[3]),
        })?;
        let score: f64 = cols[4].parse().map_err(|_| Error::RunParse {
            line: lineno,
            msg: format!("invalid score {:?}", cols[4]),
        })?;
        if !score.is_finite() {
            return Err(Error::RunParse {
                line: lineno,
                msg: format!("non-finite score {:?}", cols[4]),
            });
        }
        entries.push(RunEntry {
            num: cols[0].to_string(),
            docno: cols[2].to_string(),
            rank,
            score,
            tag: cols[5].to_string(),
        });
    }
    Ok(entries)
}

/// Canonical result order: score descending, then docno descending.
pub fn canonical_cmp(a: &(f64, &str), b: &(f64, &str)) -> std::cmp::Ordering {
    b.0.partial_cmp(&a.0)
        .expect("scores must be finite")
        .then_with(|| b.1.cmp(a.1))
}

/// Writes run entries as `num Q0 docno rank score tag` lines, one per
/// entry, each terminated by a newline. Scores are printed with fixed
/// 4-decimal precision, so output bytes are stable across calls.
///
/// Entries must arrive grouped by topic, ranked 1..k in order, sorted by
/// the canonical order (score descending, docno descending), with finite
/// scores, distinct docnos per topic, and no whitespace inside the id or
/// tag fields.
pub fn write_run(entries: &[RunEntry]) -> Result<String> {
    let mut out = String::new();
    let mut finished_topics: HashSet<&str> = HashSet::new();
    let mut cur_topic: Option<&str> = None;
    let mut cur_docnos: HashSet<&str> = HashSet::new();
    let mut prev: Option<&RunEntry> = None;

    for e in entries {
        for (what, value) in [("num", &e.num), ("docno", &e.docno), ("tag", &e.tag)] {
            if value.is_empty() || value.chars().any(char::is_whitespace) {
                return Err(Error::InvalidRun(format!(
                    "{what} {value:?} is empty or contains whitespace"
                )));
            }
        }
        if !e.score.is_finite() {
            return Err(Error::InvalidRun(format!(
                "non-finite score for topic {} docno {}",
                e.num, e.docno
            )));
        }

        if cur_topic != Some(e.num.as_str()) {
            if let Some(t) = cur_topic {
                finished_topics.insert(t);
            }
            if finished_topics.contains(e.num.as_str()) {
                return Err(Error::InvalidRun(format!(
                    "entries for topic {} are not contiguous",
                    e.num
                )));
            }
            cur_topic = Some(e.num.as_str());
            cur_docnos.clear();
            prev = None;
        }

        let expected_rank = cur_docnos.len() as u32 + 1;
        if e.rank != expected_rank {
            return Err(Error::InvalidRun(format!(
                "topic {}: expected rank {expected_rank}, got {}",
                e.num, e.rank
            )));
        }
        if !cur_docnos.insert(e.docno.as_str()) {
            return Err(Error::InvalidRun(format!(
                "topic {}: duplicate docno {}",
                e.num, e.docno
            )));
        }
        if let Some(p) = prev {
            let ordered = canonical_cmp(&(p.score, &p.docno), &(e.score, &e.docno)).is_lt();
            if !ordered {
                return Err(Error::InvalidRun(format!(
                    "topic {}: entries not in canonical order at rank {}",
                    e.num, e.rank
                )));
            }
        }
        prev = Some(e);

        let _ = writeln!(
            out,
            "{} Q0 {} {} {:.4} {}",
            e.num, e.docno, e.rank, e.score, e.tag
        );
    }
    Ok(out)
}
