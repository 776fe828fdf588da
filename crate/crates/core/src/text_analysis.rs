//! Tokenization and query-bag construction.
//!
//! Text is split on any codepoint that is neither a letter, a number, nor
//! a combining mark; ASCII letters are lowercased and everything else is
//! passed through unmodified, so Gujarati text keeps its matras and
//! viramas intact. ZWJ/ZWNJ (U+200D/U+200C) are treated as mark-class and
//! retained inside tokens, keeping distinct Indic orthographic forms
//! distinct.
//!
//! No stemming and no stopword removal happen by default. An optional
//! stoplist (one term per line, `#` comments) can be attached to an
//! [`Analyzer`] and is applied after tokenization.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::trec_io::Topic;
use crate::{Error, Result};

fn is_term_char(c: char) -> bool {
    if c == '\u{200C}' || c == '\u{200D}' {
        return true;
    }
    matches!(
        c.general_category_group(),
        GeneralCategoryGroup::Letter | GeneralCategoryGroup::Mark | GeneralCategoryGroup::Number
    )
}

/// Splits text into normalized terms. Deterministic and order-preserving;
/// idempotent on its own space-joined output.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if is_term_char(c) {
            current.push(c.to_ascii_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Tokenizer plus optional stoplist. The same analyzer must be used for
/// indexing and for query construction, otherwise query terms will not
/// line up with the vocabulary.
#[derive(Debug, Clone, Default)]
pub struct Analyzer {
    stopwords: HashSet<String>,
}

impl Analyzer {
    /// Analyzer with an empty stoplist (the default configuration).
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses stoplist text: one term per line, `#` starts a comment.
    /// Entries are normalized through the tokenizer so the list matches
    /// emitted terms regardless of how it was typed.
    pub fn with_stoplist(text: &str) -> Self {
        let mut stopwords = HashSet::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for term in tokenize(line) {
                stopwords.insert(term);
            }
        }
        Self { stopwords }
    }

    pub fn from_stoplist_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let text = std::str::from_utf8(&bytes).map_err(|e| Error::InvalidUtf8 {
            offset: e.valid_up_to(),
        })?;
        Ok(Self::with_stoplist(text))
    }

    pub fn stopword_count(&self) -> usize {
        self.stopwords.len()
    }

    /// Tokenizes and drops stoplisted terms.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let mut tokens = tokenize(text);
        if !self.stopwords.is_empty() {
            tokens.retain(|t| !self.stopwords.contains(t));
        }
        tokens
    }
}

/// Which topic sections contribute query terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldMode {
    /// Title only.
    T,
    /// Title + description.
    Td,
    /// Title + description + narrative.
    Tdn,
}

impl FieldMode {
    pub const ALL: [FieldMode; 3] = [FieldMode::T, FieldMode::Td, FieldMode::Tdn];

    pub fn name(self) -> &'static str {
        match self {
            FieldMode::T => "T",
            FieldMode::Td => "TD",
            FieldMode::Tdn => "TDN",
        }
    }
}

impl fmt::Display for FieldMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FieldMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" => Ok(FieldMode::T),
            "TD" => Ok(FieldMode::Td),
            "TDN" => Ok(FieldMode::Tdn),
            other => Err(Error::InvalidArg(format!(
                "invalid field mode {other:?} (expected T, TD, or TDN)"
            ))),
        }
    }
}

/// Weighted query term multiset built from a topic under a field mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryBag {
    /// term -> query term frequency (always >= 1).
    pub terms: BTreeMap<String, u32>,
    pub field_mode: FieldMode,
}

impl QueryBag {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Builds the query bag for a topic: T uses the title, TD adds the
/// description, TDN adds the narrative. Term counts accumulate across
/// the selected sections. A bag with no terms is signalled as
/// [`Error::EmptyQuery`].
pub fn build_query_bag(analyzer: &Analyzer, topic: &Topic, mode: FieldMode) -> Result<QueryBag> {
    let mut terms: BTreeMap<String, u32> = BTreeMap::new();
    let mut add = |text: &str| {
        for term in analyzer.tokenize(text) {
            *terms.entry(term).or_insert(0) += 1;
        }
    };
    add(&topic.title);
    if matches!(mode, FieldMode::Td | FieldMode::Tdn) {
        add(&topic.desc);
    }
    if mode == FieldMode::Tdn {
        add(&topic.narr);
    }
    if terms.is_empty() {
        return Err(Error::EmptyQuery);
    }
    Ok(QueryBag {
        terms,
        field_mode: mode,
    })
}
