//! The seventeen term-weighting models behind a single registry.
//!
//! Every model is a pure function of the statistics in [`ModelInputs`]:
//! within-document and query term frequencies, document and average
//! document length, document frequency, collection frequency, and the
//! collection totals. Logarithms are base 2 throughout. The per-document
//! score for a query is the sum of [`score_term`] over the query terms
//! present in the document; terms with tf = 0 are filtered out before
//! dispatch and never reach a model.
//!
//! Shared quantities used below:
//!
//! * `tfn = tf * log2(1 + c * avg_l / l)` — Normalization 2 ([`norm2`]);
//! * `p_d = tf / l`, `p_c = F / TC` — within-document and collection rates;
//! * `lambda_p = F / N` — mean occurrences per document.
//!
//! Guarded domain edges (the DLH-family frequency clamp, the Stirling
//! argument clamp in BB2, the one-sided guards of DFI0, Js_KLs, and
//! XSqrA_M) keep every score finite on valid inputs. The one genuine
//! domain restriction is BB2, whose information content involves
//! log2(N - 1) and therefore requires at least two documents.

use std::f64::consts::{LOG2_E, PI};
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Identifier of one of the seventeen weighting models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Bb2,
    Bm25,
    Dfi0,
    DfrBm25,
    Dfree,
    Dlh,
    Dlh13,
    Dph,
    HiemstraLm,
    Ifb2,
    InExpC2,
    Inl2,
    JsKls,
    Lgd,
    Pl2,
    TfIdf,
    XsqraM,
}

impl ModelId {
    /// All models, sorted by name (case-insensitively).
    pub const ALL: [ModelId; 17] = [
        ModelId::Bb2,
        ModelId::Bm25,
        ModelId::Dfi0,
        ModelId::DfrBm25,
        ModelId::Dfree,
        ModelId::Dlh,
        ModelId::Dlh13,
        ModelId::Dph,
        ModelId::HiemstraLm,
        ModelId::Ifb2,
        ModelId::InExpC2,
        ModelId::Inl2,
        ModelId::JsKls,
        ModelId::Lgd,
        ModelId::Pl2,
        ModelId::TfIdf,
        ModelId::XsqraM,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Bb2 => "BB2",
            ModelId::Bm25 => "BM25",
            ModelId::Dfi0 => "DFI0",
            ModelId::DfrBm25 => "DFR_BM25",
            ModelId::Dfree => "DFRee",
            ModelId::Dlh => "DLH",
            ModelId::Dlh13 => "DLH13",
            ModelId::Dph => "DPH",
            ModelId::HiemstraLm => "Hiemstra_LM",
            ModelId::Ifb2 => "IFB2",
            ModelId::InExpC2 => "In_expC2",
            ModelId::Inl2 => "InL2",
            ModelId::JsKls => "Js_KLs",
            ModelId::Lgd => "LGD",
            ModelId::Pl2 => "PL2",
            ModelId::TfIdf => "TF_IDF",
            ModelId::XsqraM => "XSqrA_M",
        }
    }

    /// True for models whose score ignores every [`ModelParams`] field.
    pub fn is_parameter_free(self) -> bool {
        matches!(
            self,
            ModelId::Dph
                | ModelId::Dlh
                | ModelId::Dlh13
                | ModelId::Dfree
                | ModelId::Dfi0
                | ModelId::JsKls
                | ModelId::XsqraM
        )
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownModel {
                name: s.to_string(),
                valid: valid_model_names(),
            })
    }
}

fn valid_model_names() -> String {
    ModelId::ALL
        .iter()
        .map(|m| m.name())
        .collect::<Vec<_>>()
        .join(", ")
}

/// The seventeen model identifiers, sorted.
pub fn list_models() -> &'static [ModelId] {
    &ModelId::ALL
}

/// Tunable constants. The defaults are the conventional values:
/// c = 1.0 for DFR Normalization 2, k1 = 1.2 / b = 0.75 / k3 = 8.0 for
/// the BM25 family, and a 0.15 mixing weight for the Hiemstra language
/// model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub c: f64,
    pub k1: f64,
    pub b: f64,
    pub k3: f64,
    pub lambda: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            k1: 1.2,
            b: 0.75,
            k3: 8.0,
            lambda: 0.15,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidParam(format!(
                "c must be > 0, got {}",
                self.c
            )));
        }
        if !(self.k1.is_finite() && self.k1 > 0.0) {
            return Err(Error::InvalidParam(format!(
                "k1 must be > 0, got {}",
                self.k1
            )));
        }
        if !(self.b.is_finite() && (0.0..=1.0).contains(&self.b)) {
            return Err(Error::InvalidParam(format!(
                "b must be in [0,1], got {}",
                self.b
            )));
        }
        if !(self.k3.is_finite() && self.k3 >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "k3 must be >= 0, got {}",
                self.k3
            )));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidParam(format!(
                "lambda must be in (0,1), got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Applies a `key=value` style override. Accepted keys: `c`, `k1`,
    /// `b`, `k3`, `lambda` (alias `lambda_H`).
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "c" => self.c = value,
            "k1" => self.k1 = value,
            "b" => self.b = value,
            "k3" => self.k3 = value,
            "lambda" | "lambda_H" => self.lambda = value,
            other => {
                return Err(Error::InvalidParam(format!(
                    "unknown parameter {other:?} (expected c, k1, b, k3, or lambda)"
                )))
            }
        }
        self.validate()
    }
}

/// Statistics consumed by a single (term, document) scoring call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelInputs {
    /// Within-document term frequency (>= 1).
    pub tf: u32,
    /// Query term frequency (>= 1).
    pub qtf: u32,
    /// Document length in tokens (>= 1; a matching document holds at
    /// least one token).
    pub doc_len: u64,
    /// Average document length over the collection.
    pub avg_doc_len: f64,
    /// Number of documents in the collection.
    pub num_docs: u64,
    /// Total tokens in the collection.
    pub total_tokens: u64,
    /// Document frequency of the term.
    pub df: u64,
    /// Collection frequency of the term.
    pub cf: u64,
}

impl ModelInputs {
    pub fn validate(&self, model: ModelId) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidInputs(msg));
        if self.tf < 1 {
            return fail(format!("tf must be >= 1, got {}", self.tf));
        }
        if self.qtf < 1 {
            return fail(format!("qtf must be >= 1, got {}", self.qtf));
        }
        if self.doc_len < 1 {
            return fail(format!("doc_len must be >= 1, got {}", self.doc_len));
        }
        if u64::from(self.tf) > self.doc_len {
            return fail(format!("tf {} exceeds doc_len {}", self.tf, self.doc_len));
        }
        if !(self.avg_doc_len.is_finite() && self.avg_doc_len > 0.0) {
            return fail(format!("avg_doc_len must be > 0, got {}", self.avg_doc_len));
        }
        if self.num_docs < 1 {
            return fail("num_docs must be >= 1".to_string());
        }
        if self.df < 1 || self.df > self.num_docs {
            return fail(format!(
                "df must be in [1, {}], got {}",
                self.num_docs, self.df
            ));
        }
        if self.cf < u64::from(self.tf) {
            return fail(format!("cf {} is below tf {}", self.cf, self.tf));
        }
        if self.total_tokens < self.cf {
            return fail(format!(
                "total_tokens {} is below cf {}",
                self.total_tokens, self.cf
            ));
        }
        if model == ModelId::Bb2 && self.num_docs < 2 {
            return fail("BB2 requires a collection of at least 2 documents".to_string());
        }
        Ok(())
    }
}

/// DFR Normalization 2: `tfn = tf * log2(1 + c * avg_l / l)`.
pub fn norm2(tf: f64, doc_len: f64, avg_doc_len: f64, c: f64) -> f64 {
    tf * (1.0 + c * avg_doc_len / doc_len).log2()
}

/// Scores one (term, document) pair under the given model. Inputs are
/// validated against the [`ModelInputs`] contract; valid inputs always
/// produce a finite score.
pub fn score_term(model: ModelId, input: &ModelInputs, params: &ModelParams) -> Result<f64> {
    input.validate(model)?;
    params.validate()?;

    let tf = f64::from(input.tf);
    let qtf = f64::from(input.qtf);
    let l = input.doc_len as f64;
    let avg_l = input.avg_doc_len;
    let n = input.num_docs as f64;
    let tc = input.total_tokens as f64;
    let df = input.df as f64;
    let cf = input.cf as f64;
    let p = *params;

    let score = match model {
        ModelId::TfIdf => {
            let rtf = p.k1 * tf / (tf + p.k1 * ((1.0 - p.b) + p.b * l / avg_l));
            qtf * rtf * (1.0 + n / df).log2()
        }
        ModelId::Bm25 => {
            // Negative idf for df > N/2 is kept as-is.
            let k = p.k1 * ((1.0 - p.b) + p.b * l / avg_l);
            let qtf_factor = (p.k3 + 1.0) * qtf / (p.k3 + qtf);
            qtf_factor * ((p.k1 + 1.0) * tf / (k + tf)) * ((n - df + 0.5) / (df + 0.5)).log2()
        }
        ModelId::DfrBm25 => {
            let k = p.k1 * ((1.0 - p.b) + p.b * l / avg_l);
            let qtf_factor = (p.k3 + 1.0) * qtf / (p.k3 + qtf);
            qtf_factor * ((p.k1 + 1.0) * tf / (k + tf)) * ((n + 1.0) / (df + 0.5)).log2()
        }
        ModelId::Inl2 => {
            let tfn = norm2(tf, l, avg_l, p.c);
            qtf * (1.0 / (tfn + 1.0)) * tfn * ((n + 1.0) / (df + 0.5)).log2()
        }
        ModelId::Ifb2 => {
            let tfn = norm2(tf, l, avg_l, p.c);
            qtf * ((cf + 1.0) / (df * (tfn + 1.0))) * tfn * ((n + 1.0) / (cf + 0.5)).log2()
        }
        ModelId::InExpC2 => {
            let tfn = norm2(tf, l, avg_l, p.c);
            let n_exp = n * (1.0 - ((n - 1.0) / n).powf(cf));
            qtf * ((cf + 1.0) / (df * (tfn + 1.0))) * tfn * ((n + 1.0) / (n_exp + 0.5)).log2()
        }
        ModelId::Bb2 => {
            let tfn = norm2(tf, l, avg_l, p.c);
            let info = -(n - 1.0).log2() - LOG2_E + stirling(n + cf - 1.0, n + cf - tfn - 2.0)
                - stirling(cf, cf - tfn);
            qtf * ((cf + 1.0) / (df * (tfn + 1.0))) * info
        }
        ModelId::Pl2 => {
            let tfn = norm2(tf, l, avg_l, p.c);
            let lambda_p = cf / n;
            qtf * (1.0 / (tfn + 1.0))
                * (tfn * (tfn / lambda_p).log2()
                    + (lambda_p - tfn) * LOG2_E
                    + 0.5 * (2.0 * PI * tfn).log2())
        }
        ModelId::Dlh => {
            let f = (tf / l).min(1.0 - 1e-9);
            qtf / (tf + 0.5)
                * (tf * ((tf * avg_l / l) * (n / cf)).log2()
                    + (l - tf) * (1.0 - f).log2()
                    + 0.5 * (2.0 * PI * tf * (1.0 - f)).log2())
        }
        ModelId::Dlh13 => {
            let f = (tf / l).min(1.0 - 1e-9);
            qtf / (tf + 0.5)
                * (tf * ((tf * avg_l / l) * (n / cf)).log2()
                    + 0.5 * (2.0 * PI * tf * (1.0 - f)).log2())
        }
        ModelId::Dph => {
            let f = (tf / l).min(1.0 - 1e-9);
            qtf * ((1.0 - f) * (1.0 - f) / (tf + 1.0))
                * (tf * ((tf * avg_l / l) * (n / cf)).log2()
                    + 0.5 * (2.0 * PI * tf * (1.0 - f)).log2())
        }
        ModelId::Dfree => {
            let prior = tf / l;
            let posterior = (tf + 1.0) / (l + 1.0);
            let inv_pc = tc / cf;
            qtf * (tf * (posterior / prior).log2())
                * (tf * (-(prior * inv_pc).log2())
                    + (tf + 1.0) * (posterior * inv_pc).log2()
                    + 0.5 * (posterior / prior).log2())
        }
        ModelId::Dfi0 => {
            let expected = cf * l / tc;
            if tf <= expected {
                0.0
            } else {
                qtf * (1.0 + (tf - expected) / expected.sqrt()).log2()
            }
        }
        ModelId::HiemstraLm => {
            qtf * (1.0 + (p.lambda * tf * tc) / ((1.0 - p.lambda) * cf * l)).log2()
        }
        ModelId::Lgd => {
            let tfn = norm2(tf, l, avg_l, p.c);
            let lambda_l = df / n;
            qtf * ((lambda_l + tfn) / lambda_l).log2()
        }
        ModelId::JsKls => {
            let p_d = tf / l;
            let p_c = cf / tc;
            if p_d <= p_c {
                0.0
            } else {
                let mid = (p_d + p_c) / 2.0;
                qtf * tf * (p_d * (p_d / mid).log2() + p_c * (p_c / mid).log2())
            }
        }
        ModelId::XsqraM => {
            let p_d = tf / l;
            let p_c = cf / tc;
            if p_d <= p_c {
                0.0
            } else {
                qtf * l * (p_d - p_c) * (p_d - p_c) / p_c
            }
        }
    };

    debug_assert!(score.is_finite(), "{model}: non-finite score for {input:?}");
    Ok(score)
}

/// Stirling-style information content `(m + 0.5) * log2(n / m) +
/// (n - m) * log2(n)` with `m` clamped to at least 0.5.
fn stirling(n: f64, m: f64) -> f64 {
    let m = m.max(0.5);
    (m + 0.5) * (n / m).log2() + (n - m) * n.log2()
}
