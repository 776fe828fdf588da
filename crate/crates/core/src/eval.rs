//! trec_eval-style measures over runs and qrels.
//!
//! Conventions follow trec_eval: every topic's retrieved list is re-sorted
//! by (score descending, docno descending) before measurement — stored
//! ranks are advisory only; unjudged documents count as nonrelevant for
//! precision measures but are ignored entirely by bpref; topics without
//! relevant documents are excluded from every mean (signalled in the
//! report, not zeroed); GMAP floors per-topic AP at 1e-5.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::models::ModelId;
use crate::search::{RankedList, Run};
use crate::text_analysis::FieldMode;
use crate::trec_io::{canonical_cmp, Qrels, RunEntry};
use crate::{Error, Result};

/// Recall levels of the interpolated precision-recall curve.
pub const RECALL_LEVELS: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// Floor applied to per-topic AP inside the geometric mean.
pub const GMAP_FLOOR: f64 = 1e-5;

/// Per-topic measure set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopicMeasures {
    pub ap: f64,
    pub rprec: f64,
    pub bpref: f64,
    pub recip_rank: f64,
    pub p5: f64,
    pub iprec0: f64,
    pub curve: [f64; 11],
}

/// Aggregates over evaluated topics. All fields except `gmap` are
/// arithmetic means; `gmap` is the floored geometric mean of AP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregates {
    pub num_topics: usize,
    pub map: f64,
    pub gmap: f64,
    pub rprec: f64,
    pub bpref: f64,
    pub recip_rank: f64,
    pub p5: f64,
    pub iprec0: f64,
}

/// Full evaluation result for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub per_topic: BTreeMap<String, TopicMeasures>,
    pub aggregates: Aggregates,
    /// Mean interpolated precision at the 11 standard recall levels.
    pub curve: [f64; 11],
    /// Topics present in both run and qrels but with no relevant
    /// documents; excluded from every aggregate.
    pub skipped: Vec<String>,
}

/// A selectable measure, for report filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Map,
    Gmap,
    Rprec,
    Bpref,
    RecipRank,
    P5,
    Iprec0,
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::Map,
        Measure::Gmap,
        Measure::Rprec,
        Measure::Bpref,
        Measure::RecipRank,
        Measure::P5,
        Measure::Iprec0,
    ];

    /// trec_eval-compatible display name.
    pub fn display_name(self) -> &'static str {
        match self {
            Measure::Map => "map",
            Measure::Gmap => "gm_map",
            Measure::Rprec => "Rprec",
            Measure::Bpref => "bpref",
            Measure::RecipRank => "recip_rank",
            Measure::P5 => "P_5",
            Measure::Iprec0 => "iprec_at_0.00",
        }
    }

    pub fn parse_list(list: &str) -> Result<Vec<Measure>> {
        if list == "all" {
            return Ok(Measure::ALL.to_vec());
        }
        list.split(',')
            .map(|tok| match tok.trim() {
                "map" => Ok(Measure::Map),
                "gmap" | "gm_map" => Ok(Measure::Gmap),
                "rprec" | "Rprec" => Ok(Measure::Rprec),
                "bpref" => Ok(Measure::Bpref),
                "recip_rank" => Ok(Measure::RecipRank),
                "p5" | "P_5" => Ok(Measure::P5),
                "iprec0" | "iprec_at_0.0" | "iprec_at_0.00" => Ok(Measure::Iprec0),
                other => Err(Error::InvalidArg(format!("unknown measure {other:?}"))),
            })
            .collect()
    }
}

impl TopicMeasures {
    fn get(&self, m: Measure) -> f64 {
        match m {
            Measure::Map => self.ap,
            Measure::Gmap => self.ap,
            Measure::Rprec => self.rprec,
            Measure::Bpref => self.bpref,
            Measure::RecipRank => self.recip_rank,
            Measure::P5 => self.p5,
            Measure::Iprec0 => self.iprec0,
        }
    }
}

impl Aggregates {
    pub fn get(&self, m: Measure) -> f64 {
        match m {
            Measure::Map => self.map,
            Measure::Gmap => self.gmap,
            Measure::Rprec => self.rprec,
            Measure::Bpref => self.bpref,
            Measure::RecipRank => self.recip_rank,
            Measure::P5 => self.p5,
            Measure::Iprec0 => self.iprec0,
        }
    }
}

/// Canonically sorted docnos of one topic's retrieved list.
fn sorted_docnos(items: &[(String, f64)]) -> Vec<&str> {
    let mut pairs: Vec<(f64, &str)> = items.iter().map(|(d, s)| (*s, d.as_str())).collect();
    pairs.sort_by(canonical_cmp);
    pairs.into_iter().map(|(_, d)| d).collect()
}

/// All measures for one topic, or `None` when the topic has no relevant
/// documents and must be excluded from aggregation.
fn topic_measures(sorted: &[&str], judged: &BTreeMap<String, u32>) -> Option<TopicMeasures> {
    let r = judged.values().filter(|&&g| g > 0).count();
    if r == 0 {
        return None;
    }
    let nr = judged.values().filter(|&&g| g == 0).count();
    let bpref_denom = r.min(nr) as f64;

    let mut rel_so_far = 0usize;
    let mut nonrel_so_far = 0usize;
    let mut ap_sum = 0.0;
    let mut bpref_sum = 0.0;
    let mut first_rel_rank: Option<usize> = None;
    let mut rel_in_top5 = 0usize;
    let mut rel_in_top_r = 0usize;
    // (recall, precision) after each cutoff 1..=n.
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());

    for (i, docno) in sorted.iter().enumerate() {
        let rank = i + 1;
        match judged.get(*docno) {
            Some(&g) if g > 0 => {
                rel_so_far += 1;
                ap_sum += rel_so_far as f64 / rank as f64;
                first_rel_rank.get_or_insert(rank);
                if nr == 0 {
                    bpref_sum += 1.0;
                } else {
                    bpref_sum += (1.0 - nonrel_so_far as f64 / bpref_denom).max(0.0);
                }
                if rank <= 5 {
                    rel_in_top5 += 1;
                }
                if rank <= r {
                    rel_in_top_r += 1;
                }
            }
            Some(_) => nonrel_so_far += 1,
            None => {} // unjudged: nonrelevant for precision, invisible to bpref
        }
        points.push((
            rel_so_far as f64 / r as f64,
            rel_so_far as f64 / rank as f64,
        ));
    }

    // Interpolated precision: max precision at any cutoff with recall >= level.
    // Recall is non-decreasing over cutoffs, so the qualifying cutoffs for a
    // level form a suffix.
    let mut suffix_max = vec![0.0f64; points.len() + 1];
    for (i, &(_, precision)) in points.iter().enumerate().rev() {
        suffix_max[i] = suffix_max[i + 1].max(precision);
    }
    let mut curve = [0.0f64; 11];
    for (idx, &level) in RECALL_LEVELS.iter().enumerate() {
        let first = points.partition_point(|&(recall, _)| recall + 1e-12 < level);
        if first < points.len() {
            curve[idx] = suffix_max[first];
        }
    }

    Some(TopicMeasures {
        ap: ap_sum / r as f64,
        rprec: rel_in_top_r as f64 / r as f64,
        bpref: bpref_sum / r as f64,
        recip_rank: first_rel_rank.map_or(0.0, |rk| 1.0 / rk as f64),
        p5: rel_in_top5 as f64 / 5.0,
        iprec0: curve[0],
        curve,
    })
}

fn judged_for<'q>(qrels: &'q Qrels, num: &str) -> Option<&'q BTreeMap<String, u32>> {
    qrels.judgments(num)
}

/// Average precision for one ranked list; `None` when the topic has no
/// relevant documents.
pub fn average_precision(list: &RankedList, qrels: &Qrels) -> Option<f64> {
    let judged = judged_for(qrels, &list.num)?;
    topic_measures(&sorted_docnos(&list.items), judged).map(|m| m.ap)
}

/// R-precision: precision at cutoff R.
pub fn r_precision(list: &RankedList, qrels: &Qrels) -> Option<f64> {
    let judged = judged_for(qrels, &list.num)?;
    topic_measures(&sorted_docnos(&list.items), judged).map(|m| m.rprec)
}

/// Binary preference: how often retrieved relevant documents rank above
/// judged nonrelevant ones, ignoring unjudged documents.
pub fn bpref(list: &RankedList, qrels: &Qrels) -> Option<f64> {
    let judged = judged_for(qrels, &list.num)?;
    topic_measures(&sorted_docnos(&list.items), judged).map(|m| m.bpref)
}

/// Reciprocal rank of the first relevant document, 0 when none is
/// retrieved.
pub fn reciprocal_rank(list: &RankedList, qrels: &Qrels) -> f64 {
    let sorted = sorted_docnos(&list.items);
    for (i, docno) in sorted.iter().enumerate() {
        if qrels.is_relevant(&list.num, docno) {
            return 1.0 / (i + 1) as f64;
        }
    }
    0.0
}

/// Precision at cutoff k; the divisor is k even when fewer documents were
/// retrieved.
pub fn precision_at_k(list: &RankedList, qrels: &Qrels, k: usize) -> f64 {
    let sorted = sorted_docnos(&list.items);
    let hits = sorted
        .iter()
        .take(k)
        .filter(|d| qrels.is_relevant(&list.num, d))
        .count();
    hits as f64 / k as f64
}

/// The 11-point interpolated precision-recall curve for one topic.
pub fn interpolated_pr_curve(list: &RankedList, qrels: &Qrels) -> Option<[f64; 11]> {
    let judged = judged_for(qrels, &list.num)?;
    topic_measures(&sorted_docnos(&list.items), judged).map(|m| m.curve)
}

/// Floored geometric mean of per-topic average precision.
pub fn gmap(aps: &[f64]) -> Option<f64> {
    if aps.is_empty() {
        return None;
    }
    let mean_ln = aps.iter().map(|ap| ap.max(GMAP_FLOOR).ln()).sum::<f64>() / aps.len() as f64;
    Some(mean_ln.exp())
}

/// Mean average precision over the run's evaluable topics.
pub fn mean_average_precision(run: &Run, qrels: &Qrels) -> Result<f64> {
    Ok(evaluate_run(run, qrels)?.aggregates.map)
}

/// Evaluates a run produced by the search pipeline.
pub fn evaluate_run(run: &Run, qrels: &Qrels) -> Result<MetricReport> {
    let grouped: Vec<(String, Vec<(String, f64)>)> = run
        .lists
        .iter()
        .map(|l| (l.num.clone(), l.items.clone()))
        .collect();
    evaluate_grouped(grouped, qrels)
}

/// Evaluates parsed run-file entries.
pub fn evaluate_entries(entries: &[RunEntry], qrels: &Qrels) -> Result<MetricReport> {
    let mut grouped: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for e in entries {
        grouped
            .entry(e.num.clone())
            .or_default()
            .push((e.docno.clone(), e.score));
    }
    for (num, items) in &grouped {
        let mut docnos: Vec<&str> = items.iter().map(|(d, _)| d.as_str()).collect();
        docnos.sort_unstable();
        if docnos.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidRun(format!("duplicate docno in topic {num}")));
        }
    }
    evaluate_grouped(grouped.into_iter().collect(), qrels)
}

fn evaluate_grouped(
    grouped: Vec<(String, Vec<(String, f64)>)>,
    qrels: &Qrels,
) -> Result<MetricReport> {
    let run_topics: Vec<&str> = grouped.iter().map(|(n, _)| n.as_str()).collect();
    let shared = run_topics.iter().any(|n| qrels.judgments(n).is_some());
    if !shared {
        let mut run_only: Vec<String> = run_topics.iter().map(|s| s.to_string()).collect();
        run_only.sort();
        return Err(Error::DisjointTopics {
            run_only,
            qrels_only: qrels.topics().map(str::to_string).collect(),
        });
    }

    let mut per_topic = BTreeMap::new();
    let mut skipped = Vec::new();
    for (num, items) in &grouped {
        let Some(judged) = qrels.judgments(num) else {
            continue; // unjudged topic: excluded silently per convention
        };
        match topic_measures(&sorted_docnos(items), judged) {
            Some(m) => {
                per_topic.insert(num.clone(), m);
            }
            None => skipped.push(num.clone()),
        }
    }
    if per_topic.is_empty() {
        return Err(Error::NoEvaluableTopics);
    }

    let n = per_topic.len() as f64;
    let mean = |f: &dyn Fn(&TopicMeasures) -> f64| per_topic.values().map(f).sum::<f64>() / n;
    let aps: Vec<f64> = per_topic.values().map(|m| m.ap).collect();
    let mut curve = [0.0f64; 11];
    for m in per_topic.values() {
        for (acc, v) in curve.iter_mut().zip(m.curve.iter()) {
            *acc += v;
        }
    }
    for acc in curve.iter_mut() {
        *acc /= n;
    }

    let aggregates = Aggregates {
        num_topics: per_topic.len(),
        map: mean(&|m| m.ap),
        gmap: gmap(&aps).expect("at least one topic"),
        rprec: mean(&|m| m.rprec),
        bpref: mean(&|m| m.bpref),
        recip_rank: mean(&|m| m.recip_rank),
        p5: mean(&|m| m.p5),
        iprec0: mean(&|m| m.iprec0),
    };
    Ok(MetricReport {
        per_topic,
        aggregates,
        curve,
        skipped,
    })
}

impl MetricReport {
    /// Aligned table in trec_eval layout: `measure  topic  value`.
    pub fn render_table(&self, measures: &[Measure], per_topic: bool) -> String {
        let mut out = String::new();
        let mut row = |name: &str, topic: &str, value: String| {
            let _ = writeln!(out, "{name:<22}\t{topic}\t{value}");
        };
        if per_topic {
            for (num, m) in &self.per_topic {
                for &measure in measures {
                    if measure == Measure::Gmap {
                        continue; // only defined as an aggregate
                    }
                    row(
                        measure.display_name(),
                        num,
                        format!("{:.4}", m.get(measure)),
                    );
                }
            }
        }
        row("num_q", "all", self.aggregates.num_topics.to_string());
        for &measure in measures {
            row(
                measure.display_name(),
                "all",
                format!("{:.4}", self.aggregates.get(measure)),
            );
        }
        out
    }

    /// TSV with one `measure\ttopic\tvalue` row per (topic, measure) and
    /// aggregate rows keyed `all`.
    pub fn render_tsv(&self) -> String {
        self.render_table(&Measure::ALL, true)
    }

    /// Two-column TSV of the aggregate 11-point curve (recall, precision).
    pub fn curve_tsv(&self) -> String {
        let mut out = String::new();
        for (level, value) in RECALL_LEVELS.iter().zip(self.curve.iter()) {
            let _ = writeln!(out, "{level:.1}\t{value:.4}");
        }
        out
    }
}

/// MAP values over a (model, field-mode) grid, for side-by-side rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonMatrix {
    pub modes: Vec<FieldMode>,
    /// One row per model name; cells follow `modes` order. `None` marks a
    /// cell that could not be evaluated.
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

impl ComparisonMatrix {
    pub fn new(models: &[ModelId], modes: &[FieldMode]) -> Self {
        Self {
            modes: modes.to_vec(),
            rows: models
                .iter()
                .map(|m| (m.name().to_string(), vec![None; modes.len()]))
                .collect(),
        }
    }

    pub fn set(&mut self, model: ModelId, mode: FieldMode, value: f64) {
        let col = self
            .modes
            .iter()
            .position(|&m| m == mode)
            .expect("mode not in matrix");
        let row = self
            .rows
            .iter_mut()
            .find(|(name, _)| name == model.name())
            .expect("model not in matrix");
        row.1[col] = Some(value);
    }

    pub fn get(&self, model: ModelId, mode: FieldMode) -> Option<f64> {
        let col = self.modes.iter().position(|&m| m == mode)?;
        self.rows
            .iter()
            .find(|(name, _)| name == model.name())
            .and_then(|(_, cells)| cells[col])
    }

    /// Aligned text table; absent cells render as `-`.
    pub fn render_text(&self) -> String {
        let name_width = self
            .rows
            .iter()
            .map(|(n, _)| n.len())
            .chain(std::iter::once("model".len()))
            .max()
            .unwrap_or(5);
        let mut out = String::new();
        let _ = write!(out, "{:<name_width$}", "model");
        for mode in &self.modes {
            let _ = write!(out, "  {:>6}", mode.name());
        }
        out.push('\n');
        for (name, cells) in &self.rows {
            let _ = write!(out, "{name:<name_width$}");
            for cell in cells {
                match cell {
                    Some(v) => {
                        let _ = write!(out, "  {v:>6.4}");
                    }
                    None => {
                        let _ = write!(out, "  {:>6}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    /// Machine-readable TSV with a header row.
    pub fn render_tsv(&self) -> String {
        let mut out = String::from("model");
        for mode in &self.modes {
            let _ = write!(out, "\t{}", mode.name());
        }
        out.push('\n');
        for (name, cells) in &self.rows {
            let _ = write!(out, "{name}");
            for cell in cells {
                match cell {
                    Some(v) => {
                        let _ = write!(out, "\t{v:.4}");
                    }
                    None => out.push_str("\t-"),
                }
            }
            out.push('\n');
        }
        out
    }
}
