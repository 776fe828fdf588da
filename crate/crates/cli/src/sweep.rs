//! The sweep command: every requested (model, field-mode) cell, run in
//! parallel over a shared read-only index, with deterministic output
//! assembly regardless of worker count or scheduling.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};

use gir_core::eval::{evaluate_run, ComparisonMatrix};
use gir_core::index::Index;
use gir_core::models::{ModelId, ModelParams};
use gir_core::search::run_topics;
use gir_core::text_analysis::{Analyzer, FieldMode};
use gir_core::trec_io::{Qrels, Topic};

pub struct SweepJob<'a> {
    pub index: &'a Index,
    pub analyzer: &'a Analyzer,
    pub topics: &'a [Topic],
    pub qrels: &'a Qrels,
    pub models: Vec<ModelId>,
    pub modes: Vec<FieldMode>,
    pub params: ModelParams,
    pub k: usize,
    pub workers: usize,
    pub out_dir: &'a Path,
}

pub struct SweepOutcome {
    pub matrix: ComparisonMatrix,
    /// (cell label, error message) for cells that failed.
    pub failures: Vec<(String, String)>,
}

enum CellResult {
    Map(f64),
    Failed(String),
}

pub fn run_sweep(job: &SweepJob) -> Result<SweepOutcome> {
    std::fs::create_dir_all(job.out_dir)
        .with_context(|| format!("creating {}", job.out_dir.display()))?;

    let cells: Vec<(ModelId, FieldMode)> = job
        .models
        .iter()
        .flat_map(|&m| job.modes.iter().map(move |&f| (m, f)))
        .collect();

    let results: Vec<Option<CellResult>> = {
        let slots = Mutex::new((0..cells.len()).map(|_| None).collect::<Vec<_>>());
        let next = AtomicUsize::new(0);
        let workers = job.workers.max(1).min(cells.len().max(1));
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= cells.len() {
                        break;
                    }
                    let outcome = run_cell(job, cells[i].0, cells[i].1);
                    slots.lock().unwrap()[i] = Some(outcome);
                });
            }
        });
        slots.into_inner().unwrap()
    };

    let mut matrix = ComparisonMatrix::new(&job.models, &job.modes);
    let mut failures = Vec::new();
    for ((model, mode), result) in cells.iter().zip(results) {
        match result.expect("cell not executed") {
            CellResult::Map(map) => matrix.set(*model, *mode, map),
            CellResult::Failed(msg) => failures.push((format!("{model}/{mode}"), msg)),
        }
    }
    Ok(SweepOutcome { matrix, failures })
}

fn run_cell(job: &SweepJob, model: ModelId, mode: FieldMode) -> CellResult {
    let tag = format!("{model}.{mode}");
    let run = match run_topics(
        job.index,
        model,
        &job.params,
        job.analyzer,
        job.topics,
        mode,
        job.k,
        &tag,
    ) {
        Ok(run) => run,
        Err(e) => return CellResult::Failed(e.to_string()),
    };
    let path = job.out_dir.join(format!("{tag}.run"));
    let bytes = match run.to_run_file() {
        Ok(b) => b,
        Err(e) => return CellResult::Failed(e.to_string()),
    };
    if let Err(e) = std::fs::write(&path, bytes) {
        return CellResult::Failed(format!("writing {}: {e}", path.display()));
    }
    match evaluate_run(&run, job.qrels) {
        Ok(report) => CellResult::Map(report.aggregates.map),
        Err(e) => CellResult::Failed(e.to_string()),
    }
}
