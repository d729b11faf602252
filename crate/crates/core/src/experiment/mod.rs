//! The comparative protocol: for every run one shared global split, then one
//! independently evolved ensemble per pruning method.
//!
//! Seeds: the split of run `r` uses `(master, r, SPLIT)`; the ensemble of
//! method `m` in run `r` uses `(master, r, m, EVOLVE)`, from which each slot
//! derives its own bootstrap and evolution streams. Methods therefore see the
//! same data within a run but never share random draws.

mod config;
pub mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::info;
use rayon::prelude::*;

pub use config::ExperimentConfig;
pub use output::{RunRecord, SummaryRow};

use crate::dataset::{self, Dataset};
use crate::ensemble::{Ensemble, PruneStrategy, RemovalEvent};
use crate::error::{Error, Result};
use crate::rng::{self, role};
use crate::stats::{self, MethodResults, PValueMatrix};

pub const GENERATIONS_FILE: &str = "generations.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const REMOVALS_FILE: &str = "removals.csv";

/// Result of one (run, method) job.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub run: usize,
    pub method: PruneStrategy,
    pub records: Vec<RunRecord>,
    pub removals: Vec<RemovalEvent>,
}

impl MethodRun {
    pub fn summary(&self) -> SummaryRow {
        let last = self.records.last().expect("at least one generation");
        let mean_alive = self.records.iter().map(|r| r.alive as f64).sum::<f64>() / self.records.len() as f64;
        SummaryRow {
            run: self.run,
            method: self.method.name().to_string(),
            final_test_rmse: last.test_rmse,
            final_alive: last.alive,
            mean_alive,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub runs: Vec<MethodRun>,
    pub generations_path: PathBuf,
    pub summary_path: PathBuf,
    pub removals_path: PathBuf,
}

impl ExperimentOutput {
    pub fn summaries(&self) -> Vec<SummaryRow> {
        self.runs.iter().map(MethodRun::summary).collect()
    }
}

pub fn split_seed(master: u64, run: usize) -> u64 {
    rng::derive_seed(master, &[run as u64, role::SPLIT])
}

pub fn ensemble_seed(master: u64, run: usize, method: PruneStrategy) -> u64 {
    rng::derive_seed(master, &[run as u64, method.id(), role::EVOLVE])
}

/// Global train/test split of run `run`, shared by every method.
pub fn split_for_run(data: &Dataset, cfg: &ExperimentConfig, run: usize) -> Result<(Dataset, Dataset)> {
    let mut stream = rng::stream(split_seed(cfg.master_seed, run), &[]);
    dataset::split_with(data, cfg.train_fraction, &mut stream)
}

/// Evolves one ensemble for `generations` generations.
pub fn run_method(
    cfg: &ExperimentConfig,
    run: usize,
    method: PruneStrategy,
    global: Arc<Dataset>,
    test: Arc<Dataset>,
) -> Result<MethodRun> {
    let ens_cfg = crate::ensemble::EnsembleConfig { strategy: method, ..cfg.ensemble };
    let mut ens = Ensemble::new(ens_cfg, global, test, ensemble_seed(cfg.master_seed, run, method))?;
    let mut records = Vec::with_capacity(cfg.generations);
    for _ in 0..cfg.generations {
        let g = ens.run_generation();
        records.push(RunRecord {
            run,
            method: method.name().to_string(),
            generation: g.generation,
            alive: g.alive,
            train_rmse: g.train_rmse,
            test_rmse: g.test_rmse,
        });
    }
    info!(
        "run {run} {method}: test rmse {:.4}, alive {}",
        records.last().map(|r| r.test_rmse).unwrap_or(f64::NAN),
        ens.alive_count()
    );
    Ok(MethodRun { run, method, records, removals: ens.events().to_vec() })
}

/// Runs every configured (run, method) pair on an already loaded dataset.
/// Output is ordered by run, then by method as configured.
pub fn run_on(cfg: &ExperimentConfig, data: &Dataset) -> Result<Vec<MethodRun>> {
    cfg.validate()?;
    let splits: Vec<(Arc<Dataset>, Arc<Dataset>)> = (1..=cfg.runs)
        .map(|r| split_for_run(data, cfg, r).map(|(a, b)| (Arc::new(a), Arc::new(b))))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, PruneStrategy)> =
        (1..=cfg.runs).flat_map(|r| cfg.methods.iter().map(move |&m| (r, m))).collect();
    let work = || {
        jobs.par_iter()
            .map(|&(r, m)| {
                let (global, test) = &splits[r - 1];
                run_method(cfg, r, m, Arc::clone(global), Arc::clone(test))
            })
            .collect::<Result<Vec<_>>>()
    };
    if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(work)
    } else {
        work()
    }
}

/// Loads the dataset, runs the protocol and writes the three result files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let data = dataset::load_csv(&cfg.dataset, cfg.has_header)?;
    info!(
        "{}: {} rows, {} features",
        cfg.dataset.display(),
        data.n_rows(),
        data.n_features()
    );
    let runs = run_on(cfg, &data)?;
    write_outputs(&cfg.out_dir, runs)
}

pub fn write_outputs(out_dir: &Path, runs: Vec<MethodRun>) -> Result<ExperimentOutput> {
    let records: Vec<RunRecord> = runs.iter().flat_map(|r| r.records.iter().cloned()).collect();
    let summaries: Vec<SummaryRow> = runs.iter().map(MethodRun::summary).collect();
    let mut removals = String::from(output::REMOVALS_HEADER);
    removals.push('\n');
    for r in &runs {
        for e in &r.removals {
            let score = e.score.map(|s| s.to_string()).unwrap_or_default();
            removals.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.run, r.method, e.generation, e.removed, e.survivor, e.weight, score
            ));
        }
    }
    let generations_path = out_dir.join(GENERATIONS_FILE);
    let summary_path = out_dir.join(SUMMARY_FILE);
    let removals_path = out_dir.join(REMOVALS_FILE);
    output::write_atomic(&generations_path, &output::render_generations(&records))?;
    output::write_atomic(&summary_path, &output::render_summary(&summaries))?;
    output::write_atomic(&removals_path, &removals)?;
    Ok(ExperimentOutput { runs, generations_path, summary_path, removals_path })
}

fn method_order(names: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut seen: Vec<String> = Vec::new();
    for n in names {
        if !seen.contains(&n) {
            seen.push(n);
        }
    }
    let rank = |n: &String| {
        n.parse::<PruneStrategy>()
            .map(|s| s.id() as usize)
            .unwrap_or(PruneStrategy::ALL.len())
    };
    // stable: unknown names keep their order of appearance after the known ones
    seen.sort_by_key(rank);
    seen
}

/// Groups summary rows into per-method final test errors, ordered by run.
pub fn method_results(rows: &[SummaryRow]) -> Vec<MethodResults> {
    method_order(rows.iter().map(|r| r.method.clone()))
        .into_iter()
        .map(|method| {
            let mut runs: Vec<(usize, f64)> =
                rows.iter().filter(|r| r.method == method).map(|r| (r.run, r.final_test_rmse)).collect();
            runs.sort_by_key(|&(run, _)| run);
            MethodResults { method, values: runs.into_iter().map(|(_, v)| v).collect() }
        })
        .collect()
}

/// Reads summary files, computes the p-value matrix and writes it to `out`.
pub fn stats_command(summaries: &[PathBuf], out: &Path) -> Result<PValueMatrix> {
    let mut rows = Vec::new();
    for path in summaries {
        rows.extend(output::read_summary(path)?);
    }
    let matrix = stats::pvalue_matrix(&method_results(&rows))?;
    output::write_atomic(out, &output::render_matrix(&matrix))?;
    Ok(matrix)
}

/// Mean alive count over every generation of every run, per method.
pub fn summarize_size(records: &[RunRecord]) -> Vec<(String, f64)> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in records {
        let e = acc.entry(r.method.clone()).or_default();
        e.0 += r.alive as f64;
        e.1 += 1;
    }
    method_order(acc.keys().cloned())
        .into_iter()
        .map(|m| {
            let (sum, n) = acc[&m];
            (m, sum / n as f64)
        })
        .collect()
}
