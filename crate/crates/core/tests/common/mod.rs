#![allow(dead_code)]

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use gpens::dataset::{self, Dataset};
use gpens::ensemble::{BestSnapshot, Engine, SlotState};

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(name: &str) -> PathBuf {
    repo_root().join("data").join(format!("{name}.csv"))
}

pub fn config(name: &str) -> PathBuf {
    repo_root().join("configs").join(format!("{name}.conf"))
}

pub fn load(name: &str) -> Dataset {
    dataset::load_csv(fixture(name), true).unwrap()
}

/// 70/30 split of a fixture.
pub fn split(name: &str, seed: u64) -> (Arc<Dataset>, Arc<Dataset>) {
    let spec = dataset::SplitSpec::new(0.7, seed).unwrap();
    let (a, b) = dataset::split(&load(name), spec).unwrap();
    (Arc::new(a), Arc::new(b))
}

/// Small dataset with a smooth target in two inputs.
pub fn toy(rows: usize) -> Dataset {
    let rows_v: Vec<Vec<f64>> = (0..rows).map(|i| vec![i as f64 / rows as f64, ((i * 7) % 11) as f64]).collect();
    let t = rows_v.iter().map(|r| r[0] * r[0] + 0.3 * r[1]).collect();
    Dataset::from_rows(&rows_v, t).unwrap()
}

/// Slot whose best has the given global semantics and global RMSE.
pub fn slot(global: Vec<f64>, global_rmse: f64) -> SlotState {
    SlotState {
        engine: Engine::Stgp,
        alive: true,
        weight: 1.0,
        best: BestSnapshot {
            index: 0,
            local_fitness: global_rmse,
            test: global.clone(),
            global,
            global_rmse,
            tree: None,
        },
    }
}

/// Prints one result line straight to the process stdout, bypassing the
/// test harness capture, then fails the test if `ok` is false.
pub fn report(id: u32, name: &str, ok: bool, detail: &str) {
    let line = format!(
        "acceptance {:02} {:<34} {}  {}\n",
        id,
        name,
        if ok { "PASS" } else { "FAIL" },
        detail
    );
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}
