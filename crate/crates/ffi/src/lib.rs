//! C ABI over the `gpens` library.
//!
//! Datasets and ensembles are exposed as opaque heap handles that the caller
//! frees with the matching `*_free` function. Every fallible call returns a
//! [`GpensStatus`]; on failure a message is kept per thread and can be read
//! with [`gpens_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::slice;
use std::sync::Arc;

use gpens::ensemble::{Ensemble, EnsembleConfig, PruneStrategy};
use gpens::experiment::{self, ExperimentConfig};
use gpens::gsgp::View;
use gpens::similarity::{self, SimilarityConfig};
use gpens::stgp::GpParams;
use gpens::{dataset, stats, Dataset, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpensStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    DataError = 4,
    Panic = 5,
}

/// Pruning strategy selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpensStrategy {
    Standard = 0,
    Random = 1,
    Half = 2,
    Correlation = 3,
    ProbCorrelation = 4,
    Entropy = 5,
    ProbEntropy = 6,
}

impl From<GpensStrategy> for PruneStrategy {
    fn from(s: GpensStrategy) -> Self {
        PruneStrategy::ALL[s as usize]
    }
}

/// Which input set an ensemble prediction refers to.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpensView {
    GlobalTrain = 0,
    Test = 1,
}

/// Ensemble parameters; start from [`gpens_ensemble_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GpensEnsembleParams {
    pub stgp_count: usize,
    pub gsgp_count: usize,
    pub population_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub tournament_size: usize,
    pub init_max_depth: usize,
    pub mutation_step: f64,
    pub strategy: GpensStrategy,
    pub correlation_threshold: f64,
    pub entropy_threshold: f64,
    pub random_removal_prob: f64,
}

impl From<GpensEnsembleParams> for EnsembleConfig {
    fn from(p: GpensEnsembleParams) -> Self {
        EnsembleConfig {
            stgp_count: p.stgp_count,
            gsgp_count: p.gsgp_count,
            gp: GpParams {
                population_size: p.population_size,
                crossover_prob: p.crossover_prob,
                mutation_prob: p.mutation_prob,
                tournament_size: p.tournament_size,
                init_max_depth: p.init_max_depth,
            },
            mutation_step: p.mutation_step,
            strategy: p.strategy.into(),
            similarity: SimilarityConfig {
                correlation_threshold: p.correlation_threshold,
                entropy_threshold: p.entropy_threshold,
            },
            random_removal_prob: p.random_removal_prob,
            prune_passes: 1,
        }
    }
}

/// Ensemble state after one generation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GpensGenerationRecord {
    pub generation: usize,
    pub alive: usize,
    pub train_rmse: f64,
    pub test_rmse: f64,
}

/// Opaque dataset handle.
pub struct GpensDataset(Arc<Dataset>);

/// Opaque ensemble handle.
pub struct GpensEnsemble(Ensemble);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> GpensStatus {
    match err.exit_code() {
        2 => GpensStatus::ConfigError,
        _ => GpensStatus::DataError,
    }
}

fn fail(status: GpensStatus, msg: impl Into<String>) -> GpensStatus {
    set_error(msg);
    status
}

fn from_error(err: Error) -> GpensStatus {
    let status = status_of(&err);
    fail(status, err.to_string())
}

/// Runs `f`, turning panics into [`GpensStatus::Panic`].
fn guarded(f: impl FnOnce() -> GpensStatus) -> GpensStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(GpensStatus::Panic, msg)
        }
    }
}

unsafe fn path_arg(p: *const c_char) -> Option<PathBuf> {
    if p.is_null() {
        return None;
    }
    CStr::from_ptr(p).to_str().ok().map(PathBuf::from)
}

unsafe fn vec_arg<'a>(p: *const f64, n: usize) -> Option<&'a [f64]> {
    if p.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(p, n))
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gpens_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gpens_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Loads a CSV file whose last column is the target.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gpens_dataset_load_csv(
    path: *const c_char,
    has_header: bool,
    out: *mut *mut GpensDataset,
) -> GpensStatus {
    guarded(|| {
        if out.is_null() {
            return fail(GpensStatus::NullPointer, "out is NULL");
        }
        let Some(path) = path_arg(path) else {
            return fail(GpensStatus::InvalidArgument, "path is NULL or not UTF-8");
        };
        match dataset::load_csv(path, has_header) {
            Ok(ds) => {
                *out = Box::into_raw(Box::new(GpensDataset(Arc::new(ds))));
                GpensStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Builds a dataset from a row-major `rows x cols` feature matrix and `rows` targets.
///
/// # Safety
/// `features` must hold `rows * cols` values, `targets` `rows` values, and
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gpens_dataset_from_rows(
    features: *const f64,
    rows: usize,
    cols: usize,
    targets: *const f64,
    out: *mut *mut GpensDataset,
) -> GpensStatus {
    guarded(|| {
        if out.is_null() || features.is_null() || targets.is_null() {
            return fail(GpensStatus::NullPointer, "NULL argument");
        }
        let flat = slice::from_raw_parts(features, rows * cols);
        let rows_v: Vec<Vec<f64>> = if cols == 0 { Vec::new() } else { flat.chunks(cols).map(<[f64]>::to_vec).collect() };
        let t = slice::from_raw_parts(targets, rows).to_vec();
        match Dataset::from_rows(&rows_v, t) {
            Ok(ds) => {
                *out = Box::into_raw(Box::new(GpensDataset(Arc::new(ds))));
                GpensStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `ds` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gpens_dataset_rows(ds: *const GpensDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_rows())
}

/// # Safety
/// `ds` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gpens_dataset_features(ds: *const GpensDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_features())
}

/// Shuffled train/test split with round-half-up train size.
///
/// # Safety
/// `ds` must be a live handle; `train` and `test` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gpens_dataset_split(
    ds: *const GpensDataset,
    train_fraction: f64,
    seed: u64,
    train: *mut *mut GpensDataset,
    test: *mut *mut GpensDataset,
) -> GpensStatus {
    guarded(|| {
        let (Some(ds), false, false) = (ds.as_ref(), train.is_null(), test.is_null()) else {
            return fail(GpensStatus::NullPointer, "NULL argument");
        };
        let spec = match dataset::SplitSpec::new(train_fraction, seed) {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        match dataset::split(&ds.0, spec) {
            Ok((a, b)) => {
                *train = Box::into_raw(Box::new(GpensDataset(Arc::new(a))));
                *test = Box::into_raw(Box::new(GpensDataset(Arc::new(b))));
                GpensStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `ds` must be a handle from this library, not yet freed, or NULL.
#[no_mangle]
pub unsafe extern "C" fn gpens_dataset_free(ds: *mut GpensDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Pearson correlation with the degenerate cases made total.
///
/// # Safety
/// `x` and `y` must hold `n` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gpens_pearson(x: *const f64, y: *const f64, n: usize, out: *mut f64) -> GpensStatus {
    guarded(|| {
        let (Some(x), Some(y), false) = (vec_arg(x, n), vec_arg(y, n), out.is_null()) else {
            return fail(GpensStatus::NullPointer, "NULL argument");
        };
        if n < 2 {
            return fail(GpensStatus::InvalidArgument, "need at least two values");
        }
        *out = similarity::pearson(x, y);
        GpensStatus::Ok
    })
}

/// Normalized variation of information over `floor(sqrt(n))` equal-width bins.
///
/// # Safety
/// `x` and `y` must hold `n` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gpens_entropy_distance(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> GpensStatus {
    guarded(|| {
        let (Some(x), Some(y), false) = (vec_arg(x, n), vec_arg(y, n), out.is_null()) else {
            return fail(GpensStatus::NullPointer, "NULL argument");
        };
        if n == 0 || !x.iter().chain(y).all(|v| v.is_finite()) {
            return fail(GpensStatus::InvalidArgument, "need finite, non-empty vectors");
        }
        *out = similarity::entropy_distance(x, y);
        GpensStatus::Ok
    })
}

/// Bin labels of `x` as used by the entropy criterion.
///
/// # Safety
/// `x` must hold `n` values and `labels` room for `n` values.
#[no_mangle]
pub unsafe extern "C" fn gpens_discretize(x: *const f64, n: usize, labels: *mut usize) -> GpensStatus {
    guarded(|| {
        let (Some(x), false) = (vec_arg(x, n), labels.is_null()) else {
            return fail(GpensStatus::NullPointer, "NULL argument");
        };
        if n == 0 || !x.iter().all(|v| v.is_finite()) {
            return fail(GpensStatus::InvalidArgument, "need finite, non-empty vector");
        }
        let out = slice::from_raw_parts_mut(labels, n);
        out.copy_from_slice(&similarity::discretize(x));
        GpensStatus::Ok
    })
}

/// One-tailed Mann-Whitney U test of "a is lower than b".
///
/// # Safety
/// `a` must hold `na` values, `b` `nb` values; `u` and `p` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gpens_mann_whitney(
    a: *const f64,
    na: usize,
    b: *const f64,
    nb: usize,
    u: *mut f64,
    p: *mut f64,
) -> GpensStatus {
    guarded(|| {
        let (Some(a), Some(b), false, false) = (vec_arg(a, na), vec_arg(b, nb), u.is_null(), p.is_null()) else {
            return fail(GpensStatus::NullPointer, "NULL argument");
        };
        if na == 0 || nb == 0 {
            return fail(GpensStatus::InvalidArgument, "empty sample");
        }
        let r = stats::mann_whitney_u(a, b);
        *u = r.u;
        *p = r.p;
        GpensStatus::Ok
    })
}

/// Protocol defaults: 10 + 10 populations of 200, standard strategy.
#[no_mangle]
pub extern "C" fn gpens_ensemble_params_default() -> GpensEnsembleParams {
    let c = EnsembleConfig::default();
    GpensEnsembleParams {
        stgp_count: c.stgp_count,
        gsgp_count: c.gsgp_count,
        population_size: c.gp.population_size,
        crossover_prob: c.gp.crossover_prob,
        mutation_prob: c.gp.mutation_prob,
        tournament_size: c.gp.tournament_size,
        init_max_depth: c.gp.init_max_depth,
        mutation_step: c.mutation_step,
        strategy: GpensStrategy::Standard,
        correlation_threshold: c.similarity.correlation_threshold,
        entropy_threshold: c.similarity.entropy_threshold,
        random_removal_prob: c.random_removal_prob,
    }
}

/// Creates and initializes an ensemble on the given global training and test sets.
///
/// # Safety
/// `train` and `test` must be live handles; `params` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gpens_ensemble_new(
    train: *const GpensDataset,
    test: *const GpensDataset,
    params: *const GpensEnsembleParams,
    seed: u64,
    out: *mut *mut GpensEnsemble,
) -> GpensStatus {
    guarded(|| {
        let (Some(train), Some(test), Some(params), false) = (train.as_ref(), test.as_ref(), params.as_ref(), out.is_null())
        else {
            return fail(GpensStatus::NullPointer, "NULL argument");
        };
        match Ensemble::new((*params).into(), Arc::clone(&train.0), Arc::clone(&test.0), seed) {
            Ok(e) => {
                *out = Box::into_raw(Box::new(GpensEnsemble(e)));
                GpensStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Steps all alive populations, prunes, and reports the new state.
///
/// # Safety
/// `ens` must be a live handle; `record` valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn gpens_ensemble_run_generation(
    ens: *mut GpensEnsemble,
    record: *mut GpensGenerationRecord,
) -> GpensStatus {
    guarded(|| {
        let Some(ens) = ens.as_mut() else {
            return fail(GpensStatus::NullPointer, "ensemble is NULL");
        };
        let r = ens.0.run_generation();
        if let Some(out) = record.as_mut() {
            *out = GpensGenerationRecord {
                generation: r.generation,
                alive: r.alive,
                train_rmse: r.train_rmse,
                test_rmse: r.test_rmse,
            };
        }
        GpensStatus::Ok
    })
}

/// # Safety
/// `ens` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gpens_ensemble_alive(ens: *const GpensEnsemble) -> usize {
    ens.as_ref().map_or(0, |e| e.0.alive_count())
}

/// Sum of the weights of alive slots; equals the initial slot count.
///
/// # Safety
/// `ens` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gpens_ensemble_weight_sum(ens: *const GpensEnsemble) -> f64 {
    ens.as_ref().map_or(0.0, |e| e.0.weight_sum())
}

/// Copies the weighted ensemble prediction into `out`, which must hold
/// `len` values; `len` must equal the row count of the chosen set.
///
/// # Safety
/// `ens` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn gpens_ensemble_predict(
    ens: *const GpensEnsemble,
    view: GpensView,
    out: *mut f64,
    len: usize,
) -> GpensStatus {
    guarded(|| {
        let (Some(ens), false) = (ens.as_ref(), out.is_null()) else {
            return fail(GpensStatus::NullPointer, "NULL argument");
        };
        let v = match view {
            GpensView::GlobalTrain => View::Global,
            GpensView::Test => View::Test,
        };
        let pred = ens.0.semantics(v);
        if pred.len() != len {
            return fail(GpensStatus::InvalidArgument, format!("buffer holds {len} values, prediction has {}", pred.len()));
        }
        slice::from_raw_parts_mut(out, len).copy_from_slice(&pred);
        GpensStatus::Ok
    })
}

/// # Safety
/// `ens` must be a handle from this library, not yet freed, or NULL.
#[no_mangle]
pub unsafe extern "C" fn gpens_ensemble_free(ens: *mut GpensEnsemble) {
    if !ens.is_null() {
        drop(Box::from_raw(ens));
    }
}

/// Runs the full protocol described by a config file and writes its CSVs.
/// `out_dir` may be NULL to keep the directory named in the file.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out_dir` one or NULL.
#[no_mangle]
pub unsafe extern "C" fn gpens_run_experiment(config_path: *const c_char, out_dir: *const c_char) -> GpensStatus {
    guarded(|| {
        let Some(path) = path_arg(config_path) else {
            return fail(GpensStatus::InvalidArgument, "config path is NULL or not UTF-8");
        };
        let mut cfg = match ExperimentConfig::from_file(path) {
            Ok(c) => c,
            Err(e) => return from_error(e),
        };
        if let Some(dir) = path_arg(out_dir) {
            cfg.out_dir = dir;
        }
        match experiment::run_experiment(&cfg) {
            Ok(_) => GpensStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}
