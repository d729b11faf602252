#ifndef GPENS_H
#define GPENS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum GpensStatus {
  GPENS_STATUS_OK = 0,
  GPENS_STATUS_NULL_POINTER = 1,
  GPENS_STATUS_INVALID_ARGUMENT = 2,
  GPENS_STATUS_CONFIG_ERROR = 3,
  GPENS_STATUS_DATA_ERROR = 4,
  GPENS_STATUS_PANIC = 5,
} GpensStatus;

/**
 * Pruning strategy selector.
 */
typedef enum GpensStrategy {
  GPENS_STRATEGY_STANDARD = 0,
  GPENS_STRATEGY_RANDOM = 1,
  GPENS_STRATEGY_HALF = 2,
  GPENS_STRATEGY_CORRELATION = 3,
  GPENS_STRATEGY_PROB_CORRELATION = 4,
  GPENS_STRATEGY_ENTROPY = 5,
  GPENS_STRATEGY_PROB_ENTROPY = 6,
} GpensStrategy;

/**
 * Which input set an ensemble prediction refers to.
 */
typedef enum GpensView {
  GPENS_VIEW_GLOBAL_TRAIN = 0,
  GPENS_VIEW_TEST = 1,
} GpensView;

/**
 * Opaque dataset handle.
 */
typedef struct GpensDataset GpensDataset;

/**
 * Opaque ensemble handle.
 */
typedef struct GpensEnsemble GpensEnsemble;

/**
 * Ensemble parameters; start from [`gpens_ensemble_params_default`].
 */
typedef struct GpensEnsembleParams {
  size_t stgp_count;
  size_t gsgp_count;
  size_t population_size;
  double crossover_prob;
  double mutation_prob;
  size_t tournament_size;
  size_t init_max_depth;
  double mutation_step;
  enum GpensStrategy strategy;
  double correlation_threshold;
  double entropy_threshold;
  double random_removal_prob;
} GpensEnsembleParams;

/**
 * Ensemble state after one generation.
 */
typedef struct GpensGenerationRecord {
  size_t generation;
  size_t alive;
  double train_rmse;
  double test_rmse;
} GpensGenerationRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *gpens_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gpens_version(void);

/**
 * Loads a CSV file whose last column is the target.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GpensStatus gpens_dataset_load_csv(const char *path,
                                        bool has_header,
                                        struct GpensDataset **out);

/**
 * Builds a dataset from a row-major `rows x cols` feature matrix and `rows` targets.
 *
 * # Safety
 * `features` must hold `rows * cols` values, `targets` `rows` values, and
 * `out` must be a valid pointer.
 */
enum GpensStatus gpens_dataset_from_rows(const double *features,
                                         size_t rows,
                                         size_t cols,
                                         const double *targets,
                                         struct GpensDataset **out);

/**
 * # Safety
 * `ds` must be a live handle or NULL.
 */
size_t gpens_dataset_rows(const struct GpensDataset *ds);

/**
 * # Safety
 * `ds` must be a live handle or NULL.
 */
size_t gpens_dataset_features(const struct GpensDataset *ds);

/**
 * Shuffled train/test split with round-half-up train size.
 *
 * # Safety
 * `ds` must be a live handle; `train` and `test` valid pointers.
 */
enum GpensStatus gpens_dataset_split(const struct GpensDataset *ds,
                                     double train_fraction,
                                     uint64_t seed,
                                     struct GpensDataset **train,
                                     struct GpensDataset **test);

/**
 * # Safety
 * `ds` must be a handle from this library, not yet freed, or NULL.
 */
void gpens_dataset_free(struct GpensDataset *ds);

/**
 * Pearson correlation with the degenerate cases made total.
 *
 * # Safety
 * `x` and `y` must hold `n` values; `out` must be valid.
 */
enum GpensStatus gpens_pearson(const double *x, const double *y, size_t n, double *out);

/**
 * Normalized variation of information over `floor(sqrt(n))` equal-width bins.
 *
 * # Safety
 * `x` and `y` must hold `n` values; `out` must be valid.
 */
enum GpensStatus gpens_entropy_distance(const double *x, const double *y, size_t n, double *out);

/**
 * Bin labels of `x` as used by the entropy criterion.
 *
 * # Safety
 * `x` must hold `n` values and `labels` room for `n` values.
 */
enum GpensStatus gpens_discretize(const double *x, size_t n, size_t *labels);

/**
 * One-tailed Mann-Whitney U test of "a is lower than b".
 *
 * # Safety
 * `a` must hold `na` values, `b` `nb` values; `u` and `p` must be valid.
 */
enum GpensStatus gpens_mann_whitney(const double *a,
                                    size_t na,
                                    const double *b,
                                    size_t nb,
                                    double *u,
                                    double *p);

/**
 * Protocol defaults: 10 + 10 populations of 200, standard strategy.
 */
struct GpensEnsembleParams gpens_ensemble_params_default(void);

/**
 * Creates and initializes an ensemble on the given global training and test sets.
 *
 * # Safety
 * `train` and `test` must be live handles; `params` and `out` valid pointers.
 */
enum GpensStatus gpens_ensemble_new(const struct GpensDataset *train,
                                    const struct GpensDataset *test,
                                    const struct GpensEnsembleParams *params,
                                    uint64_t seed,
                                    struct GpensEnsemble **out);

/**
 * Steps all alive populations, prunes, and reports the new state.
 *
 * # Safety
 * `ens` must be a live handle; `record` valid or NULL.
 */
enum GpensStatus gpens_ensemble_run_generation(struct GpensEnsemble *ens,
                                               struct GpensGenerationRecord *record);

/**
 * # Safety
 * `ens` must be a live handle or NULL.
 */
size_t gpens_ensemble_alive(const struct GpensEnsemble *ens);

/**
 * Sum of the weights of alive slots; equals the initial slot count.
 *
 * # Safety
 * `ens` must be a live handle or NULL.
 */
double gpens_ensemble_weight_sum(const struct GpensEnsemble *ens);

/**
 * Copies the weighted ensemble prediction into `out`, which must hold
 * `len` values; `len` must equal the row count of the chosen set.
 *
 * # Safety
 * `ens` must be a live handle and `out` valid for `len` writes.
 */
enum GpensStatus gpens_ensemble_predict(const struct GpensEnsemble *ens,
                                        enum GpensView view,
                                        double *out,
                                        size_t len);

/**
 * # Safety
 * `ens` must be a handle from this library, not yet freed, or NULL.
 */
void gpens_ensemble_free(struct GpensEnsemble *ens);

/**
 * Runs the full protocol described by a config file and writes its CSVs.
 * `out_dir` may be NULL to keep the directory named in the file.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string; `out_dir` one or NULL.
 */
enum GpensStatus gpens_run_experiment(const char *config_path, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GPENS_H */
