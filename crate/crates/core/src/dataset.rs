//! Benchmark data: CSV loading, the global train/test split and per-population
//! bootstrap samples.
//!
//! Features are stored column-major because every consumer evaluates a whole
//! expression over all rows of one variable at a time.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Numeric feature matrix plus target vector. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: usize,
    features: usize,
    columns: Vec<f64>,
    targets: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from row-major feature rows.
    pub fn from_rows(rows: &[Vec<f64>], targets: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let features = rows[0].len();
        if features == 0 {
            return Err(Error::NoFeatures);
        }
        if targets.len() != rows.len() {
            return Err(Error::Config(format!(
                "{} target values for {} rows",
                targets.len(),
                rows.len()
            )));
        }
        let n = rows.len();
        let mut columns = vec![0.0; n * features];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != features {
                return Err(Error::RaggedRow {
                    line: i + 1,
                    expected: features,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { line: i + 1, column: j + 1 });
                }
                columns[j * n + i] = v;
            }
        }
        if let Some(i) = targets.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite { line: i + 1, column: features + 1 });
        }
        Ok(Dataset { rows: n, features, columns, targets })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_features(&self) -> usize {
        self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// All values of input variable `j`, one per row.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.features).map(|j| self.columns[j * self.rows + i]).collect()
    }

    /// A new dataset made of the given rows, in order; indices may repeat.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        let n = indices.len();
        let mut columns = Vec::with_capacity(n * self.features);
        for j in 0..self.features {
            let col = self.column(j);
            columns.extend(indices.iter().map(|&i| col[i]));
        }
        Dataset {
            rows: n,
            features: self.features,
            columns,
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
        }
    }
}

/// Fraction of rows going to the training side, plus the seed of the shuffle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie strictly between 0 and 1, got {train_fraction}"
            )));
        }
        Ok(SplitSpec { train_fraction, seed })
    }
}

/// Reads a comma-separated file whose last column is the target.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, has_header)
}

pub fn parse_csv(text: &str, has_header: bool) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    let mut width = None;
    let mut header_pending = has_header;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected {
            return Err(Error::RaggedRow { line: line_no, expected, found: fields.len() });
        }
        if expected < 2 {
            return Err(Error::NoFeatures);
        }
        let mut values = Vec::with_capacity(expected);
        for (col, field) in fields.iter().enumerate() {
            let field = field.trim();
            let v: f64 = field.parse().map_err(|_| Error::BadNumber {
                line: line_no,
                column: col + 1,
                value: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { line: line_no, column: col + 1 });
            }
            values.push(v);
        }
        targets.push(values.pop().unwrap());
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::from_rows(&rows, targets)
}

/// Number of training rows for `rows` instances, rounding half up.
pub fn train_size(rows: usize, fraction: f64) -> usize {
    (fraction * rows as f64 + 0.5).floor() as usize
}

/// Shuffled row indices split into (train, test).
pub fn split_indices<R: Rng + ?Sized>(
    rows: usize,
    train_fraction: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_train = train_size(rows, train_fraction);
    if n_train == 0 || n_train >= rows {
        return Err(Error::Split { rows, fraction: train_fraction });
    }
    let mut perm: Vec<usize> = (0..rows).collect();
    perm.shuffle(rng);
    let test = perm.split_off(n_train);
    Ok((perm, test))
}

pub fn split_with<R: Rng + ?Sized>(
    ds: &Dataset,
    train_fraction: f64,
    rng: &mut R,
) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(ds.n_rows(), train_fraction, rng)?;
    Ok((ds.select_rows(&train), ds.select_rows(&test)))
}

/// Global train/test split driven by the seed in `spec`.
pub fn split(ds: &Dataset, spec: SplitSpec) -> Result<(Dataset, Dataset)> {
    let mut stream = rng::stream(spec.seed, &[rng::role::SPLIT]);
    split_with(ds, spec.train_fraction, &mut stream)
}

/// Resample with replacement, keeping the row count.
pub fn bootstrap<R: Rng + ?Sized>(train: &Dataset, rng: &mut R) -> Dataset {
    let n = train.n_rows();
    let indices: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    train.select_rows(&indices)
}
