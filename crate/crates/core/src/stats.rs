//! One-tailed Mann-Whitney U tests between per-run results of two methods.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Significance level used to flag matrix entries.
pub const ALPHA: f64 = 0.05;

const P_MIN: f64 = 1e-300;
const P_MAX: f64 = 1.0 - 1e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    /// One-tailed p-value for "first sample is stochastically smaller".
    pub p: f64,
}

/// Midranks (1-based) of the pooled sample, in input order.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share the average of ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

/// Sum of `t^3 - t` over tie groups of the pooled sample.
fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        sum += t * t * t - t;
        i = j;
    }
    sum
}

/// U for `a` and the lower-tail p-value from the normal approximation with
/// tie-corrected variance and continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> MannWhitney {
    assert!(!a.is_empty() && !b.is_empty(), "mann_whitney_u: empty sample");
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..a.len()].iter().sum();
    let u = rank_sum_a - na * (na + 1.0) / 2.0;

    let n = na + nb;
    let mean = na * nb / 2.0;
    let ties = if n > 1.0 { tie_term(&pooled) / (n * (n - 1.0)) } else { 0.0 };
    let var = na * nb / 12.0 * ((n + 1.0) - ties);
    let p = if var <= 0.0 {
        // every observation tied: U sits at its mean with certainty
        1.0
    } else {
        let z = (u + 0.5 - mean) / var.sqrt();
        Normal::standard().cdf(z)
    };
    MannWhitney { u, p: p.clamp(P_MIN, P_MAX) }
}

/// Final test errors of one method, one value per run.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodResults {
    pub method: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixEntry {
    pub i: usize,
    pub j: usize,
    pub p: f64,
    pub significant: bool,
}

/// All ordered-pair p-values; entry `(i, j)` tests "method i is lower than method j".
#[derive(Debug, Clone, PartialEq)]
pub struct PValueMatrix {
    pub methods: Vec<String>,
    pub entries: Vec<MatrixEntry>,
}

impl PValueMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<&MatrixEntry> {
        self.entries.iter().find(|e| e.i == i && e.j == j)
    }

    /// Square table with an empty diagonal, values rounded to three decimals.
    pub fn display_table(&self) -> String {
        let width = self.methods.iter().map(|m| m.len()).max().unwrap_or(0).max(6);
        let mut out = format!("{:width$}", "");
        for m in &self.methods {
            out.push_str(&format!(" {m:>width$}"));
        }
        out.push('\n');
        for (i, row) in self.methods.iter().enumerate() {
            out.push_str(&format!("{row:width$}"));
            for j in 0..self.methods.len() {
                let cell = match self.get(i, j) {
                    Some(e) if e.significant => format!("*{:.3}", e.p),
                    Some(e) => format!("{:.3}", e.p),
                    None => String::new(),
                };
                out.push_str(&format!(" {cell:>width$}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn pvalue_matrix(results: &[MethodResults]) -> Result<PValueMatrix> {
    if results.len() < 2 {
        return Err(Error::Config("need at least two methods to compare".into()));
    }
    let runs = results[0].values.len();
    if runs == 0 {
        return Err(Error::Config(format!("method {} has no runs", results[0].method)));
    }
    if let Some(r) = results.iter().find(|r| r.values.len() != runs) {
        return Err(Error::Config(format!(
            "method {} has {} runs, expected {runs}",
            r.method,
            r.values.len()
        )));
    }
    let mut entries = Vec::with_capacity(results.len() * (results.len() - 1));
    for (i, a) in results.iter().enumerate() {
        for (j, b) in results.iter().enumerate() {
            if i == j {
                continue;
            }
            let p = mann_whitney_u(&a.values, &b.values).p;
            entries.push(MatrixEntry { i, j, p, significant: p < ALPHA });
        }
    }
    Ok(PValueMatrix { methods: results.iter().map(|r| r.method.clone()).collect(), entries })
}
