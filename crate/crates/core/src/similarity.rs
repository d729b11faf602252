//! Similarity criteria between the semantics of two best individuals.
//!
//! Correlation-based: Pearson's ρ compared against a threshold, optionally
//! turned into a Bernoulli(ρ) draw. Entropy-based: both vectors are binned
//! into `floor(sqrt(n))` equal-width bins and compared through the normalized
//! variation of information `D = (H(i,j) - I(i,j)) / H(i,j)`, optionally
//! turned into a Bernoulli(1 - D) draw.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityConfig {
    pub correlation_threshold: f64,
    pub entropy_threshold: f64,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig { correlation_threshold: 0.5, entropy_threshold: 0.5 }
    }
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("correlation threshold", self.correlation_threshold),
            ("entropy threshold", self.entropy_threshold),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityVerdict {
    pub similar: bool,
    /// ρ for the correlation criteria, D for the entropy criteria.
    pub score: f64,
}

/// The four similarity criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    Correlation,
    ProbCorrelation,
    Entropy,
    ProbEntropy,
}

impl Criterion {
    pub fn judge<R: Rng + ?Sized>(
        self,
        si: &[f64],
        sj: &[f64],
        cfg: &SimilarityConfig,
        rng: &mut R,
    ) -> SimilarityVerdict {
        match self {
            Criterion::Correlation => similar_correlation(si, sj, cfg),
            Criterion::ProbCorrelation => similar_correlation_prob(si, sj, cfg, rng),
            Criterion::Entropy => similar_entropy(si, sj, cfg),
            Criterion::ProbEntropy => similar_entropy_prob(si, sj, cfg, rng),
        }
    }
}

/// Pearson correlation, made total: two constant vectors give 1 when equal
/// and 0 otherwise; a single constant vector gives 0.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "pearson: length mismatch");
    assert!(x.len() >= 2, "pearson: need at least two observations");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    match (sxx == 0.0, syy == 0.0) {
        (true, true) => {
            if x == y {
                1.0
            } else {
                0.0
            }
        }
        (true, false) | (false, true) => 0.0,
        (false, false) => {
            let r = sxy / (sxx.sqrt() * syy.sqrt());
            if r.is_nan() {
                0.0
            } else {
                r.clamp(-1.0, 1.0)
            }
        }
    }
}

pub fn similar_correlation(si: &[f64], sj: &[f64], cfg: &SimilarityConfig) -> SimilarityVerdict {
    let rho = pearson(si, sj);
    SimilarityVerdict { similar: rho > cfg.correlation_threshold, score: rho }
}

pub fn similar_correlation_prob<R: Rng + ?Sized>(
    si: &[f64],
    sj: &[f64],
    cfg: &SimilarityConfig,
    rng: &mut R,
) -> SimilarityVerdict {
    let rho = pearson(si, sj);
    let similar = rho > cfg.correlation_threshold && rng.gen::<f64>() < rho;
    SimilarityVerdict { similar, score: rho }
}

/// Number of bins used for vectors of length `n`.
pub fn bin_count(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(1)
}

/// Equal-width binning over the vector's own range into [`bin_count`] bins.
pub fn discretize(s: &[f64]) -> Vec<usize> {
    assert!(!s.is_empty(), "discretize: empty vector");
    assert!(s.iter().all(|v| v.is_finite()), "discretize: non-finite element");
    let bins = bin_count(s.len());
    let (min, max) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if max == min {
        return vec![0; s.len()];
    }
    // halve everything when the range itself overflows
    let scale = if (max - min).is_finite() { 1.0 } else { 0.5 };
    let (lo, width) = (min * scale, max * scale - min * scale);
    s.iter()
        .map(|&v| {
            let raw = ((v * scale - lo) * bins as f64 / width).floor();
            let idx = if raw >= 0.0 { raw as usize } else { 0 };
            idx.min(bins - 1)
        })
        .collect()
}

/// Shannon entropy in bits of a histogram with `total` observations.
pub fn entropy_bits(counts: impl IntoIterator<Item = usize>, total: usize) -> f64 {
    let n = total as f64;
    -counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Entropies of two label vectors over `bins` values each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyTerms {
    pub h_i: f64,
    pub h_j: f64,
    pub joint: f64,
    pub mutual: f64,
}

pub fn entropy_terms(li: &[usize], lj: &[usize], bins: usize) -> EntropyTerms {
    assert_eq!(li.len(), lj.len(), "entropy: length mismatch");
    let n = li.len();
    let mut joint = vec![0usize; bins * bins];
    let mut mi = vec![0usize; bins];
    let mut mj = vec![0usize; bins];
    for (&a, &b) in li.iter().zip(lj) {
        joint[a * bins + b] += 1;
        mi[a] += 1;
        mj[b] += 1;
    }
    let h_i = entropy_bits(mi, n);
    let h_j = entropy_bits(mj, n);
    let h = entropy_bits(joint, n);
    EntropyTerms { h_i, h_j, joint: h, mutual: h_i + h_j - h }
}

/// Normalized variation of information between two label vectors; 0 when
/// the joint entropy is 0.
pub fn label_distance(li: &[usize], lj: &[usize], bins: usize) -> f64 {
    let t = entropy_terms(li, lj, bins);
    if t.joint <= 0.0 {
        return 0.0;
    }
    ((t.joint - t.mutual) / t.joint).clamp(0.0, 1.0)
}

/// Normalized variation of information between two semantics vectors.
pub fn entropy_distance(si: &[f64], sj: &[f64]) -> f64 {
    assert_eq!(si.len(), sj.len(), "entropy_distance: length mismatch");
    let bins = bin_count(si.len());
    label_distance(&discretize(si), &discretize(sj), bins)
}

pub fn similar_entropy(si: &[f64], sj: &[f64], cfg: &SimilarityConfig) -> SimilarityVerdict {
    let d = entropy_distance(si, sj);
    SimilarityVerdict { similar: d < cfg.entropy_threshold, score: d }
}

pub fn similar_entropy_prob<R: Rng + ?Sized>(
    si: &[f64],
    sj: &[f64],
    cfg: &SimilarityConfig,
    rng: &mut R,
) -> SimilarityVerdict {
    let d = entropy_distance(si, sj);
    let similar = d < cfg.entropy_threshold && rng.gen::<f64>() < 1.0 - d;
    SimilarityVerdict { similar, score: d }
}
