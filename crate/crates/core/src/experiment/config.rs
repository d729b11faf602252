use std::fs;
use std::path::{Path, PathBuf};

use crate::ensemble::{EnsembleConfig, PruneStrategy};
use crate::error::{Error, Result};

/// Everything one experiment needs. Defaults are the full benchmark setting.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub has_header: bool,
    pub runs: usize,
    pub generations: usize,
    pub train_fraction: f64,
    pub methods: Vec<PruneStrategy>,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 lets the pool pick.
    pub threads: usize,
    pub ensemble: EnsembleConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: PathBuf::new(),
            has_header: true,
            runs: 30,
            generations: 1000,
            train_fraction: 0.7,
            methods: PruneStrategy::ALL.to_vec(),
            master_seed: 0,
            out_dir: PathBuf::from("results"),
            threads: 0,
            ensemble: EnsembleConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reduced sizes for workstations and CI.
    pub fn apply_desk_preset(&mut self) {
        self.generations = 100;
        self.ensemble.gp.population_size = 50;
        self.runs = 10;
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.generations == 0 {
            return Err(Error::Config("generations must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie strictly between 0 and 1, got {}",
                self.train_fraction
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if self.dataset.as_os_str().is_empty() {
            return Err(Error::Config("no dataset given".into()));
        }
        self.ensemble.validate()
    }

    /// Reads a `key = value` file. Blank lines and `#` comments are ignored;
    /// a relative dataset path is resolved against the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if cfg.dataset.is_relative() && !cfg.dataset.as_os_str().is_empty() {
            if let Some(dir) = path.parent() {
                cfg.dataset = dir.join(&cfg.dataset);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", idx + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", idx + 1, strip(e))))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
        }
        let e = &mut self.ensemble;
        match key {
            "dataset" => self.dataset = PathBuf::from(value),
            "header" => self.has_header = num(key, value)?,
            "runs" => self.runs = num(key, value)?,
            "generations" => self.generations = num(key, value)?,
            "train_fraction" => self.train_fraction = num(key, value)?,
            "seed" | "master_seed" => self.master_seed = num(key, value)?,
            "out" | "out_dir" => self.out_dir = PathBuf::from(value),
            "threads" => self.threads = num(key, value)?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "population_size" => e.gp.population_size = num(key, value)?,
            "crossover_prob" => e.gp.crossover_prob = num(key, value)?,
            "mutation_prob" => e.gp.mutation_prob = num(key, value)?,
            "tournament_size" => e.gp.tournament_size = num(key, value)?,
            "init_max_depth" => e.gp.init_max_depth = num(key, value)?,
            "stgp_count" => e.stgp_count = num(key, value)?,
            "gsgp_count" => e.gsgp_count = num(key, value)?,
            "mutation_step" => e.mutation_step = num(key, value)?,
            "correlation_threshold" => e.similarity.correlation_threshold = num(key, value)?,
            "entropy_threshold" => e.similarity.entropy_threshold = num(key, value)?,
            "random_removal_prob" => e.random_removal_prob = num(key, value)?,
            "prune_passes" => e.prune_passes = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}
