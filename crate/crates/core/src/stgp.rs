//! Syntax-based GP: population initialization, tournament selection and the
//! elitist generation step.

use rand::Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::tree::{self, SyntaxTree};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpParams {
    pub population_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub tournament_size: usize,
    pub init_max_depth: usize,
}

impl Default for GpParams {
    fn default() -> Self {
        GpParams {
            population_size: 200,
            crossover_prob: 0.6,
            mutation_prob: 0.3,
            tournament_size: 4,
            init_max_depth: 6,
        }
    }
}

impl GpParams {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self.population_size == 0 {
            return Err(Error::Config("population size must be positive".into()));
        }
        if self.tournament_size == 0 {
            return Err(Error::Config("tournament size must be positive".into()));
        }
        if self.init_max_depth == 0 {
            return Err(Error::Config("initial depth must be positive".into()));
        }
        if !prob(self.crossover_prob)
            || !prob(self.mutation_prob)
            || self.crossover_prob + self.mutation_prob > 1.0
        {
            return Err(Error::Config(format!(
                "operator probabilities {} + {} must lie in [0, 1] and sum to at most 1",
                self.crossover_prob, self.mutation_prob
            )));
        }
        Ok(())
    }
}

/// Which variation operator produces the next offspring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variation {
    Crossover,
    Mutation,
    Reproduction,
}

pub fn draw_variation<R: Rng + ?Sized>(params: &GpParams, rng: &mut R) -> Variation {
    let u: f64 = rng.gen();
    if u < params.crossover_prob {
        Variation::Crossover
    } else if u < params.crossover_prob + params.mutation_prob {
        Variation::Mutation
    } else {
        Variation::Reproduction
    }
}

/// Root mean squared error. Any non-finite input yields `+inf`.
pub fn rmse(predicted: &[f64], targets: &[f64]) -> f64 {
    assert_eq!(predicted.len(), targets.len(), "rmse: length mismatch");
    assert!(!predicted.is_empty(), "rmse: empty input");
    let mut sum = 0.0;
    for (&p, &t) in predicted.iter().zip(targets) {
        if !p.is_finite() || !t.is_finite() {
            return f64::INFINITY;
        }
        let d = p - t;
        sum += d * d;
    }
    (sum / predicted.len() as f64).sqrt()
}

/// Index of the smallest fitness; the lowest index wins ties.
pub fn best_index(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, &f) in fitness.iter().enumerate().skip(1) {
        if f < fitness[best] {
            best = i;
        }
    }
    best
}

/// Draws `k` indices with replacement and returns the fittest, lowest index on ties.
pub fn tournament<R: Rng + ?Sized>(fitness: &[f64], k: usize, rng: &mut R) -> usize {
    assert!(!fitness.is_empty() && k >= 1);
    let mut winner = rng.gen_range(0..fitness.len());
    for _ in 1..k {
        let c = rng.gen_range(0..fitness.len());
        if fitness[c] < fitness[winner] || (fitness[c] == fitness[winner] && c < winner) {
            winner = c;
        }
    }
    winner
}

#[derive(Debug, Clone, PartialEq)]
pub struct StgpIndividual {
    pub tree: SyntaxTree,
    /// Outputs on the owning population's local training inputs.
    pub semantics: Vec<f64>,
    pub fitness: f64,
}

impl StgpIndividual {
    pub fn evaluate(tree: SyntaxTree, local: &Dataset) -> Self {
        let semantics = tree.evaluate(local);
        let fitness = rmse(&semantics, local.targets());
        StgpIndividual { tree, semantics, fitness }
    }
}

pub fn fitnesses(pop: &[StgpIndividual]) -> Vec<f64> {
    pop.iter().map(|i| i.fitness).collect()
}

pub fn tournament_select<'a, R: Rng + ?Sized>(
    pop: &'a [StgpIndividual],
    k: usize,
    rng: &mut R,
) -> &'a StgpIndividual {
    &pop[tournament(&fitnesses(pop), k, rng)]
}

pub fn init_population<R: Rng + ?Sized>(
    params: &GpParams,
    local: &Dataset,
    rng: &mut R,
) -> Vec<StgpIndividual> {
    tree::ramped_half_and_half(params.population_size, params.init_max_depth, local.n_features(), rng)
        .into_iter()
        .map(|t| StgpIndividual::evaluate(t, local))
        .collect()
}

/// One elitist generation: slot 0 receives the incumbent best unchanged, the
/// remaining slots are filled by crossover, mutation or reproduction of
/// tournament winners.
pub fn next_generation<R: Rng + ?Sized>(
    pop: &[StgpIndividual],
    params: &GpParams,
    local: &Dataset,
    rng: &mut R,
) -> Vec<StgpIndividual> {
    assert!(!pop.is_empty());
    let fitness = fitnesses(pop);
    let num_vars = local.n_features();
    let mut next = Vec::with_capacity(pop.len());
    next.push(pop[best_index(&fitness)].clone());
    while next.len() < pop.len() {
        let child = match draw_variation(params, rng) {
            Variation::Crossover => {
                let a = tournament(&fitness, params.tournament_size, rng);
                let b = tournament(&fitness, params.tournament_size, rng);
                let t = tree::subtree_crossover(&pop[a].tree, &pop[b].tree, rng);
                StgpIndividual::evaluate(t, local)
            }
            Variation::Mutation => {
                let a = tournament(&fitness, params.tournament_size, rng);
                let t = tree::subtree_mutation(&pop[a].tree, num_vars, rng);
                StgpIndividual::evaluate(t, local)
            }
            Variation::Reproduction => pop[tournament(&fitness, params.tournament_size, rng)].clone(),
        };
        next.push(child);
    }
    next
}
