//! The ensemble of populations: initialization, the generation loop, pruning
//! with weight transfer, and the weighted ensemble prediction.
//!
//! Slot bookkeeping (engine kind, alive flag, weight, best-individual
//! snapshot) lives in [`SlotState`], apart from the evolving populations, so
//! pruning and prediction are plain functions over a slice of states.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::gsgp::{self, GsgpIndividual, GsgpParams, InputSets, View};
use crate::rng::{self, role, Stream};
use crate::similarity::{Criterion, SimilarityConfig};
use crate::stgp::{self, best_index, rmse, GpParams, StgpIndividual};
use crate::tree::SyntaxTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Stgp,
    Gsgp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PruneStrategy {
    Standard,
    Random,
    Half,
    Correlation,
    ProbCorrelation,
    Entropy,
    ProbEntropy,
}

impl PruneStrategy {
    /// All strategies, in the order used for result tables.
    pub const ALL: [PruneStrategy; 7] = [
        PruneStrategy::Standard,
        PruneStrategy::Random,
        PruneStrategy::Half,
        PruneStrategy::Correlation,
        PruneStrategy::ProbCorrelation,
        PruneStrategy::Entropy,
        PruneStrategy::ProbEntropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PruneStrategy::Standard => "standard",
            PruneStrategy::Random => "random",
            PruneStrategy::Half => "half",
            PruneStrategy::Correlation => "correlation",
            PruneStrategy::ProbCorrelation => "prob-correlation",
            PruneStrategy::Entropy => "entropy",
            PruneStrategy::ProbEntropy => "prob-entropy",
        }
    }

    /// Position in [`PruneStrategy::ALL`]; doubles as the method id in seed paths.
    pub fn id(self) -> u64 {
        PruneStrategy::ALL.iter().position(|&s| s == self).unwrap() as u64
    }

    pub fn criterion(self) -> Option<Criterion> {
        match self {
            PruneStrategy::Correlation => Some(Criterion::Correlation),
            PruneStrategy::ProbCorrelation => Some(Criterion::ProbCorrelation),
            PruneStrategy::Entropy => Some(Criterion::Entropy),
            PruneStrategy::ProbEntropy => Some(Criterion::ProbEntropy),
            _ => None,
        }
    }
}

impl fmt::Display for PruneStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PruneStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let alias = match key.as_str() {
            "corr" | "correlation" => "correlation",
            "prob-corr" | "pr-corr" | "correlation-prob" | "prob-correlation" => "prob-correlation",
            "entr" | "entropy" => "entropy",
            "prob-entr" | "pr-entr" | "entropy-prob" | "prob-entropy" => "prob-entropy",
            other => other,
        };
        PruneStrategy::ALL
            .iter()
            .copied()
            .find(|m| m.name() == alias)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub stgp_count: usize,
    pub gsgp_count: usize,
    pub gp: GpParams,
    pub mutation_step: f64,
    pub strategy: PruneStrategy,
    pub similarity: SimilarityConfig,
    /// Per-slot, per-generation removal probability of the random strategy.
    pub random_removal_prob: f64,
    /// Similarity passes per generation.
    pub prune_passes: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            stgp_count: 10,
            gsgp_count: 10,
            gp: GpParams::default(),
            mutation_step: 0.1,
            strategy: PruneStrategy::Standard,
            similarity: SimilarityConfig::default(),
            random_removal_prob: 0.001,
            prune_passes: 1,
        }
    }
}

impl EnsembleConfig {
    pub fn gsgp_params(&self) -> GsgpParams {
        GsgpParams { gp: self.gp, mutation_step: self.mutation_step }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stgp_count + self.gsgp_count < 1 {
            return Err(Error::Config("ensemble needs at least one population".into()));
        }
        self.gsgp_params().validate()?;
        self.similarity.validate()?;
        if !(0.0..=1.0).contains(&self.random_removal_prob) {
            return Err(Error::Config(format!(
                "random removal probability must lie in [0, 1], got {}",
                self.random_removal_prob
            )));
        }
        if self.prune_passes == 0 {
            return Err(Error::Config("at least one prune pass per generation".into()));
        }
        Ok(())
    }

    /// Engines of the slots actually created; the half strategy keeps
    /// `ceil(count / 2)` of each kind.
    pub fn slot_engines(&self) -> Vec<Engine> {
        let (s, g) = if self.strategy == PruneStrategy::Half {
            (self.stgp_count.div_ceil(2), self.gsgp_count.div_ceil(2))
        } else {
            (self.stgp_count, self.gsgp_count)
        };
        std::iter::repeat_n(Engine::Stgp, s).chain(std::iter::repeat_n(Engine::Gsgp, g)).collect()
    }
}

/// Current best individual of a slot, with its outputs on the global training
/// and test inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BestSnapshot {
    pub index: usize,
    /// RMSE on the slot's local training set.
    pub local_fitness: f64,
    pub global: Vec<f64>,
    pub test: Vec<f64>,
    /// RMSE of `global` against the global training targets.
    pub global_rmse: f64,
    /// Syntax of the best tree, for STGP slots.
    pub tree: Option<SyntaxTree>,
}

impl BestSnapshot {
    pub fn semantics(&self, view: View) -> &[f64] {
        match view {
            View::Test => &self.test,
            _ => &self.global,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotState {
    pub engine: Engine,
    pub alive: bool,
    pub weight: f64,
    pub best: BestSnapshot,
}

#[derive(Debug, Clone)]
pub enum Population {
    Stgp(Vec<StgpIndividual>),
    Gsgp(Vec<GsgpIndividual>),
}

impl Population {
    pub fn len(&self) -> usize {
        match self {
            Population::Stgp(p) => p.len(),
            Population::Gsgp(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn fitnesses(&self) -> Vec<f64> {
        match self {
            Population::Stgp(p) => stgp::fitnesses(p),
            Population::Gsgp(p) => gsgp::fitnesses(p),
        }
    }
}

#[derive(Debug)]
struct SlotEngine {
    population: Population,
    local: Arc<Dataset>,
    rng: Stream,
}

/// Removal of one slot in favour of another.
#[derive(Debug, Clone, PartialEq)]
pub struct RemovalEvent {
    pub generation: usize,
    pub removed: usize,
    pub survivor: usize,
    /// Weight handed from `removed` to `survivor`.
    pub weight: f64,
    /// Similarity score behind the removal, absent for random removals.
    pub score: Option<f64>,
}

/// Ensemble quality after one generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub alive: usize,
    pub train_rmse: f64,
    pub test_rmse: f64,
}

#[derive(Debug)]
pub struct Ensemble {
    config: EnsembleConfig,
    global: Arc<Dataset>,
    test: Arc<Dataset>,
    states: Vec<SlotState>,
    engines: Vec<SlotEngine>,
    n0: usize,
    generation: usize,
    prune_rng: Stream,
    events: Vec<RemovalEvent>,
}

impl Ensemble {
    /// Builds every slot with its own bootstrap sample and an initial
    /// population. All randomness derives from `seed`.
    pub fn new(config: EnsembleConfig, global: Arc<Dataset>, test: Arc<Dataset>, seed: u64) -> Result<Self> {
        config.validate()?;
        if global.n_features() != test.n_features() {
            return Err(Error::Config("train and test sets have different feature counts".into()));
        }
        let engines_kind = config.slot_engines();
        let gsgp_params = config.gsgp_params();
        let built: Vec<(SlotState, SlotEngine)> = engines_kind
            .par_iter()
            .enumerate()
            .map(|(slot, &engine)| {
                let mut boot_rng = rng::stream(seed, &[slot as u64, role::BOOTSTRAP]);
                let local = Arc::new(dataset::bootstrap(&global, &mut boot_rng));
                let mut evo_rng = rng::stream(seed, &[slot as u64, role::EVOLVE]);
                let population = match engine {
                    Engine::Stgp => Population::Stgp(stgp::init_population(&config.gp, &local, &mut evo_rng)),
                    Engine::Gsgp => {
                        let inputs = InputSets { local: &local, global: &global, test: &test };
                        Population::Gsgp(gsgp::init_population(&gsgp_params, &inputs, &mut evo_rng))
                    }
                };
                let best = snapshot(&population, None, &global, &test);
                let state = SlotState { engine, alive: true, weight: 1.0, best };
                (state, SlotEngine { population, local, rng: evo_rng })
            })
            .collect();
        let (states, engines): (Vec<_>, Vec<_>) = built.into_iter().unzip();
        let n0 = states.len();
        Ok(Ensemble {
            config,
            global,
            test,
            states,
            engines,
            n0,
            generation: 0,
            prune_rng: rng::stream(seed, &[role::PRUNE]),
            events: Vec::new(),
        })
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn states(&self) -> &[SlotState] {
        &self.states
    }

    pub fn population(&self, slot: usize) -> &Population {
        &self.engines[slot].population
    }

    pub fn local_train(&self, slot: usize) -> &Arc<Dataset> {
        &self.engines[slot].local
    }

    pub fn global_train(&self) -> &Dataset {
        &self.global
    }

    pub fn test_set(&self) -> &Dataset {
        &self.test
    }

    pub fn alive_count(&self) -> usize {
        alive_count(&self.states)
    }

    pub fn weight_sum(&self) -> f64 {
        self.states.iter().filter(|s| s.alive).map(|s| s.weight).sum()
    }

    /// Every removal so far, in order.
    pub fn events(&self) -> &[RemovalEvent] {
        &self.events
    }

    /// Advances every alive slot by one generation, in parallel.
    pub fn step_populations(&mut self) {
        let gsgp_params = self.config.gsgp_params();
        let gp = self.config.gp;
        let (global, test) = (&*self.global, &*self.test);
        self.engines
            .par_iter_mut()
            .zip(self.states.par_iter_mut())
            .filter(|(_, state)| state.alive)
            .for_each(|(slot, state)| {
                let local = Arc::clone(&slot.local);
                slot.population = match &slot.population {
                    Population::Stgp(pop) => Population::Stgp(stgp::next_generation(pop, &gp, &local, &mut slot.rng)),
                    Population::Gsgp(pop) => {
                        let inputs = InputSets { local: &local, global, test };
                        Population::Gsgp(gsgp::next_generation(pop, &gsgp_params, &inputs, &mut slot.rng))
                    }
                };
                state.best = snapshot(&slot.population, Some(&state.best), global, test);
            });
    }

    /// One pruning round according to the configured strategy.
    pub fn prune(&mut self) -> Vec<RemovalEvent> {
        let events = prune(
            &mut self.states,
            self.config.strategy,
            &self.config.similarity,
            self.config.random_removal_prob,
            self.config.prune_passes,
            self.generation,
            &mut self.prune_rng,
        );
        self.events.extend(events.iter().cloned());
        events
    }

    pub fn semantics(&self, view: View) -> Vec<f64> {
        ensemble_semantics(&self.states, self.n0, view)
    }

    pub fn train_rmse(&self) -> f64 {
        rmse(&self.semantics(View::Global), self.global.targets())
    }

    pub fn test_rmse(&self) -> f64 {
        rmse(&self.semantics(View::Test), self.test.targets())
    }

    /// Steps all populations, prunes once and reports the ensemble errors.
    pub fn run_generation(&mut self) -> GenerationRecord {
        self.generation += 1;
        self.step_populations();
        self.prune();
        GenerationRecord {
            generation: self.generation,
            alive: self.alive_count(),
            train_rmse: self.train_rmse(),
            test_rmse: self.test_rmse(),
        }
    }
}

fn snapshot(population: &Population, previous: Option<&BestSnapshot>, global: &Dataset, test: &Dataset) -> BestSnapshot {
    match population {
        Population::Stgp(pop) => {
            let index = best_index(&stgp::fitnesses(pop));
            let best = &pop[index];
            if let Some(prev) = previous.filter(|p| p.tree.as_ref() == Some(&best.tree)) {
                return BestSnapshot { index, local_fitness: best.fitness, ..prev.clone() };
            }
            let on_global = best.tree.evaluate(global);
            let global_rmse = rmse(&on_global, global.targets());
            BestSnapshot {
                index,
                local_fitness: best.fitness,
                global: on_global,
                test: best.tree.evaluate(test),
                global_rmse,
                tree: Some(best.tree.clone()),
            }
        }
        Population::Gsgp(pop) => {
            let index = best_index(&gsgp::fitnesses(pop));
            let best = &pop[index];
            BestSnapshot {
                index,
                local_fitness: best.fitness,
                global: best.semantics.on_global.clone(),
                test: best.semantics.on_test.clone(),
                global_rmse: rmse(&best.semantics.on_global, global.targets()),
                tree: None,
            }
        }
    }
}

pub fn alive_count(states: &[SlotState]) -> usize {
    states.iter().filter(|s| s.alive).count()
}

/// `(1 / n0) * sum(w_i * s_i)` over alive slots, in slot order.
pub fn ensemble_semantics(states: &[SlotState], n0: usize, view: View) -> Vec<f64> {
    let mut alive = states.iter().filter(|s| s.alive);
    let Some(first) = alive.next() else {
        return Vec::new();
    };
    let mut acc: Vec<f64> = first.best.semantics(view).iter().map(|&v| first.weight * v).collect();
    for s in alive {
        for (a, &v) in acc.iter_mut().zip(s.best.semantics(view)) {
            *a += s.weight * v;
        }
    }
    let n0 = n0 as f64;
    acc.iter_mut().for_each(|a| *a /= n0);
    acc
}

fn transfer(states: &mut [SlotState], removed: usize, survivor: usize) -> f64 {
    let w = states[removed].weight;
    states[removed].alive = false;
    states[removed].weight = 0.0;
    states[survivor].weight += w;
    w
}

/// Applies one generation's pruning to `states` and returns the removals.
///
/// Similarity strategies visit pairs `(i, j)`, `i < j`, of the slots alive on
/// entry in ascending order, skipping slots removed earlier in the same pass.
/// Of a similar pair the slot whose best has the higher global-train RMSE is
/// removed (the lower index survives ties). At least one slot always stays.
pub fn prune<R: Rng + ?Sized>(
    states: &mut [SlotState],
    strategy: PruneStrategy,
    cfg: &SimilarityConfig,
    random_removal_prob: f64,
    passes: usize,
    generation: usize,
    rng: &mut R,
) -> Vec<RemovalEvent> {
    let mut events = Vec::new();
    match strategy {
        PruneStrategy::Standard | PruneStrategy::Half => {}
        PruneStrategy::Random => {
            let entry: Vec<usize> = (0..states.len()).filter(|&i| states[i].alive).collect();
            for &i in &entry {
                let hit = rng.gen::<f64>() < random_removal_prob;
                if !hit || alive_count(states) <= 1 {
                    continue;
                }
                let survivors: Vec<usize> = (0..states.len()).filter(|&k| k != i && states[k].alive).collect();
                let survivor = survivors[rng.gen_range(0..survivors.len())];
                let weight = transfer(states, i, survivor);
                events.push(RemovalEvent { generation, removed: i, survivor, weight, score: None });
            }
        }
        _ => {
            let criterion = strategy.criterion().expect("similarity strategy");
            for _ in 0..passes {
                let before = events.len();
                similarity_pass(states, criterion, cfg, generation, rng, &mut events);
                if events.len() == before {
                    break;
                }
            }
        }
    }
    events
}

fn similarity_pass<R: Rng + ?Sized>(
    states: &mut [SlotState],
    criterion: Criterion,
    cfg: &SimilarityConfig,
    generation: usize,
    rng: &mut R,
    events: &mut Vec<RemovalEvent>,
) {
    let entry: Vec<usize> = (0..states.len()).filter(|&i| states[i].alive).collect();
    for (pos, &i) in entry.iter().enumerate() {
        for &j in &entry[pos + 1..] {
            if !states[i].alive {
                break;
            }
            if !states[j].alive || alive_count(states) <= 1 {
                continue;
            }
            let (si, sj) = (&states[i].best.global, &states[j].best.global);
            // overflowed outputs carry no usable similarity signal
            if !si.iter().chain(sj.iter()).all(|v| v.is_finite()) {
                continue;
            }
            let verdict = criterion.judge(si, sj, cfg, rng);
            if !verdict.similar {
                continue;
            }
            let (removed, survivor) = if states[j].best.global_rmse < states[i].best.global_rmse {
                (i, j)
            } else {
                (j, i)
            };
            let weight = transfer(states, removed, survivor);
            events.push(RemovalEvent { generation, removed, survivor, weight, score: Some(verdict.score) });
        }
    }
}
