//! Geometric semantic GP without tree materialization.
//!
//! An individual is its output vector on three input sets (the population's
//! local bootstrap sample, the global training set and the test set) plus a
//! lineage record. Offspring semantics are computed directly from parent
//! semantics:
//!
//! * crossover: `child = r * a + (1 - r) * b` with `r = logistic(R(x))`
//! * mutation:  `child = a + ms * (logistic(R1(x)) - logistic(R2(x)))`
//!
//! where `R`, `R1`, `R2` are fresh GROW trees. Only those small random trees
//! are kept in the lineage, so any individual can be re-derived on any input
//! set by replaying its ancestry from the generation-0 trees.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::stgp::{best_index, draw_variation, rmse, tournament, GpParams, Variation};
use crate::tree::{self, SyntaxTree, RANDOM_TREE_DEPTH};

/// Distance kept between the squashed random trees and the endpoints 0 and 1.
pub const SQUASH_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsgpParams {
    pub gp: GpParams,
    pub mutation_step: f64,
}

impl Default for GsgpParams {
    fn default() -> Self {
        GsgpParams { gp: GpParams::default(), mutation_step: 0.1 }
    }
}

impl GsgpParams {
    pub fn validate(&self) -> Result<()> {
        self.gp.validate()?;
        if !(self.mutation_step > 0.0 && self.mutation_step.is_finite()) {
            return Err(Error::Config(format!(
                "mutation step must be positive, got {}",
                self.mutation_step
            )));
        }
        Ok(())
    }
}

/// The three input sets every GSGP individual is evaluated on.
#[derive(Debug, Clone, Copy)]
pub struct InputSets<'a> {
    pub local: &'a Dataset,
    pub global: &'a Dataset,
    pub test: &'a Dataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum View {
    Local,
    Global,
    Test,
}

impl<'a> InputSets<'a> {
    pub fn get(&self, view: View) -> &'a Dataset {
        match view {
            View::Local => self.local,
            View::Global => self.global,
            View::Test => self.test,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticsTriple {
    pub on_local: Vec<f64>,
    pub on_global: Vec<f64>,
    pub on_test: Vec<f64>,
}

impl SemanticsTriple {
    pub fn of_tree(tree: &SyntaxTree, inputs: &InputSets<'_>) -> Self {
        SemanticsTriple {
            on_local: tree.evaluate(inputs.local),
            on_global: tree.evaluate(inputs.global),
            on_test: tree.evaluate(inputs.test),
        }
    }

    pub fn get(&self, view: View) -> &[f64] {
        match view {
            View::Local => &self.on_local,
            View::Global => &self.on_global,
            View::Test => &self.on_test,
        }
    }

    fn zip_with(a: &Self, b: &Self, r: &Self, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let go = |x: &[f64], y: &[f64], z: &[f64]| -> Vec<f64> {
            x.iter().zip(y).zip(z).map(|((&x, &y), &z)| f(x, y, z)).collect()
        };
        SemanticsTriple {
            on_local: go(&a.on_local, &b.on_local, &r.on_local),
            on_global: go(&a.on_global, &b.on_global, &r.on_global),
            on_test: go(&a.on_test, &b.on_test, &r.on_test),
        }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        SemanticsTriple {
            on_local: self.on_local.iter().map(|&x| f(x)).collect(),
            on_global: self.on_global.iter().map(|&x| f(x)).collect(),
            on_test: self.on_test.iter().map(|&x| f(x)).collect(),
        }
    }
}

/// Logistic squashing into the open interval `(0, 1)`. NaN maps to 0.5.
pub fn squash(x: f64) -> f64 {
    if x.is_nan() {
        return 0.5;
    }
    (1.0 / (1.0 + (-x).exp())).clamp(SQUASH_MARGIN, 1.0 - SQUASH_MARGIN)
}

/// `r * a + (1 - r) * b`, kept inside the closed interval spanned by `a` and `b`.
pub fn convex_blend(a: f64, b: f64, r: f64) -> f64 {
    if a == b {
        return a;
    }
    let d = a - b;
    let v = if d.is_finite() { b + r * d } else { r * a + (1.0 - r) * b };
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if v.is_nan() {
        // only reachable for opposite infinities (or a NaN input)
        if r >= 0.5 {
            a
        } else {
            b
        }
    } else if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}

/// `a + step`, with the realized move kept strictly below `ms` in magnitude.
pub fn bounded_step(a: f64, step: f64, ms: f64) -> f64 {
    let mut v = a + step;
    if !a.is_finite() || !v.is_finite() {
        return v;
    }
    while (v - a).abs() >= ms {
        v = if v > a { v.next_down() } else { v.next_up() };
    }
    v
}

/// How an individual came to be. Parents are shared, so the records of a
/// population form a DAG rooted at generation-0 trees.
#[derive(Debug)]
pub enum Lineage {
    Origin { tree: Arc<SyntaxTree> },
    Crossover { a: Arc<Lineage>, b: Arc<Lineage>, mask: Arc<SyntaxTree> },
    Mutation { parent: Arc<Lineage>, r1: Arc<SyntaxTree>, r2: Arc<SyntaxTree>, ms: f64 },
}

impl Lineage {
    /// Recomputes the semantics of this record on `inputs` from the
    /// generation-0 trees, sharing work across common ancestors.
    pub fn replay(self: &Arc<Self>, inputs: &Dataset) -> Vec<f64> {
        let mut memo: HashMap<*const Lineage, Arc<Vec<f64>>> = HashMap::new();
        replay_into(self, inputs, &mut memo).as_ref().clone()
    }

    /// Number of distinct records reachable from this one.
    pub fn distinct_records(self: &Arc<Self>) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![Arc::clone(self)];
        while let Some(node) = stack.pop() {
            if !seen.insert(Arc::as_ptr(&node)) {
                continue;
            }
            match node.as_ref() {
                Lineage::Origin { .. } => {}
                Lineage::Crossover { a, b, .. } => {
                    stack.push(Arc::clone(a));
                    stack.push(Arc::clone(b));
                }
                Lineage::Mutation { parent, .. } => stack.push(Arc::clone(parent)),
            }
        }
        seen.len()
    }
}

fn replay_into(
    node: &Arc<Lineage>,
    inputs: &Dataset,
    memo: &mut HashMap<*const Lineage, Arc<Vec<f64>>>,
) -> Arc<Vec<f64>> {
    if let Some(v) = memo.get(&Arc::as_ptr(node)) {
        return Arc::clone(v);
    }
    let out = match node.as_ref() {
        Lineage::Origin { tree } => tree.evaluate(inputs),
        Lineage::Crossover { a, b, mask } => {
            let sa = replay_into(a, inputs, memo);
            let sb = replay_into(b, inputs, memo);
            let r = mask.evaluate(inputs);
            sa.iter().zip(sb.iter()).zip(&r).map(|((&x, &y), &m)| convex_blend(x, y, squash(m))).collect()
        }
        Lineage::Mutation { parent, r1, r2, ms } => {
            let sp = replay_into(parent, inputs, memo);
            let u = r1.evaluate(inputs);
            let v = r2.evaluate(inputs);
            sp.iter()
                .zip(&u)
                .zip(&v)
                .map(|((&p, &x), &y)| bounded_step(p, ms * (squash(x) - squash(y)), *ms))
                .collect()
        }
    };
    let out = Arc::new(out);
    memo.insert(Arc::as_ptr(node), Arc::clone(&out));
    out
}

#[derive(Debug, Clone)]
pub struct GsgpIndividual {
    pub semantics: SemanticsTriple,
    /// RMSE of `semantics.on_local` against the local targets.
    pub fitness: f64,
    pub lineage: Arc<Lineage>,
}

impl GsgpIndividual {
    fn new(semantics: SemanticsTriple, lineage: Lineage, local: &Dataset) -> Self {
        let fitness = rmse(&semantics.on_local, local.targets());
        GsgpIndividual { semantics, fitness, lineage: Arc::new(lineage) }
    }
}

pub fn init_population<R: Rng + ?Sized>(
    params: &GsgpParams,
    inputs: &InputSets<'_>,
    rng: &mut R,
) -> Vec<GsgpIndividual> {
    let num_vars = inputs.local.n_features();
    tree::ramped_half_and_half(params.gp.population_size, params.gp.init_max_depth, num_vars, rng)
        .into_iter()
        .map(|t| {
            let semantics = SemanticsTriple::of_tree(&t, inputs);
            GsgpIndividual::new(semantics, Lineage::Origin { tree: Arc::new(t) }, inputs.local)
        })
        .collect()
}

/// Geometric crossover with an explicit mask tree.
pub fn crossover_with(
    a: &GsgpIndividual,
    b: &GsgpIndividual,
    mask: Arc<SyntaxTree>,
    inputs: &InputSets<'_>,
) -> GsgpIndividual {
    let r = SemanticsTriple::of_tree(&mask, inputs);
    let semantics = SemanticsTriple::zip_with(&a.semantics, &b.semantics, &r, |x, y, m| {
        convex_blend(x, y, squash(m))
    });
    let lineage = Lineage::Crossover {
        a: Arc::clone(&a.lineage),
        b: Arc::clone(&b.lineage),
        mask,
    };
    GsgpIndividual::new(semantics, lineage, inputs.local)
}

pub fn geometric_crossover<R: Rng + ?Sized>(
    a: &GsgpIndividual,
    b: &GsgpIndividual,
    inputs: &InputSets<'_>,
    rng: &mut R,
) -> GsgpIndividual {
    let mask = tree::grow_tree(RANDOM_TREE_DEPTH, inputs.local.n_features(), rng);
    crossover_with(a, b, Arc::new(mask), inputs)
}

/// Geometric mutation with explicit perturbation trees.
pub fn mutation_with(
    a: &GsgpIndividual,
    r1: Arc<SyntaxTree>,
    r2: Arc<SyntaxTree>,
    ms: f64,
    inputs: &InputSets<'_>,
) -> GsgpIndividual {
    let u = SemanticsTriple::of_tree(&r1, inputs).map(squash);
    let v = SemanticsTriple::of_tree(&r2, inputs).map(squash);
    let semantics = SemanticsTriple::zip_with(&a.semantics, &u, &v, |p, x, y| bounded_step(p, ms * (x - y), ms));
    let lineage = Lineage::Mutation { parent: Arc::clone(&a.lineage), r1, r2, ms };
    GsgpIndividual::new(semantics, lineage, inputs.local)
}

pub fn geometric_mutation<R: Rng + ?Sized>(
    a: &GsgpIndividual,
    ms: f64,
    inputs: &InputSets<'_>,
    rng: &mut R,
) -> GsgpIndividual {
    let n = inputs.local.n_features();
    let r1 = tree::grow_tree(RANDOM_TREE_DEPTH, n, rng);
    let r2 = tree::grow_tree(RANDOM_TREE_DEPTH, n, rng);
    mutation_with(a, Arc::new(r1), Arc::new(r2), ms, inputs)
}

pub fn fitnesses(pop: &[GsgpIndividual]) -> Vec<f64> {
    pop.iter().map(|i| i.fitness).collect()
}

/// Elitist generation step using the geometric operators.
pub fn next_generation<R: Rng + ?Sized>(
    pop: &[GsgpIndividual],
    params: &GsgpParams,
    inputs: &InputSets<'_>,
    rng: &mut R,
) -> Vec<GsgpIndividual> {
    assert!(!pop.is_empty());
    let fitness = fitnesses(pop);
    let k = params.gp.tournament_size;
    let mut next = Vec::with_capacity(pop.len());
    next.push(pop[best_index(&fitness)].clone());
    while next.len() < pop.len() {
        let child = match draw_variation(&params.gp, rng) {
            Variation::Crossover => {
                let a = tournament(&fitness, k, rng);
                let b = tournament(&fitness, k, rng);
                geometric_crossover(&pop[a], &pop[b], inputs, rng)
            }
            Variation::Mutation => {
                let a = tournament(&fitness, k, rng);
                geometric_mutation(&pop[a], params.mutation_step, inputs, rng)
            }
            Variation::Reproduction => pop[tournament(&fitness, k, rng)].clone(),
        };
        next.push(child);
    }
    next
}
