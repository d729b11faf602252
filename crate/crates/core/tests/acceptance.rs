//! One test per acceptance criterion. Each prints a single PASS/FAIL line to
//! stdout (visible without `--nocapture`) and fails on FAIL.

// `!(x <= tol)` on purpose: NaN must count as a failure
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::Rng;

use common::{report, slot};
use gpens::ensemble::{self, Ensemble, EnsembleConfig, PruneStrategy};
use gpens::experiment::{self, ExperimentConfig, MethodRun};
use gpens::gsgp::{self, GsgpParams, InputSets, View};
use gpens::rng;
use gpens::similarity::{self, SimilarityConfig};
use gpens::stats;
use gpens::stgp::GpParams;
use gpens::{dataset, Dataset};

fn desk_gp() -> GpParams {
    GpParams { population_size: 50, ..GpParams::default() }
}

/// Per-generation observations of one desk-scale ensemble run.
struct Trace {
    strategy: PruneStrategy,
    n0: usize,
    /// Index 0 is the state right after initialization.
    weight_sums: Vec<f64>,
    alive: Vec<usize>,
    /// `best_local[g][slot]`, `None` once the slot is removed.
    best_local: Vec<Vec<Option<f64>>>,
    seconds: f64,
}

fn observe(ens: &Ensemble, t: &mut Trace) {
    t.weight_sums.push(ens.weight_sum());
    t.alive.push(ens.alive_count());
    t.best_local.push(ens.states().iter().map(|s| s.alive.then_some(s.best.local_fitness)).collect());
}

/// 100 generations, 5 + 5 populations of 50, for every strategy on the slump fixture.
fn desk_traces() -> &'static [Trace] {
    static TRACES: OnceLock<Vec<Trace>> = OnceLock::new();
    TRACES.get_or_init(|| {
        let (global, test) = common::split("slump", 7);
        PruneStrategy::ALL
            .iter()
            .map(|&strategy| {
                let cfg = EnsembleConfig { stgp_count: 5, gsgp_count: 5, gp: desk_gp(), strategy, ..Default::default() };
                let start = Instant::now();
                let mut ens = Ensemble::new(cfg, Arc::clone(&global), Arc::clone(&test), 100 + strategy.id()).unwrap();
                let mut t = Trace {
                    strategy,
                    n0: ens.n0(),
                    weight_sums: Vec::new(),
                    alive: Vec::new(),
                    best_local: Vec::new(),
                    seconds: 0.0,
                };
                observe(&ens, &mut t);
                for _ in 0..100 {
                    ens.run_generation();
                    observe(&ens, &mut t);
                }
                t.seconds = start.elapsed().as_secs_f64();
                t
            })
            .collect()
    })
}

#[test]
fn criterion_01_weight_conservation() {
    let traces = desk_traces();
    let mut bad = Vec::new();
    let mut slowest: f64 = 0.0;
    for t in traces {
        slowest = slowest.max(t.seconds);
        if let Some(g) = t.weight_sums.iter().position(|&w| w != t.n0 as f64) {
            bad.push(format!("{} gen {g}: sum {}", t.strategy, t.weight_sums[g]));
        }
    }
    let removed: usize = traces.iter().map(|t| t.n0 - t.alive.last().unwrap()).sum();
    let ok = bad.is_empty() && slowest < 120.0;
    let detail = if bad.is_empty() {
        format!("7 strategies x 101 states, {removed} removals, slowest run {slowest:.1}s")
    } else {
        bad.join("; ")
    };
    report(1, "weight conservation", ok, &detail);
}

#[test]
fn criterion_02_standard_and_half_sizes() {
    let data = common::load("slump");
    let mut cfg = ExperimentConfig {
        dataset: common::fixture("slump"),
        runs: 2,
        generations: 100,
        methods: vec![PruneStrategy::Standard, PruneStrategy::Half],
        master_seed: 2,
        ..Default::default()
    };
    cfg.ensemble.gp = desk_gp();
    let runs = experiment::run_on(&cfg, &data).unwrap();
    let n0 = cfg.ensemble.stgp_count + cfg.ensemble.gsgp_count;
    let mut bad = Vec::new();
    for r in &runs {
        let want = match r.method {
            PruneStrategy::Standard => n0,
            _ => n0 / 2,
        };
        if r.records.len() != 100 || r.records.iter().any(|g| g.alive != want) {
            bad.push(format!("run {} {}", r.run, r.method));
        }
    }
    let detail = if bad.is_empty() { format!("standard {n0}, half {} in every generation", n0 / 2) } else { bad.join("; ") };
    report(2, "standard/half constant size", bad.is_empty(), &detail);
}

#[test]
fn criterion_03_random_keeps_one() {
    let mut states: Vec<_> = (0..20).map(|i| slot(vec![i as f64, 0.0], i as f64)).collect();
    let mut stream = rng::stream(3, &[]);
    let cfg = SimilarityConfig::default();
    let mut min_alive = usize::MAX;
    let mut weights_ok = true;
    for g in 1..=10_000 {
        ensemble::prune(&mut states, PruneStrategy::Random, &cfg, 0.5, 1, g, &mut stream);
        min_alive = min_alive.min(ensemble::alive_count(&states));
        let w: f64 = states.iter().filter(|s| s.alive).map(|s| s.weight).sum();
        weights_ok &= w == 20.0;
    }
    let ok = min_alive >= 1 && weights_ok;
    report(
        3,
        "random never empties",
        ok,
        &format!("min alive {min_alive} over 10000 generations at p=0.5, weights conserved: {weights_ok}"),
    );
}

fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = neumaier(x.iter().copied()) / n;
    let my = neumaier(y.iter().copied()) / n;
    let sxy = neumaier(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = neumaier(x.iter().map(|a| (a - mx) * (a - mx)));
    let syy = neumaier(y.iter().map(|b| (b - my) * (b - my)));
    sxy / (sxx * syy).sqrt()
}

fn oracle_labels(s: &[f64], bins: usize) -> Vec<usize> {
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return vec![0; s.len()];
    }
    s.iter().map(|&v| (((v - min) * bins as f64 / (max - min)).floor() as usize).min(bins - 1)).collect()
}

fn plogp_sum(counts: impl IntoIterator<Item = usize>, n: usize) -> f64 {
    -counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / n as f64;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Joint histogram over label pairs, entropies from sorted cell lists.
fn entropy_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let bins = ((n as f64).sqrt().floor() as usize).max(1);
    let (lx, ly) = (oracle_labels(x, bins), oracle_labels(y, bins));
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut mx: BTreeMap<usize, usize> = BTreeMap::new();
    let mut my: BTreeMap<usize, usize> = BTreeMap::new();
    for (&a, &b) in lx.iter().zip(&ly) {
        *joint.entry((a, b)).or_default() += 1;
        *mx.entry(a).or_default() += 1;
        *my.entry(b).or_default() += 1;
    }
    let hx = plogp_sum(mx.into_values(), n);
    let hy = plogp_sum(my.into_values(), n);
    let h = plogp_sum(joint.into_values(), n);
    if h <= 0.0 {
        return 0.0;
    }
    let i = hx + hy - h;
    ((h - i) / h).clamp(0.0, 1.0)
}

/// Random vector pair with a random amount of shared signal and of ties.
fn random_pair<R: Rng>(r: &mut R, min_len: usize, max_len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = r.gen_range(min_len..=max_len);
    let scale = 10f64.powi(r.gen_range(-3..=3));
    let coupling = r.gen_range(-1.0..1.0);
    let noise = r.gen_range(0.0..2.0);
    let grid = r.gen_bool(0.3);
    let x: Vec<f64> = (0..n)
        .map(|_| {
            let v: f64 = r.gen_range(-1.0..1.0);
            if grid {
                (v * 4.0).round() * scale
            } else {
                v * scale
            }
        })
        .collect();
    let y = x.iter().map(|&v| coupling * v + noise * scale * r.gen_range(-1.0..1.0)).collect();
    (x, y)
}

#[test]
fn criterion_04_similarity_oracles() {
    let mut r = rng::stream(4, &[]);
    let mut worst_rel: f64 = 0.0;
    let mut pearson_fail = 0;
    let mut compared = 0;
    for _ in 0..1000 {
        let (x, y) = random_pair(&mut r, 3, 256);
        let want = pearson_oracle(&x, &y);
        // constant vectors have no correlation to compare against
        if !want.is_finite() || want == 0.0 {
            continue;
        }
        let got = similarity::pearson(&x, &y);
        compared += 1;
        let rel = (got - want).abs() / want.abs();
        worst_rel = worst_rel.max(rel);
        if !(rel <= 1e-12) {
            pearson_fail += 1;
        }
    }
    let mut entropy_fail = 0;
    for _ in 0..1000 {
        let (x, y) = random_pair(&mut r, 1, 256);
        if similarity::entropy_distance(&x, &y) != entropy_oracle(&x, &y) {
            entropy_fail += 1;
        }
    }
    let ok = pearson_fail == 0 && entropy_fail == 0 && compared >= 990;
    report(
        4,
        "similarity oracle equivalence",
        ok,
        &format!(
            "pearson {compared} pairs, worst rel err {worst_rel:.2e}, {pearson_fail} over 1e-12; entropy 1000 pairs, {entropy_fail} mismatches"
        ),
    );
}

#[test]
fn criterion_05_variation_of_information() {
    let mut r = rng::stream(5, &[]);
    let (mut range_bad, mut self_bad, mut sym_bad) = (0, 0, 0);
    let mut worst_sym: f64 = 0.0;
    for _ in 0..1000 {
        let (x, y) = random_pair(&mut r, 1, 256);
        let d = similarity::entropy_distance(&x, &y);
        let e = similarity::entropy_distance(&y, &x);
        range_bad += usize::from(!(0.0..=1.0).contains(&d));
        self_bad += usize::from(similarity::entropy_distance(&x, &x) != 0.0);
        worst_sym = worst_sym.max((d - e).abs());
        sym_bad += usize::from((d - e).abs() > 1e-12);
    }
    let ok = range_bad + self_bad + sym_bad == 0;
    report(
        5,
        "variation of information properties",
        ok,
        &format!("out of range {range_bad}, D(x,x)!=0 {self_bad}, asymmetric {sym_bad} (worst {worst_sym:.1e})"),
    );
}

#[test]
fn criterion_06_probabilistic_variants() {
    let cfg = SimilarityConfig::default();
    let (x, y) = ([1.0, 2.0, 3.0, 4.0], [1.0, 3.0, 2.0, 4.0]);
    let rho = similarity::pearson(&x, &y);
    // n = 22 -> 4 bins; integer labels 0..=3 map to themselves
    let lx = [0, 2, 1, 1, 3, 2, 3, 1, 1, 0, 0, 0, 1, 1, 0, 1, 3, 1, 1, 2, 2, 3];
    let ly = [0, 2, 1, 1, 3, 2, 0, 1, 1, 0, 0, 0, 1, 1, 0, 1, 3, 1, 1, 0, 2, 3];
    let (ex, ey): (Vec<f64>, Vec<f64>) =
        (lx.iter().map(|&v| v as f64).collect(), ly.iter().map(|&v| v as f64).collect());
    let d = similarity::entropy_distance(&ex, &ey);
    let mut r = rng::stream(6, &[]);
    let trials = 10_000;
    let corr_hits = (0..trials).filter(|_| similarity::similar_correlation_prob(&x, &y, &cfg, &mut r).similar).count();
    let ent_hits = (0..trials).filter(|_| similarity::similar_entropy_prob(&ex, &ey, &cfg, &mut r).similar).count();
    let (fc, fe) = (corr_hits as f64 / trials as f64, ent_hits as f64 / trials as f64);
    let ok = (rho - 0.8).abs() < 1e-12 && (d - 0.3).abs() < 1e-3 && (fc - 0.8).abs() <= 0.02 && (fe - 0.7).abs() <= 0.02;
    report(
        6,
        "probabilistic similarity frequencies",
        ok,
        &format!("rho={rho:.4} freq {fc:.4} (want 0.8); D={d:.4} freq {fe:.4} (want 0.7)"),
    );
}

fn gsgp_fixture(pop: usize) -> (Dataset, Arc<Dataset>, Arc<Dataset>, GsgpParams) {
    let (global, test) = common::split("yacht", 8);
    let mut boot = rng::stream(8, &[1]);
    let local = dataset::bootstrap(&global, &mut boot);
    let params = GsgpParams { gp: GpParams { population_size: pop, ..GpParams::default() }, mutation_step: 0.1 };
    (local, global, test, params)
}

#[test]
fn criterion_07_geometric_invariants() {
    let (local, global, test, params) = gsgp_fixture(100);
    let inputs = InputSets { local: &local, global: &global, test: &test };
    let mut r = rng::stream(7, &[]);
    let pop = gsgp::init_population(&params, &inputs, &mut r);
    let views = [View::Local, View::Global, View::Test];
    let mut outside = 0usize;
    let mut components = 0usize;
    for _ in 0..1000 {
        let (a, b) = (&pop[r.gen_range(0..pop.len())], &pop[r.gen_range(0..pop.len())]);
        let child = gsgp::geometric_crossover(a, b, &inputs, &mut r);
        for v in views {
            for ((&c, &x), &y) in child.semantics.get(v).iter().zip(a.semantics.get(v)).zip(b.semantics.get(v)) {
                components += 1;
                if !(c >= x.min(y) && c <= x.max(y)) {
                    outside += 1;
                }
            }
        }
    }
    let mut max_step: f64 = 0.0;
    let mut bad_step = 0usize;
    for _ in 0..1000 {
        let a = &pop[r.gen_range(0..pop.len())];
        let child = gsgp::geometric_mutation(a, 0.1, &inputs, &mut r);
        for v in views {
            for (&c, &p) in child.semantics.get(v).iter().zip(a.semantics.get(v)) {
                if p.is_finite() {
                    let step = (c - p).abs();
                    max_step = max_step.max(step);
                    bad_step += usize::from(!(step < 0.1));
                } else if c != p {
                    bad_step += 1;
                }
            }
        }
    }
    let ok = outside == 0 && bad_step == 0;
    report(
        7,
        "GSGP geometric invariants",
        ok,
        &format!("{components} crossover components, {outside} outside; mutation max step {max_step:.6} (< 0.1), {bad_step} violations"),
    );
}

#[test]
fn criterion_08_lineage_replay() {
    let (local, global, test, params) = gsgp_fixture(100);
    let inputs = InputSets { local: &local, global: &global, test: &test };
    let mut r = rng::stream(8, &[2]);
    let mut pop = gsgp::init_population(&params, &inputs, &mut r);
    for _ in 0..20 {
        pop = gsgp::next_generation(&pop, &params, &inputs, &mut r);
    }
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for _ in 0..50 {
        let ind = &pop[r.gen_range(0..pop.len())];
        let replayed = ind.lineage.replay(&test);
        for (&a, &b) in replayed.iter().zip(&ind.semantics.on_test) {
            let err = if a == b { 0.0 } else { (a - b).abs() };
            worst = worst.max(err);
            bad += usize::from(!(err <= 1e-9));
        }
        bad += usize::from(replayed.len() != ind.semantics.on_test.len());
    }
    report(8, "GSGP lineage replay", bad == 0, &format!("50 individuals after 20 generations, worst abs err {worst:.1e}"));
}

#[test]
fn criterion_09_elitism() {
    let traces = desk_traces();
    let mut bad = Vec::new();
    for t in traces {
        for g in 1..t.best_local.len() {
            for (slot, (now, before)) in t.best_local[g].iter().zip(&t.best_local[g - 1]).enumerate() {
                if let (Some(now), Some(before)) = (now, before) {
                    if !(now <= before) {
                        bad.push(format!("{} slot {slot} gen {g}: {before} -> {now}", t.strategy));
                    }
                }
            }
        }
    }
    let ok = bad.is_empty();
    let detail = if ok {
        "7 strategies x 10 populations (5 STGP + 5 GSGP) x 100 generations".to_string()
    } else {
        bad.into_iter().take(5).collect::<Vec<_>>().join("; ")
    };
    report(9, "elitism monotonicity", ok, &detail);
}

/// Lower-tail permutation p-value of U for `a`, by full enumeration.
fn exact_lower_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = stats::midranks(&pooled);
    let (n, total) = (a.len(), pooled.len());
    let offset = (n * (n + 1)) as f64 / 2.0;
    let observed: f64 = ranks[..n].iter().sum::<f64>() - offset;
    let (mut le, mut all) = (0u64, 0u64);
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let u: f64 = (0..total).filter(|k| mask >> k & 1 == 1).map(|k| ranks[k]).sum::<f64>() - offset;
        all += 1;
        le += u64::from(u <= observed + 1e-9);
    }
    le as f64 / all as f64
}

#[test]
fn criterion_10_mann_whitney_vs_exact() {
    let mut r = rng::stream(10, &[]);
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for _ in 0..200 {
        let (n, m) = (r.gen_range(3..=8), r.gen_range(3..=8));
        let shift = r.gen_range(-2.0..2.0);
        let a: Vec<f64> = (0..n).map(|_| r.gen::<f64>() + shift).collect();
        let b: Vec<f64> = (0..m).map(|_| r.gen::<f64>()).collect();
        let approx = stats::mann_whitney_u(&a, &b).p;
        let diff = (approx - exact_lower_p(&a, &b)).abs();
        worst = worst.max(diff);
        bad += usize::from(!(diff <= 0.03));
    }
    report(10, "Mann-Whitney vs exact p", bad == 0, &format!("200 pairs, sizes 3..=8, worst |diff| {worst:.4}"));
}

fn desk_config(name: &str, methods: Vec<PruneStrategy>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_file(common::config(name)).unwrap();
    cfg.apply_desk_preset();
    cfg.methods = methods;
    cfg
}

fn mean_alive(runs: &[MethodRun], method: PruneStrategy) -> f64 {
    let recs: Vec<_> = runs.iter().filter(|r| r.method == method).flat_map(|r| r.records.iter()).collect();
    recs.iter().map(|g| g.alive as f64).sum::<f64>() / recs.len() as f64
}

#[test]
fn criterion_11_correlation_shrinks_airfoil_ensemble() {
    let cfg = desk_config("airfoil", vec![PruneStrategy::Correlation, PruneStrategy::Random]);
    assert_eq!((cfg.runs, cfg.generations, cfg.ensemble.stgp_count + cfg.ensemble.gsgp_count), (10, 100, 20));
    let data = dataset::load_csv(&cfg.dataset, true).unwrap();
    let start = Instant::now();
    let runs = experiment::run_on(&cfg, &data).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let corr = mean_alive(&runs, PruneStrategy::Correlation);
    let random = mean_alive(&runs, PruneStrategy::Random);
    let ok = corr < 20.0 && corr < random;
    report(
        11,
        "airfoil correlation ensemble size",
        ok,
        &format!("mean alive correlation {corr:.2}, random {random:.2} (of 20), {secs:.0}s"),
    );
}

fn yacht_p_values(runs: usize) -> (f64, f64) {
    let mut cfg = desk_config("yacht", vec![PruneStrategy::Standard, PruneStrategy::Entropy]);
    cfg.runs = runs;
    let data = dataset::load_csv(&cfg.dataset, true).unwrap();
    let out = experiment::run_on(&cfg, &data).unwrap();
    let finals = |m: PruneStrategy| -> Vec<f64> {
        out.iter().filter(|r| r.method == m).map(|r| r.summary().final_test_rmse).collect()
    };
    let (s, e) = (finals(PruneStrategy::Standard), finals(PruneStrategy::Entropy));
    (stats::mann_whitney_u(&s, &e).p, stats::mann_whitney_u(&e, &s).p)
}

#[test]
fn criterion_12_yacht_entropy_parity() {
    let (mut p_se, mut p_es) = yacht_p_values(10);
    let mut runs = 10;
    if !(p_se > 0.05 && p_es > 0.05) {
        runs = 30;
        (p_se, p_es) = yacht_p_values(30);
    }
    let ok = p_se > 0.05 && p_es > 0.05;
    report(
        12,
        "yacht standard vs entropy parity",
        ok,
        &format!("{runs} runs: p(standard<entropy)={p_se:.3}, p(entropy<standard)={p_es:.3}"),
    );
}

fn cli_run(config: &Path, out: &Path, threads: usize) {
    let status = Command::new(env!("CARGO_BIN_EXE_gpens"))
        .args(["run", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--threads", &threads.to_string()])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
}

#[test]
fn criterion_13_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("det.conf");
    std::fs::write(
        &config,
        format!(
            "dataset = {}\nruns = 2\ngenerations = 8\npopulation_size = 20\nstgp_count = 3\ngsgp_count = 3\n\
             random_removal_prob = 0.2\nseed = 42\n",
            common::fixture("slump").display()
        ),
    )
    .unwrap();
    let outs: Vec<_> = [(1, "a"), (4, "b"), (4, "c")]
        .iter()
        .map(|&(threads, name)| {
            let out = dir.path().join(name);
            cli_run(&config, &out, threads);
            out
        })
        .collect();
    let mut differing = Vec::new();
    let mut bytes = 0;
    for file in [experiment::GENERATIONS_FILE, experiment::SUMMARY_FILE, experiment::REMOVALS_FILE] {
        let reference = std::fs::read(outs[0].join(file)).unwrap();
        bytes += reference.len();
        for other in &outs[1..] {
            if std::fs::read(other.join(file)).unwrap() != reference {
                differing.push(format!("{file} in {}", other.display()));
            }
        }
    }
    let removals = std::fs::read_to_string(outs[0].join(experiment::REMOVALS_FILE)).unwrap().lines().count() - 1;
    let ok = differing.is_empty() && removals > 0;
    report(
        13,
        "byte-identical reruns",
        ok,
        &format!("3 runs (1, 4, 4 threads), {bytes} bytes, {removals} removals; differing: {differing:?}"),
    );
}
