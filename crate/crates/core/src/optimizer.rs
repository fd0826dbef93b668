//! Derivative-free search for exchange-pulse durations: Nelder–Mead simplex,
//! a real-coded genetic algorithm, and their combination over fixed edge
//! templates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoded::{
    canonical_tau, cnot, leakage_of, GraphLabel, logical_block, makhlin_raw, pulse_coefficient, sequence_unitary, ConnectivityGraph,
    GateSequence, LogicalEncoding,
};
use crate::error::{Error, Result};
use crate::linalg::{phase_min_distance, polar_unitary, CMatrix, C64, ZERO};

/// What the sequence should implement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Any gate locally equivalent to CNOT.
    #[serde(rename = "class")]
    CnotClass,
    /// CNOT itself, up to a global phase.
    #[serde(rename = "exact")]
    ExactCnot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub w_leak: f64,
    pub w_inv: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { w_leak: 1.0, w_inv: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub target: Target,
    pub weights: Weights,
}

impl Objective {
    pub fn new(target: Target) -> Self {
        Objective { target, weights: Weights::default() }
    }

    /// Objective value of a logical block `m` (4×4, possibly non-unitary).
    pub fn of_block(&self, m: &CMatrix) -> f64 {
        let leak = leakage_of(m);
        match self.target {
            Target::CnotClass => {
                let w = polar_unitary(m);
                let (g1, g2) = makhlin_raw(&w);
                self.weights.w_leak * leak
                    + self.weights.w_inv * (g1.norm_sqr() + (g2 - C64::new(1.0, 0.0)).norm_sqr() / 9.0)
            }
            Target::ExactCnot => phase_min_distance(m, &cnot()) + self.weights.w_leak * leak,
        }
    }
}

/// CNOT-class objective through the full matrix route.
pub fn objective_cnot_class(
    seq: &GateSequence,
    graph: &ConnectivityGraph,
    enc: &LogicalEncoding,
    weights: Weights,
) -> Result<f64> {
    let u = sequence_unitary(seq, graph, &enc.sector)?;
    let (m, _) = logical_block(&u, enc);
    Ok(Objective { target: Target::CnotClass, weights }.of_block(&m))
}

/// Exact-CNOT objective through the full matrix route.
pub fn objective_exact_cnot(
    seq: &GateSequence,
    graph: &ConnectivityGraph,
    enc: &LogicalEncoding,
    weights: Weights,
) -> Result<f64> {
    let u = sequence_unitary(seq, graph, &enc.sector)?;
    let (m, _) = logical_block(&u, enc);
    Ok(Objective { target: Target::ExactCnot, weights }.of_block(&m))
}

/// Fast evaluation of a fixed template: pulses act on the four logical
/// columns only, through the swap permutation of each edge.
#[derive(Debug, Clone)]
pub struct TemplateEvaluator {
    perms: Vec<Vec<usize>>,
    basis: Vec<[C64; 4]>,
    objective: Objective,
}

impl TemplateEvaluator {
    pub fn new(
        objective: Objective,
        graph: &ConnectivityGraph,
        enc: &LogicalEncoding,
        template: &[(usize, usize)],
    ) -> Result<Self> {
        let mut perms = Vec::with_capacity(template.len());
        for &(i, j) in template {
            if !graph.contains(i, j) {
                return Err(Error::EdgeNotInGraph(i, j));
            }
            perms.push(enc.sector.swap_permutation(i, j)?);
        }
        let b = &enc.logical_basis;
        let basis = (0..b.nrows()).map(|r| [b[(r, 0)], b[(r, 1)], b[(r, 2)], b[(r, 3)]]).collect();
        Ok(TemplateEvaluator { perms, basis, objective })
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    /// Logical block of the template with durations `taus`, global phases dropped.
    pub fn block(&self, taus: &[f64]) -> CMatrix {
        let mut v = self.basis.clone();
        let mut scratch = v.clone();
        for (perm, &tau) in self.perms.iter().zip(taus) {
            let k = pulse_coefficient(tau);
            for (r, row) in scratch.iter_mut().enumerate() {
                let a = &v[r];
                let b = &v[perm[r]];
                for col in 0..4 {
                    row[col] = a[col] + k * (a[col] - b[col]);
                }
            }
            std::mem::swap(&mut v, &mut scratch);
        }
        let mut m = CMatrix::zeros(4, 4);
        for (brow, vrow) in self.basis.iter().zip(&v) {
            for i in 0..4 {
                if brow[i] == ZERO {
                    continue;
                }
                let bc = brow[i].conj();
                for j in 0..4 {
                    m[(i, j)] += bc * vrow[j];
                }
            }
        }
        m
    }

    pub fn value(&self, taus: &[f64]) -> f64 {
        self.objective.of_block(&self.block(taus))
    }
}

/// Nelder–Mead settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmConfig {
    pub max_iters: usize,
    /// Stop when every vertex lies within this max-norm distance of the best.
    pub tolerance: f64,
    pub initial_step: f64,
    /// Stop as soon as the best value drops to this level.
    pub target_value: f64,
}

impl Default for NmConfig {
    fn default() -> Self {
        NmConfig { max_iters: 2000, tolerance: 1e-10, initial_step: 0.05, target_value: f64::NEG_INFINITY }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Best value after each iteration.
    pub history: Vec<f64>,
}

/// Simplex minimization with reflection 1, expansion 2, contraction 0.5 and
/// shrink 0.5.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], cfg: &NmConfig) -> NmResult {
    let n = x0.len();
    assert!(n >= 1, "nelder_mead needs at least one dimension");
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += cfg.initial_step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;
    let mut history = Vec::new();
    let mut iterations = 0;

    let order = |vals: &[f64]| {
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        idx
    };

    while iterations < cfg.max_iters {
        let idx = order(&vals);
        let (best, worst, second) = (idx[0], idx[n], idx[n - 1.min(n)]);
        let spread = pts
            .iter()
            .map(|p| p.iter().zip(&pts[best]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread < cfg.tolerance || vals[best] <= cfg.target_value {
            break;
        }
        iterations += 1;
        let second = if n == 1 { best } else { second };

        let mut centroid = vec![0.0; n];
        for &k in &idx[..n] {
            for d in 0..n {
                centroid[d] += pts[k][d];
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }
        let along = |t: f64| -> Vec<f64> { (0..n).map(|d| centroid[d] + t * (pts[worst][d] - centroid[d])).collect() };

        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[best] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
        } else if fr < vals[second] {
            pts[worst] = xr;
            vals[worst] = fr;
        } else {
            let (xc, fc) = if fr < vals[worst] {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < vals[worst].min(fr) {
                pts[worst] = xc;
                vals[worst] = fc;
            } else {
                let xb = pts[best].clone();
                for k in 0..=n {
                    if k == best {
                        continue;
                    }
                    for d in 0..n {
                        pts[k][d] = xb[d] + 0.5 * (pts[k][d] - xb[d]);
                    }
                    vals[k] = f(&pts[k]);
                    evals += 1;
                }
            }
        }
        history.push(vals.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let best = order(&vals)[0];
    NmResult { x: pts[best].clone(), f: vals[best], iterations, evaluations: evals, history }
}

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Wrap coordinates around instead of clamping.
    pub periodic: bool,
}

impl BoxDomain {
    pub fn unit_periodic(dim: usize) -> Self {
        BoxDomain { lower: vec![0.0; dim], upper: vec![1.0; dim], periodic: true }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn fold(&self, x: &mut [f64]) {
        for (d, v) in x.iter_mut().enumerate() {
            let (lo, hi) = (self.lower[d], self.upper[d]);
            if self.periodic {
                let w = hi - lo;
                *v = lo + (*v - lo).rem_euclid(w);
                if *v >= hi {
                    *v = lo;
                }
            } else {
                *v = v.clamp(lo, hi);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig { population_size: 64, generations: 200, mutation_rate: 0.1, crossover_rate: 0.7, seed: 0 }
    }
}

/// Seed of an independent RNG stream derived from a master seed.
pub fn stream_seed(master: u64, a: u64, b: u64) -> u64 {
    let mut z = master ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Population of a real-coded genetic algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl Population {
    pub fn random(domain: &BoxDomain, size: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members = (0..size)
            .map(|_| (0..domain.dim()).map(|d| rng.random_range(domain.lower[d]..domain.upper[d])).collect())
            .collect();
        Population { members, values: vec![f64::INFINITY; size] }
    }

    /// Evaluates every member concurrently; results land at their own index.
    pub fn evaluate<F: Fn(&[f64]) -> f64 + Sync>(&mut self, f: &F) {
        self.values = self.members.par_iter().map(|x| f(x)).collect();
    }

    pub fn best(&self) -> (usize, f64) {
        let mut b = 0;
        for i in 1..self.values.len() {
            if self.values[i] < self.values[b] {
                b = i;
            }
        }
        (b, self.values[b])
    }

    /// Indices sorted by value, ties broken by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]).then(a.cmp(&b)));
        idx
    }

    /// Next generation: the best member survives, the rest come from size-2
    /// tournaments, uniform crossover and Gaussian mutation with σ equal to
    /// 5% of the box width. Values of the new members are unset.
    pub fn breed(&self, domain: &BoxDomain, cfg: &GaConfig, generation: u64) -> Population {
        let n = self.members.len();
        let (elite, elite_val) = self.best();
        let mut members = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        members.push(self.members[elite].clone());
        values.push(elite_val);
        for i in 1..n {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, generation + 1, i as u64));
            let pick = |rng: &mut ChaCha8Rng| {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                if self.values[b] < self.values[a] {
                    b
                } else {
                    a
                }
            };
            let p1 = pick(&mut rng);
            let p2 = pick(&mut rng);
            let mut child = self.members[p1].clone();
            if rng.random::<f64>() < cfg.crossover_rate {
                for d in 0..child.len() {
                    if rng.random::<bool>() {
                        child[d] = self.members[p2][d];
                    }
                }
            }
            for d in 0..child.len() {
                if rng.random::<f64>() < cfg.mutation_rate {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    child[d] += 0.05 * (domain.upper[d] - domain.lower[d]) * z;
                }
            }
            domain.fold(&mut child);
            members.push(child);
            values.push(f64::INFINITY);
        }
        Population { members, values }
    }
}

/// Plain genetic search; returns the final population sorted by value.
pub fn genetic_search<F: Fn(&[f64]) -> f64 + Sync>(f: &F, domain: &BoxDomain, cfg: &GaConfig) -> Vec<(Vec<f64>, f64)> {
    let mut pop = Population::random(domain, cfg.population_size, stream_seed(cfg.seed, 0, 0));
    pop.evaluate(f);
    for g in 0..cfg.generations {
        pop = pop.breed(domain, cfg, g as u64);
        pop.evaluate(f);
    }
    pop.ranking().into_iter().map(|i| (pop.members[i].clone(), pop.values[i])).collect()
}

/// Hyperparameters of the combined search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub population_size: usize,
    pub generations: usize,
    pub nm_max_iters: usize,
    pub nm_tolerance: f64,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub seed: u64,
    pub restarts: usize,
    pub success_threshold: f64,
    /// Generations between Nelder–Mead polishing rounds.
    pub polish_every: usize,
    /// Best members not yet polished that are refined in each round.
    pub polish_elites: usize,
    pub nm_initial_step: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population_size: 64,
            generations: 60,
            nm_max_iters: 3000,
            nm_tolerance: 1e-12,
            mutation_rate: 0.15,
            crossover_rate: 0.7,
            seed: 0,
            restarts: 20,
            success_threshold: 1e-8,
            polish_every: 5,
            polish_elites: 8,
            nm_initial_step: 0.05,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.population_size >= 2
            && self.generations >= 1
            && self.nm_max_iters >= 1
            && self.nm_tolerance > 0.0
            && self.mutation_rate > 0.0
            && self.mutation_rate < 1.0
            && self.crossover_rate >= 0.0
            && self.crossover_rate <= 1.0
            && self.restarts >= 1
            && self.success_threshold > 0.0
            && self.polish_every >= 1
            && self.nm_initial_step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument("search configuration out of range".into()))
        }
    }

    fn ga(&self, seed: u64) -> GaConfig {
        GaConfig {
            population_size: self.population_size,
            generations: self.generations,
            mutation_rate: self.mutation_rate,
            crossover_rate: self.crossover_rate,
            seed,
        }
    }

    fn nm(&self) -> NmConfig {
        NmConfig {
            max_iters: self.nm_max_iters,
            tolerance: self.nm_tolerance,
            initial_step: self.nm_initial_step,
            target_value: f64::NEG_INFINITY,
        }
    }
}

/// Progress report emitted once per generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub restart: usize,
    pub generation: usize,
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub success: bool,
    pub evaluations: usize,
    /// Restart that produced the best point.
    pub restart: usize,
    /// Best value reached in each restart that ran.
    pub restart_values: Vec<f64>,
}

/// Repeated Nelder–Mead from the current best until it stops improving.
fn polish<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], fx: f64, cfg: &SearchConfig, evals: &mut usize) -> (Vec<f64>, f64) {
    let mut x = x.to_vec();
    let mut fx = fx;
    let mut step = cfg.nm_initial_step;
    for _ in 0..8 {
        let nm = NmConfig { initial_step: step, ..cfg.nm() };
        let r = nelder_mead(f, &x, &nm);
        *evals += r.evaluations;
        let improved = r.f < fx * (1.0 - 1e-3);
        if r.f < fx {
            x = r.x;
            fx = r.f;
        }
        if !improved {
            break;
        }
        // restart with a smaller simplex around the new point
        step = (step * 0.5).max(1e-6);
    }
    (x, fx)
}

/// Genetic search on the periodic unit box with periodic Nelder–Mead polishing
/// of the best members, repeated over seeded restarts until one reaches the
/// success threshold.
pub fn minimize_hybrid<F: Fn(&[f64]) -> f64 + Sync>(
    f: &F,
    dim: usize,
    cfg: &SearchConfig,
    progress: &(dyn Fn(&Progress) + Sync),
) -> Result<HybridResult> {
    cfg.validate()?;
    if dim == 0 {
        return Err(Error::InvalidArgument("search dimension must be at least 1".into()));
    }
    let domain = BoxDomain::unit_periodic(dim);
    let wrapped = |x: &[f64]| {
        let mut y = x.to_vec();
        domain.fold(&mut y);
        f(&y)
    };
    let mut evals = 0usize;
    let mut best: Option<(Vec<f64>, f64, usize)> = None;
    let mut restart_values = Vec::new();
    for r in 0..cfg.restarts {
        let ga = cfg.ga(stream_seed(cfg.seed, 1 + r as u64, 0));
        let mut pop = Population::random(&domain, ga.population_size, stream_seed(ga.seed, 0, 0));
        pop.evaluate(&wrapped);
        evals += pop.members.len();
        let mut hit = false;
        // members already refined; only the carried-over elite keeps its flag
        let mut polished = vec![false; pop.members.len()];
        for g in 0..ga.generations {
            if g > 0 {
                let (elite, _) = pop.best();
                let keep = polished[elite];
                pop = pop.breed(&domain, &ga, g as u64);
                pop.evaluate(&wrapped);
                evals += pop.members.len() - 1;
                polished = vec![false; pop.members.len()];
                polished[0] = keep;
            }
            if (g + 1) % cfg.polish_every == 0 || g + 1 == ga.generations {
                let top: Vec<usize> =
                    pop.ranking().into_iter().filter(|&i| !polished[i]).take(cfg.polish_elites.max(1)).collect();
                let refined: Vec<(Vec<f64>, f64, usize)> = top
                    .par_iter()
                    .map(|&i| {
                        let mut e = 0;
                        let (x, fx) = polish(&wrapped, &pop.members[i], pop.values[i], cfg, &mut e);
                        (x, fx, e)
                    })
                    .collect();
                for (&i, (mut x, fx, e)) in top.iter().zip(refined) {
                    domain.fold(&mut x);
                    pop.members[i] = x;
                    pop.values[i] = fx;
                    polished[i] = true;
                    evals += e;
                }
            }
            let (_, b) = pop.best();
            progress(&Progress { restart: r, generation: g, best: b });
            if b < cfg.success_threshold {
                hit = true;
                break;
            }
        }
        let (bi, bv) = pop.best();
        let (mut x, mut fx) = (pop.members[bi].clone(), bv);
        if hit {
            // drive the solution well below the threshold
            let (x2, f2) = polish(&wrapped, &x, fx, cfg, &mut evals);
            if f2 < fx {
                x = x2;
                fx = f2;
            }
        }
        domain.fold(&mut x);
        restart_values.push(fx);
        if best.as_ref().map_or(true, |b| fx < b.1) {
            best = Some((x, fx, r));
        }
        if fx < cfg.success_threshold {
            break;
        }
    }
    let (x, fx, restart) = best.expect("at least one restart");
    Ok(HybridResult { success: fx < cfg.success_threshold, x, f: fx, evaluations: evals, restart, restart_values })
}

/// Result of [`hybrid_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub sequence: GateSequence,
    pub objective_value: f64,
    pub success: bool,
    pub evaluations: usize,
    pub restart: usize,
    pub restart_values: Vec<f64>,
}

/// Searches durations for a fixed edge template.
pub fn hybrid_search(
    objective: &Objective,
    graph: &ConnectivityGraph,
    enc: &LogicalEncoding,
    template: &[(usize, usize)],
    cfg: &SearchConfig,
    progress: &(dyn Fn(&Progress) + Sync),
) -> Result<SearchOutcome> {
    if template.is_empty() {
        return Err(Error::InvalidArgument("template must contain at least one pulse".into()));
    }
    let ev = TemplateEvaluator::new(*objective, graph, enc, template)?;
    let f = |x: &[f64]| ev.value(x);
    let r = minimize_hybrid(&f, template.len(), cfg, progress)?;
    let mut sequence = GateSequence::new(graph, template, &r.x);
    sequence.seed = Some(cfg.seed);
    let value = ev.value(&sequence.pulses.iter().map(|p| p.tau).collect::<Vec<_>>());
    sequence.objective_value = Some(value);
    Ok(SearchOutcome {
        sequence,
        objective_value: value,
        success: value < cfg.success_threshold,
        evaluations: r.evaluations,
        restart: r.restart,
        restart_values: r.restart_values,
    })
}

/// Random edge templates of length `length` tried one after another with
/// [`hybrid_search`]; stops at the first success.
pub fn template_search(
    objective: &Objective,
    graph: &ConnectivityGraph,
    enc: &LogicalEncoding,
    length: usize,
    n_templates: usize,
    cfg: &SearchConfig,
    progress: &(dyn Fn(&Progress) + Sync),
) -> Result<Option<SearchOutcome>> {
    let mut best: Option<SearchOutcome> = None;
    for k in 0..n_templates {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, 0x7E4D, k as u64));
        let template: Vec<(usize, usize)> =
            (0..length).map(|_| graph.edges[rng.random_range(0..graph.edges.len())]).collect();
        let sub = SearchConfig { seed: stream_seed(cfg.seed, k as u64, 1), ..*cfg };
        let out = hybrid_search(objective, graph, enc, &template, &sub, progress)?;
        let better = best.as_ref().map_or(true, |b| out.objective_value < b.objective_value);
        let done = out.success;
        if better {
            best = Some(out);
        }
        if done {
            break;
        }
    }
    Ok(best)
}

const D_CLASS_15: &[(usize, usize)] = &[
    (2, 4), (2, 3), (4, 5), (2, 4), (4, 5), (0, 2), (2, 4), (0, 2), (2, 3), (3, 5),
    (0, 2), (2, 3), (2, 4), (3, 5), (2, 3),
];

const D_CLASS_16: &[(usize, usize)] = &[
    (2, 4), (2, 3), (4, 5), (2, 4), (3, 5), (4, 5), (0, 2), (2, 4), (0, 2), (2, 3),
    (3, 5), (0, 2), (2, 3), (2, 4), (3, 5), (2, 3),
];

const D_CLASS_19: &[(usize, usize)] = &[
    (2, 3), (0, 2), (0, 1), (3, 5), (4, 5), (0, 2), (2, 4), (3, 4), (2, 4), (4, 5),
    (2, 4), (3, 4), (2, 3), (1, 2), (3, 5), (0, 2), (3, 4), (1, 2), (2, 3),
];

const E_CLASS_17: &[(usize, usize)] = &[
    (2, 3), (3, 4), (4, 5), (3, 4), (2, 3), (1, 2), (0, 1), (1, 2), (2, 3), (1, 2),
    (0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (3, 4), (2, 3),
];

const E_CLASS_18: &[(usize, usize)] = &[
    (2, 3), (3, 4), (4, 5), (3, 4), (2, 3), (1, 2), (2, 3), (0, 1), (1, 2), (2, 3),
    (1, 2), (0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (3, 4), (2, 3),
];

const E_CLASS_19: &[(usize, usize)] = &[
    (2, 3), (1, 2), (0, 1), (1, 2), (3, 4), (2, 3), (4, 5), (3, 4), (2, 3), (4, 5),
    (3, 4), (2, 3), (1, 2), (0, 1), (3, 4), (4, 5), (3, 4), (1, 2), (2, 3),
];

/// Relabels spin `s` as `s ± 3`, exchanging the two qubits; carries graph d
/// onto graph f.
fn exchange_qubits(t: &[(usize, usize)]) -> Vec<(usize, usize)> {
    t.iter()
        .map(|&(i, j)| {
            let (a, b) = ((i + 3) % 6, (j + 3) % 6);
            (a.min(b), a.max(b))
        })
        .collect()
}

/// Edge templates known to admit a solution, by graph, target and length.
pub fn preset_template(label: GraphLabel, target: Target, length: usize) -> Option<Vec<(usize, usize)>> {
    let d = |n: usize| match n {
        15 => Some(D_CLASS_15),
        16 => Some(D_CLASS_16),
        19 => Some(D_CLASS_19),
        _ => None,
    };
    match (label, target) {
        (GraphLabel::HybridLinearD, Target::CnotClass) => d(length).map(|t| t.to_vec()),
        (GraphLabel::HybridAltF, Target::CnotClass) => d(length).map(exchange_qubits),
        (GraphLabel::TripleDotLinearE, Target::CnotClass) => match length {
            17 => Some(E_CLASS_17.to_vec()),
            18 => Some(E_CLASS_18.to_vec()),
            19 => Some(E_CLASS_19.to_vec()),
            _ => None,
        },
        _ => None,
    }
}

/// Closest fraction `p/q` with `q ≤ max_den`.
pub fn nearest_fraction(x: f64, max_den: u32) -> (i64, i64) {
    let mut best = (x.round() as i64, 1i64);
    let mut err = (x - best.0 as f64).abs();
    for q in 2..=max_den as i64 {
        let p = (x * q as f64).round() as i64;
        let e = (x - p as f64 / q as f64).abs();
        if e < err - 1e-15 {
            best = (p, q);
            err = e;
        }
    }
    best
}

/// Sequence with every duration snapped to a nearby fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct Rationalized {
    pub sequence: GateSequence,
    pub fractions: Vec<(i64, i64)>,
    pub objective_value: f64,
    pub success: bool,
}

/// Snaps durations to fractions with denominators up to `max_den` and
/// re-evaluates the objective through the full matrix route.
pub fn rationalize(
    seq: &GateSequence,
    graph: &ConnectivityGraph,
    enc: &LogicalEncoding,
    objective: &Objective,
    max_den: u32,
    success_threshold: f64,
) -> Result<Rationalized> {
    let fractions: Vec<(i64, i64)> = seq.pulses.iter().map(|p| nearest_fraction(p.tau, max_den)).collect();
    let mut out = seq.clone();
    for (p, &(a, b)) in out.pulses.iter_mut().zip(&fractions) {
        p.tau = canonical_tau(a as f64 / b as f64);
    }
    let u = sequence_unitary(&out, graph, &enc.sector)?;
    let (m, _) = logical_block(&u, enc);
    let v = objective.of_block(&m);
    out.objective_value = Some(v);
    Ok(Rationalized { sequence: out, fractions, objective_value: v, success: v < success_threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoded::{exchange_unitary, GraphLabel, SpinSector};

    #[test]
    fn nm_bowl() {
        let r = nelder_mead(|x| x.iter().map(|v| v * v).sum(), &[1.0, 1.0], &NmConfig::default());
        assert!(r.f < 1e-10);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn nm_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let cfg = NmConfig { max_iters: 500, initial_step: 0.1, ..NmConfig::default() };
        let r = nelder_mead(rosen, &[-1.2, 1.0], &cfg);
        assert!(r.f < 1e-6, "{}", r.f);
        assert!(r.f <= rosen(&[-1.2, 1.0]));
    }

    #[test]
    fn ga_constant_and_bowl() {
        let dom = BoxDomain { lower: vec![-1.0; 8], upper: vec![1.0; 8], periodic: false };
        let cfg = GaConfig { population_size: 64, generations: 200, seed: 11, ..GaConfig::default() };
        let out = genetic_search(&|x: &[f64]| x.iter().map(|v| v * v).sum::<f64>(), &dom, &cfg);
        assert!(out[0].1 < 1e-3, "{}", out[0].1);
        let again = genetic_search(&|x: &[f64]| x.iter().map(|v| v * v).sum::<f64>(), &dom, &cfg);
        assert_eq!(out, again);
        let flat = genetic_search(&|_: &[f64]| 2.5, &dom, &GaConfig { generations: 5, ..cfg });
        assert!(flat.iter().all(|(_, v)| *v == 2.5));
    }

    #[test]
    fn hybrid_finds_swap_duration() {
        let s = SpinSector::full(2).unwrap();
        let swap = exchange_unitary(0, 1, 0.5, &s).unwrap();
        let f = |x: &[f64]| phase_min_distance(&exchange_unitary(0, 1, x[0], &s).unwrap(), &swap);
        let cfg = SearchConfig { restarts: 2, generations: 20, population_size: 8, ..SearchConfig::default() };
        let r = minimize_hybrid(&f, 1, &cfg, &|_| {}).unwrap();
        assert!(r.success);
        assert!((r.x[0] - 0.5).abs() < 1e-6, "{}", r.x[0]);
    }

    #[test]
    fn fast_and_full_routes_agree() {
        let g = ConnectivityGraph::preset(GraphLabel::HybridLinearD).unwrap();
        let enc = LogicalEncoding::for_graph(&g).unwrap();
        let template: Vec<(usize, usize)> = vec![(2, 3), (0, 1), (2, 4), (1, 2), (3, 5), (2, 3)];
        let taus = [0.13, 0.71, 0.42, 0.25, 0.9, 0.33];
        let seq = GateSequence::new(&g, &template, &taus);
        for target in [Target::CnotClass, Target::ExactCnot] {
            let obj = Objective::new(target);
            let ev = TemplateEvaluator::new(obj, &g, &enc, &template).unwrap();
            let fast = ev.value(&taus);
            let full = match target {
                Target::CnotClass => objective_cnot_class(&seq, &g, &enc, obj.weights).unwrap(),
                Target::ExactCnot => objective_exact_cnot(&seq, &g, &enc, obj.weights).unwrap(),
            };
            assert!((fast - full).abs() < 1e-12, "{fast} vs {full}");
        }
    }

    #[test]
    fn empty_sequence_objectives() {
        let id = CMatrix::identity(4, 4);
        let w = Weights { w_leak: 1.0, w_inv: 2.0 };
        let v = Objective { target: Target::CnotClass, weights: w }.of_block(&id);
        assert!((v - 2.0 * (1.0 + 4.0 / 9.0)).abs() < 1e-14);
        let v = Objective::new(Target::ExactCnot).of_block(&id);
        assert!((v - 2.0).abs() < 1e-14);
        assert!(Objective::new(Target::ExactCnot).of_block(&cnot()) < 1e-14);
        let v = Objective::new(Target::CnotClass).of_block(&CMatrix::zeros(4, 4));
        assert!(v >= 1.0);
    }

    #[test]
    fn fractions() {
        assert_eq!(nearest_fraction(0.3333334, 24), (1, 3));
        assert_eq!(nearest_fraction(0.5, 24), (1, 2));
        assert_eq!(nearest_fraction(0.0, 24), (0, 1));
        assert_eq!(nearest_fraction(0.95834, 24), (23, 24));
    }
}
