//! NSGA-II over permutation-parameter genomes.
//!
//! Every random draw comes from a ChaCha stream keyed by
//! `(seed, generation, index)`, so a run is reproducible regardless of how
//! many worker threads evaluate the population.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{adjacency_check, bounding_area, closest_distances, resulted_adjacency, within_boundary};
use crate::extend::extend_layout;
use crate::model::{build_standard_tree, Problem, Representation};
use crate::perturb::{perturb, HalfStep, PermutationParams};
use crate::placement::{place, Floorplan};
use crate::treegraph::LayoutTree;
use crate::units::{area_units, Len, SCALE};

pub type Genome = Vec<u32>;

/// Gene layout for a problem: permutation genes, then one binary rotation
/// gene per block when enabled. Gene `k` ranges over `0..=ranges[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenomeSpec {
    pub representation: Representation,
    pub n: usize,
    pub rotation_genes: bool,
    pub ranges: Vec<u32>,
}

impl GenomeSpec {
    pub fn new(representation: Representation, n: usize, rotation_genes: bool) -> Self {
        let half = 4 * n as u32;
        let mut ranges = match representation {
            Representation::OtreeProceeding => vec![n as u32; n],
            Representation::BstarAscendDescend => vec![half; 2 * n],
            Representation::BstarAvailableNodes => vec![half; n],
        };
        if rotation_genes {
            ranges.extend(std::iter::repeat_n(1, n));
        }
        Self {
            representation,
            n,
            rotation_genes,
            ranges,
        }
    }

    pub fn for_problem(problem: &Problem) -> Self {
        Self::new(problem.representation(), problem.n(), problem.use_rotation_genes())
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    fn permutation_len(&self) -> usize {
        self.len() - if self.rotation_genes { self.n } else { 0 }
    }

    pub fn check(&self, genome: &[u32]) -> Result<()> {
        if genome.len() != self.len() {
            return Err(Error::InvalidParams(format!(
                "genome has {} genes, expected {}",
                genome.len(),
                self.len()
            )));
        }
        if let Some(k) = (0..genome.len()).find(|&k| genome[k] > self.ranges[k]) {
            return Err(Error::InvalidParams(format!("gene {k} = {} exceeds {}", genome[k], self.ranges[k])));
        }
        Ok(())
    }

    pub fn random(&self, rng: &mut impl Rng) -> Genome {
        self.ranges.iter().map(|&m| rng.random_range(0..=m)).collect()
    }

    /// Genome whose parameters reproduce the Standard Tree, rotations off.
    pub fn identity(&self) -> Genome {
        let mut g = self.encode(&PermutationParams::identity(self.representation, self.n));
        if self.rotation_genes {
            g.extend(std::iter::repeat_n(0, self.n));
        }
        g
    }

    /// Permutation genes for `params` (no rotation genes).
    pub fn encode(&self, params: &PermutationParams) -> Genome {
        match params {
            PermutationParams::Proceeding(v) => v.iter().map(|&p| p as u32).collect(),
            PermutationParams::AscendDescend(v) => v.iter().flat_map(|&(u, d)| [u.0, d.0]).collect(),
            PermutationParams::AvailableNodes(v) => v.iter().map(|p| p.0).collect(),
        }
    }

    /// Splits a genome into parameters and rotation flags.
    pub fn decode(&self, genome: &[u32]) -> (PermutationParams, Vec<bool>) {
        let (perm, rot) = genome.split_at(self.permutation_len());
        let params = match self.representation {
            Representation::OtreeProceeding => PermutationParams::Proceeding(perm.iter().map(|&g| g as usize).collect()),
            Representation::BstarAscendDescend => PermutationParams::AscendDescend(
                perm.chunks_exact(2).map(|c| (HalfStep(c[0]), HalfStep(c[1]))).collect(),
            ),
            Representation::BstarAvailableNodes => {
                PermutationParams::AvailableNodes(perm.iter().map(|&g| HalfStep(g)).collect())
            }
        };
        (params, rot.iter().map(|&g| g == 1).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MaximizeAdjacency,
    MinimizeBoundingArea,
    MinimizeTotalClosestDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// Every block lies inside the problem boundary.
    FitBoundary,
    /// Extension onto a rectangular boundary raises no penalty.
    NoPenalty,
    /// At least this many goal endpoints achieved; the shortfall is the
    /// violation.
    MinAdjacency(usize),
}

fn default_objectives() -> Vec<Objective> {
    vec![Objective::MaximizeAdjacency, Objective::MinimizeBoundingArea]
}

fn default_constraints() -> Vec<Constraint> {
    vec![Constraint::FitBoundary, Constraint::NoPenalty]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GAConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_objectives")]
    pub objectives: Vec<Objective>,
    #[serde(default = "default_constraints")]
    pub constraints: Vec<Constraint>,
    /// Minimum shared edge length for two blocks to count as adjacent.
    #[serde(default, with = "crate::units::serde_len")]
    pub min_shared: Len,
}

impl Default for GAConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 15,
            crossover_rate: 0.2,
            mutation_rate: 0.1,
            seed: 0,
            objectives: default_objectives(),
            constraints: default_constraints(),
            min_shared: 0,
        }
    }
}

impl GAConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.population < 4 || !self.population.is_multiple_of(2) {
            return bad(format!("population must be even and at least 4, got {}", self.population));
        }
        if self.generations < 1 {
            return bad("generations must be at least 1".into());
        }
        for (name, r) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{name} must lie in [0, 1], got {r}"));
            }
        }
        if self.objectives.is_empty() {
            return bad("at least one objective is required".into());
        }
        if self.min_shared < 0 {
            return bad("min_shared must be non-negative".into());
        }
        Ok(())
    }
}

/// A decoded and scored genome.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub genome: Genome,
    pub params: PermutationParams,
    pub rotations: Vec<bool>,
    pub floorplan: Floorplan,
    /// Minimization convention; maximized objectives are negated.
    pub objectives: Vec<f64>,
    pub violation: u32,
    /// Per-endpoint achieved adjacency count.
    pub adjacency: usize,
    /// Bounding area in square units.
    pub area: f64,
    pub rank: usize,
    pub crowding: f64,
}

impl Solution {
    pub fn feasible(&self) -> bool {
        self.violation == 0
    }
}

/// Decodes and scores genomes for one problem.
#[derive(Debug, Clone)]
pub struct Evaluator {
    problem: Problem,
    spec: GenomeSpec,
    standard: LayoutTree,
    objectives: Vec<Objective>,
    constraints: Vec<Constraint>,
    min_shared: Len,
}

impl Evaluator {
    pub fn new(problem: &Problem, config: &GAConfig) -> Self {
        Self {
            problem: problem.clone(),
            spec: GenomeSpec::for_problem(problem),
            standard: build_standard_tree(problem),
            objectives: config.objectives.clone(),
            constraints: config.constraints.clone(),
            min_shared: config.min_shared,
        }
    }

    pub fn spec(&self) -> &GenomeSpec {
        &self.spec
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn decode_and_evaluate(&self, genome: &[u32]) -> Result<Solution> {
        self.spec.check(genome)?;
        let (params, rotations) = self.spec.decode(genome);
        let tree = perturb(&self.standard, &params)?;
        let floorplan = place(&tree, self.problem.requirements(), &rotations);
        let report = adjacency_check(
            &resulted_adjacency(&floorplan.blocks, self.min_shared),
            self.problem.goal_pairs(),
        );
        let (bb, _) = bounding_area(&floorplan.blocks)?;
        let area = area_units(bb.w, bb.h);
        let objectives = self
            .objectives
            .iter()
            .map(|o| match o {
                Objective::MaximizeAdjacency => -(report.achieved_count as f64),
                Objective::MinimizeBoundingArea => area,
                Objective::MinimizeTotalClosestDistance => {
                    closest_distances(&floorplan.blocks).iter().sum::<f64>() / SCALE as f64
                }
            })
            .collect();
        let mut violation = 0;
        for c in &self.constraints {
            violation += match (c, self.problem.boundary()) {
                (Constraint::MinAdjacency(k), _) => k.saturating_sub(report.achieved_count) as u32,
                (Constraint::FitBoundary, Some(b)) => u32::from(!within_boundary(&floorplan.blocks, &b.polygon())?.0),
                (Constraint::NoPenalty, Some(b)) => match b.as_rect() {
                    Some(r) => u32::from(extend_layout(&floorplan, self.problem.requirements(), r)?.penalty),
                    None => 0,
                },
                (_, None) => 0,
            };
        }
        Ok(Solution {
            genome: genome.to_vec(),
            params,
            rotations,
            floorplan,
            objectives,
            violation,
            adjacency: report.achieved_count,
            area,
            rank: 0,
            crowding: 0.0,
        })
    }
}

/// Convenience wrapper over [`Evaluator::decode_and_evaluate`].
pub fn decode_and_evaluate(genome: &[u32], problem: &Problem, config: &GAConfig) -> Result<Solution> {
    Evaluator::new(problem, config).decode_and_evaluate(genome)
}

/// Pareto dominance under minimization.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Constraint-dominance: lower violation wins; equal violation falls back to
/// Pareto dominance.
pub fn constrained_dominates(a: (&[f64], u32), b: (&[f64], u32)) -> bool {
    match a.1.cmp(&b.1) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => dominates(a.0, b.0),
    }
}

/// Fast non-dominated sort. Returns fronts of indices, each in ascending
/// index order.
pub fn nondominated_sort(objectives: &[Vec<f64>], violations: &[u32]) -> Vec<Vec<usize>> {
    let n = objectives.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = ((&objectives[i][..], violations[i]), (&objectives[j][..], violations[j]));
            if constrained_dominates(a, b) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if constrained_dominates(b, a) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each member of a front (given as objective vectors).
#[allow(clippy::needless_range_loop)]
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n == 0 {
        return dist;
    }
    let m = front[0].len();
    for k in 0..m {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| front[a][k].total_cmp(&front[b][k]).then(a.cmp(&b)));
        let (lo, hi) = (front[order[0]][k], front[order[n - 1]][k]);
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..n.saturating_sub(1) {
                dist[order[w]] += (front[order[w + 1]][k] - front[order[w - 1]][k]) / (hi - lo);
            }
        }
    }
    dist
}

/// Statistics over the feasible members of one generation's population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_adjacency: Option<usize>,
    pub min_area: Option<f64>,
    pub feasible: usize,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Non-dominated distinct genomes seen over the whole run, at most one
    /// population's worth.
    pub pareto: Vec<Solution>,
    pub history: Vec<GenerationStats>,
    pub population: Vec<Solution>,
    pub cancelled: bool,
}

/// Called after every generation; returning `false` stops the run.
pub type Observer<'a> = dyn FnMut(&GenerationStats) -> bool + Send + 'a;

#[derive(Default)]
pub struct RunOptions<'a> {
    /// Worker threads for evaluation; `None` uses the global pool.
    pub threads: Option<usize>,
    pub observer: Option<Box<Observer<'a>>>,
}

fn stream(seed: u64, generation: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | index as u64);
    rng
}

fn stats(generation: usize, pop: &[Solution]) -> GenerationStats {
    let feasible: Vec<&Solution> = pop.iter().filter(|s| s.feasible()).collect();
    GenerationStats {
        generation,
        best_adjacency: feasible.iter().map(|s| s.adjacency).max(),
        min_area: feasible.iter().map(|s| s.area).reduce(f64::min),
        feasible: feasible.len(),
    }
}

/// Assigns rank and crowding in place, then keeps the best `keep` members.
/// When the last admitted front must be cut, each objective's
/// lexicographically best member is kept first, then the least crowded.
fn select(mut pool: Vec<Solution>, keep: usize) -> Vec<Solution> {
    let objs: Vec<Vec<f64>> = pool.iter().map(|s| s.objectives.clone()).collect();
    let viol: Vec<u32> = pool.iter().map(|s| s.violation).collect();
    let fronts = nondominated_sort(&objs, &viol);
    for (rank, front) in fronts.iter().enumerate() {
        let members: Vec<Vec<f64>> = front.iter().map(|&i| objs[i].clone()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&members)) {
            pool[i].rank = rank;
            pool[i].crowding = d;
        }
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(keep);
    for front in &fronts {
        if chosen.len() + front.len() <= keep {
            chosen.extend(front);
            continue;
        }
        let room = keep - chosen.len();
        let m = objs[front[0]].len();
        let mut picked: Vec<usize> = Vec::new();
        for k in 0..m {
            let lexi = |i: &usize| {
                let o = &objs[*i];
                std::iter::once(o[k]).chain(o.iter().copied()).collect::<Vec<f64>>()
            };
            let best = front
                .iter()
                .copied()
                .min_by(|a, b| {
                    let (la, lb) = (lexi(a), lexi(b));
                    la.iter()
                        .zip(&lb)
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(Ordering::Equal)
                        .then(a.cmp(b))
                })
                .expect("front is non-empty");
            if !picked.contains(&best) && picked.len() < room {
                picked.push(best);
            }
        }
        let mut rest: Vec<usize> = front.iter().copied().filter(|i| !picked.contains(i)).collect();
        rest.sort_by(|&a, &b| pool[b].crowding.total_cmp(&pool[a].crowding).then(a.cmp(&b)));
        picked.extend(rest.into_iter().take(room - picked.len()));
        picked.sort_unstable();
        chosen.extend(picked);
        break;
    }
    let mut slots: Vec<Option<Solution>> = pool.into_iter().map(Some).collect();
    chosen.into_iter().map(|i| slots[i].take().expect("chosen once")).collect()
}

/// Environmental selection over distinct genomes; duplicates only compete
/// when there are too few distinct genomes to fill the population.
fn survivors(pool: Vec<Solution>, keep: usize) -> Vec<Solution> {
    let mut seen = std::collections::HashSet::new();
    let (distinct, repeats): (Vec<Solution>, Vec<Solution>) =
        pool.into_iter().partition(|s| seen.insert(s.genome.clone()));
    if distinct.len() >= keep {
        select(distinct, keep)
    } else {
        select(distinct.into_iter().chain(repeats).collect(), keep)
    }
}

fn tournament<'p>(pop: &'p [Solution], rng: &mut impl Rng) -> &'p Solution {
    let a = &pop[rng.random_range(0..pop.len())];
    let b = &pop[rng.random_range(0..pop.len())];
    match a.rank.cmp(&b.rank) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal if b.crowding > a.crowding => b,
        Ordering::Equal => a,
    }
}

fn offspring(spec: &GenomeSpec, pop: &[Solution], config: &GAConfig, generation: usize, pair: usize) -> [Genome; 2] {
    let mut rng = stream(config.seed, generation, pair);
    let mut a = tournament(pop, &mut rng).genome.clone();
    let mut b = tournament(pop, &mut rng).genome.clone();
    for k in 0..a.len() {
        if rng.random_bool(config.crossover_rate) {
            std::mem::swap(&mut a[k], &mut b[k]);
        }
    }
    for child in [&mut a, &mut b] {
        for (k, gene) in child.iter_mut().enumerate() {
            if rng.random_bool(config.mutation_rate) {
                *gene = rng.random_range(0..=spec.ranges[k]);
            }
        }
    }
    [a, b]
}

fn evaluate_all(ev: &Evaluator, genomes: Vec<Genome>) -> Result<Vec<Solution>> {
    genomes.par_iter().map(|g| ev.decode_and_evaluate(g)).collect()
}

fn by_objectives(a: &Solution, b: &Solution) -> Ordering {
    a.objectives
        .iter()
        .zip(&b.objectives)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.violation.cmp(&b.violation))
        .then_with(|| a.genome.cmp(&b.genome))
}

/// Merges the population's first front into the archive and keeps the
/// non-dominated distinct genomes, at most `cap` of them.
fn update_archive(archive: Vec<Solution>, pop: &[Solution], cap: usize) -> Vec<Solution> {
    let mut pool = archive;
    pool.extend(pop.iter().filter(|s| s.rank == 0).cloned());
    pool.sort_by(by_objectives);
    pool.dedup_by(|a, b| a.genome == b.genome);
    let objs: Vec<Vec<f64>> = pool.iter().map(|s| s.objectives.clone()).collect();
    let viol: Vec<u32> = pool.iter().map(|s| s.violation).collect();
    let first = nondominated_sort(&objs, &viol).swap_remove(0);
    let mut slots: Vec<Option<Solution>> = pool.into_iter().map(Some).collect();
    let front: Vec<Solution> = first.into_iter().map(|i| slots[i].take().expect("index once")).collect();
    let mut kept = if front.len() > cap { select(front, cap) } else { front };
    for s in &mut kept {
        s.rank = 0;
    }
    kept.sort_by(by_objectives);
    kept
}

/// Runs NSGA-II with elitist (mu + lambda) replacement.
pub fn nsga2_run(problem: &Problem, config: &GAConfig, options: RunOptions<'_>) -> Result<RunResult> {
    config.validate()?;
    let RunOptions { threads, mut observer } = options;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    pool.install(|| {
        let ev = Evaluator::new(problem, config);
        let spec = ev.spec().clone();
        let p = config.population;

        let initial: Vec<Genome> = (0..p).map(|i| spec.random(&mut stream(config.seed, 0, i))).collect();
        let mut pop = survivors(evaluate_all(&ev, initial)?, p);
        let mut archive = update_archive(Vec::new(), &pop, p);
        let mut history = vec![stats(0, &pop)];
        let mut cancelled = observer.as_mut().is_some_and(|f| !f(&history[0]));

        for generation in 1..=config.generations {
            if cancelled {
                break;
            }
            let children: Vec<Genome> = (0..p / 2)
                .into_par_iter()
                .flat_map_iter(|pair| offspring(&spec, &pop, config, generation, pair))
                .collect();
            let mut merged = pop;
            merged.extend(evaluate_all(&ev, children)?);
            pop = survivors(merged, p);
            archive = update_archive(archive, &pop, p);
            let s = stats(generation, &pop);
            log::debug!("generation {generation}: {s:?}");
            cancelled = observer.as_mut().is_some_and(|f| !f(&s));
            history.push(s);
        }
        Ok(RunResult {
            pareto: archive,
            history,
            population: pop,
            cancelled,
        })
    })
}
