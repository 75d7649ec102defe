//! NSGA-II search over assembly sequences.
//!
//! Each run starts from a greedy-disassembly population and applies order
//! crossover, swap mutation, cut-and-paste and break-and-join at fixed
//! rates. Survivors are chosen from parents plus offspring (elitist), with
//! feasible chromosomes always ahead of infeasible ones. Independent runs
//! use separate streams of one seeded ChaCha generator and are pooled at
//! the end.

mod init;
mod operators;
mod sort;

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use init::{greedy_disassembly, initialize_population};
pub use operators::{
    break_and_join, break_and_join_at, cut_and_paste, cut_and_paste_at, mutate, order_crossover,
    order_crossover_at, random_chromosome, random_direction, swap_genes,
};
pub use sort::{
    crowding_by_front, crowding_distance, dominates, dominates_flagged, nondominated_sort,
    CROWDING_SENTINEL,
};

use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::relations::RelationSet;
use crate::sequence::{evaluate, Chromosome, Evaluation, FitnessPair};

/// Genetic algorithm parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    /// Population size; `None` means one member per part.
    pub population: Option<usize>,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub cut_and_paste_rate: f64,
    pub break_and_join_rate: f64,
    pub generations: usize,
    /// Independent restarts pooled into the final result.
    pub iterations: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: None,
            crossover_rate: 0.2,
            mutation_rate: 0.1,
            cut_and_paste_rate: 0.35,
            break_and_join_rate: 0.35,
            generations: 100,
            iterations: 10,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
            ("cut_and_paste_rate", self.cut_and_paste_rate),
            ("break_and_join_rate", self.break_and_join_rate),
        ];
        for (name, r) in rates {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::ConfigInvalid(format!("{name} = {r} is outside [0, 1]")));
            }
        }
        if self.population.is_some_and(|p| p < 2) {
            return Err(Error::ConfigInvalid("population must be at least 2".into()));
        }
        if self.iterations == 0 {
            return Err(Error::ConfigInvalid("iterations must be at least 1".into()));
        }
        Ok(())
    }

    /// Population size used for a product of `eta` parts.
    pub fn population_for(&self, eta: usize) -> usize {
        self.population.unwrap_or(eta).max(2)
    }
}

/// A ranked population member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub chromosome: Chromosome,
    pub evaluation: Evaluation,
    pub rank: usize,
    pub crowding: f64,
}

/// Per-generation summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub mean_fitness1: f64,
    pub mean_fitness2: f64,
    pub feasible_count: usize,
    pub best_sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub population: Vec<Member>,
    pub history: Vec<GenerationStats>,
    /// Initial chromosomes that came from the random fallback.
    pub fallback_inits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveResult {
    pub runs: Vec<RunResult>,
    /// Distinct chromosomes of all final populations, ranked together.
    pub pooled: Vec<Member>,
    /// Index into `pooled` of the chromosome with the highest fitness sum.
    pub best: usize,
}

impl EvolveResult {
    pub fn best_member(&self) -> &Member {
        &self.pooled[self.best]
    }

    pub fn front(&self) -> impl Iterator<Item = &Member> {
        self.pooled.iter().filter(|m| m.rank == 0)
    }
}

fn downward(c: &Chromosome) -> usize {
    c.directions.iter().filter(|&&d| d == Direction::NEG_Z).count()
}

/// Ordering used to pick the best-sum chromosome: feasible first, then the
/// larger sum, then the larger fitness 2, then more parts placed along -z.
/// Earlier index wins full ties.
fn best_key_cmp(a: (&Chromosome, &Evaluation), b: (&Chromosome, &Evaluation)) -> Ordering {
    a.1.feasible
        .cmp(&b.1.feasible)
        .then(a.1.fitness.sum().total_cmp(&b.1.fitness.sum()))
        .then(a.1.fitness.fitness2.total_cmp(&b.1.fitness.fitness2))
        .then(downward(a.0).cmp(&downward(b.0)))
}

/// Index of the best-sum chromosome (first one among equals).
pub fn best_sum_index<'a>(
    items: impl IntoIterator<Item = (&'a Chromosome, &'a Evaluation)>,
) -> Option<usize> {
    let mut best: Option<(usize, (&Chromosome, &Evaluation))> = None;
    for (i, x) in items.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| best_key_cmp(x, b) == Ordering::Greater) {
            best = Some((i, x));
        }
    }
    best.map(|b| b.0)
}

/// Ranks and crowding with feasibility-aware dominance.
pub fn rank_members(items: Vec<(Chromosome, Evaluation)>) -> Vec<Member> {
    let evals: Vec<Evaluation> = items.iter().map(|x| x.1).collect();
    let rank = nondominated_sort(&evals, dominates_flagged);
    let fitness: Vec<FitnessPair> = evals.iter().map(|e| e.fitness).collect();
    let crowding = crowding_by_front(&fitness, &rank);
    items
        .into_iter()
        .enumerate()
        .map(|(i, (chromosome, evaluation))| Member {
            chromosome,
            evaluation,
            rank: rank[i],
            crowding: crowding[i],
        })
        .collect()
}

/// NSGA-II truncation of feasible, distinct candidates to `mu`, keeping
/// the best-sum member. Returns pool indices.
fn truncate(pool: &[(Chromosome, Evaluation)], candidates: &[usize], mu: usize) -> Vec<usize> {
    if candidates.len() <= mu {
        return candidates.to_vec();
    }
    let fitness: Vec<FitnessPair> = candidates.iter().map(|&i| pool[i].1.fitness).collect();
    let rank = nondominated_sort(&fitness, dominates);
    let protected = best_sum_index(candidates.iter().map(|&i| (&pool[i].0, &pool[i].1))).expect("non-empty");
    let mut chosen = Vec::with_capacity(mu);
    let mut level = 0;
    while chosen.len() < mu {
        let front: Vec<usize> = (0..candidates.len()).filter(|&j| rank[j] == level).collect();
        if chosen.len() + front.len() <= mu {
            chosen.extend(&front);
        } else {
            let pairs: Vec<FitnessPair> = front.iter().map(|&j| fitness[j]).collect();
            let crowd = crowding_distance(&pairs);
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| {
                let pa = front[a] == protected;
                let pb = front[b] == protected;
                pb.cmp(&pa).then(crowd[b].total_cmp(&crowd[a])).then(a.cmp(&b))
            });
            let room = mu - chosen.len();
            chosen.extend(order.into_iter().take(room).map(|o| front[o]));
        }
        level += 1;
    }
    let mut out: Vec<usize> = chosen.into_iter().map(|j| candidates[j]).collect();
    out.sort_unstable();
    out
}

/// Elitist survivor selection from `pool` (parents first, then
/// offspring). Feasible chromosomes with an objective vector not yet
/// represented come first (NSGA-II truncation). One representative is kept
/// per vector, the one with most downward moves. Then come the remaining
/// distinct feasible chromosomes, then repeated feasible ones, then
/// distinct infeasible, then repeated infeasible, each in pool order.
pub fn select_survivors(pool: &[(Chromosome, Evaluation)], mu: usize) -> Vec<usize> {
    let mut seen = HashSet::new();
    let mut representative: HashMap<(u64, u64), usize> = HashMap::new();
    let mut tiers: [Vec<usize>; 5] = Default::default();
    for (i, (c, e)) in pool.iter().enumerate() {
        let repeat = !seen.insert(c);
        match (e.feasible, repeat) {
            (true, false) => {
                let key = (e.fitness.fitness1.to_bits(), e.fitness.fitness2.to_bits());
                match representative.get_mut(&key) {
                    None => {
                        representative.insert(key, i);
                    }
                    Some(r) if downward(c) > downward(&pool[*r].0) => {
                        tiers[1].push(*r);
                        *r = i;
                    }
                    Some(_) => tiers[1].push(i),
                }
            }
            (true, true) => tiers[2].push(i),
            (false, false) => tiers[3].push(i),
            (false, true) => tiers[4].push(i),
        }
    }
    let mut first: Vec<usize> = representative.into_values().collect();
    first.sort_unstable();
    tiers[1].sort_unstable();
    let mut chosen = truncate(pool, &first, mu);
    for tier in &tiers[1..] {
        for &i in tier {
            if chosen.len() >= mu {
                break;
            }
            chosen.push(i);
        }
    }
    chosen
}

fn stats(generation: usize, pop: &[(Chromosome, Evaluation)]) -> GenerationStats {
    let n = pop.len() as f64;
    let evals: Vec<Evaluation> = pop.iter().map(|x| x.1).collect();
    let best = best_sum_index(pop.iter().map(|(c, e)| (c, e))).map_or(0.0, |b| evals[b].fitness.sum());
    GenerationStats {
        generation,
        mean_fitness1: evals.iter().map(|e| e.fitness.fitness1).sum::<f64>() / n,
        mean_fitness2: evals.iter().map(|e| e.fitness.fitness2).sum::<f64>() / n,
        feasible_count: evals.iter().filter(|e| e.feasible).count(),
        best_sum: best,
    }
}

fn tournament<'a>(members: &'a [Member], rng: &mut impl Rng) -> &'a Member {
    let a = rng.gen_range(0..members.len());
    let b = rng.gen_range(0..members.len());
    let (ma, mb) = (&members[a], &members[b]);
    let better_b = mb.rank < ma.rank || (mb.rank == ma.rank && mb.crowding > ma.crowding);
    if better_b {
        mb
    } else {
        ma
    }
}

fn offspring(parents: &[Member], cfg: &GaConfig, rng: &mut impl Rng) -> Chromosome {
    let a = tournament(parents, rng);
    let b = tournament(parents, rng);
    let mut child = a.chromosome.clone();
    if rng.gen::<f64>() < cfg.crossover_rate {
        child = order_crossover(&a.chromosome, &b.chromosome, rng);
    }
    if rng.gen::<f64>() < cfg.mutation_rate {
        child = mutate(&child, rng);
    }
    if rng.gen::<f64>() < cfg.cut_and_paste_rate {
        child = cut_and_paste(&child, rng);
    }
    if rng.gen::<f64>() < cfg.break_and_join_rate {
        child = break_and_join(&child, rng);
    }
    child
}

/// One independent run on its own random stream.
pub fn run_once(rel: &RelationSet, cfg: &GaConfig, run: usize) -> RunResult {
    let eta = rel.eta();
    let mu = cfg.population_for(eta);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(run as u64);
    let (init, fallback_inits) = initialize_population(&rel.interference_free, mu, &mut rng);
    let mut pop: Vec<(Chromosome, Evaluation)> =
        init.into_iter().map(|c| (c.clone(), evaluate(&c, rel))).collect();
    let mut history = vec![stats(0, &pop)];
    for generation in 1..=cfg.generations {
        let ranked = rank_members(pop.clone());
        let children: Vec<Chromosome> = (0..mu).map(|_| offspring(&ranked, cfg, &mut rng)).collect();
        let mut pool = pop;
        pool.extend(children.into_iter().map(|c| {
            let e = evaluate(&c, rel);
            (c, e)
        }));
        let keep = select_survivors(&pool, mu);
        pop = keep.into_iter().map(|i| pool[i].clone()).collect();
        debug_assert!(pop.iter().all(|(c, _)| c.is_valid(eta)));
        history.push(stats(generation, &pop));
    }
    RunResult {
        population: rank_members(pop),
        history,
        fallback_inits,
    }
}

/// Runs `cfg.iterations` independent runs and pools their final
/// populations.
pub fn evolve(rel: &RelationSet, cfg: &GaConfig) -> Result<EvolveResult> {
    cfg.validate()?;
    if rel.eta() == 0 {
        return Err(Error::ConfigInvalid("the product has no parts".into()));
    }
    let runs: Vec<RunResult> = (0..cfg.iterations)
        .into_par_iter()
        .map(|run| run_once(rel, cfg, run))
        .collect();
    let mut seen = HashSet::new();
    let mut items = Vec::new();
    for m in runs.iter().flat_map(|r| &r.population) {
        if seen.insert(m.chromosome.clone()) {
            items.push((m.chromosome.clone(), m.evaluation));
        }
    }
    let pooled = rank_members(items);
    let best = best_sum_index(pooled.iter().map(|m| (&m.chromosome, &m.evaluation))).expect("non-empty pool");
    Ok(EvolveResult { runs, pooled, best })
}
