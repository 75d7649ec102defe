//! Pareto-quality checks for generated sequences.
//!
//! The neighbourhood check moves one part to another position and asks
//! whether any such reorder beats the sequence in both objectives. For small
//! products the exact front is enumerated as ground truth.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::moga::{dominates, dominates_flagged};
use crate::relations::RelationSet;
use crate::sequence::{evaluate, Chromosome, Evaluation, FitnessPair};

/// Default cap on the work of [`exhaustive_front`].
pub const DEFAULT_BUDGET: u64 = 100_000_000;
pub const DEFAULT_MAX_ETA: usize = 7;

/// All sequences obtained by moving one part to a different position,
/// directions travelling with their parts. There are exactly `(eta - 1)^2`
/// distinct ones.
pub fn reorder_neighborhood(c: &Chromosome) -> Vec<Chromosome> {
    let n = c.len();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(c.order.clone());
    let mut out = Vec::with_capacity(n.saturating_sub(1).pow(2));
    for p in 0..n {
        for t in 0..n {
            if t == p {
                continue;
            }
            let mut order = c.order.clone();
            let mut dirs = c.directions.clone();
            let part = order.remove(p);
            let dir = dirs.remove(p);
            order.insert(t, part);
            dirs.insert(t, dir);
            if seen.insert(order.clone()) {
                out.push(Chromosome::new(order, dirs));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub chromosome: Chromosome,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodReport {
    pub base: Chromosome,
    pub base_evaluation: Evaluation,
    pub neighbors: Vec<Neighbor>,
    pub dominated_by_neighbor: bool,
    /// Share of neighbours that are feasible.
    pub feasible_fraction: f64,
}

impl NeighborhoodReport {
    pub fn dominating(&self) -> impl Iterator<Item = &Neighbor> {
        self.neighbors
            .iter()
            .filter(|n| dominates_flagged(&n.evaluation, &self.base_evaluation))
    }
}

/// Evaluates every one-part reorder of `base`.
pub fn pareto_check(base: &Chromosome, rel: &RelationSet) -> NeighborhoodReport {
    let base_evaluation = evaluate(base, rel);
    let neighbors: Vec<Neighbor> = reorder_neighborhood(base)
        .into_par_iter()
        .map(|c| {
            let evaluation = evaluate(&c, rel);
            Neighbor { chromosome: c, evaluation }
        })
        .collect();
    let dominated_by_neighbor = neighbors
        .iter()
        .any(|n| dominates_flagged(&n.evaluation, &base_evaluation));
    let feasible = neighbors.iter().filter(|n| n.evaluation.feasible).count();
    let feasible_fraction = if neighbors.is_empty() {
        0.0
    } else {
        feasible as f64 / neighbors.len() as f64
    };
    NeighborhoodReport {
        base: base.clone(),
        base_evaluation,
        neighbors,
        dominated_by_neighbor,
        feasible_fraction,
    }
}

/// A point of the exact front with one sequence attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    pub fitness: FitnessPair,
    pub chromosome: Chromosome,
}

/// Work estimate of the exhaustive search: every order, times a direction
/// pass per position.
pub fn exhaustive_cost(eta: usize) -> f64 {
    (1..=eta).map(|k| k as f64).product::<f64>() * 6.0 * eta as f64
}

struct Search<'a> {
    rel: &'a RelationSet,
    eta: usize,
    order: Vec<usize>,
    allowed: Vec<[bool; 6]>,
    placed: Vec<bool>,
    front: Vec<FrontPoint>,
}

impl Search<'_> {
    fn allowed_directions(&self, p: usize) -> [bool; 6] {
        let m = &self.rel.interference_free;
        Direction::ALL.map(|d| {
            let back = d.opposite();
            self.order.iter().all(|&j| m.get(back, p, j))
        })
    }

    /// Fewest direction changes over the allowed sets, with one choice
    /// attaining it.
    fn fewest_changes(&self) -> (usize, Vec<Direction>) {
        const INF: usize = usize::MAX / 2;
        let n = self.eta;
        let mut cost = vec![[INF; 6]; n];
        let mut from = vec![[0usize; 6]; n];
        for d in 0..6 {
            if self.allowed[0][d] {
                cost[0][d] = 0;
            }
        }
        for k in 1..n {
            for d in 0..6 {
                if !self.allowed[k][d] {
                    continue;
                }
                for e in 0..6 {
                    let c = cost[k - 1][e] + usize::from(e != d);
                    if c < cost[k][d] {
                        cost[k][d] = c;
                        from[k][d] = e;
                    }
                }
            }
        }
        let mut d = (0..6).min_by_key(|&d| (cost[n - 1][d], d)).expect("six directions");
        let best = cost[n - 1][d];
        let mut dirs = vec![Direction::from_index(d); n];
        for k in (1..n).rev() {
            d = from[k][d];
            dirs[k - 1] = Direction::from_index(d);
        }
        (best, dirs)
    }

    fn record(&mut self, fitness: FitnessPair, chromosome: Chromosome) {
        if self
            .front
            .iter()
            .any(|f| f.fitness == fitness || dominates(&f.fitness, &fitness))
        {
            return;
        }
        self.front.retain(|f| !dominates(&fitness, &f.fitness));
        self.front.push(FrontPoint { fitness, chromosome });
    }

    fn descend(&mut self, h: u32, alpha_minus_beta: i64) {
        let depth = self.order.len();
        if depth == self.eta {
            let (r, dirs) = self.fewest_changes();
            let eta = self.eta as f64;
            let f1 = 2.0 * eta + alpha_minus_beta as f64 - r as f64;
            let f2 = 12.0 * (eta - 1.0) - h as f64;
            let c = Chromosome::new(self.order.clone(), dirs);
            self.record(FitnessPair::new(f1, f2), c);
            return;
        }
        for p in 0..self.eta {
            if self.placed[p] {
                continue;
            }
            let allowed = self.allowed_directions(p);
            if !allowed.iter().any(|&a| a) {
                continue;
            }
            let mut step = 0u32;
            let mut score = alpha_minus_beta;
            for &j in &self.order {
                step += self.rel.degree[j][p] as u32;
                score += i64::from(self.rel.insertion[p][j]) - i64::from(self.rel.insertion[j][p]);
            }
            self.placed[p] = true;
            self.order.push(p);
            self.allowed.push(allowed);
            self.descend(h.max(step), score);
            self.allowed.pop();
            self.order.pop();
            self.placed[p] = false;
        }
    }
}

/// Exact Pareto front of all feasible sequences, with one sequence per
/// objective vector.
///
/// Orders are enumerated depth first, dropping any prefix in which some
/// part has no collision-free direction. Feasible directions at each
/// position depend only on the parts before it, so for a fixed order the
/// only direction-dependent objective is the change count. The fewest
/// changes dominate every other direction choice, so one dynamic program
/// per order replaces the direction enumeration.
pub fn exhaustive_front(rel: &RelationSet, max_eta: usize, budget: u64) -> Result<Vec<FrontPoint>> {
    let eta = rel.eta();
    let needed = exhaustive_cost(eta);
    if eta > max_eta || needed > budget as f64 {
        return Err(Error::TooLarge { needed, budget });
    }
    let mut s = Search {
        rel,
        eta,
        order: Vec::with_capacity(eta),
        allowed: Vec::with_capacity(eta),
        placed: vec![false; eta],
        front: Vec::new(),
    };
    if eta > 0 {
        s.descend(0, 0);
    }
    let mut front = s.front;
    front.sort_by(|a, b| {
        b.fitness
            .fitness1
            .total_cmp(&a.fitness.fitness1)
            .then(a.fitness.fitness2.total_cmp(&b.fitness.fitness2))
    });
    Ok(front)
}

/// Share of `truth` vectors that also appear in `found`.
pub fn front_coverage(found: &[FitnessPair], truth: &[FitnessPair]) -> f64 {
    if truth.is_empty() {
        return 1.0;
    }
    let hit = truth.iter().filter(|t| found.iter().any(|f| f == *t)).count();
    hit as f64 / truth.len() as f64
}

/// Area dominated by `front` and bounded below by `reference`.
pub fn hypervolume(front: &[FitnessPair], reference: FitnessPair) -> Result<f64> {
    if front
        .iter()
        .any(|p| p.fitness1 < reference.fitness1 || p.fitness2 < reference.fitness2)
    {
        return Err(Error::BadReference);
    }
    let mut pts = front.to_vec();
    pts.sort_by(|a, b| b.fitness1.total_cmp(&a.fitness1).then(b.fitness2.total_cmp(&a.fitness2)));
    let mut area = 0.0;
    let mut floor = reference.fitness2;
    for p in pts {
        if p.fitness2 > floor {
            area += (p.fitness1 - reference.fitness1) * (p.fitness2 - floor);
            floor = p.fitness2;
        }
    }
    Ok(area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::InterferenceFreeMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fp(a: f64, b: f64) -> FitnessPair {
        FitnessPair::new(a, b)
    }

    #[test]
    fn neighbourhood_sizes() {
        for n in 2..12 {
            let c = Chromosome::uniform((0..n).collect(), Direction::NEG_Z);
            let nb = reorder_neighborhood(&c);
            assert_eq!(nb.len(), (n - 1) * (n - 1));
            let orders: HashSet<_> = nb.iter().map(|x| x.order.clone()).collect();
            assert_eq!(orders.len(), nb.len());
            assert!(!orders.contains(&c.order));
        }
        let two = reorder_neighborhood(&Chromosome::uniform(vec![0, 1], Direction::NEG_Z));
        assert_eq!(two[0].order, vec![1, 0]);
    }

    #[test]
    fn four_part_neighbourhood_matches_enumeration() {
        let c = Chromosome::new(vec![2, 0, 3, 1], vec![Direction::POS_X, Direction::NEG_Z, Direction::NEG_Y, Direction::POS_Z]);
        let got: HashSet<_> = reorder_neighborhood(&c).into_iter().map(|x| x.order).collect();
        let mut expect = HashSet::new();
        for p in 0..4 {
            for t in 0..4 {
                let mut o = c.order.clone();
                let x = o.remove(p);
                o.insert(t, x);
                if o != c.order {
                    expect.insert(o);
                }
            }
        }
        assert_eq!(got, expect);
        assert_eq!(got.len(), 9);
    }

    #[test]
    fn hypervolume_examples() {
        assert_eq!(hypervolume(&[fp(1.0, 1.0)], fp(0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(hypervolume(&[fp(2.0, 1.0), fp(1.0, 2.0)], fp(0.0, 0.0)).unwrap(), 3.0);
        assert!(matches!(hypervolume(&[fp(1.0, 1.0)], fp(2.0, 0.0)), Err(Error::BadReference)));
    }

    #[test]
    fn hypervolume_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let pts: Vec<_> = (0..rng.gen_range(1..8))
                .map(|_| fp(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
                .collect();
            let exact = hypervolume(&pts, fp(0.0, 0.0)).unwrap();
            let samples = 1_000_000;
            let hits = (0..samples)
                .filter(|_| {
                    let (x, y) = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
                    pts.iter().any(|p| p.fitness1 >= x && p.fitness2 >= y)
                })
                .count();
            let estimate = 100.0 * hits as f64 / samples as f64;
            assert!((estimate - exact).abs() <= 0.02 * exact, "{estimate} vs {exact}");
        }
    }

    #[test]
    fn hypervolume_is_monotone() {
        let base = vec![fp(5.0, 1.0), fp(1.0, 5.0)];
        let h0 = hypervolume(&base, fp(0.0, 0.0)).unwrap();
        let mut more = base.clone();
        more.push(fp(3.0, 3.0));
        assert!(hypervolume(&more, fp(0.0, 0.0)).unwrap() >= h0);
    }

    fn random_relations(eta: usize, rng: &mut impl Rng) -> RelationSet {
        let mut m = InterferenceFreeMatrix::new(eta);
        for i in 0..eta {
            for k in 0..eta {
                if i != k {
                    for d in Direction::ALL {
                        if rng.gen_bool(0.3) {
                            m.set(d, i, k, false);
                            m.set(d.opposite(), k, i, false);
                        }
                    }
                }
            }
        }
        let mut degree = vec![vec![0u8; eta]; eta];
        let mut insertion = vec![vec![false; eta]; eta];
        for i in 0..eta {
            for k in i + 1..eta {
                let c = rng.gen_range(0..=12);
                degree[i][k] = c;
                degree[k][i] = c;
                if rng.gen_bool(0.2) {
                    insertion[i][k] = true;
                }
            }
        }
        RelationSet {
            names: (0..eta).map(|i| format!("P{i}")).collect(),
            interference_free: m,
            insertion,
            degree,
        }
    }

    /// Every order with every direction assignment.
    fn brute_front(rel: &RelationSet) -> Vec<FitnessPair> {
        let eta = rel.eta();
        let mut pts: Vec<FitnessPair> = Vec::new();
        let mut order: Vec<usize> = (0..eta).collect();
        permute(&mut order, 0, &mut |o| {
            for code in 0..6usize.pow(eta as u32) {
                let dirs = (0..eta).map(|k| Direction::from_index(code / 6usize.pow(k as u32) % 6)).collect();
                let e = evaluate(&Chromosome::new(o.to_vec(), dirs), rel);
                if e.feasible {
                    pts.push(e.fitness);
                }
            }
        });
        let mut front: Vec<FitnessPair> = Vec::new();
        for p in &pts {
            if !pts.iter().any(|q| dominates(q, p)) && !front.contains(p) {
                front.push(*p);
            }
        }
        front
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn pruned_search_equals_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for eta in 1..=4 {
            for _ in 0..6 {
                let rel = random_relations(eta, &mut rng);
                let mut fast: Vec<FitnessPair> = exhaustive_front(&rel, 7, DEFAULT_BUDGET)
                    .unwrap()
                    .iter()
                    .map(|p| p.fitness)
                    .collect();
                let mut slow = brute_front(&rel);
                let key = |a: &FitnessPair, b: &FitnessPair| {
                    a.fitness1.total_cmp(&b.fitness1).then(a.fitness2.total_cmp(&b.fitness2))
                };
                fast.sort_by(key);
                slow.sort_by(key);
                assert_eq!(fast, slow);
                for p in exhaustive_front(&rel, 7, DEFAULT_BUDGET).unwrap() {
                    let e = evaluate(&p.chromosome, &rel);
                    assert!(e.feasible);
                    assert_eq!(e.fitness, p.fitness);
                    assert!(!pareto_check(&p.chromosome, &rel).dominated_by_neighbor);
                }
            }
        }
    }

    #[test]
    fn unconstrained_parts_share_one_vector() {
        let rel = RelationSet {
            names: vec!["a".into(), "b".into(), "c".into()],
            interference_free: InterferenceFreeMatrix::new(3),
            insertion: vec![vec![false; 3]; 3],
            degree: vec![vec![0; 3]; 3],
        };
        let front = exhaustive_front(&rel, 7, DEFAULT_BUDGET).unwrap();
        assert_eq!(front.len(), 1);
        assert_eq!(front[0].fitness, fp(6.0, 24.0));
    }

    #[test]
    fn too_large() {
        let rel = RelationSet {
            names: (0..12).map(|i| i.to_string()).collect(),
            interference_free: InterferenceFreeMatrix::new(12),
            insertion: vec![vec![false; 12]; 12],
            degree: vec![vec![0; 12]; 12],
        };
        assert!(matches!(exhaustive_front(&rel, 20, DEFAULT_BUDGET), Err(Error::TooLarge { .. })));
        assert!(matches!(exhaustive_front(&rel, 7, u64::MAX), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn perturbed_sequence_is_dominated_by_undoing_it() {
        // chain: each part rests on the previous one
        let eta = 4;
        let mut m = InterferenceFreeMatrix::new(eta);
        let mut degree = vec![vec![0u8; eta]; eta];
        for i in 1..eta {
            m.set(Direction::NEG_Z, i, i - 1, false);
            m.set(Direction::POS_Z, i - 1, i, false);
            degree[i][i - 1] = 5;
            degree[i - 1][i] = 5;
        }
        let rel = RelationSet {
            names: (0..eta).map(|i| i.to_string()).collect(),
            interference_free: m,
            insertion: vec![vec![false; eta]; eta],
            degree,
        };
        let good = Chromosome::uniform(vec![0, 1, 2, 3], Direction::NEG_Z);
        assert!(!pareto_check(&good, &rel).dominated_by_neighbor);
        let bad = Chromosome::uniform(vec![0, 2, 1, 3], Direction::NEG_Z);
        let report = pareto_check(&bad, &rel);
        assert!(report.dominated_by_neighbor);
        assert!(report.dominating().any(|n| n.chromosome == good));
    }
}
