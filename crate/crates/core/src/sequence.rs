//! Chromosomes and their two objectives.
//!
//! A chromosome is an assembly order with one approach direction per
//! placed part. Fitness 1 rewards respected insertion precedences and few
//! direction changes; fitness 2 rewards a small worst-step constraint-state
//! transition difficulty (the summed degree of constraint a part meets when
//! it is placed).

use serde::{Deserialize, Serialize};

use crate::geometry::Direction;
use crate::relations::{InterferenceFreeMatrix, RelationSet};

/// Assembly order of 0-based part indices; `directions[k]` is the motion of
/// `order[k]` while it is placed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Chromosome {
    pub order: Vec<usize>,
    pub directions: Vec<Direction>,
}

impl Chromosome {
    pub fn new(order: Vec<usize>, directions: Vec<Direction>) -> Self {
        Chromosome { order, directions }
    }

    /// Same direction for every part.
    pub fn uniform(order: Vec<usize>, d: Direction) -> Self {
        let n = order.len();
        Chromosome::new(order, vec![d; n])
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// True if `order` is a permutation of `0..eta` with one direction per
    /// part.
    pub fn is_valid(&self, eta: usize) -> bool {
        if self.order.len() != eta || self.directions.len() != eta {
            return false;
        }
        let mut seen = vec![false; eta];
        self.order
            .iter()
            .all(|&p| p < eta && !std::mem::replace(&mut seen[p], true))
    }
}

/// The two objectives; both are maximised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessPair {
    pub fitness1: f64,
    pub fitness2: f64,
}

impl FitnessPair {
    pub fn new(fitness1: f64, fitness2: f64) -> Self {
        FitnessPair { fitness1, fitness2 }
    }

    pub fn sum(&self) -> f64 {
        self.fitness1 + self.fitness2
    }
}

/// Full evaluation of one chromosome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub fitness: FitnessPair,
    pub feasible: bool,
}

/// Every part can approach along its direction without hitting any part
/// placed before it, i.e. retreat along the opposite direction is clear.
pub fn is_feasible(c: &Chromosome, m: &InterferenceFreeMatrix) -> bool {
    (0..c.len()).all(|k| step_feasible(c, m, k))
}

pub(crate) fn step_feasible(c: &Chromosome, m: &InterferenceFreeMatrix, k: usize) -> bool {
    let back = c.directions[k].opposite();
    c.order[..k].iter().all(|&j| m.get(back, c.order[k], j))
}

/// Number of adjacent positions whose directions differ.
pub fn direction_changes(c: &Chromosome) -> usize {
    c.directions.windows(2).filter(|w| w[0] != w[1]).count()
}

/// `(alpha, beta)`: insertion pairs whose receptacle comes first, and pairs
/// whose inserted part comes first.
pub fn insertion_score(c: &Chromosome, insertion: &[Vec<bool>]) -> (usize, usize) {
    let mut pos = vec![0; c.len()];
    for (k, &p) in c.order.iter().enumerate() {
        pos[p] = k;
    }
    let (mut alpha, mut beta) = (0, 0);
    for (i, row) in insertion.iter().enumerate() {
        for (k, &ins) in row.iter().enumerate() {
            if ins && i != k {
                if pos[k] < pos[i] {
                    alpha += 1;
                } else {
                    beta += 1;
                }
            }
        }
    }
    (alpha, beta)
}

/// Constraint-state transition difficulty of every placement: the summed
/// degree between the placed part and all parts before it.
pub fn step_cstd(c: &Chromosome, degree: &[Vec<u8>]) -> Vec<u32> {
    (0..c.len())
        .map(|k| {
            c.order[..k]
                .iter()
                .map(|&j| degree[j][c.order[k]] as u32)
                .sum()
        })
        .collect()
}

/// Largest step difficulty, 0 for a single part.
pub fn max_cstd(c: &Chromosome, degree: &[Vec<u8>]) -> u32 {
    step_cstd(c, degree).into_iter().max().unwrap_or(0)
}

pub fn fitness1(c: &Chromosome, insertion: &[Vec<bool>], m: &InterferenceFreeMatrix) -> f64 {
    let eta = c.len() as f64;
    if !is_feasible(c, m) {
        return eta / 2.0;
    }
    let (alpha, beta) = insertion_score(c, insertion);
    2.0 * eta + alpha as f64 - beta as f64 - direction_changes(c) as f64
}

pub fn fitness2(c: &Chromosome, degree: &[Vec<u8>], m: &InterferenceFreeMatrix) -> f64 {
    if !is_feasible(c, m) {
        return 0.0;
    }
    let bound = 12 * c.len().saturating_sub(1) as i64;
    (bound - max_cstd(c, degree) as i64) as f64
}

/// Both objectives with an explicit feasibility flag.
pub fn evaluate(c: &Chromosome, rel: &RelationSet) -> Evaluation {
    let feasible = is_feasible(c, &rel.interference_free);
    let eta = c.len() as f64;
    let fitness = if feasible {
        let (alpha, beta) = insertion_score(c, &rel.insertion);
        let f1 = 2.0 * eta + alpha as f64 - beta as f64 - direction_changes(c) as f64;
        let f2 = 12.0 * (eta - 1.0).max(0.0) - max_cstd(c, &rel.degree) as f64;
        FitnessPair::new(f1, f2)
    } else {
        FitnessPair::new(eta / 2.0, 0.0)
    };
    Evaluation { fitness, feasible }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Direction as D;

    fn stack_m() -> InterferenceFreeMatrix {
        // part 1 rests on part 0
        let mut m = InterferenceFreeMatrix::new(2);
        m.set(D::NEG_Z, 1, 0, false);
        m.set(D::POS_Z, 0, 1, false);
        m
    }

    #[test]
    fn single_part_is_feasible() {
        let m = InterferenceFreeMatrix::new(1);
        assert!(is_feasible(&Chromosome::uniform(vec![0], D::NEG_Z), &m));
    }

    #[test]
    fn placing_the_top_part_downward_is_feasible() {
        let m = stack_m();
        assert!(is_feasible(&Chromosome::uniform(vec![0, 1], D::NEG_Z), &m));
        assert!(!is_feasible(&Chromosome::new(vec![0, 1], vec![D::NEG_Z, D::POS_Z]), &m));
    }

    #[test]
    fn direction_change_counts() {
        assert_eq!(direction_changes(&Chromosome::uniform(vec![0, 1, 2], D::NEG_Z)), 0);
        let c = Chromosome::new(vec![0, 1, 2, 3, 4], vec![D::NEG_Z, D::NEG_Z, D::POS_Z, D::POS_Z, D::NEG_Y]);
        assert_eq!(direction_changes(&c), 2);
    }

    #[test]
    fn long_case_study_sequence_changes_direction_four_times() {
        let ids = [
            3, 17, 12, 13, 14, 7, 23, 25, 24, 22, 10, 11, 4, 2, 27, 29, 30, 31, 32, 28, 5, 33, 6, 8, 9, 26,
            16, 15, 1, 19, 21, 20, 18,
        ];
        let mut dirs = vec![D::NEG_Z; 21];
        dirs.push(D::NEG_Y);
        dirs.extend([D::NEG_Z; 2]);
        dirs.extend([D::POS_Z; 5]);
        dirs.extend([D::NEG_Y; 4]);
        let c = Chromosome::new(ids.iter().map(|i| i - 1).collect(), dirs);
        assert!(c.is_valid(33));
        assert_eq!(direction_changes(&c), 4);
    }

    #[test]
    fn insertion_pairs() {
        let none = vec![vec![false; 3]; 3];
        assert_eq!(insertion_score(&Chromosome::uniform(vec![0, 1, 2], D::NEG_Z), &none), (0, 0));
        let mut one = none.clone();
        one[2][0] = true;
        assert_eq!(insertion_score(&Chromosome::uniform(vec![0, 1, 2], D::NEG_Z), &one), (1, 0));
        assert_eq!(insertion_score(&Chromosome::uniform(vec![2, 1, 0], D::NEG_Z), &one), (0, 1));
    }

    #[test]
    fn max_cstd_of_three_mutual_contacts() {
        let c = vec![vec![0, 8, 8], vec![8, 0, 8], vec![8, 8, 0]];
        let s = Chromosome::uniform(vec![0, 1, 2], D::NEG_Z);
        assert_eq!(step_cstd(&s, &c), vec![0, 8, 16]);
        assert_eq!(max_cstd(&s, &c), 16);
    }

    #[test]
    fn fitness_values() {
        let eta = 5;
        let free = InterferenceFreeMatrix::new(eta);
        let mut ins = vec![vec![false; eta]; eta];
        ins[1][0] = true;
        ins[3][2] = true;
        let mut dirs = vec![D::NEG_Z; eta];
        dirs[4] = D::NEG_Y;
        let c = Chromosome::new((0..eta).collect(), dirs);
        assert_eq!(fitness1(&c, &ins, &free), 11.0);
        let none = vec![vec![false; 4]; 4];
        let c4 = Chromosome::uniform(vec![0, 1, 2, 3], D::NEG_Z);
        assert_eq!(fitness1(&c4, &none, &InterferenceFreeMatrix::new(4)), 8.0);

        let mut deg = vec![vec![0u8; eta]; eta];
        for (a, b) in [(0, 4), (1, 4), (2, 3)] {
            deg[a][b] = 8;
            deg[b][a] = 8;
        }
        assert_eq!(max_cstd(&c, &deg), 16);
        assert_eq!(fitness2(&c, &deg, &free), 32.0);
    }

    #[test]
    fn infeasible_sentinels_and_the_zero_boundary() {
        let m = stack_m();
        let bad = Chromosome::new(vec![0, 1], vec![D::NEG_Z, D::POS_Z]);
        let rel = RelationSet {
            names: vec!["a".into(), "b".into()],
            interference_free: m.clone(),
            insertion: vec![vec![false; 2]; 2],
            degree: vec![vec![0, 12], vec![12, 0]],
        };
        let e = evaluate(&bad, &rel);
        assert!(!e.feasible);
        assert_eq!(e.fitness, FitnessPair::new(1.0, 0.0));
        let good = evaluate(&Chromosome::uniform(vec![0, 1], D::NEG_Z), &rel);
        assert!(good.feasible);
        assert_eq!(good.fitness.fitness2, 0.0);
    }

    #[test]
    fn validity() {
        assert!(Chromosome::uniform(vec![2, 0, 1], D::NEG_Z).is_valid(3));
        assert!(!Chromosome::uniform(vec![2, 2, 1], D::NEG_Z).is_valid(3));
        assert!(!Chromosome::new(vec![0, 1], vec![D::NEG_Z]).is_valid(2));
    }
}
