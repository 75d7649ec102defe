use rand::Rng;

use super::operators::random_chromosome;
use crate::geometry::Direction;
use crate::relations::InterferenceFreeMatrix;
use crate::sequence::Chromosome;

/// Share of greedy runs that prefer parts able to keep the current
/// retreat direction.
pub const DIRECTION_FIRST_SHARE: f64 = 0.25;

/// Builds one chromosome by randomised greedy disassembly: repeatedly
/// remove a uniformly chosen part that can retreat to infinity without
/// hitting the parts still present, then reverse the removals. A part
/// keeps the previous retreat direction when it can (starting with +z) and
/// otherwise takes one of its free directions at random.
///
/// In a [`DIRECTION_FIRST_SHARE`] of the runs the choice is restricted to
/// parts that can keep the previous direction whenever there are any. This
/// seeds long single-direction stacks that the uniform rule rarely builds.
/// Returns `None` when the greedy run stalls.
pub fn greedy_disassembly(m: &InterferenceFreeMatrix, rng: &mut impl Rng) -> Option<Chromosome> {
    let eta = m.eta();
    let mut present = vec![true; eta];
    let mut removed: Vec<(usize, Direction)> = Vec::with_capacity(eta);
    let direction_first = rng.gen_bool(DIRECTION_FIRST_SHARE);
    let mut previous = Direction::POS_Z;
    for _ in 0..eta {
        let candidates: Vec<(usize, Vec<Direction>)> = (0..eta)
            .filter(|&p| present[p])
            .map(|p| {
                let free = Direction::ALL
                    .into_iter()
                    .filter(|&d| (0..eta).all(|j| j == p || !present[j] || m.get(d, p, j)))
                    .collect();
                (p, free)
            })
            .filter(|(_, free): &(usize, Vec<Direction>)| !free.is_empty())
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let along: Vec<&(usize, Vec<Direction>)> = candidates
            .iter()
            .filter(|(_, free)| direction_first && free.contains(&previous))
            .collect();
        let (p, d) = if along.is_empty() {
            let (p, free) = &candidates[rng.gen_range(0..candidates.len())];
            let d = if free.contains(&previous) {
                previous
            } else {
                free[rng.gen_range(0..free.len())]
            };
            (p, d)
        } else {
            (&along[rng.gen_range(0..along.len())].0, previous)
        };
        present[*p] = false;
        removed.push((*p, d));
        previous = d;
    }
    removed.reverse();
    let order = removed.iter().map(|r| r.0).collect();
    let directions = removed.iter().map(|r| r.1.opposite()).collect();
    Some(Chromosome { order, directions })
}

/// `size` chromosomes from greedy disassembly, with uniform random ones
/// standing in whenever the greedy run stalls. The second value counts
/// those fallbacks.
pub fn initialize_population(
    m: &InterferenceFreeMatrix,
    size: usize,
    rng: &mut impl Rng,
) -> (Vec<Chromosome>, usize) {
    let mut fallbacks = 0;
    let pop = (0..size)
        .map(|_| {
            greedy_disassembly(m, rng).unwrap_or_else(|| {
                fallbacks += 1;
                random_chromosome(m.eta(), rng)
            })
        })
        .collect();
    (pop, fallbacks)
}
