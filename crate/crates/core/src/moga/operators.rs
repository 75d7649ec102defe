use rand::seq::SliceRandom;
use rand::Rng;

use crate::geometry::Direction;
use crate::sequence::Chromosome;

fn genes(c: &Chromosome) -> Vec<(usize, Direction)> {
    c.order.iter().copied().zip(c.directions.iter().copied()).collect()
}

fn from_genes(g: Vec<(usize, Direction)>) -> Chromosome {
    let (order, directions) = g.into_iter().unzip();
    Chromosome { order, directions }
}

pub fn random_direction(rng: &mut impl Rng) -> Direction {
    *Direction::ALL.choose(rng).expect("six directions")
}

/// Uniform random permutation with random directions.
pub fn random_chromosome(eta: usize, rng: &mut impl Rng) -> Chromosome {
    let mut order: Vec<usize> = (0..eta).collect();
    order.shuffle(rng);
    let directions = (0..eta).map(|_| random_direction(rng)).collect();
    Chromosome { order, directions }
}

/// Order crossover: the child keeps `a`'s genes at positions `lo..=hi`
/// and takes the remaining parts in `b`'s order, starting after `hi` and
/// wrapping around. Directions come with the parent that supplies the gene.
pub fn order_crossover_at(a: &Chromosome, b: &Chromosome, lo: usize, hi: usize) -> Chromosome {
    let n = a.len();
    let ga = genes(a);
    let gb = genes(b);
    let mut child: Vec<Option<(usize, Direction)>> = vec![None; n];
    let mut used = vec![false; n];
    for p in lo..=hi {
        child[p] = Some(ga[p]);
        used[ga[p].0] = true;
    }
    let mut slot = (hi + 1) % n;
    for step in 0..n {
        let g = gb[(hi + 1 + step) % n];
        if used[g.0] {
            continue;
        }
        while child[slot].is_some() {
            slot = (slot + 1) % n;
        }
        child[slot] = Some(g);
        used[g.0] = true;
    }
    from_genes(child.into_iter().map(|g| g.expect("every slot filled")).collect())
}

pub fn order_crossover(a: &Chromosome, b: &Chromosome, rng: &mut impl Rng) -> Chromosome {
    let n = a.len();
    if n < 2 {
        return a.clone();
    }
    let x = rng.gen_range(0..n);
    let y = rng.gen_range(0..n);
    order_crossover_at(a, b, x.min(y), x.max(y))
}

/// Swaps the genes at two positions.
pub fn swap_genes(c: &Chromosome, i: usize, j: usize) -> Chromosome {
    let mut g = genes(c);
    g.swap(i, j);
    from_genes(g)
}

/// Swaps two random positions and draws a new direction for one of the
/// two swapped parts.
pub fn mutate(c: &Chromosome, rng: &mut impl Rng) -> Chromosome {
    let n = c.len();
    if n == 0 {
        return c.clone();
    }
    if n == 1 {
        let mut out = c.clone();
        out.directions[0] = random_direction(rng);
        return out;
    }
    let i = rng.gen_range(0..n);
    let j = (i + rng.gen_range(1..n)) % n;
    let mut out = swap_genes(c, i, j);
    let k = if rng.gen_bool(0.5) { i } else { j };
    out.directions[k] = random_direction(rng);
    out
}

/// Removes the block `start..start + len` and reinserts it so that it
/// begins at `dest` in the result.
pub fn cut_and_paste_at(c: &Chromosome, start: usize, len: usize, dest: usize) -> Chromosome {
    let mut g = genes(c);
    let block: Vec<_> = g.drain(start..start + len).collect();
    let tail = g.split_off(dest);
    g.extend(block);
    g.extend(tail);
    from_genes(g)
}

/// Moves the block between two uniform cut points to a random position.
pub fn cut_and_paste(c: &Chromosome, rng: &mut impl Rng) -> Chromosome {
    let n = c.len();
    if n < 2 {
        return c.clone();
    }
    let a = rng.gen_range(0..n);
    let b = rng.gen_range(0..n);
    let (start, len) = (a.min(b), a.max(b) - a.min(b) + 1);
    if len == n {
        return c.clone();
    }
    let dest = rng.gen_range(0..=n - len);
    cut_and_paste_at(c, start, len, dest)
}

/// Splits before `point` and swaps the two segments.
pub fn break_and_join_at(c: &Chromosome, point: usize) -> Chromosome {
    let mut g = genes(c);
    g.rotate_left(point);
    from_genes(g)
}

pub fn break_and_join(c: &Chromosome, rng: &mut impl Rng) -> Chromosome {
    let n = c.len();
    if n < 2 {
        return c.clone();
    }
    break_and_join_at(c, rng.gen_range(1..n))
}
