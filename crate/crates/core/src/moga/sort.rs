use crate::sequence::{Evaluation, FitnessPair};

/// Crowding value given to the boundary members of a front.
pub const CROWDING_SENTINEL: f64 = f64::MAX;

/// `a` dominates `b` when it is no worse in both objectives and better in
/// at least one (both maximised).
pub fn dominates(a: &FitnessPair, b: &FitnessPair) -> bool {
    a.fitness1 >= b.fitness1
        && a.fitness2 >= b.fitness2
        && (a.fitness1 > b.fitness1 || a.fitness2 > b.fitness2)
}

/// Dominance that looks at the feasibility flag first: a feasible
/// chromosome beats an infeasible one whatever the objective values.
pub fn dominates_flagged(a: &Evaluation, b: &Evaluation) -> bool {
    match (a.feasible, b.feasible) {
        (true, false) => true,
        (false, true) => false,
        _ => dominates(&a.fitness, &b.fitness),
    }
}

/// Fast non-dominated sorting. Returns the front rank (0 = non-dominated)
/// of every item.
pub fn nondominated_sort<T>(items: &[T], dom: impl Fn(&T, &T) -> bool) -> Vec<usize> {
    let n = items.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for p in 0..n {
        for q in p + 1..n {
            if dom(&items[p], &items[q]) {
                dominating[p].push(q);
                dominated_by[q] += 1;
            } else if dom(&items[q], &items[p]) {
                dominating[q].push(p);
                dominated_by[p] += 1;
            }
        }
    }
    let mut rank = vec![0usize; n];
    let mut current: Vec<usize> = (0..n).filter(|&p| dominated_by[p] == 0).collect();
    let mut level = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            rank[p] = level;
            for &q in &dominating[p] {
                dominated_by[q] -= 1;
                if dominated_by[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        current = next;
        level += 1;
    }
    rank
}

/// Crowding distance of each member of one front: per objective, the gap
/// between its sorted neighbours divided by the front's range. Boundary
/// members get [`CROWDING_SENTINEL`].
pub fn crowding_distance(front: &[FitnessPair]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![CROWDING_SENTINEL; n];
    }
    let objectives: [fn(&FitnessPair) -> f64; 2] = [|f| f.fitness1, |f| f.fitness2];
    for value in objectives {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| value(&front[a]).total_cmp(&value(&front[b])).then(a.cmp(&b)));
        let lo = value(&front[idx[0]]);
        let hi = value(&front[idx[n - 1]]);
        dist[idx[0]] = CROWDING_SENTINEL;
        dist[idx[n - 1]] = CROWDING_SENTINEL;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let i = idx[w];
            if dist[i] != CROWDING_SENTINEL {
                dist[i] += (value(&front[idx[w + 1]]) - value(&front[idx[w - 1]])) / range;
            }
        }
    }
    dist
}

/// Crowding of every member, computed front by front.
pub fn crowding_by_front(fitness: &[FitnessPair], rank: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; fitness.len()];
    let levels = rank.iter().copied().max().map_or(0, |m| m + 1);
    for level in 0..levels {
        let members: Vec<usize> = (0..fitness.len()).filter(|&i| rank[i] == level).collect();
        let front: Vec<FitnessPair> = members.iter().map(|&i| fitness[i]).collect();
        for (&i, d) in members.iter().zip(crowding_distance(&front)) {
            out[i] = d;
        }
    }
    out
}
