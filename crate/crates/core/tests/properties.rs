//! Property tests for the sequence operators, objectives and verification
//! helpers.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use asg_core::geometry::Direction;
use asg_core::moga::{
    break_and_join, crowding_distance, cut_and_paste, dominates, mutate, nondominated_sort, order_crossover,
    random_chromosome,
};
use asg_core::sequence::{step_cstd, Chromosome, FitnessPair};
use asg_core::verify::{front_coverage, hypervolume, reorder_neighborhood};

fn chromosome(eta: usize, seed: u64) -> Chromosome {
    random_chromosome(eta, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Part-to-direction pairs, which every operator except mutation keeps.
fn genes(c: &Chromosome) -> Vec<(usize, Direction)> {
    let mut g: Vec<_> = c.order.iter().copied().zip(c.directions.iter().copied()).collect();
    g.sort();
    g
}

proptest! {
    #[test]
    fn operators_return_permutations(eta in 1usize..40, a in any::<u64>(), b in any::<u64>(), op in any::<u64>()) {
        let (x, y) = (chromosome(eta, a), chromosome(eta, b));
        let mut rng = ChaCha8Rng::seed_from_u64(op);
        let children = [
            order_crossover(&x, &y, &mut rng),
            mutate(&x, &mut rng),
            cut_and_paste(&x, &mut rng),
            break_and_join(&x, &mut rng),
        ];
        for c in &children {
            prop_assert!(c.is_valid(eta));
        }
        prop_assert_eq!(genes(&children[2]), genes(&x));
        prop_assert_eq!(genes(&children[3]), genes(&x));
    }

    #[test]
    fn crossover_children_inherit_parent_genes(eta in 1usize..30, a in any::<u64>(), b in any::<u64>(), op in any::<u64>()) {
        let (x, y) = (chromosome(eta, a), chromosome(eta, b));
        let child = order_crossover(&x, &y, &mut ChaCha8Rng::seed_from_u64(op));
        let (gx, gy) = (genes(&x), genes(&y));
        for g in genes(&child) {
            prop_assert!(gx.contains(&g) || gy.contains(&g));
        }
    }

    #[test]
    fn step_cstd_total_is_the_upper_triangle(eta in 1usize..12, seed in any::<u64>(), cells in prop::collection::vec(0u8..=12, 144)) {
        let mut degree = vec![vec![0u8; eta]; eta];
        for i in 0..eta {
            for k in i + 1..eta {
                degree[i][k] = cells[i * 12 + k];
                degree[k][i] = cells[i * 12 + k];
            }
        }
        let c = chromosome(eta, seed);
        let total: u32 = step_cstd(&c, &degree).iter().sum();
        let expected: u32 = (0..eta).flat_map(|i| (i + 1..eta).map(move |k| (i, k))).map(|(i, k)| degree[i][k] as u32).sum();
        prop_assert_eq!(total, expected);
    }

    #[test]
    fn neighbourhood_has_eta_minus_one_squared_members(eta in 2usize..20, seed in any::<u64>()) {
        let c = chromosome(eta, seed);
        let n = reorder_neighborhood(&c);
        prop_assert_eq!(n.len(), (eta - 1) * (eta - 1));
        for x in &n {
            prop_assert!(x.is_valid(eta));
            prop_assert_ne!(&x.order, &c.order);
            prop_assert_eq!(genes(x), genes(&c));
        }
    }

    #[test]
    fn front_rank_zero_is_mutually_nondominated(points in prop::collection::vec((0u8..20, 0u8..20), 1..80)) {
        let p: Vec<FitnessPair> = points.iter().map(|&(a, b)| FitnessPair::new(a as f64, b as f64)).collect();
        let rank = nondominated_sort(&p, dominates);
        let front: Vec<FitnessPair> = p.iter().zip(&rank).filter(|(_, &r)| r == 0).map(|(f, _)| *f).collect();
        prop_assert!(!front.is_empty());
        for a in &front {
            for b in &p {
                prop_assert!(!dominates(b, a));
            }
        }
        prop_assert_eq!(front_coverage(&p, &front), 1.0);
        let crowd = crowding_distance(&front);
        prop_assert_eq!(crowd.len(), front.len());
        prop_assert!(crowd.iter().all(|&c| c >= 0.0));
    }

    #[test]
    fn hypervolume_grows_with_more_points(points in prop::collection::vec((0u8..20, 0u8..20), 1..40), extra in (0u8..20, 0u8..20)) {
        let p: Vec<FitnessPair> = points.iter().map(|&(a, b)| FitnessPair::new(a as f64, b as f64)).collect();
        let reference = FitnessPair::new(-1.0, -1.0);
        let base = hypervolume(&p, reference).unwrap();
        let mut more = p.clone();
        more.push(FitnessPair::new(extra.0 as f64, extra.1 as f64));
        prop_assert!(hypervolume(&more, reference).unwrap() >= base);
        let box_sum: f64 = p.iter().map(|f| (f.fitness1 + 1.0) * (f.fitness2 + 1.0)).sum();
        prop_assert!(base <= box_sum + 1e-9);
    }
}
