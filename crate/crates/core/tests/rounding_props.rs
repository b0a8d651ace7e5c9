use dpsub_core::instances::random_coverage;
use dpsub_core::matroid::{random_basis, CardinalityMatroid, Matroid, PartitionMatroid};
use dpsub_core::multilinear::exact_multilinear;
use dpsub_core::rounding::{swap_round, ConvexCombination};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_combination<M: Matroid>(mat: &M, terms: usize, rng: &mut ChaCha8Rng) -> ConvexCombination {
    let weights: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    ConvexCombination::from_terms(
        mat.ground_size(),
        weights.into_iter().map(|w| (w / total, random_basis(mat, rng))),
    )
    .unwrap()
}

/// Swap rounding keeps every marginal: `Pr[u ∈ output] = y_u`.
#[test]
fn rounding_preserves_marginals() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mat = PartitionMatroid::new(7, vec![vec![0, 1, 2], vec![3, 4, 5, 6]], vec![1, 2]).unwrap();
    let comb = random_combination(&mat, 5, &mut rng);
    let y = comb.point();
    let trials = 20_000;
    let mut counts = [0usize; 7];
    for _ in 0..trials {
        for u in swap_round(&comb, &mat, &mut rng).unwrap() {
            counts[u] += 1;
        }
    }
    for u in 0..7 {
        let freq = counts[u] as f64 / trials as f64;
        let sigma = (y[u] * (1.0 - y[u]) / trials as f64).sqrt();
        assert!((freq - y[u]).abs() <= 4.0 * sigma + 1e-9, "u={u}: {freq} vs {}", y[u]);
    }
}

#[test]
fn rounded_value_dominates_the_extension() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..3 {
        let obj = random_coverage(7, 4, 6, 0.35, seed).unwrap();
        let mat = CardinalityMatroid::new(7, 3).unwrap();
        let comb = random_combination(&mat, 4, &mut rng);
        let target = exact_multilinear(&comb.point(), |s| obj.value(s)).unwrap();
        let trials = 4000;
        let values: Vec<f64> = (0..trials)
            .map(|_| obj.value(&swap_round(&comb, &mat, &mut rng).unwrap()))
            .collect();
        let mean = values.iter().sum::<f64>() / trials as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        assert!(mean >= target - 3.0 * (var / trials as f64).sqrt(), "{mean} < {target}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rounding_returns_a_basis(seed in any::<u64>(), terms in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mat = PartitionMatroid::new(8, vec![vec![0, 1, 2], vec![3, 4], vec![5, 6, 7]], vec![2, 1, 2]).unwrap();
        let comb = random_combination(&mat, terms, &mut rng);
        let out = swap_round(&comb, &mat, &mut rng).unwrap();
        prop_assert!(mat.is_basis(&out));
        let support: Vec<usize> = comb.terms().iter().flat_map(|t| t.set.clone()).collect();
        prop_assert!(out.iter().all(|u| support.contains(u)));
    }
}
