//! Seeded random instance generators for tests, audits and benchmarks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::objective::{
    build_coverage, build_facility_location, CoverageAgentSpec, DecomposableObjective, GeoPoint, GroundSet,
    PickupDataset, TableAgent,
};
use crate::Element;

/// `m` coverage agents over universes of 2..=`max_universe` items; each
/// element covers each item independently with probability `density`.
pub fn random_coverage(n: usize, m: usize, max_universe: usize, density: f64, seed: u64) -> Result<DecomposableObjective> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents = (0..m)
        .map(|_| {
            let universe = rng.gen_range(2..=max_universe.max(2));
            let covers = (0..n)
                .map(|_| (0..universe).filter(|_| rng.gen_bool(density)).collect())
                .collect();
            CoverageAgentSpec { universe, covers }
        })
        .collect();
    build_coverage(n, agents)
}

/// Facility location with `n` locations and `m` pickups uniform in the unit square.
pub fn random_facility(n: usize, m: usize, seed: u64) -> Result<DecomposableObjective> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = || GeoPoint::new(rng.gen(), rng.gen());
    let locations: Vec<GeoPoint> = (0..n).map(|_| point()).collect();
    let pickups: Vec<GeoPoint> = (0..m).map(|_| point()).collect();
    build_facility_location(&locations, &PickupDataset::new(pickups)?)
}

/// Normalized weighted cut `f(S) = w(δ(S)) / w(E)` of a random graph on `n` vertices.
fn cut_values(n: usize, rng: &mut ChaCha8Rng) -> impl Fn(&[Element]) -> f64 {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.6) {
                edges.push((a, b, rng.gen_range(0.1..1.0)));
            }
        }
    }
    if edges.is_empty() && n >= 2 {
        edges.push((0, 1, 1.0));
    }
    let total: f64 = edges.iter().map(|e| e.2).sum::<f64>().max(f64::MIN_POSITIVE);
    move |set: &[Element]| {
        let inside = |u: usize| set.binary_search(&u).is_ok();
        edges
            .iter()
            .filter(|&&(a, b, _)| inside(a) != inside(b))
            .map(|e| e.2)
            .sum::<f64>()
            / total
    }
}

/// A non-monotone objective: `m` agents, each a normalized cut of a random graph.
pub fn random_cut(n: usize, m: usize, seed: u64) -> Result<DecomposableObjective> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents = (0..m)
        .map(|_| {
            let cut = cut_values(n, &mut rng);
            Ok(Arc::new(TableAgent::from_fn(n, cut)?.with_bound(1.0)) as _)
        })
        .collect::<Result<Vec<_>>>()?;
    DecomposableObjective::from_agents(GroundSet::new(n)?, agents)
}

/// A random submodular function with range in `[0, 1]`, tabulated over `n`
/// elements. It mixes an offset (so `f(∅)` may be positive), a normalized
/// cut, a concave function of a weighted cardinality and a coverage term,
/// so it is generally neither monotone nor zero at the empty set.
pub fn random_submodular_table(n: usize, seed: u64) -> Result<TableAgent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = if rng.gen_bool(0.5) { rng.gen_range(0.0..0.5) } else { 0.0 };
    let mut mix = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
    let norm: f64 = mix.iter().sum();
    mix.iter_mut().for_each(|w| *w *= (1.0 - offset) / norm);

    let cut = cut_values(n, &mut rng);
    let weights: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let total_weight: f64 = weights.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    let peak = rng.gen_range(0.2..1.0);
    // Concave on [0, 1] with maximum 1 at `peak`.
    let concave = move |x: f64| if x <= peak { x / peak } else { (1.0 - x) / (1.0 - peak) * 0.5 + 0.5 };
    let universe = 6;
    let covers: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..universe).filter(|_| rng.gen_bool(0.3)).collect())
        .collect();
    let coverage = move |set: &[Element]| {
        let mut seen = [false; 6];
        for &u in set {
            for &x in &covers[u] {
                seen[x] = true;
            }
        }
        seen.iter().filter(|&&b| b).count() as f64 / universe as f64
    };
    TableAgent::from_fn(n, |set| {
        let w: f64 = set.iter().map(|&u| weights[u]).sum::<f64>() / total_weight;
        offset + mix[0] * cut(set) + mix[1] * concave(w.min(1.0)) + mix[2] * coverage(set)
    })
    .map(|t| t.with_bound(1.0))
}
