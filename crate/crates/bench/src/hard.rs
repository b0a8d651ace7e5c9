//! The three-element partition instance on which discrete greedy is stuck at
//! ratio `1/(2−2ε′)`.
//!
//! Elements are `A = 0`, `B = 1`, `C = 2` with parts `{A}` and `{B, C}`, one
//! pick each. `B` alone is the best single element, yet `{A, C}` beats
//! `{A, B}`; greedy takes `B` first and is then forced to `A`.

use std::sync::Arc;

use dpsub_core::matroid::PartitionMatroid;
use dpsub_core::objective::{
    build_facility_location, mask_to_set, AgentFunction, DecomposableObjective, GeoPoint, GroundSet, PickupDataset,
    TableAgent,
};
use serde::{Deserialize, Serialize};

use crate::error::{config, BenchError, BenchResult};

pub const A: usize = 0;
pub const B: usize = 1;
pub const C: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HardMode {
    /// Facility location with `B` at the pickup centroid and `A`, `C` placed
    /// symmetrically around it.
    Geometric,
    /// Identical tabulated agents realizing the value table exactly.
    Table,
}

/// Where the agents of the instance come from.
#[derive(Clone, Copy, Debug)]
pub enum HardSource<'a> {
    Geometric(&'a PickupDataset),
    Table { agents: usize },
}

pub struct HardInstance {
    pub objective: DecomposableObjective,
    pub matroid: PartitionMatroid,
    /// Positions of `A`, `B`, `C` in geometric mode.
    pub locations: Option<[GeoPoint; 3]>,
    /// The realized `1 − f(A)/f(B)` (exactly `ε′` in table mode).
    pub realized_epsilon: f64,
}

fn hard_matroid() -> PartitionMatroid {
    PartitionMatroid::new(3, vec![vec![A], vec![B, C]], vec![1, 1]).expect("fixed partition is valid")
}

/// The value table scaled into `[0, 1]`: `f(B) = 1`, `f(A) = f(C) = 1−ε`,
/// `f(AB) = 1`, `f(AC) = 2−2ε`, `f(BC) = f(ABC) = 2−ε`, all halved.
pub fn hard_table(eps: f64) -> TableAgent {
    let mut values = vec![0.0; 8];
    for mask in 0..8usize {
        let set = mask_to_set(mask);
        values[mask] = match set.as_slice() {
            [] => 0.0,
            [A] | [C] => 1.0 - eps,
            [B] | [A, B] => 1.0,
            [A, C] => 2.0 - 2.0 * eps,
            _ => 2.0 - eps,
        } / 2.0;
    }
    TableAgent::new(3, values).expect("eight values for three elements")
}

fn facility(pickups: &PickupDataset, centroid: GeoPoint, offset: f64, along_lat: bool) -> BenchResult<(DecomposableObjective, [GeoPoint; 3])> {
    let shift = |sign: f64| {
        if along_lat {
            GeoPoint::new(centroid.lat + sign * offset, centroid.lon)
        } else {
            GeoPoint::new(centroid.lat, centroid.lon + sign * offset)
        }
    };
    let locations = [shift(-1.0), centroid, shift(1.0)];
    Ok((build_facility_location(&locations, pickups)?, locations))
}

fn single_gap(obj: &DecomposableObjective) -> f64 {
    let a = obj.value(&[A]).max(obj.value(&[C]));
    1.0 - a / obj.value(&[B])
}

/// Builds the instance. In geometric mode the offset of `A` and `C` from the
/// centroid (along the wider axis of the pickups) is found by bisection so
/// that `1 − max(f(A), f(C))/f(B)` matches `ε′`; the required orderings are
/// then checked on the actual pickups.
pub fn hard_partition_instance(eps: f64, source: HardSource<'_>) -> BenchResult<HardInstance> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(config(format!("ε′ must lie in (0, 0.5), got {eps}")));
    }
    match source {
        HardSource::Table { agents } => {
            if agents == 0 {
                return Err(config("table instance needs at least one agent"));
            }
            let agent: Arc<dyn AgentFunction> = Arc::new(hard_table(eps));
            let objective = DecomposableObjective::from_agents(GroundSet::new(3)?, vec![agent; agents])?;
            Ok(HardInstance {
                objective,
                matroid: hard_matroid(),
                locations: None,
                realized_epsilon: eps,
            })
        }
        HardSource::Geometric(pickups) => {
            let pts = pickups.points();
            let m = pts.len() as f64;
            let centroid = GeoPoint::new(
                pts.iter().map(|p| p.lat).sum::<f64>() / m,
                pts.iter().map(|p| p.lon).sum::<f64>() / m,
            );
            let range = |get: fn(&GeoPoint) -> f64| {
                let (lo, hi) = pts.iter().map(get).fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
                hi - lo
            };
            let (lat_range, lon_range) = (range(|p| p.lat), range(|p| p.lon));
            let along_lat = lat_range > lon_range;
            let max_offset = lat_range.max(lon_range) / 2.0;
            if max_offset <= 0.0 {
                return Err(BenchError::Runtime("pickups are all at one point".into()));
            }
            let (mut lo, mut hi) = (0.0, max_offset);
            if single_gap(&facility(pickups, centroid, hi, along_lat)?.0) < eps {
                return Err(BenchError::Runtime(format!("pickups are too concentrated to realize ε′ = {eps}")));
            }
            for _ in 0..60 {
                let mid = (lo + hi) / 2.0;
                if single_gap(&facility(pickups, centroid, mid, along_lat)?.0) < eps {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (objective, locations) = facility(pickups, centroid, hi, along_lat)?;
            let f = |s: &[usize]| objective.value(s);
            if !(f(&[B]) > f(&[A]) && f(&[B]) > f(&[C]) && f(&[A, C]) > f(&[A, B])) {
                return Err(BenchError::Runtime(
                    "pickup geometry does not produce the greedy trap (need f(B) > f(A), f(C) and f(AC) > f(AB))".into(),
                ));
            }
            Ok(HardInstance {
                realized_epsilon: single_gap(&objective),
                objective,
                matroid: hard_matroid(),
                locations: Some(locations),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{manhattan_bbox, synth_pickups};
    use dpsub_core::algorithms::{brute_force_opt, nonprivate_greedy};
    use dpsub_core::objective::{check_submodular_monotone, CheckMode};

    #[test]
    fn table_mode_realizes_the_trap() {
        let eps = 0.1;
        let inst = hard_partition_instance(eps, HardSource::Table { agents: 4 }).unwrap();
        let obj = &inst.objective;
        assert!(check_submodular_monotone(obj, CheckMode::Exhaustive).unwrap().is_clean());
        let greedy = nonprivate_greedy(obj, &inst.matroid).unwrap();
        assert_eq!(greedy, vec![A, B]);
        let (opt, best) = brute_force_opt(obj, &inst.matroid).unwrap();
        assert_eq!(opt, vec![A, C]);
        assert!((obj.value(&greedy) / best - 1.0 / (2.0 - 2.0 * eps)).abs() < 1e-12);
    }

    #[test]
    fn geometric_mode_matches_requested_gap() {
        let pickups = synth_pickups(&manhattan_bbox(), 2000, 3).unwrap();
        let inst = hard_partition_instance(0.05, HardSource::Geometric(&pickups)).unwrap();
        assert!((inst.realized_epsilon - 0.05).abs() < 1e-6);
        let obj = &inst.objective;
        assert!(check_submodular_monotone(obj, CheckMode::Exhaustive).unwrap().is_clean());
        assert_eq!(brute_force_opt(obj, &inst.matroid).unwrap().0, vec![A, C]);
        let greedy = nonprivate_greedy(obj, &inst.matroid).unwrap();
        assert_eq!(greedy, vec![A, B]);
    }

    #[test]
    fn rejects_bad_epsilon() {
        assert!(hard_partition_instance(0.0, HardSource::Table { agents: 1 }).is_err());
        assert!(hard_partition_instance(0.5, HardSource::Table { agents: 1 }).is_err());
    }
}
