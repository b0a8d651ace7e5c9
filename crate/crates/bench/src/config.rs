//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use dpsub_core::matroid::MatroidSpec;
use serde::{Deserialize, Serialize};

use crate::dataset::BBox;
use crate::error::{config, BenchError, BenchResult};
use crate::hard::HardMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Sweep the rank of a cardinality constraint.
    CardinalitySweep,
    /// Sweep the number of pickups on the three-element partition instance.
    PartitionSweep,
    SingleRun,
    Audit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PickupSource {
    /// A pickup CSV, optionally subsampled (without replacement) per repetition.
    File {
        path: PathBuf,
        #[serde(default)]
        sample: Option<usize>,
    },
    /// Fresh uniform pickups for every repetition.
    Synthetic { bbox: BBox, m: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocationSource {
    File(PathBuf),
    Grid {
        /// Defaults to the bounding box of a synthetic pickup source.
        #[serde(default)]
        bbox: Option<BBox>,
        rows: usize,
        cols: usize,
        #[serde(default)]
        corner_copies: usize,
    },
    /// The three-element partition instance; fixes the matroid.
    Hard { epsilon: f64, mode: HardMode },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub pickups: PickupSource,
    pub locations: LocationSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmName {
    /// Private continuous greedy.
    Pcg,
    /// Private measured continuous greedy.
    Pmcg,
    /// Continuous greedy with exact argmax selections.
    ContinuousGreedy,
    /// Discrete greedy.
    Greedy,
    DpgBasic,
    DpgAdvanced,
    DpgRankInvariant,
    /// Whichever of the basic and advanced private greedy has the higher mean
    /// at a sweep point.
    Dpg,
    /// A uniformly random basis.
    Random,
}

impl AlgorithmName {
    pub fn tag(self) -> &'static str {
        match self {
            AlgorithmName::Pcg => "pcg",
            AlgorithmName::Pmcg => "pmcg",
            AlgorithmName::ContinuousGreedy => "continuous-greedy",
            AlgorithmName::Greedy => "greedy",
            AlgorithmName::DpgBasic => "dpg-basic",
            AlgorithmName::DpgAdvanced => "dpg-advanced",
            AlgorithmName::DpgRankInvariant => "dpg-rank-invariant",
            AlgorithmName::Dpg => "dpg",
            AlgorithmName::Random => "random",
        }
    }

    fn is_continuous(self) -> bool {
        matches!(self, AlgorithmName::Pcg | AlgorithmName::Pmcg | AlgorithmName::ContinuousGreedy)
    }

    fn is_private(self) -> bool {
        matches!(
            self,
            AlgorithmName::Pcg
                | AlgorithmName::Pmcg
                | AlgorithmName::DpgBasic
                | AlgorithmName::DpgAdvanced
                | AlgorithmName::DpgRankInvariant
                | AlgorithmName::Dpg
        )
    }
}

fn default_gamma() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub name: AlgorithmName,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Absent means `1/m^1.5` for `m` pickups.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Absent means the theoretical sample count.
    #[serde(default)]
    pub samples: Option<usize>,
}

impl AlgorithmConfig {
    pub fn delta_for(&self, m: usize) -> f64 {
        self.delta.unwrap_or_else(|| 1.0 / (m as f64).powf(1.5))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    /// Agent removed to form the neighboring input; defaults to the last.
    #[serde(default)]
    pub agent: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub dataset: DatasetConfig,
    /// Required for single runs and audits; a cardinality sweep takes its
    /// rank from the sweep and the partition sweep fixes its own matroid.
    #[serde(default)]
    pub matroid: Option<MatroidSpec>,
    pub algorithms: Vec<AlgorithmConfig>,
    /// Ranks or pickup counts, depending on the experiment.
    #[serde(default)]
    pub sweep: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub audit: Option<AuditConfig>,
}

impl ExperimentConfig {
    /// Parses and validates a config file; relative dataset paths are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> BenchResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
        cfg.resolve_relative(path);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Resolves relative dataset paths against the directory of `file`.
    pub fn resolve_relative(&mut self, file: &Path) {
        let Some(dir) = file.parent() else { return };
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let PickupSource::File { path, .. } = &mut self.dataset.pickups {
            fix(path);
        }
        if let LocationSource::File(p) = &mut self.dataset.locations {
            fix(p);
        }
    }

    /// The sweep values, with a single placeholder point for runs without a sweep.
    pub fn sweep_points(&self) -> Vec<usize> {
        match self.experiment {
            ExperimentKind::SingleRun | ExperimentKind::Audit if self.sweep.is_empty() => vec![0],
            _ => self.sweep.clone(),
        }
    }

    pub fn validate(&self) -> BenchResult<()> {
        use ExperimentKind::*;
        if self.repetitions == 0 {
            return Err(config("repetitions must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(config("algorithm list is empty"));
        }
        match self.experiment {
            CardinalitySweep | PartitionSweep if self.sweep.is_empty() => {
                return Err(config("sweep list is empty"));
            }
            SingleRun | Audit if self.sweep.len() > 1 => {
                return Err(config("single runs and audits take at most one sweep value"));
            }
            _ => {}
        }
        if let PickupSource::File { path, sample } = &self.dataset.pickups {
            if !path.exists() {
                return Err(config(format!("pickup file {} does not exist", path.display())));
            }
            if *sample == Some(0) {
                return Err(config("pickup sample size must be at least 1"));
            }
        }
        if let LocationSource::File(p) = &self.dataset.locations {
            if !p.exists() {
                return Err(config(format!("location file {} does not exist", p.display())));
            }
        }
        if let PickupSource::Synthetic { m: 0, .. } = self.dataset.pickups {
            return Err(config("synthetic dataset needs m ≥ 1"));
        }
        let hard = matches!(self.dataset.locations, LocationSource::Hard { .. });
        if let LocationSource::Hard { epsilon, .. } = self.dataset.locations {
            if !(epsilon > 0.0 && epsilon < 0.5) {
                return Err(config(format!("hard instance ε′ must lie in (0, 0.5), got {epsilon}")));
            }
        }
        if let LocationSource::Grid { bbox: None, .. } = self.dataset.locations {
            if !matches!(self.dataset.pickups, PickupSource::Synthetic { .. }) {
                return Err(config("a grid over a pickup file needs an explicit bbox"));
            }
        }
        match self.experiment {
            CardinalitySweep => {
                if hard {
                    return Err(config("cardinality sweep cannot use the partition instance"));
                }
                if !matches!(self.matroid, None | Some(MatroidSpec::Cardinality { .. })) {
                    return Err(config("cardinality sweep only accepts a cardinality matroid"));
                }
                if self.sweep.contains(&0) {
                    return Err(config("swept ranks must be at least 1"));
                }
            }
            PartitionSweep => {
                if !hard {
                    return Err(config("partition sweep needs `hard` locations"));
                }
                if self.matroid.is_some() {
                    return Err(config("partition sweep fixes its own matroid"));
                }
                if self.sweep.contains(&0) {
                    return Err(config("swept pickup counts must be at least 1"));
                }
            }
            SingleRun | Audit => {
                if self.matroid.is_none() && !hard {
                    return Err(config("this experiment needs a matroid"));
                }
            }
        }
        for alg in &self.algorithms {
            let tag = alg.name.tag();
            if alg.name.is_continuous() {
                match alg.eta {
                    Some(eta) if eta > 0.0 && eta <= 1.0 => {}
                    _ => return Err(config(format!("{tag}: eta must lie in (0, 1]"))),
                }
            }
            if !(alg.gamma > 0.0 && alg.gamma <= 1.0) {
                return Err(config(format!("{tag}: gamma must lie in (0, 1]")));
            }
            if alg.name.is_private() {
                match alg.epsilon {
                    Some(e) if e > 0.0 && e.is_finite() => {}
                    _ => return Err(config(format!("{tag}: a positive epsilon is required"))),
                }
            } else if alg.epsilon.is_some() {
                return Err(config(format!("{tag} is not private; remove epsilon")));
            }
            if let Some(d) = alg.delta {
                if !(d > 0.0 && d < 1.0) {
                    return Err(config(format!("{tag}: delta must lie in (0, 1)")));
                }
            }
            if alg.samples == Some(0) {
                return Err(config(format!("{tag}: samples must be at least 1")));
            }
        }
        if self.experiment == Audit {
            match self.algorithms.as_slice() {
                [a] if matches!(a.name, AlgorithmName::Pcg | AlgorithmName::Pmcg) => {
                    if a.samples.is_none() {
                        return Err(config("the audit needs an explicit sample count"));
                    }
                }
                _ => return Err(config("the audit takes exactly one pcg or pmcg algorithm")),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "experiment": "cardinality-sweep",
            "dataset": {
                "pickups": {"synthetic": {"bbox": [40.70, -74.02, 40.80, -73.93], "m": 100}},
                "locations": {"grid": {"rows": 5, "cols": 4, "corner_copies": 80}}
            },
            "algorithms": [
                {"name": "pcg", "eta": 0.2, "epsilon": 0.1, "samples": 1000},
                {"name": "greedy"}
            ],
            "sweep": [12, 14],
            "repetitions": 3,
            "seed": 1
        })
    }

    fn parse(v: serde_json::Value) -> BenchResult<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_value(v).map_err(|e| config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn accepts_the_default_shape() {
        let cfg = parse(base()).unwrap();
        assert_eq!(cfg.algorithms[0].delta_for(100), 1e-3);
        assert_eq!(cfg.algorithms[1].gamma, 0.1);
    }

    #[test]
    fn rejects_invalid_configs() {
        let mut v = base();
        v["repetitions"] = 0.into();
        assert!(parse(v).unwrap_err().is_config());
        let mut v = base();
        v["sweep"] = serde_json::json!([]);
        assert!(parse(v).is_err());
        let mut v = base();
        v["algorithms"][0]["eta"] = serde_json::Value::Null;
        assert!(parse(v).is_err());
        let mut v = base();
        v["algorithms"][1]["epsilon"] = 0.1.into();
        assert!(parse(v).is_err());
        let mut v = base();
        v["dataset"]["pickups"] = serde_json::json!({"file": {"path": "/nonexistent/pickups.csv"}});
        v["dataset"]["locations"]["grid"]["bbox"] = serde_json::json!([40.7, -74.0, 40.8, -73.9]);
        assert!(parse(v).is_err());
        let mut v = base();
        v["surprise"] = 1.into();
        assert!(parse(v).is_err());
        let mut v = base();
        v["dataset"]["pickups"]["synthetic"]["bbox"] = serde_json::json!([1, 1, 1, 2]);
        assert!(parse(v).is_err());
    }
}
