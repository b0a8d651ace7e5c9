//! Experiment execution.
//!
//! Every random stream is derived from the master seed by hashing a label
//! (see [`derive_seed`]):
//!
//! * dataset: `"{master}|{sweep}|{rep}|dataset"`
//! * algorithm streams: `"{master}|{sweep}|{rep}|{algorithm}|{purpose}"`, with
//!   purposes `thresholds`, `mechanism`, `rounding` and `basis`.
//!
//! Adding or removing an algorithm therefore never changes another
//! algorithm's streams, and all algorithms in a repetition see the same data.

use std::path::Path;

use dpsub_core::algorithms::{
    derive_seed, dpg_baseline, nonprivate_greedy, private_continuous_greedy, private_measured_continuous_greedy,
    AlgoConfig, DpgMode, SampleMode, Seeds, Variant,
};
use dpsub_core::audit::{audit_enumerate, AuditReport};
use dpsub_core::matroid::{random_basis, AnyMatroid, CardinalityMatroid, MatroidSpec};
use dpsub_core::objective::{build_facility_location, DecomposableObjective, PickupDataset};
use dpsub_core::privacy::PrivacyBudget;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{AlgorithmConfig, AlgorithmName, ExperimentConfig, ExperimentKind, LocationSource, PickupSource};
use crate::dataset::{load_pickups, synth_pickups};
use crate::error::{config, BenchError, BenchResult};
use crate::grid::build_grid;
use crate::hard::{hard_partition_instance, HardMode, HardSource};
use crate::report::ResultRow;

/// `derive_seed` of `"{master}|{sweep}|{rep}|{algorithm}|{purpose}"`.
pub fn sub_seed(master: u64, sweep: usize, rep: usize, algorithm: &str, purpose: &str) -> u64 {
    derive_seed(&format!("{master}|{sweep}|{rep}|{algorithm}|{purpose}"))
}

pub fn dataset_seed(master: u64, sweep: usize, rep: usize) -> u64 {
    derive_seed(&format!("{master}|{sweep}|{rep}|dataset"))
}

/// A concrete problem for one repetition.
pub struct Instance {
    pub objective: DecomposableObjective,
    pub matroid: AnyMatroid,
    /// Utilities are divided by this (the number of agents in the partition
    /// sweep, 1 otherwise).
    pub normalizer: f64,
    pub pickups: usize,
}

/// Files referenced by a config, loaded once.
#[derive(Default)]
pub struct Loaded {
    pickups: Option<PickupDataset>,
    locations: Option<PickupDataset>,
}

impl Loaded {
    pub fn new(cfg: &ExperimentConfig) -> BenchResult<Self> {
        let mut loaded = Loaded::default();
        if let PickupSource::File { path, .. } = &cfg.dataset.pickups {
            loaded.pickups = Some(load_pickups(path)?);
        }
        if let LocationSource::File(path) = &cfg.dataset.locations {
            loaded.locations = Some(load_pickups(path)?);
        }
        Ok(loaded)
    }
}

fn pickups_for(cfg: &ExperimentConfig, loaded: &Loaded, sweep: usize, seed: u64) -> BenchResult<PickupDataset> {
    let wanted = (cfg.experiment == ExperimentKind::PartitionSweep).then_some(sweep);
    match &cfg.dataset.pickups {
        PickupSource::Synthetic { bbox, m } => synth_pickups(bbox, wanted.unwrap_or(*m), seed),
        PickupSource::File { sample, .. } => {
            let all = loaded.pickups.as_ref().expect("pickup file is loaded");
            match wanted.or(*sample) {
                None => Ok(all.clone()),
                Some(k) if k > all.len() => Err(config(format!(
                    "cannot sample {k} pickups from a file of {}",
                    all.len()
                ))),
                Some(k) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let mut idx = rand::seq::index::sample(&mut rng, all.len(), k).into_vec();
                    idx.sort_unstable();
                    Ok(all.subset(&idx)?)
                }
            }
        }
    }
}

/// Builds the instance of one repetition at one sweep value.
pub fn build_instance(cfg: &ExperimentConfig, loaded: &Loaded, sweep: usize, rep: usize) -> BenchResult<Instance> {
    let pickups = pickups_for(cfg, loaded, sweep, dataset_seed(cfg.seed, sweep, rep))?;
    let m = pickups.len();
    let (objective, hard_matroid) = match &cfg.dataset.locations {
        LocationSource::Grid {
            bbox,
            rows,
            cols,
            corner_copies,
        } => {
            let bbox = match (bbox, &cfg.dataset.pickups) {
                (Some(b), _) => *b,
                (None, PickupSource::Synthetic { bbox, .. }) => *bbox,
                (None, _) => return Err(config("grid needs a bounding box")),
            };
            let locations = build_grid(&bbox, *rows, *cols, *corner_copies)?;
            (build_facility_location(&locations, &pickups)?, None)
        }
        LocationSource::File(_) => {
            let locations = loaded.locations.as_ref().expect("location file is loaded");
            (build_facility_location(locations.points(), &pickups)?, None)
        }
        LocationSource::Hard { epsilon, mode } => {
            let source = match mode {
                HardMode::Geometric => HardSource::Geometric(&pickups),
                HardMode::Table => HardSource::Table { agents: m },
            };
            let inst = hard_partition_instance(*epsilon, source)?;
            (inst.objective, Some(inst.matroid))
        }
    };
    let n = objective.len();
    let matroid = match (cfg.experiment, &cfg.matroid, hard_matroid) {
        (ExperimentKind::CardinalitySweep, _, _) => AnyMatroid::Cardinality(CardinalityMatroid::new(n, sweep)?),
        (_, Some(spec), _) => spec.build(n)?,
        (_, None, Some(p)) => AnyMatroid::Partition(p),
        (_, None, None) => return Err(config("no matroid configured")),
    };
    let normalizer = if cfg.experiment == ExperimentKind::PartitionSweep {
        objective.num_agents() as f64
    } else {
        1.0
    };
    Ok(Instance {
        objective,
        matroid,
        normalizer,
        pickups: m,
    })
}

fn seeds(master: u64, sweep: usize, rep: usize, tag: &str) -> Seeds {
    Seeds {
        thresholds: sub_seed(master, sweep, rep, tag, "thresholds"),
        mechanism: sub_seed(master, sweep, rep, tag, "mechanism"),
        rounding: sub_seed(master, sweep, rep, tag, "rounding"),
    }
}

fn budget(alg: &AlgorithmConfig, m: usize) -> BenchResult<Option<PrivacyBudget>> {
    alg.epsilon
        .map(|eps| PrivacyBudget::new(eps, alg.delta_for(m)))
        .transpose()
        .map_err(BenchError::from)
}

/// The continuous-greedy configuration of `alg` in one repetition.
pub fn algo_config(alg: &AlgorithmConfig, master: u64, sweep: usize, rep: usize, m: usize) -> BenchResult<AlgoConfig> {
    Ok(AlgoConfig::new(
        alg.eta.ok_or_else(|| config(format!("{}: eta is required", alg.name.tag())))?,
        alg.gamma,
        budget(alg, m)?,
        alg.samples.map_or(SampleMode::Theory, SampleMode::Explicit),
        seeds(master, sweep, rep, alg.name.tag()),
    ))
}

fn dpg_run(inst: &Instance, alg: &AlgorithmConfig, mode: DpgMode, tag: &str, seed_at: (u64, usize, usize)) -> BenchResult<f64> {
    let (master, sweep, rep) = seed_at;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(master, sweep, rep, tag, "mechanism"));
    let (set, _) = dpg_baseline(&inst.objective, &inst.matroid, budget(alg, inst.pickups)?, mode, &mut rng)?;
    Ok(inst.objective.value(&set))
}

/// Utilities of one algorithm in one repetition: one value, or two for the
/// best-of private greedy (basic, then advanced).
pub fn run_algorithm(inst: &Instance, alg: &AlgorithmConfig, master: u64, sweep: usize, rep: usize) -> BenchResult<Vec<f64>> {
    let at = (master, sweep, rep);
    let (obj, mat) = (&inst.objective, &inst.matroid);
    let raw = match alg.name {
        AlgorithmName::Pcg | AlgorithmName::ContinuousGreedy => {
            let cfg = algo_config(alg, master, sweep, rep, inst.pickups)?;
            vec![private_continuous_greedy(obj, mat, &cfg)?.1.value]
        }
        AlgorithmName::Pmcg => {
            let cfg = algo_config(alg, master, sweep, rep, inst.pickups)?;
            vec![private_measured_continuous_greedy(obj, mat, &cfg)?.1.value]
        }
        AlgorithmName::Greedy => vec![obj.value(&nonprivate_greedy(obj, mat)?)],
        AlgorithmName::DpgBasic => vec![dpg_run(inst, alg, DpgMode::Basic, "dpg-basic", at)?],
        AlgorithmName::DpgAdvanced => vec![dpg_run(inst, alg, DpgMode::Advanced, "dpg-advanced", at)?],
        AlgorithmName::DpgRankInvariant => vec![dpg_run(inst, alg, DpgMode::RankInvariant, "dpg-rank-invariant", at)?],
        AlgorithmName::Dpg => vec![
            dpg_run(inst, alg, DpgMode::Basic, "dpg-basic", at)?,
            dpg_run(inst, alg, DpgMode::Advanced, "dpg-advanced", at)?,
        ],
        AlgorithmName::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(master, sweep, rep, "random", "basis"));
            vec![obj.value(&random_basis(mat, &mut rng))]
        }
    };
    Ok(raw.into_iter().map(|v| v / inst.normalizer).collect())
}

/// Rows of the sweep values that completed, plus the failure that stopped the run.
#[derive(Debug)]
pub struct RunFailure {
    pub partial: Vec<ResultRow>,
    pub sweep: usize,
    pub repetition: usize,
    pub error: BenchError,
}

fn aggregate(cfg: &ExperimentConfig, sweep: usize, reps: &[Vec<Vec<f64>>]) -> Vec<ResultRow> {
    cfg.algorithms
        .iter()
        .enumerate()
        .map(|(k, alg)| {
            let column = |j: usize| reps.iter().map(|r| r[k][j]).collect::<Vec<f64>>();
            if alg.name == AlgorithmName::Dpg {
                let basic = ResultRow::new("dpg", sweep, column(0)).with_variant("basic");
                let advanced = ResultRow::new("dpg", sweep, column(1)).with_variant("advanced");
                if advanced.mean > basic.mean {
                    advanced
                } else {
                    basic
                }
            } else {
                ResultRow::new(alg.name.tag(), sweep, column(0))
            }
        })
        .collect()
}

/// Runs every algorithm on every (sweep value, repetition) pair. Repetitions
/// of a sweep value run in parallel; rows come out sorted by sweep order and
/// then algorithm order, independent of scheduling. The first failing sweep
/// value stops the run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, Box<RunFailure>> {
    let fail = |partial: Vec<ResultRow>, sweep, repetition, error| {
        Box::new(RunFailure {
            partial,
            sweep,
            repetition,
            error,
        })
    };
    if let Err(e) = cfg.validate() {
        return Err(fail(Vec::new(), 0, 0, e));
    }
    let loaded = Loaded::new(cfg).map_err(|e| fail(Vec::new(), 0, 0, e))?;
    let mut rows = Vec::new();
    for sweep in cfg.sweep_points() {
        let outcomes: Vec<BenchResult<Vec<Vec<f64>>>> = (0..cfg.repetitions)
            .into_par_iter()
            .map(|rep| {
                let inst = build_instance(cfg, &loaded, sweep, rep)?;
                cfg.algorithms
                    .iter()
                    .map(|alg| run_algorithm(&inst, alg, cfg.seed, sweep, rep))
                    .collect()
            })
            .collect();
        let mut reps = Vec::with_capacity(outcomes.len());
        for (rep, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(u) => reps.push(u),
                Err(e) => {
                    if !reps.is_empty() {
                        rows.extend(aggregate(cfg, sweep, &reps));
                    }
                    return Err(fail(rows, sweep, rep, e));
                }
            }
        }
        let point = aggregate(cfg, sweep, &reps);
        for r in &point {
            log::info!("sweep {sweep}: {} mean {:.4} ± {:.4}", r.algorithm, r.mean, r.stderr);
        }
        rows.extend(point);
    }
    Ok(rows)
}

/// Runs the exact privacy audit described by an `audit` config: the
/// configured instance against the same instance without one agent.
pub fn run_audit(cfg: &ExperimentConfig) -> BenchResult<AuditReport> {
    cfg.validate()?;
    if cfg.experiment != ExperimentKind::Audit {
        return Err(config("expected an `audit` experiment"));
    }
    let loaded = Loaded::new(cfg)?;
    let sweep = cfg.sweep_points()[0];
    let inst = build_instance(cfg, &loaded, sweep, 0)?;
    let agents = inst.objective.num_agents();
    if agents < 2 {
        return Err(config("the audit needs at least two agents"));
    }
    let agent = cfg.audit.as_ref().and_then(|a| a.agent).unwrap_or(agents - 1);
    if agent >= agents {
        return Err(config(format!("audit agent {agent} out of range ({agents} agents)")));
    }
    let neighbor = inst.objective.without_agent(agent)?;
    let alg = &cfg.algorithms[0];
    let variant = match alg.name {
        AlgorithmName::Pmcg => Variant::Measured,
        _ => Variant::Monotone,
    };
    let acfg = algo_config(alg, cfg.seed, sweep, 0, inst.pickups)?;
    Ok(audit_enumerate(variant, &inst.objective, &neighbor, &inst.matroid, &acfg)?)
}

/// Brute-force optimum of the instance an `opt` file describes.
pub fn solve_instance(cfg: &ExperimentConfig) -> BenchResult<(Vec<usize>, f64)> {
    let loaded = Loaded::new(cfg)?;
    let sweep = cfg.sweep_points().first().copied().unwrap_or(0);
    let inst = build_instance(cfg, &loaded, sweep, 0)?;
    Ok(dpsub_core::algorithms::brute_force_opt(&inst.objective, &inst.matroid)?)
}

/// Instance description accepted by `opt`: a dataset, a matroid and a seed
/// for synthetic pickups.
#[derive(Clone, Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub dataset: crate::config::DatasetConfig,
    #[serde(default)]
    pub matroid: Option<MatroidSpec>,
    #[serde(default)]
    pub seed: u64,
}

impl InstanceFile {
    pub fn load(path: &Path) -> BenchResult<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
        let file: InstanceFile = serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
        let mut cfg = ExperimentConfig {
            experiment: ExperimentKind::SingleRun,
            dataset: file.dataset,
            matroid: file.matroid,
            algorithms: vec![AlgorithmConfig {
                name: AlgorithmName::Greedy,
                eta: None,
                gamma: 0.1,
                epsilon: None,
                delta: None,
                samples: None,
            }],
            sweep: Vec::new(),
            repetitions: 1,
            seed: file.seed,
            output: None,
            audit: None,
        };
        cfg.resolve_relative(path);
        cfg.validate()?;
        Ok(cfg)
    }
}
