//! Experiment harness for private decomposable submodular maximization:
//! pickup datasets, the location instances, a seeded parallel runner and
//! report emission.

pub mod config;
pub mod dataset;
mod error;
pub mod grid;
pub mod hard;
pub mod reference;
pub mod report;
pub mod runner;

use std::path::Path;

use dpsub_core::privacy::{eps0_composition, eps0_monotone, eps0_nonmonotone, Composition};
use serde_json::{json, Value};

pub use error::{BenchError, BenchResult};

use config::{AlgorithmName, ExperimentConfig, ExperimentKind, PickupSource};
use report::{emit_report, ReportOptions, ResultRow};

/// Per-round budgets each private algorithm spends at the first sweep value.
fn budgets(cfg: &ExperimentConfig) -> Value {
    let first = cfg.sweep_points()[0];
    let m = match (&cfg.dataset.pickups, cfg.experiment) {
        (_, ExperimentKind::PartitionSweep) => first,
        (PickupSource::Synthetic { m, .. }, _) => *m,
        (PickupSource::File { sample, .. }, _) => sample.unwrap_or(0),
    };
    let rank = match cfg.experiment {
        ExperimentKind::CardinalitySweep => first,
        _ => 2,
    };
    let mut out = serde_json::Map::new();
    for alg in &cfg.algorithms {
        let Some(eps) = alg.epsilon else { continue };
        if m == 0 && alg.delta.is_none() {
            continue;
        }
        let delta = alg.delta_for(m);
        let eps0 = match alg.name {
            AlgorithmName::Pcg | AlgorithmName::DpgRankInvariant => eps0_monotone(eps, delta),
            AlgorithmName::Pmcg => eps0_nonmonotone(eps, delta),
            AlgorithmName::DpgAdvanced => eps0_composition(eps, delta, rank, Composition::Advanced),
            _ => eps0_composition(eps, delta, rank, Composition::Basic),
        };
        if let Ok(b) = eps0 {
            out.insert(
                alg.name.tag().into(),
                json!({"epsilon": eps, "delta": delta, "eps0": b.eps0, "derivation": b.derivation, "at_sweep": first}),
            );
        }
    }
    Value::Object(out)
}

pub fn manifest(cfg: &ExperimentConfig, rows: &[ResultRow], failure: Option<&runner::RunFailure>) -> Value {
    let reference = match cfg.experiment {
        ExperimentKind::CardinalitySweep => reference::cardinality_reference(),
        ExperimentKind::PartitionSweep => reference::partition_reference(),
        _ => Value::Null,
    };
    let variants: Vec<Value> = rows
        .iter()
        .filter_map(|r| r.variant.as_ref().map(|v| json!({"algorithm": r.algorithm, "sweep": r.sweep, "variant": v})))
        .collect();
    let mut m = json!({
        "status": if failure.is_some() { "failed" } else { "ok" },
        "config": cfg,
        "seed_derivation": {
            "dataset": "sha256(\"{master}|{sweep}|{rep}|dataset\")[0..8] little-endian",
            "algorithm": "sha256(\"{master}|{sweep}|{rep}|{algorithm}|{purpose}\")[0..8] little-endian",
        },
        "round_budgets": budgets(cfg),
        "selected_variants": variants,
        "reference": reference,
    });
    if let Some(f) = failure {
        m["error"] = json!({
            "sweep": f.sweep,
            "repetition": f.repetition,
            "message": f.error.to_string(),
            "completed_rows": f.partial.len(),
        });
    }
    m
}

fn chart_labels(cfg: &ExperimentConfig) -> (String, String, String) {
    match cfg.experiment {
        ExperimentKind::CardinalitySweep => ("Utility versus rank".into(), "rank r".into(), "utility".into()),
        ExperimentKind::PartitionSweep => (
            "Normalized utility versus dataset size".into(),
            "pickups m".into(),
            "utility / m".into(),
        ),
        _ => ("Utility".into(), "sweep".into(), "utility".into()),
    }
}

/// Runs `cfg` and writes the report into `out`. On failure the completed
/// rows are still written, with the error recorded in `manifest.json`.
pub fn run_and_report(cfg: &ExperimentConfig, out: &Path) -> BenchResult<Vec<ResultRow>> {
    let opts = |rows: &[ResultRow], failure: Option<&runner::RunFailure>| ReportOptions {
        chart: Some(chart_labels(cfg)),
        manifest: Some(manifest(cfg, rows, failure)),
    };
    match runner::run_experiment(cfg) {
        Ok(rows) => {
            emit_report(&rows, out, &opts(&rows, None))?;
            Ok(rows)
        }
        Err(failure) => {
            std::fs::create_dir_all(out).map_err(|e| BenchError::Io(out.to_path_buf(), e))?;
            let body = serde_json::to_string_pretty(&manifest(cfg, &failure.partial, Some(&failure))).expect("json value serializes");
            let path = out.join("manifest.json");
            std::fs::write(&path, body + "\n").map_err(|e| BenchError::Io(path.clone(), e))?;
            if !failure.partial.is_empty() {
                let mut o = opts(&failure.partial, Some(&failure));
                o.manifest = None;
                emit_report(&failure.partial, out, &o)?;
            }
            Err(failure.error)
        }
    }
}
