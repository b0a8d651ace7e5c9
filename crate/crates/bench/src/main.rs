use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dpsub_bench::config::ExperimentConfig;
use dpsub_bench::dataset::{save_pickups, synth_pickups, BBox};
use dpsub_bench::runner::{run_audit, solve_instance, InstanceFile};
use dpsub_bench::{run_and_report, BenchError};
use serde_json::json;

#[derive(Parser)]
#[command(name = "dpsub", version, about = "Private submodular maximization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write summary.csv, raw.jsonl, chart.svg and manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exact privacy audit; prints the report as JSON.
    Audit {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write uniform synthetic pickups in a bounding box.
    Synth {
        /// `lat,lon,lat,lon` of two opposite corners.
        #[arg(long, allow_hyphen_values = true)]
        bbox: BBox,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Brute-force optimum of a small instance.
    Opt {
        #[arg(long)]
        instance: PathBuf,
    },
}

fn execute(command: Command) -> Result<(), BenchError> {
    match command {
        Command::Run { config, out, seed } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let out = out
                .or_else(|| cfg.output.clone())
                .ok_or_else(|| BenchError::Config("no output directory (use --out)".into()))?;
            let rows = run_and_report(&cfg, &out)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
        }
        Command::Audit { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_audit(&cfg)?;
            let summary = json!({
                "epsilon_claimed": report.epsilon_claimed,
                "epsilon_observed": report.epsilon_observed,
                "delta": report.delta,
                "delta_excess": report.delta_excess,
                "sequences": report.sequences,
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("json value serializes"));
        }
        Command::Synth { bbox, m, seed, out } => {
            let data = synth_pickups(&bbox, m, seed)?;
            save_pickups(&out, &data)?;
        }
        Command::Opt { instance } => {
            let cfg = InstanceFile::load(&instance)?;
            let (set, value) = solve_instance(&cfg)?;
            println!("{}", json!({"set": set, "value": value}));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
