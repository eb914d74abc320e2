use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use r3_core::harness::{
    compare_runs, emit_plot, expand_runs, parse_config, parse_run_stem, read_run_csv, run_experiment, PlotRun,
    XAxis,
};

#[derive(Parser)]
#[command(name = "r3lab", about = "Seeded R3 / PPO / DDQN benchmark runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds overriding the config.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot one metric column across runs as SVG.
    Plot {
        #[arg(long)]
        runs: String,
        #[arg(long, default_value = "smoothed")]
        metric: String,
        #[arg(long)]
        out: PathBuf,
        /// `episode` or `steps`; defaults to episodes for cartpole runs.
        #[arg(long)]
        x_axis: Option<String>,
    },
    /// Compare final-window smoothed metrics across runs.
    Compare {
        #[arg(long)]
        runs: String,
        #[arg(long, default_value_t = 20)]
        window: usize,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { config, seeds, out } => {
            let mut cfg = parse_config(&config).with_context(|| format!("reading {}", config.display()))?;
            if let Some(seeds) = seeds {
                cfg.seeds = seeds;
            }
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            for run in run_experiment(&cfg)? {
                let last = run.records.last().map(|r| r.smoothed).unwrap_or(f64::NAN);
                println!(
                    "seed {}: {} episodes, final smoothed {:.4} -> {}",
                    run.seed,
                    run.records.len(),
                    last,
                    run.csv_path.display()
                );
            }
        }
        Command::Plot {
            runs,
            metric,
            out,
            x_axis,
        } => {
            let paths = expand_runs(&runs)?;
            let mut plot_runs = Vec::with_capacity(paths.len());
            for path in &paths {
                let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                plot_runs.push(PlotRun {
                    records: read_run_csv(path).with_context(|| format!("reading {}", path.display()))?,
                    label,
                });
            }
            let axis = match x_axis.as_deref() {
                Some("episode") => XAxis::Episode,
                Some("steps") => XAxis::Steps,
                Some(other) => bail!("unknown x axis `{other}`"),
                None => {
                    let cartpole = plot_runs
                        .iter()
                        .all(|r| parse_run_stem(&r.label).is_some_and(|(_, env, _)| env == "cartpole"));
                    if cartpole {
                        XAxis::Episode
                    } else {
                        XAxis::Steps
                    }
                }
            };
            emit_plot(&plot_runs, &metric, axis, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Compare { runs, window, json } => {
            let paths = expand_runs(&runs)?;
            let report = compare_runs(&paths, window)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{report}");
            }
        }
    }
    Ok(())
}
