//! Config files, seeded runs, CSV metrics, SVG plots and run comparison.

mod compare;
mod config;
mod plot;

pub use compare::{compare_runs, final_window_mean, parse_run_stem, ComparisonReport, PairResult, RunSummary};
pub use config::{parse_config, ExperimentConfig};
pub use plot::{emit_plot, metric_value, render_svg, PlotRun, XAxis};

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::algorithms::{build_trainer, RunRecord};
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 9] = [
    "episode",
    "steps",
    "reward",
    "success",
    "smoothed",
    "phase",
    "buf_b",
    "buf_blarge",
    "ms",
];

/// Exponential moving average, `y_0 = x_0`, `y_t = αx_t + (1-α)y_{t-1}`.
pub fn smooth(series: &[f64], alpha: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let mut prev: Option<f64> = None;
    for &x in series {
        let y = match prev {
            None => x,
            Some(p) => alpha * x + (1.0 - alpha) * p,
        };
        out.push(y);
        prev = Some(y);
    }
    out
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub seed: u64,
    pub records: Vec<RunRecord>,
    pub csv_path: PathBuf,
    pub diag_path: PathBuf,
    pub events_path: PathBuf,
}

/// Runs every seed of `cfg` to its step budget, writing
/// `<stem>.csv`, `<stem>.diag.csv` and `<stem>.events.jsonl` into the
/// output directory. Rows are flushed as they are produced.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunOutput>> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    cfg.seeds.iter().map(|&seed| run_seed(cfg, seed)).collect()
}

fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<RunOutput> {
    let stem = cfg.run_stem(seed);
    let csv_path = cfg.out_dir.join(format!("{stem}.csv"));
    let diag_path = cfg.out_dir.join(format!("{stem}.diag.csv"));
    let events_path = cfg.out_dir.join(format!("{stem}.events.jsonl"));
    let setup = cfg.setup(seed);
    let mut trainer = build_trainer(&setup)?;

    let mut metrics = csv::Writer::from_path(&csv_path)?;
    let mut diag = csv::Writer::from_path(&diag_path)?;
    diag.write_record([
        "episode",
        "total",
        "policy",
        "entropy",
        "value_loss",
        "mean_ratio",
        "clip_fraction",
    ])?;
    let mut records = Vec::new();
    log::info!("run {stem}: {} steps", setup.trainer.max_steps);
    let outcome = (|| -> Result<()> {
        while !trainer.context().done(&setup.trainer) {
            let rec = trainer.run_episode()?;
            metrics.serialize(&rec)?;
            if let Some(d) = rec.diag {
                diag.write_record(&[
                    rec.episode.to_string(),
                    d.total.to_string(),
                    d.policy.to_string(),
                    d.entropy.to_string(),
                    d.value_loss.to_string(),
                    d.mean_ratio.to_string(),
                    d.clip_fraction.to_string(),
                ])?;
            }
            records.push(rec);
        }
        Ok(())
    })();
    metrics.flush()?;
    diag.flush()?;
    let mut events = BufWriter::new(File::create(&events_path)?);
    for event in trainer.events() {
        serde_json::to_writer(&mut events, event)?;
        events.write_all(b"\n")?;
    }
    events.flush()?;
    outcome?;
    if let Some(last) = records.last() {
        log::info!("run {stem}: {} episodes, final smoothed {:.4}", records.len(), last.smoothed);
    }
    Ok(RunOutput {
        seed,
        records,
        csv_path,
        diag_path,
        events_path,
    })
}

/// Reads a metrics CSV back, checking the header first.
pub fn read_run_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Schema(format!(
            "{}: header `{}` does not match `{}`",
            path.display(),
            header.iter().collect::<Vec<_>>().join(","),
            CSV_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for row in reader.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Expands a glob into a sorted list of metrics CSVs, skipping diagnostics.
pub fn expand_runs(pattern: &str) -> Result<Vec<PathBuf>> {
    let paths = glob::glob(pattern).map_err(|e| Error::Config(format!("bad glob `{pattern}`: {e}")))?;
    let mut out: Vec<PathBuf> = paths
        .filter_map(|p| p.ok())
        .filter(|p| !p.to_string_lossy().ends_with(".diag.csv"))
        .collect();
    out.sort();
    if out.is_empty() {
        return Err(Error::NoData(format!("no runs match `{pattern}`")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothing_examples() {
        assert_eq!(smooth(&[0.0, 1.0], 0.5), vec![0.0, 0.5]);
        let xs = [0.3, -1.0, 2.5];
        assert_eq!(smooth(&xs, 1.0), xs.to_vec());
        assert_eq!(smooth(&[4.0; 5], 0.2), vec![4.0; 5]);
        assert!(smooth(&[], 0.3).is_empty());
    }

    #[test]
    fn smoothing_is_shift_equivariant() {
        let xs = [0.1, 0.7, -0.2, 1.3];
        let shifted: Vec<f64> = xs.iter().map(|x| x + 3.0).collect();
        for (a, b) in smooth(&xs, 0.3).iter().zip(smooth(&shifted, 0.3)) {
            assert!((a + 3.0 - b).abs() < 1e-12);
        }
    }
}
