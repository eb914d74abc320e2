use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::read_run_csv;
use crate::algorithms::{Algorithm, RunRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub path: PathBuf,
    pub algorithm: String,
    pub env: String,
    pub seed: u64,
    /// Mean of the smoothed column over the final window.
    pub final_mean: f64,
}

/// Seed-matched head-to-head between two algorithms on one environment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairResult {
    pub env: String,
    pub a: String,
    pub b: String,
    pub a_wins: usize,
    pub b_wins: usize,
    pub ties: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub window: usize,
    pub runs: Vec<RunSummary>,
    pub pairs: Vec<PairResult>,
    pub plots: Vec<PathBuf>,
}

/// Splits `<algo>_<env><size>_seed<seed>` into its parts.
pub fn parse_run_stem(stem: &str) -> Option<(String, String, u64)> {
    let (head, seed) = stem.rsplit_once("_seed")?;
    let seed = seed.parse().ok()?;
    let mut names = [
        Algorithm::Ppo,
        Algorithm::Ddqn,
        Algorithm::WeakR3,
        Algorithm::R3,
        Algorithm::Dr3,
    ]
    .map(|a| a.name());
    names.sort_by_key(|n| std::cmp::Reverse(n.len()));
    let algo = names.into_iter().find(|n| head.starts_with(&format!("{n}_")))?;
    let env = &head[algo.len() + 1..];
    (!env.is_empty()).then(|| (algo.to_string(), env.to_string(), seed))
}

pub fn final_window_mean(records: &[RunRecord], window: usize) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::NoData("run has no episodes".into()));
    }
    let tail = &records[records.len().saturating_sub(window.max(1))..];
    Ok(tail.iter().map(|r| r.smoothed).sum::<f64>() / tail.len() as f64)
}

/// Per-run final-window means and seed-matched win/loss counts for every
/// pair of algorithms run on the same environment.
pub fn compare_runs(paths: &[PathBuf], window: usize) -> Result<ComparisonReport> {
    let mut runs = Vec::with_capacity(paths.len());
    for path in paths {
        runs.push(summarize(path, window)?);
    }
    let mut by_key: BTreeMap<(String, String), BTreeMap<u64, f64>> = BTreeMap::new();
    for run in &runs {
        by_key
            .entry((run.env.clone(), run.algorithm.clone()))
            .or_default()
            .insert(run.seed, run.final_mean);
    }
    let keys: Vec<_> = by_key.keys().cloned().collect();
    let mut pairs = Vec::new();
    for (i, (env_a, algo_a)) in keys.iter().enumerate() {
        for (env_b, algo_b) in &keys[i + 1..] {
            if env_a != env_b {
                continue;
            }
            let (sa, sb) = (&by_key[&(env_a.clone(), algo_a.clone())], &by_key[&(env_b.clone(), algo_b.clone())]);
            let mut pair = PairResult {
                env: env_a.clone(),
                a: algo_a.clone(),
                b: algo_b.clone(),
                a_wins: 0,
                b_wins: 0,
                ties: 0,
            };
            for (seed, va) in sa {
                let Some(vb) = sb.get(seed) else { continue };
                if va > vb {
                    pair.a_wins += 1;
                } else if vb > va {
                    pair.b_wins += 1;
                } else {
                    pair.ties += 1;
                }
            }
            pairs.push(pair);
        }
    }
    Ok(ComparisonReport {
        window,
        runs,
        pairs,
        plots: Vec::new(),
    })
}

fn summarize(path: &Path, window: usize) -> Result<RunSummary> {
    let records = read_run_csv(path)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Schema(format!("{}: no file name", path.display())))?;
    let (algorithm, env, seed) = parse_run_stem(stem).ok_or_else(|| {
        Error::Schema(format!("{}: expected <algo>_<env>_seed<n>.csv", path.display()))
    })?;
    Ok(RunSummary {
        path: path.to_path_buf(),
        algorithm,
        env,
        seed,
        final_mean: final_window_mean(&records, window)?,
    })
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "final-window ({}) smoothed means:", self.window)?;
        for run in &self.runs {
            writeln!(f, "  {:<8} {:<12} seed {:<6} {:.4}", run.algorithm, run.env, run.seed, run.final_mean)?;
        }
        for p in &self.pairs {
            writeln!(
                f,
                "{}: {} vs {}: {}-{} ({} ties)",
                p.env, p.a, p.b, p.a_wins, p.b_wins, p.ties
            )?;
        }
        Ok(())
    }
}
