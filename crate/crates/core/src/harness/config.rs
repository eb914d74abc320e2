use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{Algorithm, DdqnConfig, RunSetup, TrainerConfig};
use crate::envs::{EnvKind, EnvOptions};
use crate::nets::{AdamConfig, NetConfig};
use crate::ppo::PpoConfig;
use crate::{Error, Result};

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}

/// One experiment: an algorithm on one environment over a list of seeds.
///
/// Tables that are left out take their defaults, so a file naming only the
/// algorithm, environment, size and seeds is complete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub env: EnvKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    pub seeds: Vec<u64>,
    /// Environment-step budget per run; overrides `trainer.max_steps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub env_options: EnvOptions,
    #[serde(default)]
    pub trainer: TrainerConfig,
    #[serde(default)]
    pub ppo: PpoConfig,
    #[serde(default)]
    pub adam: AdamConfig,
    #[serde(default)]
    pub ddqn: DdqnConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net: Option<NetConfig>,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, env: EnvKind, size: Option<usize>, seeds: Vec<u64>) -> ExperimentConfig {
        ExperimentConfig {
            algorithm,
            env,
            size,
            seeds,
            max_steps: None,
            out_dir: default_out_dir(),
            env_options: EnvOptions::default(),
            trainer: TrainerConfig::default(),
            ppo: PpoConfig::default(),
            adam: AdamConfig::default(),
            ddqn: DdqnConfig::default(),
            net: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.normalize();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Folds the top-level step budget into the trainer table so both agree.
    pub fn normalize(&mut self) {
        match self.max_steps {
            Some(steps) => self.trainer.max_steps = steps,
            None => self.max_steps = Some(self.trainer.max_steps),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        if self.env.is_gridworld() {
            match self.size {
                Some(s) if (5..=9).contains(&s) => {}
                Some(s) => return Err(Error::InvalidSize(s as i64)),
                None => return Err(Error::Config(format!("{} needs a size", self.env))),
            }
        }
        match (self.algorithm, self.env.is_gridworld()) {
            (Algorithm::Dr3, true) => {
                return Err(Error::Config("dr3 targets dense-reward environments (cartpole)".into()))
            }
            (Algorithm::R3 | Algorithm::WeakR3, false) => {
                return Err(Error::Config(format!(
                    "{} targets sparse-reward gridworlds, not {}",
                    self.algorithm, self.env
                )))
            }
            _ => {}
        }
        if self.trainer.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        self.trainer.validate()?;
        self.ppo.validate()?;
        if self.adam.lr.is_nan() || self.adam.lr <= 0.0 {
            return Err(Error::Config(format!("adam.lr {} must be positive", self.adam.lr)));
        }
        Ok(())
    }

    pub fn setup(&self, seed: u64) -> RunSetup {
        let mut setup = RunSetup::new(self.algorithm, self.env, self.size, seed);
        setup.env_options = self.env_options;
        setup.trainer = self.trainer.clone();
        setup.ppo = self.ppo;
        setup.adam = self.adam;
        setup.ddqn = self.ddqn;
        setup.net = self.net.clone();
        setup
    }

    /// `<algo>_<env><size>_seed<seed>`, the stem shared by all run artifacts.
    pub fn run_stem(&self, seed: u64) -> String {
        let size = self.size.map(|s| s.to_string()).unwrap_or_default();
        format!("{}_{}{}_seed{}", self.algorithm, self.env, size, seed)
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    ExperimentConfig::from_toml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_toml("algorithm = \"r3\"\nenv = \"doorkey\"\nsize = 6\nseeds = [10]\n").unwrap();
        assert_eq!(cfg.trainer.sigma, 2.0);
        assert_eq!(cfg.trainer.capacity_b, 10);
        assert_eq!(cfg.trainer.capacity_b_large, 20);
        assert_eq!(cfg.max_steps, Some(300_000));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::from_toml("algorithm = \"r3\"\nenv = \"doorkey\"\nsize = 6\nseeds = [1]\nfoo = 3\n");
        assert!(matches!(err, Err(Error::Config(_))));
        let err = ExperimentConfig::from_toml(
            "algorithm = \"r3\"\nenv = \"doorkey\"\nsize = 6\nseeds = [1]\n[trainer]\nsigmaa = 3.0\n",
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn negative_and_out_of_range_sizes_rejected() {
        assert!(ExperimentConfig::from_toml("algorithm = \"r3\"\nenv = \"doorkey\"\nsize = -6\nseeds = [1]\n").is_err());
        assert!(matches!(
            ExperimentConfig::from_toml("algorithm = \"r3\"\nenv = \"doorkey\"\nsize = 12\nseeds = [1]\n"),
            Err(Error::InvalidSize(12))
        ));
    }

    #[test]
    fn algorithm_env_pairs_checked() {
        assert!(ExperimentConfig::from_toml("algorithm = \"dr3\"\nenv = \"crossing\"\nsize = 5\nseeds = [1]\n").is_err());
        assert!(ExperimentConfig::from_toml("algorithm = \"r3\"\nenv = \"cartpole\"\nseeds = [1]\n").is_err());
        assert!(ExperimentConfig::from_toml("algorithm = \"ppo\"\nenv = \"cartpole\"\nseeds = []\n").is_err());
        assert!(ExperimentConfig::from_toml("algorithm = \"ddqn\"\nenv = \"cartpole\"\nseeds = [1]\n").is_ok());
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg = ExperimentConfig::from_toml(
            "algorithm = \"dr3\"\nenv = \"cartpole\"\nseeds = [50, 51]\nmax_steps = 1000\n[ppo]\nepochs_per_trajectory = 3\n",
        )
        .unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(again.trainer.max_steps, 1000);
    }
}
