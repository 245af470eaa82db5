use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sparse_rank::depclass::{CharEnsemble, MAX_K};

pub const SEED_ENV: &str = "SPARSE_RANK_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Corank,
    Bipartite,
    Kcore,
    Census,
    Asym,
    Gradcode,
    Probes,
    Classcheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Corank => "corank",
            Command::Bipartite => "bipartite",
            Command::Kcore => "kcore",
            Command::Census => "census",
            Command::Asym => "asym",
            Command::Gradcode => "gradcode",
            Command::Probes => "probes",
            Command::Classcheck => "classcheck",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    #[default]
    Symmetric,
    Bipartite,
}

impl From<Ensemble> for CharEnsemble {
    fn from(e: Ensemble) -> Self {
        match e {
            Ensemble::Symmetric => CharEnsemble::Symmetric,
            Ensemble::Bipartite => CharEnsemble::Bipartite,
        }
    }
}

/// Parameters as given by flags or a config file; unset fields fall through
/// to the next source.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Only read from config files; the command line names it positionally.
    #[arg(skip)]
    pub command: Option<Command>,
    /// Vertices, matrix side or machines.
    #[arg(long)]
    pub n: Option<usize>,
    /// Average degree (corank, bipartite, kcore, census, asym) or row weight
    /// (gradcode).
    #[arg(long)]
    pub d: Option<f64>,
    /// Straggler fraction.
    #[arg(long)]
    pub p: Option<f64>,
    /// Core order (kcore) or column count (classcheck; default 2, 3 and 4).
    #[arg(long)]
    pub k: Option<usize>,
    /// Stacking factor of the ABC code.
    #[arg(long)]
    pub gamma: Option<usize>,
    /// Trials, or samples per probe for `probes`.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Largest dependency size enumerated by census.
    #[arg(long = "kmax")]
    pub k_max: Option<usize>,
    /// Master seed [default: $SPARSE_RANK_SEED, else 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Matrix ensemble for census.
    #[arg(long, value_enum)]
    pub ensemble: Option<Ensemble>,
}

impl Params {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields of `self` win over `base`.
    pub fn overlay(self, base: Params) -> Params {
        Params {
            command: self.command.or(base.command),
            n: self.n.or(base.n),
            d: self.d.or(base.d),
            p: self.p.or(base.p),
            k: self.k.or(base.k),
            gamma: self.gamma.or(base.gamma),
            trials: self.trials.or(base.trials),
            k_max: self.k_max.or(base.k_max),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            workers: self.workers.or(base.workers),
            ensemble: self.ensemble.or(base.ensemble),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n: usize,
    pub d: f64,
    pub p: f64,
    /// `None` for `classcheck` means every supported size.
    pub k: Option<usize>,
    pub gamma: usize,
    pub trials: usize,
    pub k_max: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: usize,
    pub ensemble: Ensemble,
}

fn env_seed() -> anyhow::Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => Ok(Some(s.trim().parse().with_context(|| format!("{SEED_ENV}={s:?} is not a u64"))?)),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("{SEED_ENV}: {e}"),
    }
}

impl ExperimentConfig {
    /// Applies per-command defaults (seed: flag, then file, then
    /// `SPARSE_RANK_SEED`, then 0) and validates every range before any
    /// sampling happens.
    pub fn resolve(command: Command, params: Params) -> anyhow::Result<Self> {
        let (n, d, trials) = match command {
            Command::Corank | Command::Bipartite => (1000, 3.0, 10),
            Command::Kcore => (1000, 15.0, 10),
            Command::Census => (2000, 3.0, 10),
            Command::Asym => (200_000, 3.0, 10),
            Command::Gradcode => (512, 8.0, 50),
            Command::Probes => (0, 0.0, 100_000),
            Command::Classcheck => (0, 0.0, 1),
        };
        let seed = match params.seed {
            Some(s) => s,
            None => env_seed()?.unwrap_or(0),
        };
        let k = match command {
            Command::Classcheck => params.k,
            _ => Some(params.k.unwrap_or(3)),
        };
        let config = ExperimentConfig {
            command,
            n: params.n.unwrap_or(n),
            d: params.d.unwrap_or(d),
            p: params.p.unwrap_or(0.1),
            k,
            gamma: params.gamma.unwrap_or(2),
            trials: params.trials.unwrap_or(trials),
            k_max: params.k_max.unwrap_or(6),
            seed,
            out: params.out,
            format: params.format.unwrap_or_default(),
            workers: params.workers.unwrap_or(1),
            ensemble: params.ensemble.unwrap_or_default(),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> anyhow::Result<()> {
        ensure!(self.d.is_finite() && self.d >= 0.0, "--d must be finite and >= 0 (got {})", self.d);
        ensure!((0.0..=1.0).contains(&self.p), "--p must lie in [0, 1] (got {})", self.p);
        ensure!(self.trials >= 1, "--trials must be at least 1");
        ensure!(self.workers >= 1, "--workers must be at least 1");
        ensure!(
            (1..=MAX_K).contains(&self.k_max),
            "--kmax must lie in 1..={MAX_K} (got {})",
            self.k_max
        );
        match self.command {
            Command::Probes | Command::Classcheck => {}
            _ => ensure!(self.n >= 1, "--n must be at least 1"),
        }
        match self.command {
            Command::Kcore => ensure!(self.k.unwrap_or(0) >= 3, "--k must be at least 3 for kcore"),
            Command::Classcheck => {
                if let Some(k) = self.k {
                    ensure!((1..=4).contains(&k), "--k must lie in 1..=4 for classcheck (got {k})");
                }
            }
            Command::Gradcode => {
                ensure!(self.d.fract() == 0.0 && self.d >= 1.0, "--d must be a positive integer for gradcode");
                let d = self.d as usize;
                ensure!(self.gamma >= 1, "--gamma must be at least 1");
                ensure!(self.n % self.gamma == 0, "--gamma must divide --n");
                ensure!(d % self.gamma == 0, "--gamma must divide --d");
                ensure!(self.n % d == 0, "--d must divide --n");
                ensure!(((self.n as f64 * self.p) as usize) < self.n, "--p leaves no surviving column");
            }
            _ => {}
        }
        Ok(())
    }
}
