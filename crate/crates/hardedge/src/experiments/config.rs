//! Reproducible experiment descriptions and per-trial records.

use serde::{Deserialize, Serialize};

use crate::ensembles::EntryLaw;
use crate::error::{Error, Result};

/// How the row count M exceeds the column count: square, or the
/// nearly-square offset `⌈log N⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MOffset {
    #[default]
    Zero,
    CeilLogN,
}

impl MOffset {
    pub fn offset(&self, n: usize) -> usize {
        match self {
            MOffset::Zero => 0,
            MOffset::CeilLogN => (n as f64).ln().ceil() as usize,
        }
    }

    pub fn rows(&self, n: usize) -> usize {
        n + self.offset(n)
    }
}

/// Exponent knobs entering thresholds and allowances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonKnobs {
    /// The `N^ε` slack exponent (default 0.2).
    pub eps: f64,
    /// The shift exponent δ of the two-sided bound (default 1/2).
    pub delta: f64,
}

impl Default for EpsilonKnobs {
    fn default() -> Self {
        Self { eps: 0.2, delta: 0.5 }
    }
}

/// A reproducible Monte Carlo run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    #[serde(rename = "M_offset", default)]
    pub m_offset: MOffset,
    pub ensemble: EntryLaw,
    #[serde(default)]
    pub lambda_or_t_grid: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub epsilon_knobs: EpsilonKnobs,
    #[serde(default = "default_output_path")]
    pub output_path: String,
}

fn default_output_path() -> String {
    "runs".to_owned()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 100 {
            return Err(Error::InvalidArgument(format!(
                "trials must be ≥ 100 (got {})",
                self.trials
            )));
        }
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "N_list must be non-empty and sorted ascending".into(),
            ));
        }
        self.ensemble.validate()
    }

    /// Master seed of one `(experiment, N)` cell, so cells draw independent
    /// streams while the whole run stays a pure function of `master_seed`.
    pub fn cell_seed(&self, n: usize) -> u64 {
        self.master_seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

/// One Monte Carlo trial's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment: String,
    pub n: usize,
    pub m: usize,
    pub ensemble: String,
    /// λ, t or r, depending on the experiment.
    pub param: f64,
    pub trial: u64,
    pub seed: u64,
    pub sigma1: f64,
    pub sigma_n: f64,
    pub kappa: f64,
    pub aux1: f64,
    pub aux2: f64,
}

/// Exact CSV header of trial records.
pub const TRIAL_CSV_HEADER: &str = "experiment,N,M,ensemble,param,trial,seed,sigma1,sigmaN,kappa,aux1,aux2";

impl TrialRecord {
    pub fn validate(&self) -> Result<()> {
        if self.sigma1 > self.sigma_n {
            return Err(Error::CheckFailed(format!(
                "sigma1 = {} exceeds sigmaN = {}",
                self.sigma1, self.sigma_n
            )));
        }
        if self.kappa.is_finite() {
            let expect = self.sigma_n / self.sigma1;
            if (self.kappa - expect).abs() > 1e-12 * expect.max(1.0) {
                return Err(Error::CheckFailed(format!(
                    "kappa = {} inconsistent with sigmaN/sigma1 = {expect}",
                    self.kappa
                )));
            }
        }
        Ok(())
    }

    /// CSV row with shortest-round-trip float formatting.
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.n,
            self.m,
            self.ensemble,
            self.param,
            self.trial,
            self.seed,
            self.sigma1,
            self.sigma_n,
            self.kappa,
            self.aux1,
            self.aux2
        )
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let parts: Vec<&str> = row.split(',').collect();
        if parts.len() != 12 {
            return Err(Error::InvalidArgument(format!(
                "expected 12 CSV fields, got {}",
                parts.len()
            )));
        }
        let f = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("bad float `{s}`: {e}")))
        };
        Ok(Self {
            experiment: parts[0].to_owned(),
            n: parts[1].parse().map_err(|e| Error::InvalidArgument(format!("{e}")))?,
            m: parts[2].parse().map_err(|e| Error::InvalidArgument(format!("{e}")))?,
            ensemble: parts[3].to_owned(),
            param: f(parts[4])?,
            trial: parts[5].parse().map_err(|e| Error::InvalidArgument(format!("{e}")))?,
            seed: parts[6].parse().map_err(|e| Error::InvalidArgument(format!("{e}")))?,
            sigma1: f(parts[7])?,
            sigma_n: f(parts[8])?,
            kappa: f(parts[9])?,
            aux1: f(parts[10])?,
            aux2: f(parts[11])?,
        })
    }
}
