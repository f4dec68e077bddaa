//! Run persistence: config loading, trial CSV files, JSON summaries, plot
//! data, and content-hashed run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, SummaryStats, TrialRecord, TRIAL_CSV_HEADER};
use crate::rng::ALGORITHM_LABEL;

pub const SCHEMA_VERSION: &str = "1";

/// Provenance record written next to every run's artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: String,
    pub config: ExperimentConfig,
    pub started_at: String,
    pub finished_at: String,
    /// file name → SHA-256 of its contents.
    pub artifact_hashes: BTreeMap<String, String>,
    pub rng_algorithm_label: String,
}

impl RunManifest {
    pub fn new(config: ExperimentConfig, started_at: String, finished_at: String) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_owned(),
            config,
            started_at,
            finished_at,
            artifact_hashes: BTreeMap::new(),
            rng_algorithm_label: ALGORITHM_LABEL.to_owned(),
        }
    }
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339()
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn write_config(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(cfg)?)?;
    Ok(())
}

/// Create (or reuse with `force`) one output directory per run; an existing
/// non-empty directory without `force` is refused, never overwritten.
pub fn prepare_run_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let non_empty = fs::read_dir(dir)?.next().is_some();
        if non_empty && !force {
            return Err(Error::InvalidArgument(format!(
                "output directory {} already holds a run; pass --force to overwrite",
                dir.display()
            )));
        }
    } else {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

pub fn write_trials_csv(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRIAL_CSV_HEADER);
    out.push('\n');
    for rec in records {
        out.push_str(&rec.to_csv_row());
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRIAL_CSV_HEADER => {}
        other => {
            return Err(Error::InvalidArgument(format!(
                "bad trial CSV header: {other:?}"
            )))
        }
    }
    lines.map(TrialRecord::from_csv_row).collect()
}

pub fn write_summary_json(path: &Path, summary: &SummaryStats) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(summary)?)?;
    Ok(())
}

/// One figure row: abscissa, value and confidence band.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PlotRow {
    pub x: f64,
    pub y: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

pub fn write_plot_csv(path: &Path, rows: &[PlotRow]) -> Result<()> {
    let mut out = String::from("x,y,ci_lo,ci_hi\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.x, r.y, r.ci_lo, r.ci_hi));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Symmetrized spectrum as CSV rows `(k, s_k)` over the index order
/// `(-N..-1, 1..N)`.
pub fn write_spectrum_csv(path: &Path, spec: &crate::spectra::SymmetrizedSpectrum) -> Result<()> {
    let mut out = String::from("k,s_k\n");
    for (k, s) in spec.iter() {
        out.push_str(&format!("{k},{s}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_spectrum_csv(path: &Path) -> Result<crate::spectra::SymmetrizedSpectrum> {
    let text = fs::read_to_string(path)?;
    let mut positive = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue;
        }
        let (k, s) = line
            .split_once(',')
            .ok_or_else(|| Error::InvalidArgument(format!("bad spectrum row `{line}`")))?;
        let k: i64 = k.parse().map_err(|e| Error::InvalidArgument(format!("{e}")))?;
        if k > 0 {
            positive.push(s.parse::<f64>().map_err(|e| Error::InvalidArgument(format!("{e}")))?);
        }
    }
    crate::spectra::SymmetrizedSpectrum::from_positive(positive)
}

/// Trajectory checkpoints as CSV rows `(t, k, s_k)`.
pub fn write_trajectory_csv(path: &Path, traj: &crate::dynamics::Trajectory) -> Result<()> {
    let mut out = String::from("t,k,s_k\n");
    for (t, _, snap) in &traj.steps {
        for (k, s) in snap.iter() {
            out.push_str(&format!("{t},{k},{s}\n"));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Coupling checkpoints as CSV rows `(t, k, phi_k, psi_k)`.
pub fn write_coupling_csv(path: &Path, states: &[crate::dynamics::CouplingState]) -> Result<()> {
    let mut out = String::from("t,k,phi_k,psi_k\n");
    for st in states {
        for (p, (k, _)) in st.s.iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", st.t, k, st.phi[p], st.psi[p]));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Typical locations cached to disk keyed by N (one JSON file per N).
pub fn cached_gamma_quantiles(cache_dir: &Path, n: usize) -> Result<crate::spectra::TypicalLocations> {
    let path = cache_dir.join(format!("gamma_n{n}.json"));
    if path.exists() {
        let text = fs::read_to_string(&path)?;
        let cached: crate::spectra::TypicalLocations = serde_json::from_str(&text)?;
        if cached.n() == n {
            return Ok(cached);
        }
    }
    let fresh = crate::spectra::gamma_quantiles(n);
    fs::create_dir_all(cache_dir)?;
    fs::write(&path, serde_json::to_string(&fresh)?)?;
    Ok(fresh)
}

pub fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

/// Hash every artifact in `dir` (except the manifest itself) into the
/// manifest and write `manifest.json`.
pub fn write_manifest(manifest: &mut RunManifest, dir: &Path) -> Result<PathBuf> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.file_name().is_some_and(|n| n != "manifest.json"))
        .collect();
    names.sort();
    for path in names {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        manifest.artifact_hashes.insert(name, sha256_hex(&path)?);
    }
    let out = dir.join("manifest.json");
    fs::write(&out, serde_json::to_string_pretty(manifest)?)?;
    Ok(out)
}

pub fn load_manifest(dir: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(dir.join("manifest.json"))?;
    Ok(serde_json::from_str(&text)?)
}

/// Recompute the artifact hashes and compare against the manifest.
pub fn verify_manifest(dir: &Path) -> Result<()> {
    let manifest = load_manifest(dir)?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::CheckFailed(format!(
            "manifest schema {} not supported by this build (expected {SCHEMA_VERSION})",
            manifest.schema_version
        )));
    }
    for (name, recorded) in &manifest.artifact_hashes {
        let actual = sha256_hex(&dir.join(name))?;
        if &actual != recorded {
            return Err(Error::CheckFailed(format!(
                "artifact {name} hash mismatch: recorded {recorded}, actual {actual}"
            )));
        }
    }
    Ok(())
}
