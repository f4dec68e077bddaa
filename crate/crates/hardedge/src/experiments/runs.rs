//! Monte Carlo harnesses reproducing the quantitative statements at desk
//! scale: smoothed analysis of σ₁, coupled relaxation, the two-sided
//! universality bound, the exact complex hard-edge law, condition-number
//! statistics, and the nearly-square extension.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{coupled_dbm_from_spectra, perturb, NoiseMode};
use crate::ensembles::{sample_matrix, EntryLaw};
use crate::error::{Error, Result};
use crate::experiments::calibration::{
    CONDITION_STAT_MEDIAN_CAL, KAPPA_R_GRID, SMOOTHED_STAT_MEDIAN_CAL,
};
use crate::experiments::config::{ExperimentConfig, TrialRecord};
use crate::experiments::stats::{
    bootstrap_log_slope_ci, dkw_bound, ks_critical_95, ks_statistic, median, quantile_sorted,
    survival,
};
use crate::rng::RngStreamSpec;
use crate::spectra::{condition_number, singular_values, SingularSpectrum, SymmetrizedSpectrum};

/// Quantiles of one statistic in one `(N, param)` cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantileRow {
    pub n: usize,
    pub param: f64,
    pub label: String,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    /// 95% order-statistic confidence interval for the median.
    pub p50_ci_lo: f64,
    pub p50_ci_hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KsRow {
    pub n: usize,
    pub label: String,
    pub ks: f64,
    pub critical: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeRow {
    pub label: String,
    pub slope: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// A threshold check reported as a margin (≥ 0 means satisfied), never as
/// a bare pass/fail, so tightening knobs degrades margins monotonically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginRow {
    pub n: usize,
    pub param: f64,
    pub label: String,
    pub margin: f64,
}

/// JSON summary emitted beside the trial CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryStats {
    pub config_echo: ExperimentConfig,
    pub quantiles: Vec<QuantileRow>,
    pub ks: Vec<KsRow>,
    pub slopes: Vec<SlopeRow>,
    pub margins: Vec<MarginRow>,
    pub calibration_constants: BTreeMap<String, f64>,
}

impl SummaryStats {
    fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            config_echo: cfg.clone(),
            quantiles: Vec::new(),
            ks: Vec::new(),
            slopes: Vec::new(),
            margins: Vec::new(),
            calibration_constants: BTreeMap::new(),
        }
    }

    /// Worst margin across all rows (`+∞` when none were recorded).
    pub fn worst_margin(&self) -> f64 {
        self.margins.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn all_margins_ok(&self) -> bool {
        self.worst_margin() >= 0.0
    }
}

/// A completed run: summary plus every trial record in deterministic order.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: SummaryStats,
    pub records: Vec<TrialRecord>,
}

fn quantile_row(n: usize, param: f64, label: &str, values: &[f64]) -> QuantileRow {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let c = v.len() as f64;
    // binomial order-statistic band around the median rank
    let half_width = 1.96 * 0.5 * c.sqrt();
    let lo_rank = ((0.5 * c - half_width).floor().max(0.0) as usize).min(v.len() - 1);
    let hi_rank = ((0.5 * c + half_width).ceil() as usize).min(v.len() - 1);
    QuantileRow {
        n,
        param,
        label: label.to_owned(),
        p50: quantile_sorted(&v, 0.5),
        p90: quantile_sorted(&v, 0.9),
        p99: quantile_sorted(&v, 0.99),
        p50_ci_lo: v[lo_rank],
        p50_ci_hi: v[hi_rank],
        count: v.len(),
    }
}

fn record_from_spectrum(
    experiment: &str,
    ensemble: &str,
    n: usize,
    m: usize,
    param: f64,
    trial: u64,
    seed: u64,
    sv: &SingularSpectrum,
    aux1: f64,
    aux2: f64,
) -> TrialRecord {
    TrialRecord {
        experiment: experiment.to_owned(),
        n,
        m,
        ensemble: ensemble.to_owned(),
        param,
        trial,
        seed,
        sigma1: sv.smallest(),
        sigma_n: sv.largest(),
        kappa: condition_number(sv).value,
        aux1,
        aux2,
    }
}

/// Smoothed analysis of σ₁: per trial sample `H` and a shared `G`, evaluate
/// `D = |σ₁(H+λG) − √(1+λ²) σ₁(G)|` across the λ grid and summarize the
/// normalized statistic `N² log(1+λ²) D / √(1+λ²)`.
pub fn run_smoothed_singular(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    if cfg.lambda_or_t_grid.is_empty() {
        return Err(Error::InvalidArgument("need a λ grid".into()));
    }
    let gauss = cfg.ensemble.gaussian_counterpart();
    let mut summary = SummaryStats::new(cfg);
    summary
        .calibration_constants
        .insert("smoothed_stat_median_cal".into(), SMOOTHED_STAT_MEDIAN_CAL);
    let mut records = Vec::new();
    // per (n, λ): per-trial D and normalized statistic
    let mut d_cells: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    let mut stat_cells: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();

    for &n in &cfg.n_list {
        let seed = cfg.cell_seed(n);
        let rows: Result<Vec<_>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let h = sample_matrix(&cfg.ensemble, n, n, &RngStreamSpec::for_trial(seed, trial, 0))?;
                let g = sample_matrix(&gauss, n, n, &RngStreamSpec::for_trial(seed, trial, 1))?;
                let sv_g = singular_values(&g)?;
                let mut per_lambda = Vec::with_capacity(cfg.lambda_or_t_grid.len());
                for &lambda in &cfg.lambda_or_t_grid {
                    let sv_p = singular_values(&perturb(&h, lambda, &g)?)?;
                    per_lambda.push((lambda, sv_p, sv_g.smallest()));
                }
                Ok((trial, per_lambda))
            })
            .collect();
        for (trial, per_lambda) in rows? {
            for (li, (lambda, sv_p, sigma1_g)) in per_lambda.into_iter().enumerate() {
                let scale = (1.0 + lambda * lambda).sqrt();
                let d = (sv_p.smallest() - scale * sigma1_g).abs();
                let stat = (n * n) as f64 * (1.0 + lambda * lambda).ln() * d / scale;
                d_cells.entry((n, li)).or_default().push(d);
                stat_cells.entry((n, li)).or_default().push(stat);
                records.push(record_from_spectrum(
                    &cfg.name,
                    &cfg.ensemble.kind(),
                    n,
                    n,
                    lambda,
                    trial,
                    trial * 16,
                    &sv_p,
                    sigma1_g,
                    stat,
                ));
            }
        }
    }

    for (&(n, li), stats) in &stat_cells {
        let lambda = cfg.lambda_or_t_grid[li];
        summary.quantiles.push(quantile_row(n, lambda, "normalized-sigma1-gap", stats));
        summary.margins.push(MarginRow {
            n,
            param: lambda,
            label: "median-normalized-gap-under-calibration".into(),
            margin: SMOOTHED_STAT_MEDIAN_CAL - median(stats),
        });
    }
    // slopes of log median D against log λ (per N) and against log N (per λ)
    for &n in &cfg.n_list {
        let per: Vec<Vec<f64>> =
            (0..cfg.lambda_or_t_grid.len()).map(|li| d_cells[&(n, li)].clone()).collect();
        if per.len() >= 2 {
            let (s, lo, hi) = bootstrap_log_slope_ci(
                &cfg.lambda_or_t_grid,
                &per,
                200,
                &RngStreamSpec::new(cfg.cell_seed(n), 1_000_001),
            );
            summary.slopes.push(SlopeRow {
                label: format!("log-medianD-vs-log-lambda/N={n}"),
                slope: s,
                ci_lo: lo,
                ci_hi: hi,
            });
        }
    }
    if cfg.n_list.len() >= 2 {
        for (li, &lambda) in cfg.lambda_or_t_grid.iter().enumerate() {
            let params: Vec<f64> = cfg.n_list.iter().map(|&n| n as f64).collect();
            let per: Vec<Vec<f64>> = cfg.n_list.iter().map(|&n| d_cells[&(n, li)].clone()).collect();
            let (s, lo, hi) = bootstrap_log_slope_ci(
                &params,
                &per,
                200,
                &RngStreamSpec::new(cfg.master_seed, 1_000_002 + li as u64),
            );
            summary.slopes.push(SlopeRow {
                label: format!("log-medianD-vs-log-N/lambda={lambda}"),
                slope: s,
                ci_lo: lo,
                ci_hi: hi,
            });
        }
    }
    Ok(RunOutput { summary, records })
}

/// Coupled relaxation: two DBM trajectories from σ(H) and σ(G) under shared
/// noise; reports quantiles of `N² t |σ₁(H,t) − σ₁(G,t)|` and the decay
/// slopes in t and in N.
pub fn run_coupled_relaxation(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = &cfg.lambda_or_t_grid;
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] <= 0.0 {
        return Err(Error::InvalidArgument("need an increasing positive t grid".into()));
    }
    let gauss = cfg.ensemble.gaussian_counterpart();
    let mut summary = SummaryStats::new(cfg);
    let mut records = Vec::new();
    let mut gap_cells: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();

    for &n in &cfg.n_list {
        let seed = cfg.cell_seed(n);
        let rows: Result<Vec<_>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let h = sample_matrix(&cfg.ensemble, n, n, &RngStreamSpec::for_trial(seed, trial, 0))?;
                let g = sample_matrix(&gauss, n, n, &RngStreamSpec::for_trial(seed, trial, 1))?;
                let sh = SymmetrizedSpectrum::from_singular(&singular_values(&h)?);
                let sg = SymmetrizedSpectrum::from_singular(&singular_values(&g)?);
                let snaps = coupled_dbm_from_spectra(
                    &sh,
                    &sg,
                    grid,
                    &RngStreamSpec::for_trial(seed, trial, 2),
                    NoiseMode::On,
                )?;
                Ok((trial, snaps))
            })
            .collect();
        for (trial, snaps) in rows? {
            for (ti, snap) in snaps.iter().enumerate() {
                let gap = snap.sigma1_gap();
                gap_cells.entry((n, ti)).or_default().push(gap);
                let sv = SingularSpectrum::new(snap.s_h.positive().to_vec(), (n, n))?;
                records.push(record_from_spectrum(
                    &cfg.name,
                    &cfg.ensemble.kind(),
                    n,
                    n,
                    snap.t,
                    trial,
                    trial * 16 + 2,
                    &sv,
                    gap,
                    (n * n) as f64 * snap.t * gap,
                ));
            }
        }
    }

    for (&(n, ti), gaps) in &gap_cells {
        let t = grid[ti];
        let stats: Vec<f64> = gaps.iter().map(|g| (n * n) as f64 * t * g).collect();
        summary.quantiles.push(quantile_row(n, t, "n2t-sigma1-gap", &stats));
    }
    for &n in &cfg.n_list {
        let per: Vec<Vec<f64>> = (0..grid.len()).map(|ti| gap_cells[&(n, ti)].clone()).collect();
        if per.len() >= 2 {
            let (s, lo, hi) = bootstrap_log_slope_ci(
                grid,
                &per,
                200,
                &RngStreamSpec::new(cfg.cell_seed(n), 2_000_001),
            );
            summary.slopes.push(SlopeRow {
                label: format!("log-median-gap-vs-log-t/N={n}"),
                slope: s,
                ci_lo: lo,
                ci_hi: hi,
            });
            summary.margins.push(MarginRow {
                n,
                param: f64::NAN,
                label: "t-slope-within-[-1.4,-0.6]".into(),
                margin: (s - (-1.4)).min(-0.6 - s),
            });
        }
    }
    if cfg.n_list.len() >= 2 {
        for (ti, &t) in grid.iter().enumerate() {
            let params: Vec<f64> = cfg.n_list.iter().map(|&n| n as f64).collect();
            let per: Vec<Vec<f64>> =
                cfg.n_list.iter().map(|&n| gap_cells[&(n, ti)].clone()).collect();
            let (s, lo, hi) = bootstrap_log_slope_ci(
                &params,
                &per,
                200,
                &RngStreamSpec::new(cfg.master_seed, 2_000_100 + ti as u64),
            );
            summary.slopes.push(SlopeRow {
                label: format!("log-median-gap-vs-log-N/t={t}"),
                slope: s,
                ci_lo: lo,
                ci_hi: hi,
            });
            summary.margins.push(MarginRow {
                n: 0,
                param: t,
                label: "N-slope-within-[-2.5,-1.5]".into(),
                margin: (s - (-2.5)).min(-1.5 - s),
            });
        }
    }
    Ok(RunOutput { summary, records })
}

fn nsigma1_batch(
    law: &EntryLaw,
    m: usize,
    n: usize,
    trials: usize,
    seed: u64,
    role: u64,
) -> Result<Vec<(u64, SingularSpectrum)>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let h = sample_matrix(law, m, n, &RngStreamSpec::for_trial(seed, trial, role))?;
            Ok((trial, singular_values(&h)?))
        })
        .collect()
}

/// Two-sided universality bound for `Nσ₁`: the ensemble's survival function
/// must sit between shifted Gaussian survivals up to the
/// `N^ε (N^{δ−1} ∨ N^{−1/2})` allowance plus 3× the DKW sampling bound.
pub fn run_universality_smallest(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let r_grid = &cfg.lambda_or_t_grid;
    if r_grid.is_empty() {
        return Err(Error::InvalidArgument("need an r grid".into()));
    }
    let gauss = cfg.ensemble.gaussian_counterpart();
    let (eps, delta) = (cfg.epsilon_knobs.eps, cfg.epsilon_knobs.delta);
    let mut summary = SummaryStats::new(cfg);
    let mut records = Vec::new();

    for &n in &cfg.n_list {
        let seed = cfg.cell_seed(n);
        let h_batch = nsigma1_batch(&cfg.ensemble, n, n, cfg.trials, seed, 0)?;
        let g_batch = nsigma1_batch(&gauss, n, n, cfg.trials, seed, 1)?;
        let nf = n as f64;
        let h_samples: Vec<f64> = h_batch.iter().map(|(_, sv)| nf * sv.smallest()).collect();
        let g_samples: Vec<f64> = g_batch.iter().map(|(_, sv)| nf * sv.smallest()).collect();
        for (trial, sv) in &h_batch {
            records.push(record_from_spectrum(
                &cfg.name,
                &cfg.ensemble.kind(),
                n,
                n,
                0.0,
                *trial,
                trial * 16,
                sv,
                nf * sv.smallest(),
                0.0,
            ));
        }
        for (trial, sv) in &g_batch {
            records.push(record_from_spectrum(
                &cfg.name,
                &gauss.kind(),
                n,
                n,
                0.0,
                *trial,
                trial * 16 + 1,
                sv,
                nf * sv.smallest(),
                0.0,
            ));
        }
        let shift = nf.powf(-delta);
        let allowance =
            nf.powf(eps) * nf.powf(delta - 1.0).max(nf.powf(-0.5)) + 3.0 * dkw_bound(cfg.trials, 0.05);
        for &r in r_grid {
            let p_h = survival(&h_samples, r);
            let lo = survival(&g_samples, r + shift) - allowance;
            let hi = survival(&g_samples, r - shift) + allowance;
            summary.margins.push(MarginRow {
                n,
                param: r,
                label: "survival-above-lower-bound".into(),
                margin: p_h - lo,
            });
            summary.margins.push(MarginRow {
                n,
                param: r,
                label: "survival-below-upper-bound".into(),
                margin: hi - p_h,
            });
        }
        summary.quantiles.push(quantile_row(n, 0.0, "Nsigma1", &h_samples));
    }
    Ok(RunOutput { summary, records })
}

/// Exact hard-edge law for complex ensembles: KS distance between the
/// empirical law of `Nσ₁` and `1 − e^{-r}`.
pub fn run_complex_exact(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    if !cfg.ensemble.complex {
        return Err(Error::InvalidLaw(
            "the exact hard-edge law applies to complex ensembles".into(),
        ));
    }
    let mut summary = SummaryStats::new(cfg);
    let mut records = Vec::new();
    for &n in &cfg.n_list {
        let m = cfg.m_offset.rows(n);
        let seed = cfg.cell_seed(n);
        let (ks, samples, recs) = complex_exact_cell(cfg, m, n, seed)?;
        records.extend(recs);
        summary.ks.push(KsRow {
            n,
            label: format!("Nsigma1-vs-exact-law/M={m}"),
            ks,
            critical: ks_critical_95(cfg.trials),
        });
        summary.margins.push(MarginRow {
            n,
            param: 0.0,
            label: "ks-under-critical".into(),
            margin: ks_critical_95(cfg.trials) - ks,
        });
        // pointwise check at r = 1 against 1 − e⁻¹, 3 binomial stderr
        let p_hat = samples.iter().filter(|&&x| x <= 1.0).count() as f64 / samples.len() as f64;
        let p = 1.0 - (-1.0_f64).exp();
        let se = (p * (1.0 - p) / samples.len() as f64).sqrt();
        summary.margins.push(MarginRow {
            n,
            param: 1.0,
            label: "pointwise-cdf-at-1-within-3se".into(),
            margin: 3.0 * se - (p_hat - p).abs(),
        });
    }
    Ok(RunOutput { summary, records })
}

fn complex_exact_cell(
    cfg: &ExperimentConfig,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<(f64, Vec<f64>, Vec<TrialRecord>)> {
    let batch = nsigma1_batch(&cfg.ensemble, m, n, cfg.trials, seed, 0)?;
    let nf = n as f64;
    let mut samples: Vec<f64> = batch.iter().map(|(_, sv)| nf * sv.smallest()).collect();
    let records: Vec<TrialRecord> = batch
        .iter()
        .map(|(trial, sv)| {
            record_from_spectrum(
                &cfg.name,
                &cfg.ensemble.kind(),
                n,
                m,
                0.0,
                *trial,
                trial * 16,
                sv,
                nf * sv.smallest(),
                0.0,
            )
        })
        .collect();
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ks = ks_statistic(&samples, |r| if r <= 0.0 { 0.0 } else { 1.0 - (-r).exp() })?;
    Ok((ks, samples, records))
}

/// Condition-number statistics: the shared-G smoothed statistic
/// `|κ(H+λG) − κ(G)| log(1+λ²)` and the κ/N CDF sandwich against the
/// Gaussian with shift `N^{−2/3+ε}` and allowance `N^{−1/3−ε}`.
pub fn run_condition(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let gauss = cfg.ensemble.gaussian_counterpart();
    let eps = cfg.epsilon_knobs.eps;
    let mut summary = SummaryStats::new(cfg);
    summary
        .calibration_constants
        .insert("condition_stat_median_cal".into(), CONDITION_STAT_MEDIAN_CAL);
    let mut records = Vec::new();

    for &n in &cfg.n_list {
        let m = cfg.m_offset.rows(n);
        let seed = cfg.cell_seed(n);
        let rows: Result<Vec<_>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let h = sample_matrix(&cfg.ensemble, m, n, &RngStreamSpec::for_trial(seed, trial, 0))?;
                let g = sample_matrix(&gauss, m, n, &RngStreamSpec::for_trial(seed, trial, 1))?;
                let sv_h = singular_values(&h)?;
                let sv_g = singular_values(&g)?;
                let mut perturbed = Vec::with_capacity(cfg.lambda_or_t_grid.len());
                for &lambda in &cfg.lambda_or_t_grid {
                    perturbed.push((lambda, singular_values(&perturb(&h, lambda, &g)?)?));
                }
                Ok((trial, sv_h, sv_g, perturbed))
            })
            .collect();
        let rows = rows?;

        let nf = n as f64;
        let mut stat_cells: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        let mut kappa_h = Vec::with_capacity(cfg.trials);
        let mut kappa_g = Vec::with_capacity(cfg.trials);
        for (trial, sv_h, sv_g, perturbed) in &rows {
            let kg = condition_number(sv_g).value;
            kappa_h.push(condition_number(sv_h).value / nf);
            kappa_g.push(kg / nf);
            records.push(record_from_spectrum(
                &cfg.name,
                &cfg.ensemble.kind(),
                n,
                m,
                0.0,
                *trial,
                trial * 16,
                sv_h,
                condition_number(sv_h).value / nf,
                0.0,
            ));
            records.push(record_from_spectrum(
                &cfg.name,
                &gauss.kind(),
                n,
                m,
                0.0,
                *trial,
                trial * 16 + 1,
                sv_g,
                kg / nf,
                0.0,
            ));
            for (li, (lambda, sv_p)) in perturbed.iter().enumerate() {
                let stat = (condition_number(sv_p).value - kg).abs() * (1.0 + lambda * lambda).ln();
                stat_cells.entry(li).or_default().push(stat);
                records.push(record_from_spectrum(
                    &cfg.name,
                    &cfg.ensemble.kind(),
                    n,
                    m,
                    *lambda,
                    *trial,
                    trial * 16,
                    sv_p,
                    kg,
                    stat,
                ));
            }
        }

        for (li, stats) in &stat_cells {
            let lambda = cfg.lambda_or_t_grid[*li];
            summary.quantiles.push(quantile_row(n, lambda, "condition-stat", stats));
            summary.margins.push(MarginRow {
                n,
                param: lambda,
                label: "median-condition-stat-under-calibration".into(),
                margin: CONDITION_STAT_MEDIAN_CAL - median(stats),
            });
        }

        let shift = nf.powf(-2.0 / 3.0 + eps);
        let allowance = nf.powf(-1.0 / 3.0 - eps) + 3.0 * dkw_bound(cfg.trials, 0.05);
        for &r in &KAPPA_R_GRID {
            let p_h = survival(&kappa_h, r);
            let lo = survival(&kappa_g, r + shift) - allowance;
            let hi = survival(&kappa_g, r - shift) + allowance;
            summary.margins.push(MarginRow {
                n,
                param: r,
                label: "kappa-survival-above-lower-bound".into(),
                margin: p_h - lo,
            });
            summary.margins.push(MarginRow {
                n,
                param: r,
                label: "kappa-survival-below-upper-bound".into(),
                margin: hi - p_h,
            });
        }
        summary.quantiles.push(quantile_row(n, 0.0, "kappa-over-N", &kappa_h));
    }
    Ok(RunOutput { summary, records })
}

/// Nearly-square extension: the complex exact-law and condition pipelines
/// on `M × N` matrices (`M = N + ⌈log N⌉`), side by side with the square
/// case on paired seeds. With offset zero the two coincide exactly.
pub fn run_nonsquare(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut summary = SummaryStats::new(cfg);
    let mut records = Vec::new();

    // condition pipelines, square and rectangular
    let mut sq = cfg.clone();
    sq.m_offset = crate::experiments::config::MOffset::Zero;
    sq.name = format!("{}:square", cfg.name);
    let mut rect = cfg.clone();
    rect.name = format!("{}:rect", cfg.name);

    let cond_sq = run_condition(&sq)?;
    let cond_rect = run_condition(&rect)?;
    summary.margins.extend(cond_sq.summary.margins.iter().cloned().map(|mut m| {
        m.label = format!("square/{}", m.label);
        m
    }));
    summary.margins.extend(cond_rect.summary.margins.iter().cloned().map(|mut m| {
        m.label = format!("rect/{}", m.label);
        m
    }));
    summary.quantiles.extend(cond_sq.summary.quantiles.iter().cloned());
    summary.quantiles.extend(cond_rect.summary.quantiles.iter().cloned());
    records.extend(cond_sq.records);
    records.extend(cond_rect.records);

    if cfg.ensemble.complex {
        let ce_sq = run_complex_exact(&sq)?;
        let ce_rect = run_complex_exact(&rect)?;
        for (a, b) in ce_sq.summary.ks.iter().zip(&ce_rect.summary.ks) {
            summary.ks.push(a.clone());
            summary.ks.push(b.clone());
            // rectangular KS within 1.5× of the square case
            summary.margins.push(MarginRow {
                n: a.n,
                param: 0.0,
                label: "rect-ks-within-1.5x-square".into(),
                margin: 1.5 * a.ks - b.ks,
            });
        }
        records.extend(ce_sq.records);
        records.extend(ce_rect.records);
    }
    Ok(RunOutput { summary, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{EpsilonKnobs, MOffset};

    fn tiny_cfg(name: &str, ensemble: EntryLaw, grid: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig {
            name: name.into(),
            n_list: vec![8],
            m_offset: MOffset::Zero,
            ensemble,
            lambda_or_t_grid: grid,
            trials: 100,
            master_seed: 7,
            epsilon_knobs: EpsilonKnobs::default(),
            output_path: "runs".into(),
        }
    }

    #[test]
    fn smoothed_run_is_reproducible_byte_for_byte() {
        let cfg = tiny_cfg("s", EntryLaw::rademacher(), vec![1.0]);
        let a = run_smoothed_singular(&cfg).unwrap();
        let b = run_smoothed_singular(&cfg).unwrap();
        let rows_a: Vec<String> = a.records.iter().map(|r| r.to_csv_row()).collect();
        let rows_b: Vec<String> = b.records.iter().map(|r| r.to_csv_row()).collect();
        assert_eq!(rows_a, rows_b);
        assert_eq!(
            serde_json::to_string(&a.summary).unwrap(),
            serde_json::to_string(&b.summary).unwrap()
        );
    }

    #[test]
    fn smoothed_identical_ensemble_sanity() {
        // H itself Gaussian: D is nonzero but the statistic is finite and
        // the records validate
        let cfg = tiny_cfg("g", EntryLaw::gaussian_real(), vec![0.5, 1.0]);
        let out = run_smoothed_singular(&cfg).unwrap();
        assert!(out.records.iter().all(|r| r.validate().is_ok()));
        assert!(out.records.iter().any(|r| r.aux2 > 0.0));
        assert_eq!(out.records.len(), 2 * 100);
    }

    #[test]
    fn coupled_identical_initial_data_gives_zero_gaps() {
        let mut cfg = tiny_cfg("c", EntryLaw::gaussian_real(), vec![0.05, 0.1]);
        cfg.trials = 100;
        // same law and same role streams for H and G would need identical
        // samples; instead verify via the dynamics-level invariant
        let out = run_coupled_relaxation(&cfg).unwrap();
        assert_eq!(out.records.len(), 2 * 100);
        assert!(out.summary.quantiles.iter().all(|q| q.p50 >= 0.0));
    }

    #[test]
    fn universality_gaussian_vs_gaussian_trivially_sandwiched() {
        let cfg = tiny_cfg("u", EntryLaw::gaussian_real(), vec![0.25, 0.5, 1.0]);
        let out = run_universality_smallest(&cfg).unwrap();
        assert!(out.summary.all_margins_ok(), "{:#?}", out.summary.margins);
    }

    #[test]
    fn complex_exact_rejects_real_ensembles() {
        let cfg = tiny_cfg("e", EntryLaw::gaussian_real(), vec![]);
        assert!(run_complex_exact(&cfg).is_err());
    }

    #[test]
    fn nonsquare_offset_zero_reduces_to_square() {
        let mut cfg = tiny_cfg("nsq", EntryLaw::gaussian_complex(), vec![]);
        cfg.m_offset = MOffset::Zero;
        let out = run_nonsquare(&cfg).unwrap();
        // square and rect sub-runs coincide except for the experiment label
        let sq: Vec<&TrialRecord> =
            out.records.iter().filter(|r| r.experiment.ends_with(":square")).collect();
        let rect: Vec<&TrialRecord> =
            out.records.iter().filter(|r| r.experiment.ends_with(":rect")).collect();
        assert_eq!(sq.len(), rect.len());
        for (a, b) in sq.iter().zip(&rect) {
            assert_eq!(a.sigma1.to_bits(), b.sigma1.to_bits());
            assert_eq!(a.kappa.to_bits(), b.kappa.to_bits());
        }
    }

    #[test]
    fn aggregation_is_order_independent() {
        let cfg = tiny_cfg("agg", EntryLaw::gaussian_real(), vec![0.25, 1.0]);
        let out = run_universality_smallest(&cfg).unwrap();
        // recompute a survival margin from shuffled records: same medians
        let mut aux: Vec<f64> = out
            .records
            .iter()
            .filter(|r| r.ensemble == "gaussian-real" && r.seed % 16 == 0)
            .map(|r| r.aux1)
            .collect();
        let before = median(&aux);
        aux.reverse();
        assert_eq!(median(&aux), before);
    }
}
