//! The evaluable comparison budget and a desk-scale Lindeberg swap
//! experiment: the measured difference `|E F(Tr f(X)) − E F(Tr f(Y))|`
//! between two ensembles with matched first three moments, side by side
//! with the budget it must stay under.

use rayon::prelude::*;

use crate::comparison::testfn::{trace_f, OuterFunctionF, TestFunctionSpec};
use crate::ensembles::{sample_matrix, EntryLaw};
use crate::error::{Error, Result};
use crate::rng::RngStreamSpec;
use crate::spectra::{singular_values, SymmetrizedSpectrum};

/// Budget prefactor constant; calibrated once against the Gaussian vs
/// Rademacher run at N = 64 and frozen (the golden config echoes it).
pub const BUDGET_C: f64 = 1.0;

/// Resolvent-comparison error budget
/// `N^{Cε} (1/(ρN²) + (ρNᵃ)⁵/√N + t·ρNᵃ)` with the frozen `C`.
pub fn comparison_budget(n: usize, rho: f64, a: f64, t: f64, eps: f64) -> Result<f64> {
    comparison_budget_with_c(n, rho, a, t, eps, BUDGET_C)
}

pub fn comparison_budget_with_c(
    n: usize,
    rho: f64,
    a: f64,
    t: f64,
    eps: f64,
    c: f64,
) -> Result<f64> {
    if !(1.0 < a && a < 2.0) {
        return Err(Error::InvalidArgument(format!("need a ∈ (1, 2), got {a}")));
    }
    let nf = n as f64;
    if !(rho >= nf.powf(-a) - 1e-15 && rho <= 1.0 / nf + 1e-15) {
        return Err(Error::InvalidArgument(format!(
            "need ρ ∈ [N⁻ᵃ, N⁻¹], got ρ = {rho:.3e} at N = {n}"
        )));
    }
    if t < 0.0 || eps < 0.0 {
        return Err(Error::InvalidArgument("need t ≥ 0 and ε ≥ 0".into()));
    }
    let rna = rho * nf.powf(a);
    Ok(nf.powf(c * eps) * (1.0 / (rho * nf * nf) + rna.powi(5) / nf.sqrt() + t * rna))
}

/// Outcome of the swap experiment.
#[derive(Debug, Clone)]
pub struct SwapOutcome {
    /// `|mean F(Tr f(X)) − mean F(Tr f(Y))|`.
    pub delta_hat: f64,
    /// Standard error of the difference.
    pub stderr: f64,
    /// Fourth-moment distance between the laws.
    pub fourth_gap: f64,
    /// Budget evaluated at the laws' fourth-moment distance.
    pub budget: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    /// Per-trial `F(Tr f(·))` values, in trial order (for bootstrap use).
    pub f_x: Vec<f64>,
    pub f_y: Vec<f64>,
    /// Per-trial `Tr f(·)` values, in trial order.
    pub trace_x: Vec<f64>,
    pub trace_y: Vec<f64>,
}

/// Estimate `|E F(Tr f(X)) − E F(Tr f(Y))|` by Monte Carlo over whole
/// matrices, with the comparison budget evaluated at the laws'
/// fourth-moment distance. The first three moments must match.
pub fn lindeberg_swap_experiment(
    law_x: &EntryLaw,
    law_y: &EntryLaw,
    n: usize,
    spec: &TestFunctionSpec,
    trials: usize,
    master_seed: u64,
    eps: f64,
) -> Result<SwapOutcome> {
    law_x.validate()?;
    law_y.validate()?;
    let mx = law_x.moments();
    let my = law_y.moments();
    for k in 0..3 {
        if (mx[k] - my[k]).abs() > 1e-12 {
            return Err(Error::InvalidLaw(format!(
                "first three moments must match (m{} differs: {} vs {})",
                k + 1,
                mx[k],
                my[k]
            )));
        }
    }
    let fourth_gap = law_x.fourth_moment_gap(law_y);
    let budget = comparison_budget(n, spec.rho, spec.a, fourth_gap, eps)?;

    let outer = OuterFunctionF;
    let eval = |law: &EntryLaw, trial: u64, role: u64| -> Result<(f64, f64)> {
        let h = sample_matrix(law, n, n, &RngStreamSpec::for_trial(master_seed, trial, role))?;
        let sym = SymmetrizedSpectrum::from_singular(&singular_values(&h)?);
        let tr = trace_f(spec, &sym);
        Ok((tr, outer.eval(tr)))
    };
    // parallel trials, deterministic fold in trial order
    let rows: Result<Vec<((f64, f64), (f64, f64))>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| Ok((eval(law_x, trial, 0)?, eval(law_y, trial, 1)?)))
        .collect();
    let rows = rows?;
    let mut trace_x = Vec::with_capacity(trials);
    let mut f_x = Vec::with_capacity(trials);
    let mut trace_y = Vec::with_capacity(trials);
    let mut f_y = Vec::with_capacity(trials);
    for ((tx, fx), (ty, fy)) in rows {
        trace_x.push(tx);
        f_x.push(fx);
        trace_y.push(ty);
        f_y.push(fy);
    }
    let nf = trials as f64;
    let mean_x = f_x.iter().sum::<f64>() / nf;
    let mean_y = f_y.iter().sum::<f64>() / nf;
    let var_x = f_x.iter().map(|v| (v - mean_x).powi(2)).sum::<f64>() / (nf - 1.0);
    let var_y = f_y.iter().map(|v| (v - mean_y).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(SwapOutcome {
        delta_hat: (mean_x - mean_y).abs(),
        stderr: ((var_x + var_y) / nf).sqrt(),
        fourth_gap,
        budget,
        mean_x,
        mean_y,
        f_x,
        f_y,
        trace_x,
        trace_y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparison::testfn::TestFnVariant;
    use crate::ensembles::match_first_three_moments;

    #[test]
    fn budget_algebra_at_optimal_rho() {
        // t = 0, ρ = N⁻ᵃ makes ρNᵃ = 1: budget = N^{Cε}(N^{a−2} + N^{−1/2})
        let (n, a, eps) = (64, 1.5, 0.2);
        let rho = (n as f64).powf(-a);
        let b = comparison_budget(n, rho, a, 0.0, eps).unwrap();
        let nf = n as f64;
        let expect = nf.powf(BUDGET_C * eps) * (nf.powf(a - 2.0) + nf.powf(-0.5));
        assert!((b - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn budget_reproduces_optimal_error_shape() {
        // ρ = N⁻ᵃ, t = N^{a−2}, a = 1 + δ: error shape N^{Cε}(N^{δ−1} ∨ N^{−1/2})
        for &delta in &[0.25, 0.5, 0.75] {
            let n = 256;
            let nf = n as f64;
            let a = 1.0 + delta;
            let b =
                comparison_budget(n, nf.powf(-a), a, nf.powf(a - 2.0), 0.0).unwrap();
            let shape = nf.powf(delta - 1.0).max(nf.powf(-0.5));
            assert!(b >= shape && b <= 3.0 * shape, "δ = {delta}: {b} vs {shape}");
        }
    }

    #[test]
    fn budget_monotone_in_t() {
        let n = 64;
        let rho = (n as f64).powf(-1.5);
        let b0 = comparison_budget(n, rho, 1.5, 0.0, 0.2).unwrap();
        let b1 = comparison_budget(n, rho, 1.5, 1.0, 0.2).unwrap();
        let b2 = comparison_budget(n, rho, 1.5, 2.0, 0.2).unwrap();
        assert!(b0 < b1 && b1 < b2);
    }

    #[test]
    fn budget_rejects_out_of_range() {
        assert!(comparison_budget(64, 0.5, 1.5, 0.0, 0.2).is_err());
        assert!(comparison_budget(64, 1e-3, 2.5, 0.0, 0.2).is_err());
    }

    #[test]
    fn swap_rejects_moment_mismatch() {
        // every valid law is normalized to m1 = m3 = 0, m2 = 1, so a
        // mismatch can only enter through an invalid law; it must error out
        let bad = crate::ensembles::EntryLaw {
            base: crate::ensembles::BaseLaw::ThreePoint { atom: 2.0, prob: 0.25 },
            complex: false,
            theta: 1.0,
        };
        let g = EntryLaw::gaussian_real();
        let n = 8;
        let spec =
            TestFunctionSpec::new(n, 1.0, (n as f64).powf(-1.5), 1.5, TestFnVariant::F1).unwrap();
        assert!(lindeberg_swap_experiment(&g, &bad, n, &spec, 16, 1, 0.2).is_err());
    }

    #[test]
    fn identical_laws_have_null_difference() {
        // lawX = lawY: delta_hat within 2 stderr of 0 (distinct streams)
        let n = 16;
        let spec =
            TestFunctionSpec::new(n, 1.0, (n as f64).powf(-1.4), 1.4, TestFnVariant::F1).unwrap();
        let g = EntryLaw::gaussian_real();
        let out = lindeberg_swap_experiment(&g, &g, n, &spec, 800, 99, 0.2).unwrap();
        assert!(
            out.delta_hat <= 2.0 * out.stderr.max(1e-12),
            "delta {} stderr {}",
            out.delta_hat,
            out.stderr
        );
        assert_eq!(out.fourth_gap, 0.0);
    }

    #[test]
    fn matched_three_point_laws_pass_moment_gate() {
        let g = EntryLaw::gaussian_real();
        let m = match_first_three_moments(0.5).unwrap();
        let n = 8;
        let spec =
            TestFunctionSpec::new(n, 1.0, (n as f64).powf(-1.5), 1.5, TestFnVariant::F1).unwrap();
        let out = lindeberg_swap_experiment(&g, &m, n, &spec, 16, 5, 0.2).unwrap();
        assert!((out.fourth_gap - 0.5).abs() < 1e-12);
    }
}
