//! Built-in invariant suite behind `hardedge verify`.
//!
//! The quick tier holds closed-form identities and construction invariants;
//! the full tier adds moderate Monte Carlo cross-checks.

use hardedge::comparison::{
    comparison_budget, sandwich_check, trace_f, OuterFunctionF, TestFnVariant, TestFunctionSpec,
    BUDGET_C,
};
use hardedge::dynamics::{
    coupled_dbm_from_spectra, evolve_phi, initial_phi, ou_interpolate, split_kernel,
    KernelOperator, NoiseMode,
};
use hardedge::ensembles::{check_assumptions, match_first_three_moments, sample_matrix, EntryLaw};
use hardedge::error::Error;
use hardedge::experiments::{cg_iterations, ks_statistic, lop_estimate, median};
use hardedge::rng::RngStreamSpec;
use hardedge::spectra::{
    characteristic, condition_number, empirical_stieltjes, gamma_quantiles, m_sc, rho_mp, rho_sc,
    rigidity_check, semicircle_cdf, singular_values, SymmetrizedSpectrum,
};
use num_complex::Complex64;

type Check = (&'static str, fn() -> hardedge::Result<()>);

fn fail(msg: String) -> hardedge::Result<()> {
    Err(Error::CheckFailed(msg))
}

fn ensure(ok: bool, msg: &str) -> hardedge::Result<()> {
    if ok {
        Ok(())
    } else {
        fail(msg.to_owned())
    }
}

fn quick_checks() -> Vec<Check> {
    vec![
        ("semicircle-density-values", || {
            ensure(
                (rho_sc(0.0) - std::f64::consts::FRAC_1_PI).abs() < 1e-15
                    && rho_sc(2.0) == 0.0
                    && rho_mp(4.0) == 0.0,
                "density reference values",
            )
        }),
        ("semicircle-cdf-endpoints", || {
            ensure(
                semicircle_cdf(-2.0) == 0.0
                    && semicircle_cdf(2.0) == 1.0
                    && (semicircle_cdf(0.0) - 0.5).abs() < 1e-15,
                "CDF endpoints",
            )
        }),
        ("gamma-quantile-consistency", || {
            let n = 64;
            let g = gamma_quantiles(n);
            for k in 1..=n as i64 {
                let target = (n as f64 + k as f64) / (2.0 * n as f64);
                if (semicircle_cdf(g.gamma(k)) - target).abs() > 1e-10 {
                    return fail(format!("CDF(γ_{k}) off target"));
                }
                if g.gamma(-k) != -g.gamma(k) {
                    return fail(format!("γ symmetry broken at k = {k}"));
                }
            }
            ensure(g.gamma(n as i64) == 2.0, "γ_N = 2")
        }),
        ("m-sc-branch-and-residual", || {
            for i in 0..20 {
                let z = Complex64::new(-2.5 + 0.25 * i as f64, 0.1 + 0.04 * i as f64);
                let m = m_sc(z)?;
                if m.im <= 0.0 || m.norm() > 1.0 + 1e-12 {
                    return fail(format!("branch/bound violated at {z}"));
                }
                if (m * m + z * m + 1.0).norm() > 1e-12 {
                    return fail(format!("self-consistency residual at {z}"));
                }
            }
            Ok(())
        }),
        ("characteristic-identities", || {
            let z = Complex64::new(0.4, 0.2);
            ensure(
                (characteristic(z, 0.0) - z).norm() < 1e-14
                    && (characteristic(characteristic(z, 0.1), 0.2) - characteristic(z, 0.3))
                        .norm()
                        < 1e-10,
                "characteristic fixed point / composition",
            )
        }),
        ("matched-law-moments", || {
            let law = match_first_three_moments(2.0)?;
            let m = law.moments();
            ensure(
                m[0] == 0.0 && (m[1] - 1.0).abs() < 1e-12 && m[2] == 0.0 && (m[3] - 1.0).abs() < 1e-12,
                "gap-2 law moments",
            )?;
            ensure(match_first_three_moments(4.0).is_err(), "infeasible gap must error")
        }),
        ("condition-number-sentinels", || {
            let id = hardedge::spectra::SingularSpectrum::new(vec![1.0, 1.0], (2, 2))?;
            let sing = hardedge::spectra::SingularSpectrum::new(vec![0.0, 1.0], (2, 2))?;
            ensure(
                condition_number(&id).value == 1.0 && condition_number(&sing).degenerate,
                "κ sentinels",
            )
        }),
        ("test-function-plateaus", || {
            let n = 64;
            let spec = TestFunctionSpec::new(n, 1.0, (n as f64).powf(-1.3), 1.3, TestFnVariant::F1)?;
            let f2 = TestFunctionSpec::new(n, 1.0, (n as f64).powf(-1.3), 1.3, TestFnVariant::F2)?;
            for i in 0..200 {
                let x = -0.03 + 0.06 * i as f64 / 200.0;
                if spec.eval(x) > f2.eval(x) {
                    return fail(format!("f₁ > f₂ at {x}"));
                }
            }
            let outer = OuterFunctionF;
            ensure(
                spec.eval(0.0) == 1.0
                    && spec.eval(1.0 / 64.0) == 0.0
                    && outer.eval(0.0) == 1.0
                    && outer.eval(1.0) == 0.0,
                "plateau endpoints",
            )
        }),
        ("trace-of-plateau-pair", || {
            let n = 64;
            let spec = TestFunctionSpec::new(n, 1.0, (n as f64).powf(-1.3), 1.3, TestFnVariant::F1)?;
            let sym = SymmetrizedSpectrum::from_positive(vec![spec.inner() / 2.0, 1.0])?;
            ensure(trace_f(&spec, &sym) == 2.0, "symmetric pair counts twice")
        }),
        ("kernel-annihilates-constants", || {
            let g = gamma_quantiles(12);
            let k = KernelOperator::new(SymmetrizedSpectrum::from_positive(g.positive().to_vec())?);
            let out = k.apply(&vec![2.5; 24]);
            ensure(out.iter().all(|x| x.abs() < 1e-12), "K·const = 0")
        }),
        ("kernel-split-recombines", || {
            let g = gamma_quantiles(10);
            let k = KernelOperator::new(SymmetrizedSpectrum::from_positive(g.positive().to_vec())?);
            let (s, l) = split_kernel(&k, 4)?;
            let v: Vec<f64> = (0..20).map(|i| ((i * 13) % 7) as f64).collect();
            let (kv, sv, lv) = (k.apply(&v), s.apply(&v), l.apply(&v));
            ensure(
                kv.iter().zip(sv.iter().zip(&lv)).all(|(a, (b, c))| (a - b - c).abs() < 1e-12),
                "short + long = full",
            )
        }),
        ("budget-algebra", || {
            let nf = 64.0_f64;
            let b = comparison_budget(64, nf.powf(-1.5), 1.5, 0.0, 0.2)?;
            let expect = nf.powf(BUDGET_C * 0.2) * (nf.powf(-0.5) + nf.powf(-0.5));
            ensure((b - expect).abs() < 1e-12 * expect, "budget closed form")
        }),
        ("apps-reference-values", || {
            ensure(
                (lop_estimate(100, 100, 100.0)? - 9.0).abs() < 1e-12
                    && cg_iterations(2.0, 1.0)? == 1.0,
                "calculator reference values",
            )
        }),
        ("ou-zero-time-identity", || {
            let law = EntryLaw::gaussian_real();
            let h = sample_matrix(&law, 4, 4, &RngStreamSpec::new(1, 0))?;
            let g = sample_matrix(&law, 4, 4, &RngStreamSpec::new(1, 1))?;
            let out = ou_interpolate(&h, &g, 0.0)?;
            ensure(out.bits_eq(&h), "H_0 = H")
        }),
        ("sampling-determinism", || {
            let law = EntryLaw::rademacher();
            let a = sample_matrix(&law, 4, 4, &RngStreamSpec::new(7, 3))?;
            let b = sample_matrix(&law, 4, 4, &RngStreamSpec::new(7, 3))?;
            ensure(a.bits_eq(&b), "identical stream ⇒ identical sample")
        }),
    ]
}

fn full_checks() -> Vec<Check> {
    vec![
        ("moment-report-gaussian", || {
            let report =
                check_assumptions(&EntryLaw::gaussian_real(), 20_000, &RngStreamSpec::new(2, 0))?;
            ensure(report.pass(), "gaussian moments within 3 standard errors")
        }),
        ("local-law-at-moderate-n", || {
            let n = 256;
            let law = EntryLaw::gaussian_real();
            let z = Complex64::new(0.5, 0.05);
            let m = m_sc(z)?;
            let mut hits = 0;
            let trials = 40;
            for trial in 0..trials {
                let h = sample_matrix(&law, n, n, &RngStreamSpec::new(3, trial))?;
                let spec = SymmetrizedSpectrum::from_singular(&singular_values(&h)?);
                let s = empirical_stieltjes(&spec, z)?;
                if (s - m).norm() <= 10.0 / (n as f64 * z.im) {
                    hits += 1;
                }
            }
            ensure(hits * 100 >= trials * 95, "local law hit rate ≥ 95%")
        }),
        ("rigidity-at-moderate-n", || {
            let n = 256;
            let g = gamma_quantiles(n);
            let law = EntryLaw::gaussian_real();
            let mut pass = 0;
            let trials = 20;
            for trial in 0..trials {
                let h = sample_matrix(&law, n, n, &RngStreamSpec::new(4, trial))?;
                let spec = SymmetrizedSpectrum::from_singular(&singular_values(&h)?);
                if rigidity_check(&spec, &g, 0.5)?.pass {
                    pass += 1;
                }
            }
            ensure(pass * 100 >= trials * 95, "rigidity pass rate ≥ 95%")
        }),
        ("sandwich-never-violated", || {
            let law = EntryLaw::gaussian_real();
            for trial in 0..500 {
                let h = sample_matrix(&law, 32, 32, &RngStreamSpec::new(5, trial))?;
                sandwich_check(&h, 1.0, 32.0_f64.powf(-1.4))?;
            }
            Ok(())
        }),
        ("coupled-gap-maximum-principle", || {
            let n = 32;
            let law = EntryLaw::rademacher();
            let gauss = EntryLaw::gaussian_real();
            let h = sample_matrix(&law, n, n, &RngStreamSpec::new(6, 0))?;
            let g = sample_matrix(&gauss, n, n, &RngStreamSpec::new(6, 1))?;
            let sh = SymmetrizedSpectrum::from_singular(&singular_values(&h)?);
            let sg = SymmetrizedSpectrum::from_singular(&singular_values(&g)?);
            let gap0 = sh
                .positive()
                .iter()
                .zip(sg.positive())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let snaps = coupled_dbm_from_spectra(
                &sh,
                &sg,
                &[0.05, 0.1],
                &RngStreamSpec::new(6, 2),
                NoiseMode::On,
            )?;
            for s in snaps {
                if s.max_gap() > gap0 + 1e-2 {
                    return fail(format!("coupled gap grew at t = {}", s.t));
                }
            }
            Ok(())
        }),
        ("phi-evolution-conserves-sum", || {
            let n = 24;
            let g = gamma_quantiles(n);
            let base = SymmetrizedSpectrum::from_positive(g.positive().to_vec())?;
            let shifted = SymmetrizedSpectrum::from_positive(
                g.positive().iter().map(|v| v * 1.01 + 1e-3).collect(),
            )?;
            let phi0 = initial_phi(&base, &shifted);
            let kernel = KernelOperator::new(base.clone());
            let dt = 0.4 / kernel.row_sums().into_iter().fold(0.0, f64::max);
            let snaps: Vec<SymmetrizedSpectrum> = vec![base; 40];
            let phi1 = evolve_phi(&phi0, &snaps, dt)?;
            let (s0, s1): (f64, f64) = (phi0.iter().sum(), phi1.iter().sum());
            ensure((s0 - s1).abs() < 1e-8, "Σφ conserved")
        }),
        ("complex-exact-law-smoke", || {
            let n = 64;
            let law = EntryLaw::gaussian_complex();
            let trials = 400;
            let mut samples: Vec<f64> = (0..trials)
                .map(|trial| {
                    let h = sample_matrix(&law, n, n, &RngStreamSpec::new(8, trial)).unwrap();
                    n as f64 * singular_values(&h).unwrap().smallest()
                })
                .collect();
            samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let ks = ks_statistic(&samples, |r| if r <= 0.0 { 0.0 } else { 1.0 - (-r).exp() })?;
            // generous desk-scale gate: 2× the 95% critical value
            ensure(ks <= 2.0 * 1.36 / (trials as f64).sqrt(), "KS against 1 − e^{-r}")
        }),
        ("smoothed-statistic-scale", || {
            let n = 64;
            let law = EntryLaw::rademacher();
            let gauss = EntryLaw::gaussian_real();
            let lambda = 1.0_f64;
            let scale = (1.0 + lambda * lambda).sqrt();
            let mut stats = Vec::new();
            for trial in 0..60 {
                let h = sample_matrix(&law, n, n, &RngStreamSpec::for_trial(9, trial, 0))?;
                let g = sample_matrix(&gauss, n, n, &RngStreamSpec::for_trial(9, trial, 1))?;
                let p = hardedge::dynamics::perturb(&h, lambda, &g)?;
                let d = (singular_values(&p)?.smallest()
                    - scale * singular_values(&g)?.smallest())
                .abs();
                stats.push((n * n) as f64 * (1.0 + lambda * lambda).ln() * d / scale);
            }
            ensure(median(&stats) <= 64.0_f64.powf(0.3), "median normalized statistic ≤ N^0.3")
        }),
    ]
}


/// Run the suite; returns the number of failures.
pub fn run_suite(quick: bool) -> usize {
    let mut checks = quick_checks();
    if !quick {
        checks.extend(full_checks());
    }
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("ok   {name}"),
            Err(e) => {
                failures += 1;
                println!("FAIL {name}: {e}");
            }
        }
    }
    failures
}
