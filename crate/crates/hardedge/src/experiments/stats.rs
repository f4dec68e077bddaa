//! Summary statistics: quantiles, Kolmogorov–Smirnov distances, DKW
//! sampling allowances, least-squares slopes and trial bootstrap.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RngStreamSpec;

/// 95% one-sample Kolmogorov critical constant (`D·√n ≤ 1.36`).
pub const KOLMOGOROV_95: f64 = 1.36;

/// Quantile of a sorted slice by linear interpolation, `p ∈ [0, 1]`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile_sorted(&v, 0.5)
}

fn check_sorted(samples: &[f64]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    if samples.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("samples must be sorted ascending".into()));
    }
    Ok(())
}

/// One-sample KS statistic `sup_x |F̂(x) − F(x)|` against a continuous CDF.
/// Input must be sorted.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    check_sorted(sorted)?;
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    Ok(d)
}

/// Two-sample KS statistic. Both inputs must be sorted.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    check_sorted(a)?;
    check_sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// 95% critical value for the one-sample KS statistic at `n` samples.
pub fn ks_critical_95(n: usize) -> f64 {
    KOLMOGOROV_95 / (n as f64).sqrt()
}

/// Dvoretzky–Kiefer–Wolfowitz deviation bound at confidence `1 − alpha`.
pub fn dkw_bound(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Ordinary least squares fit `y ≈ slope·x + intercept`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Bootstrap confidence interval for the slope of
/// `log(median of per-trial statistic)` against `log(param)`: trials are
/// resampled with replacement, medians and the slope recomputed.
///
/// `per_param[i]` holds the per-trial statistics at `params[i]`.
pub fn bootstrap_log_slope_ci(
    params: &[f64],
    per_param: &[Vec<f64>],
    reps: usize,
    stream: &RngStreamSpec,
) -> (f64, f64, f64) {
    assert_eq!(params.len(), per_param.len());
    let xs: Vec<f64> = params.iter().map(|p| p.ln()).collect();
    let ys: Vec<f64> = per_param.iter().map(|v| median(v).ln()).collect();
    let (point, _) = ols_slope(&xs, &ys);
    let mut rng = stream.rng();
    let mut slopes = Vec::with_capacity(reps);
    for _ in 0..reps {
        let ys_b: Vec<f64> = per_param
            .iter()
            .map(|v| {
                let resampled: Vec<f64> =
                    (0..v.len()).map(|_| v[rng.gen_range(0..v.len())]).collect();
                median(&resampled).ln()
            })
            .collect();
        slopes.push(ols_slope(&xs, &ys_b).0);
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (point, quantile_sorted(&slopes, 0.025), quantile_sorted(&slopes, 0.975))
}

/// Empirical survival fraction `#{x > r}/n`.
pub fn survival(samples: &[f64], r: f64) -> f64 {
    samples.iter().filter(|&&x| x > r).count() as f64 / samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_single_point_against_uniform() {
        // hand evaluation: F̂ jumps 0→1 at 0.5, sup gap vs U[0,1] CDF is 0.5
        let d = ks_statistic(&[0.5, 0.5], |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_identical_samples_vanish() {
        let a = vec![0.1, 0.4, 0.9, 2.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn ks_rejects_unsorted() {
        assert!(ks_statistic(&[0.3, 0.1], |x| x).is_err());
        assert!(ks_two_sample(&[0.3, 0.1], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn ks_from_reference_cdf_stays_below_critical() {
        // 4000 quasi-uniform points vs the uniform CDF: far below 0.0215
        let n = 4000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&samples, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= ks_critical_95(n), "{d}");
        assert!((ks_critical_95(4000) - 0.0215).abs() < 1e-4);
    }

    #[test]
    fn slope_recovers_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -2.0 * x + 3.0).collect();
        let (s, b) = ols_slope(&xs, &ys);
        assert!((s + 2.0).abs() < 1e-12 && (b - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_brackets_the_point_slope() {
        let params = [0.05, 0.1, 0.2, 0.4];
        let per: Vec<Vec<f64>> = params
            .iter()
            .map(|&t| (0..200).map(|i| 1.0 / t * (1.0 + 0.01 * ((i * 37 % 100) as f64 - 50.0) / 50.0)).collect())
            .collect();
        let (point, lo, hi) = bootstrap_log_slope_ci(&params, &per, 200, &RngStreamSpec::new(1, 0));
        assert!((point + 1.0).abs() < 0.05, "{point}");
        assert!(lo <= point && point <= hi);
    }

    #[test]
    fn quantiles_monotone_in_level() {
        let mut v: Vec<f64> = (0..101).map(|i| ((i * 61) % 101) as f64).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (q50, q90, q99) =
            (quantile_sorted(&v, 0.5), quantile_sorted(&v, 0.9), quantile_sorted(&v, 0.99));
        assert!(q50 <= q90 && q90 <= q99);
    }

    #[test]
    fn dkw_shrinks_with_n() {
        assert!(dkw_bound(4000, 0.05) < dkw_bound(1000, 0.05));
        assert!((dkw_bound(4000, 0.05) - (2.0_f64 / 0.05).ln().sqrt() / (8000.0_f64).sqrt()).abs() < 1e-12);
    }
}
