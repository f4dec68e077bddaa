//! Limiting spectral laws: semicircle and Marchenko–Pastur densities, the
//! closed-form semicircle CDF and Stieltjes transform, and the typical
//! locations (quantiles) of the symmetrized singular values.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Semicircle density `ρ(x) = √((4 − x²)₊) / 2π` on `[-2, 2]`.
pub fn rho_sc(x: f64) -> f64 {
    let d = 4.0 - x * x;
    if d <= 0.0 {
        0.0
    } else {
        d.sqrt() / (2.0 * std::f64::consts::PI)
    }
}

/// Marchenko–Pastur density at aspect ratio 1:
/// `ρ(x) = √((4 − x)/x) / 2π` on `[0, 4]`, with an inverse-square-root
/// singularity at the hard edge `x = 0`.
pub fn rho_mp(x: f64) -> f64 {
    if x <= 0.0 || x >= 4.0 {
        0.0
    } else {
        ((4.0 - x) / x).sqrt() / (2.0 * std::f64::consts::PI)
    }
}

/// Closed-form semicircle CDF
/// `F(x) = 1/2 + x√(4 − x²)/4π + arcsin(x/2)/π`, clamped outside `[-2, 2]`.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    let pi = std::f64::consts::PI;
    0.5 + x * (4.0 - x * x).sqrt() / (4.0 * pi) + (x / 2.0).asin() / pi
}

/// `√(z² − 4)` on the branch `√(z−2)·√(z+2)` (principal square roots), the
/// convention under which `Im m_sc(z) > 0` in the upper half-plane.
pub fn sqrt_z2_minus_4(z: Complex64) -> Complex64 {
    (z - 2.0).sqrt() * (z + 2.0).sqrt()
}

/// Stieltjes transform of the semicircle law, `m(z) = (−z + √(z² − 4))/2`,
/// evaluated in the cancellation-free form `−2/(z + √(z² − 4))`.
///
/// Requires `Im z ≠ 0`; callers on the real axis must add `iη` themselves.
pub fn m_sc(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 {
        return Err(Error::RealAxis(format!("m_sc needs Im z ≠ 0 (got z = {z})")));
    }
    Ok(-2.0 / (z + sqrt_z2_minus_4(z)))
}

/// Typical locations γₖ of the symmetrized singular values:
/// the semicircle quantiles `F(γₖ) = (N + k)/(2N)` for `k ∈ {1..N}`, with
/// `γ₋ₖ = −γₖ` by construction and `γ_N = 2` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalLocations {
    n: usize,
    positive: Vec<f64>,
}

impl TypicalLocations {
    pub fn n(&self) -> usize {
        self.n
    }

    /// γₖ for `k ∈ {-N..-1, 1..N}`. Panics on `k = 0` or `|k| > N`.
    pub fn gamma(&self, k: i64) -> f64 {
        assert!(k != 0 && k.unsigned_abs() as usize <= self.n, "index {k} out of range");
        let v = self.positive[k.unsigned_abs() as usize - 1];
        if k > 0 {
            v
        } else {
            -v
        }
    }

    /// The positive part `γ₁ ≤ … ≤ γ_N`.
    pub fn positive(&self) -> &[f64] {
        &self.positive
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let neg = (1..=self.n as i64).rev().map(move |k| (-k, -self.positive[k as usize - 1]));
        let pos = (1..=self.n as i64).map(move |k| (k, self.positive[k as usize - 1]));
        neg.chain(pos)
    }
}

/// Solve the quantile equations by bisection on the closed-form CDF.
pub fn gamma_quantiles(n: usize) -> TypicalLocations {
    assert!(n >= 1);
    let mut positive = Vec::with_capacity(n);
    for k in 1..n {
        let target = (n + k) as f64 / (2 * n) as f64;
        let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
        // 64 bisections: interval ~ 2⁻⁶³, far below the 1e-12 solver tolerance
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if semicircle_cdf(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        positive.push(0.5 * (lo + hi));
    }
    positive.push(2.0);
    TypicalLocations { n, positive }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // quadrature oracle used to pin the closed-form CDF and density mass
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut acc = f(a) + f(b);
        for i in 1..panels {
            let x = a + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        acc * h / 3.0
    }

    #[test]
    fn density_values_at_reference_points() {
        // formula evaluation: √4/(2π) = 1/π
        assert!((rho_sc(0.0) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(rho_sc(2.0), 0.0);
        assert_eq!(rho_sc(-2.0), 0.0);
        assert_eq!(rho_mp(4.0), 0.0);
        assert_eq!(rho_mp(0.0), 0.0);
    }

    // substitution x = 2 sin u removes the square-root edge singularity
    fn sc_mass_below(x: f64, panels: usize) -> f64 {
        let upper = (x / 2.0).clamp(-1.0, 1.0).asin();
        simpson(|u| rho_sc(2.0 * u.sin()) * 2.0 * u.cos(), -std::f64::consts::FRAC_PI_2, upper, panels)
    }

    #[test]
    fn densities_integrate_to_one() {
        let sc = sc_mass_below(2.0, 4_000);
        assert!((sc - 1.0).abs() < 1e-10, "semicircle mass {sc}");
        // x = 4 sin²u tames both MP endpoints; start just above 0 where the
        // coded density is 0 by convention but the transformed limit is 4/π
        let mp = simpson(
            |u| rho_mp(4.0 * u.sin() * u.sin()) * 8.0 * u.sin() * u.cos(),
            1e-12,
            std::f64::consts::FRAC_PI_2,
            4_000,
        );
        assert!((mp - 1.0).abs() < 1e-10, "MP mass {mp}");
    }

    #[test]
    fn cdf_matches_quadrature_of_density() {
        for &x in &[-1.7, -0.3, 0.0, 0.4, 1.2, 1.9] {
            let q = sc_mass_below(x, 4_000);
            assert!((semicircle_cdf(x) - q).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn m_sc_reference_value() {
        // closed form at z = 2i equals i(√2 − 1); cross-checked against
        // quadrature of ρ(x)/(x − z) below
        let z = Complex64::new(0.0, 2.0);
        let m = m_sc(z).unwrap();
        assert!((m - Complex64::new(0.0, 2.0_f64.sqrt() - 1.0)).norm() < 1e-14);

        // ∫ ρ(x)/(x−z) dx = ∫ ρ(x)(x−z̄)/|x−z|² dx, with x = 2 sin u
        let kernel = |u: f64, pick_im: bool| {
            let x = 2.0 * u.sin();
            let w = rho_sc(x) * 2.0 * u.cos() / (x - z).norm_sqr();
            if pick_im {
                w * (-(x - z).im)
            } else {
                w * (x - z).re
            }
        };
        let half_pi = std::f64::consts::FRAC_PI_2;
        let quad = Complex64::new(
            simpson(|u| kernel(u, false), -half_pi, half_pi, 8_000),
            simpson(|u| kernel(u, true), -half_pi, half_pi, 8_000),
        );
        assert!((m - quad).norm() < 1e-9, "quad {quad} vs m {m}");
    }

    #[test]
    fn m_sc_is_bounded_and_self_consistent_on_grid() {
        for i in 0..10 {
            for j in 1..11 {
                let z = Complex64::new(-3.0 + 0.6 * i as f64, 0.02 * j as f64 * j as f64);
                let m = m_sc(z).unwrap();
                assert!(m.norm() <= 1.0 + 1e-12, "|m({z})| = {}", m.norm());
                assert!(m.im > 0.0, "upper half-plane branch at {z}");
                let residual = m * m + z * m + Complex64::new(1.0, 0.0);
                assert!(residual.norm() < 1e-12, "residual {residual} at {z}");
                // conjugation symmetry
                let mc = m_sc(z.conj()).unwrap();
                assert!((mc - m.conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn m_sc_rejects_real_argument() {
        assert!(m_sc(Complex64::new(0.3, 0.0)).is_err());
    }

    #[test]
    fn gamma_full_mass_quantile_is_two() {
        for n in [1, 2, 7, 64] {
            assert_eq!(gamma_quantiles(n).gamma(n as i64), 2.0);
        }
    }

    #[test]
    fn gamma_antisymmetry_and_monotonicity() {
        let g = gamma_quantiles(16);
        for k in 1..=16_i64 {
            assert_eq!(g.gamma(-k), -g.gamma(k));
        }
        for k in 1..16_i64 {
            assert!(g.gamma(k) < g.gamma(k + 1));
        }
    }

    #[test]
    fn gamma_solves_cdf_equation() {
        let n = 2;
        let g = gamma_quantiles(n);
        // N = 2, k = 1: CDF(γ₁) = 3/4; pinned against the quadrature oracle
        let gamma1 = g.gamma(1);
        let q = sc_mass_below(gamma1, 8_000);
        assert!((q - 0.75).abs() < 1e-9, "quadrature CDF at γ₁ = {q}");
        assert!((semicircle_cdf(gamma1) - 0.75).abs() < 1e-12);

        for n in [5usize, 33, 128] {
            let g = gamma_quantiles(n);
            for k in 1..=n as i64 {
                let target = (n as f64 + k as f64) / (2.0 * n as f64);
                assert!(
                    (semicircle_cdf(g.gamma(k)) - target).abs() < 1e-10,
                    "N = {n}, k = {k}"
                );
            }
        }
    }

    #[test]
    fn im_m_sc_tracks_edge_distance() {
        // Im m_sc(E + iη) / √(ξ(E) + η) stays in [0.1, 10] for |E| ≤ 2
        for i in 0..=40 {
            let e = -2.0 + 4.0 * i as f64 / 40.0;
            for &eta in &[1e-4, 1e-2, 0.3, 1.0] {
                let xi = (e.abs() - 2.0).abs();
                let ratio = m_sc(Complex64::new(e, eta)).unwrap().im / (xi + eta).sqrt();
                assert!((0.1..=10.0).contains(&ratio), "E = {e}, η = {eta}: {ratio}");
            }
        }
    }
}
