//! Local-law diagnostics: spectral points and their edge distances, the
//! empirical Stieltjes transform, rigidity checks against typical locations,
//! and the characteristics of the advection equation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectra::laws::{sqrt_z2_minus_4, TypicalLocations};
use crate::spectra::spectrum::SymmetrizedSpectrum;

/// A spectral argument `z = E + iη` with its derived edge distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub z: Complex64,
    /// `ξ(z) = min(|z − 2|, |z + 2|)`, distance to the nearer spectral edge.
    pub xi: f64,
    /// `a(z) = dist(z, [−2, 2])`.
    pub a: f64,
    /// `b(z) = dist(z, ℝ ∖ (−2, 2))`.
    pub b: f64,
}

impl SpectralPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if z.im == 0.0 {
            return Err(Error::RealAxis(format!("spectral point needs η ≠ 0 (got {z})")));
        }
        Ok(Self { z, xi: xi_edge(z), a: dist_to_bulk(z), b: dist_to_complement(z) })
    }
}

/// `min(|z − 2|, |z + 2|)`.
pub fn xi_edge(z: Complex64) -> f64 {
    (z - 2.0).norm().min((z + 2.0).norm())
}

/// Distance from `z` to the segment `[-2, 2]`.
pub fn dist_to_bulk(z: Complex64) -> f64 {
    if z.re.abs() <= 2.0 {
        z.im.abs()
    } else {
        (z.re.abs() - 2.0).hypot(z.im)
    }
}

/// Distance from `z` to the complement of `(-2, 2)` on the real line.
pub fn dist_to_complement(z: Complex64) -> f64 {
    if z.re.abs() >= 2.0 {
        z.im.abs()
    } else {
        (2.0 - z.re.abs()).hypot(z.im)
    }
}

/// Empirical Stieltjes transform `S(z) = (1/2N) Σₖ 1/(sₖ − z)` over the
/// symmetrized indices.
pub fn empirical_stieltjes(spec: &SymmetrizedSpectrum, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 {
        let collides = spec.iter().any(|(_, s)| s == z.re);
        return Err(Error::RealAxis(if collides {
            format!("z = {z} collides with a singular value on the real axis")
        } else {
            format!("empirical Stieltjes transform needs η ≠ 0 (got {z})")
        }));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &s in spec.positive() {
        acc += 1.0 / (Complex64::new(s, 0.0) - z) + 1.0 / (Complex64::new(-s, 0.0) - z);
    }
    Ok(acc / (2.0 * spec.n() as f64))
}

/// One rigidity violation: `(k, |sₖ − γₖ|, allowance)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidityViolation {
    pub k: i64,
    pub deviation: f64,
    pub allowance: f64,
}

/// Outcome of a rigidity check at exponent ε.
#[derive(Debug, Clone)]
pub struct RigidityReport {
    pub epsilon: f64,
    pub violations: Vec<RigidityViolation>,
    pub pass: bool,
}

/// Per-index allowance `N^{-2/3+ε} (N + 1 − |k|)^{-1/3}`.
pub fn rigidity_allowance(n: usize, k: i64, epsilon: f64) -> f64 {
    (n as f64).powf(-2.0 / 3.0 + epsilon)
        * ((n as f64) + 1.0 - k.unsigned_abs() as f64).powf(-1.0 / 3.0)
}

/// Compare every `sₖ` against its typical location within the allowance.
pub fn rigidity_check(
    spec: &SymmetrizedSpectrum,
    gammas: &TypicalLocations,
    epsilon: f64,
) -> Result<RigidityReport> {
    if spec.n() != gammas.n() {
        return Err(Error::DimensionMismatch(format!(
            "spectrum N = {} vs typical locations N = {}",
            spec.n(),
            gammas.n()
        )));
    }
    let n = spec.n();
    let mut violations = Vec::new();
    for (k, s) in spec.iter() {
        let deviation = (s - gammas.gamma(k)).abs();
        let allowance = rigidity_allowance(n, k, epsilon);
        if deviation >= allowance {
            violations.push(RigidityViolation { k, deviation, allowance });
        }
    }
    let pass = violations.is_empty();
    Ok(RigidityReport { epsilon, violations, pass })
}

/// Characteristic flow of the advection equation:
/// `z_t = (e^{t/2}(z + √(z²−4)) + e^{−t/2}(z − √(z²−4)))/2`.
pub fn characteristic(z: Complex64, t: f64) -> Complex64 {
    let s = sqrt_z2_minus_4(z);
    ((t / 2.0).exp() * (z + s) + (-t / 2.0).exp() * (z - s)) / 2.0
}

/// Regime of a characteristic-geometry diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryRegime {
    /// `η > 0` and `|z − 2| < 1/10`.
    NearRightEdge,
    /// `E ∈ [−2 + margin, 2 − margin]`, `0 < η ≤ 1/margin`.
    Bulk,
}

/// Movement of the characteristic compared against its expected scale.
#[derive(Debug, Clone, Copy)]
pub struct GeometryDiagnostics {
    pub regime: GeometryRegime,
    pub re_diff: f64,
    pub im_diff: f64,
    /// Expected scale of `Re(z_t − z)`: `t·a(z)/√ξ + t²` near the edge.
    pub re_scale: Option<f64>,
    /// Expected scale of `Im(z_t − z)`: `t·b(z)/√ξ` near the edge, `t` in the bulk.
    pub im_scale: f64,
    /// `im_diff / im_scale` (the comparable quantity in both regimes).
    pub im_ratio: f64,
}

/// Evaluate the characteristic displacement and the comparison scales.
///
/// `bulk_margin` is the fixed distance-to-edge defining the bulk window;
/// points in neither regime are rejected.
pub fn characteristic_geometry(
    z: Complex64,
    t: f64,
    bulk_margin: f64,
) -> Result<GeometryDiagnostics> {
    let p = SpectralPoint::new(z)?;
    let regime = if z.im > 0.0 && (z - 2.0).norm() < 0.1 {
        GeometryRegime::NearRightEdge
    } else if z.re.abs() <= 2.0 - bulk_margin && z.im > 0.0 && z.im <= 1.0 / bulk_margin {
        GeometryRegime::Bulk
    } else {
        return Err(Error::InvalidArgument(format!(
            "z = {z} lies in neither the near-edge window |z−2| < 1/10 nor the bulk window"
        )));
    };
    let zt = characteristic(z, t);
    let (re_diff, im_diff) = ((zt - z).re, (zt - z).im);
    let (re_scale, im_scale) = match regime {
        GeometryRegime::NearRightEdge => {
            let sq = p.xi.sqrt();
            (Some(t * p.a / sq + t * t), t * p.b / sq)
        }
        GeometryRegime::Bulk => (None, t),
    };
    let im_ratio = if im_scale == 0.0 { f64::NAN } else { im_diff / im_scale };
    Ok(GeometryDiagnostics { regime, re_diff, im_diff, re_scale, im_scale, im_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::laws::{gamma_quantiles, m_sc};

    #[test]
    fn spectral_point_distances_recompute() {
        let p = SpectralPoint::new(Complex64::new(1.0, 0.3)).unwrap();
        assert!((p.a - 0.3).abs() < 1e-15);
        assert!((p.b - (1.0_f64.powi(2) + 0.09).sqrt()).abs() < 1e-15);
        assert!((p.xi - (Complex64::new(-1.0, 0.3)).norm()).abs() < 1e-15);
        let q = SpectralPoint::new(Complex64::new(2.5, 0.1)).unwrap();
        assert!((q.a - (0.5_f64.hypot(0.1))).abs() < 1e-15);
        assert!((q.b - 0.1).abs() < 1e-15);
        assert!(SpectralPoint::new(Complex64::new(0.4, 0.0)).is_err());
    }

    #[test]
    fn stieltjes_two_term_sum() {
        let spec = SymmetrizedSpectrum::from_positive(vec![0.8]).unwrap();
        let z = Complex64::new(0.3, 0.5);
        let s = empirical_stieltjes(&spec, z).unwrap();
        let expect = 0.5
            * (1.0 / (Complex64::new(0.8, 0.0) - z) + 1.0 / (Complex64::new(-0.8, 0.0) - z));
        assert!((s - expect).norm() < 1e-15);
    }

    #[test]
    fn stieltjes_imaginary_part_positive() {
        let spec = SymmetrizedSpectrum::from_positive(vec![0.1, 0.4, 1.9]).unwrap();
        let s = empirical_stieltjes(&spec, Complex64::new(0.0, 1.0)).unwrap();
        assert!(s.im > 0.0);
        assert!(empirical_stieltjes(&spec, Complex64::new(0.4, 0.0)).is_err());
    }

    #[test]
    fn rigidity_exact_locations_pass() {
        let n = 16;
        let g = gamma_quantiles(n);
        let spec = SymmetrizedSpectrum::from_positive(g.positive().to_vec()).unwrap();
        let report = rigidity_check(&spec, &g, 0.5).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn rigidity_gross_shift_fails_at_k1() {
        // plant s₁ → s₁ + 1 (a gross violation at k = ±1)
        let n = 16;
        let g = gamma_quantiles(n);
        let mut pos = g.positive().to_vec();
        pos[0] += 1.0;
        let spec = SymmetrizedSpectrum::from_positive_unchecked(pos);
        let report = rigidity_check(&spec, &g, 0.5).unwrap();
        assert!(!report.pass);
        assert!(report.violations.iter().any(|v| v.k.abs() == 1));
    }

    #[test]
    fn characteristic_fixed_time_zero() {
        let z = Complex64::new(0.7, 0.2);
        assert!((characteristic(z, 0.0) - z).norm() < 1e-15);
    }

    #[test]
    fn characteristic_at_edge_is_cosh() {
        // z = 2: the square-root factor vanishes exactly, z_t = 2 cosh(t/2)
        let z = Complex64::new(2.0, 0.0);
        for &t in &[0.1, 0.4, 1.0] {
            let zt = characteristic(z, t);
            assert!((zt.re - 2.0 * (t / 2.0).cosh()).abs() < 1e-12, "t = {t}: {zt}");
            assert_eq!(zt.im, 0.0);
        }
    }

    #[test]
    fn characteristic_composes_as_semigroup() {
        // (z_s)_t = z_{s+t} on a grid
        for i in 0..5 {
            for j in 1..5 {
                let z = Complex64::new(-1.5 + 0.7 * i as f64, 0.08 * j as f64);
                for &(s, t) in &[(0.1, 0.2), (0.05, 0.4), (0.3, 0.3)] {
                    let a = characteristic(characteristic(z, s), t);
                    let b = characteristic(z, s + t);
                    assert!((a - b).norm() < 1e-10, "z = {z}, s = {s}, t = {t}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn characteristic_moves_up_in_upper_half_plane() {
        // Im z_t > Im z: the flow moves away from the real axis, consistent
        // with m_sc's branch
        let z = Complex64::new(0.5, 0.05);
        let zt = characteristic(z, 0.3);
        assert!(zt.im > z.im);
        assert!(m_sc(z).unwrap().im > 0.0);
    }

    #[test]
    fn geometry_bulk_ratio_is_order_one() {
        let d = characteristic_geometry(Complex64::new(0.0, 0.1), 0.3, 0.05).unwrap();
        assert_eq!(d.regime, GeometryRegime::Bulk);
        assert!((0.1..=10.0).contains(&d.im_ratio), "{d:?}");
    }

    #[test]
    fn geometry_zero_time_is_fixed() {
        let d = characteristic_geometry(Complex64::new(0.3, 0.2), 0.0, 0.05).unwrap();
        assert!(d.re_diff.abs() < 1e-15);
        assert!(d.im_diff.abs() < 1e-15);
    }

    #[test]
    fn geometry_near_edge_ratios_bounded_on_grid() {
        // 20-point sweep near z = 2; both ratios stay within [1e-2, 1e2]
        let mut checked = 0;
        for i in 0..5 {
            for j in 0..4 {
                let z = Complex64::new(1.92 + 0.04 * i as f64, 0.005 + 0.02 * j as f64);
                if (z - 2.0).norm() >= 0.1 {
                    continue;
                }
                for &t in &[0.05, 0.3, 0.9] {
                    let d = characteristic_geometry(z, t, 0.05).unwrap();
                    assert_eq!(d.regime, GeometryRegime::NearRightEdge);
                    let re_ratio = d.re_diff / d.re_scale.unwrap();
                    assert!((1e-2..=1e2).contains(&re_ratio), "{z}, t = {t}: re {re_ratio}");
                    assert!((1e-2..=1e2).contains(&d.im_ratio), "{z}, t = {t}: im {}", d.im_ratio);
                    checked += 1;
                }
            }
        }
        assert!(checked >= 20);
    }

    #[test]
    fn geometry_rejects_out_of_regime_points() {
        assert!(characteristic_geometry(Complex64::new(2.5, 0.4), 0.1, 0.05).is_err());
    }
}
