//! Random-matrix ensembles with independent entries of mean 0 and variance
//! `1/N`, together with moment-matched comparison laws and an empirical
//! assumption checker.
//!
//! A matrix entry is `h/√N` where `h` follows an [`EntryLaw`] normalized to
//! unit variance. Complex laws draw the real and imaginary parts of `h` as
//! independent copies of the base law scaled by `1/√2`, so each part carries
//! variance `1/2` and the total entry variance stays `1/N`.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStreamSpec;

/// Unit-variance scalar law for the unscaled entry variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseLaw {
    Gaussian,
    Rademacher,
    /// Uniform on `[-√3, √3]` (variance 1).
    UniformSymmetric,
    /// Symmetric atoms `{-a, 0, +a}` with probabilities `{p, 1-2p, p}`.
    ThreePoint { atom: f64, prob: f64 },
}

impl BaseLaw {
    /// First four moments of the unit-variance real variable.
    pub fn moments(&self) -> [f64; 4] {
        match *self {
            BaseLaw::Gaussian => [0.0, 1.0, 0.0, 3.0],
            BaseLaw::Rademacher => [0.0, 1.0, 0.0, 1.0],
            BaseLaw::UniformSymmetric => [0.0, 1.0, 0.0, 9.0 / 5.0],
            BaseLaw::ThreePoint { atom, prob } => {
                let m2 = 2.0 * prob * atom * atom;
                let m4 = 2.0 * prob * atom.powi(4);
                [0.0, m2, 0.0, m4]
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha12Rng) -> f64 {
        match *self {
            BaseLaw::Gaussian => StandardNormal.sample(rng),
            BaseLaw::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            BaseLaw::UniformSymmetric => {
                let half = 3.0_f64.sqrt();
                Uniform::new_inclusive(-half, half).sample(rng)
            }
            BaseLaw::ThreePoint { atom, prob } => {
                let u: f64 = rng.gen();
                if u < prob {
                    -atom
                } else if u < 2.0 * prob {
                    atom
                } else {
                    0.0
                }
            }
        }
    }
}

/// An i.i.d. entry distribution with its moments and tail class.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryLaw {
    pub base: BaseLaw,
    /// Complex realization: entry `h = (x + iy)/√2` with `x, y` i.i.d. base draws.
    pub complex: bool,
    /// Sub-exponential decay constant θ; recorded as metadata, never enforced
    /// at sampling time (all built-in laws are Gaussian or bounded).
    pub theta: f64,
}

impl EntryLaw {
    pub fn gaussian_real() -> Self {
        Self { base: BaseLaw::Gaussian, complex: false, theta: 1.0 }
    }
    pub fn gaussian_complex() -> Self {
        Self { base: BaseLaw::Gaussian, complex: true, theta: 1.0 }
    }
    pub fn rademacher() -> Self {
        Self { base: BaseLaw::Rademacher, complex: false, theta: 1.0 }
    }
    pub fn rademacher_complex() -> Self {
        Self { base: BaseLaw::Rademacher, complex: true, theta: 1.0 }
    }
    pub fn uniform_symmetric() -> Self {
        Self { base: BaseLaw::UniformSymmetric, complex: false, theta: 1.0 }
    }

    /// Kind label used in serialized configs and CSV records.
    pub fn kind(&self) -> String {
        let base = match self.base {
            BaseLaw::Gaussian => {
                return if self.complex { "gaussian-complex" } else { "gaussian-real" }.to_owned()
            }
            BaseLaw::Rademacher => "rademacher",
            BaseLaw::UniformSymmetric => "uniform-symmetric",
            BaseLaw::ThreePoint { .. } => "three-point",
        };
        if self.complex {
            format!("{base}-complex")
        } else {
            base.to_owned()
        }
    }

    /// Moments `(m1..m4)` of the unscaled entry `h`. For complex laws these
    /// are `E[h] = 0`, `E[|h|²]`, `E[h³] = 0` and `E[|h|⁴]`.
    pub fn moments(&self) -> [f64; 4] {
        let [m1, m2, m3, m4] = self.base.moments();
        if self.complex {
            // |h|^2 = (x^2 + y^2)/2 with unit-variance x, y.
            [m1, m2, m3, (m4 + 1.0) / 2.0]
        } else {
            [m1, m2, m3, m4]
        }
    }

    /// Fourth-moment distance to `other` in the sense used by the resolvent
    /// comparison (`|E(√N X)⁴ − E(√N Y)⁴|` of the unscaled variables).
    pub fn fourth_moment_gap(&self, other: &EntryLaw) -> f64 {
        (self.moments()[3] - other.moments()[3]).abs()
    }

    /// The Gaussian reference ensemble over the same field.
    pub fn gaussian_counterpart(&self) -> EntryLaw {
        if self.complex {
            EntryLaw::gaussian_complex()
        } else {
            EntryLaw::gaussian_real()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.moments();
        if (m[1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidLaw(format!(
                "entry variance must be 1 (got m2 = {})",
                m[1]
            )));
        }
        if let BaseLaw::ThreePoint { atom, prob } = self.base {
            if !(atom > 0.0) || !(0.0..=0.5).contains(&prob) {
                return Err(Error::InvalidLaw(format!(
                    "three-point law needs atom > 0 and prob in [0, 1/2] (got a = {atom}, p = {prob})"
                )));
            }
        }
        if !(self.theta > 0.0) {
            return Err(Error::InvalidLaw("theta must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct EntryLawRepr {
    kind: String,
    moments: [f64; 4],
    theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    atoms: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probs: Option<Vec<f64>>,
}

impl Serialize for EntryLaw {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let (atoms, probs) = match self.base {
            BaseLaw::ThreePoint { atom, prob } => (
                Some(vec![-atom, 0.0, atom]),
                Some(vec![prob, 1.0 - 2.0 * prob, prob]),
            ),
            _ => (None, None),
        };
        EntryLawRepr {
            kind: self.kind(),
            moments: self.moments(),
            theta: self.theta,
            atoms,
            probs,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for EntryLaw {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let repr = EntryLawRepr::deserialize(de)?;
        let (tag, complex) = match repr.kind.strip_suffix("-complex") {
            Some(t) if t != "gaussian" => (t.to_owned(), true),
            _ => match repr.kind.as_str() {
                "gaussian-complex" => ("gaussian".to_owned(), true),
                "gaussian-real" => ("gaussian".to_owned(), false),
                other => (other.to_owned(), false),
            },
        };
        let base = match tag.as_str() {
            "gaussian" => BaseLaw::Gaussian,
            "rademacher" => BaseLaw::Rademacher,
            "uniform-symmetric" => BaseLaw::UniformSymmetric,
            "three-point" => {
                let atoms = repr
                    .atoms
                    .ok_or_else(|| DeError::custom("three-point law requires atoms"))?;
                let probs = repr
                    .probs
                    .ok_or_else(|| DeError::custom("three-point law requires probs"))?;
                if atoms.len() != 3 || probs.len() != 3 {
                    return Err(DeError::custom("three-point law needs 3 atoms and 3 probs"));
                }
                if (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return Err(DeError::custom("three-point probabilities must sum to 1"));
                }
                if (atoms[0] + atoms[2]).abs() > 1e-12 || atoms[1] != 0.0 {
                    return Err(DeError::custom("three-point atoms must be {-a, 0, +a}"));
                }
                BaseLaw::ThreePoint { atom: atoms[2], prob: probs[2] }
            }
            other => return Err(DeError::custom(format!("unknown law kind `{other}`"))),
        };
        let law = EntryLaw { base, complex, theta: repr.theta };
        law.validate().map_err(DeError::custom)?;
        let declared = law.moments();
        for (i, (d, r)) in declared.iter().zip(repr.moments.iter()).enumerate() {
            if (d - r).abs() > 1e-9 {
                return Err(DeError::custom(format!(
                    "declared moment m{} = {} does not match law (expected {})",
                    i + 1,
                    r,
                    d
                )));
            }
        }
        Ok(law)
    }
}

/// Dense entry storage for a sampled matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Entries {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex<f64>>),
}

/// A sampled `M × N` matrix, entries scaled by `N^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSample {
    pub rows: usize,
    pub cols: usize,
    pub entries: Entries,
    /// `(master_seed, stream_id)` used to generate the matrix.
    pub seed_path: (u64, u64),
}

impl MatrixSample {
    pub fn is_complex(&self) -> bool {
        matches!(self.entries, Entries::Complex(_))
    }

    pub fn as_real(&self) -> Option<&DMatrix<f64>> {
        match &self.entries {
            Entries::Real(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_complex(&self) -> Option<&DMatrix<Complex<f64>>> {
        match &self.entries {
            Entries::Complex(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match &self.entries {
            Entries::Real(m) => m.iter().all(|x| x.is_finite()),
            Entries::Complex(m) => m.iter().all(|x| x.re.is_finite() && x.im.is_finite()),
        }
    }

    /// Exact bit equality of the entry data (determinism contract).
    pub fn bits_eq(&self, other: &MatrixSample) -> bool {
        match (&self.entries, &other.entries) {
            (Entries::Real(a), Entries::Real(b)) => {
                a.shape() == b.shape()
                    && a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (Entries::Complex(a), Entries::Complex(b)) => {
                a.shape() == b.shape()
                    && a.iter().zip(b.iter()).all(|(x, y)| {
                        x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()
                    })
            }
            _ => false,
        }
    }
}

/// Draw an `M × N` matrix with i.i.d. entries `h/√N` from `law`.
///
/// Deterministic given the stream spec: entries are generated in column-major
/// order, complex entries as (re, im) pairs.
pub fn sample_matrix(law: &EntryLaw, m: usize, n: usize, stream: &RngStreamSpec) -> Result<MatrixSample> {
    law.validate()?;
    if m < n || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "need M ≥ N ≥ 1 (got M = {m}, N = {n})"
        )));
    }
    let mut rng = stream.rng();
    let scale = 1.0 / (n as f64).sqrt();
    let entries = if law.complex {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let data: Vec<Complex<f64>> = (0..m * n)
            .map(|_| {
                let re = law.base.sample(&mut rng) * inv_sqrt2;
                let im = law.base.sample(&mut rng) * inv_sqrt2;
                Complex::new(re * scale, im * scale)
            })
            .collect();
        Entries::Complex(DMatrix::from_vec(m, n, data))
    } else {
        let data: Vec<f64> = (0..m * n).map(|_| law.base.sample(&mut rng) * scale).collect();
        Entries::Real(DMatrix::from_vec(m, n, data))
    };
    Ok(MatrixSample {
        rows: m,
        cols: n,
        entries,
        seed_path: (stream.master_seed, stream.stream_id),
    })
}

/// Three-point law matching the Gaussian's first three moments with
/// `|m4 − 3| = target_fourth_gap` (the fourth moment is `3 − gap`).
///
/// With atoms `{-a, 0, +a}` and probabilities `{p, 1-2p, p}` the moment
/// equations `2pa² = 1`, `2pa⁴ = m4` give `a = √m4`, `p = 1/(2 m4)`.
pub fn match_first_three_moments(target_fourth_gap: f64) -> Result<EntryLaw> {
    if !(target_fourth_gap >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fourth-moment gap must be ≥ 0 (got {target_fourth_gap})"
        )));
    }
    let m4 = 3.0 - target_fourth_gap;
    if m4 < 1.0 {
        return Err(Error::InvalidLaw(format!(
            "infeasible gap {target_fourth_gap}: a unit-variance law needs m4 ≥ m2² = 1, \
             but 3 − gap = {m4}"
        )));
    }
    let atom = m4.sqrt();
    let prob = 1.0 / (2.0 * m4);
    let law = EntryLaw { base: BaseLaw::ThreePoint { atom, prob }, complex: false, theta: 1.0 };
    law.validate()?;
    Ok(law)
}

/// One tail-threshold row of a [`MomentReport`].
#[derive(Debug, Clone, Serialize)]
pub struct TailRow {
    pub u: f64,
    pub exceedances: usize,
    /// `samples · min(1, θ⁻¹ exp(−u^θ))`.
    pub expected_bound: f64,
    pub flagged: bool,
}

/// Empirical moment and tail diagnostics for an entry law.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub samples: usize,
    pub declared: [f64; 4],
    pub empirical: [f64; 4],
    pub stderr: [f64; 4],
    /// `|empirical − declared| > 3·stderr`, per moment.
    pub moment_flags: [bool; 4],
    pub tails: Vec<TailRow>,
}

impl MomentReport {
    pub fn pass(&self) -> bool {
        !self.moment_flags.iter().any(|&f| f) && !self.tails.iter().any(|t| t.flagged)
    }
}

/// Empirically check the mean/variance and tail assumptions of `law` from
/// `samples` scalar draws. Violations are flagged in the report, not errored.
///
/// For complex laws the checked variable is the unit-variance base draw that
/// feeds both the real and imaginary parts, so the declared reference moments
/// are the base law's.
pub fn check_assumptions(law: &EntryLaw, samples: usize, stream: &RngStreamSpec) -> Result<MomentReport> {
    law.validate()?;
    if samples < 1_000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 10³ samples (got {samples})"
        )));
    }
    let mut rng = stream.rng();
    let draws: Vec<f64> = (0..samples).map(|_| law.base.sample(&mut rng)).collect();
    Ok(report_from_draws(law.base.moments(), law.theta, &draws))
}

/// Build the report from raw unit-variance draws (separated out so tests can
/// plant defective samplers).
pub fn report_from_draws(declared: [f64; 4], theta: f64, draws: &[f64]) -> MomentReport {
    let n = draws.len() as f64;
    let mut empirical = [0.0; 4];
    let mut stderr = [0.0; 4];
    let mut flags = [false; 4];
    for k in 0..4 {
        let pow = (k + 1) as i32;
        let mean = draws.iter().map(|x| x.powi(pow)).sum::<f64>() / n;
        let var = draws.iter().map(|x| (x.powi(pow) - mean).powi(2)).sum::<f64>() / n;
        empirical[k] = mean;
        stderr[k] = (var / n).sqrt();
        flags[k] = (mean - declared[k]).abs() > 3.0 * stderr[k];
    }
    let tails = [2.0, 4.0, 8.0]
        .iter()
        .map(|&u| {
            let count = draws.iter().filter(|x| x.abs() > u).count();
            let p = (f64::exp(-u.powf(theta)) / theta).min(1.0);
            let bound = n * p;
            // binomial slack on top of the bound; exceedance below it is fine
            let slack = 3.0 * (n * p * (1.0 - p)).sqrt() + 1.0;
            TailRow {
                u,
                exceedances: count,
                expected_bound: bound,
                flagged: (count as f64) > bound + slack,
            }
        })
        .collect();
    MomentReport { samples: draws.len(), declared, empirical, stderr, moment_flags: flags, tails }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(id: u64) -> RngStreamSpec {
        RngStreamSpec::new(0xC0FFEE, id)
    }

    #[test]
    fn rademacher_1x1_is_pm_one() {
        // N = 1 so the 1/√N scaling is trivial
        let s = sample_matrix(&EntryLaw::rademacher(), 1, 1, &stream(0)).unwrap();
        let v = s.as_real().unwrap()[(0, 0)];
        assert!(v == 1.0 || v == -1.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let law = EntryLaw::gaussian_real();
        let a = sample_matrix(&law, 4, 4, &stream(5)).unwrap();
        let b = sample_matrix(&law, 4, 4, &stream(5)).unwrap();
        assert!(a.bits_eq(&b));
        let c = sample_matrix(&law, 4, 4, &stream(6)).unwrap();
        assert!(!a.bits_eq(&c));
    }

    #[test]
    fn complex_sampling_is_deterministic_and_split() {
        let law = EntryLaw::gaussian_complex();
        let a = sample_matrix(&law, 3, 3, &stream(1)).unwrap();
        let b = sample_matrix(&law, 3, 3, &stream(1)).unwrap();
        assert!(a.bits_eq(&b));
    }

    #[test]
    fn rejects_bad_dimensions() {
        let law = EntryLaw::gaussian_real();
        assert!(sample_matrix(&law, 2, 3, &stream(0)).is_err());
        assert!(sample_matrix(&law, 0, 0, &stream(0)).is_err());
    }

    #[test]
    fn rejects_non_unit_variance_law() {
        let law = EntryLaw {
            base: BaseLaw::ThreePoint { atom: 2.0, prob: 0.5 },
            complex: false,
            theta: 1.0,
        };
        assert!(sample_matrix(&law, 2, 2, &stream(0)).is_err());
    }

    // Monte Carlo moment oracle: pooled entries of gaussian-real 64×64 samples.
    // The mean of n draws of variance 1/64 has std (1/8)/√n; the frozen bound
    // is 4 standard errors at n = 10⁴.
    #[test]
    fn gaussian_entry_moments_match_scaling() {
        let law = EntryLaw::gaussian_real();
        let n_entries = 10_000;
        let mut pool = Vec::with_capacity(n_entries);
        let mut id = 0;
        while pool.len() < n_entries {
            let s = sample_matrix(&law, 64, 64, &stream(100 + id)).unwrap();
            pool.extend(s.as_real().unwrap().iter().copied());
            id += 1;
        }
        pool.truncate(n_entries);
        let n = n_entries as f64;
        let mean = pool.iter().sum::<f64>() / n;
        assert!(mean.abs() < 4.0 / (64.0 * 1e4_f64).sqrt(), "mean {mean}");
        let var = pool.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        assert!((var - 1.0 / 64.0).abs() < 0.05 / 64.0, "var {var}");
        // scaling law: variance × N → 1, tolerance 3 standard errors (√(2/n) for Gaussian)
        assert!((var * 64.0 - 1.0).abs() < 3.0 * (2.0 / n).sqrt());
    }

    #[test]
    fn matched_law_zero_gap_has_gaussian_moments() {
        let law = match_first_three_moments(0.0).unwrap();
        let m = law.moments();
        for (got, want) in m.iter().zip([0.0, 1.0, 0.0, 3.0]) {
            assert!((got - want).abs() < 1e-12, "{m:?}");
        }
    }

    // Oracle: direct summation over the atoms {-a, 0, a} with probs {p, 1-2p, p}.
    #[test]
    fn matched_law_gap_two_is_rademacher_like() {
        let law = match_first_three_moments(2.0).unwrap();
        let BaseLaw::ThreePoint { atom, prob } = law.base else { panic!() };
        let atoms = [-atom, 0.0, atom];
        let probs = [prob, 1.0 - 2.0 * prob, prob];
        let moment = |k: i32| -> f64 {
            atoms.iter().zip(&probs).map(|(a, p)| p * a.powi(k)).sum()
        };
        assert!((moment(1)).abs() < 1e-15);
        assert!((moment(2) - 1.0).abs() < 1e-15);
        assert!((moment(3)).abs() < 1e-15);
        assert!((moment(4) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matched_law_infeasible_gap_errors() {
        let err = match_first_three_moments(4.0).unwrap_err();
        assert!(err.to_string().contains("m4 ≥ m2²"));
    }

    #[test]
    fn check_assumptions_gaussian_within_three_stderr() {
        let report =
            check_assumptions(&EntryLaw::gaussian_real(), 20_000, &stream(7)).unwrap();
        assert!(report.pass(), "{report:?}");
    }

    #[test]
    fn check_assumptions_rademacher_tail_is_empty() {
        let report = check_assumptions(&EntryLaw::rademacher(), 5_000, &stream(8)).unwrap();
        assert_eq!(report.tails[0].exceedances, 0);
    }

    #[test]
    fn planted_variance_defect_is_flagged() {
        // sampler secretly returns 2h while declaring unit variance
        let mut rng = stream(9).rng();
        let draws: Vec<f64> = (0..5_000)
            .map(|_| 2.0 * BaseLaw::Gaussian.sample(&mut rng))
            .collect();
        let report = report_from_draws([0.0, 1.0, 0.0, 3.0], 1.0, &draws);
        assert!(report.moment_flags[1], "variance violation must be flagged");
        assert!(!report.pass());
    }

    #[test]
    fn matched_law_feeds_back_clean_through_checker() {
        let law = match_first_three_moments(1.5).unwrap();
        let report = check_assumptions(&law, 20_000, &stream(10)).unwrap();
        for k in [0, 1, 2] {
            assert!(
                (report.empirical[k] - report.declared[k]).abs() <= 3.0 * report.stderr[k],
                "moment {} out of band: {report:?}",
                k + 1
            );
        }
    }

    #[test]
    fn check_assumptions_requires_enough_samples() {
        assert!(check_assumptions(&EntryLaw::gaussian_real(), 10, &stream(0)).is_err());
    }

    #[test]
    fn law_serde_round_trip() {
        for law in [
            EntryLaw::gaussian_real(),
            EntryLaw::gaussian_complex(),
            EntryLaw::rademacher(),
            EntryLaw::rademacher_complex(),
            EntryLaw::uniform_symmetric(),
            match_first_three_moments(0.5).unwrap(),
        ] {
            let s = serde_json::to_string(&law).unwrap();
            let back: EntryLaw = serde_json::from_str(&s).unwrap();
            assert_eq!(law, back, "{s}");
        }
    }

    #[test]
    fn law_json_rejects_inconsistent_moments() {
        let bad = r#"{"kind":"rademacher","moments":[0.0,1.0,0.0,3.0],"theta":1.0}"#;
        assert!(serde_json::from_str::<EntryLaw>(bad).is_err());
    }
}
