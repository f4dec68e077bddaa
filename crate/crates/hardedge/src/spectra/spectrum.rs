//! Singular-value spectra, the Girko symmetrization, condition numbers and
//! the square augmentation of nearly-square matrices.

use nalgebra::{Complex, DMatrix};

use crate::ensembles::{sample_matrix, Entries, EntryLaw, MatrixSample};
use crate::error::{Error, Result};
use crate::rng::RngStreamSpec;

/// Ascending singular values `σ₁ ≤ … ≤ σ_N` of an `M × N` sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
    pub source_dims: (usize, usize),
}

impl SingularSpectrum {
    pub fn new(mut values: Vec<f64>, source_dims: (usize, usize)) -> Result<Self> {
        if values.len() != source_dims.0.min(source_dims.1) {
            return Err(Error::DimensionMismatch(format!(
                "{} singular values for dims {:?}",
                values.len(),
                source_dims
            )));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if values.first().is_some_and(|&v| v < 0.0) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("singular values must be finite and ≥ 0".into()));
        }
        Ok(Self { values, source_dims })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest singular value σ₁.
    pub fn smallest(&self) -> f64 {
        self.values[0]
    }

    /// Largest singular value σ_N.
    pub fn largest(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// Singular values indexed by `k ∈ {-N..-1, 1..N}` with `s₋ₖ = −sₖ` held
/// exactly by construction (only the positive half is stored).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedSpectrum {
    positive: Vec<f64>,
}

impl SymmetrizedSpectrum {
    pub fn from_singular(spec: &SingularSpectrum) -> Self {
        Self { positive: spec.values().to_vec() }
    }

    /// Build from the positive half `s₁ ≤ … ≤ s_N` (must be ≥ 0, sorted).
    pub fn from_positive(positive: Vec<f64>) -> Result<Self> {
        if positive.is_empty() || positive[0] < 0.0 {
            return Err(Error::InvalidArgument("need s₁ ≥ 0".into()));
        }
        if positive.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("positive half must be non-decreasing".into()));
        }
        Ok(Self { positive })
    }

    /// Test-only constructor that skips the ordering validation, so planted
    /// defects (a grossly misplaced sₖ) can be fed to the diagnostics.
    #[doc(hidden)]
    pub fn from_positive_unchecked(positive: Vec<f64>) -> Self {
        Self { positive }
    }

    pub fn n(&self) -> usize {
        self.positive.len()
    }

    /// `sₖ` for `k ∈ {-N..-1, 1..N}`. Panics on `k = 0` or `|k| > N`.
    pub fn value(&self, k: i64) -> f64 {
        assert!(k != 0 && k.unsigned_abs() as usize <= self.n(), "index {k} out of range");
        let v = self.positive[k.unsigned_abs() as usize - 1];
        if k > 0 {
            v
        } else {
            -v
        }
    }

    pub fn positive(&self) -> &[f64] {
        &self.positive
    }

    /// All `2N` values in index order `(-N, …, -1, 1, …, N)`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.n() as i64;
        let neg = (1..=n).rev().map(move |k| (-k, -self.positive[k as usize - 1]));
        let pos = (1..=n).map(move |k| (k, self.positive[k as usize - 1]));
        neg.chain(pos)
    }

    /// Position of index `k` in the `2N`-vector layout used by kernels.
    pub fn slot(&self, k: i64) -> usize {
        let n = self.n() as i64;
        assert!(k != 0 && k.abs() <= n);
        if k < 0 {
            (k + n) as usize
        } else {
            (k + n - 1) as usize
        }
    }

    /// Index at position `p` of the `2N`-vector layout.
    pub fn index_at(&self, p: usize) -> i64 {
        let n = self.n() as i64;
        let q = p as i64 - n;
        if q < 0 {
            q
        } else {
            q + 1
        }
    }
}

/// Ascending singular values of a sample, via dense SVD.
pub fn singular_values(a: &MatrixSample) -> Result<SingularSpectrum> {
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix has non-finite entries".into()));
    }
    let values: Vec<f64> = match &a.entries {
        Entries::Real(m) => m.clone().singular_values().iter().copied().collect(),
        Entries::Complex(m) => m.clone().singular_values().iter().copied().collect(),
    };
    SingularSpectrum::new(values, (a.rows, a.cols))
}

/// Girko symmetrization `[[0, Aᵀ], [A, 0]]` (conjugate transpose in the
/// complex case). Its eigenvalues are `{±σₖ(A)}` plus `|M − N|` zeros.
pub fn girko_symmetrize(a: &MatrixSample) -> Entries {
    let (m, n) = (a.rows, a.cols);
    let d = m + n;
    match &a.entries {
        Entries::Real(mat) => {
            let mut g = DMatrix::<f64>::zeros(d, d);
            g.view_mut((0, n), (n, m)).copy_from(&mat.transpose());
            g.view_mut((n, 0), (m, n)).copy_from(mat);
            Entries::Real(g)
        }
        Entries::Complex(mat) => {
            let mut g = DMatrix::<Complex<f64>>::zeros(d, d);
            g.view_mut((0, n), (n, m)).copy_from(&mat.adjoint());
            g.view_mut((n, 0), (m, n)).copy_from(mat);
            Entries::Complex(g)
        }
    }
}

/// Condition number κ = σ_N/σ₁ with an infinity sentinel for numerically
/// singular input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa {
    pub value: f64,
    /// σ₁ below `1e-14 · σ_N`, treated as exact zero.
    pub degenerate: bool,
}

pub fn condition_number(spec: &SingularSpectrum) -> Kappa {
    let (lo, hi) = (spec.smallest(), spec.largest());
    if lo <= 1e-14 * hi {
        Kappa { value: f64::INFINITY, degenerate: true }
    } else {
        Kappa { value: hi / lo, degenerate: false }
    }
}

/// Square an `M × N` sample (`M ≥ N`) by prepending `M − N` fresh i.i.d.
/// columns from `law`, scaled like the original entries (`1/√N` of the
/// source). `M = N` returns the input unchanged.
pub fn augment_matrix(a: &MatrixSample, law: &EntryLaw, stream: &RngStreamSpec) -> Result<MatrixSample> {
    law.validate()?;
    let (m, n) = (a.rows, a.cols);
    if m < n {
        return Err(Error::DimensionMismatch(format!("need M ≥ N (got {m} × {n})")));
    }
    if m == n {
        return Ok(a.clone());
    }
    if law.complex != a.is_complex() {
        return Err(Error::InvalidLaw("augmentation law must match the sample's field".into()));
    }
    // fresh block sampled at the source's 1/√N scale: sample an M×(M−N)
    // matrix from the law and rescale from its own 1/√(M−N) normalization
    let fresh = sample_matrix(law, m, m - n, stream)?;
    let rescale = ((m - n) as f64 / n as f64).sqrt();
    let entries = match (&fresh.entries, &a.entries) {
        (Entries::Real(f), Entries::Real(orig)) => {
            let mut g = DMatrix::<f64>::zeros(m, m);
            g.view_mut((0, 0), (m, m - n)).copy_from(&(f * rescale));
            g.view_mut((0, m - n), (m, n)).copy_from(orig);
            Entries::Real(g)
        }
        (Entries::Complex(f), Entries::Complex(orig)) => {
            let mut g = DMatrix::<Complex<f64>>::zeros(m, m);
            g.view_mut((0, 0), (m, m - n)).copy_from(&(f * Complex::new(rescale, 0.0)));
            g.view_mut((0, m - n), (m, n)).copy_from(orig);
            Entries::Complex(g)
        }
        _ => unreachable!("field checked above"),
    };
    Ok(MatrixSample {
        rows: m,
        cols: m,
        entries,
        seed_path: (stream.master_seed, stream.stream_id),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::EntryLaw;

    fn stream(id: u64) -> RngStreamSpec {
        RngStreamSpec::new(0xABCD, id)
    }

    fn real_sample(m: &DMatrix<f64>) -> MatrixSample {
        MatrixSample {
            rows: m.nrows(),
            cols: m.ncols(),
            entries: Entries::Real(m.clone()),
            seed_path: (0, 0),
        }
    }

    #[test]
    fn identity_singular_values() {
        let s = singular_values(&real_sample(&DMatrix::identity(2, 2))).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0]);
    }

    #[test]
    fn nilpotent_singular_values() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let s = singular_values(&real_sample(&m)).unwrap();
        assert!((s.values()[0]).abs() < 1e-15 && (s.values()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_entries_error() {
        let m = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(singular_values(&real_sample(&m)).is_err());
    }

    // symmetric-eigensolver oracle: σ(A) = √(eig(AᵀA)), an independent route
    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let a = sample_matrix(&EntryLaw::gaussian_real(), 6, 6, &stream(3)).unwrap();
        let s = singular_values(&a).unwrap();
        let m = a.as_real().unwrap();
        let mut eig: Vec<f64> =
            (m.transpose() * m).symmetric_eigenvalues().iter().map(|x| x.max(0.0).sqrt()).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (a, b) in s.values().iter().zip(&eig) {
            assert!((a - b).abs() <= 1e-10 * b.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn girko_1x1_eigenvalues_are_pm_a() {
        let m = DMatrix::from_row_slice(1, 1, &[0.7]);
        let g = girko_symmetrize(&real_sample(&m));
        let Entries::Real(g) = g else { panic!() };
        let mut ev: Vec<f64> = g.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((ev[0] + 0.7).abs() < 1e-14 && (ev[1] - 0.7).abs() < 1e-14);
    }

    // eigensolver-vs-SVD dual route on a square sample
    #[test]
    fn girko_eigenvalues_match_pm_singular_values() {
        let a = sample_matrix(&EntryLaw::gaussian_real(), 5, 5, &stream(4)).unwrap();
        let s = singular_values(&a).unwrap();
        let Entries::Real(g) = girko_symmetrize(&a) else { panic!() };
        let mut ev: Vec<f64> = g.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut expect: Vec<f64> = s.values().iter().map(|&v| -v).collect();
        expect.extend(s.values().iter().copied());
        expect.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn girko_rectangular_has_zero_modes() {
        let a = sample_matrix(&EntryLaw::gaussian_real(), 3, 2, &stream(5)).unwrap();
        let Entries::Real(g) = girko_symmetrize(&a) else { panic!() };
        let ev = g.symmetric_eigenvalues();
        let zeros = ev.iter().filter(|x| x.abs() < 1e-12).count();
        assert_eq!(zeros, 1, "exactly |M − N| = 1 zero eigenvalue: {ev:?}");
    }

    #[test]
    fn condition_number_reference_values() {
        let id = SingularSpectrum::new(vec![1.0, 1.0], (2, 2)).unwrap();
        assert_eq!(condition_number(&id).value, 1.0);
        let diag = SingularSpectrum::new(vec![1.0, 2.0], (2, 2)).unwrap();
        assert_eq!(condition_number(&diag).value, 2.0);
    }

    #[test]
    fn condition_number_scale_invariance() {
        // κ(aH) = κ(H) for a > 0, exact because both σ's scale together
        let a = sample_matrix(&EntryLaw::gaussian_real(), 8, 8, &stream(6)).unwrap();
        let s = singular_values(&a).unwrap();
        let scaled = SingularSpectrum::new(s.values().iter().map(|v| 3.0 * v).collect(), (8, 8)).unwrap();
        assert_eq!(condition_number(&s).value, condition_number(&scaled).value);
    }

    #[test]
    fn condition_number_singular_sentinel() {
        let s = SingularSpectrum::new(vec![0.0, 2.0], (2, 2)).unwrap();
        let k = condition_number(&s);
        assert!(k.degenerate && k.value.is_infinite());
    }

    #[test]
    fn augment_square_is_identity() {
        let a = sample_matrix(&EntryLaw::gaussian_real(), 4, 4, &stream(7)).unwrap();
        let out = augment_matrix(&a, &EntryLaw::gaussian_real(), &stream(8)).unwrap();
        assert!(out.bits_eq(&a));
    }

    #[test]
    fn augment_preserves_original_columns() {
        let a = sample_matrix(&EntryLaw::gaussian_real(), 6, 4, &stream(9)).unwrap();
        let out = augment_matrix(&a, &EntryLaw::gaussian_real(), &stream(10)).unwrap();
        assert_eq!((out.rows, out.cols), (6, 6));
        let orig = a.as_real().unwrap();
        let aug = out.as_real().unwrap();
        for i in 0..6 {
            for j in 0..4 {
                assert_eq!(orig[(i, j)].to_bits(), aug[(i, j + 2)].to_bits());
            }
        }
    }

    // Cauchy interlacing oracle: eigenvalues of AᵀA interlace those of BᵀB
    // when B = A plus p extra columns: σₖ(B) ≤ σₖ(A) ≤ σₖ₊ₚ(B) (ascending).
    #[test]
    fn augment_interlaces_singular_values() {
        let a = sample_matrix(&EntryLaw::gaussian_real(), 8, 6, &stream(11)).unwrap();
        let b = augment_matrix(&a, &EntryLaw::gaussian_real(), &stream(12)).unwrap();
        let sa = singular_values(&a).unwrap();
        let sb = singular_values(&b).unwrap();
        let p = 2;
        for k in 0..sa.len() {
            assert!(sb.values()[k] <= sa.values()[k] + 1e-12);
            assert!(sa.values()[k] <= sb.values()[k + p] + 1e-12);
        }
    }

    #[test]
    fn symmetrized_layout_round_trips() {
        let spec = SymmetrizedSpectrum::from_positive(vec![0.1, 0.5, 1.2]).unwrap();
        assert_eq!(spec.value(-3), -1.2);
        assert_eq!(spec.value(1), 0.1);
        for p in 0..6 {
            assert_eq!(spec.slot(spec.index_at(p)), p);
        }
        let order: Vec<i64> = spec.iter().map(|(k, _)| k).collect();
        assert_eq!(order, vec![-3, -2, -1, 1, 2, 3]);
    }
}
