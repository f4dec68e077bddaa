//! Smooth test functions that bound the distribution of the smallest
//! singular value: the plateau pair `f₁ ≤ f₂` around the threshold `r/N`,
//! the non-increasing outer function `F`, and spectral traces of them.
//!
//! Transitions use the quintic smoothstep `6u⁵ − 15u⁴ + 10u³`, which is C²
//! with closed-form derivative bounds `‖S′‖∞ = 15/8` and `‖S″‖∞ = 10/√3`,
//! so `‖f′‖∞ ≤ 1.875/ρ` and `‖f″‖∞ ≤ 5.7735/ρ²`.

use crate::ensembles::MatrixSample;
use crate::error::{Error, Result};
use crate::spectra::{singular_values, SymmetrizedSpectrum};

/// Quintic smoothstep on `[0, 1]`.
pub fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    }
}

/// `d/du` of [`smoothstep`].
pub fn smoothstep_deriv(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        0.0
    } else {
        30.0 * u * u * (u - 1.0) * (u - 1.0)
    }
}

/// `d²/du²` of [`smoothstep`].
pub fn smoothstep_deriv2(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        0.0
    } else {
        60.0 * u * (2.0 * u - 1.0) * (u - 1.0)
    }
}

/// Which member of the test-function family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFnVariant {
    /// `f₁`: 1 below `r/N − ρ`, 0 above `r/N`.
    F1,
    /// `f₂`: 1 below `r/N`, 0 above `r/N + ρ`.
    F2,
    /// Centered variant: 1 below `E − ρ`, 0 above `E`.
    Centered { e: f64 },
}

/// A symmetric C² plateau function, non-increasing in `|x|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunctionSpec {
    pub n: usize,
    /// Threshold in units of `1/N`.
    pub r: f64,
    /// Mollifier width ρ ∈ [N⁻ᵃ, N⁻¹].
    pub rho: f64,
    /// Cutoff-scale exponent a ∈ (1, 2).
    pub a: f64,
    pub variant: TestFnVariant,
}

impl TestFunctionSpec {
    pub fn new(n: usize, r: f64, rho: f64, a: f64, variant: TestFnVariant) -> Result<Self> {
        if !(1.0 < a && a < 2.0) {
            return Err(Error::InvalidArgument(format!("need a ∈ (1, 2), got {a}")));
        }
        let nf = n as f64;
        if !(rho >= nf.powf(-a) - 1e-15 && rho <= 1.0 / nf + 1e-15) {
            return Err(Error::InvalidArgument(format!(
                "need ρ ∈ [N^-a, N^-1] = [{:.3e}, {:.3e}], got {rho:.3e}",
                nf.powf(-a),
                1.0 / nf
            )));
        }
        if r <= 0.0 {
            return Err(Error::InvalidArgument(format!("need r > 0, got {r}")));
        }
        if let TestFnVariant::Centered { e } = variant {
            if e <= 0.0 {
                return Err(Error::InvalidArgument(format!("need E > 0, got {e}")));
            }
        }
        Ok(Self { n, r, rho, a, variant })
    }

    /// `|x|` above which the function is 0.
    pub fn outer(&self) -> f64 {
        let rn = self.r / self.n as f64;
        match self.variant {
            TestFnVariant::F1 => rn,
            TestFnVariant::F2 => rn + self.rho,
            TestFnVariant::Centered { e } => e,
        }
    }

    /// `|x|` below which the function is 1.
    pub fn inner(&self) -> f64 {
        self.outer() - self.rho
    }

    pub fn eval(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax >= self.outer() {
            0.0
        } else if ax <= self.inner() {
            1.0
        } else {
            smoothstep((self.outer() - ax) / self.rho)
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax >= self.outer() || ax <= self.inner() {
            0.0
        } else {
            -x.signum() * smoothstep_deriv((self.outer() - ax) / self.rho) / self.rho
        }
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax >= self.outer() || ax <= self.inner() {
            0.0
        } else {
            smoothstep_deriv2((self.outer() - ax) / self.rho) / (self.rho * self.rho)
        }
    }
}

/// Evaluate the test function at `x`.
pub fn eval_test_function(spec: &TestFunctionSpec, x: f64) -> f64 {
    spec.eval(x)
}

/// Fixed smooth non-increasing outer function with `F(x) = 1` for `x ≤ 0`
/// and `F(x) = 0` for `x ≥ 1` (reflected quintic smoothstep).
#[derive(Debug, Clone, Copy, Default)]
pub struct OuterFunctionF;

impl OuterFunctionF {
    pub fn eval(&self, x: f64) -> f64 {
        1.0 - smoothstep(x)
    }
}

/// `Tr f(H) = Σₖ f(sₖ)` over the symmetrized indices; lies in `[0, 2N]`.
pub fn trace_f(spec: &TestFunctionSpec, spectrum: &SymmetrizedSpectrum) -> f64 {
    spectrum.iter().map(|(_, s)| spec.eval(s)).sum()
}

/// The three quantities of the distribution bound, in order
/// `F(Tr f₂) ≤ 1{σ₁ > r/N} ≤ F(Tr f₁)`.
#[derive(Debug, Clone, Copy)]
pub struct SandwichTriple {
    pub lhs: f64,
    pub indicator: f64,
    pub rhs: f64,
    pub sigma1: f64,
}

/// Evaluate and hard-assert the sandwich on one sample. A violation returns
/// an error carrying the offending spectrum (it would falsify the
/// implementation, not the underlying bound).
pub fn sandwich_check(h: &MatrixSample, r: f64, rho: f64) -> Result<SandwichTriple> {
    let n = h.cols;
    // ρ must fit some a ∈ (1, 2): pick the implied exponent and validate
    let nf = n as f64;
    if !(rho > nf.powf(-2.0) && rho <= 1.0 / nf) {
        return Err(Error::InvalidArgument(format!(
            "ρ = {rho:.3e} outside (N⁻², N⁻¹] for N = {n}"
        )));
    }
    let a = (-rho.ln() / nf.ln()).clamp(1.0 + 1e-9, 2.0 - 1e-9);
    let f1 = TestFunctionSpec::new(n, r, rho, a, TestFnVariant::F1)?;
    let f2 = TestFunctionSpec::new(n, r, rho, a, TestFnVariant::F2)?;
    let spec = singular_values(h)?;
    let sym = SymmetrizedSpectrum::from_singular(&spec);
    let outer = OuterFunctionF;
    let lhs = outer.eval(trace_f(&f2, &sym));
    let rhs = outer.eval(trace_f(&f1, &sym));
    let indicator = if spec.smallest() > r / nf { 1.0 } else { 0.0 };
    if !(lhs <= indicator && indicator <= rhs) {
        return Err(Error::CheckFailed(format!(
            "sandwich violated: F(Tr f₂) = {lhs}, 1 = {indicator}, F(Tr f₁) = {rhs}, \
             spectrum = {:?}",
            spec.values()
        )));
    }
    Ok(SandwichTriple { lhs, indicator, rhs, sigma1: spec.smallest() })
}
