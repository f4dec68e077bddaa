//! Matrix Ornstein–Uhlenbeck flow: the closed-form interpolation
//! `H_t = e^{-t/2} H + √(1 − e^{-t}) G` and the Euler–Maruyama path of
//! `dH = dB/√N − ½H dt`, which it solves in law.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::ensembles::{Entries, MatrixSample};
use crate::error::{Error, Result};
use crate::rng::RngStreamSpec;

/// Whether stochastic terms are injected (`Off` integrates the drift only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    On,
    Off,
}

/// `e^{-t/2} H + √(1 − e^{-t}) G`, entrywise; preserves entry variance
/// `1/N` since `e^{-t}/N + (1 − e^{-t})/N = 1/N`.
pub fn ou_interpolate(h: &MatrixSample, g: &MatrixSample, t: f64) -> Result<MatrixSample> {
    if (h.rows, h.cols) != (g.rows, g.cols) {
        return Err(Error::DimensionMismatch(format!(
            "{}×{} vs {}×{}",
            h.rows, h.cols, g.rows, g.cols
        )));
    }
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("need t ≥ 0, got {t}")));
    }
    let (ch, cg) = ((-t / 2.0).exp(), (1.0 - (-t).exp()).sqrt());
    let entries = match (&h.entries, &g.entries) {
        (Entries::Real(a), Entries::Real(b)) => Entries::Real(a * ch + b * cg),
        (Entries::Complex(a), Entries::Complex(b)) => {
            Entries::Complex(a * nalgebra::Complex::new(ch, 0.0) + b * nalgebra::Complex::new(cg, 0.0))
        }
        _ => {
            return Err(Error::DimensionMismatch(
                "cannot interpolate a real with a complex sample".into(),
            ))
        }
    };
    Ok(MatrixSample { rows: h.rows, cols: h.cols, entries, seed_path: h.seed_path })
}

/// The perturbation `H + λG` itself (the smoothed-analysis object); equals
/// `√(1+λ²) · H_{log(1+λ²)}` in law.
pub fn perturb(h: &MatrixSample, lambda: f64, g: &MatrixSample) -> Result<MatrixSample> {
    if (h.rows, h.cols) != (g.rows, g.cols) {
        return Err(Error::DimensionMismatch(format!(
            "{}×{} vs {}×{}",
            h.rows, h.cols, g.rows, g.cols
        )));
    }
    let entries = match (&h.entries, &g.entries) {
        (Entries::Real(a), Entries::Real(b)) => Entries::Real(a + b * lambda),
        (Entries::Complex(a), Entries::Complex(b)) => {
            Entries::Complex(a + b * nalgebra::Complex::new(lambda, 0.0))
        }
        _ => {
            return Err(Error::DimensionMismatch(
                "cannot combine a real with a complex sample".into(),
            ))
        }
    };
    Ok(MatrixSample { rows: h.rows, cols: h.cols, entries, seed_path: h.seed_path })
}

/// Euler–Maruyama path of the matrix OU process from `h0` over
/// `steps` steps of size `dt`. Real samples only.
///
/// The marginal entry variance after time `T = dt·steps` approaches the
/// closed form `e^{-T} v₀ + (1 − e^{-T})/N` to first order in `dt`.
pub fn ou_sde_path(
    h0: &MatrixSample,
    dt: f64,
    steps: usize,
    stream: &RngStreamSpec,
    noise: NoiseMode,
) -> Result<MatrixSample> {
    if dt > 1e-2 || dt <= 0.0 {
        return Err(Error::InvalidArgument(format!("need 0 < dt ≤ 1e-2, got {dt}")));
    }
    if dt * steps as f64 > 10.0 {
        return Err(Error::InvalidArgument(format!(
            "horizon dt·steps = {} exceeds 10",
            dt * steps as f64
        )));
    }
    let Entries::Real(m0) = &h0.entries else {
        return Err(Error::InvalidArgument(
            "the matrix Brownian path is implemented for real samples".into(),
        ));
    };
    let mut rng = stream.rng();
    let mut m = m0.clone();
    let amp = match noise {
        NoiseMode::On => (dt / h0.cols as f64).sqrt(),
        NoiseMode::Off => 0.0,
    };
    let (rows, cols) = m.shape();
    for _ in 0..steps {
        if amp > 0.0 {
            let noise_mat = DMatrix::<f64>::from_fn(rows, cols, |_, _| {
                let z: f64 = rng.sample(StandardNormal);
                z * amp
            });
            m = &m * (1.0 - dt / 2.0) + noise_mat;
        } else {
            m *= 1.0 - dt / 2.0;
        }
    }
    Ok(MatrixSample { rows, cols, entries: Entries::Real(m), seed_path: h0.seed_path })
}
