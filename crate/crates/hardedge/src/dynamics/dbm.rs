//! Symmetrized singular-value Dyson Brownian motion
//! `ds_k = dB_k/√N + [−s_k/2 + (1/2N) Σ_{ℓ≠±k} 1/(s_k − s_ℓ)] dt`
//! with mirrored indices `s_{-k} = −s_k`, `B_{-k} = −B_k`, integrated by
//! explicit Euler–Maruyama with collision-refusing adaptive steps.
//!
//! Only the positive half `s_1 < … < s_N` is stored; antisymmetry is exact
//! by construction. A proposed step is rejected (and `dt` halved, at most
//! 20 times) whenever the ordering `0 < s_1 < … < s_N` would break or any
//! gap would land below a small fraction of the step's noise scale — the
//! discrete stand-in for the SDE's non-colliding property. The singular
//! drift is never regularized.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::dynamics::NoiseMode;
use crate::ensembles::MatrixSample;
use crate::error::{Error, Result};
use crate::rng::RngStreamSpec;
use crate::spectra::{singular_values, SymmetrizedSpectrum};

/// Hard cap on a single step.
pub const DT_CAP: f64 = 1e-3;
/// Floor coefficient: steps never shrink below `2.2e-3/N`, where the
/// per-step noise scale is about half the typical minimal gap; smaller gaps
/// are handled by rejection rather than by shrinking `dt` (a pure
/// `dt ∝ gap²` policy stalls: both drift·dt and noise·√dt then scale with
/// the gap itself, so log(gap) random-walks with no restoring drift in
/// step index).
pub const DT_FLOOR_COEFF: f64 = 2.2e-3;
/// Accepted steps must keep every gap above this multiple of `√(dt/N)`.
pub const GAP_ACCEPT_FRAC: f64 = 0.01;

/// A time-stamped symmetrized spectrum under the DBM flow.
#[derive(Debug, Clone)]
pub struct DbmState {
    pub spectrum: SymmetrizedSpectrum,
    pub t: f64,
    /// Step size of the last accepted step.
    pub dt_used: f64,
}

impl DbmState {
    pub fn new(spectrum: SymmetrizedSpectrum, t: f64) -> Result<Self> {
        let p = spectrum.positive();
        if p[0] <= 0.0 || p.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "DBM state needs strictly ordered positive values (collision guard)".into(),
            ));
        }
        Ok(Self { spectrum, t, dt_used: 0.0 })
    }

    pub fn from_sample(a: &MatrixSample) -> Result<Self> {
        let sv = singular_values(a)?;
        Self::new(SymmetrizedSpectrum::from_singular(&sv), 0.0)
    }
}

/// Smallest gap of the symmetrized configuration, including the central gap
/// `s_1 − s_{-1} = 2 s_1`.
pub fn min_gap(positive: &[f64]) -> f64 {
    let mut g = 2.0 * positive[0];
    for w in positive.windows(2) {
        g = g.min(w[1] - w[0]);
    }
    g
}

/// Drift of the positive half: `−s_k/2 + (1/2N) Σ_{ℓ≥1, ℓ≠k}
/// [1/(s_k−s_ℓ) + 1/(s_k+s_ℓ)]`, the mirrored form of the symmetrized sum.
pub(crate) fn symmetrized_drift(s: &[f64], out: &mut [f64]) {
    let n = s.len();
    let inv2n = 1.0 / (2.0 * n as f64);
    out.iter_mut().for_each(|o| *o = 0.0);
    for k in 0..n {
        let sk = s[k];
        let mut acc = 0.0;
        for l in (k + 1)..n {
            let d = 1.0 / (sk - s[l]);
            let p = 1.0 / (sk + s[l]);
            acc += d + p;
            out[l] += p - d;
        }
        out[k] += acc;
    }
    for k in 0..n {
        out[k] = -0.5 * s[k] + inv2n * out[k];
    }
}

fn try_step(
    s: &[f64],
    drift: &[f64],
    z: &[f64],
    dt: f64,
    amp: f64,
    out: &mut Vec<f64>,
) -> bool {
    let n = s.len();
    out.clear();
    out.extend(s.iter().zip(drift).zip(z).map(|((&s, &d), &z)| s + d * dt + amp * z));
    let g_accept = GAP_ACCEPT_FRAC * (dt / n as f64).sqrt();
    if 2.0 * out[0] < g_accept {
        return false;
    }
    out.windows(2).all(|w| w[1] - w[0] >= g_accept)
}

/// One Euler–Maruyama attempt at step size `dt` (indices `k ≥ 1` with the
/// mirrored update implied). Errors instead of reordering when the step
/// would cross; the caller decides whether to halve and retry.
pub fn dbm_step(
    state: &DbmState,
    dt: f64,
    rng: &mut ChaCha12Rng,
    noise: NoiseMode,
) -> Result<DbmState> {
    let s = state.spectrum.positive();
    let n = s.len();
    let mut drift = vec![0.0; n];
    symmetrized_drift(s, &mut drift);
    let amp = match noise {
        NoiseMode::On => (dt / n as f64).sqrt(),
        NoiseMode::Off => 0.0,
    };
    let z: Vec<f64> = (0..n)
        .map(|_| if amp > 0.0 { rng.sample(StandardNormal) } else { 0.0 })
        .collect();
    let mut out = Vec::with_capacity(n);
    if !try_step(s, &drift, &z, dt, amp, &mut out) {
        return Err(Error::StepRejected { suggested_dt: dt / 2.0 });
    }
    Ok(DbmState {
        spectrum: SymmetrizedSpectrum::from_positive(out)
            .expect("accepted step preserves ordering"),
        t: state.t + dt,
        dt_used: dt,
    })
}

/// Advance several configurations under one shared Brownian driving to
/// `t_target`, adaptively. `on_step(pre_states, t, dt)` runs once per
/// accepted step with the pre-step states and the accepted size.
pub(crate) fn drive<F>(
    states: &mut [Vec<f64>],
    t0: f64,
    t_target: f64,
    rng: &mut ChaCha12Rng,
    noise: NoiseMode,
    mut on_step: F,
) -> Result<f64>
where
    F: FnMut(&[Vec<f64>], f64, f64) -> Result<()>,
{
    assert!(!states.is_empty());
    let n = states[0].len();
    let floor = DT_FLOOR_COEFF / n as f64;
    let mut t = t0;
    let mut drifts: Vec<Vec<f64>> = states.iter().map(|_| vec![0.0; n]).collect();
    let mut candidates: Vec<Vec<f64>> = states.iter().map(|_| Vec::with_capacity(n)).collect();
    let mut z = vec![0.0; n];
    let mut last_dt = 0.0;
    while t < t_target - 1e-14 {
        let g = states.iter().map(|s| min_gap(s)).fold(f64::INFINITY, f64::min);
        let guard = (0.1 * g * g * n as f64).max(floor);
        let mut dt = DT_CAP.min(guard).min(t_target - t);
        for (s, d) in states.iter().zip(drifts.iter_mut()) {
            symmetrized_drift(s, d);
        }
        let mut halvings = 0;
        loop {
            let amp = match noise {
                NoiseMode::On => (dt / n as f64).sqrt(),
                NoiseMode::Off => 0.0,
            };
            if amp > 0.0 {
                z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            }
            let ok = states
                .iter()
                .zip(drifts.iter())
                .zip(candidates.iter_mut())
                .all(|((s, d), c)| try_step(s, d, &z, dt, amp, c));
            if ok {
                on_step(states, t, dt)?;
                for (s, c) in states.iter_mut().zip(candidates.iter()) {
                    s.copy_from_slice(c);
                }
                t += dt;
                last_dt = dt;
                break;
            }
            halvings += 1;
            if halvings > 20 {
                return Err(Error::StepRejected { suggested_dt: dt / 2.0 });
            }
            dt /= 2.0;
        }
    }
    Ok(last_dt)
}

/// Advance one state to `t_target` with adaptive collision-refusing steps.
pub fn advance(
    state: &DbmState,
    t_target: f64,
    stream: &RngStreamSpec,
    noise: NoiseMode,
) -> Result<DbmState> {
    let mut rng = stream.rng();
    advance_with_rng(state, t_target, &mut rng, noise)
}

pub fn advance_with_rng(
    state: &DbmState,
    t_target: f64,
    rng: &mut ChaCha12Rng,
    noise: NoiseMode,
) -> Result<DbmState> {
    if t_target < state.t {
        return Err(Error::InvalidArgument("cannot integrate backwards".into()));
    }
    let mut states = [state.spectrum.positive().to_vec()];
    let dt = drive(&mut states, state.t, t_target, rng, noise, |_, _, _| Ok(()))?;
    Ok(DbmState {
        spectrum: SymmetrizedSpectrum::from_positive(states[0].clone())?,
        t: t_target,
        dt_used: dt,
    })
}

/// One time point of a coupled pair of trajectories.
#[derive(Debug, Clone)]
pub struct CoupledSnapshot {
    pub t: f64,
    pub s_h: SymmetrizedSpectrum,
    pub s_g: SymmetrizedSpectrum,
}

impl CoupledSnapshot {
    /// `σ_k(H,t) − σ_k(G,t)` over the positive indices.
    pub fn gaps(&self) -> Vec<f64> {
        self.s_h
            .positive()
            .iter()
            .zip(self.s_g.positive())
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn sigma1_gap(&self) -> f64 {
        (self.s_h.positive()[0] - self.s_g.positive()[0]).abs()
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps().iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

/// Run two DBM trajectories from `σ(H)` and `σ(G)` under identical Brownian
/// increments, reporting the pair at every grid time.
pub fn coupled_dbm(
    h: &MatrixSample,
    g: &MatrixSample,
    t_grid: &[f64],
    stream: &RngStreamSpec,
) -> Result<Vec<CoupledSnapshot>> {
    if (h.rows, h.cols) != (g.rows, g.cols) || h.rows != h.cols {
        return Err(Error::DimensionMismatch(
            "coupled flow needs square samples of equal size".into(),
        ));
    }
    let sh = SymmetrizedSpectrum::from_singular(&singular_values(h)?);
    let sg = SymmetrizedSpectrum::from_singular(&singular_values(g)?);
    coupled_dbm_from_spectra(&sh, &sg, t_grid, stream, NoiseMode::On)
}

/// Spectrum-level entry point for the coupled flow.
pub fn coupled_dbm_from_spectra(
    s_h: &SymmetrizedSpectrum,
    s_g: &SymmetrizedSpectrum,
    t_grid: &[f64],
    stream: &RngStreamSpec,
    noise: NoiseMode,
) -> Result<Vec<CoupledSnapshot>> {
    if s_h.n() != s_g.n() {
        return Err(Error::DimensionMismatch("coupled spectra must share N".into()));
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[0] >= w[1]) || t_grid[0] < 0.0 {
        return Err(Error::InvalidArgument("t grid must be positive and increasing".into()));
    }
    let mut rng = stream.rng();
    let mut states = [s_h.positive().to_vec(), s_g.positive().to_vec()];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &stop in t_grid {
        drive(&mut states, t, stop, &mut rng, noise, |_, _, _| Ok(()))?;
        t = stop;
        out.push(CoupledSnapshot {
            t,
            s_h: SymmetrizedSpectrum::from_positive(states[0].clone())?,
            s_g: SymmetrizedSpectrum::from_positive(states[1].clone())?,
        });
    }
    Ok(out)
}

/// A time-stamped sequence of spectra recorded along a DBM run, each entry
/// holding the spectrum at the step start and the accepted step size.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub steps: Vec<(f64, f64, SymmetrizedSpectrum)>,
}

impl Trajectory {
    pub fn start_time(&self) -> Option<f64> {
        self.steps.first().map(|(t, _, _)| *t)
    }

    pub fn end_time(&self) -> Option<f64> {
        self.steps.last().map(|(t, dt, _)| t + dt)
    }
}

/// Advance one state while recording every accepted step's pre-step
/// spectrum (for kernel and propagator integrations along the flow).
pub fn advance_recording(
    state: &DbmState,
    t_target: f64,
    stream: &RngStreamSpec,
    noise: NoiseMode,
) -> Result<(DbmState, Trajectory)> {
    let mut rng = stream.rng();
    let mut states = [state.spectrum.positive().to_vec()];
    let mut traj = Trajectory::default();
    let dt = drive(&mut states, state.t, t_target, &mut rng, noise, |pre, t, dt| {
        traj.steps.push((t, dt, SymmetrizedSpectrum::from_positive(pre[0].clone())?));
        Ok(())
    })?;
    Ok((
        DbmState {
            spectrum: SymmetrizedSpectrum::from_positive(states[0].clone())?,
            t: t_target,
            dt_used: dt,
        },
        traj,
    ))
}
