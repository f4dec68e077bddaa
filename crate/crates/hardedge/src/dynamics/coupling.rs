//! The coupled interpolation flow between two spectra: the DBM trajectory
//! started from `s^{(ν)}(0) = (1−ν)σ(H) + νσ(G)` together with the
//! ν-derivative field `φ_k = e^{t/2} ds_k/dν` and its absolute-value
//! companion ψ (same equation, initial data `|φ(0)|`), the weighted
//! Stieltjes transforms they generate, the advection-transport residual,
//! and the deterministic approximant of φ built from typical locations.

use num_complex::Complex64;

use crate::dynamics::dbm::{drive, min_gap};
use crate::dynamics::kernel::{euler_substeps, KernelOperator};
use crate::dynamics::NoiseMode;
use crate::error::{Error, Result};
use crate::rng::RngStreamSpec;
use crate::spectra::{characteristic, m_sc, SingularSpectrum, SymmetrizedSpectrum, TypicalLocations};

/// Spectrum, derivative field and companion at one `(ν, t)`.
#[derive(Debug, Clone)]
pub struct CouplingState {
    pub nu: f64,
    pub t: f64,
    pub s: SymmetrizedSpectrum,
    /// `e^{t/2} ds/dν` on the 2N-slot layout.
    pub phi: Vec<f64>,
    /// Solution with initial data `|φ(0)|`; dominates `|φ|` pointwise.
    pub psi: Vec<f64>,
}

/// A completed coupling run: the state at `t = 0` and at the end time,
/// plus the finite-difference realization of φ when requested.
#[derive(Debug, Clone)]
pub struct CouplingRun {
    pub initial: CouplingState,
    pub state: CouplingState,
    /// `e^{t/2} (s^{(ν+Δν/2)} − s^{(ν-Δν/2)})/Δν`, slot layout.
    pub phi_fd: Option<Vec<f64>>,
}

fn slot_values(s: &SymmetrizedSpectrum) -> Vec<f64> {
    s.iter().map(|(_, v)| v).collect()
}

/// `σ(G) − σ(H)` on the slot layout (the initial ν-derivative).
pub fn initial_phi(sigma_h: &SymmetrizedSpectrum, sigma_g: &SymmetrizedSpectrum) -> Vec<f64> {
    sigma_h
        .iter()
        .zip(sigma_g.iter())
        .map(|((_, h), (_, g))| g - h)
        .collect()
}

fn interpolated_positive(
    sigma_h: &SymmetrizedSpectrum,
    sigma_g: &SymmetrizedSpectrum,
    nu: f64,
) -> Vec<f64> {
    sigma_h
        .positive()
        .iter()
        .zip(sigma_g.positive())
        .map(|(h, g)| (1.0 - nu) * h + nu * g)
        .collect()
}

/// Evolve the coupling to `t_end`. φ and ψ ride the adaptive DBM steps by
/// explicit Euler with the kernel frozen per step, sub-stepped within its
/// stability bound. With `fd_delta_nu = Some(Δν)`, two side trajectories at
/// `ν ± Δν/2` share the driving noise and yield the finite-difference φ.
pub fn run_coupling(
    sigma_h: &SymmetrizedSpectrum,
    sigma_g: &SymmetrizedSpectrum,
    nu: f64,
    t_end: f64,
    stream: &RngStreamSpec,
    noise: NoiseMode,
    fd_delta_nu: Option<f64>,
) -> Result<CouplingRun> {
    if sigma_h.n() != sigma_g.n() {
        return Err(Error::DimensionMismatch("coupled spectra must share N".into()));
    }
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::InvalidArgument(format!("need ν ∈ [0, 1], got {nu}")));
    }
    if t_end <= 0.0 {
        return Err(Error::InvalidArgument(format!("need t_end > 0, got {t_end}")));
    }
    let phi0 = initial_phi(sigma_h, sigma_g);
    let psi0: Vec<f64> = phi0.iter().map(|v| v.abs()).collect();
    let center = interpolated_positive(sigma_h, sigma_g, nu);
    if center[0] <= 0.0 || min_gap(&center) <= 0.0 {
        return Err(Error::InvalidArgument(
            "interpolated initial data must be strictly ordered and positive".into(),
        ));
    }

    let mut states: Vec<Vec<f64>> = vec![center.clone()];
    if let Some(dnu) = fd_delta_nu {
        if !(dnu > 0.0) {
            return Err(Error::InvalidArgument("Δν must be positive".into()));
        }
        for sign in [0.5, -0.5] {
            let side: Vec<f64> = sigma_h
                .positive()
                .iter()
                .zip(sigma_g.positive())
                .map(|(h, g)| {
                    let v = nu + sign * dnu;
                    (1.0 - v) * h + v * g
                })
                .collect();
            if side[0] <= 0.0 || min_gap(&side) <= 0.0 {
                return Err(Error::InvalidArgument(
                    "Δν too large: side initial data loses strict ordering".into(),
                ));
            }
            states.push(side);
        }
    }

    let initial = CouplingState {
        nu,
        t: 0.0,
        s: SymmetrizedSpectrum::from_positive(center)?,
        phi: phi0.clone(),
        psi: psi0.clone(),
    };

    let mut phi = phi0;
    let mut psi = psi0;
    let mut rng = stream.rng();
    drive(&mut states, 0.0, t_end, &mut rng, noise, |pre, _t, dt| {
        let snap = SymmetrizedSpectrum::from_positive(pre[0].clone())?;
        let kernel = KernelOperator::new(snap);
        let max_row = kernel.row_sums().into_iter().fold(0.0, f64::max);
        let substeps = (dt * max_row / 0.5).ceil().max(1.0) as usize;
        euler_substeps(&kernel, &mut phi, dt, substeps);
        euler_substeps(&kernel, &mut psi, dt, substeps);
        Ok(())
    })?;

    let phi_fd = fd_delta_nu.map(|dnu| {
        let scale = (t_end / 2.0).exp() / dnu;
        let plus = SymmetrizedSpectrum::from_positive(states[1].clone()).expect("ordered");
        let minus = SymmetrizedSpectrum::from_positive(states[2].clone()).expect("ordered");
        slot_values(&plus)
            .iter()
            .zip(slot_values(&minus))
            .map(|(p, m)| scale * (p - m))
            .collect()
    });

    Ok(CouplingRun {
        initial,
        state: CouplingState {
            nu,
            t: t_end,
            s: SymmetrizedSpectrum::from_positive(states[0].clone())?,
            phi,
            psi,
        },
        phi_fd,
    })
}

/// Weighted Stieltjes transforms of a coupling state at `z`.
#[derive(Debug, Clone, Copy)]
pub struct WeightedStieltjesSample {
    pub z: Complex64,
    /// `𝔖_t(z) = e^{-t/2} Σ_k φ_k/(s_k − z)`.
    pub value_phi: Complex64,
    /// Same sum with ψ in place of φ.
    pub value_psi: Complex64,
    pub t: f64,
}

pub fn weighted_stieltjes(state: &CouplingState, z: Complex64) -> Result<WeightedStieltjesSample> {
    if z.im == 0.0 {
        return Err(Error::RealAxis(format!("weighted transform needs η ≠ 0 (got {z})")));
    }
    let damp = (-state.t / 2.0).exp();
    let mut acc_phi = Complex64::new(0.0, 0.0);
    let mut acc_psi = Complex64::new(0.0, 0.0);
    for (p, (_, s)) in state.s.iter().enumerate() {
        let pole = 1.0 / (Complex64::new(s, 0.0) - z);
        acc_phi += state.phi[p] * pole;
        acc_psi += state.psi[p] * pole;
    }
    Ok(WeightedStieltjesSample {
        z,
        value_phi: damp * acc_phi,
        value_psi: damp * acc_psi,
        t: state.t,
    })
}

/// Transport residual of one coupling run at `z`:
/// `|𝔖̃_t(z) − 𝔖̃_0(z_t)|` (and the φ counterpart), the quantitative form
/// of "the weighted transform rides the characteristics".
#[derive(Debug, Clone, Copy)]
pub struct TransportResidual {
    pub z: Complex64,
    pub z_t: Complex64,
    pub residual_psi: f64,
    pub residual_phi: f64,
    /// `|𝔖̃_0(z_t)|`, the natural comparison scale.
    pub reference_psi: f64,
}

pub fn advection_transport_check(run: &CouplingRun, z: Complex64) -> Result<TransportResidual> {
    let t = run.state.t;
    let z_t = characteristic(z, t);
    let now = weighted_stieltjes(&run.state, z)?;
    let then = weighted_stieltjes(&run.initial, z_t)?;
    Ok(TransportResidual {
        z,
        z_t,
        residual_psi: (now.value_psi - then.value_psi).norm(),
        residual_phi: (now.value_phi - then.value_phi).norm(),
        reference_psi: then.value_psi.norm(),
    })
}

/// Deterministic approximant of φ in the bulk, built from typical
/// locations: for `|k| ≤ (1−c)N`,
/// `φ̂_k(t) = (2N·Im m(γ_k^t))⁻¹ Σ_j Im(1/(γ_j − γ_k^t)) (σ_j(H) − σ_j(G))`
/// with `γ^t` the characteristic of `γ + i0⁺`; antisymmetric exactly.
#[derive(Debug, Clone)]
pub struct HatPhi {
    pub t: f64,
    pub bulk_c: f64,
    n: usize,
    /// `(k, φ̂_k)` for `1 ≤ k ≤ (1−c)N`; negative indices by mirroring.
    positive: Vec<(i64, f64)>,
}

impl HatPhi {
    pub fn value(&self, k: i64) -> Option<f64> {
        if k == 0 || k.unsigned_abs() as usize > self.n {
            return None;
        }
        let pos = self
            .positive
            .iter()
            .find(|(idx, _)| *idx == k.abs())
            .map(|(_, v)| *v)?;
        Some(if k > 0 { pos } else { -pos })
    }

    pub fn bulk_indices(&self) -> impl Iterator<Item = i64> + '_ {
        let pos = self.positive.iter().map(|(k, _)| *k);
        let neg = self.positive.iter().map(|(k, _)| -*k);
        neg.chain(pos)
    }
}

/// The regularization added to γ before applying the characteristic map,
/// realizing the `γ^t = (γ + i0⁺)_t` boundary convention.
pub const HAT_PHI_ETA: f64 = 1e-9;

pub fn hat_phi(
    sigma_h: &SingularSpectrum,
    sigma_g: &SingularSpectrum,
    gammas: &TypicalLocations,
    t: f64,
    bulk_c: f64,
) -> Result<HatPhi> {
    let n = gammas.n();
    if sigma_h.len() != n || sigma_g.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "spectra ({}, {}) vs typical locations N = {n}",
            sigma_h.len(),
            sigma_g.len()
        )));
    }
    if !(1e-3..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("need t ∈ [1e-3, 1], got {t}")));
    }
    if !(bulk_c > 0.0 && bulk_c <= 0.5) {
        return Err(Error::InvalidArgument(format!("need bulk_c ∈ (0, 1/2], got {bulk_c}")));
    }
    let diffs: Vec<f64> = sigma_h
        .values()
        .iter()
        .zip(sigma_g.values())
        .map(|(h, g)| h - g)
        .collect();
    let k_max = ((1.0 - bulk_c) * n as f64).floor() as usize;
    let mut positive = Vec::with_capacity(k_max);
    for k in 1..=k_max.max(1) {
        let gk_t = characteristic(Complex64::new(gammas.gamma(k as i64), HAT_PHI_ETA), t);
        let imm = m_sc(gk_t)?.im;
        if imm < 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "Im m(γ_{k}^t) = {imm:e} below 1e-6: outside the approximant's validity"
            )));
        }
        let mut acc = 0.0;
        for j in 1..=n {
            let d = diffs[j - 1];
            let gj = gammas.gamma(j as i64);
            // j and −j terms: Im(1/(±γ_j − γ_k^t)) with σ_{-j} diff = −d
            let pos = (Complex64::new(gj, 0.0) - gk_t).inv().im * d;
            let neg = (Complex64::new(-gj, 0.0) - gk_t).inv().im * (-d);
            acc += pos + neg;
        }
        positive.push((k as i64, acc / (2.0 * n as f64 * imm)));
    }
    Ok(HatPhi { t, bulk_c, n, positive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::gamma_quantiles;

    fn spectra_pair(n: usize) -> (SymmetrizedSpectrum, SymmetrizedSpectrum) {
        let g = gamma_quantiles(n);
        let a = SymmetrizedSpectrum::from_positive(g.positive().to_vec()).unwrap();
        let shifted: Vec<f64> = g
            .positive()
            .iter()
            .enumerate()
            .map(|(i, v)| v + 0.002 * ((i as f64 * 0.9).sin() + 1.5) / (i as f64 + 2.0))
            .collect();
        let b = SymmetrizedSpectrum::from_positive(shifted).unwrap();
        (a, b)
    }

    #[test]
    fn maximum_principle_holds_along_run() {
        let (a, b) = spectra_pair(24);
        let run = run_coupling(&a, &b, 0.5, 0.05, &RngStreamSpec::new(41, 0), NoiseMode::On, None)
            .unwrap();
        let max_psi0 = run.initial.psi.iter().fold(0.0_f64, |m, v| m.max(*v));
        let max_psi1 = run.state.psi.iter().fold(0.0_f64, |m, v| m.max(*v));
        assert!(max_psi1 <= max_psi0 + 1e-12, "max|ψ| grew: {max_psi0} → {max_psi1}");
        for (p, (phi, psi)) in run.state.phi.iter().zip(&run.state.psi).enumerate() {
            assert!(psi >= &0.0, "ψ negative at slot {p}");
            assert!(phi.abs() <= psi + 1e-12, "|φ| > ψ at slot {p}");
        }
        // ψ stays symmetric, φ antisymmetric
        let n2 = run.state.phi.len();
        for p in 0..n2 / 2 {
            assert!((run.state.psi[p] - run.state.psi[n2 - 1 - p]).abs() < 1e-12);
            assert!((run.state.phi[p] + run.state.phi[n2 - 1 - p]).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_sum_is_conserved() {
        let (a, b) = spectra_pair(16);
        let run = run_coupling(&a, &b, 0.3, 0.04, &RngStreamSpec::new(42, 0), NoiseMode::On, None)
            .unwrap();
        let s0: f64 = run.initial.phi.iter().sum();
        let s1: f64 = run.state.phi.iter().sum();
        assert!((s1 - s0).abs() < 1e-8, "{s0} vs {s1}");
    }

    #[test]
    fn finite_difference_phi_tracks_the_field() {
        // two independent routes to ds/dν agree to leading order
        let (a, b) = spectra_pair(16);
        let run = run_coupling(
            &a,
            &b,
            0.5,
            0.05,
            &RngStreamSpec::new(43, 0),
            NoiseMode::On,
            Some(1e-3),
        )
        .unwrap();
        let fd = run.phi_fd.as_ref().unwrap();
        let scale = run.initial.psi.iter().fold(0.0_f64, |m, v| m.max(*v));
        for (p, (fdv, phv)) in fd.iter().zip(&run.state.phi).enumerate() {
            assert!(
                (fdv - phv).abs() <= 0.15 * scale + 1e-9,
                "slot {p}: fd {fdv} vs φ {phv} (scale {scale})"
            );
        }
    }

    #[test]
    fn weighted_transform_two_term_hand_value() {
        // a single ψ₁ = 1 with its mirrored index
        let s = SymmetrizedSpectrum::from_positive(vec![0.4, 1.0]).unwrap();
        let mut psi = vec![0.0; 4];
        let mut phi = vec![0.0; 4];
        psi[s.slot(1)] = 1.0;
        psi[s.slot(-1)] = 1.0;
        phi[s.slot(1)] = 1.0;
        phi[s.slot(-1)] = -1.0;
        let t = 0.3;
        let state = CouplingState { nu: 0.0, t, s, phi, psi };
        let z = Complex64::new(0.1, 0.7);
        let w = weighted_stieltjes(&state, z).unwrap();
        let damp = (-t / 2.0_f64).exp();
        let a = 1.0 / (Complex64::new(0.4, 0.0) - z);
        let b = 1.0 / (Complex64::new(-0.4, 0.0) - z);
        assert!((w.value_psi - damp * (a + b)).norm() < 1e-14);
        assert!((w.value_phi - damp * (a - b)).norm() < 1e-14);
        assert!(w.value_psi.im > 0.0, "Im 𝔖̃ ≥ 0 for ψ ≥ 0, Im z > 0");
    }

    #[test]
    fn all_zero_weights_vanish() {
        let s = SymmetrizedSpectrum::from_positive(vec![0.5]).unwrap();
        let state = CouplingState { nu: 0.0, t: 0.1, s, phi: vec![0.0; 2], psi: vec![0.0; 2] };
        let w = weighted_stieltjes(&state, Complex64::new(0.0, 1.0)).unwrap();
        assert_eq!(w.value_phi, Complex64::new(0.0, 0.0));
        assert_eq!(w.value_psi, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn transport_residual_zero_at_time_zero() {
        let (a, b) = spectra_pair(12);
        let phi0 = initial_phi(&a, &b);
        let psi0: Vec<f64> = phi0.iter().map(|v| v.abs()).collect();
        let s0 = SymmetrizedSpectrum::from_positive(
            a.positive()
                .iter()
                .zip(b.positive())
                .map(|(x, y)| 0.5 * (x + y))
                .collect(),
        )
        .unwrap();
        let state = CouplingState { nu: 0.5, t: 0.0, s: s0, phi: phi0, psi: psi0 };
        let run = CouplingRun { initial: state.clone(), state, phi_fd: None };
        let r = advection_transport_check(&run, Complex64::new(0.3, 0.2)).unwrap();
        assert!(r.residual_psi < 1e-14 && r.residual_phi < 1e-14);
    }

    #[test]
    fn hat_phi_vanishes_for_equal_spectra() {
        let n = 32;
        let g = gamma_quantiles(n);
        let sv = SingularSpectrum::new(g.positive().to_vec(), (n, n)).unwrap();
        let hp = hat_phi(&sv, &sv, &g, 0.3, 0.1).unwrap();
        for k in hp.bulk_indices() {
            assert_eq!(hp.value(k), Some(0.0));
        }
    }

    #[test]
    fn hat_phi_is_exactly_antisymmetric() {
        let n = 32;
        let g = gamma_quantiles(n);
        let a = SingularSpectrum::new(g.positive().to_vec(), (n, n)).unwrap();
        let shifted: Vec<f64> =
            g.positive().iter().enumerate().map(|(i, v)| v + 1e-3 / (1.0 + i as f64)).collect();
        let b = SingularSpectrum::new(shifted, (n, n)).unwrap();
        let hp = hat_phi(&a, &b, &g, 0.2, 0.2).unwrap();
        for k in 1..=((0.8 * n as f64) as i64) {
            let (p, m) = (hp.value(k), hp.value(-k));
            if let (Some(p), Some(m)) = (p, m) {
                assert_eq!(p.to_bits(), (-m).to_bits(), "k = {k}");
            }
        }
    }

    #[test]
    fn hat_phi_rejects_out_of_range_time() {
        let n = 8;
        let g = gamma_quantiles(n);
        let sv = SingularSpectrum::new(g.positive().to_vec(), (n, n)).unwrap();
        assert!(hat_phi(&sv, &sv, &g, 1e-4, 0.2).is_err());
        assert!(hat_phi(&sv, &sv, &g, 0.5, 0.7).is_err());
    }
}
