//! The interaction kernel `c_jk = 1/(2N (s_j − s_k)²)` of the non-local
//! parabolic equation, its short/long-range split at index distance `l`,
//! and the short-range propagator with its finite-speed behaviour.

use crate::dynamics::dbm::Trajectory;
use crate::error::{Error, Result};
use crate::spectra::SymmetrizedSpectrum;

/// Which couplings a kernel keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeFilter {
    All,
    /// `|j − k| ≤ l` in the symmetrized index distance.
    Short(usize),
    /// `|j − k| > l`.
    Long(usize),
}

/// Kernel operator built from one spectrum snapshot. Coefficients are
/// symmetric, non-negative, and absent on the diagonal and at `j = ±k`.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    spectrum: SymmetrizedSpectrum,
    filter: RangeFilter,
}

impl KernelOperator {
    pub fn new(spectrum: SymmetrizedSpectrum) -> Self {
        Self { spectrum, filter: RangeFilter::All }
    }

    pub fn n(&self) -> usize {
        self.spectrum.n()
    }

    pub fn filter(&self) -> RangeFilter {
        self.filter
    }

    fn keeps(&self, dist: u64) -> bool {
        match self.filter {
            RangeFilter::All => true,
            RangeFilter::Short(l) => dist <= l as u64,
            RangeFilter::Long(l) => dist > l as u64,
        }
    }

    /// `c_jk` by symmetrized indices (`j, k ∈ {-N..-1, 1..N}`).
    pub fn coefficient(&self, j: i64, k: i64) -> f64 {
        if j == k || j == -k {
            return 0.0;
        }
        if !self.keeps(j.abs_diff(k)) {
            return 0.0;
        }
        let d = self.spectrum.value(j) - self.spectrum.value(k);
        1.0 / (2.0 * self.n() as f64 * d * d)
    }

    /// `(Kf)_k = Σ_j c_jk (f_j − f_k)` on the `2N`-slot layout.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n2 = 2 * self.n();
        assert_eq!(f.len(), n2);
        let mut out = vec![0.0; n2];
        self.for_each_pair(|p, q, c| {
            let diff = f[q] - f[p];
            out[p] += c * diff;
            out[q] -= c * diff;
        });
        out
    }

    /// Row sums `Σ_j c_jk` (the explicit-Euler stability scale).
    pub fn row_sums(&self) -> Vec<f64> {
        let n2 = 2 * self.n();
        let mut out = vec![0.0; n2];
        self.for_each_pair(|p, q, c| {
            out[p] += c;
            out[q] += c;
        });
        out
    }

    fn for_each_pair(&self, mut visit: impl FnMut(usize, usize, f64)) {
        let n2 = 2 * self.n();
        let vals: Vec<f64> = (0..n2).map(|p| self.spectrum.value(self.spectrum.index_at(p))).collect();
        let idxs: Vec<i64> = (0..n2).map(|p| self.spectrum.index_at(p)).collect();
        let inv2n = 1.0 / (2.0 * self.n() as f64);
        for p in 0..n2 {
            let hi = match self.filter {
                // index distance ≥ slot distance, so the band is contained
                // in slot distance ≤ l
                RangeFilter::Short(l) => (p + l + 1).min(n2),
                _ => n2,
            };
            for q in (p + 1)..hi {
                if idxs[q] == -idxs[p] || !self.keeps(idxs[q].abs_diff(idxs[p])) {
                    continue;
                }
                let d = vals[q] - vals[p];
                visit(p, q, inv2n / (d * d));
            }
        }
    }
}

/// Split into short- and long-range parts at cutoff `l`; the two parts sum
/// back to the whole kernel exactly.
pub fn split_kernel(k: &KernelOperator, l: usize) -> Result<(KernelOperator, KernelOperator)> {
    if l < 1 || l > 2 * k.n() {
        return Err(Error::InvalidArgument(format!(
            "cutoff must satisfy 1 ≤ l ≤ 2N (got {l} at N = {})",
            k.n()
        )));
    }
    if k.filter != RangeFilter::All {
        return Err(Error::InvalidArgument("can only split an unfiltered kernel".into()));
    }
    let short = KernelOperator { spectrum: k.spectrum.clone(), filter: RangeFilter::Short(l) };
    let long = KernelOperator { spectrum: k.spectrum.clone(), filter: RangeFilter::Long(l) };
    Ok((short, long))
}

/// Explicit-Euler evolution of `df/dt = Kf` along a frozen trajectory:
/// one step of size `dt` per recorded snapshot. Errors when `dt` exceeds
/// the stability bound `1/max_k Σ_j c_jk` of the stiffest snapshot.
pub fn evolve_phi(initial: &[f64], trajectory: &[SymmetrizedSpectrum], dt: f64) -> Result<Vec<f64>> {
    let mut f = initial.to_vec();
    for snap in trajectory {
        if f.len() != 2 * snap.n() {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} vs 2N = {}",
                f.len(),
                2 * snap.n()
            )));
        }
        let kernel = KernelOperator::new(snap.clone());
        let max_row = kernel.row_sums().into_iter().fold(0.0, f64::max);
        if dt * max_row > 1.0 {
            return Err(Error::Unstable(format!(
                "dt = {dt:e} exceeds 1/max_row = {:e} for the stiffest gap",
                1.0 / max_row
            )));
        }
        let kf = kernel.apply(&f);
        for (v, d) in f.iter_mut().zip(kf) {
            *v += dt * d;
        }
    }
    Ok(f)
}

/// Un-checked Euler sub-stepping with a frozen kernel: `substeps` steps of
/// size `dt/substeps`. The caller guarantees stability.
pub(crate) fn euler_substeps(kernel: &KernelOperator, f: &mut [f64], dt: f64, substeps: usize) {
    let h = dt / substeps as f64;
    for _ in 0..substeps {
        let kf = kernel.apply(f);
        for (v, d) in f.iter_mut().zip(kf) {
            *v += h * d;
        }
    }
}

/// Integrate the short-range flow `∂_t u = P_short u` from the unit vector
/// `δ_k` across the trajectory window `[u, v]`, sub-stepping each recorded
/// step within its stability bound. The output of the symmetric Markov
/// generator is entrywise ≥ 0 and conserves total mass.
pub fn short_range_propagator(
    trajectory: &Trajectory,
    l: usize,
    u: f64,
    v: f64,
    unit_index: i64,
) -> Result<Vec<f64>> {
    if !(u < v) {
        if u == v {
            // empty window: the propagator is the identity
            if let Some((_, _, snap)) = trajectory.steps.first() {
                let mut out = vec![0.0; 2 * snap.n()];
                out[snap.slot(unit_index)] = 1.0;
                return Ok(out);
            }
        }
        return Err(Error::InvalidArgument(format!("need u < v (got u = {u}, v = {v})")));
    }
    let (Some(t0), Some(t1)) = (trajectory.start_time(), trajectory.end_time()) else {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    };
    if u < t0 - 1e-12 || v > t1 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "window [{u}, {v}] outside the recorded trajectory [{t0}, {t1}]"
        )));
    }
    let n = trajectory.steps[0].2.n();
    let nf = n as f64;
    if (l as f64) < nf * (v - u) {
        return Err(Error::InvalidArgument(format!(
            "finite-speed hypothesis needs l ≥ N(v−u) = {}",
            nf * (v - u)
        )));
    }
    let mut f = vec![0.0; 2 * n];
    f[trajectory.steps[0].2.slot(unit_index)] = 1.0;
    let mut total_substeps = 0usize;
    for (t, dt, snap) in &trajectory.steps {
        let (seg_lo, seg_hi) = (t.max(u), (t + dt).min(v));
        if seg_hi <= seg_lo {
            continue;
        }
        let span = seg_hi - seg_lo;
        let (short, _) = split_kernel(&KernelOperator::new(snap.clone()), l)?;
        let max_row = short.row_sums().into_iter().fold(0.0, f64::max);
        let substeps = (span * max_row / 0.5).ceil().max(1.0) as usize;
        total_substeps += substeps;
        if total_substeps > 20_000_000 {
            return Err(Error::Unstable(
                "stability sub-stepping budget exhausted (trajectory too stiff)".into(),
            ));
        }
        euler_substeps(&short, &mut f, span, substeps);
    }
    Ok(f)
}
