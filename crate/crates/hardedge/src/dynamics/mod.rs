//! Stochastic dynamics: the matrix OU flow, the symmetrized singular-value
//! Dyson Brownian motion with collision-refusing adaptive steps, coupled
//! trajectories, the ν-derivative (φ, ψ) fields with their weighted
//! Stieltjes transforms, the deterministic bulk approximant of φ, and the
//! short-range kernel machinery.

mod coupling;
mod dbm;
mod kernel;
mod ou;

pub use coupling::{
    advection_transport_check, hat_phi, initial_phi, run_coupling, weighted_stieltjes,
    CouplingRun, CouplingState, HatPhi, TransportResidual, WeightedStieltjesSample, HAT_PHI_ETA,
};
pub use dbm::{
    advance, advance_recording, advance_with_rng, coupled_dbm, coupled_dbm_from_spectra, dbm_step,
    min_gap, CoupledSnapshot, DbmState, Trajectory, DT_CAP, DT_FLOOR_COEFF, GAP_ACCEPT_FRAC,
};
pub use kernel::{evolve_phi, short_range_propagator, split_kernel, KernelOperator, RangeFilter};
pub use ou::{ou_interpolate, ou_sde_path, perturb, NoiseMode};
