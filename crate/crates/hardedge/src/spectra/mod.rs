//! Singular-value statistics, limiting-law objects, rigidity and local-law
//! diagnostics, characteristics of the advection equation, and the square
//! augmentation of nearly-square matrices.

mod laws;
mod local;
mod spectrum;

pub use laws::{gamma_quantiles, m_sc, rho_mp, rho_sc, semicircle_cdf, sqrt_z2_minus_4, TypicalLocations};
pub use local::{
    characteristic, characteristic_geometry, dist_to_bulk, dist_to_complement, empirical_stieltjes,
    rigidity_allowance, rigidity_check, xi_edge, GeometryDiagnostics, GeometryRegime,
    RigidityReport, RigidityViolation, SpectralPoint,
};
pub use spectrum::{
    augment_matrix, condition_number, girko_symmetrize, singular_values, Kappa, SingularSpectrum,
    SymmetrizedSpectrum,
};
