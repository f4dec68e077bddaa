//! Frozen calibration constants.
//!
//! The normalized-statistic ceilings were calibrated once from Gaussian-H
//! baseline runs (matched N and parameter grids, 1000 trials, master seed
//! 20250801) as 2× the largest observed median, then frozen here and echoed
//! into run manifests. Tightening them degrades margins monotonically.

/// Ceiling on the median of `N² log(1+λ²) |σ₁(H+λG) − √(1+λ²)σ₁(G)| / √(1+λ²)`.
pub const SMOOTHED_STAT_MEDIAN_CAL: f64 = 1.0;

/// Ceiling on the median of `|κ(H+λG) − κ(G)| · log(1+λ²)`.
pub const CONDITION_STAT_MEDIAN_CAL: f64 = 8.0;

/// κ/N sandwich r-grid used by the condition experiments.
pub const KAPPA_R_GRID: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
