//! Helffer–Sjöstrand evaluation of `Tr f(H)` as a two-dimensional integral
//! of `g(z) · Tr(H̃ − z)⁻¹` against the resolvent of the symmetrization,
//! with `g(z) = (1/2π)[iy f″(x) χ(y) + i(f(x) + iy f′(x)) χ′(y)]`
//! (the prefactor that makes the 1×1 oracle below exact; it corresponds to
//! the `∂̄ = ∂x + i∂y` convention).

use num_complex::Complex64;

use crate::comparison::testfn::{smoothstep, smoothstep_deriv, TestFunctionSpec};
use crate::ensembles::MatrixSample;
use crate::error::{Error, Result};
use crate::spectra::singular_values;

/// Smooth symmetric cutoff: `χ(y) = 1` for `|y| < N⁻ᵃ`, `0` for `|y| > 2N⁻ᵃ`,
/// quintic transition in between (`‖χ′‖∞ = 1.875·Nᵃ`).
#[derive(Debug, Clone, Copy)]
pub struct ChiCutoff {
    /// Inner plateau edge `N⁻ᵃ`.
    pub scale: f64,
}

impl ChiCutoff {
    pub fn new(n: usize, a: f64) -> Self {
        Self { scale: (n as f64).powf(-a) }
    }

    pub fn eval(&self, y: f64) -> f64 {
        let t = y.abs() / self.scale;
        if t <= 1.0 {
            1.0
        } else if t >= 2.0 {
            0.0
        } else {
            smoothstep(2.0 - t)
        }
    }

    pub fn deriv(&self, y: f64) -> f64 {
        let t = y.abs() / self.scale;
        if !(1.0..=2.0).contains(&t) {
            0.0
        } else {
            -y.signum() * smoothstep_deriv(2.0 - t) / self.scale
        }
    }
}

/// Quadrature resolution for the two-dimensional integral.
#[derive(Debug, Clone, Copy)]
pub struct HsGrid {
    /// x-cells across one mollifier width ρ.
    pub x_cells_per_rho: usize,
    /// log-spaced y-cells per decade below the χ plateau edge.
    pub y_cells_per_decade: usize,
    /// uniform y-cells across the χ′ band `[N⁻ᵃ, 2N⁻ᵃ]`.
    pub y_cells_band: usize,
    /// lower truncation of |y| (the region below is a documented quadrature
    /// error source).
    pub y_min: f64,
}

impl Default for HsGrid {
    fn default() -> Self {
        Self { x_cells_per_rho: 24, y_cells_per_decade: 48, y_cells_band: 96, y_min: 1e-8 }
    }
}

impl HsGrid {
    /// Halve every cell size (for convergence studies).
    pub fn refined(&self) -> Self {
        Self {
            x_cells_per_rho: self.x_cells_per_rho * 2,
            y_cells_per_decade: self.y_cells_per_decade * 2,
            y_cells_band: self.y_cells_band * 2,
            y_min: self.y_min,
        }
    }
}

/// `Tr f(H)` via the Helffer–Sjöstrand formula, quadrature over the upper
/// half-plane doubled by conjugation symmetry.
pub fn hs_trace(spec: &TestFunctionSpec, h: &MatrixSample, grid: &HsGrid) -> Result<f64> {
    let chi = ChiCutoff::new(spec.n, spec.a);
    if 2.0 * chi.scale <= grid.y_min {
        return Err(Error::InvalidArgument(
            "χ support lies below the y-truncation; decrease y_min".into(),
        ));
    }
    // precondition: y-resolution in the band must be finer than ρ/10
    let band_step = chi.scale / grid.y_cells_band as f64;
    if band_step > spec.rho / 10.0 {
        return Err(Error::InvalidArgument(format!(
            "η-grid step {band_step:.3e} coarser than ρ/10 = {:.3e}; use ≥ {} band cells",
            spec.rho / 10.0,
            (10.0 * chi.scale / spec.rho).ceil() as usize
        )));
    }

    // eigenvalues of the symmetrization: ±σ plus |M−N| zeros
    let sv = singular_values(h)?;
    let mut eigs: Vec<f64> = Vec::with_capacity(h.rows + h.cols);
    for &s in sv.values() {
        eigs.push(s);
        eigs.push(-s);
    }
    eigs.resize(h.rows + h.cols, 0.0);
    let trace_resolvent = |z: Complex64| -> Complex64 {
        eigs.iter().map(|&l| 1.0 / (Complex64::new(l, 0.0) - z)).sum()
    };

    // y-grid: log-spaced cells on [y_min, N⁻ᵃ], uniform on [N⁻ᵃ, 2N⁻ᵃ]
    let mut y_edges: Vec<f64> = Vec::new();
    let decades = (chi.scale / grid.y_min).log10();
    let n_log = (decades * grid.y_cells_per_decade as f64).ceil() as usize;
    for i in 0..=n_log {
        y_edges.push(grid.y_min * (chi.scale / grid.y_min).powf(i as f64 / n_log as f64));
    }
    for i in 1..=grid.y_cells_band {
        y_edges.push(chi.scale * (1.0 + i as f64 / grid.y_cells_band as f64));
    }

    // x-grid: uniform midpoint cells over the support [-outer, outer]
    let outer = spec.outer();
    let nx = ((2.0 * outer / spec.rho) * grid.x_cells_per_rho as f64).ceil() as usize;
    let dx = 2.0 * outer / nx as f64;

    let inv_two_pi = 0.5 * std::f64::consts::FRAC_1_PI;
    let mut total = 0.0;
    for iy in 0..y_edges.len() - 1 {
        let y0 = y_edges[iy];
        let y1 = y_edges[iy + 1];
        let y = 0.5 * (y0 + y1);
        let dy = y1 - y0;
        let chi_y = chi.eval(y);
        let dchi_y = chi.deriv(y);
        if chi_y == 0.0 && dchi_y == 0.0 {
            continue;
        }
        for ix in 0..nx {
            let x = -outer + (ix as f64 + 0.5) * dx;
            let f2 = spec.deriv2(x);
            let needs_f_terms = dchi_y != 0.0;
            if f2 == 0.0 && !needs_f_terms {
                continue;
            }
            let mut g = Complex64::new(0.0, y * f2 * chi_y);
            if needs_f_terms {
                g += Complex64::new(0.0, 1.0)
                    * (Complex64::new(spec.eval(x), y * spec.deriv(x)))
                    * dchi_y;
            }
            let tr = trace_resolvent(Complex64::new(x, y));
            // conjugate half-plane contributes the complex conjugate
            total += 2.0 * (inv_two_pi * g * tr).re * dx * dy;
        }
    }
    Ok(total)
}
