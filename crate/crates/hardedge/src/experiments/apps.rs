//! Application-level calculators: loss of precision of the least-squares
//! solve and the conjugate-gradient iteration count.

use crate::error::{Error, Result};

/// Loss of precision in decimal digits: `log₁₀(M·N^{3/2}) + 2 log₁₀ κ`
/// (the unquantified O(1) additive term is dropped).
pub fn lop_estimate(m: usize, n: usize, kappa: f64) -> Result<f64> {
    if kappa < 1.0 {
        return Err(Error::InvalidArgument(format!("condition number must be ≥ 1, got {kappa}")));
    }
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("need positive dimensions".into()));
    }
    Ok((m as f64 * (n as f64).powf(1.5)).log10() + 2.0 * kappa.log10())
}

/// Worst-case conjugate-gradient iterations to a δ-approximation:
/// `T_δ = ½ κ δ`, exactly as stated by the source it comes from.
///
/// Note the formula grows with δ, unlike the classical CG bound that grows
/// as the accuracy tightens; it is implemented verbatim and not
/// reinterpreted.
pub fn cg_iterations(kappa: f64, delta: f64) -> Result<f64> {
    if kappa < 1.0 {
        return Err(Error::InvalidArgument(format!("condition number must be ≥ 1, got {kappa}")));
    }
    if delta < 0.0 {
        return Err(Error::InvalidArgument(format!("accuracy must be ≥ 0, got {delta}")));
    }
    Ok(0.5 * kappa * delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lop_reference_values() {
        assert_eq!(lop_estimate(1, 1, 1.0).unwrap(), 0.0);
        // log₁₀(100·100^{3/2}) + 2·log₁₀(100) = 5 + 4 = 9
        assert!((lop_estimate(100, 100, 100.0).unwrap() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn lop_monotone_in_kappa() {
        let a = lop_estimate(50, 40, 2.0).unwrap();
        let b = lop_estimate(50, 40, 20.0).unwrap();
        assert!(b > a);
        assert!(lop_estimate(50, 40, 0.5).is_err());
    }

    #[test]
    fn cg_reference_values() {
        assert_eq!(cg_iterations(2.0, 1.0).unwrap(), 1.0);
        assert_eq!(cg_iterations(5.0, 0.0).unwrap(), 0.0);
        // linear in both arguments
        let base = cg_iterations(3.0, 0.4).unwrap();
        assert!((cg_iterations(6.0, 0.4).unwrap() - 2.0 * base).abs() < 1e-15);
        assert!((cg_iterations(3.0, 0.8).unwrap() - 2.0 * base).abs() < 1e-15);
    }
}
