use hardedge::dynamics::{coupled_dbm_from_spectra, NoiseMode};
use hardedge::ensembles::{sample_matrix, EntryLaw};
use hardedge::experiments::median;
use hardedge::rng::RngStreamSpec;
use hardedge::spectra::{singular_values, SymmetrizedSpectrum};
use rayon::prelude::*;
use std::time::Instant;

fn main() {
    let grid = [0.22314355131420976, 0.6931471805599453, 1.6094379124341003];
    for &n in &[64usize, 128, 256] {
        let trials: u64 = if n == 256 { 24 } else { 48 };
        let t0 = Instant::now();
        let cells: Vec<Vec<f64>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let h = sample_matrix(&EntryLaw::rademacher(), n, n, &RngStreamSpec::for_trial(900 + n as u64, trial, 0)).unwrap();
                let g = sample_matrix(&EntryLaw::gaussian_real(), n, n, &RngStreamSpec::for_trial(900 + n as u64, trial, 1)).unwrap();
                let sh = SymmetrizedSpectrum::from_singular(&singular_values(&h).unwrap());
                let sg = SymmetrizedSpectrum::from_singular(&singular_values(&g).unwrap());
                let snaps = coupled_dbm_from_spectra(&sh, &sg, &grid, &RngStreamSpec::for_trial(900 + n as u64, trial, 2), NoiseMode::On).unwrap();
                snaps.iter().map(|s| s.sigma1_gap()).collect()
            })
            .collect();
        print!("N={n} ({trials} trials, {:?}):", t0.elapsed());
        for (ti, &t) in grid.iter().enumerate() {
            let stats: Vec<f64> = cells.iter().map(|c| (n * n) as f64 * t * c[ti]).collect();
            print!("  t={t:.3}: med={:.4}", median(&stats));
        }
        println!();
    }
}
