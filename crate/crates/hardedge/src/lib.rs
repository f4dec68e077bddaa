//! A numerical laboratory for the smallest singular value and condition
//! number of large random matrices at the hard edge.
//!
//! The crate provides, at desk scale:
//!
//! - ensembles of matrices with i.i.d. mean-zero variance-`1/N` entries and
//!   moment-matched comparison laws ([`ensembles`]);
//! - singular-value statistics, the semicircle / Marchenko–Pastur limiting
//!   laws, typical locations, rigidity and local-law diagnostics
//!   ([`spectra`]);
//! - the matrix Ornstein–Uhlenbeck flow, the symmetrized singular-value
//!   Dyson Brownian motion, coupled relaxation, weighted Stieltjes transport
//!   and short-range kernel machinery ([`dynamics`]);
//! - the test-function sandwich for the distribution of `σ₁`, a
//!   Helffer–Sjöstrand trace evaluator and a Lindeberg-swap comparison
//!   experiment with an evaluable error budget ([`comparison`]);
//! - Monte Carlo experiment harnesses with reproducible RNG streams, summary
//!   statistics and application-level calculators ([`experiments`]);
//! - config/manifest/CSV persistence for reproducible runs ([`io`]).
//!
//! The guide in `book/` walks through the concepts chapter by chapter; its
//! code snippets are compiled and run as doc-tests of this crate.

pub mod comparison;
pub mod dynamics;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod io;
pub mod rng;
pub mod spectra;

pub use error::{Error, Result};

// Run the book's code snippets under `cargo test --doc`.
#[doc = include_str!("../../../book/src/introduction.md")]
mod _book_introduction {}
#[doc = include_str!("../../../book/src/ensembles.md")]
mod _book_ensembles {}
#[doc = include_str!("../../../book/src/spectra.md")]
mod _book_spectra {}
#[doc = include_str!("../../../book/src/dynamics.md")]
mod _book_dynamics {}
#[doc = include_str!("../../../book/src/comparison.md")]
mod _book_comparison {}
#[doc = include_str!("../../../book/src/experiments.md")]
mod _book_experiments {}
