//! Analytical perturbative propagators and optical response functions for
//! displaced-oscillator models with non-adiabatic coupling between two
//! excited states.
//!
//! Layers, bottom up:
//! - [`model`]: Hamiltonian parameters and electronic index patterns.
//! - [`combinatorics`]: Taylor multi-indices, exponent maps, displacement prefactors.
//! - [`kernel`]: frequency tables and the interaction-time integrals `f(t)`.
//! - [`propagator`]: single-time and multitime propagators.
//! - [`response`]: linear and third-order response functions.
//! - [`oracle`]: brute-force references (diagonalization, operator products, quadrature).
//! - [`spectra`]: grid scans, Fourier transforms, CSV/JSON export.
//! - [`validation`]: named check suites shared by tests and the CLI.

pub mod combinatorics;
pub mod error;
pub mod kernel;
pub mod model;
pub mod oracle;
pub mod propagator;
pub mod response;
pub mod spectra;
pub mod validation;

pub use num_complex::Complex64 as C64;

pub use combinatorics::{KVector, MVector, ZVector};
pub use error::{Error, Result};
pub use kernel::{FrequencyTable, TermPolynomial};
pub use model::{ElectronicPattern, ModelConfig, ModelKind, ModelSpec};
pub use propagator::{MultitimeSplit, SeriesResult, Truncation};
pub use response::{PathwayKind, PathwayLabel, PathwaySpec};
pub use spectra::{SpectrumTable, TimeGrid};

/// Default Taylor truncation `Σ k_i ≤ 8`.
pub const DEFAULT_KT: usize = 8;
