//! Simulation and spectral-stability toolkit for the coupled complex
//! Ginzburg–Landau / viscous Burgers system
//!
//! ```text
//! ∂ₜP + Ω·∇P − (1+iu)ΔP = ξP − (1+iv)|P|²P − r₁ P div Ω
//! ∂ₜΩ + Ω·∇Ω − mΔΩ + κ∇(|P|²) = 0
//! ```
//!
//! on one- and two-dimensional periodic domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: periodic grids, FFTs, spectral derivatives, 2/3 dealiasing, Sobolev norms.
//! * [`model`]: coefficient functions and plane-wave equilibria.
//! * [`solver`]: exponential Runge–Kutta integration of the full system.
//! * [`littlewood_paley`]: dyadic blocks, Besov norms, Bony paraproducts and
//!   numerical checks of the heat-semigroup estimates.
//! * [`dispersion`]: linearisation about plane waves, eigenvalue curves, closed forms
//!   and stability classification.
//! * [`perturbation`]: the polar-form perturbation system, nonlinear remainders and
//!   decay / growth experiments.
//! * [`cli`]: configuration and experiment orchestration used by the `cglb` binary.

pub mod cli;
pub mod dispersion;
pub mod linalg;
pub mod littlewood_paley;
pub mod model;
pub mod output;
pub mod perturbation;
pub mod solver;
pub mod spectral;

pub use num_complex::Complex64;

pub use dispersion::{CouplingMode, LinearizationMatrices, SpectrumSample, Verdict};
pub use model::{Affine, Branch, PlaneWave, SystemParams};
pub use solver::{FieldState, SolverConfig};
pub use spectral::{Grid, SpectralField};

/// Crate-level error, wrapping the per-module error types.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Spectral(#[from] spectral::SpectralError),
    #[error(transparent)]
    Solver(#[from] solver::SolverError),
    #[error(transparent)]
    LittlewoodPaley(#[from] littlewood_paley::LpError),
    #[error(transparent)]
    Dispersion(#[from] dispersion::DispersionError),
    #[error(transparent)]
    Perturbation(#[from] perturbation::PerturbationError),
    #[error(transparent)]
    Config(#[from] cli::ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
