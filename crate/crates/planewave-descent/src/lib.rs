//! Build solutions of constant-coefficient linear PDEs — Laplace in 2/3
//! dimensions (also anisotropic) and the wave equation in 1+1 through 1+3
//! dimensions — as superpositions of rotated lower-dimensional solutions,
//! and verify every representation against independent oracles.
//!
//! The pieces:
//!
//! - [`fields`]: grids, sampled complex fields, analytic families.
//! - [`rotations`]: direction quadrature on the circle/sphere, Monte Carlo
//!   rotation sampling, the rational (twistor) chart of 3D rotations.
//! - [`spectral`]: direct Fourier synthesis under a dispersion constraint —
//!   the oracle representation.
//! - [`planewave`]: superpositions of rotated plane-wave profiles — the
//!   Whittaker form of harmonic fields, its anisotropic variant, wave
//!   superpositions, profile/source transforms, twistor-curve integrals.
//! - [`descent`]: singular-kernel representations — the retarded-potential
//!   sphere average, the 2D disk formula, spherical means, source integrals.
//! - [`radon`]: Radon transform, reduced per-direction operators, the
//!   parity-split plane-wave profile extraction, and backprojection.
//! - [`verify`]: finite-difference residuals, error norms, convergence
//!   slopes, exact harmonic-polynomial oracles.
//! - [`csv`]: the plain-text field/profile/sinogram formats used by the
//!   command-line driver.
//!
//! Everything is pure and immutable after construction; grid and direction
//! loops parallelize over indices, so outputs are bit-identical regardless
//! of thread count.
//!
//! See the `examples/` directory for one runnable walkthrough per
//! capability, and the `planewave-descent-cli` crate for the batch driver.

pub mod csv;
pub mod descent;
pub mod error;
pub mod fields;
pub mod numerics;
pub mod planewave;
pub mod radon;
pub mod rotations;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use fields::{
    field_slice, sample_analytic, AnalyticFamily, Axis, ErrorReport, GridSpec, ScalarField,
};
pub use rotations::{
    angle_to_twistor, circle_quadrature, half_circle_quadrature, monte_carlo_directions,
    sphere_quadrature, twistor_phase, twistor_rotation, Direction, DirectionSet, TwistorPoint,
};
pub use spectral::{
    dispersion_root, synthesize, wave_sine_synthesize, OperatorSpec, SpectralAmplitude, WaveBranch,
};
pub use verify::{
    compare_fields, convergence_slope, fd_residual, harmonic_poly_oracle, ResidualReport, Stencil,
};
