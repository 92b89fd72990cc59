//! Phase-space (Wigner) dynamics of a harmonic oscillator with a quadratic
//! non-Hermitian part `Gamma = alpha p^2/2 + beta q^2/2 + gamma/2`.
//!
//! * [`grid`]: uniform grids, trapezoidal quadrature, averages.
//! * [`elliptic`]: closed-form eigenbasis, decay spectrum, projection and
//!   long-lived states for `beta == alpha`.
//! * [`evolution`]: direct RK4 integration of the phase-space evolution law.
//! * [`lineshape`]: time signals, half-line Fourier transforms and
//!   Breit-Wigner distributions.
//! * [`io`]: CSV/PGM export and the `key = value` run configuration.
//!
//! Everything is dimensionless with `hbar = 1`.

pub mod elliptic;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod io;
pub mod lineshape;
pub mod params;
pub mod special;

pub use error::{Error, Result};
pub use grid::{expectation, inner_product, integrate, make_grid, GridSpec, WignerGrid};
pub use params::{Model, ModeIndex, NhParams, Parity};
