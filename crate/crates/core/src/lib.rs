//! Fourier multipliers, pseudo-differential operators and discrete fractional
//! integral operators on ℤⁿ.
//!
//! Sequences on ℤⁿ are finitely supported ([`LatticeSequence`]); the torus
//! side is sampled on a uniform grid ([`TorusGrid`]). The Fourier transform is
//!
//!   𝓕f(ξ) = Σ_{n′} e^{−2πi n′·ξ} f(n′),
//!
//! inverted by the left-endpoint Riemann sum over the grid, which is exact for
//! sequences whose support does not alias modulo the grid resolution.

pub mod builtin;
pub mod classes;
mod error;
pub mod fractional;
pub mod io;
pub mod lattice;
pub mod matrix;
pub mod norms;
pub mod operators;
pub mod symbol;
pub mod torus;
pub mod verify;
pub mod zeta;

pub use error::{Error, Result};
pub use lattice::{convolve, delta, translate, LatticeSequence, MultiIndex, Window};
pub use matrix::{opnorm_l2, top_singular_values, OperatorMatrix, PowerIteration};
pub use norms::{equivalent_seminorm, lp_norm, weak_norm, RearrangementProfile};
pub use symbol::{MultiplierSymbol, PdoSymbol, ToroidalSymbol};
pub use torus::{dft, inverse_dft, lq_torus_norm, TorusGrid, TorusSamples};
