//! Stokes graphs, short geodesics and spectral asymptotics for polynomial
//! quadratic differentials `P(z) dz^2`.

pub mod config;
pub mod error;
pub mod geodesics;
pub mod ode;
pub mod polynomial;
pub mod quad_diff;
pub mod quadrature;
pub mod spectrum;
pub mod stokes_tracer;
pub mod strips;

pub use error::{Error, Result};
pub use polynomial::{ComplexPolynomial, StokesSectorSet, TurningPoint, TurningPointSet, C64};
