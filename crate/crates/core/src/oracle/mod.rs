//! Independent references for the expansions: direct quadrature, finite
//! differences and a least-squares fit of the amplitude.

mod fd;
mod quadrature;
mod reversion;

pub use fd::fd_derivatives;
pub use quadrature::{gauss_legendre, oscillatory_quadrature, Quadrature, QuadratureSettings};
pub use reversion::{least_squares, numeric_reversion_oracle};
