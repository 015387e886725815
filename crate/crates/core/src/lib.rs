pub mod audit;
pub mod coeffs;
pub mod config;
pub mod dd;
pub mod error;
pub mod expansion;
pub mod expr;
pub mod jet;
pub mod oracle;
pub mod problem;
pub mod real;
pub mod study;

pub use dd::Dd;
pub use error::{Error, Result};
pub use jet::{Jet, JetError, JetFn};
pub use problem::{PhaseProblem, Scales};
pub use real::Real;
