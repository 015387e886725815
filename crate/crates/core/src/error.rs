use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::jet::JetError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("f' does not change sign on the interval (no stationary point)")]
    NoSignChange,
    #[error("f' changes sign {count} times on the sampling grid; exactly one stationary point is required")]
    MultipleSignChanges { count: usize },
    #[error("stationary point {gamma} lies at an endpoint of the interval")]
    StationaryAtEndpoint { gamma: f64 },
    #[error("stationary point {gamma} is within 1e-6 of the interval length from an endpoint")]
    StationaryTooCloseToEndpoint { gamma: f64 },
    #[error("degenerate stationary point: f''(gamma) = {f2} is numerically zero")]
    DegenerateStationaryPoint { f2: f64 },
    #[error("f' vanishes at x = {x}; boundary terms are undefined there")]
    VanishingDerivative { x: f64 },
    #[error("f' changes sign on the interval; use the stationary expansion")]
    SignChange,
    #[error("f'' changes sign on the interval")]
    CurvatureSignChange,
    #[error("solving f(x) - f(gamma) = lambda2 y^2 failed at y = {y}: {reason}")]
    SubstitutionFailed { y: f64, reason: String },
    #[error("least-squares fit is ill-conditioned (condition number {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("quadrature did not converge: {reason} (last change {delta:.3e} with {panels} panels)")]
    NotConverged { reason: String, delta: f64, panels: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
