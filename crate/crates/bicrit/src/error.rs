use thiserror::Error;

use crate::angle::Angle;
use crate::pullback::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid angle: {0}")]
    InvalidAngle(String),
    #[error("degenerate partition: characteristic angles coincide")]
    DegeneratePartition,
    #[error("invalid characteristic pair ({0}, {1}) in degree {2}: {3}")]
    InvalidPair(Angle, Angle, u64, String),
    #[error("angle {0} is not periodic under multiplication by {1}")]
    NotPeriodic(Angle, u64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no cluster: no ray class meets both critical cycles")]
    NoCluster,
    #[error("malformed configuration: {0}")]
    MalformedConfiguration(String),
    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("derivative vanished at iteration {0}")]
    DerivativeVanished(usize),
    #[error("converged to a center of period {found}, expected {expected}")]
    PeriodMismatch { expected: usize, found: usize },
    #[error("no center found for pair ({0}, {1}): {2}")]
    CenterNotFound(Angle, Angle, String),
    #[error("singular coefficient system (condition ratio {0:e})")]
    SingularSystem(f64),
    #[error("branch ambiguity pulling back {0}")]
    BranchAmbiguity(Label),
    #[error("degenerate image for {0}: A - wB vanishes")]
    DegenerateImage(Label),
    #[error("obstructed: {0}")]
    Obstructed(String),
    #[error("root finding failed (relative residual {0:e})")]
    RootFindingFailure(f64),
    #[error("render job exceeds budget: {work} > {budget}")]
    UnboundedJob { work: u128, budget: u128 },
}
