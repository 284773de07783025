//! Finite-difference calculus on dual lattices: difference operators,
//! polynomial detection and exact fitting, continuous-branch logarithms,
//! and the elimination-cascade engine for the linear-form and
//! conditional-symmetry functional equations.

mod cascade;
mod fit;
mod lattice;
mod logbranch;
mod poly;

pub use cascade::{
    elimination_cascade, CascadeMode, CascadeSpec, CascadeStep, EliminationTrace, ShiftSchedule,
};
pub use fit::{fit_polynomial, fit_polynomial_checked, FitResult};
pub use lattice::{delta, polynomial_degree, DegreeOutcome, LatticeFunction};
pub use logbranch::branch_log;
pub use poly::PolynomialFn;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyFdError {
    #[error("difference shift empties the window")]
    WindowExhausted,
    #[error("window too small: need radius >= {need} on Z coordinate {coord}, have {have}")]
    WindowTooSmall {
        coord: usize,
        need: u32,
        have: u32,
    },
    #[error("function vanishes (|f| <= {modulus:.3e}) at index {at:?}")]
    VanishingValue { at: Vec<i64>, modulus: f64 },
    #[error("branch inconsistency: log increments around the square at {at:?} (coords {coords:?}) sum to {holonomy:.3e}")]
    BranchInconsistency {
        at: Vec<i64>,
        coords: (usize, usize),
        holonomy: f64,
    },
    #[error("branch step at {at:?} has argument {arg:.3} within 0.2 rad of pi; densify the window")]
    StepTooLarge { at: Vec<i64>, arg: f64 },
    #[error("fit residual {residual:.3e} exceeds tolerance")]
    ResidualTooLarge { residual: f64 },
    #[error("base equation violated at {at:?} with residual {residual:.3e}")]
    BaseEquationViolated { at: Vec<i64>, residual: f64 },
    #[error("cascade step {step} residual {residual:.3e} exceeds tolerance")]
    StepResidual { step: usize, residual: f64 },
    #[error("lattice point off the sample grid: {0}")]
    OffGrid(String),
    #[error(transparent)]
    Group(#[from] crate::group::GroupError),
    #[error(transparent)]
    Dist(#[from] crate::dist::DistError),
}
