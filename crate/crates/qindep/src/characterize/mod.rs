//! The theorem layer: Gaussianity and Gaussian-times-idempotent
//! certification, Q-independence defect extraction for the vector,
//! linear-forms, conditional-symmetry and sum/difference settings, the
//! quartic counterexample family, the annihilator zero-extension lift,
//! and verdict drivers that check the characterization theorems on
//! concrete desk-scale instances.

mod certificate;
mod counterexample;
mod gamma_i;
mod gauss;
mod lift;
mod qdefect;
mod verdict;

pub use certificate::{Certificate, QDefectReport, QVerdict, Witness};
pub use counterexample::{quartic_counterexample, CounterexampleReport};
pub use gamma_i::{gamma_i_membership, support_subgroup_on_window};
pub use gauss::gaussianity_check;
pub use lift::{annihilator_lift, LiftReport};
pub use qdefect::{
    qdefect_conditional_symmetry, qdefect_linear_forms, qdefect_sumdiff, qdefect_vector,
};
pub use verdict::{
    theorem_verdict, Mode, SearchConfig, SearchSummary, TheoremInstance, VerdictReport,
};

use crate::group::{GroupElement, GroupError};
use thiserror::Error;

#[derive(Debug, Error, Clone)]
pub enum CharacterizeError {
    #[error("characteristic function vanishes at {0:?}")]
    VanishingValue(GroupElement),
    #[error("support is not a subgroup: {y1:?} and {y2:?} lie in it but their sum does not")]
    SupportNotSubgroup { y1: GroupElement, y2: GroupElement },
    #[error("sum/difference sides disagree on vanishing at (u, v) = ({u:?}, {v:?})")]
    CaseMismatch { u: GroupElement, v: GroupElement },
    #[error("Bochner synthesis could not establish positivity (margin {margin:.3e})")]
    BochnerFail { margin: f64 },
    #[error("theorem hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("search space of {needed} candidates exceeds budget {budget}")]
    SearchBudgetExceeded { needed: u128, budget: u64 },
    #[error("support pattern is not a recognized subgroup form: {0}")]
    UnsupportedSupportShape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Dist(#[from] crate::dist::DistError),
    #[error(transparent)]
    PolyFd(#[from] crate::polyfd::PolyFdError),
}

/// Structural-equality tolerance used throughout the theorem layer.
pub const EQ_TOL: f64 = 1e-9;
/// Exactness tolerance for finite-group cyclotomic values.
pub const FINITE_TOL: f64 = 1e-12;
/// Modulus below which a sampled characteristic-function value is treated
/// as a zero (table/atomic forms only; closed forms never vanish).
pub const VANISH_TOL: f64 = 1e-9;

/// Zigzag rank for canonical scanning: 0, 1, -1, 2, -2, ...
pub(crate) fn zigzag_rank(c: i64) -> u64 {
    if c >= 0 {
        2 * c as u64
    } else {
        2 * (-c) as u64 - 1
    }
}

/// Key ordering index vectors so that small nonnegative entries come
/// first: (max zigzag rank, rank vector). Guarantees e.g. that (1, 1) is
/// scanned before (-1, -1).
pub(crate) fn scan_key(idx: &[i64]) -> (u64, Vec<u64>) {
    let ranks: Vec<u64> = idx.iter().map(|&c| zigzag_rank(c)).collect();
    (ranks.iter().copied().max().unwrap_or(0), ranks)
}

/// All (u, v) index pairs of a window, in canonical scan order.
pub(crate) fn canonical_pairs(points: &[Vec<i64>]) -> Vec<(Vec<i64>, Vec<i64>)> {
    let mut pairs: Vec<(Vec<i64>, Vec<i64>)> = Vec::with_capacity(points.len() * points.len());
    for u in points {
        for v in points {
            pairs.push((u.clone(), v.clone()));
        }
    }
    pairs.sort_by_key(|(u, v)| {
        let stacked: Vec<i64> = u.iter().chain(v.iter()).copied().collect();
        scan_key(&stacked)
    });
    pairs
}
