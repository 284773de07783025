//! Exact computation on locally compact Abelian groups of the form
//! `Z^a x T^b x F` (`F` finite Abelian): character duality, distributions
//! and their characteristic functions, finite-difference calculus on dual
//! lattices, and Q-independence / Gaussianity certification.
//!
//! The crate is organized in four layers:
//!
//! - [`group`]: group descriptors, elements with exact rational torus
//!   coordinates, subgroups, annihilators, and block-form homomorphisms
//!   with adjoints.
//! - [`dist`]: atomic and spectral distributions, characteristic
//!   functions, convolution, and a certified Bochner positivity check
//!   with explicit tail bounds.
//! - [`polyfd`]: finite-difference operators, polynomial detection and
//!   exact fitting on windows, continuous-branch logarithms, and the
//!   elimination-cascade engine for functional equations.
//! - [`characterize`]: Q-independence defect extraction for the
//!   linear-form, conditional-symmetry and sum/difference settings,
//!   Gaussianity certificates, the quartic counterexample family, the
//!   annihilator zero-extension lift, and theorem verdict drivers.
//!
//! All structural data (angles, weights, homomorphism blocks) is kept as
//! exact rationals; floating point enters only when a rational angle is
//! turned into a complex number on the unit circle.

pub mod characterize;
pub mod dist;
pub mod group;
pub mod json;
pub mod polyfd;
pub mod rat;

pub use group::{GroupDescriptor, GroupElement, Homomorphism, Subgroup};
pub use rat::Rat;
