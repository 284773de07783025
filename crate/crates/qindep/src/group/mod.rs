//! The group universe `Z^a x T^b x F` with `F` finite Abelian: descriptors,
//! elements, character pairing, subgroups and annihilators, block-form
//! continuous homomorphisms with adjoints, and the structural predicates
//! the characterization theorems hypothesize.

mod descriptor;
pub(crate) mod element;
mod hom;
mod predicates;
mod subgroup;

pub use descriptor::{DescriptorError, GroupDescriptor, MAX_FINITE_ENUMERATION, MAX_ORDER, MAX_RANK};
pub use element::{enumerate_elements, unit_circle, GroupElement};
pub use hom::{HomBlocks, Homomorphism, IntMatrix, RatMatrix};
pub use predicates::{
    heyde_condition, is_admissible, structural_predicates, Admissibility, HeydeCondition,
    StructuralReport,
};
pub use subgroup::{annihilator, mul_map, subgroups_of_finite, Subgroup, TorusPart};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("elements belong to mismatched groups: {0} vs {1}")]
    MismatchedGroups(String, String),
    #[error("subgroup has no finite generating data and no closed-form tag: {0}")]
    UnsupportedSubgroupForm(String),
    #[error("homomorphism block shapes or divisibility constraints are invalid: {0}")]
    InvalidHomomorphism(String),
    #[error("not an automorphism: {0}")]
    NotAnAutomorphism(String),
    #[error("group too large to enumerate ({0} elements)")]
    GroupTooLarge(u128),
    #[error("descriptor invalid: {0}")]
    Descriptor(#[from] DescriptorError),
    #[error("element invalid: {0}")]
    InvalidElement(String),
}
