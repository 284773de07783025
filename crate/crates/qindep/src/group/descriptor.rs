use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Caps on descriptor shape so hostile inputs cannot force huge
/// allocations or unbounded enumerations.
pub const MAX_RANK: usize = 64;
pub const MAX_ORDER: i64 = 1_000_000;
/// Largest finite sector we are willing to enumerate element by element.
pub const MAX_FINITE_ENUMERATION: u128 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DescriptorError {
    #[error("finite factor order {0} out of range (must be 2..={MAX_ORDER})")]
    OrderOutOfRange(i64),
    #[error("rank {0} exceeds maximum {MAX_RANK}")]
    RankTooLarge(usize),
}

/// A group `Z^a x T^b x Z_{n_1} x ... x Z_{n_k}` in the supported universe.
///
/// `T` is the circle written additively with angles as fractions of a full
/// turn. Duality swaps the `Z` and `T` ranks and fixes every finite factor.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDescriptor", into = "RawDescriptor")]
pub struct GroupDescriptor {
    z_rank: usize,
    t_rank: usize,
    finite_orders: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDescriptor {
    #[serde(default, skip_serializing_if = "is_zero")]
    z_rank: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    t_rank: usize,
    #[serde(default, rename = "finite", skip_serializing_if = "Vec::is_empty")]
    finite_orders: Vec<i64>,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

impl TryFrom<RawDescriptor> for GroupDescriptor {
    type Error = DescriptorError;
    fn try_from(raw: RawDescriptor) -> Result<Self, Self::Error> {
        GroupDescriptor::new(raw.z_rank, raw.t_rank, raw.finite_orders)
    }
}

impl From<GroupDescriptor> for RawDescriptor {
    fn from(d: GroupDescriptor) -> Self {
        RawDescriptor {
            z_rank: d.z_rank,
            t_rank: d.t_rank,
            finite_orders: d.finite_orders,
        }
    }
}

impl GroupDescriptor {
    pub fn new(
        z_rank: usize,
        t_rank: usize,
        finite_orders: Vec<i64>,
    ) -> Result<Self, DescriptorError> {
        if z_rank > MAX_RANK {
            return Err(DescriptorError::RankTooLarge(z_rank));
        }
        if t_rank > MAX_RANK {
            return Err(DescriptorError::RankTooLarge(t_rank));
        }
        if finite_orders.len() > MAX_RANK {
            return Err(DescriptorError::RankTooLarge(finite_orders.len()));
        }
        for &n in &finite_orders {
            if !(2..=MAX_ORDER).contains(&n) {
                return Err(DescriptorError::OrderOutOfRange(n));
            }
        }
        Ok(GroupDescriptor {
            z_rank,
            t_rank,
            finite_orders,
        })
    }

    /// `Z^a`.
    pub fn lattice(a: usize) -> Self {
        Self::new(a, 0, vec![]).expect("rank within cap")
    }

    /// `T^b`.
    pub fn torus(b: usize) -> Self {
        Self::new(0, b, vec![]).expect("rank within cap")
    }

    /// `Z_{n_1} x ... x Z_{n_k}`.
    pub fn finite(orders: &[i64]) -> Result<Self, DescriptorError> {
        Self::new(0, 0, orders.to_vec())
    }

    /// The cyclic group `Z_n`.
    pub fn cyclic(n: i64) -> Result<Self, DescriptorError> {
        Self::finite(&[n])
    }

    pub fn trivial() -> Self {
        Self::new(0, 0, vec![]).expect("trivial")
    }

    pub fn z_rank(&self) -> usize {
        self.z_rank
    }

    pub fn t_rank(&self) -> usize {
        self.t_rank
    }

    pub fn finite_orders(&self) -> &[i64] {
        &self.finite_orders
    }

    /// Character group: `Z^a x T^b x F  ->  Z^b x T^a x F`.
    pub fn dual(&self) -> Self {
        GroupDescriptor {
            z_rank: self.t_rank,
            t_rank: self.z_rank,
            finite_orders: self.finite_orders.clone(),
        }
    }

    /// Direct product, concatenating each sector.
    pub fn product(&self, other: &Self) -> Result<Self, DescriptorError> {
        let mut finite = self.finite_orders.clone();
        finite.extend_from_slice(&other.finite_orders);
        Self::new(self.z_rank + other.z_rank, self.t_rank + other.t_rank, finite)
    }

    /// `n`-fold direct power (used for joint char-function domains `Y^n`).
    pub fn power(&self, n: usize) -> Result<Self, DescriptorError> {
        let mut acc = GroupDescriptor::trivial();
        for _ in 0..n {
            acc = acc.product(self)?;
        }
        Ok(acc)
    }

    pub fn is_trivial(&self) -> bool {
        self.z_rank == 0 && self.t_rank == 0 && self.finite_orders.is_empty()
    }

    /// True when the group is finite (no `Z` and no `T` factors).
    pub fn is_finite(&self) -> bool {
        self.z_rank == 0 && self.t_rank == 0
    }

    /// True when the group is compact (no `Z` factors).
    pub fn is_compact(&self) -> bool {
        self.z_rank == 0
    }

    /// True when the group is discrete (no `T` factors).
    pub fn is_discrete(&self) -> bool {
        self.t_rank == 0
    }

    /// Order of the finite sector alone.
    pub fn finite_order(&self) -> u128 {
        self.finite_orders.iter().map(|&n| n as u128).product()
    }

    /// Total order, for finite groups.
    pub fn order(&self) -> Option<u128> {
        self.is_finite().then(|| self.finite_order())
    }
}

impl fmt::Debug for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.z_rank == 1 {
            parts.push("Z".into());
        } else if self.z_rank > 1 {
            parts.push(format!("Z^{}", self.z_rank));
        }
        if self.t_rank == 1 {
            parts.push("T".into());
        } else if self.t_rank > 1 {
            parts.push(format!("T^{}", self.t_rank));
        }
        for &n in &self.finite_orders {
            parts.push(format!("Z_{n}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" x "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_swaps_ranks_and_fixes_finite() {
        let x = GroupDescriptor::new(2, 1, vec![6]).unwrap();
        let y = x.dual();
        assert_eq!(y.z_rank(), 1);
        assert_eq!(y.t_rank(), 2);
        assert_eq!(y.finite_orders(), &[6]);
        assert_eq!(y.dual(), x);
    }

    #[test]
    fn dual_examples() {
        assert_eq!(GroupDescriptor::cyclic(6).unwrap().dual(), GroupDescriptor::cyclic(6).unwrap());
        assert_eq!(GroupDescriptor::torus(1).dual(), GroupDescriptor::lattice(1));
        let tz2 = GroupDescriptor::new(0, 1, vec![2]).unwrap();
        assert_eq!(tz2.dual(), GroupDescriptor::new(1, 0, vec![2]).unwrap());
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(GroupDescriptor::new(0, 0, vec![1]).is_err());
        assert!(GroupDescriptor::new(0, 0, vec![0]).is_err());
        assert!(GroupDescriptor::new(0, 0, vec![-3]).is_err());
        assert!(GroupDescriptor::new(0, 0, vec![MAX_ORDER + 1]).is_err());
    }

    #[test]
    fn serde_shape() {
        let x: GroupDescriptor = serde_json::from_str(r#"{"z_rank":1,"finite":[2,4]}"#).unwrap();
        assert_eq!(x, GroupDescriptor::new(1, 0, vec![2, 4]).unwrap());
        let s = serde_json::to_string(&x).unwrap();
        let back: GroupDescriptor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<GroupDescriptor>(r#"{"finite":[1]}"#).is_err());
        assert!(serde_json::from_str::<GroupDescriptor>(r#"{"bogus":3}"#).is_err());
    }
}
