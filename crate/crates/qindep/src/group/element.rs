use super::{GroupDescriptor, GroupError};
use crate::rat::{fract_mod1, is_integer, rat, rat_int, rat_to_f64, Rat};
use num_complex::Complex64;
use num_traits::Zero;
use std::f64::consts::TAU;
use std::fmt;

/// `exp(2*pi*i*angle)` for an exact angle given in turns. Quarter turns are
/// special-cased so that characters of 2- and 4-torsion stay bit-exact.
pub fn unit_circle(angle: &Rat) -> Complex64 {
    let a = fract_mod1(angle);
    if a.is_zero() {
        return Complex64::new(1.0, 0.0);
    }
    if a == rat(1, 2) {
        return Complex64::new(-1.0, 0.0);
    }
    if a == rat(1, 4) {
        return Complex64::new(0.0, 1.0);
    }
    if a == rat(3, 4) {
        return Complex64::new(0.0, -1.0);
    }
    let theta = TAU * rat_to_f64(&a);
    Complex64::new(theta.cos(), theta.sin())
}

/// A point of a [`GroupDescriptor`]: integer `Z`-coordinates, exact rational
/// torus angles in `[0, 1)` (fractions of a turn), and finite coordinates
/// reduced modulo their orders.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    owner: GroupDescriptor,
    z: Vec<i64>,
    t: Vec<Rat>,
    f: Vec<i64>,
}

impl GroupElement {
    pub fn new(
        owner: GroupDescriptor,
        z: Vec<i64>,
        t: Vec<Rat>,
        f: Vec<i64>,
    ) -> Result<Self, GroupError> {
        if z.len() != owner.z_rank() || t.len() != owner.t_rank() || f.len() != owner.finite_orders().len()
        {
            return Err(GroupError::InvalidElement(format!(
                "coordinate counts ({},{},{}) do not match group {}",
                z.len(),
                t.len(),
                f.len(),
                owner
            )));
        }
        let t = t.into_iter().map(|a| fract_mod1(&a)).collect();
        let f = f
            .iter()
            .zip(owner.finite_orders())
            .map(|(&c, &n)| c.rem_euclid(n))
            .collect();
        Ok(GroupElement { owner, z, t, f })
    }

    pub fn zero(owner: &GroupDescriptor) -> Self {
        GroupElement {
            z: vec![0; owner.z_rank()],
            t: vec![Rat::zero(); owner.t_rank()],
            f: vec![0; owner.finite_orders().len()],
            owner: owner.clone(),
        }
    }

    /// Element of `Z^1` (convenience for dual-of-torus work).
    pub fn z_scalar(owner: &GroupDescriptor, n: i64) -> Result<Self, GroupError> {
        Self::new(owner.clone(), vec![n], vec![], vec![])
    }

    pub fn owner(&self) -> &GroupDescriptor {
        &self.owner
    }

    pub fn z_coords(&self) -> &[i64] {
        &self.z
    }

    pub fn t_coords(&self) -> &[Rat] {
        &self.t
    }

    pub fn f_coords(&self) -> &[i64] {
        &self.f
    }

    pub fn is_zero(&self) -> bool {
        self.z.iter().all(|&c| c == 0)
            && self.t.iter().all(|a| a.is_zero())
            && self.f.iter().all(|&c| c == 0)
    }

    fn same_owner(&self, other: &Self) -> Result<(), GroupError> {
        if self.owner != other.owner {
            return Err(GroupError::MismatchedGroups(
                self.owner.to_string(),
                other.owner.to_string(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.checked_add(other).expect("same-owner addition")
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, GroupError> {
        self.same_owner(other)?;
        Ok(GroupElement {
            owner: self.owner.clone(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a + b).collect(),
            t: self
                .t
                .iter()
                .zip(&other.t)
                .map(|(a, b)| fract_mod1(&(a + b)))
                .collect(),
            f: self
                .f
                .iter()
                .zip(&other.f)
                .zip(self.owner.finite_orders())
                .map(|((a, b), &n)| (a + b).rem_euclid(n))
                .collect(),
        })
    }

    pub fn neg(&self) -> Self {
        GroupElement {
            owner: self.owner.clone(),
            z: self.z.iter().map(|&a| -a).collect(),
            t: self.t.iter().map(|a| fract_mod1(&(-a))).collect(),
            f: self
                .f
                .iter()
                .zip(self.owner.finite_orders())
                .map(|(&a, &n)| (-a).rem_euclid(n))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scalar_mul(&self, n: i64) -> Self {
        GroupElement {
            owner: self.owner.clone(),
            z: self.z.iter().map(|&a| a * n).collect(),
            t: self
                .t
                .iter()
                .map(|a| fract_mod1(&(a * rat_int(n))))
                .collect(),
            f: self
                .f
                .iter()
                .zip(self.owner.finite_orders())
                .map(|(&a, &m)| {
                    let prod = (a as i128) * (n as i128);
                    prod.rem_euclid(m as i128) as i64
                })
                .collect(),
        }
    }

    /// Order of the element, `None` when infinite (a nonzero `Z` coordinate).
    pub fn element_order(&self) -> Option<u64> {
        if self.z.iter().any(|&c| c != 0) {
            return None;
        }
        let mut ord: u64 = 1;
        for a in &self.t {
            // a = p/q in lowest terms has order q.
            let q = a.denom();
            let q: u64 = q.try_into().ok()?;
            ord = num_integer::lcm(ord, q);
        }
        for (&c, &n) in self.f.iter().zip(self.owner.finite_orders()) {
            let n = n as u64;
            let g = num_integer::gcd(c as u64, n);
            ord = num_integer::lcm(ord, n / g);
        }
        Some(ord)
    }

    /// Exact pairing angle in turns, without reduction mod 1. Linear in
    /// `y`, which makes it the canonical continuous phase branch of the
    /// character `y -> (self, y)`.
    pub fn pairing_angle_unreduced(&self, y: &GroupElement) -> Result<Rat, GroupError> {
        if self.owner.dual() != y.owner {
            return Err(GroupError::MismatchedGroups(
                self.owner.to_string(),
                format!("{} (expected dual {})", y.owner, self.owner.dual()),
            ));
        }
        let mut acc = Rat::zero();
        // Z coords of X pair with T coords of Y (both length z_rank).
        for (&m, a) in self.z.iter().zip(y.t_coords()) {
            acc += a * rat_int(m);
        }
        // T coords of X pair with Z coords of Y.
        for (a, &m) in self.t.iter().zip(y.z_coords()) {
            acc += a * rat_int(m);
        }
        for ((&j, &k), &n) in self.f.iter().zip(y.f_coords()).zip(self.owner.finite_orders()) {
            acc += rat(j, 1) * rat(k, n);
        }
        Ok(acc)
    }

    /// Exact pairing angle (in turns, reduced to `[0,1)`) between `self` in
    /// `X` and `y` in the dual of `X`.
    ///
    /// Convention: a `Z` coordinate of `X` pairs with the matching `T`
    /// coordinate of the dual by `m * angle`; a finite coordinate pairs by
    /// `j*k/n`.
    pub fn pairing_angle(&self, y: &GroupElement) -> Result<Rat, GroupError> {
        Ok(fract_mod1(&self.pairing_angle_unreduced(y)?))
    }

    /// The bicharacter value `(x, y)` on the unit circle.
    pub fn pair(&self, y: &GroupElement) -> Result<Complex64, GroupError> {
        Ok(unit_circle(&self.pairing_angle(y)?))
    }

    /// Stack coordinates of elements of `X_1, ..., X_k` into an element of
    /// the product descriptor.
    pub fn stack(parts: &[&GroupElement]) -> Result<Self, GroupError> {
        let mut owner = GroupDescriptor::trivial();
        for p in parts {
            owner = owner.product(p.owner())?;
        }
        let z = parts.iter().flat_map(|p| p.z.iter().copied()).collect();
        let t = parts.iter().flat_map(|p| p.t.iter().cloned()).collect();
        let f = parts.iter().flat_map(|p| p.f.iter().copied()).collect();
        Ok(GroupElement { owner, z, t, f })
    }

    /// Split an element of `base^k` into its `k` component elements.
    pub fn split(&self, base: &GroupDescriptor, k: usize) -> Result<Vec<Self>, GroupError> {
        if base.power(k).map_err(GroupError::Descriptor)? != self.owner {
            return Err(GroupError::MismatchedGroups(
                self.owner.to_string(),
                format!("{}^{}", base, k),
            ));
        }
        let (a, b, c) = (base.z_rank(), base.t_rank(), base.finite_orders().len());
        Ok((0..k)
            .map(|i| GroupElement {
                owner: base.clone(),
                z: self.z[i * a..(i + 1) * a].to_vec(),
                t: self.t[i * b..(i + 1) * b].to_vec(),
                f: self.f[i * c..(i + 1) * c].to_vec(),
            })
            .collect())
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        let mut first = true;
        let mut put = |s: String, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{s}")
        };
        for &c in &self.z {
            put(c.to_string(), f)?;
        }
        for a in &self.t {
            put(crate::rat::format_rat(a), f)?;
        }
        for &c in &self.f {
            put(c.to_string(), f)?;
        }
        write!(f, ")")
    }
}

/// Enumerate every element of a finite group, in lexicographic coordinate
/// order. Errors when the group is not finite or too large.
pub fn enumerate_elements(desc: &GroupDescriptor) -> Result<Vec<GroupElement>, GroupError> {
    if !desc.is_finite() {
        return Err(GroupError::UnsupportedSubgroupForm(format!(
            "cannot enumerate non-finite group {desc}"
        )));
    }
    let order = desc.finite_order();
    if order > super::MAX_FINITE_ENUMERATION {
        return Err(GroupError::GroupTooLarge(order));
    }
    let orders = desc.finite_orders();
    let mut out = Vec::with_capacity(order as usize);
    let mut coords = vec![0i64; orders.len()];
    loop {
        out.push(GroupElement {
            owner: desc.clone(),
            z: vec![],
            t: vec![],
            f: coords.clone(),
        });
        let mut i = orders.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            coords[i] += 1;
            if coords[i] < orders[i] {
                break;
            }
            coords[i] = 0;
        }
    }
}

/// True iff `t` is an integer multiple of `1/m` (a point of the order-`m`
/// cyclic subgroup of the circle).
pub(crate) fn torus_coord_in_cyclic(t: &Rat, m: u64) -> bool {
    is_integer(&(t * rat_int(m as i64)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elem(desc: &GroupDescriptor, z: Vec<i64>, t: Vec<Rat>, f: Vec<i64>) -> GroupElement {
        GroupElement::new(desc.clone(), z, t, f).unwrap()
    }

    #[test]
    fn pairing_convention() {
        // x=1 in Z_4 pairs with y=1 in Z_4 to i.
        let z4 = GroupDescriptor::cyclic(4).unwrap();
        let x = elem(&z4, vec![], vec![], vec![1]);
        let y = elem(&z4.dual(), vec![], vec![], vec![1]);
        let v = x.pair(&y).unwrap();
        assert_eq!(v, Complex64::new(0.0, 1.0));

        // Trivial character.
        let y0 = GroupElement::zero(&z4.dual());
        assert_eq!(x.pair(&y0).unwrap(), Complex64::new(1.0, 0.0));

        // x = 1/3 in T, y = 3 in Z: exp(2 pi i) = 1.
        let t = GroupDescriptor::torus(1);
        let x = elem(&t, vec![], vec![rat(1, 3)], vec![]);
        let y = elem(&t.dual(), vec![3], vec![], vec![]);
        assert_eq!(x.pair(&y).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn pairing_rejects_mismatched() {
        let t = GroupDescriptor::torus(1);
        let x = elem(&t, vec![], vec![rat(1, 3)], vec![]);
        let y = elem(&t, vec![], vec![rat(1, 3)], vec![]);
        // dual of T is Z, so pairing T with T must be rejected.
        assert!(matches!(x.pair(&y), Err(GroupError::MismatchedGroups(_, _))));
    }

    #[test]
    fn reduction_and_order() {
        let g = GroupDescriptor::new(1, 1, vec![6]).unwrap();
        let x = elem(&g, vec![-2], vec![rat(5, 4)], vec![7]);
        assert_eq!(x.t_coords()[0], rat(1, 4));
        assert_eq!(x.f_coords()[0], 1);
        assert_eq!(x.element_order(), None);
        let y = elem(&g, vec![0], vec![rat(1, 2)], vec![3]);
        assert_eq!(y.element_order(), Some(2));
        assert_eq!(y.add(&y).element_order(), Some(1));
    }

    #[test]
    fn enumerate_finite() {
        let g = GroupDescriptor::new(0, 0, vec![2, 3]).unwrap();
        let all = enumerate_elements(&g).unwrap();
        assert_eq!(all.len(), 6);
        assert!(all[0].is_zero());
    }

    #[test]
    fn stack_split_round_trip() {
        let y = GroupDescriptor::lattice(1);
        let u = elem(&y, vec![3], vec![], vec![]);
        let v = elem(&y, vec![-1], vec![], vec![]);
        let s = GroupElement::stack(&[&u, &v]).unwrap();
        let parts = s.split(&y, 2).unwrap();
        assert_eq!(parts[0], u);
        assert_eq!(parts[1], v);
    }
}
