use super::element::{enumerate_elements, torus_coord_in_cyclic};
use super::{GroupDescriptor, GroupElement, GroupError, MAX_FINITE_ENUMERATION};
use crate::rat::{rat, Rat};
use num_integer::Integer;
use num_traits::Zero;
use std::collections::BTreeSet;
use std::fmt;

/// Closed-form tag for the part of a subgroup living in one circle factor.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum TorusPart {
    Full,
    /// The order-`m` cyclic subgroup: multiples of `1/m`. `Cyclic(1)` is
    /// the trivial part.
    Cyclic(u64),
}

/// A subgroup of a group in the universe, represented factorwise on the
/// `Z` and `T` sectors (`m Z` tags and cyclic tags — the only closed forms
/// the theorems exercise) and as an explicit closure set on the finite
/// sector, where arbitrary subgroups are allowed.
#[derive(Clone, PartialEq, Eq)]
pub struct Subgroup {
    owner: GroupDescriptor,
    /// Per `Z` factor: `m` means `m Z`; `0` means the trivial part.
    z: Vec<u64>,
    t: Vec<TorusPart>,
    /// All elements of the finite-sector part, as reduced coordinate
    /// vectors. Always contains the zero vector.
    finite: BTreeSet<Vec<i64>>,
}

impl Subgroup {
    fn from_parts(
        owner: GroupDescriptor,
        z: Vec<u64>,
        t: Vec<TorusPart>,
        finite: BTreeSet<Vec<i64>>,
    ) -> Self {
        debug_assert_eq!(z.len(), owner.z_rank());
        debug_assert_eq!(t.len(), owner.t_rank());
        debug_assert!(finite.contains(&vec![0; owner.finite_orders().len()]));
        Subgroup { owner, z, t, finite }
    }

    pub fn trivial(owner: &GroupDescriptor) -> Self {
        Subgroup {
            z: vec![0; owner.z_rank()],
            t: vec![TorusPart::Cyclic(1); owner.t_rank()],
            finite: BTreeSet::from([vec![0; owner.finite_orders().len()]]),
            owner: owner.clone(),
        }
    }

    /// The connected component of zero, `{0}^a x T^b x {0}`.
    pub fn connected_component(owner: &GroupDescriptor) -> Self {
        let mut s = Subgroup::trivial(owner);
        s.t = vec![TorusPart::Full; owner.t_rank()];
        s
    }

    pub fn whole(owner: &GroupDescriptor) -> Result<Self, GroupError> {
        let finite = if owner.finite_orders().is_empty() {
            BTreeSet::from([vec![]])
        } else {
            let fdesc = GroupDescriptor::finite(owner.finite_orders())
                .map_err(GroupError::Descriptor)?;
            enumerate_elements(&fdesc)?
                .into_iter()
                .map(|e| e.f_coords().to_vec())
                .collect()
        };
        Ok(Subgroup {
            z: vec![1; owner.z_rank()],
            t: vec![TorusPart::Full; owner.t_rank()],
            finite,
            owner: owner.clone(),
        })
    }

    /// `m Z` inside the `idx`-th `Z` factor (trivial elsewhere).
    pub fn z_multiples(owner: &GroupDescriptor, idx: usize, m: u64) -> Result<Self, GroupError> {
        if idx >= owner.z_rank() {
            return Err(GroupError::InvalidElement(format!(
                "no Z factor {idx} in {owner}"
            )));
        }
        let mut s = Subgroup::trivial(owner);
        s.z[idx] = m;
        Ok(s)
    }

    /// The order-`m` cyclic subgroup of the `idx`-th circle factor.
    pub fn torus_cyclic(owner: &GroupDescriptor, idx: usize, m: u64) -> Result<Self, GroupError> {
        if idx >= owner.t_rank() {
            return Err(GroupError::InvalidElement(format!(
                "no T factor {idx} in {owner}"
            )));
        }
        if m == 0 {
            return Err(GroupError::UnsupportedSubgroupForm(
                "cyclic torus part needs order >= 1".into(),
            ));
        }
        let mut s = Subgroup::trivial(owner);
        s.t[idx] = TorusPart::Cyclic(m);
        Ok(s)
    }

    /// Subgroup generated by the given elements.
    ///
    /// Supported generating data: elements living entirely in the finite
    /// sector (arbitrary; closed by enumeration), or single-coordinate
    /// elements in one `Z` or one `T` factor (closed-form tags). Anything
    /// else (diagonals across factors) is out of the supported universe.
    pub fn from_generators(
        owner: &GroupDescriptor,
        generators: &[GroupElement],
    ) -> Result<Self, GroupError> {
        let mut s = Subgroup::trivial(owner);
        let mut finite_gens: Vec<Vec<i64>> = Vec::new();
        for g in generators {
            if g.owner() != owner {
                return Err(GroupError::MismatchedGroups(
                    owner.to_string(),
                    g.owner().to_string(),
                ));
            }
            let nz_z: Vec<usize> = (0..owner.z_rank()).filter(|&i| g.z_coords()[i] != 0).collect();
            let nz_t: Vec<usize> = (0..owner.t_rank())
                .filter(|&i| !g.t_coords()[i].is_zero())
                .collect();
            let nz_f = g.f_coords().iter().any(|&c| c != 0);
            match (nz_z.len(), nz_t.len(), nz_f) {
                (0, 0, _) => {
                    finite_gens.push(g.f_coords().to_vec());
                }
                (1, 0, false) => {
                    let i = nz_z[0];
                    let m = g.z_coords()[i].unsigned_abs();
                    s.z[i] = if s.z[i] == 0 { m } else { s.z[i].gcd(&m) };
                }
                (0, 1, false) => {
                    let i = nz_t[0];
                    let q: u64 = g.t_coords()[i]
                        .denom()
                        .try_into()
                        .map_err(|_| GroupError::UnsupportedSubgroupForm("torus generator denominator too large".into()))?;
                    s.t[i] = match s.t[i] {
                        TorusPart::Full => TorusPart::Full,
                        TorusPart::Cyclic(m) => TorusPart::Cyclic(m.lcm(&q)),
                    };
                }
                _ => {
                    return Err(GroupError::UnsupportedSubgroupForm(format!(
                        "generator {g:?} mixes factors; only finite-sector or single-factor generators are supported"
                    )));
                }
            }
        }
        s.finite = finite_closure(owner.finite_orders(), &finite_gens)?;
        Ok(s)
    }

    pub fn owner(&self) -> &GroupDescriptor {
        &self.owner
    }

    pub fn z_parts(&self) -> &[u64] {
        &self.z
    }

    pub fn t_parts(&self) -> &[TorusPart] {
        &self.t
    }

    pub fn finite_part(&self) -> &BTreeSet<Vec<i64>> {
        &self.finite
    }

    pub fn contains(&self, x: &GroupElement) -> Result<bool, GroupError> {
        if x.owner() != &self.owner {
            return Err(GroupError::MismatchedGroups(
                self.owner.to_string(),
                x.owner().to_string(),
            ));
        }
        for (&c, &m) in x.z_coords().iter().zip(&self.z) {
            let ok = if m == 0 { c == 0 } else { c.rem_euclid(m as i64) == 0 };
            if !ok {
                return Ok(false);
            }
        }
        for (a, part) in x.t_coords().iter().zip(&self.t) {
            let ok = match part {
                TorusPart::Full => true,
                TorusPart::Cyclic(m) => torus_coord_in_cyclic(a, *m),
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(self.finite.contains(&x.f_coords().to_vec()))
    }

    pub fn is_trivial(&self) -> bool {
        self.z.iter().all(|&m| m == 0)
            && self.t.iter().all(|p| *p == TorusPart::Cyclic(1))
            && self.finite.len() == 1
    }

    pub fn is_whole(&self) -> bool {
        self.z.iter().all(|&m| m == 1)
            && self.t.iter().all(|p| *p == TorusPart::Full)
            && self.finite.len() as u128 == self.owner.finite_order()
    }

    /// Compact iff the `Z`-sector part is trivial.
    pub fn is_compact(&self) -> bool {
        self.z.iter().all(|&m| m == 0)
    }

    /// Open in its owner iff every circle part is the full circle
    /// (the `Z` and finite sectors are discrete).
    pub fn is_open(&self) -> bool {
        self.t.iter().all(|p| *p == TorusPart::Full)
    }

    /// A finite set of points iff compact with no full circle part.
    pub fn is_finite_set(&self) -> bool {
        self.is_compact() && self.t.iter().all(|p| matches!(p, TorusPart::Cyclic(_)))
    }

    /// Number of points, when the subgroup is a finite set.
    pub fn finite_len(&self) -> Option<u128> {
        if !self.is_finite_set() {
            return None;
        }
        let mut n = self.finite.len() as u128;
        for p in &self.t {
            if let TorusPart::Cyclic(m) = p {
                n *= *m as u128;
            }
        }
        Some(n)
    }

    /// Enumerate all points of a finite subgroup.
    pub fn elements(&self) -> Result<Vec<GroupElement>, GroupError> {
        let n = self
            .finite_len()
            .ok_or_else(|| GroupError::UnsupportedSubgroupForm(format!("{self:?} is not a finite set")))?;
        if n > MAX_FINITE_ENUMERATION {
            return Err(GroupError::GroupTooLarge(n));
        }
        let mut out: Vec<GroupElement> = vec![GroupElement::new(
            self.owner.clone(),
            vec![0; self.owner.z_rank()],
            vec![Rat::zero(); self.owner.t_rank()],
            vec![0; self.owner.finite_orders().len()],
        )
        .expect("zero element")];
        for (i, p) in self.t.iter().enumerate() {
            let TorusPart::Cyclic(m) = p else { unreachable!() };
            let mut next = Vec::with_capacity(out.len() * *m as usize);
            for base in &out {
                for j in 0..*m {
                    let mut t = base.t_coords().to_vec();
                    t[i] = rat(j as i64, *m as i64);
                    next.push(
                        GroupElement::new(
                            self.owner.clone(),
                            base.z_coords().to_vec(),
                            t,
                            base.f_coords().to_vec(),
                        )
                        .expect("valid coords"),
                    );
                }
            }
            out = next;
        }
        let mut full = Vec::with_capacity(out.len() * self.finite.len());
        for base in &out {
            for fc in &self.finite {
                full.push(
                    GroupElement::new(
                        self.owner.clone(),
                        base.z_coords().to_vec(),
                        base.t_coords().to_vec(),
                        fc.clone(),
                    )
                    .expect("valid coords"),
                );
            }
        }
        Ok(full)
    }

    /// Whether doubling is surjective on the subgroup viewed as a group in
    /// its own right.
    pub fn is_corwin(&self) -> bool {
        for &m in &self.z {
            if m >= 1 {
                return false; // an infinite cyclic part: 2mZ != mZ
            }
        }
        for p in &self.t {
            if let TorusPart::Cyclic(m) = p {
                if m % 2 == 0 && *m > 1 {
                    return false;
                }
            }
        }
        let doubled: BTreeSet<Vec<i64>> = self
            .finite
            .iter()
            .map(|v| {
                v.iter()
                    .zip(self.owner.finite_orders())
                    .map(|(&c, &n)| (2 * c).rem_euclid(n))
                    .collect()
            })
            .collect();
        doubled == self.finite
    }
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for &m in &self.z {
            parts.push(match m {
                0 => "{0}".into(),
                1 => "Z".into(),
                _ => format!("{m}Z"),
            });
        }
        for p in &self.t {
            parts.push(match p {
                TorusPart::Full => "T".into(),
                TorusPart::Cyclic(1) => "{0}".into(),
                TorusPart::Cyclic(m) => format!("C{m}"),
            });
        }
        if !self.owner.finite_orders().is_empty() {
            parts.push(format!("{{{} pts}}", self.finite.len()));
        }
        write!(f, "<{}>", parts.join(" x "))
    }
}

/// Closure of a finite-sector generating set under addition.
fn finite_closure(
    orders: &[i64],
    generators: &[Vec<i64>],
) -> Result<BTreeSet<Vec<i64>>, GroupError> {
    let reduce = |v: &[i64]| -> Vec<i64> {
        v.iter()
            .zip(orders)
            .map(|(&c, &n)| c.rem_euclid(n))
            .collect()
    };
    let zero = vec![0; orders.len()];
    let mut set: BTreeSet<Vec<i64>> = BTreeSet::from([zero]);
    let gens: Vec<Vec<i64>> = generators.iter().map(|g| reduce(g)).collect();
    let mut frontier: Vec<Vec<i64>> = set.iter().cloned().collect();
    while let Some(x) = frontier.pop() {
        for g in &gens {
            let y: Vec<i64> = x
                .iter()
                .zip(g)
                .zip(orders)
                .map(|((&a, &b), &n)| (a + b).rem_euclid(n))
                .collect();
            if set.insert(y.clone()) {
                if set.len() as u128 > MAX_FINITE_ENUMERATION {
                    return Err(GroupError::GroupTooLarge(set.len() as u128));
                }
                frontier.push(y);
            }
        }
    }
    Ok(set)
}

/// Annihilator `A(Y, K) = { y : (x, y) = 1 for all x in K }` of a subgroup
/// `K` of `X`, as a subgroup of the dual group `Y`. Open in `Y` whenever
/// `K` is compact.
pub fn annihilator(k: &Subgroup) -> Result<Subgroup, GroupError> {
    let x_desc = k.owner();
    let y_desc = x_desc.dual();
    // X's Z factor i pairs with Y's T factor i.
    let mut a_t: Vec<TorusPart> = Vec::with_capacity(x_desc.z_rank());
    for &m in k.z_parts() {
        a_t.push(if m == 0 {
            TorusPart::Full
        } else {
            TorusPart::Cyclic(m)
        });
    }
    // X's T factor j pairs with Y's Z factor j.
    let mut a_z: Vec<u64> = Vec::with_capacity(x_desc.t_rank());
    for p in k.t_parts() {
        a_z.push(match p {
            TorusPart::Full => 0,
            TorusPart::Cyclic(m) => *m,
        });
    }
    // Finite sector by enumeration.
    let orders = x_desc.finite_orders();
    let finite = if orders.is_empty() {
        BTreeSet::from([vec![]])
    } else {
        let fdesc = GroupDescriptor::finite(orders).map_err(GroupError::Descriptor)?;
        let all = enumerate_elements(&fdesc)?;
        let mut out = BTreeSet::new();
        for y in &all {
            let yc = y.f_coords();
            let annihilates = k.finite_part().iter().all(|xc| {
                let mut acc = Rat::zero();
                for ((&a, &b), &n) in xc.iter().zip(yc).zip(orders) {
                    acc += rat(a, 1) * rat(b, n);
                }
                crate::rat::is_integer(&acc)
            });
            if annihilates {
                out.insert(yc.to_vec());
            }
        }
        out
    };
    Ok(Subgroup::from_parts(y_desc, a_z, a_t, finite))
}

/// Image and kernel of the multiplication-by-`n` map `f_n x = n x`.
pub fn mul_map(x: &GroupDescriptor, n: i64) -> Result<(Subgroup, Subgroup), GroupError> {
    let mut image = Subgroup::trivial(x);
    let mut kernel = Subgroup::trivial(x);
    for i in 0..x.z_rank() {
        image.z[i] = n.unsigned_abs();
        kernel.z[i] = if n == 0 { 1 } else { 0 };
    }
    for i in 0..x.t_rank() {
        image.t[i] = if n == 0 { TorusPart::Cyclic(1) } else { TorusPart::Full };
        kernel.t[i] = if n == 0 {
            TorusPart::Full
        } else {
            TorusPart::Cyclic(n.unsigned_abs())
        };
    }
    let orders = x.finite_orders();
    if !orders.is_empty() {
        let mut img_gens = Vec::new();
        let mut ker_gens = Vec::new();
        for (i, &m) in orders.iter().enumerate() {
            let g = n.rem_euclid(m).gcd(&m); // n Z_m = gcd(n, m) Z_m
            let mut v = vec![0; orders.len()];
            v[i] = g;
            img_gens.push(v);
            let kgen = m / if g == 0 { m } else { g }; // order of kernel part is gcd
            let mut v = vec![0; orders.len()];
            v[i] = if g == 0 { 1 } else { kgen };
            ker_gens.push(v);
        }
        image.finite = finite_closure(orders, &img_gens)?;
        kernel.finite = finite_closure(orders, &ker_gens)?;
    }
    Ok((image, kernel))
}

/// Enumerate every subgroup of a finite group (closure lattice search).
pub fn subgroups_of_finite(desc: &GroupDescriptor) -> Result<Vec<Subgroup>, GroupError> {
    if !desc.is_finite() {
        return Err(GroupError::UnsupportedSubgroupForm(format!(
            "subgroup enumeration needs a finite group, got {desc}"
        )));
    }
    let order = desc.finite_order();
    if order > 4096 {
        return Err(GroupError::GroupTooLarge(order));
    }
    let all: Vec<Vec<i64>> = enumerate_elements(desc)?
        .into_iter()
        .map(|e| e.f_coords().to_vec())
        .collect();
    let orders = desc.finite_orders();
    let mut seen: BTreeSet<BTreeSet<Vec<i64>>> = BTreeSet::new();
    let trivial = finite_closure(orders, &[])?;
    seen.insert(trivial);
    let mut frontier: Vec<BTreeSet<Vec<i64>>> = seen.iter().cloned().collect();
    while let Some(h) = frontier.pop() {
        for x in &all {
            if h.contains(x) {
                continue;
            }
            let mut gens: Vec<Vec<i64>> = h.iter().cloned().collect();
            gens.push(x.clone());
            let bigger = finite_closure(orders, &gens)?;
            if seen.insert(bigger.clone()) {
                frontier.push(bigger);
            }
        }
    }
    Ok(seen
        .into_iter()
        .map(|finite| Subgroup::from_parts(desc.clone(), vec![], vec![], finite))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn annihilator_of_cyclic_in_torus() {
        // K = Z_3 in T; A(Z, K) = 3Z.
        let t = GroupDescriptor::torus(1);
        let k = Subgroup::torus_cyclic(&t, 0, 3).unwrap();
        let a = annihilator(&k).unwrap();
        assert_eq!(a.owner(), &GroupDescriptor::lattice(1));
        assert_eq!(a.z_parts(), &[3]);
        // Brute-force cross-check against the pairing.
        let y_desc = t.dual();
        for n in -20i64..=20 {
            let y = GroupElement::z_scalar(&y_desc, n).unwrap();
            let in_a = a.contains(&y).unwrap();
            let mut trivial_on_k = true;
            for j in 0..3 {
                let x = GroupElement::new(t.clone(), vec![], vec![rat(j, 3)], vec![]).unwrap();
                if (x.pair(&y).unwrap() - num_complex::Complex64::new(1.0, 0.0)).norm() > 1e-12 {
                    trivial_on_k = false;
                }
            }
            assert_eq!(in_a, trivial_on_k, "n = {n}");
        }
    }

    #[test]
    fn annihilator_in_z6() {
        // K = {0, 3} in Z_6; annihilator in Z_6 is {0, 2, 4}.
        let z6 = GroupDescriptor::cyclic(6).unwrap();
        let g = GroupElement::new(z6.clone(), vec![], vec![], vec![3]).unwrap();
        let k = Subgroup::from_generators(&z6, &[g]).unwrap();
        let a = annihilator(&k).unwrap();
        let pts: Vec<i64> = a.finite_part().iter().map(|v| v[0]).collect();
        assert_eq!(pts, vec![0, 2, 4]);
    }

    #[test]
    fn annihilator_of_whole_is_trivial() {
        let z6 = GroupDescriptor::cyclic(6).unwrap();
        let k = Subgroup::whole(&z6).unwrap();
        let a = annihilator(&k).unwrap();
        assert!(a.is_trivial());
    }

    #[test]
    fn mul_map_on_z6() {
        let z6 = GroupDescriptor::cyclic(6).unwrap();
        let (img, ker) = mul_map(&z6, 2).unwrap();
        let img_pts: Vec<i64> = img.finite_part().iter().map(|v| v[0]).collect();
        let ker_pts: Vec<i64> = ker.finite_part().iter().map(|v| v[0]).collect();
        assert_eq!(img_pts, vec![0, 2, 4]);
        assert_eq!(ker_pts, vec![0, 3]);
    }

    #[test]
    fn mul_map_on_torus() {
        let t = GroupDescriptor::torus(1);
        let (img, ker) = mul_map(&t, 2).unwrap();
        assert!(img.is_whole());
        assert_eq!(ker.t_parts(), &[TorusPart::Cyclic(2)]);
        let (img1, ker1) = mul_map(&t, 1).unwrap();
        assert!(img1.is_whole());
        assert!(ker1.is_trivial());
    }

    #[test]
    fn mul_map_zero() {
        let x = GroupDescriptor::new(1, 1, vec![4]).unwrap();
        let (img, ker) = mul_map(&x, 0).unwrap();
        assert!(img.is_trivial());
        assert!(ker.is_whole());
    }

    #[test]
    fn subgroup_counts() {
        // Z_12 has 6 subgroups (one per divisor).
        let z12 = GroupDescriptor::cyclic(12).unwrap();
        assert_eq!(subgroups_of_finite(&z12).unwrap().len(), 6);
        // Z_2 x Z_4 has 8 subgroups.
        let g = GroupDescriptor::finite(&[2, 4]).unwrap();
        assert_eq!(subgroups_of_finite(&g).unwrap().len(), 8);
    }

    #[test]
    fn corwin_parts() {
        let t = GroupDescriptor::torus(1);
        assert!(Subgroup::whole(&t).unwrap().is_corwin());
        assert!(Subgroup::torus_cyclic(&t, 0, 3).unwrap().is_corwin());
        assert!(!Subgroup::torus_cyclic(&t, 0, 2).unwrap().is_corwin());
        let z = GroupDescriptor::lattice(1);
        assert!(!Subgroup::whole(&z).unwrap().is_corwin());
        assert!(Subgroup::trivial(&z).is_corwin());
    }

    #[test]
    fn finite_subgroup_elements() {
        let t = GroupDescriptor::torus(1);
        let k = Subgroup::torus_cyclic(&t, 0, 4).unwrap();
        let pts = k.elements().unwrap();
        assert_eq!(pts.len(), 4);
        assert!(k.is_compact());
        assert!(!k.is_open());
        assert!(Subgroup::whole(&t).unwrap().is_open());
    }
}
