use super::subgroup::{mul_map, Subgroup};
use super::{GroupDescriptor, GroupElement, GroupError, Homomorphism};
use crate::rat::rat;

/// Structural facts about a group that the characterization theorems
/// hypothesize.
#[derive(Clone, Debug)]
pub struct StructuralReport {
    pub is_torsion_free: bool,
    /// Doubling surjective (`X^(2) = X`).
    pub is_corwin: bool,
    pub has_order2_element: bool,
    /// An order-2 element, when one exists.
    pub order2_witness: Option<GroupElement>,
    /// The connected component of zero, `{0}^a x T^b x {0}`.
    pub connected_component: Subgroup,
    /// Number of order-2 elements inside the connected component
    /// (`2^b - 1` for `b` circle factors).
    pub order2_in_component: u128,
    /// `Some(p)` when `X^(p) = {0}` for the prime `p`, i.e. `X` is an
    /// elementary Abelian `p`-group (possibly trivial, reported as `None`).
    pub elementary_p: Option<i64>,
}

/// Whether `X^(n)` is trivial, via the multiplication map.
pub fn power_image_trivial(x: &GroupDescriptor, n: i64) -> Result<bool, GroupError> {
    Ok(mul_map(x, n)?.0.is_trivial())
}

pub fn structural_predicates(x: &GroupDescriptor) -> Result<StructuralReport, GroupError> {
    let is_torsion_free = x.t_rank() == 0 && x.finite_orders().is_empty();
    // Corwin: doubling is surjective on T, never on Z, and on Z_n iff n odd.
    let is_corwin = x.z_rank() == 0 && x.finite_orders().iter().all(|&n| n % 2 == 1);

    let mut order2_witness: Option<GroupElement> = None;
    if x.t_rank() > 0 {
        let mut t = vec![crate::rat::Rat::from_integer(0.into()); x.t_rank()];
        t[0] = rat(1, 2);
        order2_witness = Some(
            GroupElement::new(
                x.clone(),
                vec![0; x.z_rank()],
                t,
                vec![0; x.finite_orders().len()],
            )
            .expect("valid order-2 witness"),
        );
    } else if let Some(i) = x.finite_orders().iter().position(|&n| n % 2 == 0) {
        let mut f = vec![0i64; x.finite_orders().len()];
        f[i] = x.finite_orders()[i] / 2;
        order2_witness = Some(
            GroupElement::new(x.clone(), vec![0; x.z_rank()], vec![], f)
                .expect("valid order-2 witness"),
        );
    }

    let connected_component = Subgroup::connected_component(x);

    let order2_in_component = if x.t_rank() == 0 {
        0
    } else {
        (1u128 << x.t_rank()) - 1
    };

    let elementary_p = elementary_p_of(x);

    Ok(StructuralReport {
        is_torsion_free,
        is_corwin,
        has_order2_element: order2_witness.is_some(),
        order2_witness,
        connected_component,
        order2_in_component,
        elementary_p,
    })
}

/// `X` is an elementary Abelian `p`-group (`X^(p) = {0}` with `p` prime).
fn elementary_p_of(x: &GroupDescriptor) -> Option<i64> {
    if x.z_rank() != 0 || x.t_rank() != 0 || x.finite_orders().is_empty() {
        return None;
    }
    let p = x.finite_orders()[0];
    if !is_prime(p) || x.finite_orders().iter().any(|&n| n != p) {
        return None;
    }
    Some(p)
}

fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Outcome of the admissibility test `X^(a_j) != {0}` for all `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Admissibility {
    Admissible,
    /// First failing index and its coefficient.
    Inadmissible { index: usize, coeff: i64 },
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible)
    }
}

pub fn is_admissible(coeffs: &[i64], x: &GroupDescriptor) -> Result<Admissibility, GroupError> {
    for (index, &coeff) in coeffs.iter().enumerate() {
        if power_image_trivial(x, coeff)? {
            return Ok(Admissibility::Inadmissible { index, coeff });
        }
    }
    Ok(Admissibility::Admissible)
}

/// Outcome of the Heyde coefficient condition
/// `delta_i + delta_j` and `delta_i - delta_j` in `Aut(X)` for all `i != j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeydeCondition {
    Holds,
    /// First failing pair with the failing sign (`+1` or `-1`).
    Fails { i: usize, j: usize, sign: i8 },
}

impl HeydeCondition {
    pub fn holds(&self) -> bool {
        matches!(self, HeydeCondition::Holds)
    }
}

pub fn heyde_condition(deltas: &[Homomorphism]) -> Result<HeydeCondition, GroupError> {
    for (idx, d) in deltas.iter().enumerate() {
        if !d.is_automorphism() {
            return Err(GroupError::NotAnAutomorphism(format!(
                "delta_{idx} is not an automorphism"
            )));
        }
    }
    for i in 0..deltas.len() {
        for j in 0..deltas.len() {
            if i == j {
                continue;
            }
            if !deltas[i].add(&deltas[j])?.is_automorphism() {
                return Ok(HeydeCondition::Fails { i, j, sign: 1 });
            }
            if !deltas[i].sub(&deltas[j])?.is_automorphism() {
                return Ok(HeydeCondition::Fails { i, j, sign: -1 });
            }
        }
    }
    Ok(HeydeCondition::Holds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicates_on_basic_groups() {
        let z = GroupDescriptor::lattice(1);
        let r = structural_predicates(&z).unwrap();
        assert!(r.is_torsion_free);
        assert!(!r.is_corwin);
        assert!(!r.has_order2_element);
        assert_eq!(r.order2_in_component, 0);

        let t = GroupDescriptor::torus(1);
        let r = structural_predicates(&t).unwrap();
        assert!(!r.is_torsion_free);
        assert!(r.is_corwin);
        assert!(r.has_order2_element);
        assert_eq!(r.order2_in_component, 1);
        assert_eq!(r.order2_witness.unwrap().t_coords()[0], rat(1, 2));
        assert!(r.connected_component.is_whole());

        let z3 = GroupDescriptor::cyclic(3).unwrap();
        assert!(structural_predicates(&z3).unwrap().is_corwin);
        let z6 = GroupDescriptor::cyclic(6).unwrap();
        let r = structural_predicates(&z6).unwrap();
        assert!(!r.is_corwin);
        assert!(r.has_order2_element);
        assert_eq!(r.order2_witness.unwrap().f_coords()[0], 3);
    }

    #[test]
    fn corwin_iff_doubling_surjective() {
        for n in 2..=12i64 {
            let g = GroupDescriptor::cyclic(n).unwrap();
            let corwin = structural_predicates(&g).unwrap().is_corwin;
            let (img, _) = mul_map(&g, 2).unwrap();
            assert_eq!(corwin, img.is_whole(), "n = {n}");
        }
    }

    #[test]
    fn elementary_p_detection() {
        let z5 = GroupDescriptor::cyclic(5).unwrap();
        assert_eq!(structural_predicates(&z5).unwrap().elementary_p, Some(5));
        let z25 = GroupDescriptor::cyclic(25).unwrap();
        assert_eq!(structural_predicates(&z25).unwrap().elementary_p, None);
        let z3z3 = GroupDescriptor::finite(&[3, 3]).unwrap();
        assert_eq!(structural_predicates(&z3z3).unwrap().elementary_p, Some(3));
        let z6 = GroupDescriptor::cyclic(6).unwrap();
        assert_eq!(structural_predicates(&z6).unwrap().elementary_p, None);
    }

    #[test]
    fn admissibility() {
        let z6 = GroupDescriptor::cyclic(6).unwrap();
        assert!(is_admissible(&[2, 3], &z6).unwrap().is_admissible());
        assert_eq!(
            is_admissible(&[6], &z6).unwrap(),
            Admissibility::Inadmissible { index: 0, coeff: 6 }
        );
        let z = GroupDescriptor::lattice(1);
        assert!(is_admissible(&[1, -7, 100], &z).unwrap().is_admissible());
        assert!(!is_admissible(&[0], &z).unwrap().is_admissible());
    }

    #[test]
    fn heyde_condition_on_z5() {
        let z5 = GroupDescriptor::cyclic(5).unwrap();
        let d = |m| Homomorphism::mul_by_int(&z5, m);
        assert_eq!(heyde_condition(&[d(1), d(2)]).unwrap(), HeydeCondition::Holds);
        assert_eq!(
            heyde_condition(&[d(1), d(4)]).unwrap(),
            HeydeCondition::Fails { i: 0, j: 1, sign: 1 }
        );
        // delta_2 = 0 is not an automorphism at all.
        assert!(heyde_condition(&[d(1), d(5)]).is_err());
    }

    #[test]
    fn heyde_condition_on_torus() {
        let t = GroupDescriptor::torus(1);
        let one = Homomorphism::mul_by_int(&t, 1);
        let minus = Homomorphism::mul_by_int(&t, -1);
        assert_eq!(
            heyde_condition(&[one, minus]).unwrap(),
            HeydeCondition::Fails { i: 0, j: 1, sign: 1 }
        );
    }
}
