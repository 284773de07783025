use crate::group::{GroupDescriptor, GroupElement, GroupError};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

/// A polynomial function on a group of the universe, written over the
/// `Z`-coordinates of its domain.
///
/// Polynomials in the finite-difference sense are constant along compact
/// coordinates, so a coefficient map over the `Z`-sector is fully general.
/// Coefficients are complex; real-valued polynomials simply have vanishing
/// imaginary parts.
#[derive(Clone, PartialEq)]
pub struct PolynomialFn {
    owner: GroupDescriptor,
    /// Multi-index (one exponent per `Z` coordinate of the owner) to
    /// coefficient. Exact zeros are never stored.
    coeffs: BTreeMap<Vec<u32>, Complex64>,
}

impl PolynomialFn {
    pub fn zero(owner: &GroupDescriptor) -> Self {
        PolynomialFn {
            owner: owner.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn new(
        owner: &GroupDescriptor,
        coeffs: BTreeMap<Vec<u32>, Complex64>,
    ) -> Result<Self, GroupError> {
        let vars = owner.z_rank();
        for idx in coeffs.keys() {
            if idx.len() != vars {
                return Err(GroupError::InvalidElement(format!(
                    "multi-index {:?} has {} entries; domain {} has {} Z coordinates",
                    idx,
                    idx.len(),
                    owner,
                    vars
                )));
            }
        }
        let coeffs = coeffs
            .into_iter()
            .filter(|(_, c)| c.norm() != 0.0)
            .collect();
        Ok(PolynomialFn {
            owner: owner.clone(),
            coeffs,
        })
    }

    pub fn from_real_terms(owner: &GroupDescriptor, terms: &[(&[u32], f64)]) -> Result<Self, GroupError> {
        let map = terms
            .iter()
            .map(|(idx, c)| (idx.to_vec(), Complex64::new(*c, 0.0)))
            .collect();
        Self::new(owner, map)
    }

    pub fn owner(&self) -> &GroupDescriptor {
        &self.owner
    }

    pub fn coeffs(&self) -> &BTreeMap<Vec<u32>, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, idx: &[u32]) -> Complex64 {
        self.coeffs
            .get(idx)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Total degree; zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs
            .keys()
            .map(|idx| idx.iter().map(|&e| e as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.coeffs.values().all(|c| c.norm() <= tol)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.values().all(|c| c.im.abs() <= tol)
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff(&vec![0; self.owner.z_rank()])
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drop coefficients of magnitude at most `eps`.
    pub fn truncate(&self, eps: f64) -> Self {
        PolynomialFn {
            owner: self.owner.clone(),
            coeffs: self
                .coeffs
                .iter()
                .filter(|(_, c)| c.norm() > eps)
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    pub fn real_part(&self) -> Self {
        PolynomialFn {
            owner: self.owner.clone(),
            coeffs: self
                .coeffs
                .iter()
                .filter(|(_, c)| c.re != 0.0)
                .map(|(k, c)| (k.clone(), Complex64::new(c.re, 0.0)))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        PolynomialFn {
            owner: self.owner.clone(),
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, GroupError> {
        if self.owner != other.owner {
            return Err(GroupError::MismatchedGroups(
                self.owner.to_string(),
                other.owner.to_string(),
            ));
        }
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            let e = coeffs.entry(k.clone()).or_insert(Complex64::new(0.0, 0.0));
            *e += c;
        }
        PolynomialFn::new(&self.owner, coeffs)
    }

    /// Substitute `u_i = v_i / m_i`: the polynomial expressed in the
    /// coordinates of an index-`m` sublattice becomes a polynomial on the
    /// ambient lattice with coefficients divided by `prod m_i^{alpha_i}`.
    pub fn unscale_coordinates(&self, divisors: &[i64], new_owner: &GroupDescriptor) -> Result<Self, GroupError> {
        if divisors.len() != self.owner.z_rank() || new_owner.z_rank() != self.owner.z_rank() {
            return Err(GroupError::InvalidElement(
                "divisor count must match Z coordinate count".into(),
            ));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(idx, c)| {
                let scale: f64 = idx
                    .iter()
                    .zip(divisors)
                    .map(|(&e, &m)| (m as f64).powi(e as i32))
                    .product();
                (idx.clone(), c / scale)
            })
            .collect();
        PolynomialFn::new(new_owner, coeffs)
    }

    /// Evaluate on raw `Z`-coordinates.
    pub fn eval_z(&self, z: &[i64]) -> Complex64 {
        debug_assert_eq!(z.len(), self.owner.z_rank());
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, c) in &self.coeffs {
            let mut term = 1.0f64;
            for (&e, &v) in idx.iter().zip(z) {
                term *= (v as f64).powi(e as i32);
            }
            acc += c * term;
        }
        acc
    }

    /// Evaluate at a group element (the compact coordinates are ignored:
    /// the polynomial is constant along them).
    pub fn eval(&self, x: &GroupElement) -> Result<Complex64, GroupError> {
        if x.owner() != &self.owner {
            return Err(GroupError::MismatchedGroups(
                self.owner.to_string(),
                x.owner().to_string(),
            ));
        }
        Ok(self.eval_z(x.z_coords()))
    }
}

impl fmt::Debug for PolynomialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .map(|(idx, c)| {
                let mono: Vec<String> = idx
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| {
                        if e == 1 {
                            format!("y{i}")
                        } else {
                            format!("y{i}^{e}")
                        }
                    })
                    .collect();
                let c_str = if c.im == 0.0 {
                    format!("{}", c.re)
                } else {
                    format!("({}+{}i)", c.re, c.im)
                };
                if mono.is_empty() {
                    c_str
                } else {
                    format!("{c_str}*{}", mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_degree() {
        let y2 = GroupDescriptor::lattice(2);
        // q(u, v) = 2uv + u^2
        let q = PolynomialFn::from_real_terms(&y2, &[(&[1, 1], 2.0), (&[2, 0], 1.0)]).unwrap();
        assert_eq!(q.degree(), 2);
        assert_eq!(q.eval_z(&[3, 4]).re, 24.0 + 9.0);
        assert!(q.is_real(0.0));
        assert!(!q.is_zero(1e-12));
    }

    #[test]
    fn unscale_for_sublattice() {
        let y2 = GroupDescriptor::lattice(2);
        // q'(u', v') = -12 u'^2 v'^2 seen through u = 3u' becomes -12/81 u^2 v^2.
        let q = PolynomialFn::from_real_terms(&y2, &[(&[2, 2], -12.0)]).unwrap();
        let r = q.unscale_coordinates(&[3, 3], &y2).unwrap();
        assert!((r.coeff(&[2, 2]).re + 12.0 / 81.0).abs() < 1e-15);
    }

    #[test]
    fn index_arity_checked() {
        let y = GroupDescriptor::lattice(1);
        assert!(PolynomialFn::from_real_terms(&y, &[(&[1, 1], 2.0)]).is_err());
    }
}
