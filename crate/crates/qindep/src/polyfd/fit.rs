use super::lattice::{compositions, forward_difference_at, CoordKind, LatticeFunction};
use super::poly::PolynomialFn;
use super::PolyFdError;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Result of a polynomial fit: the fitted polynomial (in monomial form,
/// over the `Z` coordinates of the domain) and the maximum deviation over
/// the whole window, including non-constancy along compact coordinates.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub poly: PolynomialFn,
    pub residual: f64,
}

/// Exact polynomial fitting by iterated forward differences at the origin.
///
/// Newton coefficients `Delta^alpha f(0)` for `|alpha| <= degree` are
/// converted to monomial coefficients through the binomial basis, which is
/// exact (up to float error) whenever `f` really is a polynomial of total
/// degree at most `degree` on the window.
pub fn fit_polynomial(
    f: &LatticeFunction,
    degree: usize,
) -> Result<FitResult, PolyFdError> {
    let kinds = f.kinds();
    let z_coords: Vec<usize> = kinds
        .iter()
        .enumerate()
        .filter_map(|(i, k)| matches!(k, CoordKind::Z { .. }).then_some(i))
        .collect();
    for &i in &z_coords {
        let CoordKind::Z { radius } = kinds[i] else {
            unreachable!()
        };
        if (radius as usize) < degree + 1 {
            return Err(PolyFdError::WindowTooSmall {
                coord: i,
                need: degree as u32 + 1,
                have: radius,
            });
        }
    }
    let base = vec![0i64; kinds.len()];
    // Binomial-basis coefficient vectors: binom(x, j) = sum_m b[j][m] x^m.
    let binom_polys = binomial_basis(degree);
    let mut coeffs: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
    for total in 0..=degree {
        for alpha in compositions(total, z_coords.len()) {
            let mut orders = vec![0u32; kinds.len()];
            for (pos, &zc) in z_coords.iter().enumerate() {
                orders[zc] = alpha[pos];
            }
            let newton = forward_difference_at(f, &orders, &base)?;
            if newton.norm() == 0.0 {
                continue;
            }
            // Expand prod_i binom(x_i, alpha_i) into monomials.
            let mut partial: Vec<(Vec<u32>, f64)> = vec![(vec![], 1.0)];
            for &a in &alpha {
                let basis = &binom_polys[a as usize];
                let mut next = Vec::with_capacity(partial.len() * basis.len());
                for (idx, c) in &partial {
                    for (m, bm) in basis.iter().enumerate() {
                        if *bm == 0.0 {
                            continue;
                        }
                        let mut idx2 = idx.clone();
                        idx2.push(m as u32);
                        next.push((idx2, c * bm));
                    }
                }
                partial = next;
            }
            for (idx, c) in partial {
                let e = coeffs.entry(idx).or_insert(Complex64::new(0.0, 0.0));
                *e += newton * c;
            }
        }
    }
    let poly = PolynomialFn::new(f.descriptor(), coeffs).map_err(PolyFdError::Group)?;
    // Residual over the full window (catches both misfit on the Z box and
    // non-constancy along compact coordinates).
    let mut residual = 0.0f64;
    for p in f.points() {
        let z: Vec<i64> = z_coords.iter().map(|&i| p[i]).collect();
        let r = (f.eval_index(&p)? - poly.eval_z(&z)).norm();
        residual = residual.max(r);
    }
    Ok(FitResult { poly, residual })
}

/// As [`fit_polynomial`], erroring with `ResidualTooLarge` when the fit
/// deviates by more than `tol`; the best fit stays available through the
/// unchecked variant.
pub fn fit_polynomial_checked(
    f: &LatticeFunction,
    degree: usize,
    tol: f64,
) -> Result<FitResult, PolyFdError> {
    let fit = fit_polynomial(f, degree)?;
    if fit.residual > tol {
        return Err(PolyFdError::ResidualTooLarge {
            residual: fit.residual,
        });
    }
    Ok(fit)
}

/// Coefficient vectors of `binom(x, j)` for `j = 0..=d`, exact in f64 for
/// the degrees used here.
fn binomial_basis(d: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    out.push(vec![1.0]); // binom(x, 0) = 1
    for j in 1..=d {
        // binom(x, j) = binom(x, j-1) * (x - (j-1)) / j
        let prev = &out[j - 1];
        let mut next = vec![0.0f64; j + 1];
        for (m, &c) in prev.iter().enumerate() {
            next[m + 1] += c / j as f64;
            next[m] -= c * (j as f64 - 1.0) / j as f64;
        }
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Window;
    use crate::group::GroupDescriptor;

    #[test]
    fn recovers_mixed_quartic() {
        let d = GroupDescriptor::lattice(2);
        let w = Window::uniform(&d, 6, 2);
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            let (u, v) = (idx[0] as f64, idx[1] as f64);
            Complex64::new(-0.12 * u * u * v * v, 0.0)
        })
        .unwrap();
        let fit = fit_polynomial(&f, 4).unwrap();
        assert!(fit.residual < 1e-12, "residual {}", fit.residual);
        let p = fit.poly.truncate(1e-10);
        assert_eq!(p.coeffs().len(), 1);
        assert!((p.coeff(&[2, 2]).re + 0.12).abs() < 1e-12);
    }

    #[test]
    fn zero_function_fits_zero() {
        let d = GroupDescriptor::lattice(1);
        let w = Window::uniform(&d, 5, 2);
        let f = LatticeFunction::from_fn(&d, &w, |_| Complex64::new(0.0, 0.0)).unwrap();
        let fit = fit_polynomial(&f, 3).unwrap();
        assert!(fit.poly.is_zero(0.0));
        assert_eq!(fit.residual, 0.0);
    }

    #[test]
    fn degree_exceeded_reports_residual() {
        let d = GroupDescriptor::lattice(1);
        let w = Window::uniform(&d, 6, 2);
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            Complex64::new((idx[0] as f64).powi(3), 0.0)
        })
        .unwrap();
        let err = fit_polynomial_checked(&f, 2, 1e-9).unwrap_err();
        assert!(matches!(err, PolyFdError::ResidualTooLarge { .. }));
        // The cubic itself is recovered exactly at degree 3.
        let fit = fit_polynomial(&f, 3).unwrap();
        assert!(fit.residual < 1e-12);
        assert!((fit.poly.coeff(&[3]).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn window_too_small() {
        let d = GroupDescriptor::lattice(1);
        let w = Window::uniform(&d, 3, 2);
        let f = LatticeFunction::from_fn(&d, &w, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(
            fit_polynomial(&f, 3),
            Err(PolyFdError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn constant_on_finite_domain() {
        let d = GroupDescriptor::cyclic(5).unwrap();
        let w = Window::uniform(&d, 0, 2);
        let f = LatticeFunction::from_fn(&d, &w, |_| Complex64::new(0.75, 0.0)).unwrap();
        let fit = fit_polynomial(&f, 4).unwrap();
        assert!(fit.residual < 1e-15);
        assert!((fit.poly.constant_term().re - 0.75).abs() < 1e-15);
    }

    #[test]
    fn binomial_basis_values() {
        let b = binomial_basis(4);
        // binom(x, 2) = (x^2 - x)/2
        assert_eq!(b[2], vec![0.0, -0.5, 0.5]);
        // Check binom(5, 3) = 10 through the expansion.
        let x = 5.0f64;
        let v: f64 = b[3]
            .iter()
            .enumerate()
            .map(|(m, c)| c * x.powi(m as i32))
            .sum();
        assert!((v - 10.0).abs() < 1e-12);
    }
}
