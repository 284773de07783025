use super::certificate::{Certificate, Witness};
use super::{canonical_pairs, CharacterizeError, EQ_TOL, VANISH_TOL};
use crate::dist::{CharFn, Window};
use crate::group::GroupDescriptor;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Per-point data for the Gaussian functional equation: `phi = -log |f|`
/// and the unit phase.
pub(crate) struct PhaseSplit {
    pub phi: BTreeMap<Vec<i64>, f64>,
    pub phase: BTreeMap<Vec<i64>, Complex64>,
}

/// Split `f` into modulus-log and phase on the window. Closed forms use
/// the exact continuous logarithm (their modulus never vanishes); sampled
/// forms are guarded by the vanishing threshold.
pub(crate) fn phase_split(
    f: &CharFn,
    window: &Window,
    desc: &GroupDescriptor,
    filter: impl Fn(&[i64]) -> bool,
) -> Result<PhaseSplit, CharacterizeError> {
    let mut phi = BTreeMap::new();
    let mut phase = BTreeMap::new();
    let closed = f.has_closed_form_log();
    for idx in window.iter_indices(desc) {
        if !filter(&idx) {
            continue;
        }
        let y = window.element_at(desc, &idx)?;
        if closed {
            let l = f
                .closed_form_log(&y)
                .expect("closed form available on the support");
            phi.insert(idx.clone(), -l.re);
            phase.insert(idx, Complex64::from_polar(1.0, l.im));
        } else {
            let v = f.eval(&y)?;
            if v.norm() <= VANISH_TOL {
                return Err(CharacterizeError::VanishingValue(y));
            }
            phi.insert(idx.clone(), -v.norm().ln());
            phase.insert(idx, v / v.norm());
        }
    }
    Ok(PhaseSplit { phi, phase })
}

pub(crate) struct GaussStats {
    pub min_phi: f64,
    pub worst_parallelogram: f64,
    pub worst_phase: f64,
    pub first_failure: Option<(Vec<i64>, Vec<i64>, f64)>,
    pub pairs_checked: usize,
}

/// Scan the parallelogram identity `phi(u+v) + phi(u-v) = 2 phi(u) + 2
/// phi(v)` and the multiplicativity of the phase over all window pairs
/// whose combinations stay inside the sampled set, in canonical order.
pub(crate) fn gaussian_scan(split: &PhaseSplit) -> GaussStats {
    let points: Vec<Vec<i64>> = split.phi.keys().cloned().collect();
    let mut stats = GaussStats {
        min_phi: f64::INFINITY,
        worst_parallelogram: 0.0,
        worst_phase: 0.0,
        first_failure: None,
        pairs_checked: 0,
    };
    for v in split.phi.values() {
        stats.min_phi = stats.min_phi.min(*v);
    }
    for (u, v) in canonical_pairs(&points) {
        let sum: Vec<i64> = u.iter().zip(&v).map(|(&a, &b)| a + b).collect();
        let diff: Vec<i64> = u.iter().zip(&v).map(|(&a, &b)| a - b).collect();
        let (Some(&psum), Some(&pdiff)) = (split.phi.get(&sum), split.phi.get(&diff)) else {
            continue;
        };
        let (pu, pv) = (split.phi[&u], split.phi[&v]);
        stats.pairs_checked += 1;
        let par = (psum + pdiff - 2.0 * pu - 2.0 * pv).abs();
        let phase = (split.phase[&sum] - split.phase[&u] * split.phase[&v]).norm();
        stats.worst_parallelogram = stats.worst_parallelogram.max(par);
        stats.worst_phase = stats.worst_phase.max(phase);
        let worst_here = par.max(phase);
        if worst_here > EQ_TOL && stats.first_failure.is_none() {
            stats.first_failure = Some((u.clone(), v.clone(), worst_here));
        }
    }
    stats
}

/// Certify that `f` is the characteristic function of a Gaussian
/// distribution (including degenerate ones): `phi = -log |f|` must be
/// nonnegative and satisfy the parallelogram identity on every window
/// pair, and the phase must be multiplicative (a character). The witness
/// on failure is the first failing pair in canonical scan order; the
/// margins carry the worst residuals over all pairs.
pub fn gaussianity_check(f: &CharFn, window: &Window) -> Result<Certificate, CharacterizeError> {
    let desc = f.dual_owner();
    window.matches(&desc)?;
    let split = phase_split(f, window, &desc, |_| true)?;
    let stats = gaussian_scan(&split);
    let nonneg = stats.min_phi >= -EQ_TOL;
    let pass = nonneg && stats.first_failure.is_none();
    let mut cert = Certificate::leaf("gaussian characteristic function", pass)
        .margin("worst_parallelogram_residual", stats.worst_parallelogram)
        .margin("worst_phase_residual", stats.worst_phase)
        .margin("min_phi", stats.min_phi);
    if let Some((u, v, r)) = &stats.first_failure {
        let ue = window.element_at(&desc, u)?;
        let ve = window.element_at(&desc, v)?;
        cert = cert.with_witness(Witness::at(
            "first pair violating the parallelogram/phase identity",
            vec![ue, ve],
            *r,
        ));
    } else if !nonneg {
        cert = cert.with_witness(Witness::at(
            "phi attains a negative value",
            vec![],
            stats.min_phi,
        ));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::exp_poly_charfn;
    use crate::group::GroupElement;
    use crate::polyfd::PolynomialFn;
    use crate::rat::rat;

    fn on_z(terms: &[(&[u32], f64)]) -> CharFn {
        let x = GroupDescriptor::torus(1);
        let phi = PolynomialFn::from_real_terms(&x.dual(), terms).unwrap();
        exp_poly_charfn(GroupElement::zero(&x), phi).unwrap()
    }

    #[test]
    fn gaussians_pass() {
        for sigma in [0.0, 0.3, 1.0, 5.0] {
            let f = on_z(&[(&[2], sigma)]);
            let cert = gaussianity_check(&f, &Window::uniform(&f.dual_owner(), 8, 2)).unwrap();
            assert!(cert.pass, "sigma = {sigma}");
        }
    }

    #[test]
    fn quartic_fails_with_first_witness() {
        let b = 0.01;
        let f = on_z(&[(&[2], 1.0), (&[4], b)]);
        let cert = gaussianity_check(&f, &Window::uniform(&f.dual_owner(), 8, 2)).unwrap();
        assert!(!cert.pass);
        let w = cert.witness.unwrap();
        assert_eq!(w.points[0].z_coords(), &[1]);
        assert_eq!(w.points[1].z_coords(), &[1]);
        assert!((w.value.unwrap() - 12.0 * b).abs() < 1e-9);
    }

    #[test]
    fn degenerate_passes_with_zero_phi() {
        let x = GroupDescriptor::torus(1);
        let shift = GroupElement::new(x.clone(), vec![], vec![rat(2, 7)], vec![]).unwrap();
        let f = exp_poly_charfn(shift, PolynomialFn::zero(&x.dual())).unwrap();
        let cert = gaussianity_check(&f, &Window::uniform(&f.dual_owner(), 8, 2)).unwrap();
        assert!(cert.pass);
        assert!(cert.margin_value("min_phi").unwrap().abs() < 1e-12);
    }

    #[test]
    fn unimodular_non_character_phase_fails() {
        // |f| = 1 with a quadratic phase is not a character.
        let z5 = GroupDescriptor::cyclic(5).unwrap();
        let mut values = std::collections::BTreeMap::new();
        for j in 0..5i64 {
            values.insert(
                vec![j],
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * ((j * j) as f64) / 5.0),
            );
        }
        let f = CharFn::Table(crate::dist::TableCharFn {
            dual: z5.clone(),
            window: Window::uniform(&z5, 0, 2),
            values,
        });
        let cert = gaussianity_check(&f, &Window::uniform(&z5, 0, 2)).unwrap();
        assert!(!cert.pass);
        // A genuine character passes.
        let mut values = std::collections::BTreeMap::new();
        for j in 0..5i64 {
            values.insert(
                vec![j],
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (2.0 * j as f64) / 5.0),
            );
        }
        let f = CharFn::Table(crate::dist::TableCharFn {
            dual: z5.clone(),
            window: Window::uniform(&z5, 0, 2),
            values,
        });
        let cert = gaussianity_check(&f, &Window::uniform(&z5, 0, 2)).unwrap();
        assert!(cert.pass);
    }
}
