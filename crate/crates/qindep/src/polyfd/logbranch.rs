use super::lattice::{CoordKind, LatticeFunction};
use super::PolyFdError;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

const VANISH_TOL: f64 = 1e-9;
const SQUARE_TOL: f64 = 1e-6;
const STEP_MARGIN: f64 = 0.2;

/// Continuous-branch logarithm of a non-vanishing function on a window.
///
/// `L` is built by accumulating principal logarithms of step ratios along
/// axis-monotone paths from the origin, so `L(0) = 0` when `f(0) = 1`.
/// Every elementary lattice square must close (log increments around it
/// sum to less than 1e-6) and, on cyclic coordinates, the full fundamental
/// loop must close as well; otherwise no continuous branch exists on the
/// window and `BranchInconsistency` is returned with a witness. Steps
/// whose ratio has argument within 0.2 rad of pi are refused
/// (`StepTooLarge`) rather than silently picking a branch.
pub fn branch_log(f: &LatticeFunction) -> Result<LatticeFunction, PolyFdError> {
    let table = f.tabulate()?;
    let points = table.points();
    // Non-vanishing precondition.
    for p in &points {
        let v = table.eval_index(p)?;
        if v.norm() <= VANISH_TOL {
            return Err(PolyFdError::VanishingValue {
                at: p.clone(),
                modulus: v.norm(),
            });
        }
    }
    let kinds: Vec<CoordKind> = table.kinds().to_vec();
    let dim = kinds.len();

    let step_log = |q: &[i64], p: &[i64]| -> Result<Complex64, PolyFdError> {
        let ratio = table.eval_index(p)? / table.eval_index(q)?;
        let arg = ratio.im.atan2(ratio.re);
        if PI - arg.abs() < STEP_MARGIN {
            return Err(PolyFdError::StepTooLarge {
                at: p.to_vec(),
                arg,
            });
        }
        Ok(Complex64::new(ratio.norm().ln(), arg))
    };

    // Square closure on every coordinate pair, including wrap-around steps
    // on cyclic coordinates.
    let in_window = |p: &[i64]| -> bool {
        p.iter().zip(&kinds).all(|(&c, k)| match k {
            CoordKind::Z { radius } => c.unsigned_abs() <= *radius as u64,
            CoordKind::Cyclic { .. } => true,
        })
    };
    for p in &points {
        for i in 0..dim {
            for j in i + 1..dim {
                let mut pi = p.clone();
                pi[i] += 1;
                let mut pj = p.clone();
                pj[j] += 1;
                let mut pij = p.clone();
                pij[i] += 1;
                pij[j] += 1;
                if !(in_window(&pi) && in_window(&pj) && in_window(&pij)) {
                    continue;
                }
                let holonomy = step_log(p, &pi)? + step_log(&pi, &pij)?
                    - step_log(&pj, &pij)?
                    - step_log(p, &pj)?;
                if holonomy.norm() > SQUARE_TOL {
                    return Err(PolyFdError::BranchInconsistency {
                        at: p.clone(),
                        coords: (i, j),
                        holonomy: holonomy.norm(),
                    });
                }
            }
        }
    }
    // Fundamental loop closure per cyclic coordinate (at the base point;
    // square closure transports it to every other point).
    let base = vec![0i64; dim];
    for (c, kind) in kinds.iter().enumerate() {
        if let CoordKind::Cyclic { len } = kind {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..*len as i64 {
                let mut q = base.clone();
                q[c] = s;
                let mut p = base.clone();
                p[c] = s + 1; // wraps at len via eval reduction
                acc += step_log(&q, &p)?;
            }
            if acc.norm() > SQUARE_TOL {
                return Err(PolyFdError::BranchInconsistency {
                    at: base.clone(),
                    coords: (c, c),
                    holonomy: acc.norm(),
                });
            }
        }
    }

    // Fill by monotone paths: last nonzero coordinate steps toward base.
    let mut values: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
    let base_val = {
        let v = table.eval_index(&base)?;
        Complex64::new(v.norm().ln(), v.im.atan2(v.re))
    };
    values.insert(base.clone(), base_val);
    // Sort points by total displacement so predecessors fill first.
    let mut order: Vec<Vec<i64>> = points.clone();
    order.sort_by_key(|p| p.iter().map(|&c| c.unsigned_abs()).sum::<u64>());
    for p in &order {
        if values.contains_key(p) {
            continue;
        }
        let c = (0..dim)
            .rev()
            .find(|&c| p[c] != 0)
            .expect("non-base point has a nonzero coordinate");
        let mut q = p.clone();
        q[c] -= p[c].signum();
        let prev = *values
            .get(&q)
            .expect("predecessor filled by displacement order");
        values.insert(p.clone(), prev + step_log(&q, p)?);
    }
    LatticeFunction::from_table(table.descriptor(), table.window(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Window;
    use crate::group::GroupDescriptor;

    #[test]
    fn log_of_real_exponential() {
        // f = exp(-0.12 u^2 v^2) > 0: direct log. Radius 3 keeps the
        // smallest value (~6e-5) above the vanishing threshold.
        let d = GroupDescriptor::lattice(2);
        let w = Window::uniform(&d, 3, 2);
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            let (u, v) = (idx[0] as f64, idx[1] as f64);
            Complex64::new((-0.12 * u * u * v * v).exp(), 0.0)
        })
        .unwrap();
        let l = branch_log(&f).unwrap();
        for p in l.points() {
            let (u, v) = (p[0] as f64, p[1] as f64);
            let got = l.eval_index(&p).unwrap();
            assert!((got.re - (-0.12 * u * u * v * v)).abs() < 1e-9, "{p:?}");
            assert!(got.im.abs() < 1e-12);
        }
    }

    #[test]
    fn log_of_one_is_zero() {
        let d = GroupDescriptor::lattice(1);
        let w = Window::uniform(&d, 6, 2);
        let f = LatticeFunction::from_fn(&d, &w, |_| Complex64::new(1.0, 0.0)).unwrap();
        let l = branch_log(&f).unwrap();
        for p in l.points() {
            assert!(l.eval_index(&p).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn unwinds_phase_beyond_principal_branch() {
        // f(n) = exp(i n theta) with theta = 2.0: at n=4 the total phase 8.0
        // exceeds pi but each step is fine, so L(4).im must be 8, not the
        // principal value.
        let d = GroupDescriptor::lattice(1);
        let w = Window::uniform(&d, 4, 2);
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            Complex64::from_polar(1.0, 2.0 * idx[0] as f64)
        })
        .unwrap();
        let l = branch_log(&f).unwrap();
        let v = l.eval_index(&[4]).unwrap();
        assert!((v.im - 8.0).abs() < 1e-12);
        let v = l.eval_index(&[-4]).unwrap();
        assert!((v.im + 8.0).abs() < 1e-12);
    }

    #[test]
    fn vanishing_value_detected() {
        let d = GroupDescriptor::lattice(1);
        let w = Window::uniform(&d, 3, 2);
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            Complex64::new(if idx[0] == 2 { 0.0 } else { 1.0 }, 0.0)
        })
        .unwrap();
        assert!(matches!(
            branch_log(&f),
            Err(PolyFdError::VanishingValue { .. })
        ));
    }

    #[test]
    fn step_near_pi_refused() {
        let d = GroupDescriptor::lattice(1);
        let w = Window::uniform(&d, 2, 2);
        // Steps of argument ~2.99 rad are within 0.2 of pi.
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            Complex64::from_polar(1.0, 2.99 * idx[0] as f64)
        })
        .unwrap();
        assert!(matches!(
            branch_log(&f),
            Err(PolyFdError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn winding_square_detected() {
        // 2x2 grid on Z_2 x Z_2 built so the square's principal-log
        // increments sum to 2 pi i.
        let d = GroupDescriptor::finite(&[2, 2]).unwrap();
        let w = Window::uniform(&d, 0, 2);
        let z = 2.0 * PI / 3.0;
        let f = LatticeFunction::from_fn(&d, &w, move |idx| {
            match (idx[0], idx[1]) {
                (0, 0) => Complex64::new(1.0, 0.0),
                (1, 0) => Complex64::from_polar(1.0, z),
                (1, 1) => Complex64::from_polar(1.0, -z), // = e^{2 z i} principal
                (0, 1) => Complex64::from_polar(1.0, -z),
                _ => unreachable!(),
            }
        })
        .unwrap();
        // Path right-then-up accumulates z + z; path up-then-right
        // accumulates -z + 0: discrepancy 3z = 2 pi.
        let err = branch_log(&f).unwrap_err();
        assert!(matches!(err, PolyFdError::BranchInconsistency { .. }), "{err:?}");
    }

    #[test]
    fn cyclic_winding_loop_detected() {
        // On Z_5, f(j) = exp(2 pi i j / 5) is the character itself: each
        // step has argument 2 pi / 5 but the loop winds once around.
        let d = GroupDescriptor::cyclic(5).unwrap();
        let w = Window::uniform(&d, 0, 2);
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            Complex64::from_polar(1.0, 2.0 * PI * idx[0] as f64 / 5.0)
        })
        .unwrap();
        assert!(matches!(
            branch_log(&f),
            Err(PolyFdError::BranchInconsistency { .. })
        ));
    }

    #[test]
    fn round_trip_log_exp_identity() {
        let d = GroupDescriptor::lattice(1);
        let w = Window::uniform(&d, 6, 2);
        // polynomial bounded by 50 on the window
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            let n = idx[0] as f64;
            Complex64::new((0.9 * n * n - 0.05 * n).exp(), 0.0)
        })
        .unwrap();
        let l = branch_log(&f).unwrap();
        for p in l.points() {
            let n = p[0] as f64;
            assert!((l.eval_index(&p).unwrap().re - (0.9 * n * n - 0.05 * n)).abs() < 1e-9);
        }
    }
}
