use super::PolyFdError;
use crate::dist::{CharFn, Window};
use crate::group::{GroupDescriptor, GroupElement};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Per-coordinate shape of a sampled dual group: a `Z` box or a cyclic
/// range (circle grid points or a finite factor).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CoordKind {
    Z { radius: u32 },
    Cyclic { len: u32 },
}

fn coord_kinds(desc: &GroupDescriptor, window: &Window) -> Vec<CoordKind> {
    let mut kinds = Vec::new();
    for &w in &window.z_radii {
        kinds.push(CoordKind::Z { radius: w });
    }
    for &m in &window.t_grids {
        kinds.push(CoordKind::Cyclic { len: m });
    }
    for &n in desc.finite_orders() {
        kinds.push(CoordKind::Cyclic { len: n as u32 });
    }
    kinds
}

type EvalFn = dyn Fn(&[i64]) -> Result<Complex64, PolyFdError> + Send + Sync;

#[derive(Clone)]
enum Source {
    /// Evaluable at any lattice point (cyclic coordinates wrap).
    Closure(Arc<EvalFn>),
    /// Window-bound table keyed by index vectors.
    Table(Arc<BTreeMap<Vec<i64>, Complex64>>),
}

/// A function sampled (or evaluable) on a window of a dual group.
///
/// Index convention: `Z` coordinates carry their integer value, circle
/// coordinates carry the grid index `j` for the angle `j/M`, finite
/// coordinates their reduced value.
#[derive(Clone)]
pub struct LatticeFunction {
    desc: GroupDescriptor,
    window: Window,
    kinds: Vec<CoordKind>,
    source: Source,
}

impl std::fmt::Debug for LatticeFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "LatticeFunction({} on {:?}, {})",
            self.desc,
            self.window,
            match self.source {
                Source::Closure(_) => "closure",
                Source::Table(_) => "table",
            }
        )
    }
}

impl LatticeFunction {
    /// Function given by a closure, evaluable on the whole lattice.
    pub fn from_fn(
        desc: &GroupDescriptor,
        window: &Window,
        f: impl Fn(&[i64]) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self, PolyFdError> {
        window.matches(desc)?;
        Ok(LatticeFunction {
            desc: desc.clone(),
            window: window.clone(),
            kinds: coord_kinds(desc, window),
            source: Source::Closure(Arc::new(move |idx| Ok(f(idx)))),
        })
    }

    pub fn from_fallible_fn(
        desc: &GroupDescriptor,
        window: &Window,
        f: impl Fn(&[i64]) -> Result<Complex64, PolyFdError> + Send + Sync + 'static,
    ) -> Result<Self, PolyFdError> {
        window.matches(desc)?;
        Ok(LatticeFunction {
            desc: desc.clone(),
            window: window.clone(),
            kinds: coord_kinds(desc, window),
            source: Source::Closure(Arc::new(f)),
        })
    }

    /// Eagerly tabulated restriction of a characteristic function.
    pub fn from_charfn(f: &CharFn, window: &Window) -> Result<Self, PolyFdError> {
        let desc = f.dual_owner();
        window.matches(&desc)?;
        let mut values = BTreeMap::new();
        for idx in window.iter_indices(&desc) {
            let y = window.element_at(&desc, &idx)?;
            values.insert(idx, f.eval(&y)?);
        }
        Ok(LatticeFunction {
            kinds: coord_kinds(&desc, window),
            desc,
            window: window.clone(),
            source: Source::Table(Arc::new(values)),
        })
    }

    pub fn from_table(
        desc: &GroupDescriptor,
        window: &Window,
        values: BTreeMap<Vec<i64>, Complex64>,
    ) -> Result<Self, PolyFdError> {
        window.matches(desc)?;
        Ok(LatticeFunction {
            desc: desc.clone(),
            window: window.clone(),
            kinds: coord_kinds(desc, window),
            source: Source::Table(Arc::new(values)),
        })
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.desc
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn kinds(&self) -> &[CoordKind] {
        &self.kinds
    }

    /// All window index vectors.
    pub fn points(&self) -> Vec<Vec<i64>> {
        self.window.iter_indices(&self.desc)
    }

    fn reduce(&self, idx: &[i64]) -> Vec<i64> {
        idx.iter()
            .zip(&self.kinds)
            .map(|(&c, kind)| match kind {
                CoordKind::Z { .. } => c,
                CoordKind::Cyclic { len } => c.rem_euclid(*len as i64),
            })
            .collect()
    }

    pub fn eval_index(&self, idx: &[i64]) -> Result<Complex64, PolyFdError> {
        let idx = self.reduce(idx);
        match &self.source {
            Source::Closure(f) => f(&idx),
            Source::Table(t) => t
                .get(&idx)
                .copied()
                .ok_or(PolyFdError::WindowExhausted),
        }
    }

    /// Convert a shift element of the group to an index shift: free values
    /// on `Z` coordinates, grid steps on circle coordinates (which must lie
    /// on the grid).
    pub fn shift_index(&self, h: &GroupElement) -> Result<Vec<i64>, PolyFdError> {
        if h.owner() != &self.desc {
            return Err(PolyFdError::Group(
                crate::group::GroupError::MismatchedGroups(
                    self.desc.to_string(),
                    h.owner().to_string(),
                ),
            ));
        }
        let mut idx: Vec<i64> = h.z_coords().to_vec();
        for (a, &m) in h.t_coords().iter().zip(&self.window.t_grids) {
            let scaled = a * crate::rat::rat_int(m as i64);
            if !crate::rat::is_integer(&scaled) {
                return Err(PolyFdError::OffGrid(format!(
                    "shift angle {} is not a multiple of 1/{m}",
                    crate::rat::format_rat(a)
                )));
            }
            let j: i64 = scaled
                .numer()
                .try_into()
                .map_err(|_| PolyFdError::OffGrid("shift numerator too large".into()))?;
            idx.push(j.rem_euclid(m as i64));
        }
        idx.extend_from_slice(h.f_coords());
        Ok(idx)
    }

    /// Snapshot into an explicit table over the current window.
    pub fn tabulate(&self) -> Result<Self, PolyFdError> {
        let mut values = BTreeMap::new();
        for idx in self.points() {
            values.insert(idx.clone(), self.eval_index(&idx)?);
        }
        Ok(LatticeFunction {
            desc: self.desc.clone(),
            window: self.window.clone(),
            kinds: self.kinds.clone(),
            source: Source::Table(Arc::new(values)),
        })
    }

    /// Maximum modulus over the window.
    pub fn sup_norm(&self) -> Result<f64, PolyFdError> {
        let mut m = 0.0f64;
        for idx in self.points() {
            m = m.max(self.eval_index(&idx)?.norm());
        }
        Ok(m)
    }
}

/// Finite difference `Delta_h f (y) = f(y + h) - f(y)`.
///
/// The window shrinks by `|h_i|` on every shifted `Z` coordinate; cyclic
/// coordinates wrap. Errors with `WindowExhausted` when a shrunken box
/// becomes empty.
pub fn delta(h: &[i64], f: &LatticeFunction) -> Result<LatticeFunction, PolyFdError> {
    if h.len() != f.kinds.len() {
        return Err(PolyFdError::OffGrid(format!(
            "shift arity {} does not match {} coordinates",
            h.len(),
            f.kinds.len()
        )));
    }
    let mut new_window = f.window.clone();
    for (i, kind) in f.kinds.iter().enumerate() {
        if let CoordKind::Z { radius } = kind {
            let shrink = h[i].unsigned_abs();
            if shrink > *radius as u64 {
                return Err(PolyFdError::WindowExhausted);
            }
            new_window.z_radii[i] = radius - shrink as u32;
        }
    }
    let parent = f.clone();
    let shift = h.to_vec();
    let eval = move |idx: &[i64]| -> Result<Complex64, PolyFdError> {
        let shifted: Vec<i64> = idx.iter().zip(&shift).map(|(&a, &b)| a + b).collect();
        Ok(parent.eval_index(&shifted)? - parent.eval_index(idx)?)
    };
    Ok(LatticeFunction {
        desc: f.desc.clone(),
        window: new_window.clone(),
        kinds: coord_kinds(&f.desc, &new_window),
        source: Source::Closure(Arc::new(eval)),
    })
}

/// Outcome of polynomial-degree detection.
#[derive(Clone, Debug, PartialEq)]
pub enum DegreeOutcome {
    Degree(usize),
    NotPolynomial { witness: Vec<i64>, residual: f64 },
}

/// Smallest `n <= d_max` such that every iterated unit-coordinate
/// difference of total order `n + 1` vanishes on the window (within
/// `tol`), together with constancy along all compact coordinates.
pub fn polynomial_degree(
    f: &LatticeFunction,
    d_max: usize,
    tol: f64,
) -> Result<DegreeOutcome, PolyFdError> {
    let z_coords: Vec<usize> = f
        .kinds
        .iter()
        .enumerate()
        .filter_map(|(i, k)| matches!(k, CoordKind::Z { .. }).then_some(i))
        .collect();
    for &i in &z_coords {
        let CoordKind::Z { radius } = f.kinds[i] else {
            unreachable!()
        };
        let need = d_max as u32 + 2;
        if radius < need {
            return Err(PolyFdError::WindowTooSmall {
                coord: i,
                need,
                have: radius,
            });
        }
    }
    // Constancy along compact coordinates.
    for idx in f.points() {
        let mut base = idx.clone();
        for (i, kind) in f.kinds.iter().enumerate() {
            if matches!(kind, CoordKind::Cyclic { .. }) {
                base[i] = 0;
            }
        }
        let r = (f.eval_index(&idx)? - f.eval_index(&base)?).norm();
        if r > tol {
            return Ok(DegreeOutcome::NotPolynomial {
                witness: idx,
                residual: r,
            });
        }
    }
    if z_coords.is_empty() {
        return Ok(DegreeOutcome::Degree(0));
    }
    let mut worst = (vec![], 0.0f64);
    for n in 0..=d_max {
        let mut all_vanish = true;
        worst = (vec![], 0.0);
        for alpha in compositions(n + 1, z_coords.len()) {
            // Map alpha onto full coordinate arity.
            let mut shift_orders = vec![0u32; f.kinds.len()];
            for (pos, &zc) in z_coords.iter().enumerate() {
                shift_orders[zc] = alpha[pos];
            }
            let (witness, residual) = max_forward_difference(f, &shift_orders)?;
            if residual > worst.1 {
                worst = (witness, residual);
            }
            if residual > tol {
                all_vanish = false;
            }
        }
        if all_vanish {
            return Ok(DegreeOutcome::Degree(n));
        }
    }
    Ok(DegreeOutcome::NotPolynomial {
        witness: worst.0,
        residual: worst.1,
    })
}

/// Largest modulus of the iterated forward difference `Delta^orders f`
/// over the points where it is defined, with an arg-max witness.
fn max_forward_difference(
    f: &LatticeFunction,
    orders: &[u32],
) -> Result<(Vec<i64>, f64), PolyFdError> {
    // Valid points: on each Z coordinate, p_i in [-W_i, W_i - orders_i].
    for (i, kind) in f.kinds.iter().enumerate() {
        if let CoordKind::Z { radius } = kind {
            if orders[i] > 2 * radius {
                return Err(PolyFdError::WindowExhausted);
            }
        }
    }
    let mut worst = (vec![], 0.0f64);
    'points: for p in f.points() {
        for (i, kind) in f.kinds.iter().enumerate() {
            if let CoordKind::Z { radius } = kind {
                if p[i] + orders[i] as i64 > *radius as i64 {
                    continue 'points;
                }
            }
        }
        let v = forward_difference_at(f, orders, &p)?;
        if v.norm() > worst.1 {
            worst = (p, v.norm());
        }
    }
    Ok(worst)
}

/// `Delta^orders f (p)` by the inclusion-exclusion formula
/// `sum_beta (-1)^{|orders - beta|} C(orders, beta) f(p + beta)`.
pub(crate) fn forward_difference_at(
    f: &LatticeFunction,
    orders: &[u32],
    p: &[i64],
) -> Result<Complex64, PolyFdError> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut beta = vec![0u32; orders.len()];
    loop {
        let mut coef = 1.0f64;
        let mut parity = 0u32;
        for (b, o) in beta.iter().zip(orders) {
            coef *= binomial(*o, *b);
            parity += o - b;
        }
        if parity % 2 == 1 {
            coef = -coef;
        }
        let q: Vec<i64> = p
            .iter()
            .zip(&beta)
            .map(|(&a, &b)| a + b as i64)
            .collect();
        acc += coef * f.eval_index(&q)?;
        // advance beta through the box [0, orders]
        let mut i = beta.len();
        loop {
            if i == 0 {
                return Ok(acc);
            }
            i -= 1;
            if orders[i] == 0 {
                continue;
            }
            beta[i] += 1;
            if beta[i] <= orders[i] {
                break;
            }
            beta[i] = 0;
        }
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// All multi-indices of the given total over `vars` variables.
pub(crate) fn compositions(total: usize, vars: usize) -> Vec<Vec<u32>> {
    if vars == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, vars - 1) {
            let mut v = vec![first as u32];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_line(w: u32) -> (GroupDescriptor, Window) {
        let d = GroupDescriptor::lattice(1);
        let win = Window::uniform(&d, w, 2);
        (d, win)
    }

    #[test]
    fn delta_of_square_is_linear() {
        let (d, w) = z_line(8);
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            Complex64::new((idx[0] * idx[0]) as f64, 0.0)
        })
        .unwrap();
        let g = delta(&[1], &f).unwrap();
        for n in -7i64..=7 {
            let v = g.eval_index(&[n]).unwrap();
            assert!((v.re - (2 * n + 1) as f64).abs() < 1e-12);
        }
        assert_eq!(g.window().z_radii, vec![7]);
    }

    #[test]
    fn third_difference_of_square_vanishes() {
        let (d, w) = z_line(8);
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            Complex64::new((idx[0] * idx[0]) as f64, 0.0)
        })
        .unwrap();
        let g = delta(&[1], &delta(&[1], &delta(&[1], &f).unwrap()).unwrap()).unwrap();
        for n in -5i64..=5 {
            assert!(g.eval_index(&[n]).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn delta_of_constant_vanishes() {
        let (d, w) = z_line(4);
        let f = LatticeFunction::from_fn(&d, &w, |_| Complex64::new(3.25, -1.0)).unwrap();
        let g = delta(&[2], &f).unwrap();
        for n in -2i64..=2 {
            assert!(g.eval_index(&[n]).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn window_exhaustion() {
        let (d, w) = z_line(2);
        let f = LatticeFunction::from_fn(&d, &w, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(delta(&[3], &f), Err(PolyFdError::WindowExhausted)));
    }

    #[test]
    fn degree_detection_quartic() {
        let (d, w) = z_line(8);
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            Complex64::new((idx[0] as f64).powi(4), 0.0)
        })
        .unwrap();
        assert_eq!(
            polynomial_degree(&f, 6, 1e-9).unwrap(),
            DegreeOutcome::Degree(4)
        );
    }

    #[test]
    fn exponential_is_not_polynomial() {
        let (d, w) = z_line(8);
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            Complex64::new(2.0f64.powi(idx[0] as i32), 0.0)
        })
        .unwrap();
        assert!(matches!(
            polynomial_degree(&f, 6, 1e-9).unwrap(),
            DegreeOutcome::NotPolynomial { .. }
        ));
    }

    #[test]
    fn window_too_small_detected() {
        let (d, w) = z_line(5);
        let f = LatticeFunction::from_fn(&d, &w, |_| Complex64::new(0.0, 0.0)).unwrap();
        assert!(matches!(
            polynomial_degree(&f, 6, 1e-9),
            Err(PolyFdError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn finite_group_functions_constancy() {
        // On Z_5 a function is a polynomial iff constant.
        let d = GroupDescriptor::cyclic(5).unwrap();
        let w = Window::uniform(&d, 0, 2);
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            Complex64::new(if idx[0] == 0 { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        assert!(matches!(
            polynomial_degree(&f, 3, 1e-9).unwrap(),
            DegreeOutcome::NotPolynomial { .. }
        ));
        let c = LatticeFunction::from_fn(&d, &w, |_| Complex64::new(0.5, 0.0)).unwrap();
        assert_eq!(
            polynomial_degree(&c, 3, 1e-9).unwrap(),
            DegreeOutcome::Degree(0)
        );
    }

    #[test]
    fn mixed_differences_commute() {
        let d = GroupDescriptor::lattice(2);
        let w = Window::uniform(&d, 6, 2);
        let f = LatticeFunction::from_fn(&d, &w, |idx| {
            Complex64::new(
                (idx[0].pow(3) + 2 * idx[0] * idx[1] + idx[1].pow(2)) as f64,
                0.0,
            )
        })
        .unwrap();
        let d12 = delta(&[0, 2], &delta(&[1, 0], &f).unwrap()).unwrap();
        let d21 = delta(&[1, 0], &delta(&[0, 2], &f).unwrap()).unwrap();
        for p in d12.points() {
            let a = d12.eval_index(&p).unwrap();
            let b = d21.eval_index(&p).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }
}
