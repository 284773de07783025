use super::lattice::{CoordKind, LatticeFunction};
use super::poly::PolynomialFn;
use super::PolyFdError;
use crate::dist::Window;
use crate::group::{GroupDescriptor, Homomorphism};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which functional equation the cascade solves by elimination.
#[derive(Clone, Debug)]
pub enum CascadeMode {
    /// `sum_j phi_j(a_j u + b_j v) = P(u) + Q(v) - q(u, v)` with
    /// `P(u) = sum_j phi_j(a_j u)`, `Q(v) = sum_j phi_j(b_j v)`.
    SkitovichDarmois { a: Vec<i64>, b: Vec<i64> },
    /// `sum_j [phi_j(u + adj(delta_j) v) - phi_j(u - adj(delta_j) v)] = -q(u, v)`;
    /// the deltas are automorphisms of `X` and act on `Y` through their
    /// adjoints.
    Heyde { deltas: Vec<Homomorphism> },
}

/// How the arbitrary shift elements of each elimination step are chosen.
#[derive(Clone, Debug)]
pub enum ShiftSchedule {
    /// Seeded uniform draws: `Z` coordinates in `[-bound, bound]`
    /// (redrawn when the whole vector is zero), cyclic coordinates over
    /// their range.
    Seeded { seed: u64, bound: u32 },
    /// Explicit index vectors, consumed in order (base steps first, then
    /// the conclusion shifts).
    Explicit(Vec<Vec<i64>>),
}

pub struct CascadeSpec {
    pub mode: CascadeMode,
    /// One lattice function per random variable, on the dual group `Y`.
    pub phis: Vec<LatticeFunction>,
    /// Defect polynomial on `Y^2`, in the characteristic-function-side
    /// convention produced by the defect extractors.
    pub q: PolynomialFn,
    /// Window on `Y`; identities are verified on its square.
    pub window: Window,
    pub shifts: ShiftSchedule,
    /// Base-equation tolerance (default 1e-9).
    pub tol_base: f64,
    /// Intermediate/terminal identity tolerance (default 1e-8).
    pub tol_step: f64,
}

#[derive(Clone, Debug)]
pub struct CascadeStep {
    pub index: usize,
    /// The arbitrary element of this step (`h_m`, or `k_p` for the
    /// conditional-symmetry cascade), as an index vector on `Y`.
    pub shift: Vec<i64>,
    pub u_shift: Vec<i64>,
    pub v_shift: Vec<i64>,
    pub eliminated: Vec<String>,
    /// Per surviving term, the shift element of the difference operator it
    /// received (the `l`-shifts).
    pub term_shifts: Vec<(String, Vec<i64>)>,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct ConclusionCheck {
    pub description: String,
    pub shifts: Vec<Vec<i64>>,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct EliminationTrace {
    pub mode_label: String,
    pub base_residual: f64,
    pub steps: Vec<CascadeStep>,
    pub terminal_residual: f64,
    /// Fitted degree `l` of the defect polynomial, as used by the
    /// conclusion check.
    pub q_degree: usize,
    pub conclusion: ConclusionCheck,
}

struct Term {
    label: String,
    j: usize,
    sign: f64,
    /// +1/-1 multiplier on the adjoint part of the argument (conditional
    /// symmetry); unused for linear forms.
    arg_sign: i64,
    shifts: Vec<Vec<i64>>,
    alive: bool,
}

/// Replay the finite-difference elimination proof on concrete lattice
/// functions, verifying every intermediate identity numerically.
pub fn elimination_cascade(spec: &CascadeSpec) -> Result<EliminationTrace, PolyFdError> {
    let n = spec.phis.len();
    assert!(n >= 2, "cascade needs at least two variables");
    let y_desc = spec.phis[0].descriptor().clone();
    spec.window.matches(&y_desc)?;
    let pair_desc = y_desc
        .power(2)
        .map_err(crate::group::GroupError::Descriptor)?;
    if spec.q.owner() != &pair_desc {
        return Err(PolyFdError::Group(
            crate::group::GroupError::MismatchedGroups(
                pair_desc.to_string(),
                spec.q.owner().to_string(),
            ),
        ));
    }

    let dim = spec.phis[0].kinds().len();
    let mut draw = ShiftDraw::new(&spec.shifts, spec.phis[0].kinds());

    // Argument maps per term. For linear forms arg = a_j u + b_j v; for
    // conditional symmetry arg = u +- adj(delta_j) v.
    let adjoints: Vec<Homomorphism> = match &spec.mode {
        CascadeMode::SkitovichDarmois { a, b } => {
            assert_eq!(a.len(), n, "coefficient arity");
            assert_eq!(b.len(), n, "coefficient arity");
            vec![]
        }
        CascadeMode::Heyde { deltas } => {
            assert_eq!(deltas.len(), n, "delta arity");
            for (i, d) in deltas.iter().enumerate() {
                if !d.is_automorphism() {
                    return Err(PolyFdError::Group(
                        crate::group::GroupError::NotAnAutomorphism(format!("delta_{}", i + 1)),
                    ));
                }
            }
            deltas.iter().map(|d| d.adjoint()).collect()
        }
    };
    let adj_on_index = |j: usize, idx: &[i64]| -> Result<Vec<i64>, PolyFdError> {
        let e = spec.window.element_at(&y_desc, idx)?;
        let img = adjoints[j].apply(&e)?;
        unbounded_index(&y_desc, &spec.window, &img)
    };

    let mut terms: Vec<Term> = match &spec.mode {
        CascadeMode::SkitovichDarmois { .. } => (0..n)
            .map(|j| Term {
                label: format!("phi_{}", j + 1),
                j,
                sign: 1.0,
                arg_sign: 1,
                shifts: vec![],
                alive: true,
            })
            .collect(),
        CascadeMode::Heyde { .. } => {
            let mut v: Vec<Term> = (0..n)
                .map(|j| Term {
                    label: format!("phi_{}(+)", j + 1),
                    j,
                    sign: 1.0,
                    arg_sign: 1,
                    shifts: vec![],
                    alive: true,
                })
                .collect();
            v.extend((0..n).map(|j| Term {
                label: format!("phi_{}(-)", j + 1),
                j,
                sign: -1.0,
                arg_sign: -1,
                shifts: vec![],
                alive: true,
            }));
            v
        }
    };

    // RHS state: shift lists for P, Q (linear forms only) and pair-shift
    // list for q.
    let mut p_shifts: Vec<Vec<i64>> = vec![];
    let mut q_v_shifts: Vec<Vec<i64>> = vec![];
    let mut qpoly_shifts: Vec<Vec<i64>> = vec![]; // stacked (u,v) shifts on Y^2

    let term_arg = |t: &Term, u: &[i64], v: &[i64]| -> Result<Vec<i64>, PolyFdError> {
        match &spec.mode {
            CascadeMode::SkitovichDarmois { a, b } => Ok(u
                .iter()
                .zip(v)
                .map(|(&uu, &vv)| a[t.j] * uu + b[t.j] * vv)
                .collect()),
            CascadeMode::Heyde { .. } => {
                let av = adj_on_index(t.j, v)?;
                Ok(u
                    .iter()
                    .zip(&av)
                    .map(|(&uu, &vv)| uu + t.arg_sign * vv)
                    .collect())
            }
        }
    };

    let phi_eval = |j: usize, shifts: &[Vec<i64>], at: &[i64]| -> Result<Complex64, PolyFdError> {
        iterated_delta_eval(|p| spec.phis[j].eval_index(p), shifts, at)
    };

    // P(u) = sum phi_j(a_j u), Q(v) = sum phi_j(b_j v) (linear forms).
    let rhs_pq = |coeffs: &[i64], shifts: &[Vec<i64>], at: &[i64]| -> Result<Complex64, PolyFdError> {
        iterated_delta_eval(
            |p| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &c) in coeffs.iter().enumerate() {
                    let scaled: Vec<i64> = p.iter().map(|&x| c * x).collect();
                    acc += spec.phis[j].eval_index(&scaled)?;
                }
                Ok(acc)
            },
            shifts,
            at,
        )
    };

    let q_eval = |shifts: &[Vec<i64>], u: &[i64], v: &[i64]| -> Result<Complex64, PolyFdError> {
        let stacked: Vec<i64> = u.iter().chain(v.iter()).copied().collect();
        iterated_delta_eval(
            |p| {
                let z = pair_z_part(&y_desc, p);
                Ok(spec.q.eval_z(&z))
            },
            shifts,
            &stacked,
        )
    };

    let u_points = spec.window.iter_indices(&y_desc);

    // Residual of the current identity over the pair window.
    let identity_residual = |terms: &[Term],
                             p_shifts: &[Vec<i64>],
                             q_v_shifts: &[Vec<i64>],
                             qpoly_shifts: &[Vec<i64>]|
     -> Result<(f64, Vec<i64>), PolyFdError> {
        let mut worst = (0.0f64, vec![]);
        for u in &u_points {
            for v in &u_points {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in terms.iter().filter(|t| t.alive) {
                    let arg = term_arg(t, u, v)?;
                    acc += t.sign * phi_eval(t.j, &t.shifts, &arg)?;
                }
                match &spec.mode {
                    CascadeMode::SkitovichDarmois { a, b } => {
                        acc -= rhs_pq(a, p_shifts, u)?;
                        acc -= rhs_pq(b, q_v_shifts, v)?;
                        acc += q_eval(qpoly_shifts, u, v)?;
                    }
                    CascadeMode::Heyde { .. } => {
                        acc += q_eval(qpoly_shifts, u, v)?;
                    }
                }
                if acc.norm() > worst.0 {
                    worst = (
                        acc.norm(),
                        u.iter().chain(v.iter()).copied().collect(),
                    );
                }
            }
        }
        Ok(worst)
    };

    let (base_residual, base_at) =
        identity_residual(&terms, &p_shifts, &q_v_shifts, &qpoly_shifts)?;
    if base_residual > spec.tol_base {
        return Err(PolyFdError::BaseEquationViolated {
            at: base_at,
            residual: base_residual,
        });
    }

    let mut steps: Vec<CascadeStep> = Vec::new();
    let push_step = |terms: &mut Vec<Term>,
                         steps: &mut Vec<CascadeStep>,
                         shift: Vec<i64>,
                         u_shift: Vec<i64>,
                         v_shift: Vec<i64>,
                         new_shifts: Vec<(usize, Vec<i64>)>,
                         p_shifts: &Vec<Vec<i64>>,
                         q_v_shifts: &Vec<Vec<i64>>,
                         qpoly_shifts: &Vec<Vec<i64>>|
     -> Result<(), PolyFdError> {
        let mut eliminated = Vec::new();
        let mut term_shifts = Vec::new();
        for (ti, w) in new_shifts {
            if w.iter().all(|&c| c == 0) {
                terms[ti].alive = false;
                eliminated.push(terms[ti].label.clone());
            } else {
                term_shifts.push((terms[ti].label.clone(), w.clone()));
                terms[ti].shifts.push(w);
            }
        }
        let (residual, _) = identity_residual(terms, p_shifts, q_v_shifts, qpoly_shifts)?;
        let index = steps.len() + 1;
        steps.push(CascadeStep {
            index,
            shift,
            u_shift,
            v_shift,
            eliminated,
            term_shifts,
            residual,
        });
        if residual > spec.tol_step {
            return Err(PolyFdError::StepResidual {
                step: index,
                residual,
            });
        }
        Ok(())
    };

    match &spec.mode {
        CascadeMode::SkitovichDarmois { a, b } => {
            // Steps with h_n, h_{n-1}, ..., h_1: substitute u + b_e h,
            // v - a_e h, eliminating phi_e.
            for e in (0..n).rev() {
                let h = draw.next()?;
                let u_shift: Vec<i64> = h.iter().map(|&c| b[e] * c).collect();
                let v_shift: Vec<i64> = h.iter().map(|&c| -a[e] * c).collect();
                let mut new_shifts = Vec::new();
                for (ti, t) in terms.iter().enumerate() {
                    if !t.alive {
                        continue;
                    }
                    let w: Vec<i64> = h
                        .iter()
                        .map(|&c| (a[t.j] * b[e] - b[t.j] * a[e]) * c)
                        .collect();
                    new_shifts.push((ti, w));
                }
                p_shifts.push(u_shift.clone());
                q_v_shifts.push(v_shift.clone());
                qpoly_shifts.push(
                    u_shift
                        .iter()
                        .chain(v_shift.iter())
                        .copied()
                        .collect(),
                );
                push_step(
                    &mut terms,
                    &mut steps,
                    h,
                    u_shift,
                    v_shift,
                    new_shifts,
                    &p_shifts,
                    &q_v_shifts,
                    &qpoly_shifts,
                )?;
            }
            // Final substitution u -> u + h kills the pure-v part.
            let h = draw.next()?;
            p_shifts.push(h.clone());
            q_v_shifts.push(vec![0; dim]);
            qpoly_shifts.push(h.iter().copied().chain(std::iter::repeat_n(0, dim)).collect());
            push_step(
                &mut terms,
                &mut steps,
                h,
                vec![0; dim],
                vec![0; dim],
                vec![],
                &p_shifts,
                &q_v_shifts,
                &qpoly_shifts,
            )?;
        }
        CascadeMode::Heyde { .. } => {
            // 2n - 1 elimination steps: first the n minus-terms (the last
            // one is eliminated together with its plus partner pattern in
            // the paper's count), then the plus-terms down to phi_2.
            for p in 1..=(2 * n - 1) {
                let k = draw.next()?;
                // target index: minus-term n-p+1 for p <= n, else
                // plus-term n - (p - n) + 1.
                let (target_j, target_sign) = if p <= n {
                    (n - p, -1i64)
                } else {
                    (n - (p - n), 1i64)
                };
                let adj_k = adj_on_index(target_j, &k)?;
                let h: Vec<i64> = adj_k.iter().map(|&c| -target_sign * c).collect();
                let mut new_shifts = Vec::new();
                for (ti, t) in terms.iter().enumerate() {
                    if !t.alive {
                        continue;
                    }
                    let adj_k_j = adj_on_index(t.j, &k)?;
                    let w: Vec<i64> = h
                        .iter()
                        .zip(&adj_k_j)
                        .map(|(&hh, &ak)| hh + t.arg_sign * ak)
                        .collect();
                    new_shifts.push((ti, w));
                }
                qpoly_shifts.push(h.iter().chain(k.iter()).copied().collect());
                push_step(
                    &mut terms,
                    &mut steps,
                    k,
                    h,
                    vec![0; dim],
                    new_shifts,
                    &p_shifts,
                    &q_v_shifts,
                    &qpoly_shifts,
                )?;
            }
        }
    }

    let (terminal_residual, terminal_at) =
        identity_residual(&terms, &p_shifts, &q_v_shifts, &qpoly_shifts)?;
    if terminal_residual > spec.tol_step {
        return Err(PolyFdError::StepResidual {
            step: steps.len() + 1,
            residual: terminal_residual,
        });
    }
    let _ = terminal_at;

    let l = spec.q.degree();
    let conclusion = match &spec.mode {
        CascadeMode::SkitovichDarmois { a, .. } => {
            // Delta_h^{l + n + 2} P = 0.
            let h = draw.next_nonzero()?;
            let reps = l + n + 2;
            let shifts: Vec<Vec<i64>> = std::iter::repeat_n(h.clone(), reps).collect();
            let mut worst = 0.0f64;
            for u in &u_points {
                let v = iterated_delta_eval(
                    |pt| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (j, &c) in a.iter().enumerate() {
                            let scaled: Vec<i64> = pt.iter().map(|&x| c * x).collect();
                            acc += spec.phis[j].eval_index(&scaled)?;
                        }
                        Ok(acc)
                    },
                    &shifts,
                    u,
                )?;
                worst = worst.max(v.norm());
            }
            ConclusionCheck {
                description: format!("Delta_h^{reps} P = 0 (P is a polynomial)"),
                shifts: vec![h],
                residual: worst,
            }
        }
        CascadeMode::Heyde { .. } => {
            // Delta_{2k} Delta_h^{2n + l - 1} phi_1 = 0.
            let h = draw.next_nonzero()?;
            let k = draw.next_nonzero()?;
            let reps = 2 * n + l - 1;
            let mut shifts: Vec<Vec<i64>> = vec![k.iter().map(|&c| 2 * c).collect()];
            shifts.extend(std::iter::repeat_n(h.clone(), reps));
            let mut worst = 0.0f64;
            for u in &u_points {
                let v = phi_eval(0, &shifts, u)?;
                worst = worst.max(v.norm());
            }
            ConclusionCheck {
                description: format!("Delta_2k Delta_h^{reps} phi_1 = 0 (phi_1 is a polynomial)"),
                shifts: vec![h, k],
                residual: worst,
            }
        }
    };

    Ok(EliminationTrace {
        mode_label: match &spec.mode {
            CascadeMode::SkitovichDarmois { .. } => "linear-forms".into(),
            CascadeMode::Heyde { .. } => "conditional-symmetry".into(),
        },
        base_residual,
        steps,
        terminal_residual,
        q_degree: l,
        conclusion,
    })
}

/// `Delta_{s_1} ... Delta_{s_m} f (at)` by inclusion-exclusion over shift
/// subsets.
fn iterated_delta_eval(
    f: impl Fn(&[i64]) -> Result<Complex64, PolyFdError>,
    shifts: &[Vec<i64>],
    at: &[i64],
) -> Result<Complex64, PolyFdError> {
    let m = shifts.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for mask in 0u64..(1u64 << m) {
        let mut p: Vec<i64> = at.to_vec();
        for (i, s) in shifts.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for (pc, &sc) in p.iter_mut().zip(s) {
                    *pc += sc;
                }
            }
        }
        let sign = if (m as u32 - mask.count_ones()) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        acc += sign * f(&p)?;
    }
    Ok(acc)
}

/// Stacked `Z`-coordinates of a `Y^2` index vector (both components).
fn pair_z_part(y_desc: &GroupDescriptor, stacked: &[i64]) -> Vec<i64> {
    let per = y_desc.z_rank() + y_desc.t_rank() + y_desc.finite_orders().len();
    let a = y_desc.z_rank();
    let mut z = Vec::with_capacity(2 * a);
    z.extend_from_slice(&stacked[0..a]);
    z.extend_from_slice(&stacked[per..per + a]);
    z
}

/// Index vector of a group element without window bounds (used for shifted
/// arguments that leave the box).
fn unbounded_index(
    _desc: &GroupDescriptor,
    window: &Window,
    e: &crate::group::GroupElement,
) -> Result<Vec<i64>, PolyFdError> {
    let mut idx: Vec<i64> = e.z_coords().to_vec();
    for (a, &m) in e.t_coords().iter().zip(&window.t_grids) {
        let scaled = a * crate::rat::rat_int(m as i64);
        if !crate::rat::is_integer(&scaled) {
            return Err(PolyFdError::OffGrid(format!(
                "angle {} is not a multiple of 1/{m}",
                crate::rat::format_rat(a)
            )));
        }
        let j: i64 = scaled
            .numer()
            .try_into()
            .map_err(|_| PolyFdError::OffGrid("angle numerator too large".into()))?;
        idx.push(j.rem_euclid(m as i64));
    }
    idx.extend_from_slice(e.f_coords());
    Ok(idx)
}

struct ShiftDraw {
    rng: Option<ChaCha8Rng>,
    bound: u32,
    explicit: Vec<Vec<i64>>,
    next_explicit: usize,
    kinds: Vec<CoordKind>,
}

impl ShiftDraw {
    fn new(schedule: &ShiftSchedule, kinds: &[CoordKind]) -> Self {
        match schedule {
            ShiftSchedule::Seeded { seed, bound } => ShiftDraw {
                rng: Some(ChaCha8Rng::seed_from_u64(*seed)),
                bound: *bound,
                explicit: vec![],
                next_explicit: 0,
                kinds: kinds.to_vec(),
            },
            ShiftSchedule::Explicit(list) => ShiftDraw {
                rng: None,
                bound: 0,
                explicit: list.clone(),
                next_explicit: 0,
                kinds: kinds.to_vec(),
            },
        }
    }

    fn next(&mut self) -> Result<Vec<i64>, PolyFdError> {
        self.next_nonzero()
    }

    fn next_nonzero(&mut self) -> Result<Vec<i64>, PolyFdError> {
        if let Some(rng) = &mut self.rng {
            let b = self.bound as i64;
            loop {
                let v: Vec<i64> = self
                    .kinds
                    .iter()
                    .map(|k| match k {
                        CoordKind::Z { .. } => rng.random_range(-b..=b),
                        CoordKind::Cyclic { len } => rng.random_range(0..*len as i64),
                    })
                    .collect();
                if v.iter().any(|&c| c != 0) {
                    return Ok(v);
                }
            }
        } else {
            let i = self.next_explicit;
            self.next_explicit += 1;
            self.explicit
                .get(i)
                .cloned()
                .ok_or_else(|| PolyFdError::OffGrid("explicit shift schedule exhausted".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{HomBlocks, IntMatrix, RatMatrix};

    fn gaussian_phi(desc: &GroupDescriptor, window: &Window, sigma: f64) -> LatticeFunction {
        LatticeFunction::from_fn(desc, window, move |idx| {
            Complex64::new(sigma * (idx[0] * idx[0]) as f64, 0.0)
        })
        .unwrap()
    }

    #[test]
    fn sd_gaussian_cascade_runs_clean() {
        // phi_j(n) = sigma_j n^2, a = (1,1), b = (1,-1), sigma = (1,2):
        // q = -2(sum sigma a b) uv = 2uv.
        let y = GroupDescriptor::lattice(1);
        let w = Window::uniform(&y, 4, 2);
        let phis = vec![gaussian_phi(&y, &w, 1.0), gaussian_phi(&y, &w, 2.0)];
        let pair = y.power(2).unwrap();
        let q = PolynomialFn::from_real_terms(&pair, &[(&[1, 1], 2.0)]).unwrap();
        let spec = CascadeSpec {
            mode: CascadeMode::SkitovichDarmois {
                a: vec![1, 1],
                b: vec![1, -1],
            },
            phis,
            q,
            window: w,
            shifts: ShiftSchedule::Seeded {
                seed: 0xD1CE,
                bound: 2,
            },
            tol_base: 1e-9,
            tol_step: 1e-8,
        };
        let trace = elimination_cascade(&spec).unwrap();
        assert!(trace.base_residual < 1e-9);
        assert!(trace.steps.iter().all(|s| s.residual < 1e-8));
        assert!(trace.terminal_residual < 1e-8);
        assert!(trace.conclusion.residual < 1e-8);
        assert_eq!(trace.q_degree, 2);
    }

    #[test]
    fn sd_first_shift_formula() {
        // n=2, a=(1,1), b=(1,-1): first step eliminates phi_2 and shifts
        // phi_1 by l_{2,1} = (a_1 b_2 - b_1 a_2) h = -2h.
        let y = GroupDescriptor::lattice(1);
        let w = Window::uniform(&y, 4, 2);
        let phis = vec![gaussian_phi(&y, &w, 1.0), gaussian_phi(&y, &w, 1.0)];
        let pair = y.power(2).unwrap();
        let q = PolynomialFn::zero(&pair); // sum sigma a b = 0
        let spec = CascadeSpec {
            mode: CascadeMode::SkitovichDarmois {
                a: vec![1, 1],
                b: vec![1, -1],
            },
            phis,
            q,
            window: w,
            shifts: ShiftSchedule::Explicit(vec![vec![1], vec![1], vec![1], vec![1]]),
            tol_base: 1e-9,
            tol_step: 1e-8,
        };
        let trace = elimination_cascade(&spec).unwrap();
        assert_eq!(trace.steps[0].eliminated, vec!["phi_2".to_string()]);
        assert_eq!(trace.steps[0].term_shifts, vec![("phi_1".to_string(), vec![-2])]);
    }

    #[test]
    fn base_violation_detected() {
        let y = GroupDescriptor::lattice(1);
        let w = Window::uniform(&y, 4, 2);
        let phis = vec![gaussian_phi(&y, &w, 1.0), gaussian_phi(&y, &w, 2.0)];
        let pair = y.power(2).unwrap();
        // Wrong defect: q = 0 while the true one is 2uv.
        let q = PolynomialFn::zero(&pair);
        let spec = CascadeSpec {
            mode: CascadeMode::SkitovichDarmois {
                a: vec![1, 1],
                b: vec![1, -1],
            },
            phis,
            q,
            window: w,
            shifts: ShiftSchedule::Seeded {
                seed: 1,
                bound: 2,
            },
            tol_base: 1e-9,
            tol_step: 1e-8,
        };
        assert!(matches!(
            elimination_cascade(&spec),
            Err(PolyFdError::BaseEquationViolated { .. })
        ));
    }

    #[test]
    fn heyde_cascade_on_z2() {
        let x = GroupDescriptor::torus(2);
        let y = x.dual();
        let w = Window::uniform(&y, 3, 2);
        // delta_1 = I, delta_2 = [[1,1],[1,0]]: both unimodular, and
        // delta_1 +- delta_2 unimodular too (dets 1 and -1).
        let d1 = Homomorphism::identity(&x);
        let m2 = [[1i64, 1], [1, 0]];
        let d2 = Homomorphism::new(
            x.clone(),
            x.clone(),
            HomBlocks {
                zz: IntMatrix::zeros(0, 0),
                tt: IntMatrix::from_rows(vec![m2[0].to_vec(), m2[1].to_vec()]).unwrap(),
                ff: IntMatrix::zeros(0, 0),
                zt: RatMatrix::zeros(2, 0),
                zf: IntMatrix::zeros(0, 0),
                ft: RatMatrix::zeros(2, 0),
            },
        )
        .unwrap();
        // phi_j(y) = y^T S_j y with S_j symmetric positive.
        let s1 = [[1.0, 0.0], [0.0, 1.0]];
        let s2 = [[2.0, 0.5], [0.5, 1.0]];
        let quad = |s: [[f64; 2]; 2]| {
            move |idx: &[i64]| {
                let (a, b) = (idx[0] as f64, idx[1] as f64);
                Complex64::new(
                    s[0][0] * a * a + 2.0 * s[0][1] * a * b + s[1][1] * b * b,
                    0.0,
                )
            }
        };
        let phis = vec![
            LatticeFunction::from_fn(&y, &w, quad(s1)).unwrap(),
            LatticeFunction::from_fn(&y, &w, quad(s2)).unwrap(),
        ];
        // phi(u + Av) - phi(u - Av) = 4 u^T S A v, so the defect in the
        // cascade convention is q(u, v) = -sum_j (4 S_j A_j)[i][k] u_i v_k
        // with A_1 = I and A_2 the adjoint (transpose) of delta_2 on Z^2.
        let a1 = [[1.0, 0.0], [0.0, 1.0]];
        let a2 = [
            [m2[0][0] as f64, m2[1][0] as f64],
            [m2[0][1] as f64, m2[1][1] as f64],
        ];
        let mut bilinear = [[0.0f64; 2]; 2];
        for (s, a) in [(s1, a1), (s2, a2)] {
            for i in 0..2 {
                for k in 0..2 {
                    for m in 0..2 {
                        bilinear[i][k] += 4.0 * s[i][m] * a[m][k];
                    }
                }
            }
        }
        let pair = y.power(2).unwrap();
        let mut coeffs = std::collections::BTreeMap::new();
        for i in 0..2usize {
            for k in 0..2usize {
                let mut idx = vec![0u32; 4];
                idx[i] += 1;
                idx[2 + k] += 1;
                coeffs.insert(idx, Complex64::new(-bilinear[i][k], 0.0));
            }
        }
        let q = PolynomialFn::new(&pair, coeffs).unwrap();
        let spec = CascadeSpec {
            mode: CascadeMode::Heyde {
                deltas: vec![d1, d2],
            },
            phis,
            q,
            window: w,
            shifts: ShiftSchedule::Seeded {
                seed: 7,
                bound: 1,
            },
            tol_base: 1e-9,
            tol_step: 1e-8,
        };
        let trace = elimination_cascade(&spec).unwrap();
        assert_eq!(trace.steps.len(), 3); // 2n - 1
        assert!(trace.terminal_residual < 1e-8);
        assert!(trace.conclusion.residual < 1e-8);
    }
}
