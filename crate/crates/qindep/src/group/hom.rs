use super::element::enumerate_elements;
use super::{GroupDescriptor, GroupElement, GroupError, MAX_FINITE_ENUMERATION};
use crate::rat::{fract_mod1, is_integer, rat_int, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn diagonal(n: usize, v: i64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self, GroupError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(GroupError::InvalidHomomorphism("ragged matrix".into()));
        }
        Ok(IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row_entries(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc: i128 = 0;
                for k in 0..self.cols {
                    acc += self.get(i, k) as i128 * other.get(k, j) as i128;
                }
                out.set(i, j, i64::try_from(acc).expect("matrix entry overflow"));
            }
        }
        out
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc: i128 = 0;
                for k in 0..self.cols {
                    acc += self.get(i, k) as i128 * v[k] as i128;
                }
                i64::try_from(acc).expect("vector entry overflow")
            })
            .collect()
    }

    pub fn map(&self, f: impl Fn(i64) -> i64) -> Self {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn to_rat(&self) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| rat_int(v)).collect(),
        }
    }

    /// Determinant by fraction-free Gaussian elimination (exact).
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| BigInt::from(self.get(i, j))).collect())
            .collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&p| !m[p][k].is_zero()) else {
                    return BigInt::zero();
                };
                m.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                    m[i][j] = num / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        sign * m[n - 1][n - 1].clone()
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.det().abs().is_one()
    }

    /// Exact inverse of a unimodular matrix (integer entries guaranteed).
    pub fn unimodular_inverse(&self) -> Result<IntMatrix, GroupError> {
        if !self.is_unimodular() {
            return Err(GroupError::NotAnAutomorphism(format!(
                "matrix determinant is not +-1: {:?}",
                self
            )));
        }
        let inv = self.to_rat().inverse().expect("unimodular is invertible");
        let mut out = IntMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = inv.get(i, j);
                debug_assert!(is_integer(e));
                out.set(
                    i,
                    j,
                    i64::try_from(e.numer().clone()).expect("inverse entry overflow"),
                );
            }
        }
        Ok(out)
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self, GroupError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(GroupError::InvalidHomomorphism("ragged matrix".into()));
        }
        Ok(RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row_entries(&self) -> Vec<Vec<Rat>> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn map(&self, f: impl Fn(&Rat) -> Rat) -> Self {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Rat::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * &v[k];
                }
                acc
            })
            .collect()
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<RatMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMatrix::zeros(n, n);
        for i in 0..n {
            inv.set(i, i, Rat::one());
        }
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if pivot != col {
                for j in 0..n {
                    let (x, y) = (a.get(pivot, j).clone(), a.get(col, j).clone());
                    a.set(pivot, j, y);
                    a.set(col, j, x);
                    let (x, y) = (inv.get(pivot, j).clone(), inv.get(col, j).clone());
                    inv.set(pivot, j, y);
                    inv.set(col, j, x);
                }
            }
            let p = a.get(col, col).clone();
            for j in 0..n {
                a.set(col, j, a.get(col, j) / &p);
                inv.set(col, j, inv.get(col, j) / &p);
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for j in 0..n {
                    let v = a.get(r, j) - &factor * a.get(col, j);
                    a.set(r, j, v);
                    let v = inv.get(r, j) - &factor * inv.get(col, j);
                    inv.set(r, j, v);
                }
            }
        }
        Some(inv)
    }
}

/// A continuous homomorphism between groups of the universe, in block form.
///
/// Continuity forces the circle sector to map only into circles and the
/// finite sector only into circles and finite factors, so the blocks are
///
/// ```text
///   z' = zz z
///   t' = tt t + zt z + ft f      (mod 1)
///   f' = ff f + zf z             (mod orders)
/// ```
///
/// with `zz`, `tt`, `ff`, `zf` integer and `zt`, `ft` rational; the `ff`
/// and `ft` columns obey the order-divisibility constraints that make the
/// map well defined on torsion.
#[derive(Clone, PartialEq)]
pub struct Homomorphism {
    domain: GroupDescriptor,
    codomain: GroupDescriptor,
    zz: IntMatrix,
    tt: IntMatrix,
    ff: IntMatrix,
    zt: RatMatrix,
    zf: IntMatrix,
    ft: RatMatrix,
    is_automorphism: bool,
}

pub struct HomBlocks {
    pub zz: IntMatrix,
    pub tt: IntMatrix,
    pub ff: IntMatrix,
    pub zt: RatMatrix,
    pub zf: IntMatrix,
    pub ft: RatMatrix,
}

impl Homomorphism {
    pub fn new(
        domain: GroupDescriptor,
        codomain: GroupDescriptor,
        blocks: HomBlocks,
    ) -> Result<Self, GroupError> {
        let (a, b, k) = (
            domain.z_rank(),
            domain.t_rank(),
            domain.finite_orders().len(),
        );
        let (a2, b2, k2) = (
            codomain.z_rank(),
            codomain.t_rank(),
            codomain.finite_orders().len(),
        );
        let HomBlocks {
            zz,
            tt,
            mut ff,
            zt,
            mut zf,
            ft,
        } = blocks;
        let shape_ok = |name: &str, got: (usize, usize), want: (usize, usize)| {
            if got == want {
                Ok(())
            } else {
                Err(GroupError::InvalidHomomorphism(format!(
                    "{name} block is {}x{}, expected {}x{}",
                    got.0, got.1, want.0, want.1
                )))
            }
        };
        shape_ok("zz", (zz.rows(), zz.cols()), (a2, a))?;
        shape_ok("tt", (tt.rows(), tt.cols()), (b2, b))?;
        shape_ok("ff", (ff.rows(), ff.cols()), (k2, k))?;
        shape_ok("zt", (zt.rows(), zt.cols()), (b2, a))?;
        shape_ok("zf", (zf.rows(), zf.cols()), (k2, a))?;
        shape_ok("ft", (ft.rows(), ft.cols()), (b2, k))?;
        // Torsion constraints and canonical reductions.
        let n_dom = domain.finite_orders();
        let n_cod = codomain.finite_orders();
        for i in 0..k2 {
            for j in 0..k {
                let v = ff.get(i, j);
                let prod = (n_dom[j] as i128) * (v as i128);
                if prod.rem_euclid(n_cod[i] as i128) != 0 {
                    return Err(GroupError::InvalidHomomorphism(format!(
                        "ff[{i}][{j}] = {v} sends an order-{} generator to an element of order not dividing it (codomain order {})",
                        n_dom[j], n_cod[i]
                    )));
                }
                ff.set(i, j, v.rem_euclid(n_cod[i]));
            }
            for j in 0..a {
                zf.set(i, j, zf.get(i, j).rem_euclid(n_cod[i]));
            }
        }
        let ft = {
            let mut out = ft;
            for i in 0..b2 {
                for j in 0..k {
                    let v = out.get(i, j).clone();
                    if !is_integer(&(&v * rat_int(n_dom[j]))) {
                        return Err(GroupError::InvalidHomomorphism(format!(
                            "ft[{i}][{j}] = {v} is not a multiple of 1/{}",
                            n_dom[j]
                        )));
                    }
                    out.set(i, j, fract_mod1(&v));
                }
            }
            out
        };
        let zt = zt.map(fract_mod1);
        let mut h = Homomorphism {
            domain,
            codomain,
            zz,
            tt,
            ff,
            zt,
            zf,
            ft,
            is_automorphism: false,
        };
        h.is_automorphism = h.compute_is_automorphism()?;
        Ok(h)
    }

    pub fn identity(desc: &GroupDescriptor) -> Self {
        Self::mul_by_int(desc, 1)
    }

    /// The multiplication map `f_n x = n x`.
    pub fn mul_by_int(desc: &GroupDescriptor, n: i64) -> Self {
        let k = desc.finite_orders().len();
        Self::new(
            desc.clone(),
            desc.clone(),
            HomBlocks {
                zz: IntMatrix::diagonal(desc.z_rank(), n),
                tt: IntMatrix::diagonal(desc.t_rank(), n),
                ff: IntMatrix::diagonal(k, n),
                zt: RatMatrix::zeros(desc.t_rank(), desc.z_rank()),
                zf: IntMatrix::zeros(k, desc.z_rank()),
                ft: RatMatrix::zeros(desc.t_rank(), k),
            },
        )
        .expect("scalar blocks are always well-formed")
    }

    /// Endomorphism of a finite group given by an integer matrix on the
    /// finite coordinates.
    pub fn finite_endo(desc: &GroupDescriptor, ff: IntMatrix) -> Result<Self, GroupError> {
        Self::new(
            desc.clone(),
            desc.clone(),
            HomBlocks {
                zz: IntMatrix::zeros(desc.z_rank(), desc.z_rank()),
                tt: IntMatrix::zeros(desc.t_rank(), desc.t_rank()),
                ff,
                zt: RatMatrix::zeros(desc.t_rank(), desc.z_rank()),
                zf: IntMatrix::zeros(desc.finite_orders().len(), desc.z_rank()),
                ft: RatMatrix::zeros(desc.t_rank(), desc.finite_orders().len()),
            },
        )
    }

    pub fn domain(&self) -> &GroupDescriptor {
        &self.domain
    }

    pub fn codomain(&self) -> &GroupDescriptor {
        &self.codomain
    }

    pub fn blocks(&self) -> HomBlocks {
        HomBlocks {
            zz: self.zz.clone(),
            tt: self.tt.clone(),
            ff: self.ff.clone(),
            zt: self.zt.clone(),
            zf: self.zf.clone(),
            ft: self.ft.clone(),
        }
    }

    pub fn apply(&self, x: &GroupElement) -> Result<GroupElement, GroupError> {
        if x.owner() != &self.domain {
            return Err(GroupError::MismatchedGroups(
                self.domain.to_string(),
                x.owner().to_string(),
            ));
        }
        let z = self.zz.apply(x.z_coords());
        let mut t = self.tt.to_rat().apply(x.t_coords());
        let zt_part = self
            .zt
            .apply(&x.z_coords().iter().map(|&c| rat_int(c)).collect::<Vec<_>>());
        let ft_part = self
            .ft
            .apply(&x.f_coords().iter().map(|&c| rat_int(c)).collect::<Vec<_>>());
        for i in 0..t.len() {
            t[i] = fract_mod1(&(&t[i] + &zt_part[i] + &ft_part[i]));
        }
        let mut f = self.ff.apply(x.f_coords());
        let zf_part = self.zf.apply(x.z_coords());
        for (i, v) in f.iter_mut().enumerate() {
            *v = (*v + zf_part[i]).rem_euclid(self.codomain.finite_orders()[i]);
        }
        GroupElement::new(self.codomain.clone(), z, t, f)
    }

    /// The adjoint homomorphism between the dual groups, characterized by
    /// `(x, adjoint(h) y) = (h x, y)`.
    pub fn adjoint(&self) -> Homomorphism {
        let y_dom = self.codomain.dual();
        let y_cod = self.domain.dual();
        let n_dom = self.domain.finite_orders();
        let n_cod = self.codomain.finite_orders();
        let (k, k2) = (n_dom.len(), n_cod.len());
        // f' -> t block of the adjoint: zf[i][j] / n'_i transposed.
        let mut adj_ft = RatMatrix::zeros(self.domain.z_rank(), k2);
        for j in 0..self.domain.z_rank() {
            for i in 0..k2 {
                adj_ft.set(j, i, Rat::new(self.zf.get(i, j).into(), n_cod[i].into()));
            }
        }
        // z' -> f block: n_j * ft[i][j] transposed.
        let mut adj_zf = IntMatrix::zeros(k, self.codomain.t_rank());
        for j in 0..k {
            for i in 0..self.codomain.t_rank() {
                let v = self.ft.get(i, j) * rat_int(n_dom[j]);
                debug_assert!(is_integer(&v));
                adj_zf.set(
                    j,
                    i,
                    i64::try_from(v.numer().clone()).expect("adjoint entry overflow"),
                );
            }
        }
        // f' -> f block: n_j * ff[i][j] / n'_i transposed.
        let mut adj_ff = IntMatrix::zeros(k, k2);
        for j in 0..k {
            for i in 0..k2 {
                let v = (n_dom[j] as i128) * (self.ff.get(i, j) as i128) / (n_cod[i] as i128);
                adj_ff.set(j, i, i64::try_from(v).expect("adjoint entry overflow"));
            }
        }
        Homomorphism::new(
            y_dom,
            y_cod,
            HomBlocks {
                zz: self.tt.transpose(),
                tt: self.zz.transpose(),
                zt: self.zt.transpose(),
                ff: adj_ff,
                zf: adj_zf,
                ft: adj_ft,
            },
        )
        .expect("adjoint blocks satisfy the dual constraints")
    }

    pub fn compose(&self, inner: &Homomorphism) -> Result<Homomorphism, GroupError> {
        if inner.codomain != self.domain {
            return Err(GroupError::MismatchedGroups(
                self.domain.to_string(),
                inner.codomain.to_string(),
            ));
        }
        Homomorphism::new(
            inner.domain.clone(),
            self.codomain.clone(),
            HomBlocks {
                zz: self.zz.mul(&inner.zz),
                tt: self.tt.mul(&inner.tt),
                ff: self.ff.mul(&inner.ff),
                zt: self
                    .zt
                    .mul(&inner.zz.to_rat())
                    .add(&self.tt.to_rat().mul(&inner.zt))
                    .add(&self.ft.mul(&inner.zf.to_rat())),
                zf: self.ff.mul(&inner.zf).add(&self.zf.mul(&inner.zz)),
                ft: self
                    .tt
                    .to_rat()
                    .mul(&inner.ft)
                    .add(&self.ft.mul(&inner.ff.to_rat())),
            },
        )
    }

    pub fn add(&self, other: &Homomorphism) -> Result<Homomorphism, GroupError> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(GroupError::MismatchedGroups(
                self.domain.to_string(),
                other.domain.to_string(),
            ));
        }
        Homomorphism::new(
            self.domain.clone(),
            self.codomain.clone(),
            HomBlocks {
                zz: self.zz.add(&other.zz),
                tt: self.tt.add(&other.tt),
                ff: self.ff.add(&other.ff),
                zt: self.zt.add(&other.zt),
                zf: self.zf.add(&other.zf),
                ft: self.ft.add(&other.ft),
            },
        )
    }

    pub fn neg(&self) -> Homomorphism {
        Homomorphism::new(
            self.domain.clone(),
            self.codomain.clone(),
            HomBlocks {
                zz: self.zz.neg(),
                tt: self.tt.neg(),
                ff: self.ff.neg(),
                zt: self.zt.neg(),
                zf: self.zf.neg(),
                ft: self.ft.neg(),
            },
        )
        .expect("negation preserves constraints")
    }

    pub fn sub(&self, other: &Homomorphism) -> Result<Homomorphism, GroupError> {
        self.add(&other.neg())
    }

    pub fn is_automorphism(&self) -> bool {
        self.is_automorphism
    }

    /// The triangular block structure (z -> f -> t) makes the map bijective
    /// exactly when each diagonal block is: `zz` and `tt` unimodular and
    /// `ff` a bijection of the finite sector (checked by enumeration).
    fn compute_is_automorphism(&self) -> Result<bool, GroupError> {
        if self.domain != self.codomain {
            return Ok(false);
        }
        if !self.zz.is_unimodular() || !self.tt.is_unimodular() {
            return Ok(false);
        }
        self.finite_block_bijective()
    }

    fn finite_block_bijective(&self) -> Result<bool, GroupError> {
        let orders = self.domain.finite_orders();
        if orders.is_empty() {
            return Ok(true);
        }
        let size = self.domain.finite_order();
        if size > MAX_FINITE_ENUMERATION {
            return Err(GroupError::GroupTooLarge(size));
        }
        let fdesc = GroupDescriptor::finite(orders).map_err(GroupError::Descriptor)?;
        let mut seen = std::collections::HashSet::with_capacity(size as usize);
        for x in enumerate_elements(&fdesc)? {
            let img: Vec<i64> = self
                .ff
                .apply(x.f_coords())
                .iter()
                .zip(orders)
                .map(|(&v, &n)| v.rem_euclid(n))
                .collect();
            if !seen.insert(img) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact inverse of an automorphism.
    pub fn inverse(&self) -> Result<Homomorphism, GroupError> {
        if !self.is_automorphism {
            return Err(GroupError::NotAnAutomorphism(format!("{self:?}")));
        }
        let zz_inv = self.zz.unimodular_inverse()?;
        let tt_inv = self.tt.unimodular_inverse()?;
        let ff_inv = self.finite_block_inverse()?;
        let zf_inv = ff_inv.mul(&self.zf).mul(&zz_inv).neg();
        let ft_inv = tt_inv.to_rat().mul(&self.ft).mul(&ff_inv.to_rat()).neg();
        let zt_inv = tt_inv
            .to_rat()
            .mul(&self.zt.mul(&zz_inv.to_rat()).add(&self.ft.mul(&zf_inv.to_rat())))
            .neg();
        Homomorphism::new(
            self.domain.clone(),
            self.codomain.clone(),
            HomBlocks {
                zz: zz_inv,
                tt: tt_inv,
                ff: ff_inv,
                zt: zt_inv,
                zf: zf_inv,
                ft: ft_inv,
            },
        )
    }

    fn finite_block_inverse(&self) -> Result<IntMatrix, GroupError> {
        let orders = self.domain.finite_orders();
        let k = orders.len();
        if k == 0 {
            return Ok(IntMatrix::zeros(0, 0));
        }
        let fdesc = GroupDescriptor::finite(orders).map_err(GroupError::Descriptor)?;
        let mut preimage: HashMap<Vec<i64>, Vec<i64>> = HashMap::new();
        for x in enumerate_elements(&fdesc)? {
            let img: Vec<i64> = self
                .ff
                .apply(x.f_coords())
                .iter()
                .zip(orders)
                .map(|(&v, &n)| v.rem_euclid(n))
                .collect();
            preimage.insert(img, x.f_coords().to_vec());
        }
        let mut inv = IntMatrix::zeros(k, k);
        for j in 0..k {
            let mut e = vec![0i64; k];
            e[j] = 1;
            let pre = preimage
                .get(&e)
                .ok_or_else(|| GroupError::NotAnAutomorphism("finite block not surjective".into()))?;
            for i in 0..k {
                inv.set(i, j, pre[i]);
            }
        }
        Ok(inv)
    }
}

impl fmt::Debug for Homomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Hom({} -> {}; zz={:?} tt={:?} ff={:?})",
            self.domain,
            self.codomain,
            self.zz.row_entries(),
            self.tt.row_entries(),
            self.ff.row_entries()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::element::enumerate_elements;

    fn mul_on_cyclic(n: i64, m: i64) -> Homomorphism {
        let g = GroupDescriptor::cyclic(n).unwrap();
        Homomorphism::mul_by_int(&g, m)
    }

    #[test]
    fn adjoint_of_multiplication_is_itself() {
        // mult-by-5 on Z_6: verify the pairing identity exhaustively.
        let h = mul_on_cyclic(6, 5);
        let adj = h.adjoint();
        let z6 = GroupDescriptor::cyclic(6).unwrap();
        for x in enumerate_elements(&z6).unwrap() {
            for y in enumerate_elements(&z6.dual()).unwrap() {
                let lhs = x.pair(&adj.apply(&y).unwrap()).unwrap();
                let rhs = h.apply(&x).unwrap().pair(&y).unwrap();
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
        assert_eq!(adj.ff.get(0, 0), 5);
    }

    #[test]
    fn adjoint_of_negation_on_torus() {
        let t = GroupDescriptor::torus(1);
        let h = Homomorphism::mul_by_int(&t, -1);
        let adj = h.adjoint();
        assert_eq!(adj.domain(), &GroupDescriptor::lattice(1));
        assert_eq!(adj.zz.get(0, 0), -1);
    }

    #[test]
    fn adjoint_is_involutive() {
        // Mixed group with off-diagonal blocks.
        let x = GroupDescriptor::new(1, 1, vec![4]).unwrap();
        let h = Homomorphism::new(
            x.clone(),
            x.clone(),
            HomBlocks {
                zz: IntMatrix::from_rows(vec![vec![1]]).unwrap(),
                tt: IntMatrix::from_rows(vec![vec![-1]]).unwrap(),
                ff: IntMatrix::from_rows(vec![vec![3]]).unwrap(),
                zt: RatMatrix::from_rows(vec![vec![crate::rat::rat(1, 3)]]).unwrap(),
                zf: IntMatrix::from_rows(vec![vec![2]]).unwrap(),
                ft: RatMatrix::from_rows(vec![vec![crate::rat::rat(1, 4)]]).unwrap(),
            },
        )
        .unwrap();
        let back = h.adjoint().adjoint();
        assert_eq!(back, h);
    }

    #[test]
    fn adjoint_pairing_identity_with_mixed_blocks() {
        let x = GroupDescriptor::new(1, 1, vec![4]).unwrap();
        let h = Homomorphism::new(
            x.clone(),
            x.clone(),
            HomBlocks {
                zz: IntMatrix::from_rows(vec![vec![2]]).unwrap(),
                tt: IntMatrix::from_rows(vec![vec![1]]).unwrap(),
                ff: IntMatrix::from_rows(vec![vec![1]]).unwrap(),
                zt: RatMatrix::from_rows(vec![vec![crate::rat::rat(2, 5)]]).unwrap(),
                zf: IntMatrix::from_rows(vec![vec![3]]).unwrap(),
                ft: RatMatrix::from_rows(vec![vec![crate::rat::rat(1, 2)]]).unwrap(),
            },
        )
        .unwrap();
        let adj = h.adjoint();
        // sample points
        let xs = [
            GroupElement::new(x.clone(), vec![3], vec![crate::rat::rat(1, 5)], vec![2]).unwrap(),
            GroupElement::new(x.clone(), vec![-2], vec![crate::rat::rat(3, 7)], vec![1]).unwrap(),
        ];
        let y_desc = x.dual();
        let ys = [
            GroupElement::new(y_desc.clone(), vec![4], vec![crate::rat::rat(2, 3)], vec![3]).unwrap(),
            GroupElement::new(y_desc.clone(), vec![-1], vec![crate::rat::rat(1, 8)], vec![2]).unwrap(),
        ];
        for xe in &xs {
            for ye in &ys {
                let lhs = xe.pairing_angle(&adj.apply(ye).unwrap()).unwrap();
                let rhs = h.apply(xe).unwrap().pairing_angle(ye).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn automorphism_detection() {
        assert!(mul_on_cyclic(6, 5).is_automorphism());
        assert!(!mul_on_cyclic(6, 2).is_automorphism());
        assert!(!mul_on_cyclic(6, 3).is_automorphism());
        let t = GroupDescriptor::torus(1);
        assert!(Homomorphism::mul_by_int(&t, -1).is_automorphism());
        assert!(!Homomorphism::mul_by_int(&t, 2).is_automorphism());
        let z = GroupDescriptor::lattice(1);
        assert!(!Homomorphism::mul_by_int(&z, 2).is_automorphism());
    }

    #[test]
    fn automorphism_iff_adjoint_automorphism() {
        for n in [5i64, 6, 8, 12] {
            let g = GroupDescriptor::cyclic(n).unwrap();
            for m in 0..n {
                let h = Homomorphism::mul_by_int(&g, m);
                assert_eq!(h.is_automorphism(), h.adjoint().is_automorphism());
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let h = mul_on_cyclic(5, 2);
        let inv = h.inverse().unwrap();
        assert_eq!(inv.ff.get(0, 0), 3); // 2*3 = 6 = 1 mod 5
        let id = h.compose(&inv).unwrap();
        assert_eq!(id, Homomorphism::identity(&GroupDescriptor::cyclic(5).unwrap()));

        let x = GroupDescriptor::new(1, 1, vec![4]).unwrap();
        let h = Homomorphism::new(
            x.clone(),
            x.clone(),
            HomBlocks {
                zz: IntMatrix::from_rows(vec![vec![-1]]).unwrap(),
                tt: IntMatrix::from_rows(vec![vec![1]]).unwrap(),
                ff: IntMatrix::from_rows(vec![vec![3]]).unwrap(),
                zt: RatMatrix::from_rows(vec![vec![crate::rat::rat(1, 3)]]).unwrap(),
                zf: IntMatrix::from_rows(vec![vec![2]]).unwrap(),
                ft: RatMatrix::from_rows(vec![vec![crate::rat::rat(1, 2)]]).unwrap(),
            },
        )
        .unwrap();
        assert!(h.is_automorphism());
        let inv = h.inverse().unwrap();
        assert_eq!(h.compose(&inv).unwrap(), Homomorphism::identity(&x));
        assert_eq!(inv.compose(&h).unwrap(), Homomorphism::identity(&x));
    }

    #[test]
    fn rejects_ill_defined_finite_block() {
        // Z_2 -> Z_4 sending the generator to an element of order 4.
        let d2 = GroupDescriptor::cyclic(2).unwrap();
        let d4 = GroupDescriptor::cyclic(4).unwrap();
        let r = Homomorphism::new(
            d2.clone(),
            d4.clone(),
            HomBlocks {
                zz: IntMatrix::zeros(0, 0),
                tt: IntMatrix::zeros(0, 0),
                ff: IntMatrix::from_rows(vec![vec![1]]).unwrap(),
                zt: RatMatrix::zeros(0, 0),
                zf: IntMatrix::zeros(1, 0),
                ft: RatMatrix::zeros(0, 1),
            },
        );
        assert!(r.is_err());
        // Sending it to 2 (order 2) is fine.
        let r = Homomorphism::new(
            d2,
            d4,
            HomBlocks {
                zz: IntMatrix::zeros(0, 0),
                tt: IntMatrix::zeros(0, 0),
                ff: IntMatrix::from_rows(vec![vec![2]]).unwrap(),
                zt: RatMatrix::zeros(0, 0),
                zf: IntMatrix::zeros(1, 0),
                ft: RatMatrix::zeros(0, 1),
            },
        );
        assert!(r.is_ok());
    }

    #[test]
    fn determinant_bareiss() {
        let m = IntMatrix::from_rows(vec![vec![2, 3, 1], vec![0, 1, 4], vec![5, 6, 0]]).unwrap();
        assert_eq!(m.det(), BigInt::from(2 * (0 - 24) - 3 * (0 - 20) + (0 - 5)));
        assert!(IntMatrix::identity(4).is_unimodular());
    }
}
