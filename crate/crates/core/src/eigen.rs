//! The residual Hecke eigen-functional on a Manin symbol space and the
//! modular-symbol values it induces.

use std::sync::Arc;

use crate::arith;
use crate::error::{Error, Result};
use crate::formdata::EigenData;
use crate::fp::PrimeField;
use crate::linalg::{dense_kernel, kernel_with_free, SparseMat, SparseRow};
use crate::manin::{heilbronn_cremona, heilbronn_merel, ManinSpace, Sign};

/// Cut primes are taken below this bound unless given explicitly.
pub const DEFAULT_CUT_BOUND: u64 = 100;

/// A nonzero functional phi on a symbol space with phi o T_ell = a_ell phi
/// for the cut primes and phi o star = sign * phi.
#[derive(Clone, Debug)]
pub struct EigenFunctional {
    space: Arc<ManinSpace>,
    phi: Vec<u32>,
    /// phi evaluated on every Manin symbol
    values: Vec<u32>,
    sign: i8,
    cut_primes: Vec<u64>,
}

/// The operators used by the cut, each with its target eigenvalue.
enum CutOp {
    Star(u32),
    Hecke(u64, u32),
}

fn heilbronn_for(space: &ManinSpace, ell: u64) -> Vec<[i64; 4]> {
    if space.level() % ell == 0 {
        heilbronn_merel(ell)
    } else {
        heilbronn_cremona(ell)
    }
}

/// Rows `rows` of T_ell - a (U_ell - a when ell divides the level).
fn hecke_rows(space: &ManinSpace, ell: u64, a: u32, rows: &[usize]) -> Vec<SparseRow> {
    let f = space.field();
    let mats = heilbronn_for(space, ell);
    let mut acc = vec![0u32; space.dim()];
    let mut touched: Vec<u32> = Vec::new();
    rows.iter()
        .map(|&j| {
            for t in space.heilbronn_images(space.basis_symbol(j), &mats) {
                for &(b, v) in space.gen_image(t) {
                    if acc[b as usize] == 0 {
                        touched.push(b);
                    }
                    let s = f.add(acc[b as usize] % f.p(), v);
                    acc[b as usize] = if s == 0 { f.p() } else { s };
                }
            }
            if a != 0 {
                if acc[j] == 0 {
                    touched.push(j as u32);
                }
                let s = f.sub(acc[j] % f.p(), a);
                acc[j] = if s == 0 { f.p() } else { s };
            }
            touched.sort_unstable();
            let row = touched
                .iter()
                .filter_map(|&b| {
                    let v = acc[b as usize] % f.p();
                    acc[b as usize] = 0;
                    (v != 0).then_some((b, v))
                })
                .collect();
            touched.clear();
            row
        })
        .collect()
}

fn op_rows(space: &ManinSpace, op: &CutOp, rows: &[usize]) -> Vec<SparseRow> {
    match *op {
        CutOp::Hecke(ell, a) => hecke_rows(space, ell, a, rows),
        CutOp::Star(s) => {
            let f = space.field();
            let st = space.star();
            rows.iter()
                .map(|&j| {
                    let id = SparseMat::identity(space.dim());
                    crate::linalg::axpy_sparse(f, st.row(j), id.row(j), f.neg(s))
                })
                .collect()
        }
    }
}

/// Good primes below `bound` with known eigenvalue in increasing order,
/// then the primes dividing the level with known U_q eigenvalue.
pub fn default_cut_primes(data: &EigenData, bound: u64) -> Vec<u64> {
    data.eigs
        .keys()
        .copied()
        .filter(|&l| l < bound && data.level % l != 0)
        .chain(data.u_eigs.keys().copied())
        .collect()
}

/// Cut the joint eigenspace of the given Hecke eigenvalues (and of star
/// with eigenvalue `sign`) down to a single line. A cut prime dividing the
/// level stands for U_q, which separates old forms and congruent new forms
/// that agree away from the level.
///
/// Operators are applied in order; after the first, each one acts on the
/// current joint kernel, which it preserves because the operators commute.
pub fn cut_eigenfunctional(
    space: Arc<ManinSpace>,
    data: &EigenData,
    cut_primes: Option<&[u64]>,
    sign: i8,
) -> Result<EigenFunctional> {
    if space.level() != data.level || space.p() != data.p {
        return Err(Error::InvalidArgument(format!(
            "eigendata for level {} mod {} used on a space of level {} mod {}",
            data.level,
            data.p,
            space.level(),
            space.p()
        )));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidArgument("sign must be +1 or -1".into()));
    }
    let f = *space.field();
    let primes: Vec<u64> = match cut_primes {
        Some(ps) => ps.to_vec(),
        None => default_cut_primes(data, DEFAULT_CUT_BOUND),
    };
    let mut ops = Vec::new();
    let star_sign = f.from_i64(sign as i64);
    match space.sign() {
        Sign::Full => ops.push(CutOp::Star(star_sign)),
        Sign::Plus if sign == -1 => ops.push(CutOp::Star(star_sign)),
        Sign::Minus if sign == 1 => ops.push(CutOp::Star(star_sign)),
        _ => {}
    }
    for &ell in &primes {
        if !arith::is_prime(ell) {
            return Err(Error::InvalidPrime(ell));
        }
        let a = if space.level() % ell == 0 {
            data.u_ell(ell).ok_or(Error::UseAtkinLehnerPath {
                ell,
                level: space.level(),
            })?
        } else {
            data.a_ell(ell)
                .ok_or_else(|| Error::InsufficientLocalData(format!("a_{ell} not in eigendata")))?
        };
        ops.push(CutOp::Hecke(ell, a));
    }

    let dim = space.dim();
    // current joint kernel: vectors with identity pattern on `free`
    let mut basis: Vec<Vec<u32>> = Vec::new();
    let mut free: Vec<usize> = Vec::new();
    let mut started = false;
    let mut used = Vec::new();
    let mut applied = 0;
    for op in &ops {
        applied += 1;
        if let CutOp::Hecke(ell, _) = op {
            used.push(*ell);
        }
        if !started {
            let all: Vec<usize> = (0..dim).collect();
            let m = SparseMat::from_rows(dim, op_rows(&space, op, &all));
            (basis, free) = kernel_with_free(&f, &m);
            started = true;
        } else {
            (basis, free) = restrict(&f, &space, op, &basis, &free);
        }
        if basis.is_empty() {
            return Err(Error::EigensystemNotFound { cut: used });
        }
        if basis.len() == 1 {
            break;
        }
    }
    if !started {
        basis = (0..dim)
            .map(|i| {
                let mut v = vec![0u32; dim];
                v[i] = 1;
                v
            })
            .collect();
    }
    match basis.len() {
        0 => Err(Error::EigensystemNotFound { cut: used }),
        1 => {
            let mut phi = basis.pop().unwrap();
            let lead = *phi
                .iter()
                .find(|&&x| x != 0)
                .expect("kernel vector is nonzero");
            let inv = f.inv(lead);
            phi.iter_mut().for_each(|x| *x = f.mul(*x, inv));
            let e = EigenFunctional::from_phi(space, phi, sign, primes.clone());
            // the line was isolated early: the remaining eigenvalues must hold on it
            for op in &ops[applied..] {
                if let CutOp::Hecke(ell, a) = *op {
                    if !e.satisfies(ell, a) {
                        used.push(ell);
                        return Err(Error::EigensystemNotFound { cut: used });
                    }
                    used.push(ell);
                }
            }
            Ok(e)
        }
        k => Err(Error::MultiplicityFailure { dim: k, cut: used }),
    }
}

/// Restrict an operator to span(basis) and return the kernel there.
fn restrict(
    f: &PrimeField,
    space: &ManinSpace,
    op: &CutOp,
    basis: &[Vec<u32>],
    free: &[usize],
) -> (Vec<Vec<u32>>, Vec<usize>) {
    let k = basis.len();
    let dim = space.dim();
    // column-major copy of the basis: cols[c] = (basis[0][c], ..., basis[k-1][c])
    let mut cols = vec![0u32; dim * k];
    for (j, v) in basis.iter().enumerate() {
        for (c, &x) in v.iter().enumerate() {
            cols[c * k + j] = x;
        }
    }
    let rows = op_rows(space, op, free);
    let p = f.p() as u64;
    let b: Vec<Vec<u32>> = rows
        .iter()
        .map(|row| {
            let mut acc = vec![0u64; k];
            for (t, &(c, v)) in row.iter().enumerate() {
                let src = &cols[c as usize * k..(c as usize + 1) * k];
                for (a, &x) in acc.iter_mut().zip(src) {
                    *a += v as u64 * x as u64;
                }
                if t % 8 == 7 {
                    acc.iter_mut().for_each(|a| *a %= p);
                }
            }
            acc.into_iter().map(|a| (a % p) as u32).collect()
        })
        .collect();
    let coeffs = dense_kernel(f, &b, k);
    let new_basis: Vec<Vec<u32>> = coeffs
        .iter()
        .map(|c| {
            let mut v = vec![0u64; dim];
            for (j, &cj) in c.iter().enumerate() {
                if cj == 0 {
                    continue;
                }
                for (a, &x) in v.iter_mut().zip(&basis[j]) {
                    *a = (*a + cj as u64 * x as u64) % p;
                }
            }
            v.into_iter().map(|x| x as u32).collect()
        })
        .collect();
    let new_free = coeffs
        .iter()
        .map(|c| free[c.iter().position(|&x| x != 0).unwrap()])
        .collect();
    (new_basis, new_free)
}

impl EigenFunctional {
    /// Wrap a functional given by its coordinates.
    pub fn from_phi(space: Arc<ManinSpace>, phi: Vec<u32>, sign: i8, cut_primes: Vec<u64>) -> Self {
        let f = *space.field();
        let p = f.p() as u64;
        let values = space
            .gen_images()
            .iter()
            .map(|row| {
                (row.iter().fold(0u64, |s, &(b, v)| {
                    (s + v as u64 * phi[b as usize] as u64) % p
                })) as u32
            })
            .collect();
        EigenFunctional {
            space,
            phi,
            values,
            sign,
            cut_primes,
        }
    }

    pub fn space(&self) -> &Arc<ManinSpace> {
        &self.space
    }

    pub fn phi(&self) -> &[u32] {
        &self.phi
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn cut_primes(&self) -> &[u64] {
        &self.cut_primes
    }

    pub fn field(&self) -> &PrimeField {
        self.space.field()
    }

    /// phi on the Manin symbol with P^1 index `i`.
    #[inline]
    pub fn symbol_value(&self, i: usize) -> u32 {
        self.values[i]
    }

    /// The same functional multiplied by a unit.
    pub fn scaled(&self, c: u32) -> Self {
        let f = self.field();
        assert!(c % f.p() != 0, "scaling by zero");
        EigenFunctional {
            space: Arc::clone(&self.space),
            phi: self.phi.iter().map(|&x| f.mul(x, c)).collect(),
            values: self.values.iter().map(|&x| f.mul(x, c)).collect(),
            sign: self.sign,
            cut_primes: self.cut_primes.clone(),
        }
    }

    /// phi(T_ell x) for the Manin symbol x with P^1 index `i`.
    pub fn hecke_value(&self, mats: &[[i64; 4]], i: usize) -> u32 {
        let f = self.field();
        self.space
            .heilbronn_images(i, mats)
            .fold(0u32, |s, t| f.add(s, self.values[t]))
    }

    /// Whether phi o T_ell = a phi (U_ell when ell divides the level).
    pub fn satisfies(&self, ell: u64, a: u32) -> bool {
        let f = self.field();
        let mats = heilbronn_for(&self.space, ell);
        (0..self.space.dim())
            .all(|j| self.hecke_value(&mats, self.space.basis_symbol(j)) == f.mul(a, self.phi[j]))
    }

    /// The scalar a with phi o T_ell = a phi, checked on every basis vector.
    pub fn eigenvalue_readback(&self, ell: u64) -> Result<u32> {
        if !arith::is_prime(ell) {
            return Err(Error::InvalidPrime(ell));
        }
        if self.space.level() % ell == 0 {
            return Err(Error::UseAtkinLehnerPath {
                ell,
                level: self.space.level(),
            });
        }
        let f = self.field();
        let mats = heilbronn_cremona(ell);
        let mut ratio: Option<u32> = None;
        for j in 0..self.space.dim() {
            let lhs = self.hecke_value(&mats, self.space.basis_symbol(j));
            let x = self.phi[j];
            if x == 0 {
                if lhs != 0 {
                    return Err(Error::NotAnEigenfunctional { ell });
                }
                continue;
            }
            let r = f.mul(lhs, f.inv(x));
            match ratio {
                None => ratio = Some(r),
                Some(q) if q != r => return Err(Error::NotAnEigenfunctional { ell }),
                _ => {}
            }
        }
        ratio.ok_or(Error::NotAnEigenfunctional { ell })
    }

    /// phi({oo, a/n}): the plus (or minus) modular symbol [a/n] mod p up to
    /// one global unit.
    pub fn modsym_value(&self, a: i64, n: u64) -> Result<u32> {
        let f = self.field();
        let mut s = 0u32;
        self.space
            .for_each_path_symbol(a, n, |i| s = f.add(s, self.values[i]))?;
        Ok(s)
    }

    /// Unchecked variant for the hot loops: `a` in 0..n with gcd(a, n) = 1.
    #[inline]
    pub fn modsym_value_unchecked(&self, a: u64, n: u64) -> u32 {
        let mut s = 0u64;
        self.space
            .for_each_path_symbol(a as i64, n, |i| s += self.values[i] as u64)
            .expect("reduced fraction");
        (s % self.field().p() as u64) as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formdata::{CurveSpec, EigenData};

    fn level_11(p: u64) -> (Arc<ManinSpace>, EigenData) {
        let e = CurveSpec::new("11a", 11, [0, -1, 1, -10, -20]).unwrap();
        let space = Arc::new(ManinSpace::build(11, p, Sign::Plus).unwrap());
        (space, EigenData::from_curve(&e, p, 60).unwrap())
    }

    #[test]
    fn level_11_functional() {
        let (space, data) = level_11(7);
        let phi = cut_eigenfunctional(space, &data, None, 1).unwrap();
        for ell in [2u64, 3, 5, 13, 17, 19, 23, 29, 31, 37] {
            assert_eq!(
                phi.eigenvalue_readback(ell).unwrap(),
                data.a_ell(ell).unwrap(),
                "ell {ell}"
            );
        }
        // L(11a, 1)/Omega = 1/5 is a 7-adic unit
        assert_ne!(phi.modsym_value(0, 1).unwrap(), 0);
        for n in 1..40u64 {
            for a in 0..n as i64 {
                if arith::gcd(a as u64, n) == 1 {
                    assert_eq!(
                        phi.modsym_value(a, n).unwrap(),
                        phi.modsym_value(-a, n).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn full_space_agrees_with_plus_quotient() {
        let e = CurveSpec::new("37a", 37, [0, 0, 1, -1, 0]).unwrap();
        let data = EigenData::from_curve(&e, 5, 60).unwrap();
        let full = Arc::new(ManinSpace::build(37, 5, Sign::Full).unwrap());
        let plus = Arc::new(ManinSpace::build(37, 5, Sign::Plus).unwrap());
        let a = cut_eigenfunctional(full, &data, None, 1).unwrap();
        let b = cut_eigenfunctional(plus, &data, None, 1).unwrap();
        // verdicts and ratios agree
        let pairs = [(1i64, 7u64), (2, 7), (3, 11), (5, 13), (1, 19), (4, 23)];
        let va: Vec<u32> = pairs
            .iter()
            .map(|&(x, n)| a.modsym_value(x, n).unwrap())
            .collect();
        let vb: Vec<u32> = pairs
            .iter()
            .map(|&(x, n)| b.modsym_value(x, n).unwrap())
            .collect();
        let f = PrimeField::new(5).unwrap();
        let i = va.iter().position(|&x| x != 0).expect("some nonzero value");
        let c = f.mul(vb[i], f.inv(va[i]));
        for (x, y) in va.iter().zip(&vb) {
            assert_eq!(f.mul(*x, c), *y);
        }
        // 37a has rank one, so L(E,1) = 0
        assert_eq!(a.modsym_value(0, 1).unwrap(), 0);
    }

    #[test]
    fn wrong_eigenvalue_is_rejected() {
        let (space, mut data) = level_11(7);
        let bad = (data.a_ell(3).unwrap() + 1) % 7;
        data.eigs.insert(3, bad);
        assert!(matches!(
            cut_eigenfunctional(space, &data, Some(&[2, 3]), 1),
            Err(Error::EigensystemNotFound { .. })
        ));
    }

    #[test]
    fn bad_cut_prime() {
        let (space, mut data) = level_11(7);
        // 11a has split multiplicative reduction at 11
        assert_eq!(data.u_ell(11), Some(1));
        let phi = cut_eigenfunctional(Arc::clone(&space), &data, Some(&[2, 11]), 1).unwrap();
        assert!(phi.satisfies(11, 1));
        assert!(!phi.satisfies(11, 6));
        data.u_eigs.clear();
        assert!(matches!(
            cut_eigenfunctional(space, &data, Some(&[11]), 1),
            Err(Error::UseAtkinLehnerPath { .. })
        ));
    }
}
