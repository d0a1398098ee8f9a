//! Polynomials over F_p, the extension F_{p^k} = F_p[x]/(m(x)) and
//! cyclotomic polynomials. Used by the derivative oracle only.

use num_bigint::BigUint;

use crate::arith::{self, prime_divisors};
use crate::error::{Error, Result};
use crate::fp::PrimeField;

/// Dense polynomial, coefficients from degree 0 upward, no trailing zeros.
pub type Poly = Vec<u32>;

pub const DEFAULT_MAX_DEGREE: u64 = 64;

fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub fn poly_add(f: &PrimeField, a: &[u32], b: &[u32]) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| f.add(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
        .collect();
    trim(out)
}

pub fn poly_sub(f: &PrimeField, a: &[u32], b: &[u32]) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| f.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
        .collect();
    trim(out)
}

pub fn poly_mul(f: &PrimeField, a: &[u32], b: &[u32]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let p = f.p() as u64;
    let mut acc = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            acc[i + j] = (acc[i + j] + x as u64 * y as u64) % p;
        }
    }
    trim(acc.into_iter().map(|v| v as u32).collect())
}

/// Quotient and remainder of `a` by a nonzero `b`.
pub fn poly_divrem(f: &PrimeField, a: &[u32], b: &[u32]) -> (Poly, Poly) {
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lead_inv = f.inv(*b.last().unwrap());
    let db = b.len() - 1;
    let mut q = vec![0u32; r.len() - db];
    for i in (0..q.len()).rev() {
        let c = f.mul(r[i + db], lead_inv);
        q[i] = c;
        if c == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            r[i + j] = f.sub(r[i + j], f.mul(c, bj));
        }
    }
    r.truncate(db);
    (trim(q), trim(r))
}

pub fn poly_rem(f: &PrimeField, a: &[u32], b: &[u32]) -> Poly {
    poly_divrem(f, a, b).1
}

pub fn poly_gcd(f: &PrimeField, a: &[u32], b: &[u32]) -> Poly {
    let (mut x, mut y) = (trim(a.to_vec()), trim(b.to_vec()));
    while !y.is_empty() {
        let r = poly_rem(f, &x, &y);
        x = y;
        y = r;
    }
    if let Some(&lead) = x.last() {
        let li = f.inv(lead);
        x.iter_mut().for_each(|c| *c = f.mul(*c, li));
    }
    x
}

fn poly_mulmod(f: &PrimeField, a: &[u32], b: &[u32], m: &[u32]) -> Poly {
    poly_rem(f, &poly_mul(f, a, b), m)
}

fn poly_powmod(f: &PrimeField, base: &[u32], exp: &BigUint, m: &[u32]) -> Poly {
    let mut acc: Poly = vec![1];
    let base = poly_rem(f, base, m);
    for i in (0..exp.bits()).rev() {
        acc = poly_mulmod(f, &acc, &acc, m);
        if exp.bit(i) {
            acc = poly_mulmod(f, &acc, &base, m);
        }
    }
    poly_rem(f, &acc, m)
}

/// Rabin's test: m of degree k is irreducible iff x^{p^k} = x mod m and
/// gcd(x^{p^{k/q}} - x, m) = 1 for every prime q | k.
pub fn is_irreducible(f: &PrimeField, m: &[u32]) -> bool {
    let m = trim(m.to_vec());
    if m.len() < 2 {
        return false;
    }
    let k = (m.len() - 1) as u64;
    let p = BigUint::from(f.p());
    let x: Poly = vec![0, 1];
    // frob[i] = x^{p^i} mod m
    let mut frob = vec![poly_rem(f, &x, &m)];
    for i in 0..k as usize {
        let next = poly_powmod(f, &frob[i], &p, &m);
        frob.push(next);
    }
    if frob[k as usize] != poly_rem(f, &x, &m) {
        return false;
    }
    for q in prime_divisors(k) {
        let d = poly_sub(f, &frob[(k / q) as usize], &x);
        if poly_gcd(f, &d, &m).len() != 1 {
            return false;
        }
    }
    true
}

/// Monic polynomial whose low coefficients are the base-p digits of `idx`.
fn enumerated_monic(p: u64, k: u64, mut idx: u64) -> Poly {
    let mut c = vec![0u32; k as usize + 1];
    c[k as usize] = 1;
    for slot in c.iter_mut().take(k as usize) {
        *slot = (idx % p) as u32;
        idx /= p;
    }
    c
}

/// F_{p^k} with an optional distinguished root of unity of exact order n.
#[derive(Clone, Debug)]
pub struct ExtField {
    pub base: PrimeField,
    pub k: u64,
    pub modulus: Poly,
    pub n: u64,
    pub zeta: Option<Poly>,
}

impl ExtField {
    pub fn p(&self) -> u32 {
        self.base.p()
    }

    pub fn one(&self) -> Poly {
        vec![1]
    }

    pub fn mul(&self, a: &[u32], b: &[u32]) -> Poly {
        poly_mulmod(&self.base, a, b, &self.modulus)
    }

    pub fn add(&self, a: &[u32], b: &[u32]) -> Poly {
        poly_add(&self.base, a, b)
    }

    pub fn scale(&self, a: &[u32], c: u32) -> Poly {
        trim(a.iter().map(|&x| self.base.mul(x, c)).collect())
    }

    pub fn pow(&self, a: &[u32], e: u64) -> Poly {
        poly_powmod(&self.base, a, &BigUint::from(e), &self.modulus)
    }

    /// Value in F_p when the element lies in the prime field.
    pub fn as_prime(&self, a: &[u32]) -> Option<u32> {
        match a.len() {
            0 => Some(0),
            1 => Some(a[0]),
            _ => None,
        }
    }
}

/// Build F_p(mu_n) = F_{p^k}, k = ord_n(p), with zeta of exact order n.
pub fn build_ext_field(p: u64, n: u64) -> Result<ExtField> {
    build_ext_field_bounded(p, n, DEFAULT_MAX_DEGREE)
}

pub fn build_ext_field_bounded(p: u64, n: u64, max_degree: u64) -> Result<ExtField> {
    let base = PrimeField::new(p)?;
    if n == 0 || arith::gcd(n, p) != 1 {
        return Err(Error::RamifiedModulus { n, p });
    }
    let k = arith::mult_order(p % n, n).unwrap_or(1).max(1);
    if k > max_degree {
        return Err(Error::ExtensionTooLarge {
            k,
            bound: max_degree,
        });
    }
    let modulus = (0..)
        .map(|i| enumerated_monic(p, k, i))
        .find(|m| is_irreducible(&base, m))
        .expect("irreducible polynomials exist in every degree");
    let mut field = ExtField {
        base,
        k,
        modulus,
        n,
        zeta: None,
    };
    if n == 1 {
        field.zeta = Some(vec![1]);
        return Ok(field);
    }
    let order = BigUint::from(p).pow(k as u32) - 1u32;
    let cofactor = &order / n;
    let qs = prime_divisors(n);
    for i in 1.. {
        let mut cand = enumerated_monic(p, k, i);
        cand.pop();
        let cand = trim(cand);
        let z = poly_powmod(&base, &cand, &cofactor, &field.modulus);
        if z.is_empty() {
            continue;
        }
        if qs.iter().all(|&q| field.pow(&z, n / q) != vec![1]) {
            debug_assert_eq!(field.pow(&z, n), vec![1]);
            field.zeta = Some(z);
            break;
        }
    }
    Ok(field)
}

/// n-th cyclotomic polynomial reduced mod p (n squarefree or not).
pub fn cyclotomic_poly(f: &PrimeField, n: u64) -> Poly {
    // Phi_n = prod_{d | n} (x^d - 1)^{mu(n/d)}
    let mut num: Poly = vec![1];
    let mut den: Poly = vec![1];
    for d in arith::divisors(n) {
        let m = n / d;
        let fac = arith::factor(m);
        if fac.iter().any(|&(_, e)| e > 1) {
            continue;
        }
        let mut xd = vec![0u32; d as usize + 1];
        xd[0] = f.neg(1);
        xd[d as usize] = 1;
        if fac.len() % 2 == 0 {
            num = poly_mul(f, &num, &xd);
        } else {
            den = poly_mul(f, &den, &xd);
        }
    }
    let (q, r) = poly_divrem(f, &num, &den);
    debug_assert!(r.is_empty());
    q
}
