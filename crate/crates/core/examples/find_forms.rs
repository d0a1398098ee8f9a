//! Find the rational newforms of weight two on Gamma0(N) and print their
//! eigenvalues as EIGSv1 files.
//!
//! Works in the plus space over a large prime P: integer eigenvalues are
//! the roots of Wiedemann minimal polynomials inside the Hasse interval,
//! eigenvectors come from projecting a random vector with the cofactor
//! polynomial, and old forms are discarded because U_q is not a scalar
//! in {0, 1, -1} on them.
//!
//! usage: find_forms N p [ell ...]
//! Prints every rational newform whose listed primes are Kolyvagin mod p.

use std::sync::Arc;

use kurihara::arith;
use kurihara::eigen::EigenFunctional;
use kurihara::manin::heilbronn_merel;
use kurihara::{ManinSpace, PrimeField, Sign, SparseMat};
use rand::{Rng, SeedableRng};

const BIG: u64 = 1_000_000_007;

fn berlekamp_massey(f: &PrimeField, s: &[u32]) -> Vec<u32> {
    // connection polynomial c with c[0] = 1
    let (mut c, mut b) = (vec![1u32], vec![1u32]);
    let (mut l, mut m, mut bb) = (0usize, 1usize, 1u32);
    for n in 0..s.len() {
        let mut d = s[n];
        for i in 1..=l.min(c.len() - 1) {
            d = f.add(d, f.mul(c[i], s[n - i]));
        }
        if d == 0 {
            m += 1;
            continue;
        }
        let coef = f.mul(d, f.inv(bb));
        let t = c.clone();
        if c.len() < b.len() + m {
            c.resize(b.len() + m, 0);
        }
        for (i, &x) in b.iter().enumerate() {
            c[i + m] = f.sub(c[i + m], f.mul(coef, x));
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = t;
            bb = d;
            m = 1;
        } else {
            m += 1;
        }
    }
    c.resize(l + 1, 0);
    // minimal polynomial = reversed connection polynomial, monic
    c.reverse();
    c
}

/// Minimal polynomial of `t` acting on `v` (coefficients low to high).
fn minpoly_on(f: &PrimeField, t: &SparseMat, v: &[u32], u: &[u32]) -> Vec<u32> {
    let dot = |x: &[u32]| {
        x.iter()
            .zip(u)
            .fold(0u32, |s, (&a, &b)| f.add(s, f.mul(a, b)))
    };
    let mut seq = vec![dot(v)];
    let mut w = v.to_vec();
    let mut poly = vec![1u32];
    loop {
        // extend the sequence to twice the current degree plus slack
        let target = 2 * (poly.len() - 1) + 16;
        while seq.len() < target && seq.len() <= 2 * v.len() + 2 {
            w = t.mul_vec(f, &w);
            seq.push(dot(&w));
        }
        let next = berlekamp_massey(f, &seq);
        if next == poly || seq.len() > 2 * v.len() + 2 {
            return next;
        }
        poly = next;
    }
}

fn eval(f: &PrimeField, poly: &[u32], x: u32) -> u32 {
    poly.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
}

/// Divide by (x - a).
fn deflate(f: &PrimeField, poly: &[u32], a: u32) -> Vec<u32> {
    let n = poly.len() - 1;
    let mut q = vec![0u32; n];
    let mut carry = 0u32;
    for i in (0..n).rev() {
        carry = f.add(poly[i + 1], f.mul(carry, a));
        q[i] = carry;
    }
    q
}

/// q(T) v by Horner.
fn apply_poly(f: &PrimeField, t: &SparseMat, q: &[u32], v: &[u32]) -> Vec<u32> {
    let mut w = vec![0u32; v.len()];
    for &c in q.iter().rev() {
        w = t.mul_vec(f, &w);
        for (x, &y) in w.iter_mut().zip(v) {
            *x = f.add(*x, f.mul(c, y));
        }
    }
    w
}

/// Integer roots in the Hasse interval with their multiplicities.
fn hasse_roots(f: &PrimeField, poly: &[u32], ell: u64) -> Vec<(i64, Vec<u32>)> {
    let bound = (2.0 * (ell as f64).sqrt()).floor() as i64;
    let mut out = Vec::new();
    for a in -bound..=bound {
        let x = f.from_i64(a);
        let mut q = poly.to_vec();
        let mut mult = 0;
        while q.len() > 1 && eval(f, &q, x) == 0 {
            q = deflate(f, &q, x);
            mult += 1;
        }
        if mult > 0 {
            out.push((a, q));
        }
    }
    out
}

fn u_matrix(space: &ManinSpace, q: u64) -> SparseMat {
    let f = *space.field();
    let mats = heilbronn_merel(q);
    let rows = (0..space.dim())
        .map(|j| {
            let mut acc = vec![0u32; space.dim()];
            for t in space.heilbronn_images(space.basis_symbol(j), &mats) {
                for &(b, v) in space.gen_image(t) {
                    acc[b as usize] = f.add(acc[b as usize], v);
                }
            }
            acc.iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(b, &v)| (b as u32, v))
                .collect()
        })
        .collect();
    SparseMat::from_rows(space.dim(), rows)
}

fn main() {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("integer"))
        .collect();
    let (n, p, wanted) = (args[0], args[1], &args[2..]);
    let space = Arc::new(ManinSpace::build(n, BIG, Sign::Plus).expect("space"));
    let f = *space.field();
    let dim = space.dim();
    eprintln!("level {n}: plus dimension {dim}");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(n);
    let good: Vec<u64> = arith::primes_in(2, 200).filter(|&l| n % l != 0).collect();
    let bad = arith::prime_divisors(n);
    let u: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..f.p())).collect();
    let v: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..f.p())).collect();

    // depth-first over eigenvalues of the good primes in order; `run`
    // counts consecutive primes acting as scalars
    let mut hecke = std::collections::HashMap::new();
    let mut stack: Vec<(usize, Vec<u32>, Vec<(u64, i64)>, usize)> = vec![(0, v, Vec::new(), 0)];
    let mut forms: Vec<Vec<u32>> = Vec::new();
    while let Some((depth, w, path, run)) = stack.pop() {
        if depth == good.len() {
            eprintln!("unsplit system {path:?}");
            continue;
        }
        let ell = good[depth];
        let t = hecke
            .entry(ell)
            .or_insert_with(|| space.hecke_matrix(ell).unwrap());
        let m = minpoly_on(&f, t, &w, &u);
        if m.len() == 2 {
            let mut path = path.clone();
            path.push((ell, f.lift(f.neg(m[0]))));
            if run + 1 >= 8 {
                if is_new(&space, &w, &bad) {
                    eprintln!("newform {:?}", &path[..6]);
                    forms.push(w);
                } else {
                    eprintln!("old form {:?}", &path[..6]);
                }
                continue;
            }
            stack.push((depth + 1, w, path, run + 1));
            continue;
        }
        for (a, cof) in hasse_roots(&f, &m, ell) {
            let proj = apply_poly(&f, t, &cof, &w);
            if proj.iter().all(|&x| x == 0) {
                continue;
            }
            let mut path = path.clone();
            path.push((ell, a));
            stack.push((depth + 1, proj, path, 0));
        }
    }
    let mut found = Vec::new();
    for w in forms {
        let phi = EigenFunctional::from_phi(Arc::clone(&space), w, 1, vec![]);
        let value = |l: u64| {
            if n % l == 0 {
                u_value(&space, &phi, l).expect("U_q eigenvalue")
            } else {
                f.lift(phi.eigenvalue_readback(l).expect("eigenvalue"))
            }
        };
        let aps: Vec<(u64, i64)> = arith::primes_in(2, 100)
            .chain(bad.iter().copied().filter(|&q| q > 100))
            .map(|l| (l, value(l)))
            .collect();
        let kol: Vec<(u64, i64)> = wanted.iter().map(|&l| (l, value(l))).collect();
        found.push((traces(n, &aps, 100), aps, kol));
    }
    found.sort();
    for (i, (_, aps, kol)) in found.iter().enumerate() {
        let ok = kol
            .iter()
            .all(|&(l, a)| l % p == 1 && (a - 2).rem_euclid(p as i64) == 0);
        let label = format!("{n}.{}", class_letters(i));
        println!(
            "# {label} {:?} listed {kol:?} Kolyvagin mod {p}: {ok}",
            &aps[..8]
        );
        if ok {
            let ap = aps.iter().find(|x| x.0 == p).map_or(0, |x| x.1);
            println!("EIGSv1\nN={n}\np={p}\nap={ap}\npsi_p=1\nlabel={label}");
            for (l, a) in aps {
                println!("{l} {a}");
            }
        }
    }
}

fn class_letters(mut i: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (i % 26) as u8);
        i /= 26;
        if i == 0 {
            break;
        }
    }
    s.reverse();
    String::from_utf8(s).unwrap()
}

/// a_1, ..., a_bound from the prime coefficients.
fn traces(n: u64, aps: &[(u64, i64)], bound: u64) -> Vec<i64> {
    let mut a = vec![0i64; bound as usize + 1];
    a[1] = 1;
    for m in 2..=bound {
        let (q, _) = arith::factor(m)[0];
        let mut k = m;
        let mut e = 0;
        while k % q == 0 {
            k /= q;
            e += 1;
        }
        let aq = aps.iter().find(|x| x.0 == q).unwrap().1;
        let mut pw = vec![1i64, aq];
        for j in 2..=e {
            let eps = if n % q == 0 { 0 } else { q as i64 };
            pw.push(aq * pw[j - 1] - eps * pw[j - 2]);
        }
        a[m as usize] = pw[e] * a[k as usize];
    }
    a[1..].to_vec()
}

fn u_value(space: &ManinSpace, phi: &EigenFunctional, q: u64) -> Option<i64> {
    [-1i64, 0, 1]
        .into_iter()
        .find(|&a| phi.satisfies(q, space.field().from_i64(a)))
}

/// U_q acts on w by a scalar in {0, 1, -1} for every q | N.
fn is_new(space: &ManinSpace, w: &[u32], bad: &[u64]) -> bool {
    let f = *space.field();
    bad.iter().all(|&q| {
        let uq = u_matrix(space, q);
        let x = uq.mul_vec(&f, w);
        [-1i64, 0, 1].iter().any(|&a| {
            let a = f.from_i64(a);
            x.iter().zip(w).all(|(&y, &z)| y == f.mul(a, z))
        })
    })
}
