use rand::{Rng, SeedableRng};

use super::*;
use crate::linalg::kernel_basis;

fn add_row(f: &PrimeField, acc: &mut [u32], row: &[(u32, u32)], scale: u32) {
    for &(b, v) in row {
        acc[b as usize] = f.add(acc[b as usize], f.mul(v, scale));
    }
}

fn relation_closure(space: &ManinSpace) {
    let f = *space.field();
    let p1 = space.p1();
    for i in 0..p1.len() {
        let (c, d) = p1.rep(i);
        let (c, d) = (c as i64, d as i64);
        let s = p1.index(d, -c).unwrap();
        let mut acc = vec![0u32; space.dim()];
        add_row(&f, &mut acc, space.gen_image(i), 1);
        add_row(&f, &mut acc, space.gen_image(s), 1);
        assert!(acc.iter().all(|&x| x == 0), "two-term relation at {i}");
        let t1 = p1.index(d, -c - d).unwrap();
        let t2 = p1.index(-c - d, c).unwrap();
        let mut acc = vec![0u32; space.dim()];
        add_row(&f, &mut acc, space.gen_image(i), 1);
        add_row(&f, &mut acc, space.gen_image(t1), 1);
        add_row(&f, &mut acc, space.gen_image(t2), 1);
        assert!(acc.iter().all(|&x| x == 0), "three-term relation at {i}");
    }
}

#[test]
fn dimensions_small_levels() {
    // 2g + cusps - 1
    assert_eq!(ManinSpace::build(11, 5, Sign::Full).unwrap().dim(), 3);
    assert_eq!(ManinSpace::build(11, 5, Sign::Plus).unwrap().dim(), 2);
    assert_eq!(ManinSpace::build(11, 5, Sign::Minus).unwrap().dim(), 1);
    assert_eq!(ManinSpace::build(37, 5, Sign::Full).unwrap().dim(), 5);
    // genus 0 and a single cusp: the space vanishes
    assert_eq!(ManinSpace::build(1, 5, Sign::Full).unwrap().dim(), 0);
    assert!(matches!(
        ManinSpace::build(15, 5, Sign::Full),
        Err(Error::BadResidueCharacteristic { .. })
    ));
}

#[test]
fn relations_hold_exhaustively() {
    for (n, p) in [(11u64, 5u64), (37, 3), (60, 7), (121, 5)] {
        for sign in [Sign::Full, Sign::Plus, Sign::Minus] {
            relation_closure(&ManinSpace::build(n, p, sign).unwrap());
        }
    }
}

#[test]
fn star_is_an_involution() {
    for (n, p) in [(11u64, 5u64), (60, 7), (97, 3)] {
        let s = ManinSpace::build(n, p, Sign::Full).unwrap();
        let f = *s.field();
        let st = s.star();
        assert_eq!(st.mul(&f, st), SparseMat::identity(s.dim()));
    }
}

fn kernel_dim(f: &PrimeField, m: &SparseMat) -> usize {
    kernel_basis(f, m).len()
}

#[test]
fn level_11_eigenvalues() {
    let s = ManinSpace::build(11, 7, Sign::Full).unwrap();
    let f = *s.field();
    // a_2 = -2, a_3 = -1, a_7 = -2 on the cusp form, 1 + ell on the Eisenstein line
    for (ell, a) in [(2u64, -2i64), (3, -1), (7, -2)] {
        let t = s.hecke_matrix(ell).unwrap();
        assert_eq!(kernel_dim(&f, &t.sub_scalar(&f, f.from_i64(a))), 2);
        assert_eq!(
            kernel_dim(&f, &t.sub_scalar(&f, f.from_i64(1 + ell as i64))),
            1
        );
    }
    // mod 5 the two systems are congruent and T_2 is not semisimple
    let s5 = ManinSpace::build(11, 5, Sign::Full).unwrap();
    let f5 = *s5.field();
    let t2 = s5.hecke_matrix(2).unwrap();
    assert_eq!(kernel_dim(&f5, &t2.sub_scalar(&f5, 3)), 2);
    assert!(matches!(
        s.hecke_matrix(11),
        Err(Error::UseAtkinLehnerPath { .. })
    ));
}

#[test]
fn hecke_commutes() {
    for (n, p) in [(37u64, 5u64), (60, 7), (143, 3)] {
        let s = ManinSpace::build(n, p, Sign::Full).unwrap();
        let f = *s.field();
        let good: Vec<u64> = arith::primes_in(2, 30)
            .filter(|&l| n % l != 0)
            .take(4)
            .collect();
        let mats: Vec<SparseMat> = good.iter().map(|&l| s.hecke_matrix(l).unwrap()).collect();
        for a in &mats {
            assert_eq!(a.mul(&f, s.star()), s.star().mul(&f, a));
            for b in &mats {
                assert_eq!(a.mul(&f, b), b.mul(&f, a));
            }
        }
    }
}

/// Class of {b/m, a/n} computed from g in SL_2(Z) with g(oo) = b/m and the
/// integer continued fraction of g^{-1}(a/n), without reducing mod n.
fn path_between(space: &ManinSpace, b: i64, m: i64, a: i64, n: i64) -> Vec<u32> {
    let f = *space.field();
    let (_, x0, y0) = arith::egcd(b as i128, m as i128);
    // b*y - x*m = 1 with y = x0, x = -y0
    let (y, x) = (x0 as i64, -(y0 as i64));
    assert_eq!(b * y - x * m, 1);
    let (mut num, mut den) = (y * a - x * n, -m * a + b * n);
    if den < 0 {
        num = -num;
        den = -den;
    }
    let mut acc = vec![0u32; space.dim()];
    // convergents of num/den, p_{-1}/q_{-1} = 1/0
    let (mut p_prev, mut q_prev) = (1i64, 0i64);
    let a0 = num.div_euclid(den);
    let (mut p_cur, mut q_cur) = (a0, 1i64);
    let (mut u, mut v) = (den, num - a0 * den);
    let mut k = 0i64;
    loop {
        let s = if k % 2 == 1 { 1 } else { -1 };
        // bottom row of g * [[s p_k, p_{k-1}], [s q_k, q_{k-1}]]
        let c = m * s * p_cur + y * s * q_cur;
        let d = m * p_prev + y * q_prev;
        let i = space.p1().index(c, d).unwrap();
        add_row(&f, &mut acc, space.gen_image(i), 1);
        if v == 0 {
            break;
        }
        let t = u / v;
        (u, v) = (v, u - t * v);
        (p_prev, p_cur) = (p_cur, t * p_cur + p_prev);
        (q_prev, q_cur) = (q_cur, t * q_cur + q_prev);
        k += 1;
    }
    acc
}

#[test]
fn path_additivity() {
    let s = ManinSpace::build(60, 7, Sign::Full).unwrap();
    let f = *s.field();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(60);
    let mut checked = 0;
    while checked < 200 {
        let n = rng.gen_range(1..500i64);
        let m = rng.gen_range(1..500i64);
        let a = rng.gen_range(-1000..1000i64);
        let b = rng.gen_range(-1000..1000i64);
        if arith::gcd_i(a, n) != 1 || arith::gcd_i(b, m) != 1 || a * m == b * n {
            continue;
        }
        let lhs: Vec<u32> = s
            .eval_path(a, n as u64)
            .unwrap()
            .iter()
            .zip(s.eval_path(b, m as u64).unwrap())
            .map(|(&x, y)| f.sub(x, y))
            .collect();
        assert_eq!(lhs, path_between(&s, b, m, a, n), "{b}/{m} -> {a}/{n}");
        checked += 1;
    }
}

#[test]
fn path_basics() {
    let s = ManinSpace::build(37, 5, Sign::Full).unwrap();
    assert_eq!(s.eval_path(3, 7).unwrap(), s.eval_path(10, 7).unwrap());
    let inf0 = s.eval_path(0, 1).unwrap();
    assert_eq!(inf0, s.eval_path(0, 1).unwrap());
    let mut single = vec![0u32; s.dim()];
    add_row(
        s.field(),
        &mut single,
        s.gen_image(s.p1().index(1, 0).unwrap()),
        1,
    );
    assert_eq!(inf0, single);
    assert!(matches!(
        s.eval_path(2, 4),
        Err(Error::NotReducedFraction { .. })
    ));
}

#[test]
fn star_matches_reflection() {
    let s = ManinSpace::build(77, 3, Sign::Full).unwrap();
    let f = *s.field();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let n = rng.gen_range(1..2000u64);
        let a = rng.gen_range(0..n as i64);
        if arith::gcd(a as u64, n) != 1 {
            continue;
        }
        let v = s.eval_path(a, n).unwrap();
        assert_eq!(s.star().vec_mul(&f, &v), s.eval_path(-a, n).unwrap());
    }
}

#[test]
fn cache_round_trip_is_exact() {
    for sign in [Sign::Full, Sign::Plus] {
        let s = ManinSpace::build(91, 5, sign).unwrap();
        let text = s.to_cache_string();
        let back = ManinSpace::from_cache_str(&text).unwrap();
        assert_eq!(back.to_cache_string(), text);
        assert_eq!(back.gen_images(), s.gen_images());
        assert!(ManinSpace::from_cache_str(&text.replacen("MSPACEv1", "MSPACEv2", 1)).is_err());
    }
}

#[test]
fn heilbronn_count_sane() {
    assert_eq!(heilbronn_cremona(2).len(), 4);
    assert!(heilbronn_cremona(3).len() >= 4);
}
