//! Recover the coefficients x + y sqrt(d) of a newform with quadratic
//! Hecke field from a few known eigenvalues, working over a prime P in
//! which d is a square, and print them with their images mod a prime
//! above p where sqrt(d) = r mod p.
//!
//! usage: quadratic_form N d P s p r ell:x:y ...
//! where s is a square root of d mod P.

use std::sync::Arc;

use kurihara::arith;
use kurihara::eigen::cut_eigenfunctional;
use kurihara::formdata::EigenData;
use kurihara::{ManinSpace, Sign};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let num = |i: usize| args[i].parse::<i64>().expect("integer");
    let (n, d, big, s, p, r) = (num(0) as u64, num(1), num(2) as u64, num(3), num(4), num(5));
    let space = Arc::new(ManinSpace::build(n, big, Sign::Plus).expect("space"));
    let f = *space.field();
    let mut data = EigenData::new(n, big, format!("{n}")).expect("field");
    let mut cut = Vec::new();
    for spec in &args[6..] {
        let v: Vec<i64> = spec
            .split(':')
            .map(|t| t.parse().expect("ell:x:y"))
            .collect();
        let a = f.add(f.from_i64(v[1]), f.mul(f.from_i64(v[2]), f.from_i64(s)));
        data.set(v[0] as u64, f.lift(a)).expect("prime");
        cut.push(v[0] as u64);
    }
    let phi = cut_eigenfunctional(space, &data, Some(&cut), 1).expect("one-dimensional eigenspace");
    eprintln!("# level {n}, Hecke field Q(sqrt({d})), images mod p = {p} with sqrt({d}) = {r}");
    for ell in arith::primes_in(2, 100) {
        let a = if n % ell == 0 {
            match [-1i64, 0, 1]
                .into_iter()
                .find(|&u| phi.satisfies(ell, f.from_i64(u)))
            {
                Some(u) => f.from_i64(u),
                None => continue,
            }
        } else {
            phi.eigenvalue_readback(ell).expect("eigenvalue")
        };
        let bound = 2.0 * (ell as f64).sqrt();
        let found: Vec<(i64, i64)> = (-20i64..=20)
            .filter_map(|y| {
                let x = f.lift(f.sub(a, f.mul(f.from_i64(y), f.from_i64(s))));
                let re = x as f64 + y as f64 * (d as f64).sqrt();
                let conj = x as f64 - y as f64 * (d as f64).sqrt();
                (re.abs() <= bound + 1e-9 && conj.abs() <= bound + 1e-9).then_some((x, y))
            })
            .collect();
        assert_eq!(
            found.len(),
            1,
            "ambiguous or missing coefficient at {ell}: {found:?}"
        );
        let (x, y) = found[0];
        println!("{ell} {} # {x} + {y} sqrt({d})", (x + y * r).rem_euclid(p));
    }
}
