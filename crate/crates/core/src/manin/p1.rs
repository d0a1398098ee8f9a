use crate::arith::{self, divisors, gcd};
use crate::error::{Error, Result};

const INVALID: u32 = u32::MAX;

/// The projective line P^1(Z/NZ): normalized points (c:d) with
/// gcd(c, d, N) = 1, modulo scaling by units.
///
/// A point is normalized by scaling c to g = gcd(c, N); the remaining freedom
/// is the units congruent to 1 mod N/g, and d is taken minimal in its orbit.
/// Representatives are ordered by g, then d.
#[derive(Clone, Debug)]
pub struct P1Index {
    n: u64,
    reps: Vec<(u32, u32)>,
    divisors: Vec<u64>,
    div_of: Vec<u32>,
    unit_of: Vec<u32>,
    table: Vec<u32>,
}

impl P1Index {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 || n > u32::MAX as u64 / 2 {
            return Err(Error::InvalidArgument(format!("level {n} out of range")));
        }
        let divs = divisors(n);
        let nu = n as usize;
        let mut div_of = vec![0u32; nu];
        let mut unit_of = vec![1u32; nu];
        for c in 0..n {
            let g = gcd(c, n);
            div_of[c as usize] = divs.binary_search(&g).unwrap() as u32;
            let m = n / g;
            if m == 1 {
                continue;
            }
            let inv = arith::inv_mod((c / g) % m, m).expect("c/g is a unit mod N/g");
            let mut u = inv;
            while gcd(u, n) != 1 {
                u += m;
            }
            unit_of[c as usize] = (u % n) as u32;
        }
        let units: Vec<u64> = (0..n).filter(|&u| gcd(u, n) == 1).collect();
        let mut table = vec![INVALID; divs.len() * nu];
        let mut reps = Vec::new();
        for (gi, &g) in divs.iter().enumerate() {
            let m = n / g;
            let h: Vec<u64> = units.iter().copied().filter(|&u| u % m == 1 % m).collect();
            let row = &mut table[gi * nu..(gi + 1) * nu];
            for d in 0..n {
                if row[d as usize] != INVALID || gcd(gcd(g, d), n) != 1 {
                    continue;
                }
                let idx = reps.len() as u32;
                reps.push(((g % n) as u32, d as u32));
                for &u in &h {
                    row[(u * d % n) as usize] = idx;
                }
            }
        }
        Ok(P1Index {
            n,
            reps,
            divisors: divs,
            div_of,
            unit_of,
            table,
        })
    }

    pub fn level(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn rep(&self, i: usize) -> (u32, u32) {
        self.reps[i]
    }

    pub fn reps(&self) -> &[(u32, u32)] {
        &self.reps
    }

    /// Index of (c:d) for residues already reduced mod N; `None` when
    /// gcd(c, d, N) > 1.
    #[inline]
    pub fn index_reduced(&self, c: u32, d: u32) -> Option<usize> {
        let n = self.n;
        let gi = self.div_of[c as usize] as usize;
        let u = self.unit_of[c as usize] as u64;
        let dd = (u * d as u64 % n) as usize;
        let idx = self.table[gi * n as usize + dd];
        (idx != INVALID).then_some(idx as usize)
    }

    /// Index of (c:d) for arbitrary integers.
    pub fn index(&self, c: i64, d: i64) -> Result<usize> {
        let cr = arith::rem(c, self.n) as u32;
        let dr = arith::rem(d, self.n) as u32;
        self.index_reduced(cr, dr)
            .ok_or(Error::NotProjectivePoint { c, d, n: self.n })
    }

    /// Number of points, N * prod_{q | N} (1 + 1/q).
    pub fn expected_len(n: u64) -> u64 {
        arith::prime_divisors(n)
            .into_iter()
            .fold(n, |acc, q| acc / q * (q + 1))
    }

    pub fn divisors(&self) -> &[u64] {
        &self.divisors
    }
}
