//! Prime-field arithmetic and discrete logarithms modulo small primes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::arith::{self, is_prime, mul_mod, pow_mod, prime_divisors};
use crate::error::{Error, Result};

/// The prime field F_p for an odd prime p < 2^31. Elements are `u32`
/// residues in `0..p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p >= 1 << 31 || !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        Ok(PrimeField { p: p as u32 })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        pow_mod(a as u64, e, self.p as u64) as u32
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, a: u32) -> u32 {
        assert!(a % self.p != 0, "inverse of zero in F_{}", self.p);
        self.pow(a, self.p as u64 - 2)
    }

    #[inline]
    pub fn from_i64(&self, a: i64) -> u32 {
        arith::rem(a, self.p as u64) as u32
    }

    #[inline]
    pub fn from_u64(&self, a: u64) -> u32 {
        (a % self.p as u64) as u32
    }

    /// Centered lift in `(-p/2, p/2]`.
    pub fn lift(&self, a: u32) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }

    pub fn is_square(&self, a: u32) -> bool {
        a == 0 || self.pow(a, (self.p as u64 - 1) / 2) == 1
    }
}

/// Smallest generator of (Z/ell Z)^x.
pub fn find_primitive_root(ell: u64) -> Result<u64> {
    if !is_prime(ell) {
        return Err(Error::InvalidPrime(ell));
    }
    if ell == 2 {
        return Ok(1);
    }
    let qs = prime_divisors(ell - 1);
    (2..ell)
        .find(|&g| qs.iter().all(|&q| pow_mod(g, (ell - 1) / q, ell) != 1))
        .ok_or(Error::InvalidPrime(ell))
}

/// All primitive roots mod `ell`, in increasing order.
pub fn primitive_roots(ell: u64) -> Result<Vec<u64>> {
    let g = find_primitive_root(ell)?;
    let mut out: Vec<u64> = (1..ell)
        .filter(|&k| arith::gcd(k, ell - 1) == 1)
        .map(|k| pow_mod(g, k, ell))
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Full tables are used below this bound; baby-step/giant-step above.
pub const FULL_TABLE_LIMIT: u64 = 1 << 20;

#[derive(Clone, Debug)]
enum LogStore {
    Full(Vec<u32>),
    Bsgs {
        m: u64,
        baby: HashMap<u64, u64>,
        giant: u64,
    },
}

/// Discrete logarithms modulo a prime `ell` to a fixed primitive root.
#[derive(Clone, Debug)]
pub struct DlogTable {
    ell: u64,
    eta: u64,
    store: LogStore,
}

impl DlogTable {
    /// Table for the smallest primitive root.
    pub fn new(ell: u64) -> Result<Self> {
        let eta = find_primitive_root(ell)?;
        Self::with_root(ell, eta)
    }

    pub fn with_root(ell: u64, eta: u64) -> Result<Self> {
        if !is_prime(ell) {
            return Err(Error::InvalidPrime(ell));
        }
        let eta = eta % ell;
        let order = arith::mult_order(eta, ell).unwrap_or(0);
        if order != ell - 1 {
            return Err(Error::InvalidArgument(format!(
                "{eta} is not a primitive root mod {ell}"
            )));
        }
        let store = if ell < FULL_TABLE_LIMIT {
            let mut logs = vec![0u32; ell as usize];
            let mut x = 1u64;
            for k in 0..ell - 1 {
                logs[x as usize] = k as u32;
                x = x * eta % ell;
            }
            LogStore::Full(logs)
        } else {
            let m = arith::isqrt(ell - 1) + 1;
            let mut baby = HashMap::with_capacity(m as usize);
            let mut x = 1u64;
            for j in 0..m {
                baby.entry(x).or_insert(j);
                x = mul_mod(x, eta, ell);
            }
            let giant = pow_mod(arith::inv_mod(eta, ell).unwrap(), m, ell);
            LogStore::Bsgs { m, baby, giant }
        };
        Ok(DlogTable { ell, eta, store })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn eta(&self) -> u64 {
        self.eta
    }

    /// log_eta(a) in Z/(ell-1).
    pub fn log(&self, a: i64) -> Result<u64> {
        let a = arith::rem(a, self.ell);
        if a == 0 {
            return Err(Error::NotAUnit {
                a: a as i64,
                modulus: self.ell,
            });
        }
        match &self.store {
            LogStore::Full(logs) => Ok(logs[a as usize] as u64),
            LogStore::Bsgs { m, baby, giant } => {
                let mut y = a;
                for i in 0..*m {
                    if let Some(j) = baby.get(&y) {
                        return Ok((i * m + j) % (self.ell - 1));
                    }
                    y = mul_mod(y, *giant, self.ell);
                }
                unreachable!("eta is a primitive root")
            }
        }
    }

    /// Logs reduced mod p for every residue `0..ell` (entry 0 is unused and
    /// set to 0). Used in the hot summation loops.
    pub fn reduced_table(&self, p: u32) -> Vec<u32> {
        (0..self.ell)
            .map(|a| {
                if a == 0 {
                    0
                } else {
                    (self.log(a as i64).unwrap() % p as u64) as u32
                }
            })
            .collect()
    }

    /// Serialize as `DLOGv1 ell eta` followed by `ell eta a log` lines.
    pub fn to_cache_string(&self) -> String {
        let mut s = format!("DLOGv1 {} {}\n", self.ell, self.eta);
        for a in 1..self.ell {
            let _ = writeln!(
                s,
                "{} {} {} {}",
                self.ell,
                self.eta,
                a,
                self.log(a as i64).unwrap()
            );
        }
        s
    }

    /// Parse a cache file and check every record against the root.
    pub fn from_cache_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty dlog cache".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 || h[0] != "DLOGv1" {
            return Err(Error::Parse(format!("bad dlog header: {header}")));
        }
        let ell: u64 = h[1].parse().map_err(|_| Error::Parse(header.into()))?;
        let eta: u64 = h[2].parse().map_err(|_| Error::Parse(header.into()))?;
        let table = Self::with_root(ell, eta)?;
        let mut expected_a = 1u64;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let f: Vec<u64> = line
                .split_whitespace()
                .map(|x| x.parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(line.into()))?;
            if f.len() != 4 || f[0] != ell || f[1] != eta || f[2] != expected_a {
                return Err(Error::Parse(format!("bad dlog record: {line}")));
            }
            if table.log(f[2] as i64)? != f[3] {
                return Err(Error::Parse(format!("inconsistent dlog record: {line}")));
            }
            expected_a += 1;
        }
        if expected_a != ell {
            return Err(Error::Parse("truncated dlog cache".into()));
        }
        Ok(table)
    }

    /// Load `dlog_<ell>_<eta>.txt` from `dir`, building and writing it on a miss.
    pub fn cached(dir: &Path, ell: u64, eta: u64) -> Result<Self> {
        let path = dir.join(format!("dlog_{ell}_{eta}.txt"));
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(t) = Self::from_cache_str(&text) {
                return Ok(t);
            }
        }
        let t = Self::with_root(ell, eta)?;
        std::fs::create_dir_all(dir)?;
        std::fs::write(&path, t.to_cache_string())?;
        Ok(t)
    }
}

/// log_eta(a) reduced mod p.
pub fn dlog_mod_p(table: &DlogTable, a: i64, p: u64) -> Result<u64> {
    Ok(table.log(a)? % p)
}
