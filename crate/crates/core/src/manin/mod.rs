//! Weight-two Manin symbols for Gamma_0(N) over F_p: the relation quotient,
//! the star involution, Hecke operators and paths {oo, a/n}.

mod heilbronn;
mod p1;

use std::fmt::Write as _;

pub use heilbronn::{heilbronn_cremona, heilbronn_merel};
pub use p1::P1Index;

use crate::arith::{self, gcd};
use crate::error::{Error, Result};
use crate::fp::PrimeField;
use crate::linalg::{relation_quotient, SparseMat, SparseRow};

/// Which quotient of the symbol space to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    /// All of H_1(X_0(N), cusps; F_p).
    Full,
    /// Quotient by x = star(x).
    Plus,
    /// Quotient by x = -star(x).
    Minus,
}

impl Sign {
    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Full => "full",
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        }
    }

    fn parse(s: &str) -> Option<Sign> {
        match s {
            "full" => Some(Sign::Full),
            "plus" => Some(Sign::Plus),
            "minus" => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// A Manin symbol space over F_p.
///
/// Every P^1(Z/NZ) point (c:d) stands for the path g{0, oo} with g in
/// SL_2(Z) having bottom row (c, d). `gen_image[i]` is the coordinate vector
/// of symbol i in the quotient; `basis[j]` is a symbol whose image is e_j.
#[derive(Clone, Debug)]
pub struct ManinSpace {
    level: u64,
    field: PrimeField,
    sign: Sign,
    p1: P1Index,
    dim: usize,
    gen_image: Vec<SparseRow>,
    basis: Vec<u32>,
    star: SparseMat,
}

/// Signed union-find: x_i = coef[i] * x_parent[i].
struct SignedDsu {
    parent: Vec<u32>,
    coef: Vec<bool>, // true means -1
    zero: Vec<bool>,
}

impl SignedDsu {
    fn new(n: usize) -> Self {
        SignedDsu {
            parent: (0..n as u32).collect(),
            coef: vec![false; n],
            zero: vec![false; n],
        }
    }

    fn find(&mut self, i: usize) -> (usize, bool) {
        let mut path = Vec::new();
        let mut x = i;
        while self.parent[x] as usize != x {
            path.push(x);
            x = self.parent[x] as usize;
        }
        let root = x;
        // compress from the top so each node's coefficient is relative to root
        for &y in path.iter().rev() {
            let par = self.parent[y] as usize;
            if par != root {
                self.coef[y] ^= self.coef[par];
            }
            self.parent[y] = root as u32;
        }
        (root, self.coef[i] && i != root)
    }

    /// Impose x_i = (neg ? -1 : 1) * x_j.
    fn relate(&mut self, i: usize, j: usize, neg: bool) {
        let (ri, ci) = self.find(i);
        let (rj, cj) = self.find(j);
        // x_ri = ci * s * cj * x_rj
        let s = ci ^ neg ^ cj;
        if ri == rj {
            if s {
                self.zero[ri] = true;
            }
            return;
        }
        let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
        self.parent[hi] = lo as u32;
        self.coef[hi] = s;
        if self.zero[hi] {
            self.zero[lo] = true;
        }
    }
}

impl ManinSpace {
    /// Build the symbol space of level `n` over F_p.
    pub fn build(n: u64, p: u64, sign: Sign) -> Result<Self> {
        let field = PrimeField::new(p)?;
        if n % p == 0 {
            return Err(Error::BadResidueCharacteristic { level: n, p });
        }
        let p1 = P1Index::new(n)?;
        let len = p1.len();
        let nn = n as i64;
        let idx = |c: i64, d: i64| p1.index(c, d).expect("valid projective point");
        let sigma: Vec<usize> = p1
            .reps()
            .iter()
            .map(|&(c, d)| idx(d as i64, -(c as i64)))
            .collect();
        let tau: Vec<usize> = p1
            .reps()
            .iter()
            .map(|&(c, d)| idx(d as i64, -(c as i64) - d as i64 + 2 * nn))
            .collect();
        let star: Vec<usize> = p1
            .reps()
            .iter()
            .map(|&(c, d)| idx(-(c as i64), d as i64))
            .collect();

        let mut dsu = SignedDsu::new(len);
        for i in 0..len {
            dsu.relate(i, sigma[i], true);
        }
        match sign {
            Sign::Plus => (0..len).for_each(|i| dsu.relate(i, star[i], false)),
            Sign::Minus => (0..len).for_each(|i| dsu.relate(i, star[i], true)),
            Sign::Full => {}
        }
        // compact numbering of surviving classes
        let mut class = vec![(u32::MAX, false); len];
        let mut class_rep: Vec<u32> = Vec::new();
        let mut col_of_root = vec![u32::MAX; len];
        for i in 0..len {
            let (r, c) = dsu.find(i);
            if dsu.zero[r] {
                continue;
            }
            if col_of_root[r] == u32::MAX {
                col_of_root[r] = class_rep.len() as u32;
                class_rep.push(r as u32);
            }
            class[i] = (col_of_root[r], c);
        }
        let ncols = class_rep.len();
        let minus_one = field.neg(1);
        let mut relations: Vec<SparseRow> = Vec::new();
        let mut seen = vec![false; len];
        for i in 0..len {
            if seen[i] {
                continue;
            }
            let j = tau[i];
            let k = tau[j];
            seen[i] = true;
            seen[j] = true;
            seen[k] = true;
            let mut row: Vec<(u32, u32)> = Vec::with_capacity(3);
            for t in [i, j, k] {
                let (col, neg) = class[t];
                if col == u32::MAX {
                    continue;
                }
                row.push((col, if neg { minus_one } else { 1 }));
            }
            row.sort_unstable();
            let mut merged: SparseRow = Vec::with_capacity(3);
            for (c, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 = field.add(last.1, v),
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|e| e.1 != 0);
            if !merged.is_empty() {
                relations.push(merged);
            }
        }
        let (free, expr) = relation_quotient(&field, relations, ncols);
        let dim = free.len();
        let gen_image: Vec<SparseRow> = class
            .iter()
            .map(|&(col, neg)| {
                if col == u32::MAX {
                    return Vec::new();
                }
                let e = &expr[col as usize];
                if neg {
                    e.iter().map(|&(b, v)| (b, field.neg(v))).collect()
                } else {
                    e.clone()
                }
            })
            .collect();
        let basis: Vec<u32> = free.iter().map(|&c| class_rep[c]).collect();
        let star_mat = match sign {
            Sign::Full => SparseMat::from_rows(
                dim,
                basis
                    .iter()
                    .map(|&b| gen_image[star[b as usize]].clone())
                    .collect(),
            ),
            Sign::Plus => SparseMat::identity(dim),
            Sign::Minus => SparseMat::identity(dim).scale(&field, minus_one),
        };
        Ok(ManinSpace {
            level: n,
            field,
            sign,
            p1,
            dim,
            gen_image,
            basis,
            star: star_mat,
        })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn p(&self) -> u64 {
        self.field.p() as u64
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p1(&self) -> &P1Index {
        &self.p1
    }

    /// Coordinates of the Manin symbol with P^1 index `i`.
    pub fn gen_image(&self, i: usize) -> &[(u32, u32)] {
        &self.gen_image[i]
    }

    pub fn gen_images(&self) -> &[SparseRow] {
        &self.gen_image
    }

    /// P^1 index of a symbol representing basis vector `j`.
    pub fn basis_symbol(&self, j: usize) -> usize {
        self.basis[j] as usize
    }

    /// Matrix of the star involution; row j is the image of e_j.
    pub fn star(&self) -> &SparseMat {
        &self.star
    }

    /// P^1 indices of the symbols x * h over the Heilbronn matrices of
    /// determinant `ell`, skipping points that leave P^1(Z/NZ).
    pub fn heilbronn_images<'a>(
        &'a self,
        i: usize,
        mats: &'a [[i64; 4]],
    ) -> impl Iterator<Item = usize> + 'a {
        let (c, d) = self.p1.rep(i);
        let n = self.level as i64;
        let (c, d) = (c as i64, d as i64);
        mats.iter().filter_map(move |&[a, b, cc, dd]| {
            let u = (c * a + d * cc).rem_euclid(n) as u32;
            let v = (c * b + d * dd).rem_euclid(n) as u32;
            self.p1.index_reduced(u, v)
        })
    }

    /// Matrix of T_ell; row j is T_ell(e_j).
    pub fn hecke_matrix(&self, ell: u64) -> Result<SparseMat> {
        if !arith::is_prime(ell) {
            return Err(Error::InvalidPrime(ell));
        }
        if self.level % ell == 0 {
            return Err(Error::UseAtkinLehnerPath {
                ell,
                level: self.level,
            });
        }
        let mats = heilbronn_cremona(ell);
        let f = &self.field;
        let mut acc = vec![0u32; self.dim];
        let mut touched: Vec<u32> = Vec::new();
        let rows = (0..self.dim)
            .map(|j| {
                for t in self.heilbronn_images(self.basis[j] as usize, &mats) {
                    for &(b, v) in &self.gen_image[t] {
                        if acc[b as usize] == 0 {
                            touched.push(b);
                        }
                        let s = f.add(acc[b as usize] % f.p(), v);
                        acc[b as usize] = if s == 0 { f.p() } else { s };
                    }
                }
                touched.sort_unstable();
                let row: SparseRow = touched
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
            .collect();
        Ok(SparseMat::from_rows(self.dim, rows))
    }

    /// Class of the path {oo, a/n} as a dense coordinate vector.
    pub fn eval_path(&self, a: i64, n: u64) -> Result<Vec<u32>> {
        let mut v = vec![0u32; self.dim];
        self.for_each_path_symbol(a, n, |i| {
            for &(b, x) in &self.gen_image[i] {
                v[b as usize] = self.field.add(v[b as usize], x);
            }
        })?;
        Ok(v)
    }

    /// Call `f` with the P^1 index of each unimodular symbol in the
    /// continued-fraction decomposition of {oo, a/n}.
    pub fn for_each_path_symbol(&self, a: i64, n: u64, mut f: impl FnMut(usize)) -> Result<()> {
        if n == 0 || gcd(arith::rem(a, n), n) != 1 {
            return Err(Error::NotReducedFraction { a, n });
        }
        let a = arith::rem(a, n);
        let level = self.level;
        // convergent denominators mod N: q_{k-1}, q_k
        let (mut q_prev, mut q_cur) = (0u64, 1 % level);
        let mut odd = false; // parity of k
                             // k = 0 term: (-q_0 : q_{-1})
        f(self.index_mod(level - q_cur, q_prev));
        let (mut u, mut v) = (n, a);
        while v != 0 {
            let t = u / v;
            (u, v) = (v, u - t * v);
            let q_next = ((t % level) * q_cur + q_prev) % level;
            q_prev = q_cur;
            q_cur = q_next;
            odd = !odd;
            // term k: ((-1)^(k-1) q_k : q_{k-1})
            let c = if odd { q_cur } else { (level - q_cur) % level };
            f(self.index_mod(c, q_prev));
        }
        Ok(())
    }

    #[inline]
    fn index_mod(&self, c: u64, d: u64) -> usize {
        let l = self.level;
        self.p1
            .index_reduced((c % l) as u32, (d % l) as u32)
            .expect("consecutive convergent denominators are coprime")
    }

    /// Serialize to the `MSPACEv1` text format.
    pub fn to_cache_string(&self) -> String {
        let mut s = format!("MSPACEv1 {} {} {}\n", self.level, self.field.p(), self.dim);
        let _ = writeln!(s, "sign {}", self.sign.as_str());
        s.push_str("basis");
        for b in &self.basis {
            let _ = write!(s, " {b}");
        }
        s.push('\n');
        let _ = writeln!(s, "gens {}", self.gen_image.len());
        for row in &self.gen_image {
            write_row(&mut s, row);
        }
        let _ = writeln!(s, "star {}", self.dim);
        for row in self.star.rows() {
            write_row(&mut s, row);
        }
        s
    }

    pub fn from_cache_str(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("space cache: {what}"));
        let mut lines = text.split('\n');
        let mut next = || lines.next().ok_or_else(|| bad("truncated"));
        let header: Vec<&str> = next()?.split_whitespace().collect();
        if header.len() != 4 || header[0] != "MSPACEv1" {
            return Err(bad("header"));
        }
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad(s));
        let (level, p, dim) = (num(header[1])?, num(header[2])?, num(header[3])? as usize);
        let field = PrimeField::new(p)?;
        let sign = next()?
            .strip_prefix("sign ")
            .and_then(Sign::parse)
            .ok_or_else(|| bad("sign"))?;
        let basis: Vec<u32> = next()?
            .strip_prefix("basis")
            .ok_or_else(|| bad("basis"))?
            .split_whitespace()
            .map(|x| x.parse::<u32>().map_err(|_| bad(x)))
            .collect::<Result<_>>()?;
        if basis.len() != dim {
            return Err(bad("basis length"));
        }
        let p1 = P1Index::new(level)?;
        let ngens = num(next()?.strip_prefix("gens ").ok_or_else(|| bad("gens"))?)? as usize;
        if ngens != p1.len() {
            return Err(bad("generator count"));
        }
        let mut gen_image = Vec::with_capacity(ngens);
        for _ in 0..ngens {
            gen_image.push(parse_row(next()?, dim, &field)?);
        }
        let nstar = num(next()?.strip_prefix("star ").ok_or_else(|| bad("star"))?)? as usize;
        if nstar != dim {
            return Err(bad("star size"));
        }
        let mut star_rows = Vec::with_capacity(dim);
        for _ in 0..dim {
            star_rows.push(parse_row(next()?, dim, &field)?);
        }
        Ok(ManinSpace {
            level,
            field,
            sign,
            p1,
            dim,
            gen_image,
            basis,
            star: SparseMat::from_rows(dim, star_rows),
        })
    }

    /// Load `mspace_<N>_<p>_<sign>.txt` from `dir`, building it on a miss.
    pub fn cached(dir: &std::path::Path, n: u64, p: u64, sign: Sign) -> Result<Self> {
        let path = dir.join(format!("mspace_{n}_{p}_{}.txt", sign.as_str()));
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(space) = Self::from_cache_str(&text) {
                if space.level == n && space.p() == p && space.sign == sign {
                    return Ok(space);
                }
            }
        }
        let space = Self::build(n, p, sign)?;
        std::fs::create_dir_all(dir)?;
        std::fs::write(&path, space.to_cache_string())?;
        Ok(space)
    }
}

#[cfg(test)]
mod tests;

fn write_row(s: &mut String, row: &[(u32, u32)]) {
    for (k, (c, v)) in row.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{c}:{v}");
    }
    s.push('\n');
}

fn parse_row(line: &str, dim: usize, field: &PrimeField) -> Result<SparseRow> {
    let mut row: SparseRow = Vec::new();
    for tok in line.split_whitespace() {
        let (c, v) = tok
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("space cache entry {tok}")))?;
        let c: u32 = c.parse().map_err(|_| Error::Parse(tok.into()))?;
        let v: u32 = v.parse().map_err(|_| Error::Parse(tok.into()))?;
        let ordered = row.last().map_or(true, |l| l.0 < c);
        if c as usize >= dim || v == 0 || v >= field.p() || !ordered {
            return Err(Error::Parse(format!("space cache entry {tok}")));
        }
        row.push((c, v));
    }
    Ok(row)
}

/// Build the symbol space of level `n` over F_p.
pub fn build_space(n: u64, p: u64, sign: Sign) -> Result<ManinSpace> {
    ManinSpace::build(n, p, sign)
}
