//! Elliptic curves and eigendata: Frobenius traces by point counting, the
//! hypotheses (NA), (Tam) and (Im), and Kolyvagin primes.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use crate::arith::{self, is_prime, legendre};
use crate::error::{Error, Result};
use crate::fp::{find_primitive_root, PrimeField};

/// An elliptic curve y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with its
/// conductor, which is taken as given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveSpec {
    pub label: String,
    pub conductor: u64,
    pub ainvs: [i64; 5],
}

impl CurveSpec {
    pub fn new(label: impl Into<String>, conductor: u64, ainvs: [i64; 5]) -> Result<Self> {
        let c = CurveSpec {
            label: label.into(),
            conductor,
            ainvs,
        };
        if c.discriminant() == BigInt::from(0) {
            return Err(Error::InvalidArgument(format!(
                "curve {} is singular",
                c.label
            )));
        }
        if conductor == 0 {
            return Err(Error::InvalidArgument("conductor must be positive".into()));
        }
        Ok(c)
    }

    /// b2, b4, b6, b8 as big integers.
    fn b_invariants(&self) -> [BigInt; 4] {
        let [a1, a2, a3, a4, a6] = self.ainvs.map(BigInt::from);
        let b2 = &a1 * &a1 + 4 * &a2;
        let b4 = 2 * &a4 + &a1 * &a3;
        let b6 = &a3 * &a3 + 4 * &a6;
        let b8 = &a1 * &a1 * &a6 + 4 * &a2 * &a6 - &a1 * &a3 * &a4 + &a2 * &a3 * &a3 - &a4 * &a4;
        [b2, b4, b6, b8]
    }

    pub fn discriminant(&self) -> BigInt {
        let [b2, b4, b6, b8] = self.b_invariants();
        -(&b2 * &b2 * &b8) - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
    }

    /// True when this model has singular reduction at `ell`.
    pub fn singular_mod(&self, ell: u64) -> bool {
        self.discriminant() % BigInt::from(ell) == BigInt::from(0)
    }

    /// Parse the `CURVEv1` text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        if lines.next() != Some("CURVEv1") {
            return Err(Error::Parse("curve file must start with CURVEv1".into()));
        }
        let (mut label, mut n, mut ainvs) = (String::new(), None, None);
        for line in lines {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value: {line}")))?;
            match k.trim() {
                "label" => label = v.trim().to_string(),
                "N" => {
                    n = Some(
                        v.trim()
                            .parse::<u64>()
                            .map_err(|_| Error::Parse(line.into()))?,
                    )
                }
                "a_invariants" => ainvs = Some(parse_ainvs(v)?),
                other => return Err(Error::Parse(format!("unknown curve field {other}"))),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing N".into()))?;
        let ainvs = ainvs.ok_or_else(|| Error::Parse("missing a_invariants".into()))?;
        CurveSpec::new(label, n, ainvs)
    }

    pub fn to_text(&self) -> String {
        let a = self.ainvs.map(|x| x.to_string()).join(",");
        format!(
            "CURVEv1\nlabel={}\nN={}\na_invariants={}\n",
            self.label, self.conductor, a
        )
    }
}

/// Parse "a1,a2,a3,a4,a6".
pub fn parse_ainvs(s: &str) -> Result<[i64; 5]> {
    let v: Vec<i64> = s
        .split(',')
        .map(|x| x.trim().parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse(format!("bad a-invariants: {s}")))?;
    v.try_into()
        .map_err(|_| Error::Parse(format!("need five a-invariants: {s}")))
}

/// a_ell = ell + 1 - #E(F_ell). At primes dividing the conductor exactly
/// once the count of the reduced model gives 1 or -1 (split or nonsplit);
/// a model that looks additive there is not minimal and is rejected. At
/// primes whose square divides the conductor the value is 0.
pub fn ap_pointcount(curve: &CurveSpec, ell: u64) -> Result<i64> {
    if !is_prime(ell) {
        return Err(Error::InvalidPrime(ell));
    }
    if curve.conductor % ell != 0 && curve.singular_mod(ell) {
        return Err(Error::BadReductionPrime { ell });
    }
    if curve.conductor % (ell * ell) == 0 {
        return Ok(0);
    }
    let a = trace_of_model(curve, ell);
    if curve.conductor % ell == 0 && a == 0 {
        // multiplicative by the conductor, additive on the model: not minimal
        return Err(Error::BadReductionPrime { ell });
    }
    assert!(
        a * a <= 4 * ell as i64,
        "Hasse bound violated at {ell}: a = {a}"
    );
    Ok(a)
}

/// ell + 1 - (number of projective points of the reduced model, singular
/// point included). Equals a_ell at good primes and at multiplicative or
/// additive primes where the model is minimal.
pub fn trace_of_model(curve: &CurveSpec, ell: u64) -> i64 {
    let [a1, a2, a3, a4, a6] = curve.ainvs.map(|x| arith::rem(x, ell) as i64);
    let l = ell as i64;
    if ell == 2 {
        let mut count = 1i64; // point at infinity
        for x in 0..2 {
            for y in 0..2 {
                let lhs = y * y + a1 * x * y + a3 * y;
                let rhs = x * x * x + a2 * x * x + a4 * x + a6;
                if (lhs - rhs).rem_euclid(2) == 0 {
                    count += 1;
                }
            }
        }
        return 3 - count;
    }
    // 4y'^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 with y' = 2y + a1 x + a3
    let b2 = (a1 * a1 + 4 * a2).rem_euclid(l);
    let b4 = (2 * a4 + a1 * a3).rem_euclid(l);
    let b6 = (a3 * a3 + 4 * a6).rem_euclid(l);
    let chi = quadratic_character_table(ell);
    let mut s = 0i64;
    for x in 0..l {
        let v = ((((4 * x + b2) % l) * x % l + 2 * b4) % l * x % l + b6) % l;
        s += chi[v as usize] as i64;
    }
    -s
}

fn quadratic_character_table(ell: u64) -> Vec<i8> {
    let mut t = vec![-1i8; ell as usize];
    t[0] = 0;
    for x in 1..=(ell / 2) {
        t[(x * x % ell) as usize] = 1;
    }
    t
}

/// Hecke eigenvalue data of a newform reduced modulo a prime of residue
/// field F_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenData {
    pub level: u64,
    pub p: u64,
    pub eigs: BTreeMap<u64, u32>,
    /// U_q eigenvalues at primes q dividing the level
    pub u_eigs: BTreeMap<u64, u32>,
    /// a_p mod p
    pub ap: u32,
    /// psi(p) mod p
    pub psi_p: u32,
    pub label: String,
}

impl EigenData {
    pub fn new(level: u64, p: u64, label: impl Into<String>) -> Result<Self> {
        PrimeField::new(p)?;
        Ok(EigenData {
            level,
            p,
            eigs: BTreeMap::new(),
            u_eigs: BTreeMap::new(),
            ap: 0,
            psi_p: 1,
            label: label.into(),
        })
    }

    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.p).expect("validated on construction")
    }

    /// Record a_ell (any integer, reduced mod p).
    pub fn set(&mut self, ell: u64, a: i64) -> Result<()> {
        if !is_prime(ell) {
            return Err(Error::InvalidPrime(ell));
        }
        let v = self.field().from_i64(a);
        if ell == self.p {
            self.ap = v;
        }
        if self.level % ell != 0 {
            self.eigs.insert(ell, v);
        } else {
            self.u_eigs.insert(ell, v);
        }
        Ok(())
    }

    pub fn a_ell(&self, ell: u64) -> Option<u32> {
        self.eigs.get(&ell).copied()
    }

    /// Eigenvalue of U_q for q dividing the level.
    pub fn u_ell(&self, q: u64) -> Option<u32> {
        self.u_eigs.get(&q).copied()
    }

    /// Eigendata of an elliptic curve from point counts at primes below
    /// `bound` and at every prime dividing the conductor (primes where the
    /// model is singular but N says otherwise are skipped). At q | N the
    /// trace of the model is the U_q eigenvalue.
    pub fn from_curve(curve: &CurveSpec, p: u64, bound: u64) -> Result<Self> {
        if curve.conductor % p == 0 {
            return Err(Error::BadResidueCharacteristic {
                level: curve.conductor,
                p,
            });
        }
        let mut d = EigenData::new(curve.conductor, p, curve.label.clone())?;
        let mut primes: Vec<u64> = arith::primes_in(2, bound.max(p + 1)).collect();
        primes.extend(
            arith::prime_divisors(curve.conductor)
                .into_iter()
                .filter(|&q| q >= bound.max(p + 1)),
        );
        for ell in primes {
            match ap_pointcount(curve, ell) {
                Ok(a) => d.set(ell, a)?,
                Err(Error::BadReductionPrime { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        if !d.eigs.contains_key(&p) {
            return Err(Error::BadReductionPrime { ell: p });
        }
        Ok(d)
    }

    /// Parse the `EIGSv1` text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        if lines.next() != Some("EIGSv1") {
            return Err(Error::Parse("eigendata file must start with EIGSv1".into()));
        }
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        let mut pairs: Vec<(u64, i64)> = Vec::new();
        for line in lines {
            if let Some((k, v)) = line.split_once('=') {
                kv.insert(k.trim().to_string(), v.trim().to_string());
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let parsed = match f.as_slice() {
                [l, a] => l.parse::<u64>().ok().zip(a.parse::<i64>().ok()),
                _ => None,
            };
            pairs.push(parsed.ok_or_else(|| Error::Parse(format!("bad eigenvalue line: {line}")))?);
        }
        let get = |k: &str| {
            kv.get(k)
                .ok_or_else(|| Error::Parse(format!("missing {k}")))
        };
        let num = |k: &str| -> Result<i64> {
            get(k)?
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad {k}")))
        };
        let level = num("N")? as u64;
        let p = num("p")? as u64;
        let mut d = EigenData::new(level, p, kv.get("label").cloned().unwrap_or_default())?;
        let f = d.field();
        for (ell, a) in pairs {
            if d.eigs.contains_key(&ell) || d.u_eigs.contains_key(&ell) {
                return Err(Error::Parse(format!("duplicate prime {ell}")));
            }
            d.set(ell, a)?;
        }
        d.ap = f.from_i64(num("ap")?);
        d.psi_p = f.from_i64(num("psi_p")?);
        Ok(d)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "EIGSv1\nN={}\np={}\nap={}\npsi_p={}\nlabel={}\n",
            self.level, self.p, self.ap, self.psi_p, self.label
        );
        let all: BTreeMap<_, _> = self.eigs.iter().chain(&self.u_eigs).collect();
        for (ell, a) in all {
            s.push_str(&format!("{ell} {a}\n"));
        }
        s
    }
}

/// (NA): a_p differs from 1 and from psi(p) mod p.
pub fn check_na(data: &EigenData) -> bool {
    data.ap != 1 && data.ap != data.psi_p
}

/// First clause of (Tam): p does not divide the product of q - 1 over
/// q || N with a_q = 1 and q + 1 over q || N with a_q = -1. Returns the
/// verdict and the product. `local` supplies a_q for the primes q || N.
pub fn check_tam1(level: u64, p: u64, local: &BTreeMap<u64, i64>) -> Result<(bool, u64)> {
    let mut product = 1u64;
    for (q, e) in arith::factor(level) {
        if e != 1 {
            continue;
        }
        let a = *local
            .get(&q)
            .ok_or_else(|| Error::InsufficientLocalData(format!("a_{q} for {q} || {level}")))?;
        match a {
            1 => product *= q - 1,
            -1 => product *= q + 1,
            0 => {}
            other => {
                return Err(Error::InsufficientLocalData(format!(
                    "a_{q} = {other} at a multiplicative prime"
                )))
            }
        }
    }
    Ok((product % p != 0, product))
}

/// a_q at the primes q || N of a curve, read off the reduced model.
pub fn local_traces(curve: &CurveSpec) -> BTreeMap<u64, i64> {
    arith::factor(curve.conductor)
        .into_iter()
        .filter(|&(_, e)| e == 1)
        .map(|(q, _)| (q, trace_of_model(curve, q)))
        .collect()
}

/// A Kolyvagin prime with its primitive root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KolyvaginPrime {
    pub ell: u64,
    pub eta: u64,
}

impl KolyvaginPrime {
    /// Paired with the smallest primitive root.
    pub fn new(ell: u64) -> Result<Self> {
        Ok(KolyvaginPrime {
            ell,
            eta: find_primitive_root(ell)?,
        })
    }
}

/// ell is prime, ell does not divide Np, ell = 1 mod p, a_ell = ell + 1 = 2
/// mod p (trivial character).
pub fn is_kolyvagin_prime(ell: u64, level: u64, p: u64, a_ell: Option<u32>) -> Result<bool> {
    if !is_prime(ell) || level % ell == 0 || ell == p || ell % p != 1 {
        return Ok(false);
    }
    let a = a_ell.ok_or_else(|| Error::InsufficientLocalData(format!("a_{ell} unavailable")))?;
    Ok(a as u64 == 2 % p)
}

/// Default bound on the primes examined by [`scan_kolyvagin_primes`].
pub const DEFAULT_SCAN_CAP: u64 = 1_000_000;

/// First `count` Kolyvagin primes >= `start`, with a_ell mod p supplied by
/// `a_ell`, searching primes below `cap`.
pub fn scan_kolyvagin_primes(
    level: u64,
    p: u64,
    count: usize,
    start: u64,
    cap: u64,
    mut a_ell: impl FnMut(u64) -> Result<u32>,
) -> Result<Vec<KolyvaginPrime>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let mut out = Vec::new();
    // candidates are 1 mod p
    let mut ell = start.max(2);
    ell += (p + 1 - ell % p) % p;
    while ell < cap {
        if is_prime(ell)
            && level % ell != 0
            && is_kolyvagin_prime(ell, level, p, Some(a_ell(ell)?))?
        {
            out.push(KolyvaginPrime::new(ell)?);
            if out.len() == count {
                return Ok(out);
            }
        }
        ell += p;
    }
    Err(Error::ScanBudgetExceeded {
        cap,
        found: out.len(),
    })
}

/// Scan using point counts on a curve.
pub fn scan_curve(
    curve: &CurveSpec,
    p: u64,
    count: usize,
    start: u64,
    cap: u64,
) -> Result<Vec<KolyvaginPrime>> {
    let f = PrimeField::new(p)?;
    scan_kolyvagin_primes(curve.conductor, p, count, start, cap, |ell| {
        Ok(f.from_i64(ap_pointcount(curve, ell)?))
    })
}

/// How hypothesis (Im) was settled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImStatus {
    ProvedSurjective,
    AssertedByUser,
    Inconclusive,
}

impl fmt::Display for ImStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImStatus::ProvedSurjective => "proved-surjective",
            ImStatus::AssertedByUser => "asserted-by-user",
            ImStatus::Inconclusive => "inconclusive",
        })
    }
}

/// Which maximal-subgroup families a set of Frobenius samples rules out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ImEvidence {
    pub borel: bool,
    pub split_cartan: bool,
    pub nonsplit_cartan: bool,
    pub exceptional: bool,
}

impl ImEvidence {
    pub fn all(&self) -> bool {
        self.borel && self.split_cartan && self.nonsplit_cartan && self.exceptional
    }
}

/// Rule out the maximal subgroups of GL_2(F_p) not containing SL_2(F_p),
/// given (a_ell, ell) samples with det = ell:
/// a Borel image forces a_ell^2 - 4 ell to be a square; the normalizer of a
/// split (nonsplit) Cartan forces a_ell = 0 or a square (nonsquare or zero)
/// discriminant; an exceptional projective image forces
/// u = a_ell^2 / ell in {0, 1, 2, 4} or u^2 - 3u + 1 = 0.
pub fn im_evidence(p: u64, samples: &[(u64, i64)]) -> ImEvidence {
    let f = PrimeField::new(p).expect("odd prime");
    let mut ev = ImEvidence::default();
    for &(ell, a) in samples {
        if ell % p == 0 {
            continue;
        }
        let am = f.from_i64(a);
        let disc = f.sub(f.mul(am, am), f.mul(4, f.from_u64(ell)));
        let chi = legendre(disc as i64, p);
        if chi == -1 {
            ev.borel = true;
            if am != 0 {
                ev.split_cartan = true;
            }
        }
        if chi == 1 && am != 0 {
            ev.nonsplit_cartan = true;
        }
        let u = f.mul(f.mul(am, am), f.inv(f.from_u64(ell)));
        let golden = f.add(f.sub(f.mul(u, u), f.mul(3, u)), 1);
        if ![0u32, 1, 2, 4].iter().any(|&x| f.from_u64(x as u64) == u) && golden != 0 {
            ev.exceptional = true;
        }
    }
    ev
}

/// One-sided check of (Im) by Frobenius sampling at primes ell <= bound.
pub fn check_im_heuristic(
    curve: &CurveSpec,
    p: u64,
    sample_bound: u64,
    asserted: bool,
) -> ImStatus {
    let samples: Vec<(u64, i64)> = arith::primes_in(3, sample_bound + 1)
        .filter(|&l| curve.conductor % l != 0 && l != p)
        .filter_map(|l| ap_pointcount(curve, l).ok().map(|a| (l, a)))
        .collect();
    im_status(p, &samples, asserted)
}

/// (Im) from eigenvalue samples alone; p = 3 is never proved.
pub fn im_status(p: u64, samples: &[(u64, i64)], asserted: bool) -> ImStatus {
    if p >= 5 && im_evidence(p, samples).all() {
        ImStatus::ProvedSurjective
    } else if asserted {
        ImStatus::AssertedByUser
    } else {
        ImStatus::Inconclusive
    }
}

/// Outcome of the hypothesis checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionsReport {
    pub na_ok: bool,
    pub tam1_ok: bool,
    pub tam1_product: u64,
    pub im_status: ImStatus,
    pub notes: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c760() -> CurveSpec {
        CurveSpec::new("760.e1", 760, [0, 0, 0, -67, 926]).unwrap()
    }

    /// Brute-force projective point count of the full Weierstrass equation.
    fn naive_trace(c: &CurveSpec, ell: i64) -> i64 {
        let [a1, a2, a3, a4, a6] = c.ainvs;
        let mut n = 1;
        for x in 0..ell {
            for y in 0..ell {
                let v = y * y + a1 * x * y + a3 * y - (x * x * x + a2 * x * x + a4 * x + a6);
                if v.rem_euclid(ell) == 0 {
                    n += 1;
                }
            }
        }
        ell + 1 - n
    }

    #[test]
    fn traces_760() {
        let e = c760();
        assert_eq!(ap_pointcount(&e, 3).unwrap(), 3);
        assert_eq!(ap_pointcount(&e, 5).unwrap(), 1);
        assert_eq!(ap_pointcount(&e, 19).unwrap(), -1);
    }

    #[test]
    fn legendre_sum_matches_enumeration() {
        let e = CurveSpec::new("t", 1, [1, -1, 1, -3, 7]).unwrap();
        for ell in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
            if e.singular_mod(ell) {
                continue;
            }
            assert_eq!(
                trace_of_model(&e, ell),
                naive_trace(&e, ell as i64),
                "ell = {ell}"
            );
        }
        assert_eq!(trace_of_model(&e, 2), naive_trace(&e, 2));
    }

    #[test]
    fn conditions_760() {
        let e = c760();
        let d = EigenData::from_curve(&e, 3, 50).unwrap();
        assert_eq!(d.ap, 0);
        assert!(check_na(&d));
        let (ok, prod) = check_tam1(760, 3, &local_traces(&e)).unwrap();
        assert!(ok);
        assert_eq!(prod, 80);
        assert_eq!(
            check_im_heuristic(&e, 3, 200, false),
            ImStatus::Inconclusive
        );
        assert_eq!(
            check_im_heuristic(&e, 3, 200, true),
            ImStatus::AssertedByUser
        );
    }

    #[test]
    fn na_and_tam_edge_cases() {
        let mut d = EigenData::new(11, 5, "synthetic").unwrap();
        d.ap = 1;
        assert!(!check_na(&d));
        let empty = BTreeMap::new();
        assert_eq!(check_tam1(3364, 7, &empty).unwrap(), (true, 1));
        assert!(matches!(
            check_tam1(760, 3, &empty),
            Err(Error::InsufficientLocalData(_))
        ));
        let local: BTreeMap<u64, i64> = [(5, 1), (13, -1)].into();
        assert_eq!(check_tam1(520, 3, &local).unwrap(), (true, 56));
    }

    #[test]
    fn kolyvagin_predicate() {
        assert!(!is_kolyvagin_prime(7, 3456, 5, Some(2)).unwrap());
        assert!(matches!(
            is_kolyvagin_prime(191, 3456, 5, None),
            Err(Error::InsufficientLocalData(_))
        ));
        let e = CurveSpec::new("3456.a1", 3456, [0, 0, 0, -84, 304]).unwrap();
        let a = ap_pointcount(&e, 191).unwrap();
        assert!(
            is_kolyvagin_prime(191, 3456, 5, Some(PrimeField::new(5).unwrap().from_i64(a)))
                .unwrap()
        );
    }

    #[test]
    fn im_borel_not_eliminated() {
        // every discriminant a^2 - 4 ell is a square mod 5
        let samples: Vec<(u64, i64)> = vec![(7, 3), (11, 0), (13, 4)];
        for &(l, a) in &samples {
            assert_ne!(legendre(a * a - 4 * l as i64, 5), -1);
        }
        assert!(!im_evidence(5, &samples).borel);
    }

    #[test]
    fn file_formats() {
        let e = c760();
        assert_eq!(CurveSpec::parse(&e.to_text()).unwrap(), e);
        let d = EigenData::from_curve(&e, 3, 30).unwrap();
        assert_eq!(EigenData::parse(&d.to_text()).unwrap(), d);
        assert!(CurveSpec::parse("CURVEv1\nN=11\n").is_err());
        assert_eq!(d.u_ell(5), Some(1));
        assert_eq!(d.u_ell(19), Some(2));
        assert_eq!(d.u_ell(2), Some(0));
        let u = EigenData::parse("EIGSv1\nN=11\np=5\nap=1\npsi_p=1\n11 1\n2 3\n").unwrap();
        assert_eq!(
            (u.u_ell(11), u.a_ell(2), u.a_ell(11)),
            (Some(1), Some(3), None)
        );
        assert!(EigenData::parse("EIGSv1\nN=11\np=5\nap=1\npsi_p=1\n2 3\n2 3\n").is_err());
    }
}
