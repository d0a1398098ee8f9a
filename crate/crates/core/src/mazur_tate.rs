//! Mazur-Tate elements theta+ mod p, their p-stabilizations and their
//! images in the layers Q_r of the cyclotomic Z_p-extension.

use std::fmt;

use rayon::prelude::*;

use crate::arith;
use crate::eigen::EigenFunctional;
use crate::error::{Error, Result};
use crate::fp::PrimeField;

/// Default number of layers examined by [`mu_scan`].
pub const DEFAULT_RMAX: u32 = 4;

/// An element of F_p[(Z/m)^x / {+-1}], stored on the class representatives
/// a <= m/2 coprime to m, in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MTElement {
    pub m: u64,
    pub reps: Vec<u64>,
    pub coeffs: Vec<u32>,
    /// class index of every residue, u32::MAX off the units
    index: Vec<u32>,
}

impl MTElement {
    /// The zero element at modulus m.
    pub fn zero(m: u64) -> Self {
        let reps: Vec<u64> = if m == 1 {
            vec![0]
        } else {
            (1..=m / 2).filter(|&a| arith::gcd(a, m) == 1).collect()
        };
        let mut index = vec![u32::MAX; m as usize];
        for (i, &a) in reps.iter().enumerate() {
            index[a as usize] = i as u32;
            index[((m - a) % m) as usize] = i as u32;
        }
        let coeffs = vec![0; reps.len()];
        MTElement {
            m,
            reps,
            coeffs,
            index,
        }
    }

    /// Class index of a unit residue.
    pub fn class_of(&self, a: u64) -> Option<usize> {
        match self.index[(a % self.m) as usize] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }

    pub fn coeff(&self, a: u64) -> Option<u32> {
        self.class_of(a).map(|i| self.coeffs[i])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn scale(&self, f: &PrimeField, c: u32) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|x| *x = f.mul(*x, c));
        out
    }

    pub fn sub(&self, f: &PrimeField, other: &Self) -> Self {
        assert_eq!(self.m, other.m);
        let mut out = self.clone();
        for (x, &y) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *x = f.sub(*x, y);
        }
        out
    }

    /// Product in the group ring.
    pub fn convolve(&self, f: &PrimeField, other: &Self) -> Self {
        assert_eq!(self.m, other.m);
        let mut out = MTElement::zero(self.m);
        for (&a, &x) in self.reps.iter().zip(&self.coeffs) {
            if x == 0 {
                continue;
            }
            for (&b, &y) in other.reps.iter().zip(&other.coeffs) {
                let i = out.class_of(arith::mul_mod(a, b, self.m)).expect("units");
                out.coeffs[i] = f.add(out.coeffs[i], f.mul(x, y));
            }
        }
        out
    }

    /// `THETAv1 layer=m coeffs=...` in increasing representative order.
    pub fn to_line(&self) -> String {
        format!("THETAv1 layer={} coeffs={}", self.m, join(&self.coeffs))
    }
}

fn join(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// theta+ at modulus m: the class of a carries [a/m]+.
pub fn theta_plus(phi: &EigenFunctional, m: u64) -> Result<MTElement> {
    if m == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let level = phi.space().level();
    if arith::gcd(m, level) != 1 {
        return Err(Error::InvalidArgument(format!(
            "modulus {m} is not coprime to the level {level}"
        )));
    }
    let mut out = MTElement::zero(m);
    out.coeffs = out
        .reps
        .par_iter()
        .map(|&a| phi.modsym_value(a as i64, m))
        .collect::<Result<_>>()?;
    Ok(out)
}

/// The norm map: a class of (Z/p^{r-1})^x/+-1 goes to the sum of the
/// classes of (Z/p^r)^x/+-1 above it.
pub fn norm_up(x: &MTElement, p: u64) -> MTElement {
    let m = x.m * p;
    let mut out = MTElement::zero(m);
    for (i, &a) in out.reps.iter().enumerate() {
        out.coeffs[i] = x.coeffs[x.class_of(a % x.m).expect("units lie over units")];
    }
    out
}

/// The natural projection to modulus m / p, summing fibers.
pub fn project_down(f: &PrimeField, x: &MTElement, p: u64) -> Result<MTElement> {
    if x.m % p != 0 {
        return Err(Error::LayerMismatch {
            expected: p,
            found: x.m,
        });
    }
    let mut out = MTElement::zero(x.m / p);
    for (&a, &c) in x.reps.iter().zip(&x.coeffs) {
        let i = out.class_of(a % out.m).expect("units lie over units");
        out.coeffs[i] = f.add(out.coeffs[i], c);
    }
    Ok(out)
}

/// theta_r = theta+ at p^r.
fn theta_layer(phi: &EigenFunctional, r: u32) -> Result<MTElement> {
    theta_plus(phi, phi.space().p().pow(r))
}

/// vartheta_r = ap^-r (theta_r - ap^-1 nu(theta_{r-1})), with alpha
/// replaced by a_p mod p.
pub fn stabilize_theta(phi: &EigenFunctional, r: u32, ap: u32) -> Result<MTElement> {
    let f = *phi.field();
    if r == 0 {
        return Err(Error::InvalidArgument("stabilization needs r >= 1".into()));
    }
    if ap % f.p() == 0 {
        return Err(Error::NotOrdinary);
    }
    let p = f.p() as u64;
    let inv = f.inv(ap);
    let top = theta_layer(phi, r)?;
    let lower = norm_up(&theta_layer(phi, r - 1)?, p);
    Ok(top
        .sub(&f, &lower.scale(&f, inv))
        .scale(&f, f.pow(inv, r as u64)))
}

/// An element of F_p[Z/p^r] = F_p[Gal(Q_r/Q)].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerElement {
    pub r: u32,
    pub coeffs: Vec<u32>,
}

impl LayerElement {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn convolve(&self, f: &PrimeField, other: &Self) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![0u32; n];
        for (i, &x) in self.coeffs.iter().enumerate() {
            for (j, &y) in other.coeffs.iter().enumerate() {
                out[(i + j) % n] = f.add(out[(i + j) % n], f.mul(x, y));
            }
        }
        LayerElement {
            r: self.r,
            coeffs: out,
        }
    }

    /// `THETAv1 layer=Q<r> coeffs=...` indexed by the exponent of 1 + p.
    pub fn to_line(&self) -> String {
        format!("THETAv1 layer=Q{} coeffs={}", self.r, join(&self.coeffs))
    }
}

/// Push an element at p^{r+1} to Gal(Q_r/Q), identified with Z/p^r through
/// a -> log_{1+p} of a / omega(a), omega the Teichmueller lift.
pub fn project_to_layer(f: &PrimeField, x: &MTElement, r: u32) -> Result<LayerElement> {
    let p = f.p() as u64;
    let m = p.pow(r + 1);
    if x.m != m {
        return Err(Error::LayerMismatch {
            expected: m,
            found: x.m,
        });
    }
    let pr = p.pow(r);
    // exponent table of the generator 1 + p of 1 + pZ mod p^{r+1}
    let mut log = vec![u32::MAX; m as usize];
    let mut g = 1u64;
    for k in 0..pr {
        log[g as usize] = k as u32;
        g = g * (1 + p) % m;
    }
    let mut coeffs = vec![0u32; pr as usize];
    for (&a, &c) in x.reps.iter().zip(&x.coeffs) {
        let omega = arith::pow_mod(a, pr, m);
        let unit = arith::mul_mod(a, arith::inv_mod(omega, m).expect("unit"), m);
        let k = log[unit as usize] as usize;
        coeffs[k] = f.add(coeffs[k], c);
    }
    Ok(LayerElement { r, coeffs })
}

/// Outcome of the layer scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MuScan {
    /// first r with the stabilized layer element nonzero
    Ordinary { first: Option<u32>, r_max: u32 },
    /// first odd and first even r with the unstabilized layer element nonzero
    NonOrdinary {
        first_odd: Option<u32>,
        first_even: Option<u32>,
        r_max: u32,
    },
}

impl MuScan {
    pub fn found(&self) -> bool {
        match self {
            MuScan::Ordinary { first, .. } => first.is_some(),
            MuScan::NonOrdinary {
                first_odd,
                first_even,
                ..
            } => first_odd.is_some() && first_even.is_some(),
        }
    }
}

impl fmt::Display for MuScan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show =
            |x: &Option<u32>| x.map_or("NotFoundWithinBound".to_string(), |r| format!("r={r}"));
        match self {
            MuScan::Ordinary { first, r_max } => {
                write!(
                    f,
                    "ordinary: first nonzero layer {} (r_max={r_max})",
                    show(first)
                )
            }
            MuScan::NonOrdinary {
                first_odd,
                first_even,
                r_max,
            } => write!(
                f,
                "non-ordinary: odd {} even {} (r_max={r_max})",
                show(first_odd),
                show(first_even)
            ),
        }
    }
}

/// Look for nonvanishing layers up to `r_max`.
pub fn mu_scan(phi: &EigenFunctional, ap: u32, ordinary: bool, r_max: u32) -> Result<MuScan> {
    if r_max == 0 {
        return Err(Error::InvalidArgument("r_max must be at least 1".into()));
    }
    let f = *phi.field();
    if ordinary {
        for r in 1..=r_max {
            if !project_to_layer(&f, &stabilize_theta(phi, r + 1, ap)?, r)?.is_zero() {
                return Ok(MuScan::Ordinary {
                    first: Some(r),
                    r_max,
                });
            }
        }
        return Ok(MuScan::Ordinary { first: None, r_max });
    }
    let (mut odd, mut even) = (None, None);
    for r in 1..=r_max {
        if odd.is_some() && even.is_some() {
            break;
        }
        let slot = if r % 2 == 1 { &mut odd } else { &mut even };
        if slot.is_none() && !project_to_layer(&f, &theta_layer(phi, r + 1)?, r)?.is_zero() {
            *slot = Some(r);
        }
    }
    Ok(MuScan::NonOrdinary {
        first_odd: odd,
        first_even: even,
        r_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random(m: u64, rng: &mut impl Rng, p: u32) -> MTElement {
        let mut x = MTElement::zero(m);
        x.coeffs.iter_mut().for_each(|c| *c = rng.gen_range(0..p));
        x
    }

    #[test]
    fn classes() {
        let x = MTElement::zero(25);
        assert_eq!(x.reps.len(), 10);
        assert_eq!(x.class_of(24), x.class_of(1));
        assert_eq!(x.class_of(5), None);
        assert_eq!(MTElement::zero(1).reps, vec![0]);
    }

    #[test]
    fn norm_then_projection_is_multiplication_by_p() {
        let f = PrimeField::new(5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for m in [5u64, 25] {
            let x = random(m, &mut rng, 5);
            assert!(project_down(&f, &norm_up(&x, 5), 5).unwrap().is_zero());
        }
    }

    #[test]
    fn layer_projection_is_a_ring_map() {
        let f = PrimeField::new(5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let x = random(25, &mut rng, 5);
            let y = random(25, &mut rng, 5);
            let lhs = project_to_layer(&f, &x.convolve(&f, &y), 1).unwrap();
            let rhs = project_to_layer(&f, &x, 1)
                .unwrap()
                .convolve(&f, &project_to_layer(&f, &y, 1).unwrap());
            assert_eq!(lhs, rhs);
            let total = |c: &[u32]| c.iter().fold(0, |s, &v| f.add(s, v));
            assert_eq!(
                total(&project_to_layer(&f, &x, 1).unwrap().coeffs),
                total(&x.coeffs)
            );
        }
        let x = random(5, &mut rng, 5);
        let z = project_to_layer(&f, &x, 0).unwrap();
        assert_eq!(z.coeffs, vec![x.coeffs.iter().fold(0, |s, &v| f.add(s, v))]);
        assert!(matches!(
            project_to_layer(&f, &x, 1),
            Err(Error::LayerMismatch { .. })
        ));
    }
}
