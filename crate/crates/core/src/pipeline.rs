//! The verification pipeline: hypotheses, eigenspace cut, Kolyvagin prime
//! scan, Kurihara numbers and the Mazur-Tate layer scan, assembled into a
//! single report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use crate::arith;
use crate::eigen::{cut_eigenfunctional, EigenFunctional};
use crate::error::{Error, Result};
use crate::formdata::{
    check_im_heuristic, check_na, check_tam1, im_status, scan_curve, scan_kolyvagin_primes,
    ConditionsReport, CurveSpec, EigenData, ImStatus, KolyvaginPrime, DEFAULT_SCAN_CAP,
};
use crate::kurihara::{reports_table, scan_delta, DlogTables, KuriharaReport};
use crate::manin::{ManinSpace, Sign};
use crate::mazur_tate::{mu_scan, MuScan, DEFAULT_RMAX};

/// Environment variable naming the cache directory; wins over the flag.
pub const CACHE_ENV: &str = "KURIHARA_CACHE";

/// Point counts go up to this bound when eigendata comes from a curve.
pub const CURVE_EIGS_BOUND: u64 = 100;

/// Frobenius samples for the (Im) check.
pub const IM_SAMPLE_BOUND: u64 = 1000;

/// Where the form comes from.
#[derive(Clone, Debug)]
pub enum FormSource {
    Curve(CurveSpec),
    Eigen(EigenData),
}

impl FormSource {
    pub fn level(&self) -> u64 {
        match self {
            FormSource::Curve(c) => c.conductor,
            FormSource::Eigen(d) => d.level,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            FormSource::Curve(c) => &c.label,
            FormSource::Eigen(d) => &d.label,
        }
    }

    /// Eigenvalues mod p; for an eigendata file p must match the file.
    pub fn eigendata(&self, p: u64) -> Result<EigenData> {
        match self {
            FormSource::Curve(c) => EigenData::from_curve(c, p, CURVE_EIGS_BOUND),
            FormSource::Eigen(d) if d.p == p => Ok(d.clone()),
            FormSource::Eigen(d) => Err(Error::InvalidArgument(format!(
                "eigendata {} is reduced mod {}, not mod {p}",
                d.label, d.p
            ))),
        }
    }
}

/// The cache directory: `KURIHARA_CACHE` if set, else the given one.
pub fn resolve_cache_dir(flag: Option<PathBuf>) -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or(flag)
}

/// Build (or load) the plus space and cut out the functional of `data`.
pub fn load_functional(
    data: &EigenData,
    cache_dir: Option<&std::path::Path>,
) -> Result<EigenFunctional> {
    let space = match cache_dir {
        Some(dir) => ManinSpace::cached(dir, data.level, data.p, Sign::Plus)?,
        None => ManinSpace::build(data.level, data.p, Sign::Plus)?,
    };
    cut_eigenfunctional(Arc::new(space), data, None, 1)
}

/// Check (NA), the first clause of (Tam) and (Im).
pub fn check_conditions(
    source: &FormSource,
    data: &EigenData,
    assert_im: bool,
) -> Result<ConditionsReport> {
    let f = data.field();
    let mut notes = Vec::new();
    let na_ok = check_na(data);
    let local: BTreeMap<u64, i64> = data.u_eigs.iter().map(|(&q, &a)| (q, f.lift(a))).collect();
    let (tam1_ok, tam1_product) = check_tam1(data.level, data.p, &local)?;
    let im = match source {
        FormSource::Curve(c) => {
            notes.push(format!(
                "(Im): Frobenius sampling at primes <= {IM_SAMPLE_BOUND}"
            ));
            check_im_heuristic(c, data.p, IM_SAMPLE_BOUND, assert_im)
        }
        FormSource::Eigen(d) => {
            notes.push("(Im): Frobenius sampling over the eigendata primes".into());
            let samples: Vec<(u64, i64)> = d.eigs.iter().map(|(&l, &a)| (l, f.lift(a))).collect();
            im_status(data.p, &samples, assert_im)
        }
    };
    if data.p < 5 {
        notes.push("(Im): p = 3 is not proved by sampling".into());
    }
    Ok(ConditionsReport {
        na_ok,
        tam1_ok,
        tam1_product,
        im_status: im,
        notes,
    })
}

/// The first `count` Kolyvagin primes >= `start`: from point counts for a
/// curve, from the functional otherwise.
pub fn scan_primes(
    source: &FormSource,
    phi: Option<&EigenFunctional>,
    p: u64,
    count: usize,
    start: u64,
) -> Result<Vec<KolyvaginPrime>> {
    match (source, phi) {
        (FormSource::Curve(c), _) => scan_curve(c, p, count, start, DEFAULT_SCAN_CAP),
        (FormSource::Eigen(d), Some(phi)) => {
            scan_kolyvagin_primes(d.level, p, count, start, DEFAULT_SCAN_CAP, |l| {
                phi.eigenvalue_readback(l)
            })
        }
        (FormSource::Eigen(_), None) => Err(Error::InvalidArgument(
            "scanning eigendata needs the eigen-functional".into(),
        )),
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub source: FormSource,
    pub p: u64,
    pub count: usize,
    pub start: u64,
    pub max_factors: usize,
    pub first_hit: bool,
    pub r_max: u32,
    pub cache_dir: Option<PathBuf>,
    pub assert_im: bool,
    /// report zero for every timing so repeated runs are byte-identical
    pub no_timing: bool,
}

impl VerifyConfig {
    pub fn new(source: FormSource, p: u64) -> Self {
        VerifyConfig {
            source,
            p,
            count: 5,
            start: 2,
            max_factors: 2,
            first_hit: false,
            r_max: DEFAULT_RMAX,
            cache_dir: None,
            assert_im: false,
            no_timing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    CriterionMet,
    CriterionNotMetWithinBudget,
    /// (NA) or (Tam) fails, so the criterion does not apply
    HypothesisFailed(String),
}

impl Verdict {
    /// 0 met, 2 not met within budget, 1 hypothesis failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::CriterionMet => 0,
            Verdict::CriterionNotMetWithinBudget => 2,
            Verdict::HypothesisFailed(_) => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::CriterionMet => "CriterionMet",
            Verdict::CriterionNotMetWithinBudget => "CriterionNotMetWithinBudget",
            Verdict::HypothesisFailed(_) => "HypothesisFailed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerdictReport {
    pub label: String,
    pub level: u64,
    pub p: u64,
    pub ap: u32,
    pub conditions: ConditionsReport,
    pub primes: Vec<KolyvaginPrime>,
    pub deltas: Vec<KuriharaReport>,
    pub theta: Option<MuScan>,
    pub cut_primes: Vec<u64>,
    pub verdict: Verdict,
}

impl VerdictReport {
    pub fn first_nonzero(&self) -> Option<&KuriharaReport> {
        self.deltas.iter().find(|r| r.nonzero)
    }

    /// How the second clause of (Tam) was settled.
    pub fn tam2(&self) -> &'static str {
        if self.first_nonzero().is_some() {
            "discharged-by-nonvanishing"
        } else {
            "unchecked"
        }
    }

    fn conventions(&self) -> Vec<(&'static str, String)> {
        let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(",");
        vec![
            ("symbol", "plus".into()),
            (
                "normalization",
                "first nonzero coordinate of phi is 1".into(),
            ),
            (
                "cut_primes",
                join(&mut self.cut_primes.iter().map(u64::to_string)),
            ),
            (
                "etas",
                join(&mut self.primes.iter().map(|k| format!("{}:{}", k.ell, k.eta))),
            ),
            (
                "galois_action",
                "sigma_eta multiplies exponents by the CRT lift of eta".into(),
            ),
            ("oracle_sign", "+1".into()),
            ("alpha", "a_p mod p".into()),
        ]
    }

    /// Machine-readable records, one per line.
    pub fn to_lines(&self) -> String {
        let c = &self.conditions;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "FORMv1 label={} N={} p={} ap={}",
            self.label, self.level, self.p, self.ap
        );
        let _ = writeln!(
            s,
            "CONDv1 na_ok={} tam1_ok={} tam1_product={} tam2={} im_status={}",
            c.na_ok,
            c.tam1_ok,
            c.tam1_product,
            self.tam2(),
            c.im_status
        );
        let primes: Vec<String> = self.primes.iter().map(|k| k.ell.to_string()).collect();
        let _ = writeln!(s, "PRIMESv1 {}", primes.join(","));
        for r in &self.deltas {
            let _ = writeln!(s, "{}", r.to_line());
        }
        if let Some(t) = &self.theta {
            let _ = writeln!(s, "MUSCANv1 {t}");
        }
        for (k, v) in self.conventions() {
            let _ = writeln!(s, "CONVv1 {k}={v}");
        }
        let first = self
            .first_nonzero()
            .map_or("none".to_string(), |r| r.n.to_string());
        let _ = writeln!(
            s,
            "VERDICTv1 verdict={} first_nonzero={first}",
            self.verdict.name()
        );
        s
    }

    /// Human-readable report.
    pub fn to_table(&self) -> String {
        let c = &self.conditions;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "form {} (level {}), p = {}, a_p = {} mod p",
            self.label, self.level, self.p, self.ap
        );
        let _ = writeln!(s, "\nconditions");
        let _ = writeln!(s, "  (NA)       {}", if c.na_ok { "ok" } else { "FAILS" });
        let _ = writeln!(
            s,
            "  (Tam) 1    {} (product {})",
            if c.tam1_ok { "ok" } else { "FAILS" },
            c.tam1_product
        );
        let _ = writeln!(s, "  (Tam) 2    {}", self.tam2());
        let _ = writeln!(s, "  (Im)       {}", c.im_status);
        for note in &c.notes {
            let _ = writeln!(s, "  note: {note}");
        }
        let primes: Vec<String> = self.primes.iter().map(|k| k.ell.to_string()).collect();
        let _ = writeln!(s, "\nKolyvagin primes: {}", primes.join(", "));
        if !self.deltas.is_empty() {
            let _ = writeln!(s, "\n{}", reports_table(&self.deltas).trim_end());
        }
        if let Some(t) = &self.theta {
            let _ = writeln!(s, "\nlayer scan: {t}");
        }
        let _ = writeln!(s, "\nconventions");
        for (k, v) in self.conventions() {
            let _ = writeln!(s, "  {k:<14} {v}");
        }
        let _ = writeln!(s, "\nverdict: {}", self.verdict.name());
        match (&self.verdict, self.first_nonzero()) {
            (Verdict::HypothesisFailed(why), _) => {
                let _ = writeln!(s, "  {why}");
            }
            (_, Some(r)) => {
                let _ = writeln!(s, "  first nonzero delta at n = {}", r.n_display());
            }
            _ => {}
        }
        s
    }
}

/// Run the whole pipeline.
pub fn verify(config: &VerifyConfig) -> Result<VerdictReport> {
    let t0 = Instant::now();
    let p = config.p;
    let data = config.source.eigendata(p)?;
    let conditions = check_conditions(&config.source, &data, config.assert_im)?;
    let failure = if !conditions.na_ok {
        Some(format!("(NA) fails: a_p = {} mod {p}", data.ap))
    } else if !conditions.tam1_ok {
        Some(format!(
            "(Tam) fails: {p} divides {}",
            conditions.tam1_product
        ))
    } else {
        None
    };
    if let Some(why) = failure {
        return Ok(VerdictReport {
            label: config.source.label().to_string(),
            level: data.level,
            p,
            ap: data.ap,
            conditions,
            primes: Vec::new(),
            deltas: Vec::new(),
            theta: None,
            cut_primes: Vec::new(),
            verdict: Verdict::HypothesisFailed(why),
        });
    }
    let cache = resolve_cache_dir(config.cache_dir.clone());
    let phi = load_functional(&data, cache.as_deref())?;
    let primes = scan_primes(&config.source, Some(&phi), p, config.count, config.start)?;
    let mut tables = match &cache {
        Some(dir) => DlogTables::with_cache(dir),
        None => DlogTables::new(),
    };
    let mut deltas = scan_delta(
        &phi,
        &primes,
        config.max_factors,
        config.first_hit,
        &mut tables,
    )?;
    if config.no_timing {
        for r in &mut deltas {
            r.seconds = 0.0;
        }
    }
    let theta = Some(mu_scan(&phi, data.ap, data.ap != 0, config.r_max)?);
    let hit = deltas.iter().any(|r| r.nonzero);
    let verdict = if hit && conditions.im_status != ImStatus::Inconclusive {
        Verdict::CriterionMet
    } else {
        Verdict::CriterionNotMetWithinBudget
    };
    let mut conditions = conditions;
    if hit && conditions.im_status == ImStatus::Inconclusive {
        conditions
            .notes
            .push("nonzero delta found but (Im) is inconclusive; see --assert-im".into());
    }
    if !config.no_timing {
        conditions
            .notes
            .push(format!("total time {:.1} s", t0.elapsed().as_secs_f64()));
    }
    Ok(VerdictReport {
        label: config.source.label().to_string(),
        level: data.level,
        p,
        ap: data.ap,
        conditions,
        primes,
        deltas,
        theta,
        cut_primes: phi.cut_primes().to_vec(),
        verdict,
    })
}

/// Split a squarefree n into its prime factors, paired with the given etas
/// or the smallest primitive roots.
pub fn factors_of(n: u64, etas: Option<&[u64]>) -> Result<Vec<KolyvaginPrime>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let f = arith::factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        return Err(Error::InvalidArgument(format!("{n} is not squarefree")));
    }
    if let Some(etas) = etas {
        if etas.len() != f.len() {
            return Err(Error::InvalidArgument(format!(
                "{} etas given for {} factors",
                etas.len(),
                f.len()
            )));
        }
    }
    f.iter()
        .enumerate()
        .map(|(i, &(ell, _))| match etas {
            Some(e) => {
                if arith::mult_order(e[i] % ell, ell) != Some(ell - 1) {
                    return Err(Error::InvalidArgument(format!(
                        "{} is not a primitive root mod {ell}",
                        e[i]
                    )));
                }
                Ok(KolyvaginPrime {
                    ell,
                    eta: e[i] % ell,
                })
            }
            None => KolyvaginPrime::new(ell),
        })
        .collect()
}
