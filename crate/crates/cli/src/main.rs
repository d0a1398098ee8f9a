use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kurihara::formdata::{parse_ainvs, CurveSpec, EigenData};
use kurihara::kurihara::{
    derivative_oracle, kurihara_number, reports_table, scan_delta, DlogTables,
};
use kurihara::mazur_tate::{mu_scan, project_to_layer, stabilize_theta, theta_plus};
use kurihara::pipeline::{
    factors_of, load_functional, resolve_cache_dir, scan_primes, verify, FormSource, VerifyConfig,
};
use kurihara::{Error, ManinSpace, Sign};

#[derive(Parser)]
#[command(
    name = "kurihara",
    version,
    about = "Kurihara numbers and Mazur-Tate elements from mod-p modular symbols"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the hypotheses and search for a nonzero Kurihara number
    Verify(VerifyArgs),
    /// Kurihara numbers for one n or for products of scanned primes
    Delta(DeltaArgs),
    /// Mazur-Tate elements and the layer scan
    Theta(ThetaArgs),
    /// List Kolyvagin primes
    ScanPrimes(ScanArgs),
    /// Build the symbol space and store it in the cache
    BuildSpace(BuildArgs),
    /// Compare the derivative oracle with the Kurihara number
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
struct Input {
    /// CURVEv1 file
    #[arg(long)]
    curve: Option<PathBuf>,
    /// EIGSv1 file
    #[arg(long)]
    eigdata: Option<PathBuf>,
    /// a1,a2,a3,a4,a6
    #[arg(long, allow_hyphen_values = true, requires = "conductor")]
    curve_ainv: Option<String>,
    #[arg(long, requires = "curve_ainv")]
    conductor: Option<u64>,
    #[arg(long)]
    label: Option<String>,
}

impl Input {
    fn load(&self) -> kurihara::Result<FormSource> {
        let given = [
            self.curve.is_some(),
            self.eigdata.is_some(),
            self.curve_ainv.is_some(),
        ];
        if given.iter().filter(|&&b| b).count() != 1 {
            return Err(Error::InvalidArgument(
                "give exactly one of --curve, --eigdata or --curve-ainv with --conductor".into(),
            ));
        }
        let mut src = if let Some(path) = &self.curve {
            FormSource::Curve(CurveSpec::parse(&std::fs::read_to_string(path)?)?)
        } else if let Some(path) = &self.eigdata {
            FormSource::Eigen(EigenData::parse(&std::fs::read_to_string(path)?)?)
        } else {
            let ainvs = parse_ainvs(self.curve_ainv.as_deref().unwrap_or_default())?;
            let n = self.conductor.unwrap_or_default();
            FormSource::Curve(CurveSpec::new(n.to_string(), n, ainvs)?)
        };
        if let Some(label) = &self.label {
            match &mut src {
                FormSource::Curve(c) => c.label = label.clone(),
                FormSource::Eigen(d) => d.label = label.clone(),
            }
        }
        Ok(src)
    }
}

#[derive(Args, Clone)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

impl Output {
    fn emit(&self, text: &str) -> kurihara::Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }

    fn cache(&self) -> Option<PathBuf> {
        resolve_cache_dir(self.cache_dir.clone())
    }

    fn tables(&self) -> DlogTables {
        self.cache()
            .map_or_else(DlogTables::new, DlogTables::with_cache)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Lines,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 5)]
    count: usize,
    #[arg(long, default_value_t = 2)]
    start: u64,
    #[arg(long, default_value_t = 2)]
    max_factors: usize,
    #[arg(long)]
    first_hit: bool,
    #[arg(long, default_value_t = kurihara::mazur_tate::DEFAULT_RMAX)]
    rmax: u32,
    /// accept (Im) on the user's word when sampling cannot prove it
    #[arg(long)]
    assert_im: bool,
    /// print zero timings, for byte-identical reports
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DeltaArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    p: u64,
    /// a single squarefree n; without it the scanned primes are combined
    #[arg(long)]
    n: Option<u64>,
    /// primitive roots for the factors of n, in increasing order of the factors
    #[arg(long, value_delimiter = ',')]
    etas: Option<Vec<u64>>,
    #[arg(long, default_value_t = 5)]
    count: usize,
    #[arg(long, default_value_t = 2)]
    start: u64,
    #[arg(long, default_value_t = 2)]
    max_factors: usize,
    #[arg(long)]
    first_hit: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ThetaArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    p: u64,
    /// print theta+ at this modulus
    #[arg(long)]
    m: Option<u64>,
    /// print the stabilized element at p^r and its image in layer r - 1
    #[arg(long)]
    stabilized: Option<u32>,
    #[arg(long, default_value_t = kurihara::mazur_tate::DEFAULT_RMAX)]
    rmax: u32,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 5)]
    count: usize,
    #[arg(long, default_value_t = 2)]
    start: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    level: u64,
    #[arg(long)]
    p: u64,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    sign: SignArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
    Full,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    n: u64,
    #[arg(long, value_delimiter = ',')]
    etas: Option<Vec<u64>>,
    #[command(flatten)]
    output: Output,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Delta(a) => cmd_delta(a),
        Cmd::Theta(a) => cmd_theta(a),
        Cmd::ScanPrimes(a) => cmd_scan_primes(a),
        Cmd::BuildSpace(a) => cmd_build_space(a),
        Cmd::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            if let Some(h) = e.hint() {
                eprintln!("hint: {h}");
            }
            ExitCode::from(1)
        }
    }
}

fn cmd_verify(a: VerifyArgs) -> kurihara::Result<u8> {
    let config = VerifyConfig {
        source: a.input.load()?,
        p: a.p,
        count: a.count,
        start: a.start,
        max_factors: a.max_factors,
        first_hit: a.first_hit,
        r_max: a.rmax,
        cache_dir: a.output.cache_dir.clone(),
        assert_im: a.assert_im,
        no_timing: a.no_timing,
    };
    let report = verify(&config)?;
    a.output.emit(&match a.output.format {
        Format::Table => report.to_table(),
        Format::Lines => report.to_lines(),
    })?;
    Ok(report.verdict.exit_code() as u8)
}

fn cmd_delta(a: DeltaArgs) -> kurihara::Result<u8> {
    let src = a.input.load()?;
    let data = src.eigendata(a.p)?;
    let phi = load_functional(&data, a.output.cache().as_deref())?;
    let mut tables = a.output.tables();
    let reports = match a.n {
        Some(n) => vec![kurihara_number(
            &phi,
            &factors_of(n, a.etas.as_deref())?,
            &mut tables,
        )?],
        None => {
            let primes = scan_primes(&src, Some(&phi), a.p, a.count, a.start)?;
            scan_delta(&phi, &primes, a.max_factors, a.first_hit, &mut tables)?
        }
    };
    let text = match a.output.format {
        Format::Table => reports_table(&reports),
        Format::Lines => reports.iter().map(|r| r.to_line() + "\n").collect(),
    };
    a.output.emit(&text)?;
    Ok(0)
}

fn cmd_theta(a: ThetaArgs) -> kurihara::Result<u8> {
    let src = a.input.load()?;
    let data = src.eigendata(a.p)?;
    let phi = load_functional(&data, a.output.cache().as_deref())?;
    let f = *phi.field();
    let mut text = String::new();
    if let Some(m) = a.m {
        text += &(theta_plus(&phi, m)?.to_line() + "\n");
    }
    if let Some(r) = a.stabilized {
        let x = stabilize_theta(&phi, r, data.ap)?;
        text += &(x.to_line() + "\n");
        if r >= 1 {
            text += &(project_to_layer(&f, &x, r - 1)?.to_line() + "\n");
        }
    }
    if a.m.is_none() && a.stabilized.is_none() {
        let scan = mu_scan(&phi, data.ap, data.ap != 0, a.rmax)?;
        text += &match a.output.format {
            Format::Table => format!("layer scan: {scan}\n"),
            Format::Lines => format!("MUSCANv1 {scan}\n"),
        };
    }
    a.output.emit(&text)?;
    Ok(0)
}

fn cmd_scan_primes(a: ScanArgs) -> kurihara::Result<u8> {
    let src = a.input.load()?;
    let phi = match &src {
        FormSource::Curve(_) => None,
        FormSource::Eigen(d) => Some(load_functional(d, a.output.cache().as_deref())?),
    };
    let primes = scan_primes(&src, phi.as_ref(), a.p, a.count, a.start)?;
    let text: String = match a.output.format {
        Format::Table => primes
            .iter()
            .map(|k| format!("{:>10} {:>6}\n", k.ell, k.eta))
            .collect(),
        Format::Lines => {
            let list: Vec<String> = primes
                .iter()
                .map(|k| format!("{}:{}", k.ell, k.eta))
                .collect();
            format!("PRIMESv1 {}\n", list.join(","))
        }
    };
    a.output.emit(&text)?;
    Ok(0)
}

fn cmd_build_space(a: BuildArgs) -> kurihara::Result<u8> {
    let sign = match a.sign {
        SignArg::Plus => Sign::Plus,
        SignArg::Minus => Sign::Minus,
        SignArg::Full => Sign::Full,
    };
    let t = Instant::now();
    let space = match a.output.cache() {
        Some(dir) => ManinSpace::cached(&dir, a.level, a.p, sign)?,
        None => ManinSpace::build(a.level, a.p, sign)?,
    };
    let space = Arc::new(space);
    a.output.emit(&format!(
        "SPACEv1 N={} p={} sign={} symbols={} dim={} seconds={:.3}\n",
        space.level(),
        space.p(),
        sign.as_str(),
        space.p1().len(),
        space.dim(),
        t.elapsed().as_secs_f64()
    ))?;
    Ok(0)
}

fn cmd_oracle(a: OracleArgs) -> kurihara::Result<u8> {
    let src = a.input.load()?;
    let data = src.eigendata(a.p)?;
    let phi = load_functional(&data, a.output.cache().as_deref())?;
    let factors = factors_of(a.n, a.etas.as_deref())?;
    let out = derivative_oracle(&phi, &factors, &mut a.output.tables())?;
    a.output.emit(&format!(
        "ORACLEv1 n={} route={} oracle={} delta={} sign={} equal={}\n",
        a.n,
        out.route,
        out.oracle,
        out.delta,
        out.sign,
        out.oracle == out.delta
    ))?;
    Ok(if out.oracle == out.delta { 0 } else { 2 })
}
