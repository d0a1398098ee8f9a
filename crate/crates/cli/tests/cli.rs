use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kurihara"))
        .args(args)
        .env_remove("KURIHARA_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_760_meets_the_criterion_at_n_1() {
    let curve = data("760.e1.curve");
    let o = run(&[
        "verify",
        "--curve",
        &curve,
        "--p",
        "3",
        "--assert-im",
        "--count",
        "2",
        "--format",
        "lines",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let out = stdout(&o);
    assert!(out.contains(
        "CONDv1 na_ok=true tam1_ok=true tam1_product=80 tam2=discharged-by-nonvanishing"
    ));
    assert!(out.contains("DELTAv1 n=1 factors= etas= value=1 nonzero=true"));
    assert!(out.contains("VERDICTv1 verdict=CriterionMet first_nonzero=1"));
}

#[test]
fn without_the_im_assertion_p3_is_inconclusive() {
    let curve = data("760.e1.curve");
    let o = run(&[
        "verify",
        "--curve",
        &curve,
        "--p",
        "3",
        "--count",
        "1",
        "--max-factors",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("CriterionNotMetWithinBudget"));
}

#[test]
fn anomalous_prime_is_a_hypothesis_failure() {
    // 11a1 has a_5 = 1
    let o = run(&[
        "verify",
        "--curve-ainv",
        "0,-1,1,-10,-20",
        "--conductor",
        "11",
        "--p",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("(NA)       FAILS"), "{out}");
    assert!(out.contains("HypothesisFailed"));
}

#[test]
fn scan_primes_10800() {
    let o = run(&[
        "scan-primes",
        "--curve",
        &data("10800.dl1.curve"),
        "--p",
        "7",
        "--format",
        "lines",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    let ells: Vec<&str> = line
        .trim()
        .trim_start_matches("PRIMESv1 ")
        .split(',')
        .map(|t| t.split(':').next().unwrap())
        .collect();
    assert_eq!(ells, ["71", "113", "491", "967", "1163"]);
}

#[test]
fn delta_at_1_vanishes_for_the_rank_two_curve() {
    let o = run(&[
        "delta",
        "--curve",
        &data("3456.a1.curve"),
        "--p",
        "5",
        "--n",
        "1",
        "--format",
        "lines",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("DELTAv1 n=1 factors= etas= value=0 nonzero=false"));
}

#[test]
fn delta_with_explicit_etas() {
    let curve = data("760.e1.curve");
    let a = run(&[
        "delta", "--curve", &curve, "--p", "3", "--n", "469", "--etas", "3,2", "--format", "lines",
    ]);
    let b = run(&[
        "delta", "--curve", &curve, "--p", "3", "--n", "469", "--etas", "5,7", "--format", "lines",
    ]);
    assert!(stdout(&a).contains("etas=3,2") && stdout(&a).contains("nonzero=true"));
    assert!(stdout(&b).contains("etas=5,7") && stdout(&b).contains("nonzero=true"));
    let bad = run(&[
        "delta", "--curve", &curve, "--p", "3", "--n", "469", "--etas", "2,2",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn oracle_exit_code() {
    let o = run(&[
        "oracle",
        "--curve",
        &data("760.e1.curve"),
        "--p",
        "3",
        "--n",
        "5299",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("route=ext") && stdout(&o).contains("equal=true"));
}

#[test]
fn theta_records() {
    let curve = data("10800.dl1.curve");
    let o = run(&[
        "theta", "--curve", &curve, "--p", "7", "--m", "7", "--format", "lines",
    ]);
    assert!(stdout(&o).starts_with("THETAv1 layer=7 coeffs="));
    let o = run(&[
        "theta", "--curve", &curve, "--p", "7", "--rmax", "1", "--format", "lines",
    ]);
    assert!(stdout(&o).starts_with("MUSCANv1 ordinary"));
    let o = run(&["theta", "--curve", &curve, "--p", "7", "--rmax", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn input_must_be_unique() {
    let o = run(&[
        "delta",
        "--curve",
        &data("760.e1.curve"),
        "--eigdata",
        &data("520.sqrt6.eigs"),
        "--p",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[InvalidArgument]"));
}

#[test]
fn multiplicity_errors_carry_a_hint() {
    let dir = std::env::temp_dir().join(format!("kurihara-cli-hint-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let eigs = dir.join("short.eigs");
    std::fs::write(
        &eigs,
        "EIGSv1\nN=760\np=3\nap=0\npsi_p=1\nlabel=short\n7 2\n",
    )
    .unwrap();
    let o = run(&[
        "delta",
        "--eigdata",
        eigs.to_str().unwrap(),
        "--p",
        "3",
        "--n",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("error[MultiplicityFailure]") && err.contains("hint:"),
        "{err}"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reports_are_deterministic_and_cache_is_reused() {
    let dir = std::env::temp_dir().join(format!("kurihara-cli-cache-{}", std::process::id()));
    let curve = data("10800.dl1.curve");
    let args = [
        "verify",
        "--curve",
        &curve,
        "--p",
        "7",
        "--count",
        "2",
        "--no-timing",
        "--format",
        "lines",
    ];
    let first = Command::new(env!("CARGO_BIN_EXE_kurihara"))
        .args(args)
        .env("KURIHARA_CACHE", &dir)
        .output()
        .unwrap();
    assert!(dir.join("mspace_10800_7_plus.txt").exists());
    let second = Command::new(env!("CARGO_BIN_EXE_kurihara"))
        .args(args)
        .env("KURIHARA_CACHE", &dir)
        .output()
        .unwrap();
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    std::fs::remove_dir_all(&dir).ok();
}
