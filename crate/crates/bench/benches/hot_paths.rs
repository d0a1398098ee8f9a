use criterion::{criterion_group, criterion_main, Criterion};
use kurihara::formdata::KolyvaginPrime;
use kurihara::kurihara::{kurihara_number, DlogTables};
use kurihara::{ManinSpace, Sign};
use kurihara_bench::{curve_10800, curve_760, functional};

fn paths(c: &mut Criterion) {
    let phi = functional(&curve_10800(), 7);
    let n = 71 * 113;
    c.bench_function("modsym_value 10800 n=8023 (1000 values)", |b| {
        b.iter(|| {
            (1..=1000u64)
                .filter(|a| a % 71 != 0 && a % 113 != 0)
                .map(|a| phi.modsym_value_unchecked(a, n))
                .sum::<u32>()
        })
    });
    let space = phi.space().clone();
    c.bench_function("eval_path 10800 a/n=4001/8023", |b| {
        b.iter(|| space.eval_path(4001, n).unwrap())
    });
}

fn deltas(c: &mut Criterion) {
    let phi = functional(&curve_10800(), 7);
    let factors = [
        KolyvaginPrime::new(71).unwrap(),
        KolyvaginPrime::new(113).unwrap(),
    ];
    let mut tables = DlogTables::new();
    c.bench_function("delta 10800 n=71*113", |b| {
        b.iter(|| kurihara_number(&phi, &factors, &mut tables).unwrap().value)
    });
}

fn build(c: &mut Criterion) {
    let mut g = c.benchmark_group("space");
    g.sample_size(10);
    g.bench_function("build plus space N=760 p=3", |b| {
        b.iter(|| ManinSpace::build(760, 3, Sign::Plus).unwrap().dim())
    });
    g.bench_function("cut 760.e1 mod 3", |b| {
        b.iter(|| functional(&curve_760(), 3).phi().len())
    });
    g.finish();
}

criterion_group!(benches, paths, deltas, build);
criterion_main!(benches);
