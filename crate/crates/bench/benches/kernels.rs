use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use ltperiod::lubin_tate::{exp_special, log_special, pk_combinatorial, pk_series};
use ltperiod::omega_solver::u_table;
use ltperiod::{LocalNum, ModelKind, Params, Tower, TowerSpec};

fn ring(c: &mut Criterion) {
    let t = Tower::build(&TowerSpec::new(2, 2, 3, 3, 60).unwrap()).unwrap();
    let x = LocalNum::pi(&t).add(&LocalNum::omega(&t)).pow(5).add(&LocalNum::one(&t));
    let y = x.mul(&LocalNum::pi(&t)).add(&LocalNum::from_int(&t, 3));
    c.bench_function("local mul p=2 n=3", |b| b.iter(|| black_box(&x).mul(black_box(&y))));
    c.bench_function("local mul_pi p=2 n=3", |b| b.iter(|| black_box(&x).mul_pi()));
}

fn tables(c: &mut Criterion) {
    let t = Tower::build(&TowerSpec::new(2, 2, 2, 3, 40).unwrap()).unwrap();
    let omega = LocalNum::pi(&t).pow(8).add(&LocalNum::from_int(&t, 2)).mul(&LocalNum::omega(&t));
    c.bench_function("u_table k<=64 p=2 n=2", |b| b.iter(|| u_table(black_box(&omega), 64)));
}

fn series(c: &mut Criterion) {
    let p2 = Params::new(2).unwrap();
    c.bench_function("reversion cap 120", |b| b.iter(|| exp_special(black_box(&p2), 120).unwrap()));
    let log = log_special(&p2, 120).unwrap();
    c.bench_function("compose cap 120", |b| b.iter(|| log.compose(black_box(&log.truncate(120))).ok()));
    c.bench_function("pk_combinatorial m<=100", |b| {
        b.iter(|| (0..=100).map(|m| pk_combinatorial(m, black_box(&p2))).collect::<Vec<_>>())
    });
    c.bench_function("pk_series m<=100", |b| b.iter(|| pk_series(100, black_box(&p2), ModelKind::Special).unwrap()));
}

criterion_group!(benches, ring, tables, series);
criterion_main!(benches);
