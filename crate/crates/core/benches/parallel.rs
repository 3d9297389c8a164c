//! Parallel vs sequential execution of the heavier entry points.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kh_riesz::aumann::comparison_simple;
use kh_riesz::domain::{BorelSet, MeasureSpec};
use kh_riesz::kh::{kh_integrate, CertifyOptions, Integrand, ModulusGauge};
use kh_riesz::lattice::{standard_probes, Regulator, RieszValue};
use kh_riesz::par::Exec;
use kh_riesz::setvalued::{Multifunction, OrderInterval, PhiOptions};
use kh_riesz::suites::{run_suite, SuiteConfig};

const MODES: [(&str, Exec); 2] = [
    ("parallel", Exec::Parallel),
    ("sequential", Exec::Sequential),
];

fn regulator() -> Regulator {
    Regulator::geometric(RieszValue::scalar(1.0), 1.0, 0.5).unwrap()
}

fn integrate(c: &mut Criterion) {
    let f = Integrand::scalar_formula("2*t + 0.5*sin:12".parse().unwrap(), RieszValue::scalar(1.0))
        .unwrap();
    let (spec, reg, probes) = (MeasureSpec::lebesgue(), regulator(), standard_probes());
    let mut g = c.benchmark_group("kh_integrate");
    for (name, exec) in MODES {
        let opts = CertifyOptions {
            samples: 64,
            exec,
            ..CertifyOptions::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                kh_integrate(
                    black_box(&f),
                    &BorelSet::unit(),
                    &spec,
                    &reg,
                    &probes,
                    &ModulusGauge::default(),
                    &opts,
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

fn compare(c: &mut Criterion) {
    let iv = |a, b| OrderInterval::scalar(a, b).unwrap();
    let f = Multifunction::simple(vec![
        ("[0,0.25]".parse().unwrap(), iv(0.0, 1.0)),
        ("(0.25,0.6]".parse().unwrap(), iv(-1.0, 0.5)),
        ("(0.6,1]".parse().unwrap(), iv(2.0, 3.0)),
    ])
    .unwrap();
    let a: BorelSet = "[0.1,0.9]".parse().unwrap();
    let (spec, reg, probes) = (MeasureSpec::lebesgue(), regulator(), standard_probes());
    let mut g = c.benchmark_group("comparison_simple");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = PhiOptions {
            exec,
            ..PhiOptions::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| comparison_simple(black_box(&f), &a, &spec, &reg, &probes, &opts).unwrap())
        });
    }
    g.finish();
}

fn suite(c: &mut Criterion) {
    let mut g = c.benchmark_group("suite_integral");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SuiteConfig {
            exec,
            ..SuiteConfig::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_suite(black_box("integral"), &cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, integrate, compare, suite);
criterion_main!(benches);
