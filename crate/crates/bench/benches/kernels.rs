use std::hint::black_box;

use casimir_bench::{cavity, drude, lorentz, sampled_drude_table};
use casimir_core::{spectral_density, sweep_fom, total_pressure, QuadratureSettings, SpectrumOptions};
use criterion::{criterion_group, criterion_main, Criterion};

fn pressure(c: &mut Criterion) {
    let mut g = c.benchmark_group("total_pressure");
    let q = QuadratureSettings::with_rel_tol(1e-7);
    for (name, cfg) in [
        ("drude_t2_d10", cavity(drude(), 2.0, 10.0)),
        ("drude_t200_d100", cavity(drude(), 200.0, 100.0)),
        ("lorentz_t20_d100", cavity(lorentz(), 20.0, 100.0)),
    ] {
        g.bench_function(name, |b| b.iter(|| total_pressure(black_box(&cfg), &q).unwrap()));
    }
    g.finish();
}

fn spectrum(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectral_density");
    let q = SpectrumOptions::default_quad();
    let cfg = cavity(drude(), 2.0, 10.0);
    for omega in [1.45, 2.85] {
        g.bench_function(format!("drude_t2_d10_{omega}eV"), |b| {
            b.iter(|| spectral_density(black_box(&cfg), black_box(omega), &q).unwrap())
        });
    }
    g.finish();
}

fn kramers_kronig(c: &mut Criterion) {
    let mut g = c.benchmark_group("kramers_kronig");
    g.sample_size(10);
    g.bench_function("build_imaginary_axis_table_400", |b| {
        b.iter_with_setup(|| sampled_drude_table(400), |m| m.eps_imag_axis(black_box(1.0)).unwrap())
    });
    g.finish();
}

fn fom_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("fom");
    g.sample_size(10);
    let grid: Vec<f64> = (0..12).map(|i| 0.5 * 1000f64.powf(i as f64 / 11.0)).collect();
    let q = QuadratureSettings::with_rel_tol(1e-6);
    let m = lorentz();
    g.bench_function("lorentz_d100_12pt", |b| b.iter(|| sweep_fom(&m, 100.0, &grid, &q).unwrap()));
    g.finish();
}

criterion_group!(benches, pressure, spectrum, kramers_kronig, fom_sweep);
criterion_main!(benches);
