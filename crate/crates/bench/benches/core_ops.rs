use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fermibox_core::analysis::{bulk_scaling_study, Grid2d};
use fermibox_core::heatflow::{km_log_density, HeatFamily, LoopEnsembleParams};
use fermibox_core::kernels::{eval_grid, finite_t, ground_state, BcSource};
use fermibox_core::sampling::{GrandCanonicalSampler, GroupModes, ProjectionSampler};
use fermibox_core::spectral::{solve_spectrum, SolveOptions};
use fermibox_core::thermo::{cutoff_energy, polylog_half, solve_lambda, solve_mu};
use fermibox_core::{make_preset, GroupKind, RngSpec, SpectrumTarget};

fn spectra(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectrum");
    for (name, params) in [("dirichlet", vec![]), ("robin", vec![PI / 2.0]), ("delta", vec![-3.0])] {
        let u = make_preset(name, &params).unwrap();
        g.bench_with_input(BenchmarkId::new(name, 100), &u, |b, u| {
            b.iter(|| solve_spectrum(u, SpectrumTarget::Count(100), &SolveOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn kernels(c: &mut Criterion) {
    let xs: Vec<f64> = (0..64).map(|i| 0.05 + 0.09 * i as f64).collect();
    let robin = ground_state(&BcSource::preset("robin", &[1.0]), 50).unwrap();
    c.bench_function("kernel/ground_robin_50_grid64", |b| b.iter(|| eval_grid(&robin, &xs, &xs).unwrap()));
    let warm = finite_t(&BcSource::preset("periodic", &[]), 2500.0, 2500.0 * 3.0f64.ln(), 1e-14).unwrap();
    c.bench_function("kernel/finite_t_periodic_grid64", |b| b.iter(|| eval_grid(&warm, &xs, &xs).unwrap()));
}

fn thermo(c: &mut Criterion) {
    c.bench_function("thermo/polylog_half", |b| b.iter(|| polylog_half(black_box(10.0))));
    c.bench_function("thermo/solve_lambda", |b| b.iter(|| solve_lambda(black_box(1.0)).unwrap()));
    let u = make_preset("dirichlet", &[]).unwrap();
    c.bench_function("thermo/solve_mu_dirichlet", |b| b.iter(|| solve_mu(&u, 25.0, black_box(20.0), 1e-10).unwrap()));
}

fn sampling(c: &mut Criterion) {
    let rng = RngSpec::new(1, 0);
    let cue = ProjectionSampler::new(GroupModes { group: GroupKind::U, n: 20 }).unwrap();
    c.bench_function("sample/dpp_cue_20", |b| {
        let mut r = rng.rng();
        b.iter(|| cue.sample(&mut r).unwrap())
    });
    let u = make_preset("periodic", &[]).unwrap();
    let (t, mu) = (50.0, 50.0 * 10.0f64.ln());
    let s = solve_spectrum(&u, SpectrumTarget::Cutoff(cutoff_energy(t, mu, 1e-14)), &SolveOptions::default()).unwrap();
    let gc = GrandCanonicalSampler::new(&s, t, mu).unwrap();
    c.bench_function("sample/grand_canonical_periodic", |b| {
        let mut r = rng.rng();
        b.iter(|| gc.sample(&mut r).unwrap())
    });
}

fn heatflow(c: &mut Criterion) {
    let xs: Vec<f64> = (0..9).map(|i| 0.3 + 0.6 * i as f64).collect();
    for t in [0.1, 2.0] {
        let p = LoopEnsembleParams::new(HeatFamily::A, t, xs.len()).unwrap();
        c.bench_with_input(BenchmarkId::new("km/log_density_A9", t), &p, |b, p| b.iter(|| km_log_density(p, &xs).unwrap()));
    }
}

fn studies(c: &mut Criterion) {
    let mut g = c.benchmark_group("study");
    g.sample_size(10);
    let u = make_preset("dirichlet", &[]).unwrap();
    let grid = Grid2d::square(-2.0, 2.0, 17);
    g.bench_function("bulk_dirichlet_25_50_100", |b| b.iter(|| bulk_scaling_study(&u, PI, &[25, 50, 100], &grid).unwrap()));
    g.finish();
}

criterion_group!(benches, spectra, kernels, thermo, sampling, heatflow, studies);
criterion_main!(benches);
