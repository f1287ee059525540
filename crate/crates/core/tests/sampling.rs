use std::f64::consts::{PI, TAU};

use fermibox_core::analysis::*;
use fermibox_core::kernels::{ground_state, group_kernel, BcSource, Kernel};
use fermibox_core::sampling::*;
use fermibox_core::spectral::{solve_spectrum, SolveOptions};
use fermibox_core::thermo::{cutoff_energy, mode_probabilities, solve_mu};
use fermibox_core::*;

const SEED: u64 = 20_240_611;

fn lowest_modes(name: &str, params: &[f64], n: usize) -> SpectralModes {
    let s = solve_spectrum(&make_preset(name, params).unwrap(), SpectrumTarget::Count(n), &SolveOptions::default())
        .unwrap();
    SpectralModes::lowest(&s, n).unwrap()
}

fn batch<M: ModeSet>(modes: M, count: usize, stream: u64) -> Vec<PointConfig> {
    let sampler = ProjectionSampler::new(modes).unwrap();
    sample_batch(count, &RngSpec::new(SEED, stream), |r| sampler.sample(r)).unwrap()
}

// [TRIVIAL] one periodic mode has a flat density
#[test]
fn single_periodic_mode_is_uniform() {
    let samples = batch(lowest_modes("periodic", &[], 1), 10_000, 1);
    let xs: Vec<f64> = samples.iter().map(|s| s.points[0]).collect();
    let d = ks_statistic(&xs, |x| x / TAU);
    assert!(d <= ks_critical_99(xs.len()), "KS {d}");
}

// [TRIVIAL] fixed count, strictly interior points; [DERIVED] one-point density against K^D(x,x)
#[test]
fn dirichlet_projection_dpp() {
    let samples = batch(lowest_modes("dirichlet", &[], 7), 10_000, 2);
    for s in &samples {
        assert_eq!(s.len(), 7);
        assert!(s.points.iter().all(|&x| x > 0.0 && x < TAU));
    }
    let bins = Bins::new(0.0, TAU, 40);
    let kd = ground_state(&BcSource::preset("dirichlet", &[]), 7).unwrap();
    let expected = expected_density_counts(|x| kd.eval(x, x).unwrap().re, &bins);
    let test = hotelling_one_sample(&density_counts(&samples, &bins), &expected).unwrap();
    assert!(test.p_value > 0.01, "{test:?}");
    // [TRIVIAL] ∫ρ̂₁ = 7 for fixed-count samples
    let est = estimate_density(&samples, &bins).unwrap();
    assert!((est.values.iter().sum::<f64>() * bins.width() - 7.0).abs() < 1e-9);
}

#[test]
fn sampling_is_deterministic() {
    let sampler = ProjectionSampler::new(lowest_modes("robin", &[1.0], 5)).unwrap();
    let a = sample_batch(20, &RngSpec::new(3, 4), |r| sampler.sample(r)).unwrap();
    let b = sample_batch(20, &RngSpec::new(3, 4), |r| sampler.sample(r)).unwrap();
    let c = sample_batch(20, &RngSpec::new(3, 5), |r| sampler.sample(r)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let h1 = sample_haar_unitary_angles(5, &RngSpec::new(9, 0)).unwrap();
    let h2 = sample_haar_unitary_angles(5, &RngSpec::new(9, 0)).unwrap();
    assert_eq!(h1, h2);
}

// [DERIVED] marginal of every preset at N ∈ {3, 7}
#[test]
fn projection_marginals_for_every_preset() {
    let presets: [(&str, Vec<f64>); 6] = [
        ("dirichlet", vec![]),
        ("neumann", vec![]),
        ("zaremba", vec![]),
        ("robin", vec![1.2]),
        ("delta", vec![2.0]),
        ("dirichlet_robin", vec![1.0]),
    ];
    let bins = Bins::new(0.0, TAU, 16);
    for (i, (name, params)) in presets.iter().enumerate() {
        for n in [3usize, 7] {
            let modes = lowest_modes(name, params, n);
            let rho = |x: f64| modes.modes.iter().map(|m| m.value(x).norm_sqr()).sum::<f64>();
            let expected = expected_density_counts(rho, &bins);
            let samples = batch(modes.clone(), 3000, 100 + 2 * i as u64 + n as u64);
            let test = hotelling_one_sample(&density_counts(&samples, &bins), &expected).unwrap();
            assert!(test.p_value > 0.001, "{name} N={n}: {test:?}");
        }
    }
}

// [TRIVIAL] near-zero temperature fixes the count
#[test]
fn grand_canonical_zero_temperature_proxy() {
    let u = make_preset("dirichlet", &[]).unwrap();
    let (t, mu) = (1e-6, 0.5 * (4.0 + 6.25));
    let s = solve_spectrum(&u, SpectrumTarget::Cutoff(cutoff_energy(t, mu, 1e-14)), &SolveOptions::default()).unwrap();
    let gc = GrandCanonicalSampler::new(&s, t, mu).unwrap();
    let samples = sample_batch(200, &RngSpec::new(SEED, 3), |r| gc.sample(r)).unwrap();
    assert!(samples.iter().all(|c| c.len() == 4));
}

// [DERIVED] Poisson-binomial law; [TRIVIAL] mean count
#[test]
fn grand_canonical_counts() {
    let u = make_preset("neumann", &[]).unwrap();
    let t = 2.0;
    let mu = solve_mu(&u, t, 6.0, 1e-12).unwrap().mu;
    let s = solve_spectrum(&u, SpectrumTarget::Cutoff(cutoff_energy(t, mu, 1e-14)), &SolveOptions::default()).unwrap();
    let gc = GrandCanonicalSampler::new(&s, t, mu).unwrap();
    let samples = sample_batch(10_000, &RngSpec::new(SEED, 4), |r| gc.sample(r)).unwrap();
    let counts: Vec<usize> = samples.iter().map(|c| c.len()).collect();
    let exact = count_distribution(&mode_probabilities(&s, t, mu).p);
    assert!(total_variation(&empirical_pmf(&counts), &exact) < 0.03);
    let m = counts.len() as f64;
    let mean = counts.iter().sum::<usize>() as f64 / m;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (m - 1.0);
    assert!((mean - 6.0).abs() < 3.0 * (var / m).sqrt());
}

#[test]
fn grand_canonical_needs_a_deep_spectrum() {
    let u = make_preset("dirichlet", &[]).unwrap();
    let s = solve_spectrum(&u, SpectrumTarget::Count(3), &SolveOptions::default()).unwrap();
    assert!(matches!(GrandCanonicalSampler::new(&s, 5.0, 4.0), Err(Error::InsufficientSpectrum(_))));
}

// [TRIVIAL]
#[test]
fn count_distribution_examples() {
    assert_eq!(count_distribution(&[1.0; 4]), vec![0.0, 0.0, 0.0, 0.0, 1.0]);
    assert_eq!(count_distribution(&[0.5, 0.5]), vec![0.25, 0.5, 0.25]);
    let p: Vec<f64> = (0..30).map(|k| 1.0 / (1.0 + (k as f64 * 0.3 - 2.0).exp())).collect();
    assert!((count_distribution(&p).iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

// [TRIVIAL] U(1) is uniform
#[test]
fn haar_u1_is_uniform() {
    let r = RngSpec::new(SEED, 5);
    let xs: Vec<f64> = (0..10_000).map(|i| haar_unitary_angles(1, &mut r.rng_for(i)).unwrap().points[0]).collect();
    assert!(ks_statistic(&xs, |x| x / TAU) <= ks_critical_99(xs.len()));
}

// [DERIVED] det₂[Q_U(7)]; [TRIVIAL] rotation invariance of arc counts
#[test]
fn haar_u7_pair_correlation() {
    let samples = sample_batch(10_000, &RngSpec::new(SEED, 6), |r| haar_unitary_angles(7, r)).unwrap();
    let bins = Bins::new(0.0, TAU, 10);
    let q = |x: f64, y: f64| group_kernel(GroupKind::U, 7, x, y).unwrap();
    let expected = expected_pair_counts(|x, y| q(x, x) * q(y, y) - q(x, y).powi(2), &bins);
    let counts = pair_counts(&samples, &bins);
    let z = z_scores(&counts, &expected);
    assert!(fraction_exceeding(&z, 3.0) <= 0.02, "{z:?}");
    assert!(hotelling_one_sample(&counts, &expected).unwrap().p_value > 0.01);
    for (a, b) in [(0.0, 1.0), (2.0, 4.5), (5.0, 6.2)] {
        let per: Vec<f64> =
            samples.iter().map(|s| s.points.iter().filter(|&&x| x >= a && x < b).count() as f64).collect();
        let m = per.len() as f64;
        let mean = per.iter().sum::<f64>() / m;
        let sd = (per.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
        assert!((mean - 7.0 * (b - a) / TAU).abs() < 3.0 * sd / m.sqrt());
    }
}

// [DERIVED] SO(3) angle density from Q_SO(3); [TRIVIAL] SO(2N) angle count; [PAPER] eigenvalue +1 in SO(2N+1)
#[test]
fn haar_special_orthogonal_angles_and_fixed_point() {
    let samples = sample_batch(10_000, &RngSpec::new(SEED, 7), |r| haar_special_orthogonal_angles(3, r)).unwrap();
    assert!(samples.iter().all(|s| s.len() == 1));
    let bins = Bins::new(0.0, PI, 20);
    let expected = expected_density_counts(|x| group_kernel(GroupKind::SoOdd, 1, x, x).unwrap(), &bins);
    let test = hotelling_one_sample(&density_counts(&samples, &bins), &expected).unwrap();
    assert!(test.p_value > 0.01, "{test:?}");

    let mut rng = RngSpec::new(SEED, 8).rng();
    for _ in 0..50 {
        let a = haar_special_orthogonal_angles(8, &mut rng).unwrap();
        assert_eq!(a.len(), 4);
        assert!(a.points.iter().all(|&x| x > 0.0 && x < PI));
        let q = haar_special_orthogonal(7, &mut rng);
        assert!((q.determinant() - 1.0).abs() < 1e-10);
        let has_one = q.complex_eigenvalues().iter().any(|z| (z - num_complex::Complex64::new(1.0, 0.0)).norm() < 1e-8);
        assert!(has_one);
    }
}

// cross-validation of three routes to the U(2N+1) statistics
#[test]
fn unitary_routes_agree() {
    let n = 5;
    let bins = Bins::new(0.0, TAU, 8);
    let dpp = batch(GroupModes { group: GroupKind::U, n }, 10_000, 9);
    let haar = sample_batch(10_000, &RngSpec::new(SEED, 10), |r| haar_unitary_angles(n, r)).unwrap();
    let u = make_preset("periodic", &[]).unwrap();
    let (t, mu) = (1e-3, 4.0 + 1.5 + 0.5);
    let s = solve_spectrum(&u, SpectrumTarget::Cutoff(cutoff_energy(t, mu, 1e-14)), &SolveOptions::default()).unwrap();
    let gc = GrandCanonicalSampler::new(&s, t, mu).unwrap();
    let gcs = sample_batch(10_000, &RngSpec::new(SEED, 11), |r| gc.sample(r)).unwrap();
    let sets = [&dpp, &haar, &gcs];
    for i in 0..3 {
        for j in i + 1..3 {
            let one = hotelling_two_sample(&density_counts(sets[i], &bins), &density_counts(sets[j], &bins)).unwrap();
            let two = hotelling_two_sample(&pair_counts(sets[i], &bins), &pair_counts(sets[j], &bins)).unwrap();
            assert!(one.p_value > 0.01 && two.p_value > 0.01, "routes {i},{j}: {one:?} {two:?}");
        }
    }
}

#[test]
fn point_config_invariants() {
    assert!(PointConfig::new(vec![1.0, 1.0], Domain::Box).is_err());
    assert!(matches!(PointConfig::new(vec![7.0], Domain::Box), Err(Error::OutsideDomain(_))));
    assert!(matches!(PointConfig::new(vec![TAU], Domain::Circle), Err(Error::OutsideDomain(_))));
    let c = PointConfig::new(vec![2.0, 0.5, 1.0], Domain::Box).unwrap();
    assert_eq!(c.points, vec![0.5, 1.0, 2.0]);
}
