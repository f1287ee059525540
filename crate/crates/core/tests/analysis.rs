use std::f64::consts::{FRAC_PI_2, PI, TAU};

use fermibox_core::analysis::*;
use fermibox_core::kernels::{
    delta_edge_kernel, ground_state, ground_state_from_spectrum, group_kernel, sine_kernel, BcSource,
};
use fermibox_core::sampling::{haar_unitary_angles, sample_batch};
use fermibox_core::spectral::{solve_spectrum, SolveOptions};
use fermibox_core::*;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

fn preset(name: &str, params: &[f64]) -> BoundaryMatrix {
    make_preset(name, params).unwrap()
}

fn bulk_grid() -> Grid2d {
    Grid2d::square(-2.0, 2.0, 33)
}

fn edge_grid() -> Grid2d {
    Grid2d::square(0.1, 2.0, 33)
}

/// Independent uniform points on the circle with Poisson(`mean`) counts.
fn poisson_samples(mean: f64, count: usize, seed: u64) -> Vec<PointConfig> {
    let mut rng = RngSpec::new(seed, 0).rng();
    let law = Poisson::new(mean).unwrap();
    (0..count)
        .map(|_| {
            let k = law.sample(&mut rng) as usize;
            let pts = (0..k).map(|_| rng.random::<f64>() * TAU).collect();
            PointConfig::new(pts, Domain::Circle).unwrap()
        })
        .collect()
}

// [TRIVIAL]
#[test]
fn log_log_slope_of_a_power_law() {
    let xs = [25.0, 50.0, 100.0, 200.0];
    let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
    assert!((log_log_slope(&xs, &ys) + 1.5).abs() < 1e-12);
    let r = ScalingReport::new(vec![1, 2, 3], vec![0.3, 0.2, 0.1]);
    assert!(r.is_decreasing() && r.is_eventually_decreasing());
    let r = ScalingReport::new(vec![1, 2, 3], vec![0.1, 0.2, 0.1]);
    assert!(!r.is_decreasing() && r.is_eventually_decreasing());
    assert_eq!(r.last(), 0.1);
}

// metric axioms on grid evaluations
#[test]
fn kernel_distance_is_a_metric() {
    let g = Grid2d::square(-1.5, 1.5, 17);
    let a = |x: f64, y: f64| Ok(Complex64::new(sine_kernel(x, y), 0.0));
    let b = |x: f64, y: f64| Ok(Complex64::new(sine_kernel(x, y) * 0.9, 0.1 * (x - y)));
    let c = |x: f64, y: f64| Ok(Complex64::new((x * y).cos(), 0.0));
    let (ab, ba) = (kernel_distance(a, b, &g).unwrap(), kernel_distance(b, a, &g).unwrap());
    assert_eq!(ab, ba);
    let (bc, ac) = (kernel_distance(b, c, &g).unwrap(), kernel_distance(a, c, &g).unwrap());
    assert!(ac.sup <= ab.sup + bc.sup + 1e-15);
    assert!(ac.l2 <= ab.l2 + bc.l2 + 1e-15);
    assert!(ab.sup > 0.0 && ab.l2 <= ab.sup);
    assert_eq!(kernel_distance(a, a, &g).unwrap(), KernelDistance { sup: 0.0, l2: 0.0 });
}

// [DERIVED] generic spectral route vs the closed form, 32×32 grid
#[test]
fn dirichlet_generic_vs_closed_form() {
    let n = 9;
    let s = solve_spectrum(&preset("dirichlet", &[]), SpectrumTarget::Count(n), &SolveOptions::default()).unwrap();
    let generic = ground_state_from_spectrum(&s, n).unwrap();
    let closed = ground_state(&BcSource::preset("dirichlet", &[]), n).unwrap();
    let mut g = Grid2d::square(0.0, TAU, 32);
    g.ys = linspace(0.05, TAU - 0.05, 32);
    let d = kernel_distance(|x, y| generic.eval(x, y), |x, y| closed.eval(x, y), &g).unwrap();
    assert!(d.sup <= 1e-10, "{d:?}");
}

// [PAPER] vanishing coupling returns the sine kernel
#[test]
fn delta_edge_at_zero_coupling_is_sine() {
    let g = edge_grid();
    let d = kernel_distance(
        |x, y| Ok(Complex64::new(sine_kernel(x, y), 0.0)),
        |x, y| delta_edge_kernel(0.0, x, y).map(|v| Complex64::new(v, 0.0)),
        &g,
    )
    .unwrap();
    assert!(d.sup <= 1e-10, "{d:?}");
}

// [TRIVIAL] Dirichlet-kernel convergence
#[test]
fn periodic_bulk_study() {
    let r = bulk_scaling_study(&preset("periodic", &[]), PI, &[25, 101], &bulk_grid()).unwrap();
    assert!(r.distances[1] < r.distances[0], "{r:?}");
    assert!(r.fitted_rate < 0.0);
}

// [DERIVED] frozen thresholds; monotone trend
#[test]
fn dirichlet_and_robin_bulk_studies() {
    let b = baseline();
    let r = bulk_scaling_study(&preset("dirichlet", &[]), PI, &[50, 200], &bulk_grid()).unwrap();
    assert!(r.last() <= b.bulk_threshold, "{r:?}");
    let r = bulk_scaling_study(&preset("robin", &[FRAC_PI_2]), PI, &[25, 50, 100, 200], &bulk_grid()).unwrap();
    assert!(judge(&r, b.bulk_threshold).pass, "{r:?}");
    // pseudo-periodic kernels agree with the sine kernel up to a gauge, seen through |K|
    let r = bulk_scaling_study(&preset("pseudo_periodic", &[0.7]), PI, &[25, 100], &bulk_grid()).unwrap();
    assert!(r.last() <= b.bulk_threshold, "{r:?}");
}

#[test]
fn bulk_study_rejects_bad_input() {
    let p = preset("periodic", &[]);
    assert!(bulk_scaling_study(&p, 0.0, &[10, 20], &bulk_grid()).is_err());
    assert!(bulk_scaling_study(&p, PI, &[20, 10], &bulk_grid()).is_err());
}

// [DERIVED] Bessel⁻ at the Dirichlet edge
#[test]
fn dirichlet_edge_study() {
    let r = edge_scaling_study(&preset("dirichlet", &[]), Edge::Left, &LimitKernel::BesselMinus {}, &[50, 200], &edge_grid())
        .unwrap();
    assert!(r.last() <= 0.02, "{r:?}");
}

// [PAPER] different limits on the left and right of the mixed condition
#[test]
fn dirichlet_robin_edges() {
    let u = preset("dirichlet_robin", &[FRAC_PI_2]);
    let left = expected_edge_limit(&u, Edge::Left).unwrap();
    assert_eq!(left, LimitKernel::BesselMinus {});
    for x in [0.2, 0.7, 1.9] {
        let want = 1.0 - (TAU * x).sin() / (TAU * x);
        assert!((left.value(x, x).unwrap() - want).abs() < 1e-12);
    }
    match expected_edge_limit(&u, Edge::Right).unwrap() {
        LimitKernel::RobinEdge { c } => assert!((c - 1.0).abs() < 1e-15),
        other => panic!("{other:?}"),
    }
    let r = edge_scaling_study(&u, Edge::Left, &left, &[50, 100, 200], &edge_grid()).unwrap();
    assert!(r.is_decreasing() && r.last() <= 0.02, "{r:?}");
}

#[test]
fn mismatched_edge_pairing() {
    let err = edge_scaling_study(&preset("neumann", &[]), Edge::Left, &LimitKernel::BesselMinus {}, &[10], &edge_grid());
    assert!(matches!(err, Err(Error::MismatchedLimit(_))));
    assert!(matches!(expected_edge_limit(&preset("periodic", &[]), Edge::Left), Err(Error::MismatchedLimit(_))));
    assert_eq!(Edge::from_name("2pi").unwrap(), Edge::Right);
    assert!(Edge::from_name("1").is_err());
}

// [DERIVED] finite-temperature bulk limit; [PAPER] Riemann sum of the occupations
#[test]
fn finite_t_bulk() {
    let f = finite_t_bulk_study(1.0, &[25, 50, 100], &bulk_grid()).unwrap();
    assert!(f.report.last() <= 1e-2, "{f:?}");
    assert!((f.riemann[2] - 1.0).abs() <= 1e-3, "{:?}", f.riemann);
    assert!(finite_t_bulk_study(0.0, &[25], &bulk_grid()).is_err());
}

// [TRIVIAL] independence gives ρ₂ = ρ²; unbiased bins give standard-normal z-scores
#[test]
fn poisson_control() {
    let mean = 6.0;
    let samples = poisson_samples(mean, 20_000, 1);
    let rho = mean / TAU;
    let bins = Bins::new(0.0, TAU, 12);
    let pair = estimate_pair_correlation(&samples, &bins).unwrap();
    let z: Vec<f64> = pair.values.iter().zip(&pair.stderr).map(|(v, s)| (v - rho * rho) / s).collect();
    assert!(fraction_exceeding(&z, 3.0) <= 0.02, "{z:?}");
    let dens = estimate_density(&samples, &Bins::new(0.0, TAU, 200)).unwrap();
    let z: Vec<f64> = dens.values.iter().zip(&dens.stderr).map(|(v, s)| (v - rho) / s).collect();
    let ad = anderson_darling_normal(&z);
    assert!(ad < 3.857, "A² = {ad}");
}

// [TRIVIAL] estimator invariants and error cases
#[test]
fn estimator_invariants() {
    let samples = poisson_samples(3.0, 1000, 2);
    let bins = Bins::new(0.0, TAU, 10);
    let e = estimate_density(&samples, &bins).unwrap();
    assert!(e.values.iter().all(|v| v.is_finite()) && e.stderr.iter().all(|s| *s >= 0.0));
    assert!(e.grid[0].windows(2).all(|w| w[0] < w[1]));
    let mean_count = samples.iter().map(|s| s.len()).sum::<usize>() as f64 / samples.len() as f64;
    assert!((e.values.iter().sum::<f64>() * bins.width() - mean_count).abs() < 1e-10);
    assert!(matches!(estimate_density(&[], &bins), Err(Error::EmptySamples)));
    assert!(estimate_density(&samples[..50], &bins).is_err());
    assert!(estimate_density(&samples, &Bins::new(0.0, TAU, 3)).is_err());
    assert!(estimate_pair_correlation(&samples[..999], &bins).is_err());
}

// [DERIVED] determinant oracle for U(7); [TRIVIAL] repulsion on the diagonal
#[test]
fn cue_pair_correlation() {
    let samples = sample_batch(10_000, &RngSpec::new(3, 0), |r| haar_unitary_angles(7, r)).unwrap();
    let bins = Bins::new(0.0, TAU, 16);
    let q = |x: f64, y: f64| group_kernel(GroupKind::U, 7, x, y).unwrap();
    let expected = expected_pair_counts(|x, y| q(x, x) * q(y, y) - q(x, y).powi(2), &bins);
    let z = z_scores(&pair_counts(&samples, &bins), &expected);
    assert!(fraction_exceeding(&z, 3.0) < 0.01, "{z:?}");
    let est = estimate_pair_correlation(&samples, &bins).unwrap();
    let rho2 = (7.0 / TAU).powi(2);
    for p in 0..bins.n {
        assert!(est.values[bins.pair_index(p, p)] < 0.35 * rho2);
    }
}

// the two-sample test does not separate a process from itself
#[test]
fn two_sample_tests_accept_equal_laws() {
    let a = poisson_samples(4.0, 3000, 3);
    let b = poisson_samples(4.0, 3000, 4);
    let bins = Bins::new(0.0, TAU, 6);
    let t = hotelling_two_sample(&density_counts(&a, &bins), &density_counts(&b, &bins)).unwrap();
    assert!(t.p_value > 0.01, "{t:?}");
    let c = poisson_samples(4.6, 3000, 5);
    let t = hotelling_two_sample(&density_counts(&a, &bins), &density_counts(&c, &bins)).unwrap();
    assert!(t.p_value < 1e-3, "{t:?}");
    let z = z_scores_two_sample(&density_counts(&a, &bins), &density_counts(&b, &bins));
    assert!(z.iter().all(|v| v.abs() < 4.0));
}

// [DERIVED] reference values of the χ² tail and KS statistic
#[test]
fn test_statistic_examples() {
    assert!((chi2_sf(3.841_458_820_694_124, 1) - 0.05).abs() < 1e-9);
    assert!((chi2_sf(23.209_251_158_954_356, 10) - 0.01).abs() < 1e-9);
    assert_eq!(ks_statistic(&[0.5], |x| x), 0.5);
    assert_eq!(total_variation(&[0.5, 0.5], &[1.0]), 0.5);
    assert_eq!(empirical_pmf(&[0, 2, 2, 1]), vec![0.25, 0.25, 0.5]);
}

#[test]
fn baseline_is_consistent() {
    let b = baseline();
    assert_eq!(b.bulk_threshold, 0.02);
    assert_eq!(b.finite_t_threshold, 1e-2);
    for r in &b.recorded {
        assert_eq!(r.sizes.len(), r.distances.len());
        assert!(r.sizes.windows(2).all(|w| w[0] < w[1]));
        assert!(r.distances.iter().all(|d| *d > 0.0));
    }
    let v = judge(&ScalingReport::new(vec![1, 2], vec![0.05, 0.01]), 0.02);
    assert!(v.pass);
    let v = judge(&ScalingReport::new(vec![1, 2], vec![0.01, 0.015]), 0.02);
    assert!(!v.decreasing && v.within_threshold && !v.pass);
    // round-off level distances are converged whatever their order
    let v = judge(&ScalingReport::new(vec![1, 2, 3], vec![0.1, 4e-15, 9e-15]), 0.02);
    assert!(v.pass);
}
