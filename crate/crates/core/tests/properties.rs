use std::f64::consts::{PI, TAU};

use fermibox_core::boundary::validate;
use fermibox_core::heatflow::{km_log_density, theta3, HeatFamily, LoopEnsembleParams, THETA_EPS};
use fermibox_core::kernels::{finite_t_from_spectrum, ground_state_from_spectrum, group_kernel};
use fermibox_core::quad::integrate_split;
use fermibox_core::sampling::count_distribution;
use fermibox_core::spectral::{solve_spectrum, SolveOptions};
use fermibox_core::thermo::{fermi_factor, solve_mu};
use fermibox_core::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

/// General element of U(2) from three angles and a global phase.
fn u2(a: f64, b: f64, c: f64, phase: f64) -> BoundaryMatrix {
    let g = Complex64::from_polar(1.0, phase);
    let (s, co) = a.sin_cos();
    let e1 = Complex64::from_polar(1.0, b);
    let e2 = Complex64::from_polar(1.0, c);
    BoundaryMatrix::from_entries([g * e1 * co, g * e2 * s, -g * e2.conj() * s, g * e1.conj() * co])
}

fn angle() -> impl Strategy<Value = f64> {
    0.0..TAU
}

fn spectrum(u: &BoundaryMatrix, n: usize) -> Spectrum {
    solve_spectrum(u, SpectrumTarget::Count(n), &SolveOptions::default()).unwrap()
}

/// `∫₀^{2π} f` by adaptive Gauss–Kronrod; bound states can be sharply peaked at the walls.
fn integrate(f: impl Fn(f64) -> f64) -> f64 {
    integrate_split(f, 0.0, TAU, 1e-11, 32).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    // every preset is unitary for every parameter
    #[test]
    fn presets_are_unitary(alpha in 1e-6f64..TAU - 1e-6, c in -50.0f64..50.0) {
        for name in Preset::NAMES.iter() {
            let params: &[f64] = match *name {
                "periodic" | "dirichlet" | "neumann" | "zaremba" => &[],
                "delta" => std::slice::from_ref(&c),
                _ => std::slice::from_ref(&alpha),
            };
            let u = make_preset(name, params).unwrap();
            prop_assert!(validate(&u).is_ok(), "{name}");
        }
    }

    // K(x,y) = conj K(y,x) and the Gram matrix of K on any points is positive semidefinite
    #[test]
    fn ground_kernel_is_hermitian_psd(a in angle(), b in angle(), c in angle(), ph in angle(),
                                      n in 1usize..8, xs in prop::collection::vec(0.0..TAU, 2..7)) {
        let s = spectrum(&u2(a, b, c, ph), n);
        let k = ground_state_from_spectrum(&s, n).unwrap();
        let m = xs.len();
        let g = DMatrix::from_fn(m, m, |i, j| k.eval(xs[i], xs[j]).unwrap());
        for i in 0..m {
            for j in 0..m {
                prop_assert!((g[(i, j)] - g[(j, i)].conj()).norm() < 1e-10);
            }
        }
        let herm = DMatrix::from_fn(2 * m, 2 * m, |i, j| {
            // real embedding [[Re, −Im], [Im, Re]] has the same spectrum, doubled
            let z = g[(i % m, j % m)];
            match (i < m, j < m) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let low = herm.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(low > -1e-9, "{low}");
    }

    // ∫K(x,x) = N and ∫K(x,z)K(z,y) dz = K(x,y)
    #[test]
    fn ground_kernel_trace_and_idempotence(a in angle(), b in angle(), c in angle(), ph in angle(),
                                           n in 1usize..6, x in 0.0..TAU, y in 0.0..TAU) {
        let s = spectrum(&u2(a, b, c, ph), n);
        let k = ground_state_from_spectrum(&s, n).unwrap();
        let tr = integrate(|z| k.eval(z, z).unwrap().re);
        prop_assert!((tr - n as f64).abs() < 1e-8, "{tr}");
        let re = integrate(|z| (k.eval(x, z).unwrap() * k.eval(z, y).unwrap()).re);
        let im = integrate(|z| (k.eval(x, z).unwrap() * k.eval(z, y).unwrap()).im);
        prop_assert!((Complex64::new(re, im) - k.eval(x, y).unwrap()).norm() < 1e-8);
    }

    // finite-temperature kernels are contractions: 0 ≤ K ≤ 1 as operators, trace Σp_k
    #[test]
    fn finite_t_kernel_bounds(a in angle(), ph in angle(), t in 0.2f64..20.0, mu in -2.0f64..30.0,
                              xs in prop::collection::vec(0.0..TAU, 2..6)) {
        let u = u2(a, 0.3, 1.1, ph);
        let e = fermibox_core::thermo::cutoff_energy(t, mu, 1e-14);
        let s = solve_spectrum(&u, SpectrumTarget::Cutoff(e), &SolveOptions::default()).unwrap();
        let k = finite_t_from_spectrum(&s, t, mu, 1e-14).unwrap();
        let m = xs.len();
        let g = DMatrix::from_fn(m, m, |i, j| k.eval(xs[i], xs[j]).unwrap());
        for i in 0..m {
            prop_assert!(g[(i, i)].re >= -1e-12 && g[(i, i)].im.abs() < 1e-10);
            for j in 0..m {
                prop_assert!((g[(i, j)] - g[(j, i)].conj()).norm() < 1e-10);
            }
        }
        let tr = integrate(|z| k.eval(z, z).unwrap().re);
        let p_sum: f64 = s.modes.iter().map(|md| fermi_factor(t, mu, md.energy)).sum();
        prop_assert!((tr - p_sum).abs() < 1e-7 * p_sum.max(1.0), "{tr} vs {p_sum}");
    }

    // F(μ − E) + F(E − μ) = 1
    #[test]
    fn fermi_complementarity(t in 1e-3f64..1e3, mu in -100.0f64..100.0, e in -100.0f64..100.0) {
        let f = fermi_factor(t, mu, e);
        let g = fermi_factor(t, e, mu);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f + g - 1.0).abs() < 1e-15);
    }

    // solve_mu inverts μ ↦ Σ F(E_k)
    #[test]
    fn solve_mu_inverts_the_count(t in 0.05f64..50.0, mu in -3.0f64..60.0) {
        let levels: Vec<f64> = (1..3000).map(|k| (k * k) as f64 / 4.0).collect();
        let n: f64 = levels.iter().map(|&e| fermi_factor(t, mu, e)).sum();
        prop_assume!(n > 1e-3);
        let got = solve_mu(levels.as_slice(), t, n, 1e-12).unwrap();
        let sum: f64 = levels.iter().map(|&e| fermi_factor(t, got.mu, e)).sum();
        prop_assert!((sum - n).abs() < 1e-9 * n.max(1.0));
        // μ is determined where the count is not flat
        let slope: f64 = levels.iter().map(|&e| { let f = fermi_factor(t, mu, e); f * (1.0 - f) / t }).sum();
        if slope > 1e-3 {
            prop_assert!((got.mu - mu).abs() < 1e-6 * mu.abs().max(1.0) / slope.min(1.0), "{} vs {mu}", got.mu);
        }
    }

    // the Poisson-binomial law is a pmf with mean Σp
    #[test]
    fn count_distribution_is_a_pmf(p in prop::collection::vec(0.0f64..=1.0, 0..40)) {
        let d = count_distribution(&p);
        prop_assert_eq!(d.len(), p.len() + 1);
        prop_assert!(d.iter().all(|&q| q >= -1e-15));
        prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mean: f64 = d.iter().enumerate().map(|(k, q)| k as f64 * q).sum();
        prop_assert!((mean - p.iter().sum::<f64>()).abs() < 1e-10);
    }

    // Karlin–McGregor densities are symmetric under permutations of the points
    #[test]
    fn km_permutation_invariance(fam in 0usize..4, t in 0.1f64..10.0,
                                 pts in prop::collection::btree_set(0u32..10_000, 5), seed in any::<u64>()) {
        let family = [HeatFamily::A, HeatFamily::B, HeatFamily::C, HeatFamily::D][fam];
        let len = if family == HeatFamily::A { TAU } else { PI };
        let xs: Vec<f64> = pts.iter().map(|&i| (i as f64 + 0.5) * len / 10_000.0).collect();
        let mut ys = xs.clone();
        let mut r = seed;
        for i in (1..ys.len()).rev() {
            r = r.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ys.swap(i, (r >> 33) as usize % (i + 1));
        }
        let p = LoopEnsembleParams::new(family, t, 5).unwrap();
        let (a, b) = (km_log_density(&p, &xs).unwrap(), km_log_density(&p, &ys).unwrap());
        prop_assert!((a.log_abs - b.log_abs).abs() <= 1e-12 * a.log_abs.abs().max(1.0));
        if family == HeatFamily::A {
            prop_assert_eq!(a.sign, 1.0);
        }
    }

    // theta is even and 1-periodic in z
    #[test]
    fn theta_symmetries(z in -3.0f64..3.0, t in 0.02f64..30.0) {
        let v = theta3(z, t, THETA_EPS);
        prop_assert!((v - theta3(-z, t, THETA_EPS)).abs() < 1e-12 * v.abs().max(1.0));
        prop_assert!((v - theta3(z + 1.0, t, THETA_EPS)).abs() < 1e-12 * v.abs().max(1.0));
        prop_assert!(v > 0.0);
    }

    // group kernels are symmetric and reproduce their dimension
    #[test]
    fn group_kernels_symmetric(g in 0usize..4, n in 1usize..9, x in 0.01f64..3.1, y in 0.01f64..3.1) {
        let kind = [GroupKind::U, GroupKind::SoOdd, GroupKind::SoEven, GroupKind::Sp][g];
        let a = group_kernel(kind, n, x, y).unwrap();
        let b = group_kernel(kind, n, y, x).unwrap();
        prop_assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }
}
