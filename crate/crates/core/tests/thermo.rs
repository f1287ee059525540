use std::f64::consts::PI;

use fermibox_core::spectral::{solve_spectrum, SolveOptions};
use fermibox_core::thermo::*;
use fermibox_core::*;

/// Frozen output of the quadrature-plus-bisection λ solve at c = 1.
const LAMBDA_AT_C1: f64 = 3.411_431_154_335_281;

/// `Σ_{k≥1} (−λ)^k/√k` for `0 < λ ≤ 1` by the Cohen–Rodriguez Villegas–Zagier acceleration.
fn alternating_series(lambda: f64) -> f64 {
    let n = 60;
    let mut d = (3.0 + 8f64.sqrt()).powi(n);
    d = (d + 1.0 / d) / 2.0;
    let (mut b, mut c, mut s) = (-1.0, -d, 0.0);
    for k in 0..n {
        c = b - c;
        s += c * lambda.powi(k + 1) / ((k + 1) as f64).sqrt();
        let kf = k as f64;
        let nf = n as f64;
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    // s/d sums Σ(−1)^k a_k with a_k = λ^{k+1}/√(k+1), i.e. −Li_{1/2}(−λ)
    -s / d
}

/// `−(1/√π) ∫_ℝ du / (λ⁻¹ e^{u²} + 1)` by the trapezoidal rule, exponentially accurate for this
/// analytic integrand.
fn trapezoid(lambda: f64) -> f64 {
    let h = 0.02;
    let half = ((lambda.ln().max(0.0) + 80.0).sqrt() / h).ceil() as i64;
    let s: f64 = (-half..=half)
        .map(|i| {
            let u = i as f64 * h;
            let g = u * u - lambda.ln();
            if g > 0.0 {
                let w = (-g).exp();
                w / (1.0 + w)
            } else {
                1.0 / (1.0 + g.exp())
            }
        })
        .sum();
    -s * h / PI.sqrt()
}

// [TRIVIAL]
#[test]
fn fermi_factor_examples() {
    assert_eq!(fermi_factor(0.7, 3.0, 3.0), 0.5);
    let v = fermi_factor(1.0, 0.0, 100.0);
    assert!(v.is_finite() && (v / (-100f64).exp() - 1.0).abs() < 1e-12);
    let mut prev = 1.0;
    for e in (0..200).map(|i| i as f64 * 0.1 - 5.0) {
        let f = fermi_factor(0.5, 2.0, e);
        assert!(f <= prev);
        prev = f;
    }
}

// [PAPER] large-T asymptotics; [DERIVED] closed-shell gap at low T
#[test]
fn solve_mu_periodic_limits() {
    let periodic = make_preset("periodic", &[]).unwrap();
    let n = 5usize;
    let target = (2 * n + 1) as f64;
    // at T → 0 every μ strictly inside the gap (N², (N+1)²) meets the constraint to round-off
    let m = solve_mu(&periodic, 1e-3, target, 1e-12).unwrap();
    assert!(m.mu > (n * n) as f64 && m.mu < ((n + 1) * (n + 1)) as f64, "{}", m.mu);
    assert!(m.residual.abs() <= 1e-12);
    let t = 1e6;
    let m = solve_mu(&periodic, t, target, 1e-10).unwrap();
    let want = t * (target / (PI * t).sqrt()).ln();
    assert!(((m.mu - want) / t).abs() < 5e-3, "{} vs {want}", m.mu);
}

// [DERIVED] the residual is the oracle
#[test]
fn solve_mu_dirichlet_residual() {
    let levels: Vec<f64> = (1..4000).map(|k| (k * k) as f64 / 4.0).collect();
    for (t, n) in [(0.01, 3.0), (1.0, 7.0), (50.0, 12.5), (1000.0, 4.0)] {
        let m = solve_mu(levels.as_slice(), t, n, 1e-11).unwrap();
        let sum: f64 = levels.iter().map(|&e| fermi_factor(t, m.mu, e)).sum();
        assert!((sum - n).abs() <= 1e-9, "T={t} n={n}: {sum}");
    }
    let dirichlet = make_preset("dirichlet", &[]).unwrap();
    let m = solve_mu(&dirichlet, 2.0, 6.0, 1e-11).unwrap();
    assert!(m.residual.abs() <= 1e-9);
}

#[test]
fn solve_mu_rejects_bad_input() {
    let levels = [0.0, 1.0, 4.0];
    assert!(solve_mu(levels.as_slice(), 0.0, 1.0, 1e-9).is_err());
    assert!(solve_mu(levels.as_slice(), 1.0, -1.0, 1e-9).is_err());
}

// [TRIVIAL] leading term; [DERIVED] η(1/2) by the accelerated series
#[test]
fn polylog_examples() {
    let l = 1e-7;
    assert!((polylog_half(l) + l).abs() < 1e-13);
    assert!((polylog_half(1.0) + 0.604_898_643_421_630_3).abs() < 1e-12);
    let mut prev = 0.0;
    for l in [1e-3, 0.1, 1.0, 10.0, 1e3] {
        let v = polylog_half(l);
        assert!(v < prev);
        prev = v;
    }
}

// [DERIVED] two independent oracles over λ ∈ [1e−3, 1e3]
#[test]
fn polylog_matches_oracles() {
    for i in 0..=24 {
        let lambda = 10f64.powf(-3.0 + 0.25 * i as f64);
        let v = polylog_half(lambda);
        let oracle = if lambda <= 1.0 { alternating_series(lambda) } else { trapezoid(lambda) };
        assert!((v - oracle).abs() <= 1e-10, "λ={lambda}: {v} vs {oracle}");
        assert!((trapezoid(lambda) - v).abs() <= 1e-10);
    }
}

// [TRIVIAL] round trip and small-λ regime; [DERIVED] frozen value at c = 1
#[test]
fn solve_lambda_examples() {
    for c in [0.1, 1.0, 10.0, 300.0] {
        let s = solve_lambda(c).unwrap();
        assert!((polylog_half(s.lambda) + 2.0 / (PI * c).sqrt()).abs() <= 1e-10);
    }
    let c = 1e8;
    let l = solve_lambda(c).unwrap().lambda;
    assert!((l / (2.0 / (PI * c).sqrt()) - 1.0).abs() < 1e-3);
    assert!((solve_lambda(1.0).unwrap().lambda - LAMBDA_AT_C1).abs() < 1e-9);
    assert!(solve_lambda(0.0).is_err());
}

// [TRIVIAL]
#[test]
fn mode_probability_examples() {
    let s = solve_spectrum(&make_preset("dirichlet", &[]).unwrap(), SpectrumTarget::Cutoff(400.0), &SolveOptions::default())
        .unwrap();
    let mp = mode_probabilities(&s, 1e-4, 3.1);
    for (p, m) in mp.p.iter().zip(&s.modes) {
        let want = if m.energy < 3.1 { 1.0 } else { 0.0 };
        assert!((p - want).abs() < 1e-12);
    }
    let mu = solve_mu(&s, 2.0, 5.0, 1e-12).unwrap().mu;
    let mp = mode_probabilities(&s, 2.0, mu);
    assert!((mp.total() - 5.0).abs() < 1e-9);
    assert!(mp.tail_bound < 1e-12);
    assert!(mp.p.iter().all(|&p| p > 0.0 && p < 1.0));
}
