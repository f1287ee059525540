//! Jacobi theta sums, the heat kernels of the four loop families, Karlin–McGregor
//! determinant densities, and a Metropolis sampler for them.
//!
//! With `s = t/2`, `f(d) = Σ_{k∈ℤ} e^{−k²s} cos kd` and `g(d)` the same sum over `k ∈ ℤ+½`:
//! `p^A = f(x−y)`, `p^B = ½[g(x−y) − g(x+y)]`, `p^C = ½[f(x−y) − f(x+y)]`, `p^D = ½[f(x−y) + f(x+y)]`.
//! Dividing `p^A` by 2π and `p^B, p^C, p^D` by π gives transition densities.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    density_counts, expected_density_counts, expected_pair_counts, fraction_exceeding, mean_and_stderr,
    pair_counts, z_scores, Bins,
};
use crate::boundary::make_preset;
use crate::error::{Error, Result};
use crate::kernels::{finite_t, BcSource, Domain, Kernel};
use crate::sampling::{sample_batch, GrandCanonicalSampler, PointConfig, RngSpec};
use crate::spectral::{solve_spectrum, SolveOptions, SpectrumTarget};
use crate::thermo::cutoff_energy;

/// Default absolute tolerance of theta sums.
pub const THETA_EPS: f64 = 1e-15;
/// Below this time the Gaussian-image representation is used.
const IMAGE_SWITCH: f64 = 1.0;
/// Karlin–McGregor features are kept while `ln(weight) ≥` this bound.
const LOG_WEIGHT_FLOOR: f64 = -1380.0;

/// Loop families, named after the root systems of the corresponding groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeatFamily {
    /// U(2n+1), periodic on [0, 2π).
    A,
    /// SO(2n+1), half-integer sine modes on [0, π).
    B,
    /// Sp(2n), absorbing walls on [0, π).
    C,
    /// SO(2n), reflecting walls on [0, π).
    D,
}

impl HeatFamily {
    pub fn domain(&self) -> Domain {
        match self {
            HeatFamily::A => Domain::Circle,
            _ => Domain::HalfCircle,
        }
    }

    /// Factor turning the displayed kernel into a transition density.
    pub fn normalization(&self) -> f64 {
        match self {
            HeatFamily::A => 1.0 / TAU,
            _ => 1.0 / PI,
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(HeatFamily::A),
            "B" | "b" => Ok(HeatFamily::B),
            "C" | "c" => Ok(HeatFamily::C),
            "D" | "d" => Ok(HeatFamily::D),
            _ => Err(Error::InvalidParameter(format!("unknown heat-kernel family {s:?}"))),
        }
    }
}

/// `Σ_{k ∈ ℤ + shift} e^{−k²s} cos(kd)` by direct summation.
fn lattice_series(d: f64, s: f64, half: bool, eps: f64) -> f64 {
    let kmax = ((4.0 / eps).ln() / s).sqrt().ceil() as usize + 2;
    let off = if half { 0.5 } else { 0.0 };
    let mut acc = if half { 0.0 } else { 1.0 };
    for j in (if half { 0 } else { 1 })..=kmax {
        let k = j as f64 + off;
        acc += 2.0 * (-k * k * s).exp() * (k * d).cos();
    }
    acc
}

/// The same sum through Poisson summation: `√(π/s) Σ_m (±1)^m e^{−(d−2πm)²/(4s)}`.
fn lattice_images(d: f64, s: f64, half: bool, eps: f64) -> f64 {
    let pref = (PI / s).sqrt();
    let reach = (4.0 * s * (pref.max(1.0) * 4.0 / eps).ln()).sqrt();
    let m0 = (d / TAU).round() as i64;
    let span = (reach / TAU).ceil() as i64 + 1;
    let mut acc = 0.0;
    for m in (m0 - span)..=(m0 + span) {
        let r = d - TAU * m as f64;
        let sign = if half && m.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        acc += sign * (-r * r / (4.0 * s)).exp();
    }
    pref * acc
}

fn lattice_sum(d: f64, s: f64, half: bool, eps: f64) -> f64 {
    if 2.0 * s >= IMAGE_SWITCH {
        lattice_series(d, s, half, eps)
    } else {
        lattice_images(d, s, half, eps)
    }
}

/// `Θ(z, it/π) = Σ_k e^{−k²t} e^{2πikz}` (real for real `z`).
pub fn theta3(z: f64, t: f64, eps: f64) -> f64 {
    assert!(t > 0.0, "theta3 needs t > 0");
    if t >= IMAGE_SWITCH {
        theta3_series(z, t, eps)
    } else {
        theta3_images(z, t, eps)
    }
}

/// Lattice-sum representation of [`theta3`].
pub fn theta3_series(z: f64, t: f64, eps: f64) -> f64 {
    lattice_series(TAU * z, t, false, eps)
}

/// Gaussian-image representation of [`theta3`]: `√(π/t) Σ_m e^{−π²(z−m)²/t}`.
pub fn theta3_images(z: f64, t: f64, eps: f64) -> f64 {
    lattice_images(TAU * z, t, false, eps)
}

/// Heat kernel of one loop family at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelSpec {
    pub family: HeatFamily,
    pub t: f64,
    pub eps: f64,
}

impl HeatKernelSpec {
    pub fn new(family: HeatFamily, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("heat kernel needs t > 0, got {t}")));
        }
        Ok(HeatKernelSpec { family, t, eps: THETA_EPS })
    }

    fn raw(&self, x: f64, y: f64) -> f64 {
        let s = self.t / 2.0;
        let f = |d: f64| lattice_sum(d, s, false, self.eps);
        let g = |d: f64| lattice_sum(d, s, true, self.eps);
        match self.family {
            HeatFamily::A => f(x - y),
            HeatFamily::B => 0.5 * (g(x - y) - g(x + y)),
            HeatFamily::C => 0.5 * (f(x - y) - f(x + y)),
            HeatFamily::D => 0.5 * (f(x - y) + f(x + y)),
        }
    }

    /// Transition density (the kernel times [`HeatFamily::normalization`]).
    pub fn transition_density(&self, x: f64, y: f64) -> Result<f64> {
        Ok(heat_kernel(self, x, y)? * self.family.normalization())
    }
}

/// The displayed series `Σ_k e^{−k²t/2} (modes)` of the family.
pub fn heat_kernel(spec: &HeatKernelSpec, x: f64, y: f64) -> Result<f64> {
    let d = spec.family.domain();
    for v in [x, y] {
        if !d.contains(v) {
            return Err(Error::OutsideDomain(v));
        }
    }
    Ok(spec.raw(x, y))
}

impl Kernel for HeatKernelSpec {
    fn eval(&self, x: f64, y: f64) -> Result<Complex64> {
        heat_kernel(self, x, y).map(|v| Complex64::new(v, 0.0))
    }
    fn domain(&self) -> Domain {
        self.family.domain()
    }
}

/// Free-particle propagator on the circle: `(1/2π) Σ_k e^{−k²t + ik(x−y)}`.
///
/// Its time convention is `e^{−k²t}`, twice as fast as the family-A loop kernel.
pub fn propagator(t: f64, x: f64, y: f64) -> f64 {
    theta3((x - y) / TAU, t, THETA_EPS) / TAU
}

/// Parameters of a non-intersecting loop ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopEnsembleParams {
    pub family: HeatFamily,
    pub t: f64,
    pub n_points: usize,
}

impl LoopEnsembleParams {
    /// Family A only admits an odd number of loops.
    pub fn new(family: HeatFamily, t: f64, n_points: usize) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("loop ensemble needs t > 0, got {t}")));
        }
        if n_points == 0 {
            return Err(Error::InvalidParameter("loop ensemble needs at least one point".into()));
        }
        if family == HeatFamily::A && n_points % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "family A needs an odd number of loops, got {n_points}"
            )));
        }
        Ok(LoopEnsembleParams { family, t, n_points })
    }

    pub fn kernel(&self) -> HeatKernelSpec {
        HeatKernelSpec { family: self.family, t: self.t, eps: THETA_EPS }
    }
}

/// `log|det|` and sign of a Karlin–McGregor matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDet {
    pub log_abs: f64,
    pub sign: f64,
}

/// Weighted real features `(√w_k φ_k(x))` with `p(x,y) = Σ_k w_k φ_k(x) φ_k(y)`, heaviest first.
///
/// Harmonics come from powers of `e^{ix}` (or `e^{ix/2}`), accurate to `O(k ε)`.
fn km_features(spec: &HeatKernelSpec, xs: &[f64]) -> Vec<Vec<f64>> {
    let s = spec.t / 2.0;
    let kmax = (-LOG_WEIGHT_FLOOR / s).sqrt().floor() as usize + 1;
    let half = spec.family == HeatFamily::B;
    let step: Vec<Complex64> =
        xs.iter().map(|&x| Complex64::from_polar(1.0, if half { 0.5 * x } else { x })).collect();
    let step_sq: Vec<Complex64> = step.iter().map(|z| z * z).collect();
    // current harmonic e^{ikx}, starting at k = ½ for family B and k = 0 otherwise
    let mut phase: Vec<Complex64> = if half { step.clone() } else { vec![Complex64::new(1.0, 0.0); xs.len()] };
    let advance = |phase: &mut Vec<Complex64>| {
        let by = if half { &step_sq } else { &step };
        for (p, z) in phase.iter_mut().zip(by) {
            *p *= z;
        }
    };
    let mut rows = Vec::new();
    let ln2 = 2f64.ln();
    let row = |r: f64, phase: &[Complex64], part: fn(&Complex64) -> f64| phase.iter().map(|z| r * part(z)).collect();
    let re = |z: &Complex64| z.re;
    let im = |z: &Complex64| z.im;
    match spec.family {
        HeatFamily::A | HeatFamily::D => {
            rows.push(vec![1.0; xs.len()]);
            for k in 1..=kmax {
                advance(&mut phase);
                let lw = ln2 - (k * k) as f64 * s;
                if lw < LOG_WEIGHT_FLOOR {
                    break;
                }
                let r = (0.5 * lw).exp();
                rows.push(row(r, &phase, re));
                if spec.family == HeatFamily::A {
                    rows.push(row(r, &phase, im));
                }
            }
        }
        HeatFamily::B | HeatFamily::C => {
            for k in 0..=kmax {
                let kf = if half { k as f64 + 0.5 } else { (k + 1) as f64 };
                if !half {
                    advance(&mut phase);
                }
                let lw = ln2 - kf * kf * s;
                if lw < LOG_WEIGHT_FLOOR {
                    break;
                }
                rows.push(row((0.5 * lw).exp(), &phase, im));
                if half {
                    advance(&mut phase);
                }
            }
        }
    }
    rows
}

/// `log det(FᵀF)` for the `m × n` matrix with the given rows, by Householder QR with column pivoting.
fn log_det_gram(rows: &[Vec<f64>], n: usize) -> f64 {
    let m = rows.len();
    if m < n {
        return f64::NEG_INFINITY;
    }
    // column-major copy
    let mut a: Vec<Vec<f64>> = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let mut log_det = 0.0;
    for k in 0..n {
        // pivot on the largest remaining column norm
        let (piv, _) = (k..n)
            .map(|j| (j, a[j][k..].iter().map(|v| v * v).sum::<f64>()))
            .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        a.swap(k, piv);
        let col = &a[k][k..];
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return f64::NEG_INFINITY;
        }
        let alpha = if col[0] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = col.to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        log_det += 2.0 * alpha.abs().ln();
        if vnorm2 > 0.0 {
            for j in k + 1..n {
                let dot: f64 = v.iter().zip(&a[j][k..]).map(|(p, q)| p * q).sum();
                let f = 2.0 * dot / vnorm2;
                for (aij, vi) in a[j][k..].iter_mut().zip(&v) {
                    *aij -= f * vi;
                }
            }
        }
    }
    log_det
}

fn check_config(params: &LoopEnsembleParams, points: &[f64]) -> Result<()> {
    if points.len() != params.n_points {
        return Err(Error::InvalidConfig(format!(
            "configuration has {} points, ensemble has {}",
            points.len(),
            params.n_points
        )));
    }
    let d = params.family.domain();
    if let Some(&x) = points.iter().find(|&&x| !d.contains(x)) {
        return Err(Error::OutsideDomain(x));
    }
    Ok(())
}

/// Log of the unnormalized density `det[p_t(x_i, x_j)]`.
///
/// The matrix is the Gram matrix of weighted mode features, so the determinant is computed
/// as `∏ r_ii²` from a pivoted QR of the features; this keeps full relative accuracy when
/// the kernel is numerically low-rank (large `t`). Permuting the points leaves it unchanged.
pub fn km_log_density(params: &LoopEnsembleParams, points: &[f64]) -> Result<LogDet> {
    check_config(params, points)?;
    // repeated points give repeated rows, so the determinant vanishes exactly
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::NonPositiveDeterminant { sign: 0.0, log_abs: f64::NEG_INFINITY });
    }
    let rows = km_features(&params.kernel(), points);
    let ld = log_det_gram(&rows, points.len());
    if !ld.is_finite() {
        return Err(Error::NonPositiveDeterminant { sign: 0.0, log_abs: ld });
    }
    Ok(LogDet { log_abs: ld, sign: 1.0 })
}

/// Cross-check of [`km_log_density`] by partially pivoted LU of the kernel matrix itself.
pub fn km_log_density_lu(params: &LoopEnsembleParams, points: &[f64]) -> Result<LogDet> {
    check_config(params, points)?;
    let spec = params.kernel();
    let n = points.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| spec.raw(points[i], points[j]));
    let lu = m.lu();
    let mut sign: f64 = lu.p().determinant();
    let mut log_abs = 0.0;
    let u = lu.u();
    for i in 0..n {
        let d = u[(i, i)];
        sign *= d.signum();
        log_abs += d.abs().ln();
    }
    if !(sign > 0.0) || !log_abs.is_finite() {
        return Err(Error::NonPositiveDeterminant { sign, log_abs });
    }
    Ok(LogDet { log_abs, sign })
}

/// Thinned Metropolis chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmChain {
    pub states: Vec<PointConfig>,
    pub acceptance: f64,
    /// Set when the acceptance rate is below 1%.
    pub low_acceptance: bool,
}

/// Single-site Metropolis chain for `det[p_t(x_i,x_j)]`, recording one state per sweep.
///
/// Proposals are Gaussian moves of one point, wrapped on the circle (family A) or reflected
/// at the walls (B, C, D); moves that change the order of the points are rejected.
pub fn km_mcmc(params: &LoopEnsembleParams, steps: usize, step_size: f64, rng: &RngSpec) -> Result<KmChain> {
    if !(step_size > 0.0) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {step_size}")));
    }
    let n = params.n_points;
    let domain = params.family.domain();
    let len = if params.family == HeatFamily::A { TAU } else { PI };
    let mut x: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * len / n as f64).collect();
    let mut ld = km_log_density(params, &x)?.log_abs;
    let mut r = rng.rng();
    let mut accepted = 0usize;
    let mut states = Vec::with_capacity(steps / n + 1);
    for step in 0..steps {
        let i = r.random_range(0..n);
        let delta: f64 = step_size * r.sample::<f64, _>(StandardNormal);
        let proposal = match params.family {
            HeatFamily::A => {
                // the moved point may not pass its cyclic neighbours
                let ok = n == 1 || {
                    let next = x[(i + 1) % n];
                    let prev = x[(i + n - 1) % n];
                    if delta >= 0.0 {
                        (next - x[i]).rem_euclid(TAU) > delta
                    } else {
                        (x[i] - prev).rem_euclid(TAU) > -delta
                    }
                };
                ok.then(|| (x[i] + delta).rem_euclid(TAU)).filter(|v| *v < TAU)
            }
            _ => {
                let mut v = (x[i] + delta).rem_euclid(2.0 * PI);
                if v > PI {
                    v = 2.0 * PI - v;
                }
                let lo = if i == 0 { 0.0 } else { x[i - 1] };
                let hi = if i + 1 == n { PI } else { x[i + 1] };
                (v > lo && v < hi && v < PI).then_some(v)
            }
        };
        if let Some(v) = proposal {
            let mut y = x.clone();
            y[i] = v;
            if let Ok(new) = km_log_density(params, &y) {
                let log_ratio = new.log_abs - ld;
                if log_ratio >= 0.0 || r.random::<f64>() < log_ratio.exp() {
                    x = y;
                    ld = new.log_abs;
                    accepted += 1;
                    if params.family == HeatFamily::A {
                        x.sort_by(f64::total_cmp);
                    }
                }
            }
        }
        if (step + 1) % n == 0 {
            states.push(PointConfig::new(x.clone(), domain)?);
        }
    }
    let acceptance = if steps > 0 { accepted as f64 / steps as f64 } else { 0.0 };
    Ok(KmChain { states, acceptance, low_acceptance: acceptance < 0.01 })
}

/// Grand-canonical sample statistics against the analytic finite-temperature CUE predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureReport {
    pub t: f64,
    pub mu: f64,
    /// Loop-ensemble time `2/T`.
    pub loop_time: f64,
    pub expected_count: f64,
    pub mean_count: f64,
    pub n_samples: usize,
    /// Per-bin z-scores of the one-point counts.
    pub density_z: Vec<f64>,
    /// Per-bin z-scores of unordered pair counts over bins `p ≤ q`.
    pub pair_z: Vec<f64>,
    /// Largest deviation of the binned ρ̂₁ from `Σp_k/2π`.
    pub density_sup: f64,
    /// Largest deviation of the binned ρ̂₂ from the determinantal prediction.
    pub pair_sup: f64,
    /// Fraction of pair bins with `|z| > 3`.
    pub pair_exceed_fraction: f64,
}

/// Samples the grand-canonical process of the periodic box at `(T, μ)` by Bernoulli mode
/// selection and compares its binned one- and two-point functions with those of `K_CUE(T, μ)`.
pub fn gc_mixture_check(
    family: HeatFamily,
    t: f64,
    mu: f64,
    n_bins: usize,
    n_samples: usize,
    rng: &RngSpec,
) -> Result<MixtureReport> {
    if family != HeatFamily::A {
        return Err(Error::InvalidParameter("the grand-canonical mixture is defined for family A only".into()));
    }
    if !(t > 0.0) || !t.is_finite() || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("mixture check needs T > 0 and finite μ (T={t}, μ={mu})")));
    }
    if n_samples < 2 || n_bins < 2 {
        return Err(Error::InvalidParameter("mixture check needs at least 2 samples and 2 bins".into()));
    }
    let bc = make_preset("periodic", &[])?;
    let e_cut = cutoff_energy(t, mu, 1e-14);
    let spectrum = solve_spectrum(&bc, SpectrumTarget::Cutoff(e_cut), &SolveOptions::default())?;
    let sampler = GrandCanonicalSampler::new(&spectrum, t, mu)?;
    let samples = sample_batch(n_samples, rng, |r| sampler.sample(r))?;

    let kernel = finite_t(&BcSource::preset("periodic", &[]), t, mu, 1e-15)?;
    let rho1 = kernel.trace() / TAU;
    let rho2 = |x: f64, y: f64| -> f64 {
        let kxy = kernel.eval(x, y).map(|z| z.norm_sqr()).unwrap_or(f64::NAN);
        rho1 * rho1 - kxy
    };
    let bins = Bins::new(0.0, TAU, n_bins);
    let c1 = density_counts(&samples, &bins);
    let c2 = pair_counts(&samples, &bins);
    let e1 = expected_density_counts(|_| rho1, &bins);
    let e2 = expected_pair_counts(rho2, &bins);
    let (m1, _) = mean_and_stderr(&c1);
    let (m2, _) = mean_and_stderr(&c2);
    let w = bins.width();
    let density_sup = m1.iter().zip(&e1).map(|(a, b)| (a - b).abs() / w).fold(0.0, f64::max);
    let pair_sup = (0..n_bins)
        .flat_map(|p| (p..n_bins).map(move |q| (p, q)))
        .map(|(p, q)| {
            let i = bins.pair_index(p, q);
            let f = if p == q { 2.0 } else { 1.0 };
            (m2[i] - e2[i]).abs() * f / (w * w)
        })
        .fold(0.0, f64::max);
    let pair_z = z_scores(&c2, &e2);
    Ok(MixtureReport {
        t,
        mu,
        loop_time: 2.0 / t,
        expected_count: kernel.trace(),
        mean_count: samples.iter().map(|s| s.len() as f64).sum::<f64>() / n_samples as f64,
        n_samples,
        density_z: z_scores(&c1, &e1),
        pair_exceed_fraction: fraction_exceeding(&pair_z, 3.0),
        pair_z,
        density_sup,
        pair_sup,
    })
}
