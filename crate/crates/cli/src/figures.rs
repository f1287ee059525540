//! Plot-ready data for the Dirichlet–Robin ground-state density and the finite-temperature
//! two-point function.

use std::f64::consts::{PI, TAU};

use fermibox_core::analysis::{expected_edge_limit, linspace, mean_and_stderr, separation_counts, Bins, Edge};
use fermibox_core::kernels::{finite_t, ground_state, BcSource};
use fermibox_core::quad::integrate_split;
use fermibox_core::sampling::{sample_batch, GrandCanonicalSampler};
use fermibox_core::spectral::{solve_spectrum, SolveOptions};
use fermibox_core::thermo::{cutoff_energy, polylog_half};
use fermibox_core::{Kernel, LimitKernel, RngSpec, SpectrumTarget};
use serde_json::{json, Map, Value};

use crate::output::{num, Emit, Format, Table};
use crate::{Failure, Figure, FigureArgs};

/// Particles in the density figure.
pub const DENSITY_N: usize = 7;
/// Robin angle at the right wall of the density figure.
pub const DENSITY_ALPHA: f64 = PI / 2.0;
/// Points on [0, 2π] for the density curves.
const DENSITY_POINTS: usize = 401;

/// Bulk particle scale and fugacity of the two-point figure.
pub const TWO_POINT_N: usize = 10;
pub const TWO_POINT_LAMBDA: f64 = 10.0;
/// Rescaled separations `s ∈ (0, S_MAX]` in units of the mean spacing.
const S_MAX: f64 = 3.0;
const S_BINS: usize = 30;

pub fn reproduce(a: &FigureArgs, seed: u64) -> Result<Emit, Failure> {
    match a.which {
        Figure::DirichletRobinDensity => density_figure(),
        Figure::FiniteTTwoPoint => two_point_figure(a.samples, seed),
    }
}

/// Ground-state density of `N` fermions with Dirichlet at 0 and Robin at 2π, with the
/// hard-edge limits drawn in box coordinates near each wall.
fn density_figure() -> Result<Emit, Failure> {
    let n = DENSITY_N;
    let nf = n as f64;
    let source = BcSource::preset("dirichlet_robin", &[DENSITY_ALPHA]);
    let bc = source.boundary_matrix()?;
    let k = ground_state(&source, n)?;
    let left = expected_edge_limit(&bc, Edge::Left)?;
    let right = expected_edge_limit(&bc, Edge::Right)?;
    // with the coupling held fixed the right wall looks Neumann on the scale 2π/N
    let right_fixed = LimitKernel::BesselPlus {};
    let scale = nf / TAU;
    let xs = linspace(0.0, TAU, DENSITY_POINTS);
    let mut curves: Vec<(String, Vec<f64>)> = vec![
        ("finite_n".into(), xs.iter().map(|&x| Ok(k.eval(x, x)?.re)).collect::<fermibox_core::Result<_>>()?),
        (
            format!("{}_left", limit_name(&left)),
            xs.iter().map(|&x| Ok(scale * left.value(scale * x, scale * x)?)).collect::<fermibox_core::Result<_>>()?,
        ),
    ];
    for (name, lim) in [(limit_name(&right), right), ("bessel_plus".to_string(), right_fixed)] {
        let ys = xs
            .iter()
            .map(|&x| {
                let s = scale * (TAU - x).max(0.0);
                Ok(scale * lim.value(s, s)?)
            })
            .collect::<fermibox_core::Result<_>>()?;
        curves.push((format!("{name}_right"), ys));
    }
    let mut table = Table::new(&["curve", "x", "density"]);
    table.notes.push(format!("N = {n}; Dirichlet at x = 0; Robin angle {DENSITY_ALPHA:?} at x = 2pi"));
    table.notes.push("edge curves: (N/2pi) K(s, s) with s the rescaled distance to the wall".into());
    let mut json_curves = Map::new();
    for (name, ys) in &curves {
        for (x, y) in xs.iter().zip(ys) {
            table.push([name.clone(), num(*x), num(*y)]);
        }
        json_curves.insert(name.clone(), json!({ "x": xs, "density": ys }));
    }
    let json = json!({
        "n": n,
        "bc": bc,
        "left_limit": left,
        "right_limit": right,
        "right_limit_fixed_coupling": right_fixed,
        "curves": json_curves,
    });
    Ok(Emit { json, table, default: Format::Csv })
}

fn limit_name(l: &LimitKernel) -> String {
    match l {
        LimitKernel::Sine {} => "sine",
        LimitKernel::BesselPlus {} => "bessel_plus",
        LimitKernel::BesselMinus {} => "bessel_minus",
        LimitKernel::RobinEdge { .. } => "robin_edge",
        LimitKernel::DeltaEdge { .. } => "delta_edge",
        LimitKernel::FiniteTSine { .. } => "finite_t_sine",
    }
    .to_string()
}

/// `c` with `Li_{1/2}(−λ) = −2/√(πc)`.
pub fn coupling_for_lambda(lambda: f64) -> f64 {
    let l = polylog_half(lambda);
    4.0 / (PI * l * l)
}

fn bin_mean(f: impl Fn(f64) -> f64, a: f64, b: f64) -> fermibox_core::Result<f64> {
    Ok(integrate_split(f, a, b, 1e-12, 4)? / (b - a))
}

/// `R(s) = 1 − |K(0,s)|²/K(0,0)²` for the periodic gas at `T = cN²`, `λ = 10`: exact
/// finite-N values, a grand-canonical estimate with standard errors, and the limit curves.
fn two_point_figure(samples: usize, seed: u64) -> Result<Emit, Failure> {
    if samples < 2 {
        return Err(Failure::Usage("--samples must be at least 2".into()));
    }
    let nf = TWO_POINT_N as f64;
    let lambda = TWO_POINT_LAMBDA;
    let c = coupling_for_lambda(lambda);
    let t = c * nf * nf;
    let mu = t * lambda.ln();
    let source = BcSource::preset("periodic", &[]);
    let exact_k = finite_t(&source, t, mu, 1e-15)?;
    let limit = LimitKernel::FiniteTSine { c, lambda };
    let spacing = PI / nf;
    let k00 = exact_k.eval(PI, PI)?.re;
    let l00 = limit.value(0.0, 0.0)?;
    let exact = |s: f64| 1.0 - (exact_k.eval(PI, PI + spacing * s).map_or(f64::NAN, |z| z.norm()) / k00).powi(2);
    let limit_r = |s: f64| 1.0 - (limit.value(0.0, s).unwrap_or(f64::NAN) / l00).powi(2);
    let sine_r = |s: f64| 1.0 - fermibox_core::kernels::sine_kernel(0.0, s).powi(2);

    let bc = source.boundary_matrix()?;
    let spectrum = solve_spectrum(&bc, SpectrumTarget::Cutoff(cutoff_energy(t, mu, 1e-14)), &SolveOptions::default())?;
    let sampler = GrandCanonicalSampler::new(&spectrum, t, mu)?;
    let configs = sample_batch(samples, &RngSpec::new(seed, 0), |r| sampler.sample(r))?;
    let bins = Bins::new(0.0, spacing * S_MAX, S_BINS);
    let (mean, se) = mean_and_stderr(&separation_counts(&configs, &bins));
    // ordered pairs at separation d per configuration: 2π ∫_bin ρ₂(d) dd, with ρ₁ = Σp/2π
    let rho1 = exact_k.trace() / TAU;
    let norm = TAU * bins.width() * rho1 * rho1;

    let mut table = Table::new(&[
        "s",
        "s_lo",
        "s_hi",
        "empirical",
        "stderr",
        "exact_bin_mean",
        "finite_t_sine_bin_mean",
        "exact",
        "finite_t_sine",
        "sine",
    ]);
    table.notes.push(format!(
        "N = {TWO_POINT_N}; lambda = {lambda:?}; c = {c:?}; T = {t:?}; mu = {mu:?}; samples = {samples}"
    ));
    table.notes.push("s: separation in units of pi/N; R(s) = 1 - |K(0,s)|^2 / K(0,0)^2".into());
    let ds = S_MAX / S_BINS as f64;
    let mut rows = Vec::with_capacity(S_BINS);
    for i in 0..S_BINS {
        let (lo, hi) = (i as f64 * ds, (i + 1) as f64 * ds);
        let s = 0.5 * (lo + hi);
        let emp = mean[i] / norm;
        let err = se[i] / norm;
        let exact_mean = bin_mean(exact, lo, hi)?;
        let limit_mean = bin_mean(limit_r, lo, hi)?;
        let vals = [s, lo, hi, emp, err, exact_mean, limit_mean, exact(s), limit_r(s), sine_r(s)];
        table.push(vals.iter().map(|&v| num(v)));
        rows.push(json!({
            "s": s, "s_lo": lo, "s_hi": hi, "empirical": emp, "stderr": err,
            "exact_bin_mean": exact_mean, "finite_t_sine_bin_mean": limit_mean,
            "exact": exact(s), "finite_t_sine": limit_r(s), "sine": sine_r(s),
        }));
    }
    let json = json!({
        "n": TWO_POINT_N,
        "lambda": lambda,
        "c": c,
        "t": t,
        "mu": mu,
        "mean_count": exact_k.trace(),
        "samples": samples,
        "limit": limit,
        "rows": Value::Array(rows),
    });
    Ok(Emit { json, table, default: Format::Csv })
}
