//! Empirical correlation estimators, statistical comparisons, kernel distances and
//! the bulk, edge and finite-temperature scaling studies.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::boundary::{BoundaryMatrix, Preset};
use crate::error::{Error, Result};
use crate::kernels::{finite_t, finite_t_sine_kernel, sinc, BcSource, LimitKernel};
use crate::quad::GaussLegendre;
use crate::sampling::PointConfig;
use crate::spectral::{solve_spectrum, EigenMode, SolveOptions, SpectrumTarget};
use crate::thermo::solve_lambda;

/// `n` equally spaced points from `a` to `b` inclusive (`[a]` when `n = 1`).
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Tensor grid of evaluation points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2d {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Grid2d {
    pub fn square(a: f64, b: f64, n: usize) -> Self {
        let v = linspace(a, b, n);
        Grid2d { xs: v.clone(), ys: v }
    }

    /// Parses `"x0:x1:n,y0:y1:m"`.
    pub fn parse(s: &str) -> Result<Self> {
        let axis = |p: &str| -> Result<Vec<f64>> {
            let f: Vec<&str> = p.split(':').collect();
            if f.len() != 3 {
                return Err(Error::InvalidParameter(format!("grid axis {p:?} is not a:b:n")));
            }
            let bad = |_| Error::InvalidParameter(format!("grid axis {p:?} is not a:b:n"));
            let a: f64 = f[0].trim().parse().map_err(bad)?;
            let b: f64 = f[1].trim().parse().map_err(bad)?;
            let n: usize = f[2].trim().parse().map_err(|_| Error::InvalidParameter(format!("bad count in {p:?}")))?;
            if n == 0 || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidParameter(format!("grid axis {p:?} is empty or non-finite")));
            }
            Ok(linspace(a, b, n))
        };
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::InvalidParameter(format!("grid {s:?} needs two axes")));
        }
        Ok(Grid2d { xs: axis(parts[0])?, ys: axis(parts[1])? })
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.xs.iter().flat_map(|&x| self.ys.iter().map(move |&y| (x, y))).collect()
    }
}

/// Sup and root-mean-square distances between two kernels on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelDistance {
    pub sup: f64,
    pub l2: f64,
}

fn distance_with<A, B, P>(ka: A, kb: B, grid: &Grid2d, project: P) -> Result<KernelDistance>
where
    A: Fn(f64, f64) -> Result<Complex64> + Sync,
    B: Fn(f64, f64) -> Result<Complex64> + Sync,
    P: Fn(Complex64) -> Complex64 + Sync,
{
    let diffs: Vec<f64> = grid
        .points()
        .par_iter()
        .map(|&(x, y)| Ok((project(ka(x, y)?) - project(kb(x, y)?)).norm()))
        .collect::<Result<_>>()?;
    if diffs.is_empty() {
        return Ok(KernelDistance { sup: 0.0, l2: 0.0 });
    }
    let sup = diffs.iter().cloned().fold(0.0, f64::max);
    let l2 = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
    Ok(KernelDistance { sup, l2 })
}

/// Distances between `ka` and `kb` as computed.
pub fn kernel_distance<A, B>(ka: A, kb: B, grid: &Grid2d) -> Result<KernelDistance>
where
    A: Fn(f64, f64) -> Result<Complex64> + Sync,
    B: Fn(f64, f64) -> Result<Complex64> + Sync,
{
    distance_with(ka, kb, grid, |z| z)
}

/// Distances between `|ka|` and `|kb|`, invariant under unimodular gauges `f(x) K f(y)⁻¹`.
pub fn kernel_distance_abs<A, B>(ka: A, kb: B, grid: &Grid2d) -> Result<KernelDistance>
where
    A: Fn(f64, f64) -> Result<Complex64> + Sync,
    B: Fn(f64, f64) -> Result<Complex64> + Sync,
{
    distance_with(ka, kb, grid, |z| Complex64::new(z.norm(), 0.0))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Convergence evidence: distance to the limit kernel per size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub sizes: Vec<usize>,
    pub distances: Vec<f64>,
    /// Log-log slope of distance against size.
    pub fitted_rate: f64,
}

impl ScalingReport {
    pub fn new(sizes: Vec<usize>, distances: Vec<f64>) -> Self {
        let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
        let fitted_rate = log_log_slope(&xs, &distances);
        ScalingReport { sizes, distances, fitted_rate }
    }

    /// Distances strictly decrease with size.
    pub fn is_decreasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }

    /// Strictly decreasing except where both neighbours are at or below `floor`.
    pub fn is_decreasing_above(&self, floor: f64) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0] || w[0].max(w[1]) <= floor)
    }

    /// Strictly decreasing after the smallest size.
    pub fn is_eventually_decreasing(&self) -> bool {
        self.distances.len() < 3 || self.distances[1..].windows(2).all(|w| w[1] < w[0])
    }

    pub fn last(&self) -> f64 {
        *self.distances.last().unwrap_or(&f64::NAN)
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("sizes must be positive and strictly increasing: {sizes:?}")));
    }
    Ok(())
}

/// `K(x, y) = Σ ψ̄_k(x) ψ_k(y)` over `modes`.
fn projection(modes: &[EigenMode], x: f64, y: f64) -> Complex64 {
    modes.iter().map(|m| m.value(x).conj() * m.value(y)).sum()
}

fn is_gauge_ambiguous(bc: &BoundaryMatrix) -> bool {
    matches!(bc.preset(), Some(Preset::PseudoPeriodic { .. }))
}

/// Distance of `(2π/N) K_N(x₀ + 2πx/N, x₀ + 2πy/N)` to the sine kernel for each size.
pub fn bulk_scaling_study(bc: &BoundaryMatrix, x0: f64, sizes: &[usize], grid: &Grid2d) -> Result<ScalingReport> {
    check_sizes(sizes)?;
    if !(x0 > 0.0 && x0 < TAU) {
        return Err(Error::InvalidParameter(format!("bulk point must lie in (0, 2π), got {x0}")));
    }
    let nmax = *sizes.last().unwrap();
    let s = solve_spectrum(bc, SpectrumTarget::Count(nmax), &SolveOptions::default())?;
    let gauge = is_gauge_ambiguous(bc);
    let distances = sizes
        .iter()
        .map(|&n| {
            let modes = &s.modes[..n];
            let scale = TAU / n as f64;
            let k = |x: f64, y: f64| -> Result<Complex64> {
                let (u, v) = (x0 + scale * x, x0 + scale * y);
                for p in [u, v] {
                    if !(0.0..=TAU).contains(&p) {
                        return Err(Error::OutsideDomain(p));
                    }
                }
                Ok(projection(modes, u, v) * scale)
            };
            let sine = |x: f64, y: f64| Ok(Complex64::new(sinc(x - y), 0.0));
            let d = if gauge { kernel_distance_abs(k, sine, grid)? } else { kernel_distance(k, sine, grid)? };
            Ok(d.sup)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ScalingReport::new(sizes.to_vec(), distances))
}

/// Endpoint of the box at which an edge study zooms in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Edge {
    /// x₀ = 0.
    Left,
    /// x₀ = 2π.
    Right,
}

impl Edge {
    pub fn from_name(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "0" | "left" => Ok(Edge::Left),
            "2pi" | "2π" | "right" => Ok(Edge::Right),
            _ => Err(Error::InvalidParameter(format!("edge must be 0 or 2pi, got {s:?}"))),
        }
    }
}

/// The limit kernel a boundary condition leads to at an edge (coupling held fixed).
pub fn expected_edge_limit(bc: &BoundaryMatrix, edge: Edge) -> Result<LimitKernel> {
    let p = bc
        .preset()
        .ok_or_else(|| Error::MismatchedLimit("edge limits are only catalogued for named presets".into()))?;
    let robin = |alpha: f64| LimitKernel::RobinEdge { c: (alpha / 2.0).tan() };
    Ok(match (p, edge) {
        (Preset::Dirichlet, _) => LimitKernel::BesselMinus {},
        (Preset::Neumann, _) => LimitKernel::BesselPlus {},
        (Preset::Zaremba, Edge::Left) => LimitKernel::BesselPlus {},
        (Preset::Zaremba, Edge::Right) => LimitKernel::BesselMinus {},
        (Preset::Robin { alpha }, _) if alpha > 0.0 && alpha < PI => robin(alpha),
        (Preset::Delta { c }, _) if c >= 0.0 => LimitKernel::DeltaEdge { c },
        (Preset::DirichletRobin { .. }, Edge::Left) => LimitKernel::BesselMinus {},
        (Preset::DirichletRobin { alpha }, Edge::Right) if alpha > 0.0 && alpha < PI => robin(alpha),
        (p, e) => return Err(Error::MismatchedLimit(format!("no edge limit catalogued for {} at {e:?}", p.name()))),
    })
}

fn same_limit(a: &LimitKernel, b: &LimitKernel) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0);
    match (a, b) {
        (LimitKernel::RobinEdge { c: x }, LimitKernel::RobinEdge { c: y }) => close(*x, *y),
        (LimitKernel::DeltaEdge { c: x }, LimitKernel::DeltaEdge { c: y }) => close(*x, *y),
        _ => std::mem::discriminant(a) == std::mem::discriminant(b),
    }
}

/// Distance of the rescaled edge kernel `(2π/N) K_N(e(x), e(y))`, with `e(x) = 2πx/N` at the
/// left edge and `2π − 2πx/N` at the right edge, to `limit`.
pub fn edge_scaling_study(
    bc: &BoundaryMatrix,
    edge: Edge,
    limit: &LimitKernel,
    sizes: &[usize],
    grid: &Grid2d,
) -> Result<ScalingReport> {
    check_sizes(sizes)?;
    let expected = expected_edge_limit(bc, edge)?;
    if !same_limit(&expected, limit) {
        return Err(Error::MismatchedLimit(format!("{limit:?} does not match {expected:?} at {edge:?}")));
    }
    edge_scaling_distances(bc, edge, limit, sizes, grid)
}

/// As [`edge_scaling_study`] without the pairing check.
pub fn edge_scaling_distances(
    bc: &BoundaryMatrix,
    edge: Edge,
    limit: &LimitKernel,
    sizes: &[usize],
    grid: &Grid2d,
) -> Result<ScalingReport> {
    check_sizes(sizes)?;
    let nmax = *sizes.last().unwrap();
    let s = solve_spectrum(bc, SpectrumTarget::Count(nmax), &SolveOptions::default())?;
    // the limit kernel does not depend on N
    let pts = grid.points();
    let lim: Vec<f64> = pts.par_iter().map(|&(x, y)| limit.value(x, y)).collect::<Result<_>>()?;
    let distances = sizes
        .iter()
        .map(|&n| {
            let modes = &s.modes[..n];
            let scale = TAU / n as f64;
            let chart = |x: f64| match edge {
                Edge::Left => scale * x,
                Edge::Right => TAU - scale * x,
            };
            let sup = pts
                .par_iter()
                .zip(&lim)
                .map(|(&(x, y), &l)| {
                    let (u, v) = (chart(x), chart(y));
                    if !(0.0..=TAU).contains(&u) || !(0.0..=TAU).contains(&v) {
                        return Err(Error::OutsideDomain(u));
                    }
                    Ok((projection(modes, u, v) * scale - l).norm())
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(sup)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ScalingReport::new(sizes.to_vec(), distances))
}

/// Bulk finite-temperature study with its λ and Riemann-sum checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteTReport {
    pub c: f64,
    pub lambda: f64,
    pub report: ScalingReport,
    /// `(1/2N) Σ_k p_k` per size.
    pub riemann: Vec<f64>,
}

/// For each N: `T = cN²`, `μ = cN² ln λ`, distance of `(π/N) K_CUE(π + πx/N, π + πy/N)`
/// to the finite-temperature sine kernel.
pub fn finite_t_bulk_study(c: f64, sizes: &[usize], grid: &Grid2d) -> Result<FiniteTReport> {
    check_sizes(sizes)?;
    let lambda = solve_lambda(c)?.lambda;
    let pts = grid.points();
    let lim: Vec<f64> = pts.par_iter().map(|&(x, y)| finite_t_sine_kernel(c, lambda, x, y)).collect::<Result<_>>()?;
    let mut distances = Vec::with_capacity(sizes.len());
    let mut riemann = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let nf = n as f64;
        let t = c * nf * nf;
        let mu = t * lambda.ln();
        let k = finite_t(&BcSource::preset("periodic", &[]), t, mu, 1e-15)?;
        riemann.push(k.trace() / (2.0 * nf));
        let scale = PI / nf;
        let sup = pts
            .par_iter()
            .zip(&lim)
            .map(|(&(x, y), &l)| Ok((k_eval(&k, PI + scale * x, PI + scale * y)? * scale - l).norm()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        distances.push(sup);
    }
    Ok(FiniteTReport { c, lambda, report: ScalingReport::new(sizes.to_vec(), distances), riemann })
}

fn k_eval(k: &dyn crate::kernels::Kernel, x: f64, y: f64) -> Result<Complex64> {
    k.eval(x, y)
}

// ---------------------------------------------------------------------------
// Binning and estimators

/// Equal-width bins on `[a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Bins {
    pub fn new(a: f64, b: f64, n: usize) -> Self {
        Bins { a, b, n }
    }

    pub fn width(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    /// Bin of `x`; the right end point joins the last bin.
    pub fn index(&self, x: f64) -> Option<usize> {
        if x < self.a || x > self.b {
            return None;
        }
        Some((((x - self.a) / self.width()) as usize).min(self.n - 1))
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.a + (i as f64 + 0.5) * self.width()).collect()
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        let lo = self.a + i as f64 * self.width();
        (lo, lo + self.width())
    }

    /// Number of unordered bin pairs `p ≤ q`.
    pub fn n_pairs(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    /// Index of the unordered pair `(p, q)`.
    pub fn pair_index(&self, p: usize, q: usize) -> usize {
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        p * self.n - p * (p + 1) / 2 + q
    }
}

/// Binned correlation function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    /// Bin centres per axis: one axis for densities, two for pair correlations.
    pub grid: Vec<Vec<f64>>,
    /// Estimates; pair correlations list the unordered bins `p ≤ q` row by row.
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_samples: usize,
}

/// Per-sample counts of points in each bin.
pub fn density_counts(samples: &[PointConfig], bins: &Bins) -> Vec<Vec<f64>> {
    samples
        .par_iter()
        .map(|s| {
            let mut c = vec![0.0; bins.n];
            for &x in &s.points {
                if let Some(i) = bins.index(x) {
                    c[i] += 1.0;
                }
            }
            c
        })
        .collect()
}

/// Per-sample counts of unordered point pairs in each unordered bin pair.
pub fn pair_counts(samples: &[PointConfig], bins: &Bins) -> Vec<Vec<f64>> {
    samples
        .par_iter()
        .map(|s| {
            let mut c = vec![0.0; bins.n_pairs()];
            let idx: Vec<Option<usize>> = s.points.iter().map(|&x| bins.index(x)).collect();
            for i in 0..idx.len() {
                for j in i + 1..idx.len() {
                    if let (Some(p), Some(q)) = (idx[i], idx[j]) {
                        c[bins.pair_index(p, q)] += 1.0;
                    }
                }
            }
            c
        })
        .collect()
}

/// Per-sample counts of ordered pairs by circular separation `(x_j − x_i) mod 2π`.
pub fn separation_counts(samples: &[PointConfig], bins: &Bins) -> Vec<Vec<f64>> {
    samples
        .par_iter()
        .map(|s| {
            let mut c = vec![0.0; bins.n];
            for (i, &x) in s.points.iter().enumerate() {
                for (j, &y) in s.points.iter().enumerate() {
                    if i != j {
                        if let Some(k) = bins.index((y - x).rem_euclid(TAU)) {
                            c[k] += 1.0;
                        }
                    }
                }
            }
            c
        })
        .collect()
}

/// Column means and standard errors of the mean.
pub fn mean_and_stderr(counts: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let m = counts.len() as f64;
    let d = counts.first().map_or(0, |c| c.len());
    let mut mean = vec![0.0; d];
    for c in counts {
        for (a, v) in mean.iter_mut().zip(c) {
            *a += v / m;
        }
    }
    let mut var = vec![0.0; d];
    for c in counts {
        for ((s, v), mu) in var.iter_mut().zip(c).zip(&mean) {
            *s += (v - mu).powi(2);
        }
    }
    let se = var.iter().map(|s| (s / (m - 1.0).max(1.0) / m).sqrt()).collect();
    (mean, se)
}

fn check_samples(samples: &[PointConfig], min: usize) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if samples.len() < min {
        return Err(Error::InvalidParameter(format!("need at least {min} samples, got {}", samples.len())));
    }
    Ok(())
}

/// Histogram estimate of ρ₁ with standard errors; integrates to the mean count.
pub fn estimate_density(samples: &[PointConfig], bins: &Bins) -> Result<CorrelationEstimate> {
    check_samples(samples, 100)?;
    if bins.n < 4 {
        return Err(Error::InvalidParameter("density estimate needs at least 4 bins".into()));
    }
    let (mean, se) = mean_and_stderr(&density_counts(samples, bins));
    let w = bins.width();
    Ok(CorrelationEstimate {
        grid: vec![bins.centers()],
        values: mean.iter().map(|v| v / w).collect(),
        stderr: se.iter().map(|v| v / w).collect(),
        n_samples: samples.len(),
    })
}

/// Binned estimate of ρ₂ on unordered bin pairs `p ≤ q`.
pub fn estimate_pair_correlation(samples: &[PointConfig], bins: &Bins) -> Result<CorrelationEstimate> {
    check_samples(samples, 1000)?;
    let (mean, se) = mean_and_stderr(&pair_counts(samples, bins));
    let area = bins.width() * bins.width();
    // an off-diagonal unordered bin collects ∫∫ρ₂ over one square; a diagonal bin half of it
    let factor: Vec<f64> = (0..bins.n)
        .flat_map(|p| (p..bins.n).map(move |q| if p == q { 2.0 } else { 1.0 }))
        .collect();
    Ok(CorrelationEstimate {
        grid: vec![bins.centers(), bins.centers()],
        values: mean.iter().zip(&factor).map(|(v, f)| v * f / area).collect(),
        stderr: se.iter().zip(&factor).map(|(v, f)| v * f / area).collect(),
        n_samples: samples.len(),
    })
}

/// Expected per-sample count in each bin for the one-point function `rho1`.
pub fn expected_density_counts<F: Fn(f64) -> f64>(rho1: F, bins: &Bins) -> Vec<f64> {
    let gl = GaussLegendre::new(8);
    (0..bins.n)
        .map(|i| {
            let (a, b) = bins.edges(i);
            gl.integrate(a, b, &rho1)
        })
        .collect()
}

/// Expected per-sample count of unordered pairs in each bin pair for the two-point function `rho2`.
pub fn expected_pair_counts<F: Fn(f64, f64) -> f64 + Sync>(rho2: F, bins: &Bins) -> Vec<f64> {
    let gl = GaussLegendre::new(6);
    let pairs: Vec<(usize, usize)> = (0..bins.n).flat_map(|p| (p..bins.n).map(move |q| (p, q))).collect();
    pairs
        .par_iter()
        .map(|&(p, q)| {
            let (xa, xb) = bins.edges(p);
            let (ya, yb) = bins.edges(q);
            let v = gl.integrate(xa, xb, |x| gl.integrate(ya, yb, |y| rho2(x, y)));
            if p == q {
                0.5 * v
            } else {
                v
            }
        })
        .collect()
}

/// Expected per-sample count of ordered pairs by circular separation for a translation-invariant
/// process with two-point function `rho2(d)`.
pub fn expected_separation_counts<F: Fn(f64) -> f64>(rho2: F, bins: &Bins) -> Vec<f64> {
    expected_density_counts(|d| TAU * rho2(d), bins)
}

/// Outcome of a χ²-type test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquare {
    fn from_stat(statistic: f64, dof: usize) -> Self {
        let p_value = if dof == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN)
        };
        ChiSquare { statistic, dof, p_value }
    }
}

/// Upper-tail probability of χ²(dof).
pub fn chi2_sf(statistic: f64, dof: usize) -> f64 {
    ChiSquare::from_stat(statistic, dof).p_value
}

/// `dᵀ S⁺ d` with the pseudo-inverse of a symmetric PSD matrix, and its rank.
fn quadratic_pinv(d: &DVector<f64>, s: &DMatrix<f64>) -> (f64, usize) {
    let eig = s.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cut = top * 1e-10;
    let mut q = 0.0;
    let mut rank = 0;
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > cut {
            let proj = eig.eigenvectors.column(i).dot(d);
            q += proj * proj / l;
            rank += 1;
        }
    }
    (q, rank)
}

fn covariance(counts: &[Vec<f64>], mean: &[f64]) -> DMatrix<f64> {
    let d = mean.len();
    let m = counts.len() as f64;
    let mut s = DMatrix::zeros(d, d);
    for c in counts {
        let v = DVector::from_iterator(d, c.iter().zip(mean).map(|(a, b)| a - b));
        s.ger(1.0, &v, &v, 1.0);
    }
    s / (m - 1.0).max(1.0)
}

/// Hotelling-type test that per-sample count vectors have mean `expected`.
///
/// Uses the empirical covariance (pseudo-inverted, so fixed totals are handled);
/// the statistic is asymptotically χ² with the covariance rank as degrees of freedom.
pub fn hotelling_one_sample(counts: &[Vec<f64>], expected: &[f64]) -> Result<ChiSquare> {
    if counts.is_empty() {
        return Err(Error::EmptySamples);
    }
    let (mean, _) = mean_and_stderr(counts);
    let s = covariance(counts, &mean) / counts.len() as f64;
    let d = DVector::from_iterator(mean.len(), mean.iter().zip(expected).map(|(a, b)| a - b));
    let (q, rank) = quadratic_pinv(&d, &s);
    Ok(ChiSquare::from_stat(q, rank))
}

/// Hotelling-type test that two independent sets of count vectors share a mean.
pub fn hotelling_two_sample(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<ChiSquare> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySamples);
    }
    let (ma, _) = mean_and_stderr(a);
    let (mb, _) = mean_and_stderr(b);
    let s = covariance(a, &ma) / a.len() as f64 + covariance(b, &mb) / b.len() as f64;
    let d = DVector::from_iterator(ma.len(), ma.iter().zip(&mb).map(|(x, y)| x - y));
    let (q, rank) = quadratic_pinv(&d, &s);
    Ok(ChiSquare::from_stat(q, rank))
}

/// Per-bin z-scores of the mean counts against `expected`, using empirical standard errors.
///
/// Bins whose samples never vary take the Poisson floor `√(expected/M)` so that a bin that is
/// empty in every sample but expected to be occupied still registers.
pub fn z_scores(counts: &[Vec<f64>], expected: &[f64]) -> Vec<f64> {
    let m = counts.len() as f64;
    let (mean, se) = mean_and_stderr(counts);
    mean.iter()
        .zip(&se)
        .zip(expected)
        .map(|((mu, s), e)| {
            let s = s.max((e.max(0.0) / m).sqrt()).max(1e-300);
            (mu - e) / s
        })
        .collect()
}

/// Per-bin two-sample z-scores.
pub fn z_scores_two_sample(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    let (ma, sa) = mean_and_stderr(a);
    let (mb, sb) = mean_and_stderr(b);
    ma.iter()
        .zip(&mb)
        .zip(sa.iter().zip(&sb))
        .map(|((x, y), (s, t))| {
            let se = (s * s + t * t).sqrt();
            if se > 0.0 {
                (x - y) / se
            } else if x == y {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

/// Fraction of z-scores with `|z| > threshold`.
pub fn fraction_exceeding(z: &[f64], threshold: f64) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    z.iter().filter(|v| v.abs() > threshold).count() as f64 / z.len() as f64
}

/// Total-variation distance between two pmfs (missing entries count as zero).
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n).map(|i| (p.get(i).unwrap_or(&0.0) - q.get(i).unwrap_or(&0.0)).abs()).sum::<f64>()
}

/// Empirical pmf of integer observations.
pub fn empirical_pmf(values: &[usize]) -> Vec<f64> {
    let n = values.iter().cloned().max().map_or(0, |m| m + 1);
    let mut pmf = vec![0.0; n];
    for &v in values {
        pmf[v] += 1.0 / values.len() as f64;
    }
    pmf
}

/// Kolmogorov–Smirnov statistic of `data` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> f64 {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 99% critical value of the KS statistic for `n` observations.
pub fn ks_critical_99(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Anderson–Darling statistic of `z` against the standard normal.
pub fn anderson_darling_normal(z: &[f64]) -> f64 {
    let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("unit normal");
    let mut v = z.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let s: f64 = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let fi = normal.cdf(x).clamp(1e-300, 1.0 - 1e-16);
            let fj = normal.cdf(v[v.len() - 1 - i]).clamp(1e-300, 1.0 - 1e-16);
            (2.0 * i as f64 + 1.0) * (fi.ln() + (1.0 - fj).ln())
        })
        .sum();
    -n - s / n
}

// ---------------------------------------------------------------------------
// Baseline

/// Pinned acceptance thresholds and the distances of the convergence run that fixed them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub bulk_threshold: f64,
    pub edge_threshold: f64,
    pub finite_t_threshold: f64,
    pub riemann_tolerance: f64,
    pub recorded: Vec<RecordedStudy>,
}

/// Distances recorded during the convergence run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordedStudy {
    pub study: String,
    pub case: String,
    pub sizes: Vec<usize>,
    pub distances: Vec<f64>,
}

/// The committed baseline.
pub fn baseline() -> Baseline {
    serde_json::from_str(include_str!("../baseline.json")).expect("committed baseline parses")
}

/// Verdict of a study against the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineVerdict {
    pub threshold: f64,
    pub decreasing: bool,
    pub within_threshold: bool,
    pub pass: bool,
}

/// Distances at or below this are round-off; their ordering carries no information.
pub const NOISE_FLOOR: f64 = 1e-10;

/// A study passes when its distances decrease down to [`NOISE_FLOOR`] and the largest size
/// meets `threshold`.
pub fn judge(report: &ScalingReport, threshold: f64) -> BaselineVerdict {
    let decreasing = report.is_decreasing_above(NOISE_FLOOR);
    let within_threshold = report.last() <= threshold;
    BaselineVerdict { threshold, decreasing, within_threshold, pass: decreasing && within_threshold }
}
