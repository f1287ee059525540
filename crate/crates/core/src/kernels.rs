//! Correlation kernels: classical group kernels, fermionic ground-state and
//! finite-temperature kernels, half-line and line projections, and scaling limits.
//!
//! Kernels follow the convention `K(x, y) = Σ_k p_k ψ̄_k(x) ψ_k(y)`, so
//! `K(y, x) = conj(K(x, y))`.

use std::f64::consts::{FRAC_1_PI, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryMatrix, Preset};
use crate::error::{Error, Result};
use crate::heatflow::{HeatFamily, HeatKernelSpec};
use crate::quad;
use crate::spectral::{solve_spectrum, EigenMode, SolveOptions, Spectrum, SpectrumTarget};
use crate::thermo::{self, fermi_factor, LevelSource};

/// Absolute tolerance for every quadrature inside a kernel evaluation.
pub const KERNEL_QUAD_TOL: f64 = 1e-12;
/// Below this argument removable singularities are replaced by their Taylor series.
const SERIES_CUTOFF: f64 = 1e-6;
/// Default truncation tolerance for finite-temperature mode sums.
pub const FINITE_T_EPS: f64 = 1e-14;

/// Where a kernel lives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// [0, 2π), periodic.
    Circle,
    /// [0, 2π] with boundary conditions at both ends.
    Box,
    /// [0, π].
    HalfCircle,
    /// ℝ.
    Line,
    /// [0, ∞).
    HalfLine,
}

impl Domain {
    pub fn contains(&self, x: f64) -> bool {
        match self {
            Domain::Circle => (0.0..TAU).contains(&x),
            Domain::Box => (0.0..=TAU).contains(&x),
            Domain::HalfCircle => (0.0..=PI).contains(&x),
            Domain::Line => x.is_finite(),
            Domain::HalfLine => x >= 0.0 && x.is_finite(),
        }
    }

    /// Bounded interval `[a, b]` for the compact domains.
    pub fn interval(&self) -> Option<(f64, f64)> {
        match self {
            Domain::Circle | Domain::Box => Some((0.0, TAU)),
            Domain::HalfCircle => Some((0.0, PI)),
            _ => None,
        }
    }
}

/// Classical compact groups, indexed by their number of nontrivial eigenangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    /// U(n): n eigenangles on the circle.
    U,
    /// Sp(2n): n angles in [0, π].
    Sp,
    /// SO(2n): n angles in [0, π].
    #[serde(rename = "SO_even")]
    SoEven,
    /// SO(2n+1): n angles in [0, π].
    #[serde(rename = "SO_odd")]
    SoOdd,
}

impl GroupKind {
    pub fn domain(&self) -> Domain {
        match self {
            GroupKind::U => Domain::Circle,
            _ => Domain::HalfCircle,
        }
    }
}

/// Where the one-particle modes of a fermionic kernel come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BcSource {
    /// A named boundary condition; the four classical ones use closed forms.
    Preset {
        name: String,
        #[serde(default)]
        params: Vec<f64>,
    },
    /// An explicit boundary matrix, always routed through the spectral solver.
    Matrix(BoundaryMatrix),
}

impl BcSource {
    pub fn preset(name: &str, params: &[f64]) -> Self {
        BcSource::Preset { name: name.to_string(), params: params.to_vec() }
    }

    pub fn boundary_matrix(&self) -> Result<BoundaryMatrix> {
        match self {
            BcSource::Preset { name, params } => crate::boundary::make_preset(name, params),
            BcSource::Matrix(m) => {
                m.validate()?;
                Ok(m.clone())
            }
        }
    }

    fn classical(&self) -> Result<Option<Classical>> {
        match self {
            BcSource::Preset { name, params } => {
                Ok(Classical::from_preset(&Preset::from_name(name, params)?))
            }
            BcSource::Matrix(_) => Ok(None),
        }
    }
}

/// Scaling-limit kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LimitKernel {
    Sine {},
    BesselPlus {},
    BesselMinus {},
    RobinEdge { c: f64 },
    DeltaEdge { c: f64 },
    FiniteTSine { c: f64, lambda: f64 },
}

/// Tagged description of every kernel in scope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelSpec {
    /// Projection kernel of a classical group with `n` nontrivial eigenangles.
    Group { group: GroupKind, n: usize },
    /// Zero-temperature kernel of the lowest `n` one-particle modes.
    GroundState { source: BcSource, n: usize },
    /// Fermi-weighted kernel at temperature `t` and chemical potential `mu`.
    FiniteT { source: BcSource, t: f64, mu: f64 },
    Limit(LimitKernel),
    /// Heat kernel of one of the four loop families.
    Heat { family: HeatFamily, t: f64 },
}

/// A kernel ready for evaluation.
pub trait Kernel: Send + Sync {
    fn eval(&self, x: f64, y: f64) -> Result<Complex64>;
    fn domain(&self) -> Domain;
}

impl KernelSpec {
    /// Resolves spectra and parameters once so that evaluation is cheap.
    pub fn build(&self) -> Result<Box<dyn Kernel>> {
        Ok(match self {
            KernelSpec::Group { group, n } => {
                if *n == 0 {
                    return Err(Error::InvalidParameter("group kernel needs n ≥ 1".into()));
                }
                Box::new(GroupKernel { group: *group, n: *n })
            }
            KernelSpec::GroundState { source, n } => Box::new(ground_state(source, *n)?),
            KernelSpec::FiniteT { source, t, mu } => Box::new(finite_t(source, *t, *mu, FINITE_T_EPS)?),
            KernelSpec::Limit(l) => {
                l.check()?;
                Box::new(*l)
            }
            KernelSpec::Heat { family, t } => Box::new(HeatKernelSpec::new(*family, *t)?),
        })
    }
}

/// Evaluates `k` on the tensor grid `xs × ys` (row-major in `xs`).
pub fn eval_grid(k: &dyn Kernel, xs: &[f64], ys: &[f64]) -> Result<Vec<Complex64>> {
    xs.par_iter()
        .flat_map_iter(|&x| ys.iter().map(move |&y| k.eval(x, y)))
        .collect()
}

fn check_domain(d: Domain, x: f64, y: f64) -> Result<()> {
    if !d.contains(x) {
        return Err(Error::OutsideDomain(x));
    }
    if !d.contains(y) {
        return Err(Error::OutsideDomain(y));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Group kernels

/// `S_N(z) = sin(Nz/2) / (2π sin(z/2))`, equal to `N/(2π)` at `z ≡ 0 (mod 2π)`.
pub fn dirichlet_sn(n: usize, z: f64) -> f64 {
    let nf = n as f64;
    // Reduce to z = 2πm + d with |d| ≤ π; sin(Nπm + Nd/2)/sin(πm + d/2) = (−1)^{m(N−1)} · ratio(d).
    let m = (z / TAU).round();
    let d = z - TAU * m;
    let sign = if (m as i64 * (n as i64 - 1)).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let ratio = if d.abs() < SERIES_CUTOFF {
        nf * (1.0 - (nf * nf - 1.0) * d * d / 24.0)
    } else {
        (nf * d / 2.0).sin() / (d / 2.0).sin()
    };
    sign * ratio / TAU
}

/// Projection kernel `Q_G` with `n` nontrivial angles.
pub fn group_kernel(g: GroupKind, n: usize, x: f64, y: f64) -> Result<f64> {
    check_domain(g.domain(), x, y)?;
    Ok(group_kernel_unchecked(g, n, x, y))
}

fn group_kernel_unchecked(g: GroupKind, n: usize, x: f64, y: f64) -> f64 {
    match g {
        GroupKind::U => dirichlet_sn(n, x - y),
        GroupKind::Sp => dirichlet_sn(2 * n + 1, x - y) - dirichlet_sn(2 * n + 1, x + y),
        GroupKind::SoEven => {
            dirichlet_sn(2 * n - 1, x - y) + dirichlet_sn(2 * n - 1, x + y)
        }
        GroupKind::SoOdd => dirichlet_sn(2 * n, x - y) - dirichlet_sn(2 * n, x + y),
    }
}

struct GroupKernel {
    group: GroupKind,
    n: usize,
}

impl Kernel for GroupKernel {
    fn eval(&self, x: f64, y: f64) -> Result<Complex64> {
        group_kernel(self.group, self.n, x, y).map(|v| Complex64::new(v, 0.0))
    }
    fn domain(&self) -> Domain {
        self.group.domain()
    }
}

// ---------------------------------------------------------------------------
// Fermionic kernels on [0, 2π]

/// The four boundary conditions whose spectra are explicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classical {
    Periodic,
    Dirichlet,
    Neumann,
    Zaremba,
}

impl Classical {
    pub fn from_preset(p: &Preset) -> Option<Self> {
        match p {
            Preset::Periodic => Some(Classical::Periodic),
            Preset::Dirichlet => Some(Classical::Dirichlet),
            Preset::Neumann => Some(Classical::Neumann),
            Preset::Zaremba => Some(Classical::Zaremba),
            _ => None,
        }
    }

    /// Energy of the `j`-th level (0-based, with multiplicity).
    pub fn energy(&self, j: usize) -> f64 {
        let jf = j as f64;
        match self {
            Classical::Periodic => {
                let k = j.div_ceil(2) as f64;
                k * k
            }
            Classical::Dirichlet => (jf + 1.0).powi(2) / 4.0,
            Classical::Neumann => jf * jf / 4.0,
            Classical::Zaremba => ((2.0 * jf + 1.0) / 4.0).powi(2),
        }
    }

    /// Ground-state kernel of `n` particles through the group dictionary
    /// `K = ½ Q_G(x/2, y/2)` (periodic: `Q_U(n)` for odd `n`).
    ///
    /// Zaremba is Dirichlet at 2π, so its dictionary runs through the reflection
    /// `x ↦ 2π − x`: `½ Q_SO(2n+1)(π − x/2, π − y/2) = ½[S_{2n}((x−y)/2) + S_{2n}((x+y)/2)]`.
    pub fn ground_state(&self, n: usize, x: f64, y: f64) -> f64 {
        match self {
            Classical::Periodic => dirichlet_sn(n, x - y),
            Classical::Dirichlet => 0.5 * group_kernel_unchecked(GroupKind::Sp, n, x / 2.0, y / 2.0),
            Classical::Neumann => 0.5 * group_kernel_unchecked(GroupKind::SoEven, n, x / 2.0, y / 2.0),
            Classical::Zaremba => 0.5 * (dirichlet_sn(2 * n, (x - y) / 2.0) + dirichlet_sn(2 * n, (x + y) / 2.0)),
        }
    }
}

impl LevelSource for Classical {
    fn levels_upto(&self, e: f64) -> Result<Vec<f64>> {
        Ok((0..).map(|j| self.energy(j)).take_while(|&v| v <= e).collect())
    }
}

/// A kernel assembled from explicit modes `Σ w_k ψ̄_k(x) ψ_k(y)`.
#[derive(Debug, Clone)]
pub struct ModeKernel {
    pub modes: Vec<EigenMode>,
    pub weights: Vec<f64>,
}

impl ModeKernel {
    pub fn trace(&self) -> f64 {
        self.weights.iter().sum()
    }
}

impl Kernel for ModeKernel {
    fn eval(&self, x: f64, y: f64) -> Result<Complex64> {
        check_domain(Domain::Box, x, y)?;
        Ok(self
            .modes
            .iter()
            .zip(&self.weights)
            .map(|(m, w)| m.value(x).conj() * m.value(y) * *w)
            .sum())
    }
    fn domain(&self) -> Domain {
        Domain::Box
    }
}

/// Closed-form classical ground-state kernel.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalGround {
    pub bc: Classical,
    pub n: usize,
}

impl Kernel for ClassicalGround {
    fn eval(&self, x: f64, y: f64) -> Result<Complex64> {
        check_domain(Domain::Box, x, y)?;
        Ok(Complex64::new(self.bc.ground_state(self.n, x, y), 0.0))
    }
    fn domain(&self) -> Domain {
        Domain::Box
    }
}

/// Either representation of a ground-state kernel.
pub enum GroundKernel {
    Closed(ClassicalGround),
    Modes(ModeKernel),
}

impl Kernel for GroundKernel {
    fn eval(&self, x: f64, y: f64) -> Result<Complex64> {
        match self {
            GroundKernel::Closed(k) => k.eval(x, y),
            GroundKernel::Modes(k) => k.eval(x, y),
        }
    }
    fn domain(&self) -> Domain {
        Domain::Box
    }
}

/// Projection onto the lowest `n` modes of a solved spectrum.
pub fn ground_state_from_spectrum(s: &Spectrum, n: usize) -> Result<ModeKernel> {
    if s.modes.len() < n {
        return Err(Error::InsufficientSpectrum(format!("need {n} modes, spectrum has {}", s.modes.len())));
    }
    Ok(ModeKernel { modes: s.modes[..n].to_vec(), weights: vec![1.0; n] })
}

/// Ground-state kernel of `n` fermions; closed form for the classical presets
/// (periodic only for odd `n`, where the filled shell is unambiguous).
pub fn ground_state(source: &BcSource, n: usize) -> Result<GroundKernel> {
    if n == 0 {
        return Err(Error::InvalidParameter("ground state needs n ≥ 1".into()));
    }
    match source.classical()? {
        Some(Classical::Periodic) if n % 2 == 0 => {}
        Some(bc) => return Ok(GroundKernel::Closed(ClassicalGround { bc, n })),
        None => {}
    }
    let u = source.boundary_matrix()?;
    let s = solve_spectrum(&u, SpectrumTarget::Count(n), &SolveOptions::default())?;
    Ok(GroundKernel::Modes(ground_state_from_spectrum(&s, n)?))
}

/// Ground-state kernel value for a spec of the `GroundState` variant.
pub fn ground_state_kernel(source: &BcSource, n: usize, x: f64, y: f64) -> Result<Complex64> {
    ground_state(source, n)?.eval(x, y)
}

/// Classical finite-temperature kernel as a weighted trigonometric series.
#[derive(Debug, Clone)]
pub struct ClassicalFiniteT {
    pub bc: Classical,
    /// Fermi weight of level `j`.
    pub weights: Vec<f64>,
    pub tail_bound: f64,
}

impl ClassicalFiniteT {
    fn mode(&self, j: usize, x: f64) -> f64 {
        let jf = j as f64;
        match self.bc {
            Classical::Periodic => unreachable!("periodic levels are summed as cosines"),
            Classical::Dirichlet => FRAC_1_PI.sqrt() * ((jf + 1.0) * x / 2.0).sin(),
            Classical::Neumann => {
                if j == 0 {
                    1.0 / TAU.sqrt()
                } else {
                    FRAC_1_PI.sqrt() * (jf * x / 2.0).cos()
                }
            }
            Classical::Zaremba => FRAC_1_PI.sqrt() * ((2.0 * jf + 1.0) * x / 4.0).cos(),
        }
    }
}

impl Kernel for ClassicalFiniteT {
    fn eval(&self, x: f64, y: f64) -> Result<Complex64> {
        check_domain(Domain::Box, x, y)?;
        let v = match self.bc {
            Classical::Periodic => {
                // levels 0, ±1, ±2, … with weights listed in that order
                let mut acc = self.weights[0];
                let d = x - y;
                let mut j = 1;
                while j < self.weights.len() {
                    let k = j.div_ceil(2) as f64;
                    acc += self.weights[j] * (k * d).cos();
                    if j + 1 < self.weights.len() {
                        acc += self.weights[j + 1] * (k * d).cos();
                    }
                    j += 2;
                }
                acc / TAU
            }
            _ => self.weights.iter().enumerate().map(|(j, w)| w * self.mode(j, x) * self.mode(j, y)).sum(),
        };
        Ok(Complex64::new(v, 0.0))
    }
    fn domain(&self) -> Domain {
        Domain::Box
    }
}

/// Either representation of a finite-temperature kernel.
pub enum FiniteTKernel {
    Closed(ClassicalFiniteT),
    Modes(ModeKernel, f64),
}

impl FiniteTKernel {
    /// `Σ_k F(E_k)` over the retained modes.
    pub fn trace(&self) -> f64 {
        match self {
            FiniteTKernel::Closed(k) => k.weights.iter().sum(),
            FiniteTKernel::Modes(k, _) => k.trace(),
        }
    }

    /// Certified bound on the Fermi mass of the dropped modes.
    pub fn tail_bound(&self) -> f64 {
        match self {
            FiniteTKernel::Closed(k) => k.tail_bound,
            FiniteTKernel::Modes(_, b) => *b,
        }
    }

    pub fn weights(&self) -> &[f64] {
        match self {
            FiniteTKernel::Closed(k) => &k.weights,
            FiniteTKernel::Modes(k, _) => &k.weights,
        }
    }
}

impl Kernel for FiniteTKernel {
    fn eval(&self, x: f64, y: f64) -> Result<Complex64> {
        match self {
            FiniteTKernel::Closed(k) => k.eval(x, y),
            FiniteTKernel::Modes(k, _) => k.eval(x, y),
        }
    }
    fn domain(&self) -> Domain {
        Domain::Box
    }
}

/// `Σ_k F_{T,μ}(E_k) ψ̄_k(x) ψ_k(y)` truncated where the certified Fermi tail is below `eps`.
pub fn finite_t(source: &BcSource, t: f64, mu: f64, eps: f64) -> Result<FiniteTKernel> {
    if !(t > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("finite-temperature kernel needs T > 0, finite μ (T={t}, μ={mu})")));
    }
    let e_cut = thermo::cutoff_energy(t, mu, eps);
    match source.classical()? {
        Some(bc) => {
            let levels = bc.levels_upto(e_cut)?;
            let tail = thermo::tail_bound(t, mu, e_cut, levels.len());
            let weights = levels.iter().map(|&e| fermi_factor(t, mu, e)).collect();
            Ok(FiniteTKernel::Closed(ClassicalFiniteT { bc, weights, tail_bound: tail }))
        }
        None => {
            let u = source.boundary_matrix()?;
            let s = solve_spectrum(&u, SpectrumTarget::Cutoff(e_cut.max(1.0)), &SolveOptions::default())?;
            finite_t_from_spectrum(&s, t, mu, eps)
        }
    }
}

/// Finite-temperature kernel over the modes of a solved spectrum.
pub fn finite_t_from_spectrum(s: &Spectrum, t: f64, mu: f64, eps: f64) -> Result<FiniteTKernel> {
    let e_cut = thermo::cutoff_energy(t, mu, eps);
    if s.e_max < e_cut {
        return Err(Error::InsufficientSpectrum(format!(
            "spectrum complete to {} but the Fermi tail needs {e_cut}",
            s.e_max
        )));
    }
    let modes: Vec<EigenMode> = s.modes.iter().copied().filter(|m| m.energy <= e_cut).collect();
    let tail = thermo::tail_bound(t, mu, e_cut, modes.len());
    let weights = modes.iter().map(|m| fermi_factor(t, mu, m.energy)).collect();
    Ok(FiniteTKernel::Modes(ModeKernel { modes, weights }, tail))
}

/// Finite-temperature kernel value.
pub fn finite_t_kernel(source: &BcSource, t: f64, mu: f64, x: f64, y: f64, eps: f64) -> Result<Complex64> {
    finite_t(source, t, mu, eps)?.eval(x, y)
}

// ---------------------------------------------------------------------------
// Scaling limits and projections on the half-line and the line

/// `sin(πz)/(πz)`.
pub fn sinc(z: f64) -> f64 {
    let a = PI * z;
    if a.abs() < SERIES_CUTOFF {
        1.0 - a * a / 6.0
    } else {
        a.sin() / a
    }
}

pub fn sine_kernel(x: f64, y: f64) -> f64 {
    sinc(x - y)
}

/// `sinc(x−y) − sinc(x+y)`: the hard edge of an absorbing wall.
pub fn bessel_minus_kernel(x: f64, y: f64) -> f64 {
    sinc(x - y) - sinc(x + y)
}

/// `sinc(x−y) + sinc(x+y)`: the hard edge of a reflecting wall.
pub fn bessel_plus_kernel(x: f64, y: f64) -> f64 {
    sinc(x - y) + sinc(x + y)
}

/// `∫₀^∞ sinc(s + ξ) e^{−cξ} dξ` for `s ≥ 0`, `c > 0`.
fn robin_edge_integral(c: f64, s: f64) -> Result<f64> {
    // |tail beyond L| ≤ e^{−cL}/(π(s+L)); 40/c leaves e^{−40}.
    let l = 40.0 / c;
    let panels = (l.min(1e5)).ceil().max(1.0) as usize;
    quad::integrate_split(|xi| sinc(s + xi) * (-c * xi).exp(), 0.0, l, KERNEL_QUAD_TOL / (2.0 * c).max(1.0), panels)
}

/// Edge limit for a Robin wall with coupling `c > 0`:
/// `sinc(x−y) + sinc(x+y) − 2c ∫₀^∞ sinc(x+y+ξ) e^{−cξ} dξ`.
pub fn robin_edge_kernel(c: f64, x: f64, y: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("Robin edge coupling must be positive, got {c}")));
    }
    Ok(bessel_plus_kernel(x, y) - 2.0 * c * robin_edge_integral(c, x + y)?)
}

/// Edge limit for a point interaction of strength `c ≥ 0`:
/// `sinc(x−y) + c ∫₀¹ sin(π(x+y)u)/(2πu + c) du`.
pub fn delta_edge_kernel(c: f64, x: f64, y: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta edge strength must be non-negative, got {c}")));
    }
    if c == 0.0 {
        return Ok(sine_kernel(x, y));
    }
    let s = x + y;
    let panels = (s.abs() / 2.0).ceil().max(1.0) as usize;
    let i = quad::integrate_split(|u| (PI * s * u).sin() / (TAU * u + c), 0.0, 1.0, KERNEL_QUAD_TOL / c.max(1.0), panels)?;
    Ok(sine_kernel(x, y) + c * i)
}

/// Edge projection of the line with a point interaction of strength `c ≥ 0`, assembled from
/// the even modes `cos(k|x| + φ_k)`, `tan φ_k = −c/(2k)`, and the odd modes `sin kx`:
/// `∫₀¹ [cos(π(x−y)u) + (2πuc sin(π(x+y)u) − c² cos(π(x+y)u)) / (4π²u² + c²)] du`.
///
/// Reduces to the sine kernel at `c = 0` and to the Dirichlet Bessel kernel as `c → ∞`.
pub fn delta_edge_kernel_from_modes(c: f64, x: f64, y: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta edge strength must be non-negative, got {c}")));
    }
    if c == 0.0 {
        return Ok(sine_kernel(x, y));
    }
    let s = PI * (x + y);
    let f = |u: f64| {
        let w = TAU * u;
        (w * c * (s * u).sin() - c * c * (s * u).cos()) / (w * w + c * c)
    };
    let panels = ((x + y).abs() / 2.0).ceil().max(1.0) as usize;
    let i = quad::integrate_split(f, 0.0, 1.0, KERNEL_QUAD_TOL, panels)?;
    Ok(sine_kernel(x, y) + i)
}

/// Bulk limit at finite temperature: `∫₀^∞ cos(π(x−y)u) / (1 + λ⁻¹ e^{u²/c}) du`.
pub fn finite_t_sine_kernel(c: f64, lambda: f64, x: f64, y: f64) -> Result<f64> {
    if !(c > 0.0 && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("FiniteTSine needs c > 0, λ > 0 (c={c}, λ={lambda})")));
    }
    let u_max = (c * (36.0 + lambda.ln_1p())).sqrt();
    let d = x - y;
    let weight = |u: f64| {
        let g = u * u / c;
        // 1/(1 + e^{g}/λ) written to avoid overflow of e^{g}
        if g > 700.0 {
            lambda * (-g).exp()
        } else {
            lambda / (lambda + g.exp())
        }
    };
    let panels = ((d.abs() * u_max) / 2.0).ceil().max(1.0) as usize;
    quad::integrate_split(|u| (PI * d * u).cos() * weight(u), 0.0, u_max, KERNEL_QUAD_TOL, panels)
}

impl LimitKernel {
    fn check(&self) -> Result<()> {
        match *self {
            LimitKernel::RobinEdge { c } if !(c > 0.0) => {
                Err(Error::InvalidParameter(format!("RobinEdge needs c > 0, got {c}")))
            }
            LimitKernel::DeltaEdge { c } if !(c >= 0.0) => {
                Err(Error::InvalidParameter(format!("DeltaEdge needs c ≥ 0, got {c}")))
            }
            LimitKernel::FiniteTSine { c, lambda } if !(c > 0.0 && lambda > 0.0) => {
                Err(Error::InvalidParameter(format!("FiniteTSine needs c, λ > 0 (c={c}, λ={lambda})")))
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        match *self {
            LimitKernel::Sine {} => Ok(sine_kernel(x, y)),
            LimitKernel::BesselPlus {} => Ok(bessel_plus_kernel(x, y)),
            LimitKernel::BesselMinus {} => Ok(bessel_minus_kernel(x, y)),
            LimitKernel::RobinEdge { c } => robin_edge_kernel(c, x, y),
            LimitKernel::DeltaEdge { c } => delta_edge_kernel(c, x, y),
            LimitKernel::FiniteTSine { c, lambda } => finite_t_sine_kernel(c, lambda, x, y),
        }
    }
}

/// Limit kernel value.
pub fn limit_kernel(spec: &LimitKernel, x: f64, y: f64) -> Result<f64> {
    spec.check()?;
    check_domain(spec.domain(), x, y)?;
    spec.value(x, y)
}

impl Kernel for LimitKernel {
    fn eval(&self, x: f64, y: f64) -> Result<Complex64> {
        check_domain(self.domain(), x, y)?;
        self.value(x, y).map(|v| Complex64::new(v, 0.0))
    }
    fn domain(&self) -> Domain {
        match self {
            LimitKernel::Sine {} | LimitKernel::FiniteTSine { .. } => Domain::Line,
            _ => Domain::HalfLine,
        }
    }
}

/// Half-integer Bessel functions `J_{−1/2}`, `J_{1/2}`, `J_{3/2}` at `z > 0`.
fn bessel_j_half(order2: i32, z: f64) -> f64 {
    let pref = (2.0 / (PI * z)).sqrt();
    match order2 {
        -1 => pref * z.cos(),
        1 => pref * z.sin(),
        3 => pref * (z.sin() / z - z.cos()),
        _ => unreachable!("only orders −1/2, 1/2, 3/2 are used"),
    }
}

/// `B_ν(x, y) = [√x J_{ν+1}(√x) J_ν(√y) − J_ν(√x) √y J_{ν+1}(√y)] / (2(x − y))` for `ν = ±1/2`.
///
/// Near the diagonal the equivalent sine form is used.
pub fn bessel_halfint(nu_plus: bool, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::InvalidParameter(format!("Bessel kernel needs x, y > 0 (x={x}, y={y})")));
    }
    let (o, o1) = if nu_plus { (1, 3) } else { (-1, 1) };
    if (x - y).abs() <= SERIES_CUTOFF * x.max(y) {
        // 2π²√(ab) B_{±1/2}(π²a², π²b²) = sinc(a−b) ∓ sinc(a+b)
        let (a, b) = (x.sqrt() / PI, y.sqrt() / PI);
        let s = if nu_plus { sinc(a - b) - sinc(a + b) } else { sinc(a - b) + sinc(a + b) };
        return Ok(s / (2.0 * PI * PI * (a * b).sqrt()));
    }
    let (sx, sy) = (x.sqrt(), y.sqrt());
    let num = sx * bessel_j_half(o1, sx) * bessel_j_half(o, sy) - bessel_j_half(o, sx) * sy * bessel_j_half(o1, sy);
    Ok(num / (2.0 * (x - y)))
}

/// Spectral projection `P(E)` of the Robin half-line Laplacian (`ψ′(0) = cψ(0)`, `c > 0`).
pub fn half_line_robin_projection(c: f64, e: f64, x: f64, y: f64) -> Result<f64> {
    if !(c > 0.0 && e > 0.0) {
        return Err(Error::InvalidParameter(format!("half-line projection needs c, E > 0 (c={c}, E={e})")));
    }
    let top = e.sqrt() / PI;
    let (d, s) = (PI * (x - y), PI * (x + y));
    let f = |u: f64| {
        let cs = (s * u).cos();
        (d * u).cos() + cs - 2.0 * (c * c * cs - c * PI * u * (s * u).sin()) / (PI * PI * u * u + c * c)
    };
    let panels = (top * (1.0 + (x - y).abs() + (x + y).abs())).ceil().max(1.0) as usize;
    quad::integrate_split(f, 0.0, top, KERNEL_QUAD_TOL, panels)
}

/// Spectral projection of the line Laplacian with a point interaction of strength `c ≥ 0` at 0.
pub fn delta_line_projection(c: f64, e: f64, x: f64, y: f64) -> Result<f64> {
    if !(c >= 0.0 && e > 0.0) {
        return Err(Error::InvalidParameter(format!("line projection needs c ≥ 0, E > 0 (c={c}, E={e})")));
    }
    let top = e.sqrt() / PI;
    let (d, s) = (PI * (x - y), PI * (x.abs() + y.abs()));
    let f = |u: f64| (d * u).cos() + c * (s * u).sin() / (TAU * u + c);
    let panels = (top * (1.0 + (x - y).abs() + x.abs() + y.abs())).ceil().max(1.0) as usize;
    quad::integrate_split(f, 0.0, top, KERNEL_QUAD_TOL, panels)
}
