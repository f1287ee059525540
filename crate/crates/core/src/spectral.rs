//! Eigenvalues and eigenfunctions of −d²/dx² on (0, 2π) under a boundary matrix `U`.
//!
//! Solutions of `−ψ″ = Eψ` form a two-dimensional space; imposing the boundary
//! condition gives a 2×2 linear system `M(E) c = 0`. For the root search the
//! condition is rewritten at a momentum scale `s` as `σ_s† Y_s(E) w = w`, where
//! `Y_s = R̄ R⁻¹` is the Cayley transform of the scaled Dirichlet-to-Neumann data
//! and `σ_s` is the matching Möbius image of `U`. Both are unitary and, at fixed
//! `s`, the eigenphases of `W = σ_s† Y_s` increase monotonically with `E`, so every
//! eigenvalue is a crossing of an eigenphase through a multiple of 2π. Counting
//! crossings between grid points cannot miss roots, degenerate roots included.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::{adjoint, boundary_residual, det, inverse, mul, BoundaryData, BoundaryMatrix, Mat2};
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

/// Length of the box.
pub const LENGTH: f64 = TAU;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Offset of block edges from integer momenta, chosen so that edges avoid the
/// rational eigenvalues of the classical presets.
const EDGE_OFFSET: f64 = 0.237_1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    /// `a cos(ωx) + b sin(ωx)`, `E = ω² > 0`.
    Trig,
    /// `a + b x`, `E = 0`.
    Linear,
    /// `a e^{−κx} + b e^{−κ(2π−x)}`, `E = −κ² < 0`; both terms stay bounded by their coefficients.
    Hyperbolic,
}

/// A normalized eigenfunction of `H_U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenMode {
    pub energy: f64,
    pub kind: ModeKind,
    pub a: Complex64,
    pub b: Complex64,
    pub index: usize,
}

impl EigenMode {
    /// ω for trig modes, κ for hyperbolic modes, 0 for the linear mode.
    pub fn momentum(&self) -> f64 {
        self.energy.abs().sqrt()
    }

    /// ψ(x) without a domain check.
    pub fn value(&self, x: f64) -> Complex64 {
        let k = self.momentum();
        match self.kind {
            ModeKind::Trig => {
                let (s, c) = (k * x).sin_cos();
                self.a * c + self.b * s
            }
            ModeKind::Linear => self.a + self.b * x,
            ModeKind::Hyperbolic => self.a * (-k * x).exp() + self.b * (-k * (LENGTH - x)).exp(),
        }
    }

    /// ψ′(x) without a domain check.
    pub fn derivative(&self, x: f64) -> Complex64 {
        let k = self.momentum();
        match self.kind {
            ModeKind::Trig => {
                let (s, c) = (k * x).sin_cos();
                (self.b * c - self.a * s) * k
            }
            ModeKind::Linear => self.b,
            ModeKind::Hyperbolic => (self.b * (-k * (LENGTH - x)).exp() - self.a * (-k * x).exp()) * k,
        }
    }

    pub fn boundary_data(&self) -> BoundaryData {
        BoundaryData::new(self.value(LENGTH), self.value(0.0), self.derivative(LENGTH), self.derivative(0.0))
    }
}

/// Pointwise value of an eigenfunction on [0, 2π].
pub fn eigenfunction_eval(m: &EigenMode, x: f64) -> Result<Complex64> {
    if !(0.0..=LENGTH).contains(&x) {
        return Err(Error::OutsideDomain(x));
    }
    Ok(m.value(x))
}

/// An ordered slice of the spectrum of `H_U`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bc: BoundaryMatrix,
    pub modes: Vec<EigenMode>,
    /// Every eigenvalue `≤ e_max` is present.
    pub e_max: f64,
}

impl Spectrum {
    pub fn energies(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.energy).collect()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `#{E_k ≤ e}` counted with multiplicity, up to root-finding round-off.
    pub fn count_below(&self, e: f64) -> usize {
        let tol = 1e-12 * e.abs().max(1.0);
        self.modes.iter().filter(|m| m.energy <= e + tol).count()
    }
}

/// What part of the spectrum to compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumTarget {
    /// The lowest `n` eigenvalues with multiplicity.
    Count(usize),
    /// All eigenvalues `≤ e_max`.
    Cutoff(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Initial grid step in momentum; refined adaptively.
    pub grid_step: f64,
    /// Relative tolerance on roots in momentum.
    pub root_tol: f64,
    /// Roots closer than this (relative, in energy) form one degenerate eigenspace.
    pub degeneracy_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { grid_step: PI / 8.0, root_tol: 1e-15, degeneracy_tol: 1e-9 }
    }
}

/// Two real solutions of `−ψ″ = Eψ` used to assemble the boundary system.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Basis {
    /// `cos(ωx)`, `sin(ωx)/ω`.
    Trig(f64),
    /// `1`, `x`.
    Linear,
    /// `cosh(κx)`, `sinh(κx)/κ`.
    Hyperbolic(f64),
    /// `e^{−κx}`, `e^{−κ(2π−x)}`; used when cosh would lose the small solution.
    Exponential(f64),
}

impl Basis {
    fn at_momentum(q: f64) -> Self {
        if q > 0.0 {
            Basis::Trig(q)
        } else if q < 0.0 {
            if -q * LENGTH > 2.0 {
                Basis::Exponential(-q)
            } else {
                Basis::Hyperbolic(-q)
            }
        } else {
            Basis::Linear
        }
    }

    /// Values and outward derivatives: `v[endpoint][function]`, endpoint 0 is 2π, 1 is 0.
    fn boundary(&self) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
        let l = LENGTH;
        match *self {
            Basis::Trig(w) => {
                let (s, c) = (w * l).sin_cos();
                ([[c, s / w], [1.0, 0.0]], [[-w * s, c], [0.0, -1.0]])
            }
            Basis::Linear => ([[1.0, l], [1.0, 0.0]], [[0.0, 1.0], [0.0, -1.0]]),
            Basis::Hyperbolic(k) => {
                let (s, c) = ((k * l).sinh(), (k * l).cosh());
                ([[c, s / k], [1.0, 0.0]], [[k * s, c], [0.0, -1.0]])
            }
            Basis::Exponential(k) => {
                let e = (-k * l).exp();
                ([[e, 1.0], [1.0, e]], [[-k * e, k], [k, -k * e]])
            }
        }
    }

    /// Coefficients in the mode's public basis for a null vector `c` of this basis.
    fn to_mode_coeffs(&self, c: [Complex64; 2]) -> (ModeKind, Complex64, Complex64) {
        match *self {
            Basis::Trig(w) => (ModeKind::Trig, c[0], c[1] / w),
            Basis::Linear => (ModeKind::Linear, c[0], c[1]),
            Basis::Hyperbolic(k) => {
                // cosh(κx) and sinh(κx)/κ rewritten in e^{−κx}, e^{−κ(2π−x)}
                let (c0, c1) = (c[0], c[1] / k);
                let grow = (k * LENGTH).exp();
                (ModeKind::Hyperbolic, (c0 - c1) * 0.5, (c0 + c1) * (0.5 * grow))
            }
            Basis::Exponential(_) => (ModeKind::Hyperbolic, c[0], c[1]),
        }
    }
}

/// `R_s = V + i N / s`.
fn r_matrix(basis: &Basis, s: f64) -> Mat2 {
    let (v, n) = basis.boundary();
    [
        Complex64::new(v[0][0], n[0][0] / s),
        Complex64::new(v[0][1], n[0][1] / s),
        Complex64::new(v[1][0], n[1][0] / s),
        Complex64::new(v[1][1], n[1][1] / s),
    ]
}

fn conj(m: &Mat2) -> Mat2 {
    m.map(|z| z.conj())
}

/// `σ_s = ((s−1) I + (s+1) U)((s+1) I + (s−1) U)⁻¹`, the condition `v − i n = U(v + i n)`
/// restated as `v − i n/s = σ_s (v + i n/s)`.
fn scaled_boundary_matrix(u: &Mat2, s: f64) -> Mat2 {
    let lin = |p: f64, q: f64| [ONE * p + u[0] * q, u[1] * q, u[2] * q, ONE * p + u[3] * q];
    mul(&lin(s - 1.0, s + 1.0), &inverse(&lin(s + 1.0, s - 1.0)))
}

/// Unit-scale secular determinant `det(R̄ − U R)` in the basis
/// `{cos ωx, sin ωx}`, `{1, x}` or `{cosh κx, sinh κx}` according to the sign of `e`.
pub fn secular_det(u: &BoundaryMatrix, e: f64) -> Complex64 {
    let r = if e > 0.0 {
        let w = e.sqrt();
        let (s, c) = (w * LENGTH).sin_cos();
        // columns cos, sin; rows 2π then 0; entries value + i·outward derivative
        [Complex64::new(c, -w * s), Complex64::new(s, w * c), ONE, Complex64::new(0.0, -w)]
    } else if e < 0.0 {
        let k = (-e).sqrt();
        let (s, c) = ((k * LENGTH).sinh(), (k * LENGTH).cosh());
        [Complex64::new(c, k * s), Complex64::new(s, k * c), ONE, Complex64::new(0.0, -k)]
    } else {
        [ONE, Complex64::new(LENGTH, 1.0), ONE, Complex64::new(0.0, -1.0)]
    };
    let ur = mul(&u.entries, &r);
    let m = [r[0].conj() - ur[0], r[1].conj() - ur[1], r[2].conj() - ur[2], r[3].conj() - ur[3]];
    det(&m)
}

/// Phase data of the unitary `W = σ_s† R̄ R⁻¹` at signed momentum `q` (`E = q|q|`).
struct PhasePoint {
    q: f64,
    arg_det: f64,
    w: Mat2,
}

struct Scanner {
    u: Mat2,
    s: f64,
    sigma_adj: Mat2,
}

impl Scanner {
    fn new(u: &Mat2, s: f64) -> Self {
        Scanner { u: *u, s, sigma_adj: adjoint(&scaled_boundary_matrix(u, s)) }
    }

    fn point(&self, q: f64) -> PhasePoint {
        let r = r_matrix(&Basis::at_momentum(q), self.s);
        let y = mul(&conj(&r), &inverse(&r));
        let w = mul(&self.sigma_adj, &y);
        PhasePoint { q, arg_det: det(&w).arg(), w }
    }

    /// Scaled system `R̄ − σ_s R` in the scan basis at `q`.
    fn system(&self, q: f64) -> (Basis, Mat2) {
        let basis = Basis::at_momentum(q);
        let r = r_matrix(&basis, self.s);
        let sigma = scaled_boundary_matrix(&self.u, self.s);
        let sr = mul(&sigma, &r);
        let rb = conj(&r);
        (basis, [rb[0] - sr[0], rb[1] - sr[1], rb[2] - sr[2], rb[3] - sr[3]])
    }
}

/// Wraps an angle into (−π, π].
fn wrap(a: f64) -> f64 {
    let mut x = a % TAU;
    if x > PI {
        x -= TAU;
    } else if x <= -PI {
        x += TAU;
    }
    x
}

/// The two eigenphases `φ ± γ` of `W` given the unwrapped total phase `Φ = 2φ`.
fn eigenphases(w: &Mat2, big_phi: f64) -> [f64; 2] {
    let phi = 0.5 * big_phi;
    let rot = Complex64::from_polar(1.0, -phi);
    let v = w.map(|z| z * rot);
    let half_tr = (v[0] + v[3]) * 0.5;
    let d = [v[0] - half_tr, v[1], v[2], v[3] - half_tr];
    let sin_g = (d.iter().map(|z| z.norm_sqr()).sum::<f64>() / 2.0).sqrt();
    let gamma = sin_g.atan2(half_tr.re);
    [phi + gamma, phi - gamma]
}

/// Crossings of multiples of 2π by one eigenphase branch.
fn crossings(lo: f64, hi: f64) -> std::ops::RangeInclusive<i64> {
    let first = (lo / TAU).floor() as i64 + 1;
    let last = (hi / TAU).floor() as i64;
    first..=last
}

struct RawRoot {
    q: f64,
    scale: f64,
}

/// Scans `[qa, qb)` at scale `s` and returns all roots `q` with eigenphase crossings in `(qa, qb]`.
fn scan_block(u: &Mat2, qa: f64, qb: f64, step: f64, tol: f64) -> Result<Vec<RawRoot>> {
    let s = qa.abs().max(qb.abs()).max(1.0);
    let sc = Scanner::new(u, s);
    let mut roots = Vec::new();
    let n0 = ((qb - qa) / step).ceil().max(1.0) as usize;
    let h0 = (qb - qa) / n0 as f64;

    let mut left = sc.point(qa);
    let mut big_phi = left.arg_det;
    let mut theta_left = eigenphases(&left.w, big_phi);
    let mut q = qa;
    let mut h = h0;
    while q < qb {
        let q_next = if q + h >= qb - 1e-15 * qb.abs().max(1.0) { qb } else { q + h };
        let right = sc.point(q_next);
        let inc = wrap(right.arg_det - left.arg_det);
        if inc > PI / 2.0 || inc < -1e-9 {
            if h < 1e-14 * q.abs().max(1.0) {
                return Err(Error::RootSearchFailure(format!(
                    "phase step could not be resolved near momentum {q}"
                )));
            }
            h *= 0.5;
            continue;
        }
        let phi_right = big_phi + inc.max(0.0);
        let theta_right = eigenphases(&right.w, phi_right);
        for branch in 0..2 {
            for m in crossings(theta_left[branch], theta_right[branch]) {
                let target = TAU * m as f64;
                let root = bisect_branch(&sc, &left, big_phi, q_next, branch, target, tol);
                roots.push(RawRoot { q: root, scale: s });
            }
        }
        left = right;
        big_phi = phi_right;
        theta_left = theta_right;
        q = q_next;
        h = (h * 2.0).min(h0);
    }
    Ok(roots)
}

fn bisect_branch(
    sc: &Scanner,
    left: &PhasePoint,
    big_phi_left: f64,
    q_right: f64,
    branch: usize,
    target: f64,
    tol: f64,
) -> f64 {
    let (mut a, mut b) = (left.q, q_right);
    let theta_at = |q: f64| {
        let p = sc.point(q);
        let big_phi = big_phi_left + wrap(p.arg_det - left.arg_det).max(0.0);
        eigenphases(&p.w, big_phi)[branch]
    };
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) <= tol * m.abs().max(1.0) {
            break;
        }
        if theta_at(m) < target {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Block edges in signed momentum covering `[q_lo, ∞)`.
fn block_edges_from(q_lo: f64) -> impl Iterator<Item = f64> {
    let neg = (-q_lo - EDGE_OFFSET).max(0.0).ceil() as i64;
    (-neg..).map(|j| {
        let jf = j as f64;
        if jf < 0.0 {
            jf - EDGE_OFFSET
        } else if j == 0 {
            -EDGE_OFFSET
        } else {
            jf - 1.0 + EDGE_OFFSET
        }
    })
}

/// Closed-form Gram matrix `∫₀^{2π} f_i f_j` of the public basis of `kind` at momentum `k`.
fn gram(kind: ModeKind, k: f64) -> Result<[f64; 3]> {
    let l = LENGTH;
    Ok(match kind {
        ModeKind::Trig => {
            let s2 = (2.0 * k * l).sin() / (4.0 * k);
            let sl = (k * l).sin();
            [l / 2.0 + s2, sl * sl / (2.0 * k), l / 2.0 - s2]
        }
        ModeKind::Linear => [l, l * l / 2.0, l * l * l / 3.0],
        ModeKind::Hyperbolic => {
            let self_overlap = -(-2.0 * k * l).exp_m1() / (2.0 * k);
            [self_overlap, l * (-k * l).exp(), self_overlap]
        }
    })
}

/// `⟨f, g⟩` for coefficient pairs of one kind and momentum.
fn inner(g: &[f64; 3], f: (Complex64, Complex64), h: (Complex64, Complex64)) -> Complex64 {
    f.0.conj() * h.0 * g[0] + (f.0.conj() * h.1 + f.1.conj() * h.0) * g[1] + f.1.conj() * h.1 * g[2]
}

/// Rotates the pair so that its larger coefficient is real and positive.
fn fix_phase(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let pivot = if a.norm() >= b.norm() { a } else { b };
    if pivot.norm() == 0.0 {
        return (a, b);
    }
    let rot = pivot.conj() / pivot.norm();
    (a * rot, b * rot)
}

/// Null vector of a numerically rank-one 2×2 matrix, orthogonal to its dominant row.
fn null_vector(m: &Mat2) -> [Complex64; 2] {
    let r0 = m[0].norm_sqr() + m[1].norm_sqr();
    let r1 = m[2].norm_sqr() + m[3].norm_sqr();
    let (x, y) = if r0 >= r1 { (m[0], m[1]) } else { (m[2], m[3]) };
    [-y, x]
}

/// Computes eigenvalues and normalized eigenfunctions of `H_U` up to the target.
pub fn solve_spectrum(u: &BoundaryMatrix, target: SpectrumTarget, opts: &SolveOptions) -> Result<Spectrum> {
    u.validate()?;
    match target {
        SpectrumTarget::Count(0) => {
            return Err(Error::InvalidParameter("spectrum count must be at least 1".into()))
        }
        SpectrumTarget::Cutoff(e) if !(e > 0.0) => {
            return Err(Error::InvalidParameter(format!("cutoff {e} must be positive")))
        }
        _ => {}
    }
    let kappa_max = 2.0 * u.coupling_scale().max(1.0);
    let (q_stop, count) = match target {
        SpectrumTarget::Count(n) => (f64::INFINITY, Some(n)),
        SpectrumTarget::Cutoff(e) => (e.sqrt() * (1.0 + 1e-12) + 1e-12, None),
    };

    let mut raw: Vec<RawRoot> = Vec::new();
    let mut edges = block_edges_from(-kappa_max);
    let mut qa = edges.next().expect("edge iterator is infinite");
    loop {
        let qb = edges.next().expect("edge iterator is infinite");
        let qb = qb.min(q_stop);
        raw.extend(scan_block(&u.entries, qa, qb, opts.grid_step, opts.root_tol)?);
        qa = qb;
        if qa >= q_stop {
            break;
        }
        if let Some(n) = count {
            if raw.len() >= n {
                break;
            }
        }
        if qa > 1e7 {
            return Err(Error::RootSearchFailure("momentum scan exceeded 1e7".into()));
        }
    }
    raw.sort_by(|a, b| a.q.total_cmp(&b.q));

    let modes = assemble_modes(u, &raw, opts)?;
    let (modes, e_max) = match target {
        SpectrumTarget::Count(n) => {
            let mut modes = modes;
            modes.truncate(n);
            let e = modes.last().map(|m| m.energy).unwrap_or(0.0);
            (modes, e)
        }
        SpectrumTarget::Cutoff(e) => {
            let tol = 1e-12 * e.max(1.0);
            (modes.into_iter().filter(|m| m.energy <= e + tol).collect(), e)
        }
    };
    let modes: Vec<EigenMode> = modes.into_iter().enumerate().map(|(i, m)| EigenMode { index: i, ..m }).collect();

    let spectrum = Spectrum { bc: u.clone(), modes, e_max };
    check_counting_bounds(&spectrum)?;
    Ok(spectrum)
}

/// Groups nearly equal roots and extracts an orthonormal eigenbasis for each group.
fn assemble_modes(u: &BoundaryMatrix, raw: &[RawRoot], opts: &SolveOptions) -> Result<Vec<EigenMode>> {
    let mut modes = Vec::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        let mut j = i + 1;
        let e_i = raw[i].q * raw[i].q.abs();
        while j < raw.len() {
            let e_j = raw[j].q * raw[j].q.abs();
            if (e_j - e_i).abs() <= opts.degeneracy_tol * e_i.abs().max(1.0) {
                j += 1;
            } else {
                break;
            }
        }
        let group = &raw[i..j];
        if group.len() > 2 {
            return Err(Error::RootSearchFailure(format!(
                "{} coincident roots near E = {e_i}; multiplicity cannot exceed 2",
                group.len()
            )));
        }
        let q = group.iter().map(|r| r.q).sum::<f64>() / group.len() as f64;
        let mut energy = q * q.abs();
        if energy.abs() <= 1e-12 {
            energy = 0.0;
        }
        let q = if energy == 0.0 { 0.0 } else { q };
        let sc = Scanner::new(&u.entries, group[0].scale);
        let (basis, m) = sc.system(q);
        let vectors: Vec<[Complex64; 2]> = if group.len() == 2 {
            vec![[ONE, ZERO], [ZERO, ONE]]
        } else {
            vec![null_vector(&m)]
        };
        let mut kind_k = None;
        let mut found: Vec<(Complex64, Complex64)> = Vec::new();
        for v in vectors {
            let (kind, a, b) = basis.to_mode_coeffs(v);
            kind_k = Some(kind);
            found.push((a, b));
        }
        let kind = kind_k.expect("at least one vector per root");
        let k = energy.abs().sqrt();
        let g = gram(kind, k)?;
        let mut ortho: Vec<(Complex64, Complex64)> = Vec::new();
        for mut f in found {
            for e in &ortho {
                let p = inner(&g, *e, f);
                f = (f.0 - e.0 * p, f.1 - e.1 * p);
            }
            let norm = inner(&g, f, f).re.sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::NormalizationFailure(format!("zero eigenvector at E = {energy}")));
            }
            let f = fix_phase(f.0 / norm, f.1 / norm);
            ortho.push(f);
        }
        for (a, b) in ortho {
            let mode = EigenMode { energy, kind, a, b, index: 0 };
            let res = boundary_residual(u, &mode.boundary_data());
            // |ψ′| ≤ k(|a| + |b|); evaluating phases kx up to k·2π loses about k·2π·ε
            let k = mode.momentum();
            let scale = 1.0 + k.max(1.0) * (a.norm() + b.norm());
            let allowed = scale * (1e-8 + 1e3 * f64::EPSILON * k * LENGTH);
            if !(res <= allowed) {
                return Err(Error::RootSearchFailure(format!(
                    "mode at E = {energy} violates the boundary condition (residual {res:e})"
                )));
            }
            modes.push(mode);
        }
        i = j;
    }
    Ok(modes)
}

/// Every `H_U` interlaces with Dirichlet: `⌊2√E⌋ ≤ N(E) ≤ ⌊2√E⌋ + 2` for `E ≥ 0`.
fn check_counting_bounds(s: &Spectrum) -> Result<()> {
    let e = s.e_max;
    if e < 0.0 {
        return Ok(());
    }
    let n = s.count_below(e) as f64;
    let lower = (2.0 * e.sqrt() - 1e-9).floor();
    if n < lower || n > lower + 2.0 + 1e-9 {
        return Err(Error::RootSearchFailure(format!(
            "found {n} eigenvalues up to {e}, outside the interlacing window [{lower}, {}]",
            lower + 2.0
        )));
    }
    Ok(())
}

/// Result of a Weyl-law comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    /// `sup_{E ≤ e_max} |N(E) − 2√E|`, with `√E` read as 0 for `E < 0`.
    pub max_deviation: f64,
    /// `N(e_max)`.
    pub count_at_emax: usize,
}

/// Compares the counting function with `2√E` at every jump and at the cutoff.
pub fn weyl_check(s: &Spectrum) -> WeylReport {
    let weyl = |e: f64| 2.0 * e.max(0.0).sqrt();
    let energies = s.energies();
    let mut dev: f64 = 0.0;
    let mut i = 0;
    while i < energies.len() {
        let e = energies[i];
        let mut j = i;
        while j < energies.len() && energies[j] == e {
            j += 1;
        }
        dev = dev.max((i as f64 - weyl(e)).abs());
        dev = dev.max((j as f64 - weyl(e)).abs());
        i = j;
    }
    let count = s.count_below(s.e_max);
    dev = dev.max((count as f64 - weyl(s.e_max)).abs());
    WeylReport { max_deviation: dev, count_at_emax: count }
}

/// Composite Gauss–Legendre rule on [0, 2π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl QuadSpec {
    /// Panels fine enough for modes up to the given momentum.
    pub fn for_momentum(k: f64) -> Self {
        QuadSpec { panels: (2.0 * k).ceil().max(4.0) as usize, nodes_per_panel: 20 }
    }

    pub fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let gl = GaussLegendre::new(self.nodes_per_panel);
        let h = LENGTH / self.panels as f64;
        let mut xs = Vec::with_capacity(self.panels * self.nodes_per_panel);
        let mut ws = Vec::with_capacity(xs.capacity());
        for p in 0..self.panels {
            let (x, w) = gl.on(p as f64 * h, (p + 1) as f64 * h);
            xs.extend(x);
            ws.extend(w);
        }
        (xs, ws)
    }
}

/// `max_{i,j} |⟨ψ_i, ψ_j⟩ − δ_ij|` by composite quadrature.
pub fn orthonormality_check(s: &Spectrum, quad: &QuadSpec) -> f64 {
    let (xs, ws) = quad.nodes();
    let vals: Vec<Vec<Complex64>> = s.modes.iter().map(|m| xs.iter().map(|&x| m.value(x)).collect()).collect();
    let mut worst: f64 = 0.0;
    for i in 0..vals.len() {
        for j in i..vals.len() {
            let ip: Complex64 = vals[i].iter().zip(&vals[j]).zip(&ws).map(|((a, b), w)| a.conj() * b * w).sum();
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((ip - target).norm());
        }
    }
    worst
}
