//! Fermi factors, chemical-potential solving, and the polylogarithm `Li_{1/2}` at negative argument.
//!
//! Every truncation uses the interlacing bound `E_k ≥ (k−2)²/4` (1-based `k`), valid for any
//! self-adjoint boundary condition on an interval of length 2π, so tails are certified.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryMatrix;
use crate::error::{Error, Result};
use crate::quad;
use crate::spectral::{solve_spectrum, SolveOptions, Spectrum, SpectrumTarget};

/// Bisection and bracket-expansion cap.
const MAX_ITER: usize = 200;

/// Temperature, chemical potential and an optional particle-number target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoParams {
    pub t: f64,
    pub mu: f64,
    pub n_target: Option<f64>,
}

/// `1/(1 + e^{−(μ−E)/T})` without overflow.
pub fn fermi_factor(t: f64, mu: f64, e: f64) -> f64 {
    let z = (e - mu) / t;
    if z > 0.0 {
        let w = (-z).exp();
        w / (1.0 + w)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// Ascending one-particle energies with multiplicity.
pub trait LevelSource {
    /// Every level `≤ e`; errors if the source cannot certify completeness up to `e`.
    fn levels_upto(&self, e: f64) -> Result<Vec<f64>>;
}

impl LevelSource for Spectrum {
    fn levels_upto(&self, e: f64) -> Result<Vec<f64>> {
        if e > self.e_max {
            return Err(Error::InsufficientSpectrum(format!(
                "levels requested up to {e}, spectrum complete only to {}",
                self.e_max
            )));
        }
        Ok(self.modes.iter().map(|m| m.energy).take_while(|&v| v <= e).collect())
    }
}

impl LevelSource for BoundaryMatrix {
    fn levels_upto(&self, e: f64) -> Result<Vec<f64>> {
        let s = solve_spectrum(self, SpectrumTarget::Cutoff(e.max(1.0)), &SolveOptions::default())?;
        Ok(s.energies().into_iter().take_while(|&v| v <= e).collect())
    }
}

impl LevelSource for [f64] {
    /// A finite list is treated as the complete spectrum.
    fn levels_upto(&self, e: f64) -> Result<Vec<f64>> {
        Ok(self.iter().copied().take_while(|&v| v <= e).collect())
    }
}

/// `ln Σ_{k>found} e^{(μ − max(E_cut, (k−2)²/4))/T}`, an upper bound on the Fermi mass above `E_cut`
/// when exactly `found` levels lie at or below `E_cut`.
fn log_tail_bound(t: f64, mu: f64, e_cut: f64, found: usize) -> f64 {
    // levels k ≤ k1 are only known to exceed E_cut; beyond k1 the interlacing bound is stronger
    let k1 = 2 + (2.0 * e_cut.max(0.0).sqrt()).floor() as usize;
    let mut terms = Vec::with_capacity(2);
    if k1 > found {
        terms.push(((k1 - found) as f64).ln() + (mu - e_cut) / t);
    }
    // Σ_{k>k1} e^{(μ−(k−2)²/4)/T} ≤ ∫_{k1}^∞ = √(πT)·e^{μ/T}·erfc(z0) ≤ √T e^{μ/T − z0²}/z0
    let z0 = (k1 as f64 - 2.0).max(0.5) / (2.0 * t.sqrt());
    terms.push(mu / t - z0 * z0 + (t.sqrt() / z0).ln() + if k1 < 3 { 1.0 } else { 0.0 });
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Certified bound on `Σ_{E_k > E_cut} F_{T,μ}(E_k)` given `found` levels at or below `E_cut`.
pub fn tail_bound(t: f64, mu: f64, e_cut: f64, found: usize) -> f64 {
    log_tail_bound(t, mu, e_cut, found).exp()
}

/// Smallest cutoff (on a `T`-spaced ladder) whose worst-case tail bound is below `eps`.
pub fn cutoff_energy(t: f64, mu: f64, eps: f64) -> f64 {
    let mut e = mu.max(0.0) + t * (1.0 / eps).ln();
    for _ in 0..10_000 {
        // interlacing guarantees at least ⌊2√E⌋ levels at or below E
        let found = (2.0 * e.max(0.0).sqrt()).floor() as usize;
        if log_tail_bound(t, mu, e, found) <= eps.ln() {
            return e;
        }
        e += t.max(1e-3 * e.abs()).max(1e-12);
    }
    e
}

/// Result of a chemical-potential solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuSolution {
    pub mu: f64,
    /// `Σ_k F(E_k) − n_target` at the returned μ.
    pub residual: f64,
}

struct Constraint<'a, S: LevelSource + ?Sized> {
    source: &'a S,
    t: f64,
    n: f64,
    eps: f64,
    cache: RefCell<(f64, Vec<f64>)>,
}

impl<S: LevelSource + ?Sized> Constraint<'_, S> {
    fn levels(&self, e: f64) -> Result<Vec<f64>> {
        let mut c = self.cache.borrow_mut();
        if e > c.0 {
            // over-fetch so bisection steps rarely trigger a new solve
            let target = e.max(c.0 * 1.5);
            let lv = match self.source.levels_upto(target) {
                Ok(v) => (target, v),
                Err(_) => (e, self.source.levels_upto(e)?),
            };
            *c = lv;
        }
        Ok(c.1.iter().copied().take_while(|&v| v <= e).collect())
    }

    fn eval(&self, mu: f64) -> Result<f64> {
        let e_cut = cutoff_energy(self.t, mu, self.eps);
        let lv = self.levels(e_cut)?;
        Ok(lv.iter().map(|&e| fermi_factor(self.t, mu, e)).sum::<f64>() - self.n)
    }
}

/// Chemical potential with `|Σ_k F_{T,μ}(E_k) − n_target| ≤ tol`.
pub fn solve_mu<S: LevelSource + ?Sized>(source: &S, t: f64, n_target: f64, tol: f64) -> Result<MuSolution> {
    if !(t > 0.0) || !(n_target > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("solve_mu needs T, n, tol > 0 (T={t}, n={n_target}, tol={tol})")));
    }
    let g = Constraint { source, t, n: n_target, eps: tol * 1e-3, cache: RefCell::new((f64::NEG_INFINITY, vec![])) };
    // μ₀ = E_{⌈n⌉}
    let need = n_target.ceil() as usize;
    let mut e = 1.0;
    let mu0 = loop {
        let lv = g.levels(e)?;
        if lv.len() >= need {
            break lv[need - 1];
        }
        e *= 4.0;
        if e > 1e300 {
            return Err(Error::NoConvergence("no level reaches the requested count".into()));
        }
    };
    let (mut lo, mut hi) = (mu0, mu0);
    let mut step = t.max(1.0);
    let mut g_hi = g.eval(hi)?;
    let mut it = 0;
    while g_hi < 0.0 {
        lo = hi;
        hi += step;
        step *= 2.0;
        g_hi = g.eval(hi)?;
        it += 1;
        if it > MAX_ITER {
            return Err(Error::NoConvergence("upper bracket for μ not found".into()));
        }
    }
    if g_hi.abs() <= tol {
        return Ok(MuSolution { mu: hi, residual: g_hi });
    }
    let mut g_lo = g.eval(lo)?;
    step = t.max(1.0);
    it = 0;
    while g_lo > 0.0 {
        hi = lo;
        lo -= step;
        step *= 2.0;
        g_lo = g.eval(lo)?;
        it += 1;
        if it > MAX_ITER {
            return Err(Error::NoConvergence("lower bracket for μ not found".into()));
        }
    }
    if g_lo.abs() <= tol {
        return Ok(MuSolution { mu: lo, residual: g_lo });
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let gm = g.eval(mid)?;
        if gm.abs() <= tol {
            return Ok(MuSolution { mu: mid, residual: gm });
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }
    Err(Error::NoConvergence(format!("μ bisection stalled in [{lo}, {hi}] above tolerance {tol}")))
}

/// `Li_{1/2}(−λ) = −(2/√π) ∫₀^∞ du / (1 + λ⁻¹ e^{u²})`.
pub fn polylog_half(lambda: f64) -> f64 {
    assert!(lambda > 0.0, "polylog_half needs λ > 0");
    let ln_l = lambda.ln();
    // integrand ≤ λ e^{−u²}; beyond u_max the tail is below e^{−40}·λ e^{−ln⁺λ}
    let u_max = (ln_l.max(0.0) + 40.0).sqrt();
    let f = |u: f64| {
        let g = u * u - ln_l;
        if g > 0.0 {
            let w = (-g).exp();
            w / (1.0 + w)
        } else {
            1.0 / (1.0 + g.exp())
        }
    };
    let tol = 1e-13 * lambda.min(1.0);
    let v = quad::integrate_split(f, 0.0, u_max, tol, 8).expect("smooth Fermi integrand converges");
    -2.0 / PI.sqrt() * v
}

/// Result of the λ inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSolution {
    pub lambda: f64,
    /// `Li_{1/2}(−λ) + 2/√(πc)`.
    pub residual: f64,
}

/// Unique `λ > 0` with `Li_{1/2}(−λ) = −2/√(πc)`, by bisection in `ln λ`.
pub fn solve_lambda(c: f64) -> Result<LambdaSolution> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("solve_lambda needs c > 0, got {c}")));
    }
    let target = -2.0 / (PI * c).sqrt();
    let g = |ln_l: f64| polylog_half(ln_l.exp()) - target;
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    while g(hi) > 0.0 {
        hi += 1.0;
    }
    while g(lo) < 0.0 {
        lo -= 1.0;
    }
    // g is decreasing in ln λ: g(lo) ≥ 0 ≥ g(hi)
    let mut best = (lo, g(lo));
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm.abs() < best.1.abs() {
            best = (mid, gm);
        }
        if gm.abs() <= 1e-13 || hi - lo <= 1e-15 * mid.abs().max(1.0) {
            break;
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LambdaSolution { lambda: best.0.exp(), residual: best.1 })
}

/// Per-mode Fermi weights with a certified bound on what was dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProbabilities {
    pub p: Vec<f64>,
    /// Bound on `Σ p_k` over the modes not listed (inside and beyond the spectrum).
    pub tail_bound: f64,
}

impl ModeProbabilities {
    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// Fermi weights in spectrum order, truncated once `E_k > μ` and `p_k < 1e−14`.
pub fn mode_probabilities(s: &Spectrum, t: f64, mu: f64) -> ModeProbabilities {
    let mut p = Vec::new();
    let mut rest = 0.0;
    let mut cut = false;
    for m in &s.modes {
        let pk = fermi_factor(t, mu, m.energy);
        if cut || (m.energy > mu && pk < 1e-14) {
            cut = true;
            rest += pk;
        } else {
            p.push(pk);
        }
    }
    let beyond = tail_bound(t, mu, s.e_max, s.modes.len());
    ModeProbabilities { p, tail_bound: rest + beyond }
}
