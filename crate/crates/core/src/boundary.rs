//! Quantum boundary conditions for the free Laplacian on (0, 2π).
//!
//! A self-adjoint realisation of −d²/dx² on the interval is fixed by a 2×2
//! unitary `U`. With `ψ₋ = ψ(2π)`, `ψ₊ = ψ(0)` and ordinary one-sided
//! derivatives `ψ′₋ = ψ′(2π)`, `ψ′₊ = ψ′(0)`, the domain condition used here is
//!
//! ```text
//! (ψ₋ − iψ′₋, ψ₊ + iψ′₊)ᵀ = U (ψ₋ + iψ′₋, ψ₊ − iψ′₊)ᵀ
//! ```
//!
//! Written with outward normal derivatives `n = (ψ′(2π), −ψ′(0))` this reads
//! `v − i n = U (v + i n)`. In this orientation the classical table holds as
//! stated: `σ₁` is periodic, `−I` Dirichlet, `I` Neumann, `−σ₃` Zaremba
//! (`ψ(2π) = 0`, `ψ′(0) = 0`) and `e^{iα} I` is Robin with
//! `ψ′(0) = tan(α/2) ψ(0)`, `ψ′(2π) = −tan(α/2) ψ(2π)` (repulsive for
//! `α ∈ (0, π)`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Max-norm tolerance on `U U† − I`.
pub const UNITARITY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-major 2×2 complex matrix.
pub type Mat2 = [Complex64; 4];

/// A 2×2 unitary boundary matrix, optionally tagged with the preset it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMatrix {
    pub entries: Mat2,
    pub label: Option<String>,
    pub params: Vec<f64>,
}

/// Named boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    Periodic,
    PseudoPeriodic { alpha: f64 },
    Dirichlet,
    Neumann,
    Zaremba,
    Robin { alpha: f64 },
    Delta { c: f64 },
    /// Dirichlet at 0 and Robin with coupling `tan(α/2)` at 2π.
    DirichletRobin { alpha: f64 },
}

impl Preset {
    pub const NAMES: [&'static str; 8] = [
        "periodic",
        "pseudo_periodic",
        "dirichlet",
        "neumann",
        "zaremba",
        "robin",
        "delta",
        "dirichlet_robin",
    ];

    /// Parses a preset name with its real parameters.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let want = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "preset `{name}` takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        let preset = match name {
            "periodic" => {
                want(0)?;
                Preset::Periodic
            }
            "pseudo_periodic" => {
                want(1)?;
                Preset::PseudoPeriodic { alpha: params[0] }
            }
            "dirichlet" => {
                want(0)?;
                Preset::Dirichlet
            }
            "neumann" => {
                want(0)?;
                Preset::Neumann
            }
            "zaremba" => {
                want(0)?;
                Preset::Zaremba
            }
            "robin" => {
                want(1)?;
                Preset::Robin { alpha: params[0] }
            }
            "delta" => {
                want(1)?;
                Preset::Delta { c: params[0] }
            }
            "dirichlet_robin" => {
                want(1)?;
                Preset::DirichletRobin { alpha: params[0] }
            }
            other => return Err(Error::InvalidParameter(format!("unknown preset `{other}`"))),
        };
        preset.check_range()?;
        Ok(preset)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Periodic => "periodic",
            Preset::PseudoPeriodic { .. } => "pseudo_periodic",
            Preset::Dirichlet => "dirichlet",
            Preset::Neumann => "neumann",
            Preset::Zaremba => "zaremba",
            Preset::Robin { .. } => "robin",
            Preset::Delta { .. } => "delta",
            Preset::DirichletRobin { .. } => "dirichlet_robin",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Preset::PseudoPeriodic { alpha }
            | Preset::Robin { alpha }
            | Preset::DirichletRobin { alpha } => vec![alpha],
            Preset::Delta { c } => vec![c],
            _ => Vec::new(),
        }
    }

    fn check_range(&self) -> Result<()> {
        let angle_ok = |a: f64| a.is_finite() && a > 0.0 && a < 2.0 * std::f64::consts::PI;
        match *self {
            Preset::PseudoPeriodic { alpha }
            | Preset::Robin { alpha }
            | Preset::DirichletRobin { alpha }
                if !angle_ok(alpha) =>
            {
                Err(Error::InvalidParameter(format!(
                    "angle parameter {alpha} outside (0, 2π)"
                )))
            }
            Preset::Delta { c } if !c.is_finite() => {
                Err(Error::InvalidParameter(format!("delta strength {c} is not finite")))
            }
            _ => Ok(()),
        }
    }

    /// Robin-type coupling `tan(α/2)` for presets that carry one.
    pub fn coupling(&self) -> Option<f64> {
        match *self {
            Preset::Robin { alpha } | Preset::DirichletRobin { alpha } => Some((alpha / 2.0).tan()),
            Preset::Delta { c } => Some(c),
            _ => None,
        }
    }

    fn matrix(&self) -> Mat2 {
        match *self {
            Preset::Periodic => [ZERO, ONE, ONE, ZERO],
            Preset::PseudoPeriodic { alpha } => {
                // cos α σ₁ + sin α σ₂
                let e = Complex64::from_polar(1.0, alpha);
                [ZERO, e.conj(), e, ZERO]
            }
            Preset::Dirichlet => [-ONE, ZERO, ZERO, -ONE],
            Preset::Neumann => [ONE, ZERO, ZERO, ONE],
            Preset::Zaremba => [-ONE, ZERO, ZERO, ONE],
            Preset::Robin { alpha } => {
                let e = Complex64::from_polar(1.0, alpha);
                [e, ZERO, ZERO, e]
            }
            Preset::Delta { c } => {
                // (σ₁ + i c I / 2) / (1 − i c / 2): continuity plus ψ′(0) − ψ′(2π) = c ψ(0)
                let d = ONE / (ONE - I * (c / 2.0));
                let diag = I * (c / 2.0) * d;
                [diag, d, d, diag]
            }
            Preset::DirichletRobin { alpha } => {
                let e = Complex64::from_polar(1.0, alpha);
                [e, ZERO, ZERO, -ONE]
            }
        }
    }
}

/// Builds a preset boundary matrix from its name and parameters.
pub fn make_preset(name: &str, params: &[f64]) -> Result<BoundaryMatrix> {
    Ok(BoundaryMatrix::from_preset(Preset::from_name(name, params)?))
}

impl BoundaryMatrix {
    pub fn from_preset(p: Preset) -> Self {
        BoundaryMatrix { entries: p.matrix(), label: Some(p.name().to_string()), params: p.params() }
    }

    pub fn from_entries(entries: Mat2) -> Self {
        BoundaryMatrix { entries, label: None, params: Vec::new() }
    }

    /// The preset this matrix was built from, if labelled.
    pub fn preset(&self) -> Option<Preset> {
        let label = self.label.as_deref()?;
        Preset::from_name(label, &self.params).ok()
    }

    /// Max-norm residual of `U U† − I`.
    pub fn unitarity_residual(&self) -> f64 {
        let u = &self.entries;
        let prod = mul(u, &adjoint(u));
        let id = [ONE, ZERO, ZERO, ONE];
        prod.iter().zip(id.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("boundary matrix has non-finite entries".into()));
        }
        let r = self.unitarity_residual();
        if r <= UNITARITY_TOL {
            Ok(())
        } else {
            Err(Error::NonUnitary(r))
        }
    }

    pub fn det(&self) -> Complex64 {
        det(&self.entries)
    }

    /// Largest finite Robin-type coupling `|tan(u/2)|` over the eigenphases `u` of `U`.
    ///
    /// Eigenvalues at −1 (Dirichlet-like channels) carry no finite coupling and are skipped.
    pub fn coupling_scale(&self) -> f64 {
        let (l1, l2) = eigenvalues(&self.entries);
        [l1, l2]
            .iter()
            .filter(|l| (*l + ONE).norm() > 1e-9)
            .map(|l| (l.arg() / 2.0).tan().abs())
            .fold(0.0, f64::max)
    }
}

/// Validates unitarity, returning `NonUnitary(residual)` on failure.
pub fn validate(u: &BoundaryMatrix) -> Result<()> {
    u.validate()
}

/// Boundary values and ordinary one-sided derivatives of a function on [0, 2π].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    /// ψ(2π)
    pub psi_minus: Complex64,
    /// ψ(0)
    pub psi_plus: Complex64,
    /// ψ′(2π)
    pub dpsi_minus: Complex64,
    /// ψ′(0)
    pub dpsi_plus: Complex64,
}

impl BoundaryData {
    pub fn new(psi_minus: Complex64, psi_plus: Complex64, dpsi_minus: Complex64, dpsi_plus: Complex64) -> Self {
        BoundaryData { psi_minus, psi_plus, dpsi_minus, dpsi_plus }
    }

    pub fn is_finite(&self) -> bool {
        [self.psi_minus, self.psi_plus, self.dpsi_minus, self.dpsi_plus]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Euclidean norm of `(v − i n) − U (v + i n)`; zero iff `d` satisfies the condition.
pub fn boundary_residual(u: &BoundaryMatrix, d: &BoundaryData) -> f64 {
    let lhs = [d.psi_minus - I * d.dpsi_minus, d.psi_plus + I * d.dpsi_plus];
    let rhs = [d.psi_minus + I * d.dpsi_minus, d.psi_plus - I * d.dpsi_plus];
    let ur = apply(&u.entries, &rhs);
    ((lhs[0] - ur[0]).norm_sqr() + (lhs[1] - ur[1]).norm_sqr()).sqrt()
}

pub(crate) fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub(crate) fn adjoint(a: &Mat2) -> Mat2 {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

pub(crate) fn det(a: &Mat2) -> Complex64 {
    a[0] * a[3] - a[1] * a[2]
}

pub(crate) fn inverse(a: &Mat2) -> Mat2 {
    let d = det(a);
    [a[3] / d, -a[1] / d, -a[2] / d, a[0] / d]
}

pub(crate) fn apply(a: &Mat2, v: &[Complex64; 2]) -> [Complex64; 2] {
    [a[0] * v[0] + a[1] * v[1], a[2] * v[0] + a[3] * v[1]]
}

pub(crate) fn eigenvalues(a: &Mat2) -> (Complex64, Complex64) {
    let half_tr = (a[0] + a[3]) / 2.0;
    let disc = (half_tr * half_tr - det(a)).sqrt();
    (half_tr + disc, half_tr - disc)
}

#[derive(Serialize, Deserialize)]
struct BoundaryMatrixJson {
    label: Option<String>,
    params: Vec<f64>,
    entries: [[f64; 2]; 4],
}

impl Serialize for BoundaryMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self.entries.map(|z| [z.re, z.im]);
        BoundaryMatrixJson { label: self.label.clone(), params: self.params.clone(), entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BoundaryMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = BoundaryMatrixJson::deserialize(d)?;
        Ok(BoundaryMatrix {
            entries: j.entries.map(|[re, im]| Complex64::new(re, im)),
            label: j.label,
            params: j.params,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn dirichlet_is_minus_identity() {
        let u = make_preset("dirichlet", &[]).unwrap();
        assert_eq!(u.entries, [-ONE, ZERO, ZERO, -ONE]);
        assert_eq!(u.label.as_deref(), Some("dirichlet"));
    }

    #[test]
    fn delta_zero_is_periodic() {
        let u = make_preset("delta", &[0.0]).unwrap();
        assert_eq!(u.entries, make_preset("periodic", &[]).unwrap().entries);
    }

    #[test]
    fn robin_at_pi_is_dirichlet() {
        let u = make_preset("robin", &[PI]).unwrap();
        let d = make_preset("dirichlet", &[]).unwrap();
        for (a, b) in u.entries.iter().zip(d.entries.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn presets_reject_bad_input() {
        assert!(make_preset("moebius", &[]).is_err());
        assert!(make_preset("robin", &[0.0]).is_err());
        assert!(make_preset("robin", &[2.0 * PI]).is_err());
        assert!(make_preset("pseudo_periodic", &[-1.0]).is_err());
        assert!(make_preset("dirichlet", &[1.0]).is_err());
        assert!(make_preset("delta", &[f64::NAN]).is_err());
    }

    #[test]
    fn validate_examples() {
        assert!(BoundaryMatrix::from_entries([ONE, ZERO, ZERO, ONE]).validate().is_ok());
        assert!(BoundaryMatrix::from_entries([ZERO, ONE, ONE, ZERO]).validate().is_ok());
        match BoundaryMatrix::from_entries([ONE, ZERO, ZERO, c(2.0)]).validate() {
            Err(Error::NonUnitary(r)) => assert_eq!(r, 3.0),
            other => panic!("expected NonUnitary, got {other:?}"),
        }
    }

    #[test]
    fn all_presets_are_unitary() {
        for p in [
            Preset::Periodic,
            Preset::PseudoPeriodic { alpha: 0.7 },
            Preset::Dirichlet,
            Preset::Neumann,
            Preset::Zaremba,
            Preset::Robin { alpha: 2.5 },
            Preset::Delta { c: -3.0 },
            Preset::Delta { c: 40.0 },
            Preset::DirichletRobin { alpha: PI / 2.0 },
        ] {
            BoundaryMatrix::from_preset(p).validate().unwrap();
        }
    }

    #[test]
    fn residual_examples() {
        let bd = |a: f64, b: f64, c_: f64, d: f64| BoundaryData::new(c(a), c(b), c(c_), c(d));
        let dir = make_preset("dirichlet", &[]).unwrap();
        assert_eq!(boundary_residual(&dir, &bd(0.0, 0.0, 1.0, 1.0)), 0.0);
        let per = make_preset("periodic", &[]).unwrap();
        assert_eq!(boundary_residual(&per, &bd(1.0, 1.0, 2.0, 2.0)), 0.0);
        let neu = make_preset("neumann", &[]).unwrap();
        // Neumann: the vector is (−2i, 0) for d = (1, 1, 1, 0).
        assert!((boundary_residual(&neu, &bd(1.0, 1.0, 1.0, 0.0)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let u = make_preset("robin", &[1.0]).unwrap();
        let s = serde_json::to_string(&u).unwrap();
        assert!(s.starts_with("{\"label\":\"robin\",\"params\":[1.0],\"entries\":[["));
        let back: BoundaryMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn coupling_scale_of_robin() {
        let u = make_preset("robin", &[PI / 2.0]).unwrap();
        assert!((u.coupling_scale() - 1.0).abs() < 1e-12);
        assert_eq!(make_preset("dirichlet", &[]).unwrap().coupling_scale(), 0.0);
    }
}
