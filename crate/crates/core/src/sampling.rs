//! Exact samplers: sequential projection-DPP sampling, grand-canonical Bernoulli thinning,
//! and Haar eigenangles of U(n) and SO(n).

use std::f64::consts::{FRAC_1_PI, PI, TAU};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Domain, GroupKind};
use crate::quad::GaussLegendre;
use crate::spectral::{EigenMode, Spectrum};
use crate::thermo::mode_probabilities;

/// Cells in the base tabulation of each conditional density.
pub const BASE_CELLS: usize = 4096;
/// Gauss nodes per cell.
const NODES_PER_CELL: usize = 3;
/// Nodes of the within-cell inverse-CDF rule.
const REFINE_NODES: usize = 8;
/// Extra tabulation levels tried before declaring a density degenerate.
const MAX_REFINEMENTS: usize = 3;
/// Tolerated error in the tabulated mass of a conditional density, relative to its rank.
const MASS_TOL: f64 = 1e-6;
/// Tolerated deviation of the tabulated Gram matrix from the identity.
const ORTHONORMAL_TOL: f64 = 1e-8;

/// Reproducible randomness: a ChaCha20 key derived from `seed` and an independent `stream`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut r = ChaCha20Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }

    /// Generator for the `index`-th item of a batch; items occupy disjoint 2⁴⁰-word windows.
    pub fn rng_for(&self, index: u64) -> ChaCha20Rng {
        let mut r = self.rng();
        r.set_word_pos((index as u128) << 40);
        r
    }
}

/// A sorted point configuration inside a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub points: Vec<f64>,
    pub domain: Domain,
}

impl PointConfig {
    /// Sorts `points` and checks they are distinct and inside `domain`.
    pub fn new(mut points: Vec<f64>, domain: Domain) -> Result<Self> {
        points.sort_by(f64::total_cmp);
        if let Some(&x) = points.iter().find(|&&x| !domain.contains(x)) {
            return Err(Error::OutsideDomain(x));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("points are not strictly increasing".into()));
        }
        Ok(PointConfig { points, domain })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A finite family of orthonormal functions on a bounded interval.
pub trait ModeSet: Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> Domain;
    /// Writes `ψ_k(x)` for every mode into `out`.
    fn eval(&self, x: f64, out: &mut [Complex64]);

    fn interval(&self) -> (f64, f64) {
        self.domain().interval().expect("mode sets live on bounded intervals")
    }
}

/// Orthonormal modes whose projection kernel is the group kernel `Q_G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupModes {
    pub group: GroupKind,
    pub n: usize,
}

impl ModeSet for GroupModes {
    fn dim(&self) -> usize {
        self.n
    }

    fn domain(&self) -> Domain {
        self.group.domain()
    }

    fn eval(&self, x: f64, out: &mut [Complex64]) {
        let c = (2.0 * FRAC_1_PI).sqrt();
        for (j, o) in out.iter_mut().enumerate() {
            let jf = j as f64;
            *o = match self.group {
                GroupKind::U => {
                    let m = jf - (self.n as f64 - 1.0) / 2.0;
                    Complex64::from_polar(1.0 / TAU.sqrt(), m * x)
                }
                GroupKind::Sp => Complex64::new(c * ((jf + 1.0) * x).sin(), 0.0),
                GroupKind::SoEven if j == 0 => Complex64::new(FRAC_1_PI.sqrt(), 0.0),
                GroupKind::SoEven => Complex64::new(c * (jf * x).cos(), 0.0),
                GroupKind::SoOdd => Complex64::new(c * ((jf + 0.5) * x).sin(), 0.0),
            };
        }
    }
}

/// Eigenmodes of a solved boundary problem on [0, 2π].
#[derive(Debug, Clone)]
pub struct SpectralModes {
    pub modes: Vec<EigenMode>,
}

impl SpectralModes {
    /// The lowest `n` modes of `s`.
    pub fn lowest(s: &Spectrum, n: usize) -> Result<Self> {
        if s.modes.len() < n {
            return Err(Error::InsufficientSpectrum(format!("need {n} modes, spectrum has {}", s.modes.len())));
        }
        Ok(SpectralModes { modes: s.modes[..n].to_vec() })
    }
}

impl ModeSet for SpectralModes {
    fn dim(&self) -> usize {
        self.modes.len()
    }

    fn domain(&self) -> Domain {
        Domain::Box
    }

    fn eval(&self, x: f64, out: &mut [Complex64]) {
        for (m, o) in self.modes.iter().zip(out.iter_mut()) {
            *o = m.value(x);
        }
    }
}

/// Mode values on a composite Gauss grid.
struct ModeTable {
    a: f64,
    cells: usize,
    width: f64,
    weights: Vec<f64>,
    /// `values[node * dim + k] = ψ_k(node)`.
    values: Vec<Complex64>,
    dim: usize,
}

impl ModeTable {
    fn new<M: ModeSet + ?Sized>(modes: &M, cells: usize) -> Self {
        let (a, b) = modes.interval();
        let dim = modes.dim();
        let width = (b - a) / cells as f64;
        let gl = GaussLegendre::new(NODES_PER_CELL);
        let mut nodes = Vec::with_capacity(cells * NODES_PER_CELL);
        let mut weights = Vec::with_capacity(cells * NODES_PER_CELL);
        for c in 0..cells {
            let lo = a + width * c as f64;
            let (x, w) = gl.on(lo, lo + width);
            nodes.extend(x);
            weights.extend(w);
        }
        let values: Vec<Complex64> = nodes
            .par_chunks(256)
            .flat_map_iter(|chunk| {
                let mut buf = vec![Complex64::new(0.0, 0.0); dim];
                let mut out = Vec::with_capacity(chunk.len() * dim);
                for &x in chunk {
                    modes.eval(x, &mut buf);
                    out.extend_from_slice(&buf);
                }
                out.into_iter()
            })
            .collect();
        ModeTable { a, cells, width, weights, values, dim }
    }

    /// Max deviation of the tabulated Gram matrix from the identity.
    fn orthonormality_error(&self) -> f64 {
        let d = self.dim;
        let mut gram = vec![Complex64::new(0.0, 0.0); d * d];
        for (node, w) in self.weights.iter().enumerate() {
            let row = &self.values[node * d..(node + 1) * d];
            for i in 0..d {
                let ci = row[i].conj() * *w;
                for j in 0..d {
                    gram[i * d + j] += ci * row[j];
                }
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((gram[i * d + j] - target).norm());
            }
        }
        err
    }
}

/// Outcome of one sequential draw on a fixed table.
enum Draw {
    Done(Vec<f64>),
    Degenerate(String),
}

fn sequential_draw<M: ModeSet + ?Sized, R: Rng + ?Sized>(
    modes: &M,
    table: &ModeTable,
    subset: &[usize],
    rng: &mut R,
) -> Draw {
    let m = subset.len();
    let d = table.dim;
    let n_nodes = table.weights.len();
    let (lo_dom, hi_dom) = modes.interval();
    // residual ‖P_⊥ φ_S(x)‖² at every node
    let mut resid: Vec<f64> = (0..n_nodes)
        .map(|node| subset.iter().map(|&k| table.values[node * d + k].norm_sqr()).sum())
        .collect();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut points = Vec::with_capacity(m);
    let mut full = vec![Complex64::new(0.0, 0.0); d];
    let gl = GaussLegendre::new(REFINE_NODES);

    // conditional density at an arbitrary point
    let density = |x: f64, basis: &[Vec<Complex64>], full: &mut [Complex64]| -> f64 {
        modes.eval(x, full);
        let mut q: f64 = subset.iter().map(|&k| full[k].norm_sqr()).sum();
        for e in basis {
            let ip: Complex64 = subset.iter().zip(e).map(|(&k, ek)| ek.conj() * full[k]).sum();
            q -= ip.norm_sqr();
        }
        q.max(0.0)
    };

    for i in 0..m {
        let rank = (m - i) as f64;
        let masses: Vec<f64> = (0..table.cells)
            .map(|c| {
                (c * NODES_PER_CELL..(c + 1) * NODES_PER_CELL)
                    .map(|nd| table.weights[nd] * resid[nd].max(0.0))
                    .sum()
            })
            .collect();
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) || (total - rank).abs() > MASS_TOL * m as f64 {
            return Draw::Degenerate(format!("conditional mass {total} for rank {rank}"));
        }
        // choose a cell
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut cell = table.cells - 1;
        for (c, &mc) in masses.iter().enumerate() {
            if acc + mc > target {
                cell = c;
                break;
            }
            acc += mc;
        }
        let a = table.a + table.width * cell as f64;
        let b = if cell + 1 == table.cells { hi_dom } else { a + table.width };
        // invert the within-cell CDF with an 8-point rule
        let cdf = |x: f64, full: &mut [Complex64]| gl.integrate(a, x, |z| density(z, &basis, full));
        let cell_mass = cdf(b, &mut full);
        if !(cell_mass > 0.0) {
            return Draw::Degenerate(format!("empty cell [{a}, {b}]"));
        }
        let goal = rng.random::<f64>() * cell_mass;
        let (mut lo, mut hi) = (a, b);
        let mut x = a + (b - a) * goal / cell_mass;
        for _ in 0..100 {
            let f = cdf(x, &mut full) - goal;
            if f.abs() <= 1e-10 * cell_mass {
                break;
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let q = density(x, &basis, &mut full);
            let newton = x - f / q;
            x = if q > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * x.abs().max(1.0) {
                break;
            }
        }
        let x = x.clamp(lo_dom, hi_dom);
        // Gram–Schmidt downdate with the new point's feature vector
        modes.eval(x, &mut full);
        let mut v: Vec<Complex64> = subset.iter().map(|&k| full[k]).collect();
        for _ in 0..2 {
            for e in &basis {
                let ip: Complex64 = e.iter().zip(&v).map(|(ek, vk)| ek.conj() * vk).sum();
                for (vk, ek) in v.iter_mut().zip(e) {
                    *vk -= ip * ek;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            return Draw::Degenerate(format!("feature vector at {x} lies in the span of earlier points"));
        }
        v.iter_mut().for_each(|z| *z /= norm);
        for (node, r) in resid.iter_mut().enumerate() {
            let row = &table.values[node * d..(node + 1) * d];
            let ip: Complex64 = subset.iter().zip(&v).map(|(&k, ek)| ek.conj() * row[k]).sum();
            *r -= ip.norm_sqr();
        }
        basis.push(v);
        points.push(x);
    }
    Draw::Done(points)
}

/// Sequential projection-DPP sampler over a fixed orthonormal family.
pub struct ProjectionSampler<M: ModeSet> {
    modes: M,
    tables: [OnceLock<ModeTable>; MAX_REFINEMENTS + 1],
}

impl<M: ModeSet> ProjectionSampler<M> {
    /// Tabulates the modes and checks their orthonormality.
    pub fn new(modes: M) -> Result<Self> {
        if modes.dim() == 0 {
            return Err(Error::InvalidParameter("projection sampler needs at least one mode".into()));
        }
        let s = ProjectionSampler { modes, tables: Default::default() };
        let mut err = f64::INFINITY;
        for level in 0..=MAX_REFINEMENTS {
            err = s.table(level).orthonormality_error();
            if err <= ORTHONORMAL_TOL {
                return Ok(s);
            }
        }
        Err(Error::InvalidParameter(format!("modes are not orthonormal (Gram error {err:e})")))
    }

    pub fn modes(&self) -> &M {
        &self.modes
    }

    fn table(&self, level: usize) -> &ModeTable {
        self.tables[level].get_or_init(|| ModeTable::new(&self.modes, BASE_CELLS << level))
    }

    /// One configuration using the modes listed in `subset`.
    pub fn sample_subset<R: Rng + ?Sized>(&self, subset: &[usize], rng: &mut R) -> Result<PointConfig> {
        let mut last = String::new();
        for level in 0..=MAX_REFINEMENTS {
            match sequential_draw(&self.modes, self.table(level), subset, rng) {
                Draw::Done(p) => return PointConfig::new(p, self.modes.domain()),
                Draw::Degenerate(msg) => last = msg,
            }
        }
        Err(Error::DegenerateDensity(last))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PointConfig> {
        let all: Vec<usize> = (0..self.modes.dim()).collect();
        self.sample_subset(&all, rng)
    }
}

/// Exactly `modes.dim()` points from the projection DPP of `modes`.
pub fn sample_projection_dpp<M: ModeSet>(modes: M, rng: &RngSpec) -> Result<PointConfig> {
    ProjectionSampler::new(modes)?.sample(&mut rng.rng())
}

/// Grand-canonical sampler: Bernoulli(p_k) thinning followed by projection sampling.
pub struct GrandCanonicalSampler {
    inner: ProjectionSampler<SpectralModes>,
    pub p: Vec<f64>,
}

impl GrandCanonicalSampler {
    /// Requires the spectrum to be deep enough that the dropped Fermi mass is below 1e−12.
    pub fn new(s: &Spectrum, t: f64, mu: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("temperature must be positive, got {t}")));
        }
        let mp = mode_probabilities(s, t, mu);
        if mp.tail_bound > 1e-12 {
            return Err(Error::InsufficientSpectrum(format!(
                "dropped Fermi mass bound {:e} exceeds 1e-12",
                mp.tail_bound
            )));
        }
        let modes = SpectralModes { modes: s.modes[..mp.p.len()].to_vec() };
        Ok(GrandCanonicalSampler { inner: ProjectionSampler::new(modes)?, p: mp.p })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PointConfig> {
        let subset: Vec<usize> = self.p.iter().enumerate().filter(|(_, &p)| rng.random::<f64>() < p).map(|(k, _)| k).collect();
        if subset.is_empty() {
            return PointConfig::new(vec![], Domain::Box);
        }
        self.inner.sample_subset(&subset, rng)
    }
}

/// One grand-canonical configuration.
pub fn sample_grand_canonical(s: &Spectrum, t: f64, mu: f64, rng: &RngSpec) -> Result<PointConfig> {
    GrandCanonicalSampler::new(s, t, mu)?.sample(&mut rng.rng())
}

/// Exact Poisson-binomial law of the number of successes.
pub fn count_distribution(p: &[f64]) -> Vec<f64> {
    let mut pmf = vec![1.0];
    for &pk in p {
        let mut next = vec![0.0; pmf.len() + 1];
        for (j, &v) in pmf.iter().enumerate() {
            next[j] += v * (1.0 - pk);
            next[j + 1] += v * pk;
        }
        pmf = next;
    }
    pmf
}

/// `count` independent draws, item `i` seeded by `rng.rng_for(i)`.
pub fn sample_batch<F>(count: usize, rng: &RngSpec, draw: F) -> Result<Vec<PointConfig>>
where
    F: Fn(&mut ChaCha20Rng) -> Result<PointConfig> + Sync,
{
    (0..count).into_par_iter().map(|i| draw(&mut rng.rng_for(i as u64))).collect()
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with `R`'s diagonal phases removed.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = DMatrix::from_fn(n, n, |_, _| Complex64::new(gaussian(rng) * s, gaussian(rng) * s));
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        q.column_mut(j).scale_mut_complex(ph);
    }
    q
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, s: Complex64);
}

impl<S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>> ScaleComplex
    for nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>
{
    fn scale_mut_complex(&mut self, s: Complex64) {
        for z in self.iter_mut() {
            *z *= s;
        }
    }
}

/// Haar-distributed orthogonal matrix (sign-corrected real QR).
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let z = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let (mut q, r) = z.qr().unpack();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Haar-distributed special orthogonal matrix, by rejection on `det = +1`.
pub fn haar_special_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let q = haar_orthogonal(n, rng);
        if q.determinant() > 0.0 {
            return q;
        }
    }
}

fn unitary_angles(u: DMatrix<Complex64>) -> Option<Vec<f64>> {
    let n = u.nrows();
    let ev: DVector<Complex64> = u.schur().eigenvalues()?;
    let mut a: Vec<f64> = ev.iter().map(|z| z.arg().rem_euclid(TAU)).collect();
    if a.len() != n || a.iter().any(|v| !v.is_finite()) {
        return None;
    }
    a.sort_by(f64::total_cmp);
    // arg may round to exactly 2π
    for v in a.iter_mut() {
        if *v >= TAU {
            *v = 0.0;
        }
    }
    a.sort_by(f64::total_cmp);
    Some(a)
}

/// Sorted eigenangles of a Haar unitary of size `n`.
pub fn haar_unitary_angles<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PointConfig> {
    if n == 0 {
        return Err(Error::InvalidParameter("Haar unitary needs n ≥ 1".into()));
    }
    for _ in 0..2 {
        if let Some(a) = unitary_angles(haar_unitary(n, rng)) {
            if let Ok(c) = PointConfig::new(a, Domain::Circle) {
                return Ok(c);
            }
        }
    }
    Err(Error::EigenFailure(format!("Schur decomposition of a {n}×{n} unitary failed twice")))
}

/// Nontrivial eigenangles in (0, π) of a special orthogonal matrix.
pub fn special_orthogonal_angles(q: &DMatrix<f64>) -> Option<Vec<f64>> {
    let n = q.nrows();
    let ev = q.complex_eigenvalues();
    let mut a: Vec<f64> = ev.iter().filter(|z| z.im > 1e-12).map(|z| z.arg()).collect();
    if a.len() != n / 2 {
        return None;
    }
    a.sort_by(f64::total_cmp);
    Some(a)
}

/// The `⌊n/2⌋` nontrivial eigenangles of a Haar SO(n) matrix.
pub fn haar_special_orthogonal_angles<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PointConfig> {
    if n < 2 {
        return Err(Error::InvalidParameter("Haar SO(n) needs n ≥ 2".into()));
    }
    for _ in 0..2 {
        let q = haar_special_orthogonal(n, rng);
        if let Some(a) = special_orthogonal_angles(&q) {
            if let Ok(c) = PointConfig::new(a, Domain::HalfCircle) {
                if c.points.iter().all(|&x| x > 0.0 && x < PI) {
                    return Ok(c);
                }
            }
        }
    }
    Err(Error::EigenFailure(format!("eigenangles of a {n}×{n} rotation are degenerate twice")))
}

/// Sorted Haar U(n) eigenangles.
pub fn sample_haar_unitary_angles(n: usize, rng: &RngSpec) -> Result<PointConfig> {
    haar_unitary_angles(n, &mut rng.rng())
}

/// Sorted nontrivial Haar SO(n) eigenangles.
pub fn sample_haar_special_orthogonal_angles(n: usize, rng: &RngSpec) -> Result<PointConfig> {
    haar_special_orthogonal_angles(n, &mut rng.rng())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_binomial_examples() {
        assert_eq!(count_distribution(&[1.0, 1.0, 1.0]), vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(count_distribution(&[0.5, 0.5]), vec![0.25, 0.5, 0.25]);
        let pmf = count_distribution(&[0.1, 0.7, 0.33, 0.9, 0.5]);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rng_is_reproducible() {
        let s = RngSpec::new(7, 3);
        let a: Vec<u64> = (0..4).map(|_| s.rng().random()).collect();
        let b: Vec<u64> = (0..4).map(|_| s.rng().random()).collect();
        assert_eq!(a, b);
        assert_ne!(s.rng_for(0).random::<u64>(), s.rng_for(1).random::<u64>());
    }

    #[test]
    fn group_modes_are_orthonormal() {
        for g in [GroupKind::U, GroupKind::Sp, GroupKind::SoEven, GroupKind::SoOdd] {
            let t = ModeTable::new(&GroupModes { group: g, n: 5 }, BASE_CELLS);
            assert!(t.orthonormality_error() < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn dpp_point_count_and_determinism() {
        let s = ProjectionSampler::new(GroupModes { group: GroupKind::Sp, n: 4 }).unwrap();
        let spec = RngSpec::new(11, 0);
        let a = s.sample(&mut spec.rng()).unwrap();
        let b = s.sample(&mut spec.rng()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert!(a.points.iter().all(|&x| x > 0.0 && x < PI));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut r = RngSpec::new(1, 0).rng();
        let u = haar_unitary(5, &mut r);
        let e = (u.adjoint() * &u - DMatrix::identity(5, 5)).norm();
        assert!(e < 1e-12);
        let a = haar_unitary_angles(5, &mut r).unwrap();
        assert_eq!(a.len(), 5);
    }

    #[test]
    fn haar_so_odd_has_unit_eigenvalue() {
        let mut r = RngSpec::new(2, 0).rng();
        let q = haar_special_orthogonal(5, &mut r);
        assert!((q.determinant() - 1.0).abs() < 1e-12);
        let ev = q.complex_eigenvalues();
        assert!(ev.iter().any(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-10));
        assert_eq!(special_orthogonal_angles(&q).unwrap().len(), 2);
    }
}
