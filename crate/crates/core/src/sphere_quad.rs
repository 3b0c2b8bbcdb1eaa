//! Quadrature on S^{n-1}, unit vectors and rotations.
//!
//! The pole ē is the last coordinate axis. For n = 3 the standard grid is a
//! Gauss–Legendre rule in t = u·ē, applied separately on each hemisphere,
//! times a midpoint-trapezoid rule in azimuth. With `level = L` it has 2L
//! polar and 4L azimuthal nodes (default L = 32, i.e. 64 × 128). For n > 3 the grid is an antipodally symmetric
//! low-discrepancy point set with equal weights.

use crate::error::{IsovalError, Result};
use crate::linalg::{dot, norm, Matrix};
use crate::scalar::{csum, CompensatedSum, Real};
use crate::special::{gauss_legendre_on, sphere_area};
use rand::Rng;
use rand_distr::StandardNormal;
use std::io::Write;
use std::sync::Arc;

pub const DEFAULT_LEVEL: usize = 32;

/// Direction on S^{n-1}.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector<T>(Vec<T>);

impl<T: Real> UnitVector<T> {
    /// Normalises `v`; fails on zero or non-finite input.
    pub fn new(v: Vec<T>) -> Result<Self> {
        let r = norm(&v);
        if !r.is_finite() || r <= T::zero() {
            return Err(IsovalError::Degenerate("cannot normalise a zero or non-finite vector".into()));
        }
        Ok(Self(v.into_iter().map(|x| x / r).collect()))
    }

    /// Wraps a vector the caller guarantees to be of unit length.
    pub fn new_unchecked(v: Vec<T>) -> Self {
        debug_assert!((norm(&v) - T::one()).abs() < T::lit(1e-6));
        Self(v)
    }

    /// The pole ē = e_n.
    pub fn pole(n: usize) -> Self {
        let mut v = vec![T::zero(); n];
        v[n - 1] = T::one();
        Self(v)
    }

    pub fn axis(n: usize, i: usize) -> Self {
        let mut v = vec![T::zero(); n];
        v[i] = T::one();
        Self(v)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let v: Vec<T> = (0..n).map(|_| T::lit(standard_normal(rng))).collect();
            if let Ok(u) = Self::new(v) {
                return u;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn dot(&self, other: &[T]) -> T {
        dot(&self.0, other)
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|&x| -x).collect())
    }
}

impl<T> AsRef<[T]> for UnitVector<T> {
    fn as_ref(&self) -> &[T] {
        &self.0
    }
}

pub(crate) fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

#[derive(Debug)]
struct GridData<T> {
    dim: usize,
    level: usize,
    coords: Vec<T>,
    weights: Vec<T>,
}

/// Weighted node set on S^{n-1}. Cheap to clone.
#[derive(Clone, Debug)]
pub struct SphericalGrid<T> {
    data: Arc<GridData<T>>,
}

impl<T: Real> SphericalGrid<T> {
    pub fn dim(&self) -> usize {
        self.data.dim
    }

    pub fn level(&self) -> usize {
        self.data.level
    }

    pub fn len(&self) -> usize {
        self.data.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        let n = self.data.dim;
        &self.data.coords[i * n..(i + 1) * n]
    }

    pub fn weight(&self, i: usize) -> T {
        self.data.weights[i]
    }

    pub fn weights(&self) -> &[T] {
        &self.data.weights
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&[T], T)> + '_ {
        self.data.coords.chunks_exact(self.data.dim).zip(self.data.weights.iter().copied())
    }

    pub fn same_as(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
    }

    /// Rows `u₁,…,u_n,w`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (1..=self.dim()).map(|i| format!("u{i}")).chain(["w".into()]).collect();
        writeln!(out, "{}", header.join(","))?;
        for (u, w) in self.nodes() {
            let row: Vec<String> = u.iter().chain([w].iter()).map(|x| format!("{:e}", x.as_f64())).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Direction-adapted rule matched to this grid's resolution.
    pub fn polar_rule(&self) -> PolarRule<T> {
        let l = self.level().max(4);
        PolarRule::new(l, 2 * l)
    }
}

/// Builds the standard grid on S^{n-1}.
pub fn make_grid<T: Real>(n: usize, level: usize) -> Result<SphericalGrid<T>> {
    if n < 3 {
        return Err(IsovalError::Dimension(n));
    }
    if level == 0 {
        return Err(IsovalError::InvalidParameter("grid level must be at least 1".into()));
    }
    let data = if n == 3 { product_grid(level) } else { qmc_grid(n, level) };
    Ok(SphericalGrid { data: Arc::new(data) })
}

fn product_grid<T: Real>(level: usize) -> GridData<T> {
    let n_polar = 2 * level;
    let n_azimuth = 4 * level;
    let mut ts = Vec::with_capacity(n_polar);
    let mut wts = Vec::with_capacity(n_polar);
    for (t, w) in gauss_legendre_on(level, -T::one(), T::zero()).chain(gauss_legendre_on(level, T::zero(), T::one())) {
        ts.push(t);
        wts.push(w);
    }
    let dphi = T::TAU() / T::from_usize_lossy(n_azimuth);
    let mut coords = Vec::with_capacity(3 * n_polar * n_azimuth);
    let mut weights = Vec::with_capacity(n_polar * n_azimuth);
    for (&t, &wt) in ts.iter().zip(&wts) {
        let r = (T::one() - t * t).max(T::zero()).sqrt();
        for k in 0..n_azimuth {
            let phi = (T::from_usize_lossy(k) + T::lit(0.5)) * dphi;
            coords.extend_from_slice(&[r * phi.cos(), r * phi.sin(), t]);
            weights.push(wt * dphi);
        }
    }
    GridData { dim: 3, level, coords, weights }
}

const PRIMES: [u32; 24] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

fn qmc_grid<T: Real>(n: usize, level: usize) -> GridData<T> {
    assert!(n + 1 < PRIMES.len(), "quasi-Monte-Carlo grid supports n <= 22");
    let half = 512 * level;
    let mut coords = Vec::with_capacity(2 * half * n);
    let mut idx = 1u64;
    let mut kept = 0;
    while kept < half {
        // Box–Muller on consecutive Halton coordinates gives Gaussian vectors
        let mut g = Vec::with_capacity(n + 1);
        let mut d = 0;
        while g.len() < n {
            let u1 = 1.0 - radical_inverse(idx, PRIMES[d]);
            let u2 = radical_inverse(idx, PRIMES[d + 1]);
            let r = (-2.0 * u1.ln()).sqrt();
            let a = std::f64::consts::TAU * u2;
            g.push(r * a.cos());
            g.push(r * a.sin());
            d += 2;
        }
        g.truncate(n);
        idx += 1;
        let r: f64 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r < 1e-12 {
            continue;
        }
        let p: Vec<T> = g.iter().map(|x| T::lit(x / r)).collect();
        coords.extend(p.iter().copied());
        coords.extend(p.iter().map(|&x| -x));
        kept += 1;
    }
    let total = 2 * half;
    let w = sphere_area::<T>(n) / T::from_usize_lossy(total);
    GridData { dim: n, level, coords, weights: vec![w; total] }
}

/// Σ f(uᵢ)·wᵢ; fails if `f` is non-finite at a node.
pub fn integrate<T: Real, F: Fn(&[T]) -> T>(f: F, grid: &SphericalGrid<T>) -> Result<T> {
    let mut acc = CompensatedSum::new();
    for (u, w) in grid.nodes() {
        let v = f(u);
        if !v.is_finite() {
            return Err(IsovalError::NonFinite(format!("integrand at node {u:?}")));
        }
        acc.add(v * w);
    }
    Ok(acc.value())
}

/// Σ vᵢ·wᵢ for node-aligned samples.
pub fn integrate_values<T: Real>(values: &[T], grid: &SphericalGrid<T>) -> Result<T> {
    if values.len() != grid.len() {
        return Err(IsovalError::DimensionMismatch { expected: grid.len(), got: values.len() });
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(IsovalError::NonFinite(format!("sample {bad}")));
    }
    Ok(csum(values.iter().zip(grid.weights()).map(|(&v, &w)| v * w)))
}

/// Element of SO(n).
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation<T> {
    matrix: Matrix<T>,
}

impl<T: Real> Rotation<T> {
    pub fn identity(n: usize) -> Self {
        Self { matrix: Matrix::identity(n) }
    }

    /// Accepts `m` if it is orthogonal with determinant +1 (tolerance `tol`).
    pub fn from_matrix(m: Matrix<T>, tol: T) -> Result<Self> {
        let n = m.dim();
        let orth = m.mul(&m.transpose()).max_abs_diff(&Matrix::identity(n));
        let det = m.determinant();
        if orth > tol || (det - T::one()).abs() > tol {
            return Err(IsovalError::InvalidParameter(format!(
                "matrix is not a rotation (orthogonality defect {orth}, det {det})"
            )));
        }
        Ok(Self { matrix: m })
    }

    /// Haar-distributed random rotation (QR of a Gaussian matrix).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let mut cols: Vec<Vec<T>> = Vec::with_capacity(n);
            let mut ok = true;
            for _ in 0..n {
                let mut v: Vec<T> = (0..n).map(|_| T::lit(standard_normal(rng))).collect();
                for c in &cols {
                    let d = dot(&v, c);
                    for (vi, &ci) in v.iter_mut().zip(c) {
                        *vi -= d * ci;
                    }
                }
                let r = norm(&v);
                if r < T::lit(1e-8) {
                    ok = false;
                    break;
                }
                cols.push(v.into_iter().map(|x| x / r).collect());
            }
            if !ok {
                continue;
            }
            let mut m = Matrix::from_rows(&cols).transpose();
            if m.determinant() < T::zero() {
                for i in 0..n {
                    m.set(i, 0, -m.get(i, 0));
                }
            }
            return Self { matrix: m };
        }
    }

    /// Random rotation fixing the pole ē.
    pub fn random_fixing_pole<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let sub = Rotation::<T>::random(n - 1, rng);
        let mut m = Matrix::identity(n);
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                m.set(i, j, sub.matrix.get(i, j));
            }
        }
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        self.matrix.apply(v)
    }

    pub fn apply_inverse(&self, v: &[T]) -> Vec<T> {
        self.matrix.apply_transpose(v)
    }

    pub fn inverse(&self) -> Self {
        Self { matrix: self.matrix.transpose() }
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.mul(&other.matrix) }
    }
}

/// Rotation carrying the pole ē onto `u`.
///
/// Geodesic (Rodrigues) rotation in span{ē, u} when u·ē ≥ 0. For u·ē < 0 the
/// rotation first turns ē to −ē by π in the plane of e₂ and ē, then applies
/// the geodesic rotation −ē → u, which keeps the construction well
/// conditioned up to and including u = −ē.
pub fn rotation_to<T: Real>(u: &UnitVector<T>) -> Rotation<T> {
    let n = u.dim();
    let pole = UnitVector::<T>::pole(n);
    let c = u.coords()[n - 1];
    if c >= T::zero() {
        return Rotation { matrix: geodesic(pole.coords(), u.coords()) };
    }
    let mut flip = Matrix::identity(n);
    flip.set(n - 1, n - 1, -T::one());
    flip.set(1, 1, -T::one());
    let geo = geodesic(pole.neg().coords(), u.coords());
    Rotation { matrix: geo.mul(&flip) }
}

/// R = I + K + K²/(1 + a·b), K = b aᵀ − a bᵀ, mapping `a` onto `b`.
fn geodesic<T: Real>(a: &[T], b: &[T]) -> Matrix<T> {
    let n = a.len();
    let c = dot(a, b);
    let denom = T::one() + c;
    let mut m = Matrix::identity(n);
    // K² = (b aᵀ − a bᵀ)² = c(b aᵀ + a bᵀ) − b bᵀ − a aᵀ  for unit a, b
    for i in 0..n {
        for j in 0..n {
            let k = b[i] * a[j] - a[i] * b[j];
            let k2 = c * (b[i] * a[j] + a[i] * b[j]) - b[i] * b[j] - a[i] * a[j];
            m.set(i, j, m.get(i, j) + k + k2 / denom);
        }
    }
    m
}

/// Product rule in a local polar frame: Gauss–Legendre in θ on each
/// hemisphere times midpoint-trapezoid in azimuth. Used to integrate
/// integrands whose singular set is a latitude circle around a known pole.
#[derive(Clone, Debug)]
pub struct PolarRule<T> {
    /// (cos θ, sin θ, weight including sin θ dθ)
    pub polar: Vec<(T, T, T)>,
    /// (cos φ, sin φ, weight)
    pub azimuth: Vec<(T, T, T)>,
}

impl<T: Real> PolarRule<T> {
    pub fn new(per_hemisphere: usize, azimuth: usize) -> Self {
        let half_pi = T::FRAC_PI_2();
        let mut polar = Vec::with_capacity(2 * per_hemisphere);
        for (a, b) in [(T::zero(), half_pi), (half_pi, T::PI())] {
            for (theta, w) in gauss_legendre_on(per_hemisphere, a, b) {
                polar.push((theta.cos(), theta.sin(), w * theta.sin()));
            }
        }
        let dphi = T::TAU() / T::from_usize_lossy(azimuth);
        let azimuth = (0..azimuth)
            .map(|k| {
                let phi = (T::from_usize_lossy(k) + T::lit(0.5)) * dphi;
                (phi.cos(), phi.sin(), dphi)
            })
            .collect();
        Self { polar, azimuth }
    }

    /// Same polar rule with a single azimuth node of weight 2π, exact for
    /// integrands that are zonal about the rule's pole.
    pub fn zonal(&self) -> Self {
        Self { polar: self.polar.clone(), azimuth: vec![(T::one(), T::zero(), T::TAU())] }
    }

    /// Calls `f(y, w)` for every node y = R·(sinθ cosφ, sinθ sinφ, cosθ),
    /// where R carries ē onto `pole` (n = 3).
    pub fn for_each_around<F: FnMut(&[T; 3], T)>(&self, pole: &UnitVector<T>, mut f: F) {
        let r = rotation_to(pole);
        let m = r.matrix();
        let col = |j: usize| [m.get(0, j), m.get(1, j), m.get(2, j)];
        let (c0, c1, c2) = (col(0), col(1), col(2));
        for &(ct, st, wt) in &self.polar {
            for &(cp, sp, wp) in &self.azimuth {
                let (x, y, z) = (st * cp, st * sp, ct);
                let p = [
                    c0[0] * x + c1[0] * y + c2[0] * z,
                    c0[1] * x + c1[1] * y + c2[1] * z,
                    c0[2] * x + c1[2] * y + c2[2] * z,
                ];
                f(&p, wt * wp);
            }
        }
    }
}
