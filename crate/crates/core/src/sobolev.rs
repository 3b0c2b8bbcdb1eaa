//! Functional forms: the BV inequality on characteristic functions of
//! convex bodies, the L_p inequality on sampled grid functions, the sharp
//! constants c_{n,p} and c̃_{n,p}, and the Gromov comparison.

use crate::bodies::{Body, SurfaceMeasure};
use crate::error::{IsovalError, Result};
use crate::scalar::{csum, Real};
use crate::special::{ball_volume, gamma, ln_gamma};
use crate::sphere_quad::{SphericalGrid, UnitVector};
use crate::valuations::{phi_mu, FieldIntegrator};
use crate::zonal::ZonalMeasure;
use crate::SCHEMA;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

fn check_sobolev_p<T: Real>(n: usize, p: T) -> Result<()> {
    let nf = T::from_usize_lossy(n);
    if !(p > T::one() && p < nf) {
        return Err(IsovalError::InvalidParameter(format!("need 1 < p < {n}, got {p}")));
    }
    Ok(())
}

/// ((n−p)/(p−1))^{1−1/p}·(Γ(n/p)Γ(n+1−n/p)/Γ(n))^{1/n}
pub fn tilde_c_np<T: Real>(n: usize, p: T) -> Result<T> {
    check_sobolev_p(n, p)?;
    let nf = T::from_usize_lossy(n);
    let one = T::one();
    let first = ((nf - p) / (p - one)).powf(one - one / p);
    let g = ln_gamma(nf / p) + ln_gamma(nf + one - nf / p) - ln_gamma(nf);
    Ok(first * (g / nf).exp())
}

/// c̃_{n,p}·n^{−1/n}·(nΓ(n/2)Γ((p+1)/2)/(√πΓ((n+p)/2)))^{1/p}
pub fn c_np<T: Real>(n: usize, p: T) -> Result<T> {
    let nf = T::from_usize_lossy(n);
    let one = T::one();
    let half = T::lit(0.5);
    let third = nf.ln() + ln_gamma(nf * half) + ln_gamma((p + one) * half) - half * T::PI().ln() - ln_gamma((nf + p) * half);
    Ok(tilde_c_np(n, p)? * (-nf.ln() / nf).exp() * (third / p).exp())
}

/// 2ω_{n−1}μ(S^{n−1})/(n^{1/n}ω_n)·‖f‖_{n/(n−1)}
pub fn theorem3_rhs<T: Real>(mu: &ZonalMeasure<T>, n: usize, f_norm: T) -> T {
    let nf = T::from_usize_lossy(n);
    T::lit(2.0) * ball_volume::<T>(n - 1) * mu.total_mass() / (nf.powf(T::one() / nf) * ball_volume::<T>(n)) * f_norm
}

/// ‖1_K‖_{n/(n−1)} = |K|^{(n−1)/n}
pub fn char_norm<T: Real>(k: &Body<T>) -> T {
    let nf = T::from_usize_lossy(k.dim());
    k.volume().powf((nf - T::one()) / nf)
}

/// Left side of the BV inequality for f = 1_K.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BvLhs<T> {
    /// (∫(∫h(Z^μ(u),ν)dS(K,ν))^{−n}du)^{−1/n} on the grid
    pub direct: T,
    /// n^{−1/n}·|Φ^{μ,∘}K|^{−1/n} with the grid polar volume
    pub via_polar: T,
    /// as `via_polar`, with the exact polar volume where one exists
    pub value: T,
}

pub fn bv_char_lhs<T: Real>(k: &Body<T>, mu: &ZonalMeasure<T>, grid: &SphericalGrid<T>) -> Result<BvLhs<T>> {
    let n = k.dim();
    let nf = T::from_usize_lossy(n);
    let integ = FieldIntegrator::new(k, mu, T::one(), grid)?;
    let vals: Vec<T> = (0..grid.len()).into_par_iter().map(|i| integ.eval_pow(grid.point(i))).collect();
    if vals.iter().any(|&v| !(v > T::zero())) {
        return Err(IsovalError::Degenerate("Φ^μ K has empty interior".into()));
    }
    let s = csum(vals.iter().zip(grid.weights()).map(|(&h, &w)| h.powi(-(n as i32)) * w));
    let direct = s.powf(-T::one() / nf);
    let field = phi_mu(k, mu, grid)?;
    let inv = -T::one() / nf;
    let via_polar = nf.powf(inv) * field.polar_volume_quadrature()?.powf(inv);
    let value = nf.powf(inv) * field.polar_volume()?.powf(inv);
    Ok(BvLhs { direct, via_polar, value })
}

/// (lhs, rhs) of the BV inequality for 1_K.
pub fn theorem3_check<T: Real>(k: &Body<T>, mu: &ZonalMeasure<T>, grid: &SphericalGrid<T>) -> Result<(BvLhs<T>, T)> {
    let lhs = bv_char_lhs(k, mu, grid)?;
    Ok((lhs, theorem3_rhs(mu, k.dim(), char_norm(k))))
}

/// The affine Sobolev–Zhang pair for 1_K: inner integral ∫|u·ν|dS(K,ν),
/// i.e. the discrete measure of total mass 1.
pub fn sobolev_zhang<T: Real>(k: &Body<T>, grid: &SphericalGrid<T>) -> Result<(BvLhs<T>, T)> {
    theorem3_check(k, &ZonalMeasure::discrete_poles(k.dim(), T::one())?, grid)
}

/// (n^{(n−1)/n}|Z^μ(ē)|^{1/n}/ω_n^{1/n}, n^{(n−1)/n}w(Z^μ(ē))/2)
pub fn gromov_compare<T: Real>(mu: &ZonalMeasure<T>, grid: &SphericalGrid<T>) -> Result<(T, T)> {
    if mu.dim() != 3 {
        return Err(IsovalError::ThreeDimensionalOnly("Gromov comparison"));
    }
    let nf = T::lit(3.0);
    let lead = nf.powf((nf - T::one()) / nf);
    let vol = mu.zonoid_volume_estimate(grid)?;
    let avg = lead * (vol / ball_volume::<T>(3)).powf(T::one() / nf);
    let thm3 = lead * mu.zonoid_mean_width() / T::lit(2.0);
    Ok((avg, thm3))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// exp(−|x|²)
    Gaussian,
    /// (1+|x|^{p/(p−1)})^{1−n/p}, shifted down to vanish at the box edge
    AubinTalenti,
    /// exp(−1/(1−|x|²)) on the unit ball
    Bump,
}

impl Profile {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "gaussian" => Some(Profile::Gaussian),
            "aubin-talenti" => Some(Profile::AubinTalenti),
            "bump" => Some(Profile::Bump),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Gaussian => "gaussian",
            Profile::AubinTalenti => "aubin-talenti",
            Profile::Bump => "bump",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RasterHeader {
    schema: String,
    dims: [usize; 3],
    #[serde(rename = "box")]
    bbox: [[f64; 2]; 3],
    spacing: f64,
}

/// Samples of f on a cubic lattice in R³, x-index slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    dims: [usize; 3],
    lo: [f64; 3],
    spacing: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(dims: [usize; 3], lo: [f64; 3], spacing: f64, values: Vec<f64>) -> Result<Self> {
        if dims.iter().any(|&d| d < 3) {
            return Err(IsovalError::InvalidParameter("grid function needs at least 3 samples per axis".into()));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(IsovalError::InvalidParameter(format!("spacing must be positive, got {spacing}")));
        }
        if values.len() != dims[0] * dims[1] * dims[2] {
            return Err(IsovalError::Parse(format!("raster holds {} values, header promises {}", values.len(), dims[0] * dims[1] * dims[2])));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(IsovalError::NonFinite("grid function sample".into()));
        }
        Ok(Self { dims, lo, spacing, values })
    }

    /// f sampled at m³ points spanning [−a, a]³.
    pub fn from_fn<F: Fn([f64; 3]) -> f64 + Sync>(m: usize, a: f64, f: F) -> Result<Self> {
        if m < 3 {
            return Err(IsovalError::InvalidParameter("grid function needs at least 3 samples per axis".into()));
        }
        let h = 2.0 * a / (m - 1) as f64;
        let values = (0..m * m * m)
            .into_par_iter()
            .map(|idx| {
                let (i, j, k) = (idx / (m * m), idx / m % m, idx % m);
                f([-a + i as f64 * h, -a + j as f64 * h, -a + k as f64 * h])
            })
            .collect();
        Self::new([m; 3], [-a; 3], h, values)
    }

    /// x ↦ profile(λx) on m³ points spanning [−a, a]³.
    pub fn profile(profile: Profile, p: f64, scale: f64, m: usize, a: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(IsovalError::InvalidParameter(format!("profile scale must be positive, got {scale}")));
        }
        match profile {
            Profile::Gaussian => Self::from_fn(m, a, |x| (-scale * scale * norm2(x)).exp()),
            Profile::Bump => Self::from_fn(m, a, |x| {
                let s = scale * scale * norm2(x);
                if s < 1.0 {
                    (-1.0 / (1.0 - s)).exp()
                } else {
                    0.0
                }
            }),
            Profile::AubinTalenti => {
                check_sobolev_p(3, p)?;
                let q = p / (p - 1.0);
                let e = 1.0 - 3.0 / p;
                let at = move |r: f64| (1.0 + (scale * r).powf(q)).powf(e);
                let edge = at(a);
                Self::from_fn(m, a, |x| (at(norm2(x).sqrt()) - edge).max(0.0))
            }
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bbox(&self) -> [[f64; 2]; 3] {
        let mut b = [[0.0; 2]; 3];
        for d in 0..3 {
            b[d] = [self.lo[d], self.lo[d] + (self.dims[d] - 1) as f64 * self.spacing];
        }
        b
    }

    fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.dims[1] + j) * self.dims[2] + k]
    }

    /// Largest |f| on the outer faces of the box.
    pub fn boundary_max(&self) -> f64 {
        let [a, b, c] = self.dims;
        let mut m: f64 = 0.0;
        for i in 0..a {
            for j in 0..b {
                for k in 0..c {
                    if i == 0 || j == 0 || k == 0 || i == a - 1 || j == b - 1 || k == c - 1 {
                        m = m.max(self.at(i, j, k).abs());
                    }
                }
            }
        }
        m
    }

    /// ∇f by central differences, one-sided on the box faces.
    pub fn gradient(&self) -> Vec<[f64; 3]> {
        let [a, b, c] = self.dims;
        let h = self.spacing;
        let diff = |lo: f64, hi: f64, span: usize| (hi - lo) / (span as f64 * h);
        (0..a * b * c)
            .into_par_iter()
            .map(|idx| {
                let (i, j, k) = (idx / (b * c), idx / c % b, idx % c);
                let axis = |x: usize, n: usize, get: &dyn Fn(usize) -> f64| {
                    let (l, r) = (x.saturating_sub(1), (x + 1).min(n - 1));
                    diff(get(l), get(r), r - l)
                };
                [
                    axis(i, a, &|t| self.at(t, j, k)),
                    axis(j, b, &|t| self.at(i, t, k)),
                    axis(k, c, &|t| self.at(i, j, t)),
                ]
            })
            .collect()
    }

    /// (Σ|f|^q h³)^{1/q}
    pub fn lp_norm(&self, q: f64) -> f64 {
        let h3 = self.spacing.powi(3);
        csum(self.values.iter().map(|v| v.abs().powf(q) * h3)).powf(1.0 / q)
    }

    /// JSON header line, then the samples as little-endian f64.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let header = RasterHeader { schema: SCHEMA.to_string(), dims: self.dims, bbox: self.bbox(), spacing: self.spacing };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn read<R: Read>(mut input: R) -> Result<Self> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| IsovalError::Parse("missing raster header line".into()))?;
        let header: RasterHeader = serde_json::from_slice(&bytes[..nl])?;
        let raw = &bytes[nl + 1..];
        if raw.len() % 8 != 0 {
            return Err(IsovalError::Parse("raster length is not a multiple of 8 bytes".into()));
        }
        let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let lo = [header.bbox[0][0], header.bbox[1][0], header.bbox[2][0]];
        Self::new(header.dims, lo, header.spacing, values)
    }
}

fn norm2(x: [f64; 3]) -> f64 {
    x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
}

/// |∇f|^p dx pushed to the gradient directions: exact atoms when the kernel
/// is constant or quadratic in u·v, otherwise binned into cells of equal
/// (t, φ) extent with weighted mean directions.
fn gradient_measure(f: &GridFunction, p: f64, exact: bool) -> Result<SurfaceMeasure<f64>> {
    let h3 = f.spacing.powi(3);
    let grads = f.gradient();
    if exact {
        let atoms: Vec<(UnitVector<f64>, f64)> = grads
            .iter()
            .filter_map(|g| {
                let r = norm2(*g).sqrt();
                (r > 0.0).then(|| (UnitVector::new_unchecked(vec![g[0] / r, g[1] / r, g[2] / r]), r.powf(p) * h3))
            })
            .collect();
        return SurfaceMeasure::new(3, atoms, p);
    }
    let (nt, nphi) = (64usize, 128usize);
    let mut acc = vec![([0.0f64; 3], 0.0f64); nt * nphi];
    for g in &grads {
        let r = norm2(*g).sqrt();
        if r == 0.0 {
            continue;
        }
        let u = [g[0] / r, g[1] / r, g[2] / r];
        let it = (((u[2] + 1.0) * 0.5 * nt as f64) as usize).min(nt - 1);
        let phi = u[1].atan2(u[0]).rem_euclid(std::f64::consts::TAU);
        let ip = ((phi / std::f64::consts::TAU * nphi as f64) as usize).min(nphi - 1);
        let w = r.powf(p) * h3;
        let cell = &mut acc[it * nphi + ip];
        for d in 0..3 {
            cell.0[d] += w * u[d];
        }
        cell.1 += w;
    }
    let atoms: Vec<(UnitVector<f64>, f64)> = acc
        .into_iter()
        .filter(|c| c.1 > 0.0)
        .map(|(s, w)| {
            let r = norm2(s).sqrt();
            (UnitVector::new_unchecked(vec![s[0] / r, s[1] / r, s[2] / r]), w)
        })
        .collect();
    SurfaceMeasure::new(3, atoms, p)
}

/// (lhs, rhs) of the L_p inequality
/// (∫(∫h(Z_p^μ(u),∇f)^p dx)^{−n/p}du)^{−1/n} ≥ c_{n,p}μ(S^{n−1})^{1/p}‖f‖_{p*}.
pub fn lp_sobolev_check(f: &GridFunction, mu: &ZonalMeasure<f64>, p: f64, grid: &SphericalGrid<f64>) -> Result<(f64, f64)> {
    check_sobolev_p(3, p)?;
    if mu.dim() != 3 || grid.dim() != 3 {
        return Err(IsovalError::ThreeDimensionalOnly("grid-function Sobolev check"));
    }
    if f.values.iter().all(|&v| v == 0.0) {
        return Err(IsovalError::Degenerate("zero function".into()));
    }
    let kernel = mu.kernel_fn(p);
    let exact = kernel.is_constant() || kernel.quadratic().is_some();
    let measure = gradient_measure(f, p, exact)?;
    let integ = FieldIntegrator::from_measure(measure, mu, p)?;
    let e = -3.0 / p;
    let vals: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| integ.eval_pow(grid.point(i)).powf(e) * grid.weight(i)).collect();
    let lhs = csum(vals).powf(-1.0 / 3.0);
    let pstar = 3.0 * p / (3.0 - p);
    let rhs = c_np(3, p)? * mu.total_mass().powf(1.0 / p) * f.lp_norm(pstar);
    Ok((lhs, rhs))
}

/// Γ-only evaluation of c_{n,p}, used to cross-check the log-gamma route.
pub fn c_np_direct<T: Real>(n: usize, p: T) -> Result<T> {
    check_sobolev_p(n, p)?;
    let nf = T::from_usize_lossy(n);
    let one = T::one();
    let half = T::lit(0.5);
    let a = ((nf - p) / (p - one)).powf(one - one / p);
    let b = (gamma(nf / p) * gamma(nf + one - nf / p) / gamma(nf + one)).powf(one / nf);
    let c = (nf * gamma(nf * half) * gamma((p + one) * half) / (T::PI().sqrt() * gamma((nf + p) * half))).powf(one / p);
    Ok(a * b * c)
}
