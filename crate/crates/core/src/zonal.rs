//! Even zonal measures on S^{n-1} and the support functions of their
//! (L_p) zonoids.
//!
//! A measure is stored through its profile in t = |u·ē|: latitude atoms
//! (each a symmetric pair of circles at heights ±t), a multiple of spherical
//! Lebesgue measure, and an optional density g(|t|) with respect to it.

use crate::error::{IsovalError, Result};
use crate::hull::polar_of_hull_volume;
use crate::scalar::{csum, Real};
use crate::special::{ball_volume, gamma, gauss_legendre, sphere_area};
use crate::sphere_quad::SphericalGrid;
use crate::valuations::a_np;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    DiscretePoles,
    Equatorial,
    Lebesgue,
    Custom,
}

pub type DensityFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
struct Density<T> {
    g: DensityFn<T>,
    scale: T,
    mass: T,
}

#[derive(Clone)]
pub struct ZonalMeasure<T> {
    dim: usize,
    /// (t, mass) with t ∈ [0, 1]; the mass is split evenly over ±t.
    atoms: Vec<(T, T)>,
    uniform: T,
    density: Option<Density<T>>,
    kind: MeasureKind,
}

impl<T: Real> fmt::Debug for ZonalMeasure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZonalMeasure")
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .field("atoms", &self.atoms)
            .field("uniform", &self.uniform)
            .field("density_mass", &self.density.as_ref().map(|d| d.mass))
            .finish()
    }
}

fn check_mass<T: Real>(mass: T) -> Result<()> {
    if !(mass > T::zero()) || !mass.is_finite() {
        return Err(IsovalError::ZeroMass);
    }
    Ok(())
}

fn check_dim(n: usize) -> Result<()> {
    if n < 3 {
        return Err(IsovalError::Dimension(n));
    }
    Ok(())
}

impl<T: Real> ZonalMeasure<T> {
    /// mass·(δ_ē + δ_{−ē})/2
    pub fn discrete_poles(n: usize, mass: T) -> Result<Self> {
        check_dim(n)?;
        check_mass(mass)?;
        Ok(Self { dim: n, atoms: vec![(T::one(), mass)], uniform: T::zero(), density: None, kind: MeasureKind::DiscretePoles })
    }

    /// Uniform measure of total `mass` on the great sphere ē^⊥.
    pub fn equatorial(n: usize, mass: T) -> Result<Self> {
        check_dim(n)?;
        check_mass(mass)?;
        Ok(Self { dim: n, atoms: vec![(T::zero(), mass)], uniform: T::zero(), density: None, kind: MeasureKind::Equatorial })
    }

    /// Multiple of spherical Lebesgue measure with total `mass`.
    pub fn lebesgue(n: usize, mass: T) -> Result<Self> {
        check_dim(n)?;
        check_mass(mass)?;
        Ok(Self { dim: n, atoms: Vec::new(), uniform: mass, density: None, kind: MeasureKind::Lebesgue })
    }

    /// Uniform measure of total `mass` on the two latitude spheres at heights ±t.
    pub fn latitude(n: usize, t: T, mass: T) -> Result<Self> {
        check_dim(n)?;
        check_mass(mass)?;
        if !(T::zero()..=T::one()).contains(&t) {
            return Err(IsovalError::InvalidParameter(format!("latitude height must lie in [0, 1], got {t}")));
        }
        let kind = if t == T::one() {
            MeasureKind::DiscretePoles
        } else if t == T::zero() {
            MeasureKind::Equatorial
        } else {
            MeasureKind::Custom
        };
        Ok(Self { dim: n, atoms: vec![(t, mass)], uniform: T::zero(), density: None, kind })
    }

    /// dμ = g(|u·ē|) du with the total mass obtained by quadrature.
    pub fn from_density(g: DensityFn<T>, n: usize) -> Result<Self> {
        check_dim(n)?;
        let latitude = latitude_area::<T>(n);
        let e = exponent::<T>(n);
        let mass = latitude
            * T::lit(2.0)
            * csum(smooth_rule::<T>(64).iter().map(|&(t, w)| {
                let v = g(t);
                if v < T::zero() {
                    T::nan()
                } else {
                    v * (T::one() - t * t).powf(e) * w
                }
            }));
        if mass.is_nan() {
            return Err(IsovalError::InvalidParameter("density must be non-negative".into()));
        }
        check_mass(mass)?;
        Ok(Self {
            dim: n,
            atoms: Vec::new(),
            uniform: T::zero(),
            density: Some(Density { g, scale: T::one(), mass }),
            kind: MeasureKind::Custom,
        })
    }

    /// Piecewise-linear density through `(t, g)` samples on [0, 1].
    pub fn from_samples(n: usize, samples: &[(T, T)]) -> Result<Self> {
        if samples.is_empty() {
            return Err(IsovalError::InvalidParameter("density needs at least one sample".into()));
        }
        let mut s = samples.to_vec();
        if s.iter().any(|&(t, g)| !(T::zero()..=T::one()).contains(&t) || !(g >= T::zero()) || !g.is_finite()) {
            return Err(IsovalError::InvalidParameter("density samples need t in [0, 1] and finite g >= 0".into()));
        }
        s.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let g: DensityFn<T> = Arc::new(move |t: T| piecewise_linear(&s, t));
        Self::from_density(g, n)
    }

    /// ½·lebesgue + ½·discrete_poles, total `mass`.
    pub fn blend(n: usize, mass: T) -> Result<Self> {
        let half = mass * T::lit(0.5);
        Self::lebesgue(n, half)?.plus(&Self::discrete_poles(n, half)?)
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(IsovalError::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        if self.density.is_some() && other.density.is_some() {
            return Err(IsovalError::InvalidParameter("cannot add two density parts".into()));
        }
        let mut atoms = self.atoms.clone();
        for &(t, m) in &other.atoms {
            match atoms.iter_mut().find(|a| a.0 == t) {
                Some(a) => a.1 += m,
                None => atoms.push((t, m)),
            }
        }
        let kind = if self.kind == other.kind { self.kind } else { MeasureKind::Custom };
        Ok(Self {
            dim: self.dim,
            atoms,
            uniform: self.uniform + other.uniform,
            density: self.density.clone().or_else(|| other.density.clone()),
            kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn uniform_mass(&self) -> T {
        self.uniform
    }

    /// The density part g and its scale factor, if any.
    pub fn density_profile(&self) -> Option<(DensityFn<T>, T)> {
        self.density.as_ref().map(|d| (d.g.clone(), d.scale))
    }

    pub fn is_discrete(&self) -> bool {
        self.kind == MeasureKind::DiscretePoles
    }

    pub fn total_mass(&self) -> T {
        csum(self.atoms.iter().map(|a| a.1)) + self.uniform + self.density.as_ref().map_or(T::zero(), |d| d.mass)
    }

    /// c·μ
    pub fn scaled(&self, c: T) -> Result<Self> {
        check_mass(c)?;
        let mut out = self.clone();
        for a in &mut out.atoms {
            a.1 *= c;
        }
        out.uniform *= c;
        if let Some(d) = &mut out.density {
            d.scale *= c;
            d.mass *= c;
        }
        Ok(out)
    }

    pub fn normalize(&self, target_mass: T) -> Result<Self> {
        check_mass(target_mass)?;
        let m = self.total_mass();
        if (m - target_mass).abs() == T::zero() {
            return Ok(self.clone());
        }
        let mut out = self.scaled(target_mass / m)?;
        // put the rounding residue on the largest part so the mass is exact
        let resid = target_mass - out.total_mass();
        if resid != T::zero() {
            if let Some(a) = out.atoms.iter_mut().max_by(|a, b| a.1.partial_cmp(&b.1).unwrap()) {
                a.1 += resid;
            } else if out.uniform > T::zero() {
                out.uniform += resid;
            } else if let Some(d) = &mut out.density {
                d.mass += resid;
            }
        }
        Ok(out)
    }

    /// Short descriptor such as `equatorial:0.5`.
    pub fn describe(&self) -> String {
        let k = match self.kind {
            MeasureKind::DiscretePoles => "discrete",
            MeasureKind::Equatorial => "equatorial",
            MeasureKind::Lebesgue => "lebesgue",
            MeasureKind::Custom => {
                if self.density.is_none() && self.uniform > T::zero() && self.atoms.len() == 1 && self.atoms[0].0 == T::one() {
                    "blend"
                } else {
                    "custom"
                }
            }
        };
        format!("{k}:{}", self.total_mass())
    }

    /// h(Z_p^μ(w), v)^p as a function of s = w·v.
    pub fn kernel(&self, p: T, s: T) -> T {
        self.kernel_fn(p).eval(s)
    }

    pub fn kernel_fn(&self, p: T) -> Kernel<T> {
        Kernel::new(self, p)
    }

    /// w(Z^μ) = 4ω_{n−1}μ(S^{n−1})/(nω_n)
    pub fn zonoid_mean_width(&self) -> T {
        let n = self.dim;
        T::lit(4.0) * ball_volume::<T>(n - 1) * self.total_mass() / sphere_area::<T>(n)
    }

    /// Volume of ∩ᵢ{x : x·uᵢ ≤ h(Z^μ(ē), uᵢ)} over the grid directions; zero
    /// for flat zonoids (segments and discs).
    pub fn zonoid_volume_estimate(&self, grid: &SphericalGrid<T>) -> Result<T> {
        if self.dim != 3 || grid.dim() != 3 {
            return Err(IsovalError::ThreeDimensionalOnly("zonoid volume estimate"));
        }
        let k = self.kernel_fn(T::one());
        let k0 = k.eval(T::zero());
        let k1 = k.eval(T::one());
        let scale = k0.max(k1);
        let tiny = T::lit(1e-12) * scale;
        if k0 <= tiny || k1 <= tiny {
            return Ok(T::zero());
        }
        let pts: Vec<[T; 3]> = grid
            .nodes()
            .map(|(u, _)| {
                let h = k.eval(u[2]);
                [u[0] / h, u[1] / h, u[2] / h]
            })
            .collect();
        polar_of_hull_volume(&pts)
    }
}

fn piecewise_linear<T: Real>(s: &[(T, T)], t: T) -> T {
    if t <= s[0].0 {
        return s[0].1;
    }
    for w in s.windows(2) {
        let ((t0, g0), (t1, g1)) = (w[0], w[1]);
        if t <= t1 {
            if t1 == t0 {
                return g1;
            }
            return g0 + (g1 - g0) * (t - t0) / (t1 - t0);
        }
    }
    s[s.len() - 1].1
}

/// Area (n−1)ω_{n−1} of the unit S^{n−2}.
fn latitude_area<T: Real>(n: usize) -> T {
    sphere_area::<T>(n - 1)
}

fn exponent<T: Real>(n: usize) -> T {
    T::lit((n as f64 - 3.0) / 2.0)
}

/// Gauss–Legendre on [0, 1] after the smoothstep substitution x = 3y² − 2y³,
/// which flattens algebraic endpoint behaviour of the integrand.
fn smooth_rule<T: Real>(m: usize) -> Vec<(T, T)> {
    let (y, w) = gauss_legendre::<T>(m);
    let half = T::lit(0.5);
    y.iter()
        .zip(&w)
        .map(|(&y, &w)| {
            let y = (y + T::one()) * half;
            let x = y * y * (T::lit(3.0) - T::lit(2.0) * y);
            (x, w * half * T::lit(6.0) * y * (T::one() - y))
        })
        .collect()
}

/// Evaluator of s ↦ h(Z_p^μ(w), v)^p for a fixed measure and exponent.
#[derive(Clone)]
pub struct Kernel<T> {
    n: usize,
    p: T,
    constant: T,
    pole: T,
    equator: T,
    atoms: Vec<(T, T)>,
    density: Option<Density<T>>,
    rule: Arc<Vec<(T, T)>>,
    sphere_norm: T,
}

impl<T: Real> Kernel<T> {
    fn new(mu: &ZonalMeasure<T>, p: T) -> Self {
        let n = mu.dim;
        let nf = T::from_usize_lossy(n);
        let half = T::lit(0.5);
        let mut pole = T::zero();
        let mut equator = T::zero();
        let mut atoms = Vec::new();
        // E|ξ|^p for ξ the first coordinate of a uniform point of S^{n−2}
        let abs_moment = gamma((nf - T::one()) * half) * gamma((p + T::one()) * half)
            / (T::PI().sqrt() * gamma((nf - T::one() + p) * half));
        for &(t, m) in &mu.atoms {
            if t == T::one() {
                pole += m;
            } else if t == T::zero() {
                equator += m * abs_moment;
            } else {
                atoms.push((t, m));
            }
        }
        let constant = if mu.uniform > T::zero() { mu.uniform / (sphere_area::<T>(n) * a_np::<T>(n, p)) } else { T::zero() };
        let sphere_norm = T::PI().sqrt() * gamma((nf - T::lit(2.0)) * half) / gamma((nf - T::one()) * half);
        Kernel { n, p, constant, pole, equator, atoms, density: mu.density.clone(), rule: Arc::new(smooth_rule(48)), sphere_norm }
    }

    pub fn p(&self) -> T {
        self.p
    }

    /// True when the kernel does not depend on s (Lebesgue measures).
    pub fn is_constant(&self) -> bool {
        self.pole == T::zero() && self.equator == T::zero() && self.atoms.is_empty() && self.density.is_none()
    }

    /// For p = 2 the kernel is α + βs²; returns (α, β).
    pub fn quadratic(&self) -> Option<(T, T)> {
        if self.p != T::lit(2.0) {
            return None;
        }
        let a = self.eval(T::zero());
        Some((a, self.eval(T::one()) - a))
    }

    #[inline]
    fn pow(&self, x: T) -> T {
        if self.p == T::one() {
            x
        } else if self.p == T::lit(2.0) {
            x * x
        } else {
            x.powf(self.p)
        }
    }

    pub fn eval(&self, s: T) -> T {
        let s = s.abs().min(T::one());
        let c2 = (T::one() - s * s).max(T::zero());
        let mut v = self.constant;
        if self.pole != T::zero() {
            v += self.pole * self.pow(s);
        }
        if self.equator != T::zero() {
            v += self.equator * self.pow(c2.sqrt());
        }
        for &(t, m) in &self.atoms {
            v += m * self.latitude_average(s * t, c2.sqrt() * (T::one() - t * t).sqrt());
        }
        if let Some(d) = &self.density {
            v += self.density_part(d, s);
        }
        v
    }

    fn density_part(&self, d: &Density<T>, s: T) -> T {
        let c = (T::one() - s * s).max(T::zero()).sqrt();
        let e = exponent::<T>(self.n);
        let f = |t: T| {
            let w = if self.n == 3 { T::one() } else { (T::one() - t * t).max(T::zero()).powf(e) };
            (d.g)(t) * w * self.latitude_average(s * t, c * (T::one() - t * t).max(T::zero()).sqrt())
        };
        // kink where the latitude circle touches the great circle v^⊥
        let pieces = if c > T::zero() && c < T::one() { vec![(T::zero(), c), (c, T::one())] } else { vec![(T::zero(), T::one())] };
        let mut acc = Vec::new();
        for (a, b) in pieces {
            for &(x, w) in self.rule.iter() {
                acc.push(f(a + (b - a) * x) * w * (b - a));
            }
        }
        d.scale * T::lit(2.0) * latitude_area::<T>(self.n) * csum(acc)
    }

    /// E|a + bξ|^p with ξ the first coordinate of a uniform point on S^{n−2}.
    pub fn latitude_average(&self, a: T, b: T) -> T {
        if b <= T::epsilon() * a.abs() || b == T::zero() {
            return self.pow(a.abs());
        }
        if self.p == T::lit(2.0) {
            return a * a + b * b / T::from_usize_lossy(self.n - 1);
        }
        if self.p == T::one() && self.n == 3 {
            let aa = a.abs();
            if aa >= b {
                return aa;
            }
            return T::lit(2.0) / T::PI() * (aa * (aa / b).asin() + (b * b - aa * aa).sqrt());
        }
        self.latitude_average_numeric(a, b)
    }

    /// Quadrature of E|a + bξ|^p in the angle φ with ξ = cos φ, split at the
    /// zero of a + b cos φ.
    pub fn latitude_average_numeric(&self, a: T, b: T) -> T {
        let e = T::from_usize_lossy(self.n) - T::lit(3.0);
        let r = -a / b;
        let pieces = if r.abs() < T::one() { vec![(T::zero(), r.acos()), (r.acos(), T::PI())] } else { vec![(T::zero(), T::PI())] };
        let mut acc = Vec::new();
        for (lo, hi) in pieces {
            for &(x, w) in self.rule.iter() {
                let phi = lo + (hi - lo) * x;
                let weight = if self.n == 3 { T::one() } else { phi.sin().powf(e) };
                acc.push(self.pow((a + b * phi.cos()).abs()) * weight * w * (hi - lo));
            }
        }
        csum(acc) / self.sphere_norm
    }
}

/// Measure description used in JSON configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub kind: String,
    pub mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_samples: Option<Vec<[f64; 2]>>,
}

impl MeasureSpec {
    pub fn build<T: Real>(&self, n: usize) -> Result<ZonalMeasure<T>> {
        let mass = T::lit(self.mass);
        match self.kind.as_str() {
            "discrete" | "discrete_poles" => ZonalMeasure::discrete_poles(n, mass),
            "equatorial" => ZonalMeasure::equatorial(n, mass),
            "lebesgue" => ZonalMeasure::lebesgue(n, mass),
            "blend" => ZonalMeasure::blend(n, mass),
            "custom" => {
                let samples = self
                    .density_samples
                    .as_ref()
                    .ok_or_else(|| IsovalError::InvalidParameter("custom measure needs density_samples".into()))?;
                let s: Vec<(T, T)> = samples.iter().map(|&[t, g]| (T::lit(t), T::lit(g))).collect();
                ZonalMeasure::from_samples(n, &s)?.normalize(mass)
            }
            other => Err(IsovalError::Parse(format!("unknown measure kind '{other}'"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
