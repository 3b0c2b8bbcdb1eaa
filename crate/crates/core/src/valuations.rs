//! The operators Π, Π_p, Φ^μ and Φ_p^μ, evaluated as support fields.
//!
//! All four are instances of h(u)^p = ∫ κ(u·ν) dS_p(K,ν) for a zonal kernel
//! κ (κ = a_{n,p}|s|^p gives Π_p, κ = ½|s| with p = 1 gives Π). Polytopes
//! use their facet atoms. Balls and ellipsoids in R³ are integrated in the
//! normal variable with the curvature density of S_p(K,·), on a product
//! rule whose pole is u itself, so the kinks of κ at u·ν = 0 fall on the
//! rule's equator.

use crate::bodies::{check_p, Body, SupportField, SurfaceMeasure};
use crate::error::{IsovalError, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::{csum, Real};
use crate::special::{gamma, sphere_area};
use crate::sphere_quad::{rotation_to, PolarRule, SphericalGrid, UnitVector};
use crate::zonal::{Kernel, ZonalMeasure};
use rayon::prelude::*;

/// a_{n,p} = Γ((n+p)/2) / (2π^{(n−1)/2} Γ((p+1)/2)), chosen so Π_p B = B.
pub fn a_np<T: Real>(n: usize, p: T) -> T {
    let nf = T::from_usize_lossy(n);
    let half = T::lit(0.5);
    gamma((nf + p) * half) / (T::lit(2.0) * T::PI().powf((nf - T::one()) * half) * gamma((p + T::one()) * half))
}

#[derive(Clone)]
pub struct ValuationParams<T> {
    pub mu: ZonalMeasure<T>,
    pub p: T,
}

impl<T: Real> ValuationParams<T> {
    pub fn new(mu: ZonalMeasure<T>, p: T) -> Result<Self> {
        check_p(p)?;
        Ok(Self { mu, p })
    }
}

enum Source<T> {
    Atoms(SurfaceMeasure<T>),
    Smooth(SmoothBody<T>),
}

/// Ball or ellipsoid c + M·B³ through its curvature density in ν.
struct SmoothBody<T> {
    center: Vec<T>,
    m: Matrix<T>,
    det2: T,
    ball: Option<T>,
    p: T,
    rule: PolarRule<T>,
}

impl<T: Real> SmoothBody<T> {
    /// dS_p/dσ at the normal ν.
    #[inline]
    fn density(&self, nu: &[T; 3]) -> T {
        let (f, h) = match self.ball {
            Some(r) => (r * r, dot(&self.center, nu) + r),
            None => {
                let mn = [
                    dot(self.m.row(0), nu),
                    dot(self.m.row(1), nu),
                    dot(self.m.row(2), nu),
                ];
                let h2 = dot(&mn, &mn);
                (self.det2 / (h2 * h2), h2.sqrt())
            }
        };
        if self.p == T::one() {
            f
        } else {
            f * h.powf(T::one() - self.p)
        }
    }

    fn integrate<F: Fn(T) -> T>(&self, u: &UnitVector<T>, k: F) -> T {
        let mut acc = Vec::with_capacity(self.rule.polar.len() * self.rule.azimuth.len());
        self.rule.for_each_around(u, |nu, w| acc.push(k(dot(nu, u.coords())) * self.density(nu) * w));
        csum(acc)
    }
}

/// Evaluates h(u)^p = ∫ κ(u·ν) dS_p(K,ν) at arbitrary directions.
pub struct FieldIntegrator<T> {
    n: usize,
    p: T,
    kernel: Kernel<T>,
    source: Source<T>,
    /// ∫ dS_p
    total: T,
    /// (α, β, ∫ννᵀ dS_p) when κ = α + βs²
    quadratic: Option<(T, T, Matrix<T>)>,
    generators: Option<Vec<[T; 3]>>,
    /// h^p for an origin-centred ball: r^{n−p}·μ(S^{n−1})/a_{n,p}
    constant: Option<T>,
}

impl<T: Real> FieldIntegrator<T> {
    pub fn new(body: &Body<T>, mu: &ZonalMeasure<T>, p: T, grid: &SphericalGrid<T>) -> Result<Self> {
        check_p(p)?;
        let n = body.dim();
        if mu.dim() != n || grid.dim() != n {
            return Err(IsovalError::DimensionMismatch { expected: n, got: if mu.dim() != n { mu.dim() } else { grid.dim() } });
        }
        if p != T::one() && !body.contains_origin() {
            return Err(IsovalError::OriginNotInterior);
        }
        let smooth = n == 3 && !matches!(body, Body::Polytope(_));
        let source = if smooth {
            let m = body.shape_matrix().unwrap();
            let det = m.determinant();
            let center = body.center();
            let ball = match body {
                Body::Ball { radius, .. } => Some(*radius),
                _ => None,
            };
            let mut rule = grid.polar_rule();
            if ball.is_some() && (p == T::one() || center.iter().all(|&c| c == T::zero())) {
                rule = rule.zonal();
            }
            Source::Smooth(SmoothBody { center, m, det2: det * det, ball, p, rule })
        } else {
            Source::Atoms(body.lp_surface_measure(p, grid)?)
        };
        let mut f = Self::build(n, mu, p, source)?;
        if let Body::Ball { center, radius } = body {
            if center.iter().all(|&c| c == T::zero()) {
                let e = T::from_usize_lossy(n) - p;
                f.constant = Some(radius.powf(e) * mu.total_mass() / a_np::<T>(n, p));
            }
        }
        Ok(f)
    }

    /// Atom-sum integrator over an explicit measure (its exponent must be `p`).
    pub fn from_measure(measure: SurfaceMeasure<T>, mu: &ZonalMeasure<T>, p: T) -> Result<Self> {
        check_p(p)?;
        if measure.p() != p {
            return Err(IsovalError::InvalidParameter("surface measure exponent differs from p".into()));
        }
        Self::build(measure.dim(), mu, p, Source::Atoms(measure))
    }

    fn build(n: usize, mu: &ZonalMeasure<T>, p: T, source: Source<T>) -> Result<Self> {
        let kernel = mu.kernel_fn(p);
        let pole = UnitVector::pole(n);
        let (total, second) = match &source {
            Source::Atoms(s) => {
                let mut g = Matrix::identity(n);
                for i in 0..n {
                    for j in 0..n {
                        g.set(i, j, csum(s.atoms().map(|(v, w)| v[i] * v[j] * w)));
                    }
                }
                (s.total_mass(), g)
            }
            Source::Smooth(b) => {
                // smooth integrands: one product rule about ē suffices
                let mut g = Matrix::identity(3);
                let mut parts = vec![Vec::new(); 9];
                let mut tot = Vec::new();
                b.rule_full().for_each_around(&pole, |nu, w| {
                    let d = b.density(nu) * w;
                    tot.push(d);
                    for i in 0..3 {
                        for j in 0..3 {
                            parts[3 * i + j].push(nu[i] * nu[j] * d);
                        }
                    }
                });
                for i in 0..3 {
                    for j in 0..3 {
                        g.set(i, j, csum(parts[3 * i + j].iter().copied()));
                    }
                }
                (csum(tot), g)
            }
        };
        let quadratic = kernel.quadratic().map(|(a, b)| (a, b, second));
        let generators = match &source {
            Source::Atoms(s) if n == 3 && p == T::one() && mu.is_discrete() => {
                let m = mu.total_mass();
                Some(s.atoms().map(|(v, w)| [v[0] * m * w, v[1] * m * w, v[2] * m * w]).collect())
            }
            _ => None,
        };
        Ok(Self { n, p, kernel, source, total, quadratic, generators, constant: None })
    }

    pub fn p(&self) -> T {
        self.p
    }

    /// ∫ dS_p(K,·)
    pub fn total_mass(&self) -> T {
        self.total
    }

    /// h(u)^p for a unit vector u.
    pub fn eval_pow(&self, u: &[T]) -> T {
        if let Some(c) = self.constant {
            return c;
        }
        if self.kernel.is_constant() {
            return self.kernel.eval(T::zero()) * self.total;
        }
        if let Some((a, b, g)) = &self.quadratic {
            let gu = g.apply(u);
            return *a * self.total + *b * dot(u, &gu);
        }
        match &self.source {
            Source::Atoms(s) => csum(s.atoms().map(|(v, w)| self.kernel.eval(dot(u, v)) * w)),
            Source::Smooth(b) => {
                let uv = UnitVector::new_unchecked(u.to_vec());
                b.integrate(&uv, |s| self.kernel.eval(s))
            }
        }
    }

    /// h(u).
    pub fn support(&self, u: &[T]) -> T {
        let v = self.eval_pow(u);
        if self.p == T::one() {
            v
        } else {
            v.powf(T::one() / self.p)
        }
    }

    pub fn field(&self, grid: &SphericalGrid<T>, label: impl Into<String>) -> Result<SupportField<T>> {
        if grid.dim() != self.n {
            return Err(IsovalError::DimensionMismatch { expected: self.n, got: grid.dim() });
        }
        let values: Vec<T> = (0..grid.len()).into_par_iter().map(|i| self.support(grid.point(i))).collect();
        let f = SupportField::new(grid.clone(), values, label)?;
        Ok(match &self.generators {
            Some(g) => f.with_zonotope(g.clone()),
            None => f,
        })
    }
}

impl<T: Real> SmoothBody<T> {
    fn rule_full(&self) -> PolarRule<T> {
        let l = self.rule.polar.len() / 2;
        PolarRule::new(l, 2 * l)
    }
}

/// Π K: h(u) = ½∫|u·v| dS(K,v).
pub fn pi<T: Real>(k: &Body<T>, grid: &SphericalGrid<T>) -> Result<SupportField<T>> {
    let mu = ZonalMeasure::discrete_poles(k.dim(), T::lit(0.5))?;
    FieldIntegrator::new(k, &mu, T::one(), grid)?.field(grid, "pi")
}

/// Π_p K: h(u)^p = a_{n,p}∫|u·v|^p dS_p(K,v).
pub fn pi_p<T: Real>(k: &Body<T>, p: T, grid: &SphericalGrid<T>) -> Result<SupportField<T>> {
    check_p(p)?;
    let mu = ZonalMeasure::discrete_poles(k.dim(), a_np::<T>(k.dim(), p))?;
    FieldIntegrator::new(k, &mu, p, grid)?.field(grid, format!("pi_p:{p}"))
}

/// Φ^μ K: h(u) = ∫ h(Z^μ(u),v) dS(K,v).
pub fn phi_mu<T: Real>(k: &Body<T>, mu: &ZonalMeasure<T>, grid: &SphericalGrid<T>) -> Result<SupportField<T>> {
    FieldIntegrator::new(k, mu, T::one(), grid)?.field(grid, format!("phi_mu:{}", mu.describe()))
}

/// Φ_p^μ K: h(u)^p = ∫ h(Z_p^μ(u),v)^p dS_p(K,v).
pub fn phi_mu_p<T: Real>(k: &Body<T>, mu: &ZonalMeasure<T>, p: T, grid: &SphericalGrid<T>) -> Result<SupportField<T>> {
    FieldIntegrator::new(k, mu, p, grid)?.field(grid, format!("phi_mu_p:{}:{p}", mu.describe()))
}

/// Both sides of the rotation-average identity
/// h(Φ_p^μK,u)^p = (1/a_{n,p})·∫_{S^{n−1}} h(Π_pK, ϑ_u w)^p dμ(w), ϑ_u ē = u.
///
/// The left side uses the zonal kernel. The right side averages the Π_p
/// support over the measure directly: latitude circles by a 4096-point
/// trapezoid rule per height, the Lebesgue part through ∫|x·v|^p dx on a
/// product rule about v, densities by quadrature in t over such circles.
pub fn lemma41_check<T: Real>(
    k: &Body<T>,
    mu: &ZonalMeasure<T>,
    p: T,
    u: &UnitVector<T>,
    grid: &SphericalGrid<T>,
) -> Result<(T, T)> {
    if k.dim() != 3 {
        return Err(IsovalError::ThreeDimensionalOnly("rotation-average identity"));
    }
    let lhs = FieldIntegrator::new(k, mu, p, grid)?.eval_pow(u.coords());
    let a = a_np::<T>(3, p);
    let pip = FieldIntegrator::new(k, &ZonalMeasure::discrete_poles(3, a)?, p, grid)?;
    let rot = rotation_to(u);
    let circle = |t: T, m: usize| -> T {
        if t == T::one() {
            return pip.eval_pow(u.coords());
        }
        let r = (T::one() - t * t).max(T::zero()).sqrt();
        let dphi = T::TAU() / T::from_usize_lossy(m);
        let vals: Vec<T> = (0..m)
            .into_par_iter()
            .map(|j| {
                let phi = (T::from_usize_lossy(j) + T::lit(0.5)) * dphi;
                let up = rot.apply(&[r * phi.cos(), r * phi.sin(), t]);
                let dn = rot.apply(&[r * phi.cos(), r * phi.sin(), -t]);
                T::lit(0.5) * (pip.eval_pow(&up) + pip.eval_pow(&dn))
            })
            .collect();
        csum(vals) / T::from_usize_lossy(m)
    };
    let mut parts = Vec::new();
    for &(t, m) in mu.atoms() {
        parts.push(m * circle(t, 4096));
    }
    if mu.uniform_mass() > T::zero() {
        // ∫_S h(Π_pK,x)^p dx = a·∫∫|x·v|^p dx dS_p(K,v), inner integral on a rule about v
        let rule = PolarRule::<T>::new(32, 1).zonal();
        let e = UnitVector::pole(3);
        let mut inner = Vec::new();
        rule.for_each_around(&e, |x, w| inner.push(x[2].abs().powf(p) * w));
        let mean = a * csum(inner) * pip.total_mass() / sphere_area::<T>(3);
        parts.push(mu.uniform_mass() * mean);
    }
    if let Some((g, scale)) = mu.density_profile() {
        let (ts, ws) = crate::special::gauss_legendre::<T>(48);
        let half = T::lit(0.5);
        let mut acc = Vec::new();
        for (&t, &w) in ts.iter().zip(&ws) {
            let t = (t + T::one()) * half;
            acc.push(g(t) * circle(t, 1024) * w * half);
        }
        // 2·(2π)∫₀¹ g(t)·avg dt
        parts.push(scale * T::lit(2.0) * T::TAU() * csum(acc));
    }
    Ok((lhs, csum(parts) / a))
}

/// Relative residual |lhs − rhs| / |lhs|.
pub fn relative_residual<T: Real>(lhs: T, rhs: T) -> T {
    (lhs - rhs).abs() / lhs.abs().max(T::min_positive_value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::polytope_from_vertices;
    use crate::linalg::norm;
    use crate::sphere_quad::{make_grid, Rotation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    type Z = ZonalMeasure<f64>;

    fn grid() -> SphericalGrid<f64> {
        make_grid(3, 32).unwrap()
    }

    fn random_hull(seed: u64, k: usize) -> Body<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..k).map(|_| UnitVector::<f64>::random(3, &mut rng).into_inner()).collect();
        polytope_from_vertices(&pts).unwrap()
    }

    fn max_diff(a: &SupportField<f64>, b: &SupportField<f64>) -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn a_np_values() {
        assert!((a_np::<f64>(3, 2.0) - 3.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((a_np::<f64>(3, 1.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let g = grid();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let f = pi_p(&Body::unit_ball(3), p, &g).unwrap();
            assert!(f.values().iter().all(|h| (h - 1.0).abs() < 1e-12), "p={p}");
        }
    }

    #[test]
    fn projection_body_of_cube_and_ball() {
        let g = grid();
        let f = pi(&Body::<f64>::unit_cube(), &g).unwrap();
        for ((u, _), &h) in g.nodes().zip(f.values()) {
            assert!((h - (u[0].abs() + u[1].abs() + u[2].abs())).abs() < 1e-14);
        }
        assert!((f.polar_volume().unwrap() - 4.0 / 3.0).abs() < 1e-12);
        let b = pi(&Body::unit_ball(3), &g).unwrap();
        assert!(b.values().iter().all(|h| (h - PI).abs() < 1e-12));
    }

    #[test]
    fn projection_body_covariance_for_ellipsoids() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = Matrix::from_rows(&[vec![1.3, 0.2, -0.1], vec![0.0, 0.8, 0.3], vec![0.25, -0.1, 1.1]]);
        let e = Body::unit_ball(3).linear_image(&a).unwrap();
        let integ = FieldIntegrator::new(&e, &Z::discrete_poles(3, 0.5).unwrap(), 1.0, &g).unwrap();
        let ainv = a.inverse().unwrap();
        for _ in 0..20 {
            let u = UnitVector::<f64>::random(3, &mut rng);
            let w = ainv.apply(u.coords());
            let expected = a.determinant().abs() * PI * norm(&w);
            assert!((integ.support(u.coords()) - expected).abs() < 1e-6 * expected);
        }
    }

    #[test]
    fn pi_p_examples() {
        let g = grid();
        let cube = Body::<f64>::unit_cube();
        let p1 = pi_p(&cube, 1.0, &g).unwrap();
        let p = pi(&cube, &g).unwrap();
        for (x, y) in p1.values().iter().zip(p.values()) {
            assert!((x - y / PI).abs() < 1e-10);
        }
        let p2 = pi_p(&cube, 2.0, &g).unwrap();
        let c = (3.0 / PI).sqrt();
        assert!(p2.values().iter().all(|h| (h - c).abs() < 1e-8));
    }

    #[test]
    fn phi_mu_special_measures() {
        let g = grid();
        for body in [Body::unit_cube(), random_hull(3, 20)] {
            let f = phi_mu(&body, &Z::discrete_poles(3, 0.5).unwrap(), &g).unwrap();
            assert!(max_diff(&f, &pi(&body, &g).unwrap()) < 1e-9);
            let l = phi_mu(&body, &Z::lebesgue(3, 0.5).unwrap(), &g).unwrap();
            let c = body.perimeter() / 4.0;
            assert!(l.values().iter().all(|h| (h - c).abs() < 1e-12));
        }
        let b = Body::unit_ball(3);
        for mu in [Z::lebesgue(3, 0.5).unwrap(), Z::equatorial(3, 0.5).unwrap(), Z::blend(3, 0.5).unwrap()] {
            let f = phi_mu(&b, &mu, &g).unwrap();
            assert!(f.values().iter().all(|h| (h - PI).abs() < 1e-7), "{}", mu.describe());
        }
    }

    #[test]
    fn phi_mu_p_examples() {
        let g = grid();
        let body = random_hull(11, 20);
        for p in [1.5, 2.0] {
            let a = a_np::<f64>(3, p);
            let f = phi_mu_p(&body, &Z::discrete_poles(3, a).unwrap(), p, &g).unwrap();
            assert!(max_diff(&f, &pi_p(&body, p, &g).unwrap()) < 1e-8);
        }
        let mu = Z::equatorial(3, 0.5).unwrap();
        assert!(max_diff(&phi_mu_p(&body, &mu, 1.0, &g).unwrap(), &phi_mu(&body, &mu, &g).unwrap()) < 1e-10);
        // double quadrature oracle for the ball: ∫∫|u·v|² dv dS₂(B,v) · mass/(4π)
        let a = 3.0 / (4.0 * PI);
        let f = phi_mu_p(&Body::unit_ball(3), &Z::lebesgue(3, a).unwrap(), 2.0, &g).unwrap();
        let mut acc = 0.0;
        for (v, wv) in g.nodes() {
            acc += wv * (v[2] * v[2]);
        }
        let expected = (a / (4.0 * PI) * acc * 4.0 * PI).sqrt();
        assert!(f.values().iter().all(|h| (h - expected).abs() < 1e-10));
        assert!(f.anisotropy() < 1e-12);
    }

    #[test]
    fn smooth_bodies_match_grid_atoms() {
        // the grid-atom route is a coarser discretisation of the same integral
        let g = grid();
        let e = Body::axis_ellipsoid(vec![1.4, 1.0, 0.7]).unwrap();
        let mu = Z::equatorial(3, 0.5).unwrap();
        let fine = FieldIntegrator::new(&e, &mu, 1.5, &g).unwrap();
        let coarse = FieldIntegrator::from_measure(e.lp_surface_measure(1.5, &g).unwrap(), &mu, 1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let u = UnitVector::<f64>::random(3, &mut rng);
            let (a, b) = (fine.eval_pow(u.coords()), coarse.eval_pow(u.coords()));
            assert!((a - b).abs() < 1e-3 * a);
        }
        assert!((fine.total_mass() - e.lp_surface_measure(1.5, &g).unwrap().total_mass()).abs() < 1e-10);
        let s1 = FieldIntegrator::new(&e, &mu, 1.0, &g).unwrap();
        assert!((s1.total_mass() - e.perimeter()).abs() < 1e-10);
    }

    #[test]
    fn lemma41_on_cube_equatorial() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let cube = Body::unit_cube();
        let mu = Z::equatorial(3, 0.5).unwrap();
        for _ in 0..20 {
            let u = UnitVector::random(3, &mut rng);
            let (l, r) = lemma41_check(&cube, &mu, 1.0, &u, &g).unwrap();
            assert!(relative_residual(l, r) <= 1e-6, "{l} vs {r}");
        }
        let u = UnitVector::random(3, &mut rng);
        let (l, r) = lemma41_check(&Body::unit_ball(3), &Z::lebesgue(3, 0.3).unwrap(), 2.0, &u, &g).unwrap();
        assert!(relative_residual(l, r) < 1e-12);
        let d = Z::discrete_poles(3, 0.7).unwrap();
        let (l, r) = lemma41_check(&cube, &d, 1.5, &u, &g).unwrap();
        let pip = FieldIntegrator::new(&cube, &Z::discrete_poles(3, a_np(3, 1.5)).unwrap(), 1.5, &g).unwrap();
        assert!((r - 0.7 / a_np::<f64>(3, 1.5) * pip.eval_pow(u.coords())).abs() < 1e-14);
        assert!(relative_residual(l, r) < 1e-12);
    }

    #[test]
    fn equivariance_and_scaling() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let body = random_hull(5, 20);
        let mu = Z::blend(3, 0.5).unwrap();
        let r = Rotation::<f64>::random(3, &mut rng);
        let a = FieldIntegrator::new(&body, &mu, 1.0, &g).unwrap();
        let b = FieldIntegrator::new(&body.rotated(&r).unwrap(), &mu, 1.0, &g).unwrap();
        for _ in 0..20 {
            let u = UnitVector::random(3, &mut rng);
            let ru = r.apply(u.coords());
            assert!((b.support(&ru) - a.support(u.coords())).abs() < 1e-7);
        }
        let c = 2.5;
        for p in [1.0, 1.5] {
            let f = phi_mu_p(&body, &mu, p, &g).unwrap();
            let fc = phi_mu_p(&body, &mu.scaled(c).unwrap(), p, &g).unwrap();
            for (x, y) in f.values().iter().zip(fc.values()) {
                assert!((y - c.powf(1.0 / p) * x).abs() < 1e-13 * y);
            }
        }
    }

    #[test]
    fn valuation_property_on_split_box() {
        let g = make_grid::<f64>(3, 8).unwrap();
        let bx = |x0: f64, x1: f64| {
            let mut pts = Vec::new();
            for &x in &[x0, x1] {
                for &y in &[0.0, 1.0] {
                    for &z in &[0.0, 0.7] {
                        pts.push(vec![x, y, z]);
                    }
                }
            }
            polytope_from_vertices(&pts).unwrap().surface_measure(&g)
        };
        let k = bx(0.0, 1.2);
        let l = bx(1.2, 2.0);
        let union = bx(0.0, 2.0);
        // the shared face as a flat slab: two opposite atoms of its area
        let slab = SurfaceMeasure::new(
            3,
            vec![(UnitVector::axis(3, 0), 0.7), (UnitVector::axis(3, 0).neg(), 0.7)],
            1.0,
        )
        .unwrap();
        let mu = Z::latitude(3, 0.4, 0.5).unwrap();
        let h = |s: SurfaceMeasure<f64>| FieldIntegrator::from_measure(s, &mu, 1.0).unwrap();
        let (hk, hl, hu, hs) = (h(k), h(l), h(union), h(slab));
        for (u, _) in g.nodes() {
            let lhs = hu.support(u) + hs.support(u);
            let rhs = hk.support(u) + hl.support(u);
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn origin_interior_required_for_p_above_one() {
        let g = grid();
        let off = Body::ball(vec![0.0, 0.0, 1.5], 1.0).unwrap();
        assert!(matches!(pi_p(&off, 2.0, &g), Err(IsovalError::OriginNotInterior)));
        assert!(pi(&off, &g).is_ok());
        assert!(pi_p(&Body::unit_ball(3), 0.5, &g).is_err());
    }
}
