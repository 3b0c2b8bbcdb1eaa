//! Volume products, Petty-type bounds and the Theorem 2 sandwich, with a
//! seeded random-body fuzzer and a local extremal search.

mod extremize;
mod fuzz;

pub use extremize::{extremize, product_along, TrajectoryStep};
pub use fuzz::{fuzz, standard_measures, Check, FuzzConfig, Summary, Tolerances, TrialRecord, VerificationReport};

use crate::bodies::{check_p, polytope_from_points, Body};
use crate::error::{IsovalError, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::special::ball_volume;
use crate::sphere_quad::{Rotation, SphericalGrid, UnitVector};
use crate::valuations::{a_np, phi_mu, phi_mu_p, pi, pi_p};
use crate::zonal::ZonalMeasure;
use rand::Rng;

/// Mass a measure must carry for the bound at exponent `p`: ½ for p = 1,
/// a_{n,p} otherwise.
pub fn normalising_mass<T: Real>(n: usize, p: T) -> T {
    if p == T::one() {
        T::lit(0.5)
    } else {
        a_np(n, p)
    }
}

pub(crate) fn require_mass<T: Real>(mu: &ZonalMeasure<T>, expected: T) -> Result<()> {
    let m = mu.total_mass();
    if (m - expected).abs() > T::lit(1e-12) * expected {
        return Err(IsovalError::Normalization { expected: expected.as_f64(), got: m.as_f64() });
    }
    Ok(())
}

/// |Φ_p^{μ,∘}K|^p·|K|^{n−p}; for p = 1 this is |Φ^{μ,∘}K||K|^{n−1}.
pub fn volume_product<T: Real>(k: &Body<T>, mu: &ZonalMeasure<T>, p: T, grid: &SphericalGrid<T>) -> Result<T> {
    check_p(p)?;
    let n = T::from_usize_lossy(k.dim());
    let f = if p == T::one() { phi_mu(k, mu, grid)? } else { phi_mu_p(k, mu, p, grid)? };
    let pv = f.polar_volume()?;
    Ok(pv.powf(p) * k.volume().powf(n - p))
}

/// ω_n^n/ω_{n−1}^n for p = 1 (μ of mass ½), ω_n^n for p > 1 (mass a_{n,p}).
pub fn petty_bound<T: Real>(n: usize, p: T) -> Result<T> {
    if n < 3 {
        return Err(IsovalError::Dimension(n));
    }
    check_p(p)?;
    let wn = ball_volume::<T>(n);
    let nn = n as i32;
    Ok(if p == T::one() { (wn / ball_volume::<T>(n - 1)).powi(nn) } else { wn.powi(nn) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sandwich<T> {
    pub left: T,
    pub mid: T,
    pub right: T,
}

impl<T: Real> Sandwich<T> {
    /// (left ≤ mid, mid ≤ right), each up to a relative tolerance.
    pub fn holds(&self, tol: T) -> (bool, bool) {
        (self.left <= self.mid * (T::one() + tol), self.mid <= self.right * (T::one() + tol))
    }
}

/// n^nω_n^{n+1}/ω_{n−1}^n·|∂K|^{−n} ≤ |Φ^{μ,∘}K| ≤ |Π°K| for μ of mass ½.
pub fn theorem2_sandwich<T: Real>(k: &Body<T>, mu: &ZonalMeasure<T>, grid: &SphericalGrid<T>) -> Result<Sandwich<T>> {
    require_mass(mu, T::lit(0.5))?;
    let n = k.dim();
    let nn = n as i32;
    let wn = ball_volume::<T>(n);
    let c = T::from_usize_lossy(n).powi(nn) * wn.powi(nn + 1) / ball_volume::<T>(n - 1).powi(nn);
    let left = c * k.perimeter().powi(-nn);
    let mid = phi_mu(k, mu, grid)?.polar_volume()?;
    let right = pi(k, grid)?.polar_volume()?;
    Ok(Sandwich { left, mid, right })
}

/// (|Φ_p^{μ,∘}K|, |Π_p^∘K|) for μ of mass a_{n,p}.
pub fn theorem51_pair<T: Real>(k: &Body<T>, mu: &ZonalMeasure<T>, p: T, grid: &SphericalGrid<T>) -> Result<(T, T)> {
    check_p(p)?;
    require_mass(mu, a_np(k.dim(), p))?;
    let mid = phi_mu_p(k, mu, p, grid)?.polar_volume()?;
    let right = pi_p(k, p, grid)?.polar_volume()?;
    Ok((mid, right))
}

/// Volume product of K and of AK for det A = 1.
pub fn affine_probe<T: Real>(
    k: &Body<T>,
    mu: &ZonalMeasure<T>,
    p: T,
    a: &Matrix<T>,
    grid: &SphericalGrid<T>,
) -> Result<(T, T)> {
    let det = a.determinant();
    if (det - T::one()).abs() > T::lit(1e-9) {
        return Err(IsovalError::InvalidParameter(format!("affine probe needs det A = 1, got {det}")));
    }
    let before = volume_product(k, mu, p, grid)?;
    let after = volume_product(&k.linear_image(a)?, mu, p, grid)?;
    Ok((before, after))
}

/// R₁·diag(e^{x₁},…,e^{x_n})·R₂ with Σxᵢ = 0 and |xᵢ| ≲ `spread`.
pub fn random_sl<T: Real, R: Rng + ?Sized>(n: usize, spread: f64, rng: &mut R) -> Matrix<T> {
    let r1 = Rotation::<T>::random(n, rng);
    let r2 = Rotation::<T>::random(n, rng);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-spread..=spread)).collect();
    let mean = x.iter().sum::<f64>() / n as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let d: Vec<T> = x.iter().map(|v| T::lit(v.exp())).collect();
    r1.matrix().mul(&Matrix::diagonal(&d)).mul(r2.matrix())
}

/// Hull of `k` uniform points on S², recentred at its centroid.
pub fn random_hull<T: Real, R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Body<T>> {
    let pts: Vec<[T; 3]> = (0..k)
        .map(|_| {
            let u = UnitVector::<T>::random(3, rng);
            let c = u.coords();
            [c[0], c[1], c[2]]
        })
        .collect();
    polytope_from_points(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_quad::make_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    type Z = ZonalMeasure<f64>;

    fn grid() -> SphericalGrid<f64> {
        make_grid(3, 32).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn petty_bound_values() {
        assert!(rel(petty_bound::<f64>(3, 1.0).unwrap(), 64.0 / 27.0) < 1e-14);
        let w3 = 4.0 * PI / 3.0;
        assert!(rel(petty_bound::<f64>(3, 2.0).unwrap(), w3.powi(3)) < 1e-14);
        let w4 = PI * PI / 2.0;
        assert!(rel(petty_bound::<f64>(4, 1.0).unwrap(), (w4 / w3).powi(4)) < 1e-14);
        assert!(petty_bound::<f64>(2, 1.0).is_err());
    }

    #[test]
    fn ball_products_saturate() {
        let g = grid();
        let b = Body::unit_ball(3);
        for mu in [Z::discrete_poles(3, 0.5), Z::equatorial(3, 0.5), Z::lebesgue(3, 0.5), Z::blend(3, 0.5)] {
            let v = volume_product(&b, &mu.unwrap(), 1.0, &g).unwrap();
            assert!(rel(v, 64.0 / 27.0) < 1e-6, "{v}");
        }
        let a = a_np::<f64>(3, 2.0);
        for mu in [Z::discrete_poles(3, a), Z::equatorial(3, a), Z::lebesgue(3, a)] {
            let v = volume_product(&b, &mu.unwrap(), 2.0, &g).unwrap();
            assert!(rel(v, (4.0 * PI / 3.0).powi(3)) < 1e-6);
        }
    }

    #[test]
    fn cube_product() {
        let v = volume_product(&Body::unit_cube(), &Z::discrete_poles(3, 0.5).unwrap(), 1.0, &grid()).unwrap();
        assert!(rel(v, 4.0 / 3.0) < 1e-12);
    }

    #[test]
    fn sandwich_cases() {
        let g = grid();
        let s = theorem2_sandwich(&Body::unit_ball(3), &Z::equatorial(3, 0.5).unwrap(), &g).unwrap();
        let e = 4.0 / (3.0 * PI * PI);
        assert!(rel(s.left, e) < 1e-6 && rel(s.mid, e) < 1e-6 && rel(s.right, e) < 1e-6);
        let cube = Body::unit_cube();
        let s = theorem2_sandwich(&cube, &Z::discrete_poles(3, 0.5).unwrap(), &g).unwrap();
        assert!(rel(s.left, 256.0 * PI / 3.0 / 216.0) < 1e-5);
        assert!(rel(s.mid, 4.0 / 3.0) < 1e-12 && rel(s.right, 4.0 / 3.0) < 1e-12);
        let s = theorem2_sandwich(&cube, &Z::lebesgue(3, 0.5).unwrap(), &g).unwrap();
        assert!(rel(s.mid, s.left) < 1e-12);
        assert!(rel(s.mid, 4.0 * PI / 3.0 / 1.5f64.powi(3)) < 1e-12);
        assert!(s.holds(1e-6) == (true, true));
        assert!(theorem2_sandwich(&cube, &Z::lebesgue(3, 1.0).unwrap(), &g).is_err());
    }

    #[test]
    fn theorem51_ordering_on_hulls() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [1.5, 2.0] {
            let a = a_np::<f64>(3, p);
            let k = random_hull::<f64, _>(20, &mut rng).unwrap();
            for mu in [Z::equatorial(3, a), Z::lebesgue(3, a), Z::blend(3, a)] {
                let (mid, right) = theorem51_pair(&k, &mu.unwrap(), p, &g).unwrap();
                assert!(mid <= right * (1.0 + 1e-6), "{mid} {right}");
            }
            let (mid, right) = theorem51_pair(&k, &Z::discrete_poles(3, a).unwrap(), p, &g).unwrap();
            assert!(rel(mid, right) < 1e-12);
        }
    }

    #[test]
    fn affine_probes() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cube = Body::unit_cube();
        let d = Z::discrete_poles(3, 0.5).unwrap();
        for _ in 0..3 {
            let a = random_sl::<f64, _>(3, 0.4, &mut rng);
            let (b, af) = affine_probe(&cube, &d, 1.0, &a, &g).unwrap();
            assert!(rel(af, b) < 1e-5);
        }
        let (b, af) = affine_probe(&cube, &d, 1.0, &Matrix::identity(3), &g).unwrap();
        assert_eq!(b, af);
        let r = Rotation::<f64>::random(3, &mut rng);
        let a = Matrix::diagonal(&[2.0, 1.0, 0.5]).mul(r.matrix());
        let (b, af) = affine_probe(&Body::unit_ball(3), &Z::equatorial(3, 0.5).unwrap(), 1.0, &a, &g).unwrap();
        assert!(af < b - 1e-3);
        assert!(affine_probe(&cube, &d, 1.0, &Matrix::diagonal(&[2.0, 1.0, 1.0]), &g).is_err());
    }

    #[test]
    fn products_are_scale_invariant() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = random_hull::<f64, _>(20, &mut rng).unwrap();
        for (mu, p) in [(Z::equatorial(3, 0.5).unwrap(), 1.0), (Z::blend(3, a_np(3, 1.5)).unwrap(), 1.5)] {
            let v = volume_product(&k, &mu, p, &g).unwrap();
            for c in [0.5, 3.0] {
                let w = volume_product(&k.scaled(c).unwrap(), &mu, p, &g).unwrap();
                assert!(rel(w, v) < 1e-8);
            }
        }
    }

    #[test]
    fn random_sl_has_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let a = random_sl::<f64, _>(3, 0.5, &mut rng);
            assert!((a.determinant() - 1.0).abs() < 1e-12);
        }
    }
}
