use super::volume_product;
use crate::bodies::{polytope_from_points, Body};
use crate::error::{IsovalError, Result};
use crate::sphere_quad::{Rotation, SphericalGrid};
use crate::zonal::ZonalMeasure;
use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::sync::{Arc, Mutex};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    /// optimiser evaluation (ellipsoids) or proposal (polytopes) index
    pub step: usize,
    pub body: String,
    pub semiaxes: Option<Vec<f64>>,
    pub product: f64,
}

struct EllipsoidFamily<'a> {
    mean: f64,
    rotation: Rotation<f64>,
    mu: &'a ZonalMeasure<f64>,
    p: f64,
    grid: &'a SphericalGrid<f64>,
    log: Arc<Mutex<Vec<(Vec<f64>, f64)>>>,
}

impl EllipsoidFamily<'_> {
    fn semiaxes(&self, x: &[f64]) -> Vec<f64> {
        vec![self.mean * x[0].exp(), self.mean * x[1].exp(), self.mean * (-x[0] - x[1]).exp()]
    }
}

impl CostFunction for EllipsoidFamily<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let s = self.semiaxes(x);
        let body = Body::ellipsoid(s.clone(), self.rotation.clone())?;
        let v = volume_product(&body, self.mu, self.p, self.grid)?;
        self.log.lock().unwrap().push((s, v));
        Ok(-v)
    }
}

fn ellipsoid_label(s: &[f64]) -> String {
    format!("ellipsoid:{},{},{}", s[0], s[1], s[2])
}

/// Local ascent of the volume product from `start`.
///
/// Balls and ellipsoids run Nelder–Mead over the two free log-semiaxes at
/// fixed volume (`steps` iterations; `seed` orients the initial simplex).
/// Polytopes take `steps` Gaussian single-vertex proposals, keeping those
/// that raise the product. The returned trajectory lists the start and
/// every improvement, so it is non-decreasing.
pub fn extremize(
    start: &Body<f64>,
    mu: &ZonalMeasure<f64>,
    p: f64,
    steps: usize,
    seed: u64,
    grid: &SphericalGrid<f64>,
) -> Result<Vec<TrajectoryStep>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match start {
        Body::Polytope(poly) => {
            let mut verts: Vec<[f64; 3]> = poly.vertices().to_vec();
            let mut best = volume_product(start, mu, p, grid)?;
            let mut traj = vec![TrajectoryStep { step: 0, body: start.describe(), semiaxes: None, product: best }];
            let scale = verts.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).fold(0.0, f64::max);
            let noise = Normal::new(0.0, 0.05 * scale).expect("positive deviation");
            for step in 1..=steps {
                let mut cand = verts.clone();
                let j = rng.gen_range(0..cand.len());
                for c in cand[j].iter_mut() {
                    *c += noise.sample(&mut rng);
                }
                let Ok(body) = polytope_from_points(&cand) else { continue };
                let v = volume_product(&body, mu, p, grid)?;
                if v > best {
                    best = v;
                    if let Body::Polytope(q) = &body {
                        verts = q.vertices().to_vec();
                    }
                    traj.push(TrajectoryStep { step, body: body.describe(), semiaxes: None, product: v });
                }
            }
            Ok(traj)
        }
        _ => {
            if start.dim() != 3 {
                return Err(IsovalError::ThreeDimensionalOnly("ellipsoid extremal search"));
            }
            let (s0, rotation) = match start {
                Body::Ball { radius, .. } => (vec![*radius; 3], Rotation::identity(3)),
                Body::Ellipsoid { semiaxes, rotation } => (semiaxes.clone(), rotation.clone()),
                Body::Polytope(_) => unreachable!(),
            };
            let mean = (s0[0] * s0[1] * s0[2]).cbrt();
            let x0 = vec![(s0[0] / mean).ln(), (s0[1] / mean).ln()];
            let first = volume_product(start, mu, p, grid)?;
            let log = Arc::new(Mutex::new(Vec::new()));
            let fam = EllipsoidFamily { mean, rotation, mu, p, grid, log: log.clone() };
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let d = 0.2;
            let simplex = vec![
                x0.clone(),
                vec![x0[0] + d * th.cos(), x0[1] + d * th.sin()],
                vec![x0[0] - d * th.sin(), x0[1] + d * th.cos()],
            ];
            let solver = NelderMead::new(simplex).with_sd_tolerance(1e-12).map_err(|e| IsovalError::InvalidParameter(e.to_string()))?;
            let res = Executor::new(fam, solver).configure(|s| s.max_iters(steps as u64)).run();
            if let Err(e) = res {
                return Err(match e.downcast::<IsovalError>() {
                    Ok(inner) => inner,
                    Err(e) => IsovalError::NonFinite(format!("optimiser failed: {e}")),
                });
            }
            let mut traj = vec![TrajectoryStep { step: 0, body: start.describe(), semiaxes: Some(s0), product: first }];
            let mut best = first;
            for (i, (s, v)) in log.lock().unwrap().drain(..).enumerate() {
                if v > best {
                    best = v;
                    traj.push(TrajectoryStep { step: i + 1, body: ellipsoid_label(&s), semiaxes: Some(s), product: v });
                }
            }
            Ok(traj)
        }
    }
}

/// Volume products of axis-parallel ellipsoids with the given semiaxes.
pub fn product_along(family: &[Vec<f64>], mu: &ZonalMeasure<f64>, p: f64, grid: &SphericalGrid<f64>) -> Result<Vec<f64>> {
    family.iter().map(|s| volume_product(&Body::axis_ellipsoid(s.clone())?, mu, p, grid)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_quad::make_grid;

    type Z = ZonalMeasure<f64>;

    #[test]
    fn equatorial_search_reaches_the_ball() {
        let g = make_grid(3, 16).unwrap();
        let start = Body::axis_ellipsoid(vec![2.0, 1.0, 0.5]).unwrap();
        let t = extremize(&start, &Z::equatorial(3, 0.5).unwrap(), 1.0, 200, 1, &g).unwrap();
        assert!(t.windows(2).all(|w| w[1].product >= w[0].product));
        let last = t.last().unwrap();
        assert!((last.product - 64.0 / 27.0).abs() < 1e-4, "{}", last.product);
        let s = last.semiaxes.as_ref().unwrap();
        let c = (s[0] * s[1] * s[2]).cbrt();
        assert!(s.iter().all(|a| (a / c - 1.0).abs() < 1e-3), "{s:?}");
    }

    #[test]
    fn ball_is_a_fixed_point() {
        let g = make_grid(3, 16).unwrap();
        let t = extremize(&Body::unit_ball(3), &Z::equatorial(3, 0.5).unwrap(), 1.0, 40, 3, &g).unwrap();
        assert!((t[0].product - 64.0 / 27.0).abs() < 1e-12);
        assert!(t.iter().all(|s| (s.product - 64.0 / 27.0).abs() < 1e-6));
    }

    #[test]
    fn discrete_products_are_flat_on_ellipsoids() {
        let g = make_grid(3, 32).unwrap();
        let fam = vec![vec![1.0, 1.0, 1.0], vec![2.0, 1.0, 0.5], vec![3.0, 0.7, 0.4], vec![1.2, 1.2, 0.3]];
        let v = product_along(&fam, &Z::discrete_poles(3, 0.5).unwrap(), 1.0, &g).unwrap();
        for x in v {
            assert!((x - 64.0 / 27.0).abs() < 1e-6 * 64.0 / 27.0, "{x}");
        }
    }

    #[test]
    fn polytope_search_is_monotone() {
        let g = make_grid(3, 8).unwrap();
        let t = extremize(&Body::unit_cube(), &Z::equatorial(3, 0.5).unwrap(), 1.0, 15, 2, &g).unwrap();
        assert!(t.windows(2).all(|w| w[1].product > w[0].product));
        assert!(t.iter().all(|s| s.product <= 64.0 / 27.0));
    }
}
