use super::{affine_probe, normalising_mass, petty_bound, random_hull, random_sl, theorem2_sandwich, theorem51_pair, volume_product};
use crate::bodies::Body;
use crate::error::{IsovalError, Result};
use crate::sphere_quad::{make_grid, SphericalGrid, UnitVector};
use crate::valuations::lemma41_check;
use crate::zonal::{MeasureKind, ZonalMeasure};
use crate::SCHEMA;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    /// |Φ^{μ,∘}K||K|^{n−1} ≤ ω_n^n/ω_{n−1}^n
    Thm1,
    /// left ≤ |Φ^{μ,∘}K| ≤ |Π°K|
    Thm2,
    /// |Φ_p^{μ,∘}K| ≤ |Π_p^∘K|
    Thm51,
    /// |Φ_p^{μ,∘}K|^p|K|^{n−p} ≤ ω_n^n
    Thm52,
    /// zonal-kernel value against the rotation average of Π_p
    Lemma41,
    /// volume product before and after a random A ∈ SL(n)
    Affine,
}

impl Check {
    pub const ALL: [Check; 6] = [Check::Thm1, Check::Thm2, Check::Thm51, Check::Thm52, Check::Lemma41, Check::Affine];

    pub fn tag(self) -> &'static str {
        match self {
            Check::Thm1 => "thm1",
            Check::Thm2 => "thm2",
            Check::Thm51 => "thm51",
            Check::Thm52 => "thm52",
            Check::Lemma41 => "lemma41",
            Check::Affine => "affine",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.tag() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// relative slack allowed on inequalities
    pub inequality: f64,
    /// |margin| allowed where equality is predicted
    pub equality: f64,
    /// |margin| allowed on the SL(n) invariance of discrete products
    pub affine: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { inequality: 1e-6, equality: 1e-6, affine: 1e-5 }
    }
}

/// discrete, equatorial, lebesgue and blend, each of mass ½.
pub fn standard_measures(n: usize) -> Result<Vec<ZonalMeasure<f64>>> {
    Ok(vec![
        ZonalMeasure::discrete_poles(n, 0.5)?,
        ZonalMeasure::equatorial(n, 0.5)?,
        ZonalMeasure::lebesgue(n, 0.5)?,
        ZonalMeasure::blend(n, 0.5)?,
    ])
}

#[derive(Clone)]
pub struct FuzzConfig {
    pub checks: Vec<Check>,
    pub trials: usize,
    pub seed: u64,
    /// renormalised per check (½ for p = 1, a_{n,p} for p > 1)
    pub measures: Vec<ZonalMeasure<f64>>,
    pub ps: Vec<f64>,
    /// vertex count of the random hulls
    pub vertices: usize,
    /// fixed body for every trial instead of random hulls
    pub body: Option<Body<f64>>,
    pub grid_level: usize,
    pub tolerances: Tolerances,
}

impl FuzzConfig {
    pub fn new(checks: Vec<Check>, trials: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            checks,
            trials,
            seed,
            measures: standard_measures(3)?,
            ps: vec![1.0, 1.5, 2.0],
            vertices: 20,
            body: None,
            grid_level: crate::sphere_quad::DEFAULT_LEVEL,
            tolerances: Tolerances::default(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub check: String,
    pub body: String,
    pub mu: String,
    pub p: f64,
    pub lhs: f64,
    pub bound: f64,
    /// (bound − lhs)/bound
    pub margin: f64,
    pub equality_expected: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub records: usize,
    pub violations: usize,
    /// smallest margin over inequality records
    pub min_margin: Option<f64>,
    /// largest |margin| over records where equality is predicted
    pub max_equality_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub theorem: String,
    pub seed: u64,
    pub grid_level: usize,
    pub tolerances: Tolerances,
    pub trials: Vec<TrialRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn violations(&self) -> usize {
        self.summary.violations
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.trials.is_empty() {
            w.write_record(["trial", "check", "body", "mu", "p", "lhs", "bound", "margin", "equality_expected", "pass"])
                .map_err(csv_err)?;
        }
        for r in &self.trials {
            w.serialize(r).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> IsovalError {
    IsovalError::Io(std::io::Error::other(e.to_string()))
}

struct Ctx<'a> {
    cfg: &'a FuzzConfig,
    grid: SphericalGrid<f64>,
}

struct Shape {
    is_ball: bool,
    is_centred_ball: bool,
    is_ellipsoid: bool,
    is_centred_ellipsoid: bool,
}

impl Shape {
    fn of(k: &Body<f64>) -> Self {
        match k {
            Body::Ball { center, .. } => {
                let c = center.iter().all(|&c| c == 0.0);
                Shape { is_ball: true, is_centred_ball: c, is_ellipsoid: true, is_centred_ellipsoid: c }
            }
            Body::Ellipsoid { semiaxes, .. } => {
                let round = semiaxes.iter().all(|&a| a == semiaxes[0]);
                Shape { is_ball: round, is_centred_ball: round, is_ellipsoid: true, is_centred_ellipsoid: true }
            }
            Body::Polytope(_) => Shape { is_ball: false, is_centred_ball: false, is_ellipsoid: false, is_centred_ellipsoid: false },
        }
    }
}

impl Ctx<'_> {
    #[allow(clippy::too_many_arguments)]
    fn record(&self, trial: usize, check: &str, body: &str, mu: &ZonalMeasure<f64>, p: f64, lhs: f64, bound: f64, eq: bool, tol: f64) -> TrialRecord {
        let margin = (bound - lhs) / bound;
        let pass = margin.is_finite() && margin >= -self.cfg.tolerances.inequality && (!eq || margin.abs() <= tol);
        TrialRecord {
            trial,
            check: check.to_string(),
            body: body.to_string(),
            mu: mu.describe(),
            p,
            lhs,
            bound,
            margin,
            equality_expected: eq,
            pass,
        }
    }

    fn trial(&self, i: usize) -> Result<Vec<TrialRecord>> {
        let cfg = self.cfg;
        let g = &self.grid;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let (k, label) = match &cfg.body {
            Some(b) => (b.clone(), b.describe()),
            None => (random_hull::<f64, _>(cfg.vertices, &mut rng)?, format!("random_hull:{}:{i}", cfg.vertices)),
        };
        let shape = Shape::of(&k);
        let eq_tol = cfg.tolerances.equality;
        let mut out = Vec::new();
        for check in &cfg.checks {
            for mu0 in &cfg.measures {
                let discrete = mu0.is_discrete();
                let lebesgue = mu0.kind() == MeasureKind::Lebesgue;
                match check {
                    Check::Thm1 => {
                        let mu = mu0.normalize(0.5)?;
                        let v = volume_product(&k, &mu, 1.0, g)?;
                        let eq = shape.is_ball || (discrete && shape.is_ellipsoid);
                        out.push(self.record(i, "thm1", &label, &mu, 1.0, v, petty_bound(3, 1.0)?, eq, eq_tol));
                    }
                    Check::Thm2 => {
                        let mu = mu0.normalize(0.5)?;
                        let s = theorem2_sandwich(&k, &mu, g)?;
                        out.push(self.record(i, "thm2.lower", &label, &mu, 1.0, s.left, s.mid, shape.is_ball || lebesgue, eq_tol));
                        out.push(self.record(i, "thm2.upper", &label, &mu, 1.0, s.mid, s.right, shape.is_ball || discrete, eq_tol));
                    }
                    Check::Thm51 => {
                        for &p in &cfg.ps {
                            let mu = mu0.normalize(crate::valuations::a_np(3, p))?;
                            let (mid, right) = theorem51_pair(&k, &mu, p, g)?;
                            let ball = if p == 1.0 { shape.is_ball } else { shape.is_centred_ball };
                            out.push(self.record(i, "thm51", &label, &mu, p, mid, right, ball || discrete, eq_tol));
                        }
                    }
                    Check::Thm52 => {
                        for &p in &cfg.ps {
                            let mu = mu0.normalize(normalising_mass(3, p))?;
                            let v = volume_product(&k, &mu, p, g)?;
                            let ball = if p == 1.0 { shape.is_ball } else { shape.is_centred_ball };
                            let ellipsoid = if p == 1.0 { shape.is_ellipsoid } else { shape.is_centred_ellipsoid };
                            let eq = ball || (discrete && ellipsoid);
                            out.push(self.record(i, "thm52", &label, &mu, p, v, petty_bound(3, p)?, eq, eq_tol));
                        }
                    }
                    Check::Lemma41 => {
                        for &p in &cfg.ps {
                            let mu = mu0.normalize(normalising_mass(3, p))?;
                            let u = UnitVector::<f64>::random(3, &mut rng);
                            let (lhs, rhs) = lemma41_check(&k, &mu, p, &u, g)?;
                            out.push(self.record(i, "lemma41", &label, &mu, p, lhs, rhs, true, eq_tol));
                        }
                    }
                    Check::Affine => {
                        let a = random_sl::<f64, _>(3, 0.5, &mut rng);
                        for &p in &cfg.ps {
                            let mu = mu0.normalize(normalising_mass(3, p))?;
                            if discrete {
                                let (before, after) = affine_probe(&k, &mu, p, &a, g)?;
                                out.push(self.record(i, "affine", &label, &mu, p, after, before, true, cfg.tolerances.affine));
                            } else {
                                // non-discrete products drop away from the ball
                                let ball = Body::unit_ball(3);
                                let (before, after) = affine_probe(&ball, &mu, p, &a, g)?;
                                out.push(self.record(i, "affine", &ball.describe(), &mu, p, after, before, false, eq_tol));
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Runs every configured check on `trials` bodies. Trial i draws from
/// stream i of a ChaCha generator keyed by `seed`, so the report does not
/// depend on the worker count.
pub fn fuzz(cfg: &FuzzConfig) -> Result<VerificationReport> {
    let grid = make_grid::<f64>(3, cfg.grid_level)?;
    let ctx = Ctx { cfg, grid };
    let per: Vec<Vec<TrialRecord>> = (0..cfg.trials).into_par_iter().map(|i| ctx.trial(i)).collect::<Result<_>>()?;
    let trials: Vec<TrialRecord> = per.into_iter().flatten().collect();
    let violations = trials.iter().filter(|r| !r.pass).count();
    let min_margin = trials.iter().filter(|r| !r.equality_expected).map(|r| r.margin).reduce(f64::min);
    let max_equality_residual = trials.iter().filter(|r| r.equality_expected).map(|r| r.margin.abs()).reduce(f64::max);
    let theorem = cfg.checks.iter().map(|c| c.tag()).collect::<Vec<_>>().join(",");
    Ok(VerificationReport {
        schema: SCHEMA.to_string(),
        theorem,
        seed: cfg.seed,
        grid_level: cfg.grid_level,
        tolerances: cfg.tolerances,
        summary: Summary { trials: cfg.trials, records: trials.len(), violations, min_margin, max_equality_residual },
        trials,
    })
}
