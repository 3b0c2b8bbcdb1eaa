use crate::parse::{parse_body, parse_measure};
use crate::{Common, ComputeArgs, ExtremizeArgs, Failure, Format, SobolevGridArgs, VerifyArgs};
use isoval_core::inequalities::{self, Check, FuzzConfig};
use isoval_core::sobolev::{self, GridFunction, Profile};
use isoval_core::sphere_quad::make_grid;
use isoval_core::valuations::{phi_mu, phi_mu_p, pi, pi_p};
use isoval_core::{Body, IsovalError, SphericalGrid, SupportField, SCHEMA};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};

type Run = Result<(), Failure>;

fn csv_err(e: csv::Error) -> IsovalError {
    IsovalError::Io(std::io::Error::other(e.to_string()))
}

fn sink(c: &Common) -> Result<Box<dyn Write>, IsovalError> {
    Ok(match &c.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_json<S: Serialize>(c: &Common, value: &S) -> Result<(), IsovalError> {
    let mut out = sink(c)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_csv(c: &Common, header: &[&str], rows: &[Vec<String>]) -> Result<(), IsovalError> {
    let mut w = csv::Writer::from_writer(sink(c)?);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn grid(c: &Common) -> Result<SphericalGrid, IsovalError> {
    make_grid(3, c.grid_level)
}

#[derive(Serialize)]
struct FieldStats {
    min: f64,
    max: f64,
    mean: f64,
    anisotropy: f64,
}

#[derive(Serialize)]
struct OperatorReport {
    operator: &'static str,
    p: f64,
    field: FieldStats,
    polar_volume: f64,
    mean_width: f64,
    /// |polar body|^p·|K|^{3−p}
    volume_product: f64,
}

#[derive(Serialize)]
struct ComputeReport {
    schema: &'static str,
    command: &'static str,
    body: String,
    measure: String,
    p: f64,
    seed: u64,
    grid_level: usize,
    volume: f64,
    perimeter: f64,
    operators: Vec<OperatorReport>,
}

fn operator(name: &'static str, p: f64, h: &SupportField, k: &Body) -> Result<OperatorReport, IsovalError> {
    let pv = h.polar_volume()?;
    Ok(OperatorReport {
        operator: name,
        p,
        field: FieldStats { min: h.min(), max: h.max(), mean: h.mean(), anisotropy: h.anisotropy() },
        polar_volume: pv,
        mean_width: h.mean_width(),
        volume_product: pv.powf(p) * k.volume().powf(3.0 - p),
    })
}

pub fn compute(c: &Common, a: &ComputeArgs) -> Run {
    let k = parse_body(&a.body)?;
    let mu = parse_measure(&a.measure)?;
    let g = grid(c)?;
    let operators = vec![
        operator("pi", 1.0, &pi(&k, &g)?, &k)?,
        operator("pi_p", a.p, &pi_p(&k, a.p, &g)?, &k)?,
        operator("phi_mu", 1.0, &phi_mu(&k, &mu, &g)?, &k)?,
        operator("phi_mu_p", a.p, &phi_mu_p(&k, &mu, a.p, &g)?, &k)?,
    ];
    let report = ComputeReport {
        schema: SCHEMA,
        command: "compute",
        body: k.describe(),
        measure: mu.describe(),
        p: a.p,
        seed: c.seed,
        grid_level: c.grid_level,
        volume: k.volume(),
        perimeter: k.perimeter(),
        operators,
    };
    match c.format.unwrap_or(Format::Json) {
        Format::Json => write_json(c, &report)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .operators
                .iter()
                .map(|o| {
                    [o.p, o.field.min, o.field.max, o.field.mean, o.polar_volume, o.mean_width, o.volume_product]
                        .iter()
                        .map(f64::to_string)
                        .fold(vec![o.operator.to_string()], |mut v, s| {
                            v.push(s);
                            v
                        })
                })
                .collect();
            write_csv(c, &["operator", "p", "min", "max", "mean", "polar_volume", "mean_width", "volume_product"], &rows)?;
        }
    }
    Ok(())
}

pub fn verify(c: &Common, a: &VerifyArgs) -> Run {
    let check = Check::from_tag(&a.theorem).ok_or_else(|| {
        let tags: Vec<&str> = Check::ALL.iter().map(|c| c.tag()).collect();
        IsovalError::Parse(format!("unknown check '{}'; expected one of {}", a.theorem, tags.join(", ")))
    })?;
    let mut cfg = FuzzConfig::new(vec![check], a.trials, c.seed)?;
    cfg.grid_level = c.grid_level;
    cfg.vertices = a.vertices;
    if let Some(b) = &a.body {
        cfg.body = Some(parse_body(b)?);
    }
    if let Some(m) = &a.measure {
        cfg.measures = vec![parse_measure(m)?];
    }
    if let Some(p) = a.p {
        cfg.ps = vec![p];
    }
    let report = inequalities::fuzz(&cfg)?;
    match c.format.unwrap_or(Format::Json) {
        Format::Json => write_json(c, &report)?,
        Format::Csv => {
            let mut out = sink(c)?;
            report.write_csv(&mut out)?;
            out.flush().map_err(IsovalError::from)?;
        }
    }
    match report.violations() {
        0 => Ok(()),
        n => Err(Failure::Violations(n)),
    }
}

#[derive(Serialize)]
struct Pair {
    lhs: f64,
    rhs: f64,
    /// (lhs − rhs)/rhs
    margin: f64,
}

impl Pair {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, margin: (lhs - rhs) / rhs }
    }
}

#[derive(Serialize)]
struct LhsPaths {
    direct: f64,
    via_polar: f64,
    exact_polar: f64,
}

#[derive(Serialize)]
struct Gromov {
    average: f64,
    mean_width: f64,
}

#[derive(Serialize)]
struct SobolevCharReport {
    schema: &'static str,
    command: &'static str,
    body: String,
    measure: String,
    seed: u64,
    grid_level: usize,
    lhs: f64,
    rhs: f64,
    margin: f64,
    lhs_paths: LhsPaths,
    /// the same body against ∫|u·ν| dS(K, ν), i.e. the discrete measure of mass 1
    sobolev_zhang: Pair,
    gromov: Gromov,
}

pub fn sobolev_char(c: &Common, body: &str, measure: &str) -> Run {
    let k = parse_body(body)?;
    let mu = parse_measure(measure)?;
    let g = grid(c)?;
    let (lhs, rhs) = sobolev::theorem3_check(&k, &mu, &g)?;
    let (zl, zr) = sobolev::sobolev_zhang(&k, &g)?;
    let (average, mean_width) = sobolev::gromov_compare(&mu, &g)?;
    let report = SobolevCharReport {
        schema: SCHEMA,
        command: "sobolev char",
        body: k.describe(),
        measure: mu.describe(),
        seed: c.seed,
        grid_level: c.grid_level,
        lhs: lhs.value,
        rhs,
        margin: (lhs.value - rhs) / rhs,
        lhs_paths: LhsPaths { direct: lhs.direct, via_polar: lhs.via_polar, exact_polar: lhs.value },
        sobolev_zhang: Pair::new(zl.value, zr),
        gromov: Gromov { average, mean_width },
    };
    match c.format.unwrap_or(Format::Json) {
        Format::Json => write_json(c, &report)?,
        Format::Csv => write_csv(
            c,
            &["lhs", "rhs", "margin"],
            &[vec![report.lhs.to_string(), report.rhs.to_string(), report.margin.to_string()]],
        )?,
    }
    Ok(())
}

#[derive(Serialize)]
struct SobolevGridReport {
    schema: &'static str,
    command: &'static str,
    source: String,
    p: f64,
    measure: String,
    dims: [usize; 3],
    bbox: [[f64; 2]; 3],
    spacing: f64,
    boundary_max: f64,
    seed: u64,
    grid_level: usize,
    lhs: f64,
    rhs: f64,
    ratio: f64,
    margin: f64,
}

pub fn sobolev_grid(c: &Common, a: &SobolevGridArgs) -> Run {
    let mu = parse_measure(&a.measure)?;
    let (f, source) = match &a.input {
        Some(path) => (GridFunction::read(File::open(path).map_err(IsovalError::from)?)?, format!("raster:{}", path.display())),
        None => {
            let profile = Profile::from_name(&a.profile)
                .ok_or_else(|| IsovalError::Parse(format!("unknown profile '{}'; expected gaussian, aubin-talenti or bump", a.profile)))?;
            let scale = a.scale.unwrap_or(if profile == Profile::AubinTalenti { 2.0 } else { 1.0 });
            let f = GridFunction::profile(profile, a.p, scale, a.points, a.half_width)?;
            (f, format!("{}:{scale}", profile.name()))
        }
    };
    if let Some(path) = &a.save {
        let mut w = BufWriter::new(File::create(path).map_err(IsovalError::from)?);
        f.write(&mut w)?;
        w.flush().map_err(IsovalError::from)?;
    }
    let g = grid(c)?;
    let (lhs, rhs) = sobolev::lp_sobolev_check(&f, &mu, a.p, &g)?;
    let report = SobolevGridReport {
        schema: SCHEMA,
        command: "sobolev grid",
        source,
        p: a.p,
        measure: mu.describe(),
        dims: f.dims(),
        bbox: f.bbox(),
        spacing: f.spacing(),
        boundary_max: f.boundary_max(),
        seed: c.seed,
        grid_level: c.grid_level,
        lhs,
        rhs,
        ratio: lhs / rhs,
        margin: (lhs - rhs) / rhs,
    };
    match c.format.unwrap_or(Format::Json) {
        Format::Json => write_json(c, &report)?,
        Format::Csv => write_csv(
            c,
            &["lhs", "rhs", "ratio", "margin"],
            &[vec![lhs.to_string(), rhs.to_string(), report.ratio.to_string(), report.margin.to_string()]],
        )?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ExtremizeReport {
    schema: &'static str,
    command: &'static str,
    start: String,
    measure: String,
    p: f64,
    steps: usize,
    seed: u64,
    grid_level: usize,
    trajectory: Vec<inequalities::TrajectoryStep>,
}

pub fn extremize(c: &Common, a: &ExtremizeArgs) -> Run {
    let start = parse_body(&a.start)?;
    let mu = parse_measure(&a.measure)?;
    let g = grid(c)?;
    let trajectory = inequalities::extremize(&start, &mu, a.p, a.steps, c.seed, &g)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let rows: Vec<Vec<String>> = trajectory
                .iter()
                .map(|s| {
                    let axes: Vec<String> = match &s.semiaxes {
                        Some(v) => v.iter().map(f64::to_string).collect(),
                        None => vec![String::new(); 3],
                    };
                    let mut row = vec![s.step.to_string()];
                    row.extend(axes);
                    row.push(s.product.to_string());
                    row.push(s.body.clone());
                    row
                })
                .collect();
            write_csv(c, &["step", "a1", "a2", "a3", "product", "body"], &rows)?;
        }
        Format::Json => write_json(
            c,
            &ExtremizeReport {
                schema: SCHEMA,
                command: "extremize",
                start: start.describe(),
                measure: mu.describe(),
                p: a.p,
                steps: a.steps,
                seed: c.seed,
                grid_level: c.grid_level,
                trajectory,
            },
        )?,
    }
    Ok(())
}

#[derive(Serialize)]
struct GridReport {
    schema: &'static str,
    command: &'static str,
    dim: usize,
    grid_level: usize,
    /// rows [u1, u2, u3, w]
    nodes: Vec<[f64; 4]>,
}

pub fn grid_export(c: &Common) -> Run {
    let g = grid(c)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = sink(c)?;
            g.write_csv(&mut out)?;
            out.flush().map_err(IsovalError::from)?;
        }
        Format::Json => write_json(
            c,
            &GridReport {
                schema: SCHEMA,
                command: "grid",
                dim: 3,
                grid_level: c.grid_level,
                nodes: g.nodes().map(|(u, w)| [u[0], u[1], u[2], w]).collect(),
            },
        )?,
    }
    Ok(())
}
