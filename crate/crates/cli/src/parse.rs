//! Body and measure mini-languages.
//!
//! Bodies: `cube`, `simplex`, `ball:r`, `ellipsoid:a,b,c`, `hull:@file`
//! (JSON vertex list or OFF). Measures: `kind:mass[:params]` with kind one of
//! `discrete`, `equatorial`, `lebesgue`, `blend`, `latitude:mass:t`, or
//! `@file` holding a JSON measure spec.

use isoval_core::bodies::{load_vertices, polytope_from_vertices};
use isoval_core::zonal::MeasureSpec;
use isoval_core::{Body, IsovalError, Result, ZonalMeasure};
use std::path::Path;

fn number(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| IsovalError::Parse(format!("{what}: '{s}' is not a number")))
}

pub fn parse_body(s: &str) -> Result<Body> {
    let (kind, rest) = match s.split_once(':') {
        Some((k, r)) => (k, Some(r)),
        None => (s, None),
    };
    match (kind, rest) {
        ("cube", None) => Ok(Body::unit_cube()),
        ("simplex", None) => Ok(Body::regular_simplex()),
        ("ball", None) => Ok(Body::unit_ball(3)),
        ("ball", Some(r)) => Body::ball(vec![0.0; 3], number(r, "ball radius")?),
        ("ellipsoid", Some(r)) => {
            let axes = r.split(',').map(|a| number(a, "semiaxis")).collect::<Result<Vec<_>>>()?;
            if axes.len() != 3 {
                return Err(IsovalError::Parse(format!("ellipsoid needs 3 semiaxes, got {}", axes.len())));
            }
            Body::axis_ellipsoid(axes)
        }
        ("hull", Some(r)) => {
            let path = r.strip_prefix('@').unwrap_or(r);
            polytope_from_vertices(&load_vertices(Path::new(path))?)
        }
        _ => Err(IsovalError::Parse(format!("unknown body '{s}'"))),
    }
}

pub fn parse_measure(s: &str) -> Result<ZonalMeasure> {
    if let Some(path) = s.strip_prefix('@') {
        return MeasureSpec::from_json(&std::fs::read_to_string(path)?)?.build(3);
    }
    let parts: Vec<&str> = s.split(':').collect();
    let mass = match parts.get(1) {
        Some(m) => number(m, "measure mass")?,
        None => return Err(IsovalError::Parse(format!("measure '{s}' needs a mass, e.g. {s}:0.5"))),
    };
    match (parts[0], parts.len()) {
        ("discrete" | "discrete_poles", 2) => ZonalMeasure::discrete_poles(3, mass),
        ("equatorial", 2) => ZonalMeasure::equatorial(3, mass),
        ("lebesgue", 2) => ZonalMeasure::lebesgue(3, mass),
        ("blend", 2) => ZonalMeasure::blend(3, mass),
        ("latitude", 3) => ZonalMeasure::latitude(3, number(parts[2], "latitude height")?, mass),
        _ => Err(IsovalError::Parse(format!("unknown measure '{s}'"))),
    }
}
