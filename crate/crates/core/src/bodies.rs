//! Convex bodies, their support functions and surface-area measures, and the
//! polar-volume / mean-width functionals on sampled support functions.

use crate::error::{IsovalError, Result};
use crate::hull::convex_hull;
use crate::linalg::{cross3, dot, norm, Matrix};
use crate::scalar::{csum, Real};
use crate::special::{ball_volume, gauss_legendre_on, sphere_area};
use crate::sphere_quad::{Rotation, SphericalGrid, UnitVector};
use serde::Deserialize;
use std::io::Write;
use std::path::Path;

#[derive(Clone, Debug)]
pub struct Facet<T> {
    pub normal: UnitVector<T>,
    /// Distance of the facet plane from the origin.
    pub offset: T,
    pub area: T,
    /// Vertex indices, counter-clockwise seen from outside.
    pub polygon: Vec<usize>,
}

/// Convex polytope in R³, recentred so its centroid is the origin.
#[derive(Clone, Debug)]
pub struct Polytope<T> {
    vertices: Vec<[T; 3]>,
    facets: Vec<Facet<T>>,
    volume: T,
    /// Generators g with h(u) = Σ|u·g| when the polytope is a zonotope.
    zonotope: Option<Vec<[T; 3]>>,
}

impl<T: Real> Polytope<T> {
    pub fn vertices(&self) -> &[[T; 3]] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet<T>] {
        &self.facets
    }

    pub fn volume(&self) -> T {
        self.volume
    }

    pub fn zonotope_generators(&self) -> Option<&[[T; 3]]> {
        self.zonotope.as_deref()
    }

    pub fn support(&self, u: &[T]) -> T {
        self.vertices.iter().map(|v| dot(v, u)).fold(T::neg_infinity(), T::max)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .facets
            .iter()
            .flat_map(|f| {
                let m = f.polygon.len();
                (0..m).map(move |i| {
                    let (a, b) = (f.polygon[i], f.polygon[(i + 1) % m]);
                    (a.min(b), a.max(b))
                })
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Clone, Debug)]
pub enum Body<T> {
    Ball { center: Vec<T>, radius: T },
    /// {R·diag(a)·Rᵀ·x : |x| ≤ 1}
    Ellipsoid { semiaxes: Vec<T>, rotation: Rotation<T> },
    Polytope(Polytope<T>),
}

/// Convex hull of `points`, recentred at its volume centroid.
pub fn polytope_from_vertices<T: Real>(points: &[Vec<T>]) -> Result<Body<T>> {
    if let Some(p) = points.iter().find(|p| p.len() != 3) {
        return Err(if p.len() >= 3 {
            IsovalError::ThreeDimensionalOnly("polytope construction")
        } else {
            IsovalError::DimensionMismatch { expected: 3, got: p.len() }
        });
    }
    let pts: Vec<[T; 3]> = points.iter().map(|p| [p[0], p[1], p[2]]).collect();
    polytope_from_points(&pts)
}

pub fn polytope_from_points<T: Real>(points: &[[T; 3]]) -> Result<Body<T>> {
    let hull = convex_hull(points)?;
    let c = hull.centroid;
    let mut index = vec![usize::MAX; points.len()];
    let mut vertices = Vec::with_capacity(hull.vertices.len());
    for (k, &i) in hull.vertices.iter().enumerate() {
        index[i] = k;
        let p = points[i];
        vertices.push([p[0] - c[0], p[1] - c[1], p[2] - c[2]]);
    }
    let facets: Vec<Facet<T>> = hull
        .faces
        .iter()
        .map(|f| Facet {
            normal: UnitVector::new_unchecked(f.normal.to_vec()),
            offset: f.offset - dot(&f.normal, &c),
            area: f.area,
            polygon: f.polygon.iter().map(|&i| index[i]).collect(),
        })
        .collect();
    if facets.iter().any(|f| f.offset <= T::zero()) {
        return Err(IsovalError::OriginNotInterior);
    }
    let mut poly = Polytope { vertices, facets, volume: hull.volume, zonotope: None };
    poly.zonotope = detect_zonotope(&poly);
    Ok(Body::Polytope(poly))
}

/// Edge classes of a zonotope have a common length; the generators are the
/// half-edges. Confirmed by matching facet supports and volume.
fn detect_zonotope<T: Real>(poly: &Polytope<T>) -> Option<Vec<[T; 3]>> {
    let tol = T::lit(1e-9);
    if poly.facets.iter().any(|f| f.polygon.len() % 2 == 1) {
        return None;
    }
    let mut classes: Vec<([T; 3], T)> = Vec::new();
    for (a, b) in poly.edges() {
        let e = [
            poly.vertices[b][0] - poly.vertices[a][0],
            poly.vertices[b][1] - poly.vertices[a][1],
            poly.vertices[b][2] - poly.vertices[a][2],
        ];
        let len = norm(&e);
        let d = [e[0] / len, e[1] / len, e[2] / len];
        match classes.iter().find(|(c, _)| dot(c, &d).abs() > T::one() - tol) {
            Some((_, l)) => {
                if (*l - len).abs() > tol * len.max(T::one()) {
                    return None;
                }
            }
            None => classes.push((d, len)),
        }
    }
    let half = T::lit(0.5);
    let gens: Vec<[T; 3]> = classes.iter().map(|(d, l)| [d[0] * *l * half, d[1] * *l * half, d[2] * *l * half]).collect();
    let hz = |u: &[T]| csum(gens.iter().map(|g| dot(u, g).abs()));
    let scale = poly.facets.iter().map(|f| f.offset).fold(T::zero(), T::max);
    if poly.facets.iter().any(|f| (hz(f.normal.coords()) - f.offset).abs() > tol * scale) {
        return None;
    }
    let mut vol = Vec::new();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            for k in j + 1..gens.len() {
                vol.push(dot(&gens[i], &cross3(&gens[j], &gens[k])).abs());
            }
        }
    }
    let zvol = T::lit(8.0) * csum(vol);
    ((zvol - poly.volume).abs() <= tol * poly.volume.max(T::one())).then_some(gens)
}

impl<T: Real> Body<T> {
    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        if center.len() < 3 {
            return Err(IsovalError::Dimension(center.len()));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(IsovalError::InvalidParameter(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Body::Ball { center, radius })
    }

    pub fn unit_ball(n: usize) -> Self {
        Body::Ball { center: vec![T::zero(); n], radius: T::one() }
    }

    pub fn ellipsoid(semiaxes: Vec<T>, rotation: Rotation<T>) -> Result<Self> {
        if semiaxes.len() < 3 {
            return Err(IsovalError::Dimension(semiaxes.len()));
        }
        if semiaxes.len() != rotation.dim() {
            return Err(IsovalError::DimensionMismatch { expected: semiaxes.len(), got: rotation.dim() });
        }
        if semiaxes.iter().any(|&a| !(a > T::zero()) || !a.is_finite()) {
            return Err(IsovalError::InvalidParameter("ellipsoid semiaxes must be positive".into()));
        }
        Ok(Body::Ellipsoid { semiaxes, rotation })
    }

    pub fn axis_ellipsoid(semiaxes: Vec<T>) -> Result<Self> {
        let n = semiaxes.len();
        Self::ellipsoid(semiaxes, Rotation::identity(n))
    }

    /// The cube [−½, ½]³.
    pub fn unit_cube() -> Self {
        let h = T::lit(0.5);
        let mut pts = Vec::with_capacity(8);
        for i in 0..8 {
            let s = |b: usize| if i >> b & 1 == 1 { h } else { -h };
            pts.push([s(0), s(1), s(2)]);
        }
        polytope_from_points(&pts).expect("cube is full-dimensional")
    }

    /// Regular tetrahedron inscribed in the unit sphere.
    pub fn regular_simplex() -> Self {
        let r = T::one() / T::lit(3.0).sqrt();
        let pts = [[r, r, r], [r, -r, -r], [-r, r, -r], [-r, -r, r]];
        polytope_from_points(&pts).expect("simplex is full-dimensional")
    }

    pub fn dim(&self) -> usize {
        match self {
            Body::Ball { center, .. } => center.len(),
            Body::Ellipsoid { semiaxes, .. } => semiaxes.len(),
            Body::Polytope(_) => 3,
        }
    }

    /// Symmetric positive M with body = c + M·Bⁿ (balls and ellipsoids).
    pub fn shape_matrix(&self) -> Option<Matrix<T>> {
        match self {
            Body::Ball { center, radius } => Some(Matrix::diagonal(&vec![*radius; center.len()])),
            Body::Ellipsoid { semiaxes, rotation } => {
                let r = rotation.matrix();
                Some(r.mul(&Matrix::diagonal(semiaxes)).mul(&r.transpose()))
            }
            Body::Polytope(_) => None,
        }
    }

    pub fn center(&self) -> Vec<T> {
        match self {
            Body::Ball { center, .. } => center.clone(),
            _ => vec![T::zero(); self.dim()],
        }
    }

    pub fn support(&self, u: &[T]) -> T {
        match self {
            Body::Ball { center, radius } => dot(center, u) + *radius * norm(u),
            Body::Ellipsoid { .. } => norm(&self.shape_matrix().unwrap().apply(u)),
            Body::Polytope(p) => p.support(u),
        }
    }

    pub fn volume(&self) -> T {
        match self {
            Body::Ball { center, radius } => ball_volume::<T>(center.len()) * radius.powi(center.len() as i32),
            Body::Ellipsoid { semiaxes, .. } => {
                ball_volume::<T>(semiaxes.len()) * semiaxes.iter().fold(T::one(), |a, &b| a * b)
            }
            Body::Polytope(p) => p.volume,
        }
    }

    /// Surface area. Ellipsoids use a 128 × 128 Gauss–Legendre product rule
    /// on the parameter sphere (n = 3) or the n-dimensional pushforward on
    /// a default grid otherwise.
    pub fn perimeter(&self) -> T {
        match self {
            Body::Ball { center, radius } => sphere_area::<T>(center.len()) * radius.powi(center.len() as i32 - 1),
            Body::Polytope(p) => csum(p.facets.iter().map(|f| f.area)),
            Body::Ellipsoid { semiaxes, .. } => {
                if semiaxes.len() == 3 {
                    ellipsoid_area3(semiaxes)
                } else {
                    let grid = crate::sphere_quad::make_grid::<T>(semiaxes.len(), crate::sphere_quad::DEFAULT_LEVEL)
                        .expect("n >= 3");
                    self.surface_measure(&grid).total_mass()
                }
            }
        }
    }

    /// Origin strictly inside.
    pub fn contains_origin(&self) -> bool {
        match self {
            Body::Ball { center, radius } => norm(center) < *radius,
            Body::Ellipsoid { .. } => true,
            Body::Polytope(p) => p.facets.iter().all(|f| f.offset > T::zero()),
        }
    }

    /// S(K,·): facet atoms for polytopes, grid pushforward for smooth bodies.
    pub fn surface_measure(&self, grid: &SphericalGrid<T>) -> SurfaceMeasure<T> {
        match self {
            Body::Polytope(p) => SurfaceMeasure {
                dim: 3,
                normals: p.facets.iter().flat_map(|f| f.normal.coords().to_vec()).collect(),
                weights: p.facets.iter().map(|f| f.area).collect(),
                p: T::one(),
            },
            _ => {
                let n = self.dim();
                let m = self.shape_matrix().unwrap();
                let minv = m.inverse().expect("positive semiaxes");
                let det = m.determinant().abs();
                let mut normals = Vec::with_capacity(grid.len() * n);
                let mut weights = Vec::with_capacity(grid.len());
                for (y, w) in grid.nodes() {
                    // x = M⁻¹y is normal to the boundary at c + M·y
                    let x = minv.apply(y);
                    let r = norm(&x);
                    normals.extend(x.iter().map(|&xi| xi / r));
                    weights.push(det * r * w);
                }
                SurfaceMeasure { dim: n, normals, weights, p: T::one() }
            }
        }
    }

    /// S_p(K,·) = h(K,·)^{1−p} dS(K,·).
    pub fn lp_surface_measure(&self, p: T, grid: &SphericalGrid<T>) -> Result<SurfaceMeasure<T>> {
        check_p(p)?;
        if !self.contains_origin() {
            return Err(IsovalError::OriginNotInterior);
        }
        let mut s = self.surface_measure(grid);
        if p != T::one() {
            let n = s.dim;
            for i in 0..s.weights.len() {
                let h = self.support(&s.normals[i * n..(i + 1) * n]);
                if h <= T::zero() {
                    return Err(IsovalError::NonPositiveSupport(h.as_f64()));
                }
                s.weights[i] *= h.powf(T::one() - p);
            }
        }
        s.p = p;
        Ok(s)
    }

    /// Image under the linear map `a`, recentred.
    pub fn linear_image(&self, a: &Matrix<T>) -> Result<Self> {
        if a.dim() != self.dim() {
            return Err(IsovalError::DimensionMismatch { expected: self.dim(), got: a.dim() });
        }
        if a.determinant().abs() <= T::epsilon() {
            return Err(IsovalError::Degenerate("linear map is singular".into()));
        }
        match self {
            Body::Polytope(p) => {
                let pts: Vec<[T; 3]> = p
                    .vertices
                    .iter()
                    .map(|v| {
                        let w = a.apply(v);
                        [w[0], w[1], w[2]]
                    })
                    .collect();
                polytope_from_points(&pts)
            }
            _ => {
                let am = a.mul(&self.shape_matrix().unwrap());
                ellipsoid_from_matrix(&am)
            }
        }
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        if !(c > T::zero()) {
            return Err(IsovalError::InvalidParameter("scale factor must be positive".into()));
        }
        match self {
            Body::Ball { center, radius } => Self::ball(center.iter().map(|&x| x * c).collect(), *radius * c),
            Body::Ellipsoid { semiaxes, rotation } => {
                Self::ellipsoid(semiaxes.iter().map(|&x| x * c).collect(), rotation.clone())
            }
            Body::Polytope(_) => self.linear_image(&Matrix::diagonal(&vec![c; 3])),
        }
    }

    pub fn rotated(&self, r: &Rotation<T>) -> Result<Self> {
        match self {
            Body::Ball { center, radius } => Self::ball(r.apply(center), *radius),
            _ => self.linear_image(r.matrix()),
        }
    }

    /// Short human-readable descriptor.
    pub fn describe(&self) -> String {
        match self {
            Body::Ball { radius, .. } => format!("ball:{radius}"),
            Body::Ellipsoid { semiaxes, .. } => {
                let s: Vec<String> = semiaxes.iter().map(|a| format!("{a}")).collect();
                format!("ellipsoid:{}", s.join(","))
            }
            Body::Polytope(p) => format!("polytope[{}v,{}f]", p.vertices.len(), p.facets.len()),
        }
    }
}

pub(crate) fn check_p<T: Real>(p: T) -> Result<()> {
    if !(p >= T::one()) || !p.is_finite() {
        return Err(IsovalError::InvalidParameter(format!("p must be finite and >= 1, got {p}")));
    }
    Ok(())
}

/// Ellipsoid A·Bⁿ via the polar decomposition AAᵀ = R·diag(a²)·Rᵀ.
pub fn ellipsoid_from_matrix<T: Real>(a: &Matrix<T>) -> Result<Body<T>> {
    let (vals, mut vecs) = a.mul(&a.transpose()).symmetric_eigen();
    if vecs.determinant() < T::zero() {
        for i in 0..vecs.dim() {
            vecs.set(i, 0, -vecs.get(i, 0));
        }
    }
    let semiaxes: Vec<T> = vals.iter().map(|&v| v.max(T::zero()).sqrt()).collect();
    Body::ellipsoid(semiaxes, Rotation::from_matrix(vecs, T::lit(1e-6))?)
}

fn ellipsoid_area3<T: Real>(a: &[T]) -> T {
    // ∫_{S²} |det M|·|M⁻¹y| dσ(y) in the principal frame
    let det = a[0] * a[1] * a[2];
    let mut acc = Vec::new();
    let half = T::lit(0.5);
    let nphi = 128;
    let dphi = T::TAU() / T::from_usize_lossy(nphi);
    for (t, wt) in gauss_legendre_on(64, -T::one(), T::zero()).chain(gauss_legendre_on(64, T::zero(), T::one())) {
        let r = (T::one() - t * t).sqrt();
        for k in 0..nphi {
            let phi = (T::from_usize_lossy(k) + half) * dphi;
            let y = [r * phi.cos() / a[0], r * phi.sin() / a[1], t / a[2]];
            acc.push(det * norm(&y) * wt * dphi);
        }
    }
    csum(acc)
}

/// Discrete measure on S^{n-1}: unit normals with positive weights.
#[derive(Clone, Debug)]
pub struct SurfaceMeasure<T> {
    dim: usize,
    normals: Vec<T>,
    weights: Vec<T>,
    p: T,
}

impl<T: Real> SurfaceMeasure<T> {
    pub fn new(dim: usize, atoms: Vec<(UnitVector<T>, T)>, p: T) -> Result<Self> {
        if atoms.iter().any(|(u, w)| u.dim() != dim || !(*w > T::zero())) {
            return Err(IsovalError::InvalidParameter("surface measure atoms need positive weights".into()));
        }
        Ok(Self {
            dim,
            normals: atoms.iter().flat_map(|(u, _)| u.coords().to_vec()).collect(),
            weights: atoms.iter().map(|a| a.1).collect(),
            p,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn normal(&self, i: usize) -> &[T] {
        &self.normals[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[T], T)> + '_ {
        self.normals.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> T {
        csum(self.weights.iter().copied())
    }

    /// |Σ wᵢνᵢ|, zero for the surface-area measure of a closed body.
    pub fn closure_residual(&self) -> T {
        let v: Vec<T> = (0..self.dim).map(|k| csum(self.atoms().map(|(u, w)| u[k] * w))).collect();
        norm(&v)
    }
}

/// A support function sampled on a grid.
#[derive(Clone, Debug)]
pub struct SupportField<T> {
    grid: SphericalGrid<T>,
    values: Vec<T>,
    label: String,
    zonotope: Option<Vec<[T; 3]>>,
}

impl<T: Real> SupportField<T> {
    pub fn new(grid: SphericalGrid<T>, values: Vec<T>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(IsovalError::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(IsovalError::NonFinite(format!("support value {v}")));
        }
        if let Some(v) = values.iter().find(|&&v| v <= T::zero()) {
            return Err(IsovalError::NonPositiveSupport(v.as_f64()));
        }
        Ok(Self { grid, values, label: label.into(), zonotope: None })
    }

    pub fn from_fn<F: Fn(&[T]) -> T>(grid: &SphericalGrid<T>, f: F, label: impl Into<String>) -> Result<Self> {
        let values = grid.nodes().map(|(u, _)| f(u)).collect();
        Self::new(grid.clone(), values, label)
    }

    /// Support field of a body; zonotopes keep their generators.
    pub fn of_body(body: &Body<T>, grid: &SphericalGrid<T>) -> Result<Self> {
        let mut f = Self::from_fn(grid, |u| body.support(u), body.describe())?;
        if let Body::Polytope(p) = body {
            f.zonotope = p.zonotope.clone();
        }
        Ok(f)
    }

    /// Attaches zonotope generators (h = Σ|u·g|), used for exact functionals.
    pub fn with_zonotope(mut self, generators: Vec<[T; 3]>) -> Self {
        self.zonotope = Some(generators);
        self
    }

    pub fn grid(&self) -> &SphericalGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn zonotope_generators(&self) -> Option<&[[T; 3]]> {
        self.zonotope.as_deref()
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Surface-weighted mean value.
    pub fn mean(&self) -> T {
        csum(self.values.iter().zip(self.grid.weights()).map(|(&h, &w)| h * w)) / csum(self.grid.weights().iter().copied())
    }

    /// max/min − 1
    pub fn anisotropy(&self) -> T {
        self.max() / self.min() - T::one()
    }

    /// |K°| for the body K with this support function.
    pub fn polar_volume(&self) -> Result<T> {
        match &self.zonotope {
            Some(g) if self.grid.dim() == 3 => zonotope_polar_volume(g),
            _ => self.polar_volume_quadrature(),
        }
    }

    /// (1/n)·Σ h(uᵢ)^{−n}·wᵢ
    pub fn polar_volume_quadrature(&self) -> Result<T> {
        let n = self.grid.dim();
        let nf = T::from_usize_lossy(n);
        Ok(csum(self.values.iter().zip(self.grid.weights()).map(|(&h, &w)| h.powi(-(n as i32)) * w)) / nf)
    }

    pub fn mean_width(&self) -> T {
        match &self.zonotope {
            Some(g) if self.grid.dim() == 3 => {
                // ∫|u·g| du = 2ω₂|g|
                let n = 3;
                let s = csum(g.iter().map(|g| norm(g)));
                T::lit(2.0) / sphere_area::<T>(n) * T::lit(2.0) * ball_volume::<T>(n - 1) * s
            }
            _ => self.mean_width_quadrature(),
        }
    }

    /// (2/(nω_n))·Σ h(uᵢ)wᵢ
    pub fn mean_width_quadrature(&self) -> T {
        let n = self.grid.dim();
        T::lit(2.0) / sphere_area::<T>(n) * csum(self.values.iter().zip(self.grid.weights()).map(|(&h, &w)| h * w))
    }

    /// Rows `u₁,…,u_n,w,h`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.grid.dim();
        let header: Vec<String> = (1..=n).map(|i| format!("u{i}")).chain(["w".into(), "h".into()]).collect();
        writeln!(out, "{}", header.join(","))?;
        for ((u, w), h) in self.grid.nodes().zip(&self.values) {
            let row: Vec<String> = u.iter().chain([w, *h].iter()).map(|x| format!("{:e}", x.as_f64())).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn polar_volume<T: Real>(h: &SupportField<T>) -> Result<T> {
    h.polar_volume()
}

pub fn mean_width<T: Real>(h: &SupportField<T>) -> T {
    h.mean_width()
}

/// Merges parallel generators (g and −g give the same segment direction).
pub fn merge_generators<T: Real>(gens: &[[T; 3]]) -> Vec<[T; 3]> {
    let tol = T::lit(1e-12);
    let mut out: Vec<[T; 3]> = Vec::new();
    for g in gens {
        let r = norm(g);
        if r == T::zero() {
            continue;
        }
        match out.iter_mut().find(|o| {
            let c = dot(*o, g) / (norm(*o) * r);
            c.abs() > T::one() - tol
        }) {
            Some(o) => {
                let s = if dot(o, g) >= T::zero() { T::one() } else { -T::one() };
                for i in 0..3 {
                    o[i] += s * g[i];
                }
            }
            None => out.push(*g),
        }
    }
    out
}

/// Exact volume of the polar of Z = Σ[−gᵢ, gᵢ] ⊂ R³: the hull of ±m/h_Z(m)
/// over the facet normals m = gᵢ × gⱼ of Z.
pub fn zonotope_polar_volume<T: Real>(generators: &[[T; 3]]) -> Result<T> {
    let g = merge_generators(generators);
    let hz = |u: &[T]| csum(g.iter().map(|gi| dot(u, gi).abs()));
    let mut pts = Vec::with_capacity(g.len() * g.len());
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            let m = cross3(&g[i], &g[j]);
            let r = norm(&m);
            let m = [m[0] / r, m[1] / r, m[2] / r];
            let h = hz(&m);
            if h <= T::zero() {
                return Err(IsovalError::Degenerate("zonotope is not full-dimensional".into()));
            }
            pts.push([m[0] / h, m[1] / h, m[2] / h]);
            pts.push([-m[0] / h, -m[1] / h, -m[2] / h]);
        }
    }
    convex_hull(&pts)
        .map(|h| h.volume)
        .map_err(|_| IsovalError::Degenerate("zonotope is not full-dimensional".into()))
}

#[derive(Deserialize)]
struct VertexFile {
    vertices: Vec<Vec<f64>>,
}

/// `{"vertices": [[x, y, z], …]}`
pub fn parse_vertices_json(text: &str) -> Result<Vec<Vec<f64>>> {
    let f: VertexFile = serde_json::from_str(text)?;
    Ok(f.vertices)
}

/// Vertex block of an OFF file; the face list is ignored (the hull is rebuilt).
pub fn parse_off(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let first = lines.next().ok_or_else(|| IsovalError::Parse("empty OFF file".into()))?;
    let counts_line = if first.starts_with("OFF") {
        let rest = first.trim_start_matches("OFF").trim();
        if rest.is_empty() {
            lines.next().ok_or_else(|| IsovalError::Parse("missing OFF counts".into()))?
        } else {
            rest
        }
    } else {
        return Err(IsovalError::Parse("OFF header missing".into()));
    };
    let nv: usize = counts_line
        .split_whitespace()
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| IsovalError::Parse(format!("bad OFF counts line: {counts_line}")))?;
    let mut out = Vec::with_capacity(nv);
    for _ in 0..nv {
        let l = lines.next().ok_or_else(|| IsovalError::Parse("OFF file ends before all vertices".into()))?;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|e| IsovalError::Parse(format!("{s}: {e}"))))
            .collect::<Result<_>>()?;
        out.push(v);
    }
    Ok(out)
}

/// Reads vertices from a `.off` or JSON file.
pub fn load_vertices(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let is_off = path.extension().map(|e| e.eq_ignore_ascii_case("off")).unwrap_or(false) || text.trim_start().starts_with("OFF");
    if is_off {
        parse_off(&text)
    } else {
        parse_vertices_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_quad::make_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid() -> SphericalGrid<f64> {
        make_grid(3, 32).unwrap()
    }

    fn random_hull(seed: u64, k: usize) -> Body<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..k).map(|_| UnitVector::<f64>::random(3, &mut rng).into_inner()).collect();
        polytope_from_vertices(&pts).unwrap()
    }

    #[test]
    fn cube_facets() {
        let Body::Polytope(p) = Body::<f64>::unit_cube() else { unreachable!() };
        assert_eq!(p.facets().len(), 6);
        for f in p.facets() {
            assert!((f.area - 1.0).abs() < 1e-14 && (f.offset - 0.5).abs() < 1e-14);
            let axis = f.normal.coords().iter().filter(|x| (x.abs() - 1.0).abs() < 1e-14).count();
            assert_eq!(axis, 1);
        }
        assert!((p.volume() - 1.0).abs() < 1e-14);
        assert_eq!(p.zonotope_generators().unwrap().len(), 3);
    }

    #[test]
    fn simplex_closedness_and_volume() {
        let b = Body::<f64>::regular_simplex();
        let Body::Polytope(p) = &b else { unreachable!() };
        assert_eq!(p.facets().len(), 4);
        assert!(p.zonotope_generators().is_none());
        let s = b.surface_measure(&grid());
        assert!(s.closure_residual() < 1e-10);
        let v = csum(p.facets().iter().map(|f| f.offset * f.area)) / 3.0;
        assert!((v - p.volume()).abs() < 1e-12);
        // edge 2√(2/3) gives volume a³/(6√2)
        let a = 2.0 * (2.0_f64 / 3.0).sqrt();
        assert!((p.volume() - a.powi(3) / (6.0 * 2.0_f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn random_hull_volume_below_ball() {
        let small = random_hull(1, 100).volume();
        let large = random_hull(2, 2000).volume();
        let omega = 4.0 * PI / 3.0;
        assert!(small < large && large < omega);
        assert!((omega - large) / omega < 0.02);
    }

    #[test]
    fn degenerate_and_bad_input_rejected() {
        let flat = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]];
        assert!(matches!(polytope_from_vertices(&flat), Err(IsovalError::Degenerate(_))));
        assert!(polytope_from_vertices(&[vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn ball_and_ellipsoid_measures() {
        let g = grid();
        let b = Body::<f64>::unit_ball(3);
        assert!((b.surface_measure(&g).total_mass() - 4.0 * PI).abs() < 1e-8);
        let sp = b.scaled(2.0).unwrap().lp_surface_measure(2.0, &g).unwrap();
        assert!((sp.total_mass() - 16.0 * PI / 2.0).abs() < 1e-8);
        // prolate spheroid a = 2, b = c = 1
        let e = Body::axis_ellipsoid(vec![2.0, 1.0, 1.0]).unwrap();
        let ecc = (1.0 - 0.25_f64).sqrt();
        let exact = 2.0 * PI * (1.0 + 2.0 * ecc.asin() / ecc);
        let s = e.surface_measure(&g);
        assert!((s.total_mass() - exact).abs() < 1e-6 * exact);
        assert!((e.perimeter() - exact).abs() < 1e-10 * exact);
        assert!(s.closure_residual() < 1e-9);
        assert!((e.volume() - 4.0 * PI / 3.0 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn lp_measure_of_cube() {
        let g = grid();
        let cube = Body::<f64>::unit_cube();
        let s1 = cube.lp_surface_measure(1.0, &g).unwrap();
        assert_eq!(s1.weights(), cube.surface_measure(&g).weights());
        let s2 = cube.lp_surface_measure(2.0, &g).unwrap();
        assert!(s2.weights().iter().all(|&w| (w - 2.0).abs() < 1e-14));
        assert!(cube.lp_surface_measure(0.5, &g).is_err());
        let off = Body::ball(vec![2.0, 0.0, 0.0], 1.0).unwrap();
        assert!(matches!(off.lp_surface_measure(2.0, &g), Err(IsovalError::OriginNotInterior)));
    }

    #[test]
    fn support_values() {
        let cube = Body::<f64>::unit_cube();
        assert!((cube.support(&[1.0, 0.0, 0.0]) - 0.5).abs() < 1e-15);
        let r = Body::ball(vec![0.0; 3], 2.5).unwrap();
        assert_eq!(r.support(&[0.0, 0.6, 0.8]), 2.5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = Body::axis_ellipsoid(vec![3.0, 2.0, 0.5]).unwrap();
        for _ in 0..20 {
            let u = UnitVector::<f64>::random(3, &mut rng);
            let c = u.coords();
            let closed = (9.0 * c[0] * c[0] + 4.0 * c[1] * c[1] + 0.25 * c[2] * c[2]).sqrt();
            assert!((e.support(c) - closed).abs() < 1e-14);
            // boundary sampling never exceeds the support value and gets close
            let mut best = f64::NEG_INFINITY;
            for _ in 0..20000 {
                let y = UnitVector::<f64>::random(3, &mut rng);
                let x = [3.0 * y.coords()[0], 2.0 * y.coords()[1], 0.5 * y.coords()[2]];
                best = best.max(dot(&x, c));
            }
            assert!(best <= closed + 1e-12 && best > closed * 0.97);
        }
    }

    #[test]
    fn polar_volume_examples() {
        let g = grid();
        let ball = SupportField::from_fn(&g, |_| 2.0, "r=2").unwrap();
        assert!((ball.polar_volume().unwrap() - 4.0 * PI / 3.0 / 8.0).abs() < 1e-8);
        let pib = SupportField::from_fn(&g, |_| PI, "pi").unwrap();
        assert!((pib.polar_volume().unwrap() - 4.0 / (3.0 * PI * PI)).abs() < 1e-8);
        let gens = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let l1 = SupportField::from_fn(&g, |u| u[0].abs() + u[1].abs() + u[2].abs(), "l1").unwrap();
        let exact = l1.clone().with_zonotope(gens);
        assert!((exact.polar_volume().unwrap() - 4.0 / 3.0).abs() < 1e-12);
        // the sampled route carries the kink error of the grid
        let q = l1.polar_volume_quadrature().unwrap();
        assert!((q - 4.0 / 3.0).abs() < 2e-3);
        assert!(SupportField::from_fn(&g, |u| u[0], "bad").is_err());
    }

    #[test]
    fn mean_width_examples() {
        let g = grid();
        let r = SupportField::from_fn(&g, |_| 0.7, "r").unwrap();
        assert!((r.mean_width() - 1.4).abs() < 1e-12);
        let cube = SupportField::of_body(&Body::unit_cube(), &g).unwrap();
        assert!((cube.mean_width() - 1.5).abs() < 1e-12);
        assert!((cube.mean_width_quadrature() - 1.5).abs() < 2e-4);
        assert!((cube.polar_volume().unwrap() - 32.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn urysohn_on_body_fields() {
        let g = grid();
        let bodies = [
            Body::unit_ball(3),
            Body::unit_cube(),
            Body::axis_ellipsoid(vec![1.5, 1.0, 0.6]).unwrap(),
            random_hull(9, 30),
        ];
        for b in &bodies {
            let f = SupportField::of_body(b, &g).unwrap();
            let lhs = f.mean_width() / 2.0;
            let rhs = (b.volume() / (4.0 * PI / 3.0)).cbrt();
            let constant = f.anisotropy() < 1e-8;
            if constant {
                assert!((lhs - rhs).abs() < 1e-6 * rhs);
            } else {
                assert!(lhs > rhs * (1.0 + 1e-6));
            }
        }
    }

    fn shadow_area(p: &Polytope<f64>, u: &[f64]) -> f64 {
        // orthonormal basis of u⊥, project, 2-D monotone chain
        let a = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let e1 = cross3(u, &a);
        let r = norm(&e1);
        let e1 = [e1[0] / r, e1[1] / r, e1[2] / r];
        let e2 = cross3(u, &e1);
        let mut pts: Vec<(f64, f64)> = p.vertices().iter().map(|v| (dot(v, &e1), dot(v, &e2))).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
        let mut hull: Vec<(f64, f64)> = Vec::new();
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
            for &q in iter {
                while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                    hull.pop();
                }
                hull.push(q);
            }
            hull.pop();
        }
        let m = hull.len();
        0.5 * (0..m).map(|i| hull[i].0 * hull[(i + 1) % m].1 - hull[(i + 1) % m].0 * hull[i].1).sum::<f64>()
    }

    #[test]
    fn cauchy_projection_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for seed in 0..5 {
            let b = random_hull(seed, 25);
            let Body::Polytope(p) = &b else { unreachable!() };
            for _ in 0..10 {
                let u = UnitVector::<f64>::random(3, &mut rng);
                let cauchy = 0.5 * p.facets().iter().map(|f| f.normal.dot(u.coords()).abs() * f.area).sum::<f64>();
                assert!((cauchy - shadow_area(p, u.coords())).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn translation_does_not_change_facets() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<Vec<f64>> = (0..15).map(|_| UnitVector::<f64>::random(3, &mut rng).into_inner()).collect();
        let moved: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] + 3.0, p[1] - 1.0, p[2] + 0.5]).collect();
        let (Body::Polytope(a), Body::Polytope(b)) = (polytope_from_vertices(&pts).unwrap(), polytope_from_vertices(&moved).unwrap()) else {
            unreachable!()
        };
        for (fa, fb) in a.facets().iter().zip(b.facets()) {
            assert!((fa.offset - fb.offset).abs() < 1e-12 && (fa.area - fb.area).abs() < 1e-12);
        }
    }

    #[test]
    fn sheared_cube_is_still_a_zonotope() {
        let a = Matrix::from_rows(&[vec![1.0, 0.7, 0.0], vec![0.0, 1.0, -0.3], vec![0.2, 0.0, 1.0]]);
        let b = Body::<f64>::unit_cube().linear_image(&a).unwrap();
        let Body::Polytope(p) = &b else { unreachable!() };
        assert!(p.zonotope_generators().is_some());
    }

    #[test]
    fn parsers() {
        let v = parse_vertices_json(r#"{"vertices": [[0,0,0],[1,0,0],[0,1,0],[0,0,1]]}"#).unwrap();
        assert_eq!(v.len(), 4);
        let off = "OFF\n# tetra\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n3 0 2 3\n3 1 2 3\n";
        assert_eq!(parse_off(off).unwrap(), v);
        assert!(parse_off("PLY\n").is_err());
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n").is_err());
        assert!(parse_vertices_json("{").is_err());
    }
}
