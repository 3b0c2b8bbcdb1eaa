//! Incremental 3-D convex hull with coplanar-face merging.

use crate::error::{IsovalError, Result};
use crate::linalg::{cross3, dot, norm, sub};
use crate::scalar::{csum, Real};
use std::collections::{HashMap, HashSet};

/// A merged planar face of the hull.
#[derive(Clone, Debug)]
pub struct HullFace<T> {
    pub normal: [T; 3],
    /// Signed distance of the plane from the origin.
    pub offset: T,
    pub area: T,
    /// Counter-clockwise (seen from outside) vertex indices into `Hull::points`,
    /// collinear corners removed.
    pub polygon: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Hull<T> {
    pub points: Vec<[T; 3]>,
    /// Indices of points that are hull vertices, ascending.
    pub vertices: Vec<usize>,
    pub faces: Vec<HullFace<T>>,
    pub triangles: Vec<[usize; 3]>,
    pub volume: T,
    pub centroid: [T; 3],
}

#[derive(Clone, Copy)]
struct Tri<T> {
    v: [usize; 3],
    n: [T; 3],
    d: T,
}

fn plane<T: Real>(p: &[[T; 3]], a: usize, b: usize, c: usize) -> Option<([T; 3], T)> {
    let n = cross3(&sub(&p[b], &p[a]), &sub(&p[c], &p[a]));
    let r = norm(&n);
    if r == T::zero() {
        return None;
    }
    let n = [n[0] / r, n[1] / r, n[2] / r];
    Some((n, dot(&n, &p[a])))
}

/// Convex hull of `points` in R³; rejects lower-dimensional input.
pub fn convex_hull<T: Real>(points: &[[T; 3]]) -> Result<Hull<T>> {
    if points.len() < 4 {
        return Err(IsovalError::Degenerate(format!("hull needs at least 4 points, got {}", points.len())));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(IsovalError::NonFinite("hull input".into()));
    }
    let p = points;
    let scale = p.iter().flatten().fold(T::zero(), |m, &x| m.max(x.abs())).max(T::min_positive_value());
    let eps = T::epsilon().sqrt() * T::lit(1e-3) * scale;

    // initial tetrahedron from extreme points
    let i0 = 0;
    let i1 = (0..p.len())
        .max_by(|&a, &b| norm(&sub(&p[a], &p[i0])).partial_cmp(&norm(&sub(&p[b], &p[i0]))).unwrap())
        .unwrap();
    if norm(&sub(&p[i1], &p[i0])) <= eps {
        return Err(IsovalError::Degenerate("all points coincide".into()));
    }
    let line = sub(&p[i1], &p[i0]);
    let dist_line = |k: usize| norm(&cross3(&line, &sub(&p[k], &p[i0]))) / norm(&line);
    let i2 = (0..p.len()).max_by(|&a, &b| dist_line(a).partial_cmp(&dist_line(b)).unwrap()).unwrap();
    if dist_line(i2) <= eps {
        return Err(IsovalError::Degenerate("points are collinear".into()));
    }
    let (n0, d0) = plane(p, i0, i1, i2).unwrap();
    let dist_plane = |k: usize| dot(&n0, &p[k]) - d0;
    let i3 = (0..p.len()).max_by(|&a, &b| dist_plane(a).abs().partial_cmp(&dist_plane(b).abs()).unwrap()).unwrap();
    if dist_plane(i3).abs() <= eps {
        return Err(IsovalError::Degenerate("points are coplanar".into()));
    }

    let mut tris: Vec<Tri<T>> = Vec::new();
    let push = |tris: &mut Vec<Tri<T>>, a: usize, b: usize, c: usize, inside: &[T; 3]| {
        let (mut n, mut d) = plane(p, a, b, c).expect("non-degenerate face");
        let mut v = [a, b, c];
        if dot(&n, inside) - d > T::zero() {
            n = [-n[0], -n[1], -n[2]];
            d = -d;
            v = [a, c, b];
        }
        tris.push(Tri { v, n, d });
    };
    let quarter = T::lit(0.25);
    let inside = [
        (p[i0][0] + p[i1][0] + p[i2][0] + p[i3][0]) * quarter,
        (p[i0][1] + p[i1][1] + p[i2][1] + p[i3][1]) * quarter,
        (p[i0][2] + p[i1][2] + p[i2][2] + p[i3][2]) * quarter,
    ];
    push(&mut tris, i0, i1, i2, &inside);
    push(&mut tris, i0, i1, i3, &inside);
    push(&mut tris, i0, i2, i3, &inside);
    push(&mut tris, i1, i2, i3, &inside);

    let seed: HashSet<usize> = [i0, i1, i2, i3].into_iter().collect();
    for k in 0..p.len() {
        if seed.contains(&k) {
            continue;
        }
        let dist: Vec<T> = tris.iter().map(|t| dot(&t.n, &p[k]) - t.d).collect();
        let Some(top) = (0..tris.len()).filter(|&i| dist[i] > eps).max_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap()) else {
            continue;
        };
        let visible = visible_disc(&tris, &dist, top, eps);
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for (t, _) in tris.iter().zip(&visible).filter(|(_, &v)| v) {
            for e in 0..3 {
                edges.insert((t.v[e], t.v[(e + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> = tris
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| v)
            .flat_map(|(t, _)| (0..3).map(move |e| (t.v[e], t.v[(e + 1) % 3])))
            .filter(|&(a, b)| !edges.contains(&(b, a)))
            .collect();
        let mut kept: Vec<Tri<T>> = tris.iter().zip(&visible).filter(|(_, &v)| !v).map(|(t, _)| *t).collect();
        for (a, b) in horizon {
            // orientation is inherited from the removed visible face
            if let Some((n, d)) = plane(p, a, b, k) {
                kept.push(Tri { v: [a, b, k], n, d });
            }
        }
        tris = kept;
    }

    let mut vertices: Vec<usize> = tris.iter().flat_map(|t| t.v).collect::<HashSet<_>>().into_iter().collect();
    vertices.sort_unstable();

    // volume and centroid from tetrahedra against an interior reference point
    let six = T::lit(6.0);
    let mut vol_parts = Vec::with_capacity(tris.len());
    let mut cen = [Vec::new(), Vec::new(), Vec::new()];
    for t in &tris {
        let a = sub(&p[t.v[0]], &inside);
        let b = sub(&p[t.v[1]], &inside);
        let c = sub(&p[t.v[2]], &inside);
        let v = dot(&a, &cross3(&b, &c)) / six;
        vol_parts.push(v);
        for i in 0..3 {
            cen[i].push(v * (inside[i] + (p[t.v[0]][i] + p[t.v[1]][i] + p[t.v[2]][i] - T::lit(3.0) * inside[i]) * quarter));
        }
    }
    let volume = csum(vol_parts);
    if volume <= eps * scale * scale {
        return Err(IsovalError::Degenerate("hull has zero volume".into()));
    }
    let centroid = [
        csum(cen[0].iter().copied()) / volume,
        csum(cen[1].iter().copied()) / volume,
        csum(cen[2].iter().copied()) / volume,
    ];

    let faces = merge_faces(p, &tris, eps);
    Ok(Hull { points: p.to_vec(), vertices, faces, triangles: tris.iter().map(|t| t.v).collect(), volume, centroid })
}

/// Faces seen from a new point: the connected set of faces above their
/// planes that contains `top`, with any enclosed unseen faces added so the
/// set is a topological disc and its boundary a single horizon loop. Near
/// coplanar input can otherwise produce scattered visible faces.
fn visible_disc<T: Real>(tris: &[Tri<T>], dist: &[T], top: usize, eps: T) -> Vec<bool> {
    let edge_owner = |keep: &dyn Fn(usize) -> bool| {
        let mut owner = HashMap::new();
        for (i, t) in tris.iter().enumerate().filter(|(i, _)| keep(*i)) {
            for e in 0..3 {
                owner.insert((t.v[e], t.v[(e + 1) % 3]), i);
            }
        }
        owner
    };
    let flood = |start: usize, owner: &HashMap<(usize, usize), usize>, member: &dyn Fn(usize) -> bool| {
        let mut seen = vec![false; tris.len()];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let t = tris[i].v;
            for e in 0..3 {
                if let Some(&j) = owner.get(&(t[(e + 1) % 3], t[e])) {
                    if !seen[j] && member(j) {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        seen
    };
    let above = |j: usize| dist[j] > eps;
    let visible = flood(top, &edge_owner(&above), &above);
    // a connected set whose boundary is one loop is already a disc
    let inner = edge_owner(&|j| visible[j]);
    let mut next = HashMap::new();
    for &(a, b) in inner.keys() {
        if !inner.contains_key(&(b, a)) {
            next.insert(a, b);
        }
    }
    let start = *next.keys().next().expect("visible faces have a boundary");
    let (mut cur, mut len) = (next[&start], 1);
    while cur != start && len <= next.len() {
        cur = next[&cur];
        len += 1;
    }
    if len == next.len() {
        return visible;
    }
    let Some(bottom) = (0..tris.len()).filter(|&i| !visible[i]).min_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap()) else {
        return visible;
    };
    let outside = flood(bottom, &edge_owner(&|_| true), &|j| !visible[j]);
    outside.iter().map(|&o| !o).collect()
}

/// Volume of the polar {x : x·y ≤ 1 ∀ y ∈ conv(points)}, which is the
/// intersection of the half-spaces dual to the points. The origin must be
/// interior to the hull.
pub fn polar_of_hull_volume<T: Real>(points: &[[T; 3]]) -> Result<T> {
    let h = convex_hull(points)?;
    let mut dual = Vec::with_capacity(h.triangles.len());
    for t in &h.triangles {
        let (n, d) = plane(points, t[0], t[1], t[2]).ok_or_else(|| IsovalError::Degenerate("flat hull triangle".into()))?;
        if d <= T::zero() {
            return Err(IsovalError::OriginNotInterior);
        }
        dual.push([n[0] / d, n[1] / d, n[2] / d]);
    }
    let mut owner = std::collections::HashMap::with_capacity(3 * h.triangles.len());
    for (k, t) in h.triangles.iter().enumerate() {
        for e in 0..3 {
            owner.insert((t[e], t[(e + 1) % 3]), k);
        }
    }
    // the facet of the polar dual to vertex a is the polygon of dual
    // vertices of the triangles around a; fan it from the foot point a/|a|²
    let six = T::lit(6.0);
    let mut parts = Vec::with_capacity(3 * h.triangles.len());
    for (k, t) in h.triangles.iter().enumerate() {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            let k2 = *owner.get(&(b, a)).ok_or_else(|| IsovalError::Degenerate("open hull surface".into()))?;
            let y = points[a];
            let r2 = dot(&y, &y);
            let f = [y[0] / r2, y[1] / r2, y[2] / r2];
            parts.push(dot(&f, &cross3(&dual[k], &dual[k2])) / six);
        }
    }
    Ok(csum(parts).abs())
}

fn merge_faces<T: Real>(p: &[[T; 3]], tris: &[Tri<T>], eps: T) -> Vec<HullFace<T>> {
    let ang_tol = T::lit(1e-9);
    let mut group: Vec<Option<usize>> = vec![None; tris.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..tris.len() {
        if group[i].is_some() {
            continue;
        }
        let g = groups.len();
        let mut members = vec![i];
        group[i] = Some(g);
        for j in i + 1..tris.len() {
            if group[j].is_none() && dot(&tris[i].n, &tris[j].n) > T::one() - ang_tol && (tris[i].d - tris[j].d).abs() <= eps {
                group[j] = Some(g);
                members.push(j);
            }
        }
        groups.push(members);
    }
    let half = T::lit(0.5);
    groups
        .into_iter()
        .map(|members| {
            let mut areas = Vec::new();
            let mut nsum = [T::zero(); 3];
            let mut edges: Vec<(usize, usize)> = Vec::new();
            for &m in &members {
                let t = &tris[m];
                let c = cross3(&sub(&p[t.v[1]], &p[t.v[0]]), &sub(&p[t.v[2]], &p[t.v[0]]));
                for i in 0..3 {
                    nsum[i] += c[i];
                }
                areas.push(norm(&c) * half);
                for e in 0..3 {
                    edges.push((t.v[e], t.v[(e + 1) % 3]));
                }
            }
            let set: HashSet<(usize, usize)> = edges.iter().copied().collect();
            let boundary: Vec<(usize, usize)> = edges.into_iter().filter(|&(a, b)| !set.contains(&(b, a))).collect();
            let r = norm(&nsum);
            let normal = [nsum[0] / r, nsum[1] / r, nsum[2] / r];
            let offset = csum(members.iter().map(|&m| dot(&normal, &p[tris[m].v[0]]))) / T::from_usize_lossy(members.len());
            HullFace { normal, offset, area: csum(areas), polygon: chain_loop(p, &boundary, eps) }
        })
        .collect()
}

fn chain_loop<T: Real>(p: &[[T; 3]], boundary: &[(usize, usize)], eps: T) -> Vec<usize> {
    if boundary.is_empty() {
        return Vec::new();
    }
    let mut next = std::collections::HashMap::new();
    for &(a, b) in boundary {
        next.insert(a, b);
    }
    let start = boundary.iter().map(|e| e.0).min().unwrap();
    let mut lp = vec![start];
    let mut cur = start;
    while let Some(&nx) = next.get(&cur) {
        if nx == start || lp.len() > boundary.len() {
            break;
        }
        lp.push(nx);
        cur = nx;
    }
    // drop corners lying on a straight edge
    let m = lp.len();
    let keep: Vec<usize> = (0..m)
        .filter(|&i| {
            let a = p[lp[(i + m - 1) % m]];
            let b = p[lp[i]];
            let c = p[lp[(i + 1) % m]];
            let u = sub(&b, &a);
            let v = sub(&c, &b);
            norm(&cross3(&u, &v)) > eps * (norm(&u) + norm(&v))
        })
        .map(|i| lp[i])
        .collect();
    keep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> Vec<[f64; 3]> {
        let mut v = Vec::new();
        for &x in &[-0.5, 0.5] {
            for &y in &[-0.5, 0.5] {
                for &z in &[-0.5, 0.5] {
                    v.push([x, y, z]);
                }
            }
        }
        v
    }

    #[test]
    fn cube_hull_has_six_square_faces() {
        let h = convex_hull(&cube()).unwrap();
        assert_eq!(h.faces.len(), 6);
        assert_eq!(h.vertices.len(), 8);
        assert!((h.volume - 1.0).abs() < 1e-14);
        for f in &h.faces {
            assert!((f.area - 1.0).abs() < 1e-14);
            assert!((f.offset - 0.5).abs() < 1e-14);
            assert_eq!(f.polygon.len(), 4);
        }
    }

    #[test]
    fn interior_and_duplicate_points_are_ignored() {
        let mut pts = cube();
        pts.push([0.1, 0.0, -0.2]);
        pts.push([0.5, 0.5, 0.5]);
        pts.push([0.5, 0.0, 0.0]);
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.faces.len(), 6);
        assert!((h.volume - 1.0).abs() < 1e-14);
        assert!(h.faces.iter().all(|f| f.polygon.len() == 4));
    }

    #[test]
    fn polar_volumes_of_simple_hulls() {
        let octa = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0_f64]];
        assert!((polar_of_hull_volume(&octa).unwrap() - 8.0).abs() < 1e-12);
        // polar of [-1/2,1/2]³ is the cross-polytope of radius 2
        assert!((polar_of_hull_volume(&cube()).unwrap() - 64.0 / 6.0).abs() < 1e-12);
        let shifted: Vec<[f64; 3]> = cube().iter().map(|p| [p[0] + 0.7, p[1], p[2]]).collect();
        assert!(matches!(polar_of_hull_volume(&shifted), Err(IsovalError::OriginNotInterior)));
    }

    #[test]
    fn jittered_coplanar_points_give_a_closed_hull() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut pts = cube();
        for _ in 0..2000 {
            let axis = rng.gen_range(0..3);
            let mut q = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            q[axis] = if rng.gen_bool(0.5) { 0.5 } else { -0.5 };
            for c in q.iter_mut() {
                *c += rng.gen_range(-1e-12..1e-12);
            }
            pts.push(q);
        }
        let h = convex_hull(&pts).unwrap();
        assert!((h.volume - 1.0).abs() < 1e-9);
        let edges: HashSet<(usize, usize)> = h.triangles.iter().flat_map(|t| (0..3).map(move |e| (t[e], t[(e + 1) % 3]))).collect();
        assert_eq!(edges.len(), 3 * h.triangles.len());
        assert!(edges.iter().all(|&(a, b)| edges.contains(&(b, a))));
    }

    #[test]
    fn rejects_flat_input() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0_f64]];
        assert!(convex_hull(&pts).is_err());
        let line = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0_f64]];
        assert!(convex_hull(&line).is_err());
    }
}
