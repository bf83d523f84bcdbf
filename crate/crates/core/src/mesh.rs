//! Scattered data and the triangulation it lives on.
//!
//! A [`Triangulation`] is built once from points and triangles, validated,
//! and never mutated afterwards. Edges are derived from the triangle sides,
//! oriented from the lower to the higher vertex index, and every vertex gets
//! its incident edges in clockwise angular order (its *star*).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance used for all scale-free degeneracy checks.
pub const DEGENERACY_RTOL: f64 = 1e-12;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum MeshError {
    #[error("at least 3 points are required, got {0}")]
    TooFewPoints(usize),

    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },

    #[error("triangle {triangle} references vertex {vertex}, but only {count} points exist")]
    IndexOutOfRange {
        triangle: usize,
        vertex: usize,
        count: usize,
    },

    #[error("points {first} and {second} have the same projection onto the plane")]
    DuplicateProjection { first: usize, second: usize },

    #[error("all projected points lie on one line")]
    CollinearData,

    #[error("triangle {0} is degenerate")]
    DegenerateTriangle(usize),

    #[error("triangles {first} and {second} overlap")]
    OverlappingTriangles { first: usize, second: usize },

    #[error("point {0} is not a vertex of any triangle")]
    DanglingVertex(usize),

    #[error("vertex {vertex} has two incident edges with the same direction")]
    TieAngle { vertex: usize },

    #[error("edge {edge} is not incident to vertex {vertex}")]
    NotIncident { vertex: usize, edge: usize },

    #[error("vertex {0} does not exist")]
    NoSuchVertex(usize),
}

/// One data point `P = (x, y, z)`; `(x, y)` is its projection onto the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ScatterPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    fn xy(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// A triangulation edge, parametrized by arclength `t` from `i` (`t = 0`)
/// to `j` (`t = length`). Always `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

impl Edge {
    /// The endpoint that is not `v`, or `None` if `v` is not on this edge.
    pub fn opposite(&self, v: usize) -> Option<usize> {
        if v == self.i {
            Some(self.j)
        } else if v == self.j {
            Some(self.i)
        } else {
            None
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        v == self.i || v == self.j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarKind {
    /// The incident triangles close up around the vertex; the order is cyclic.
    Interior,
    /// The vertex lies on the boundary of the triangulated domain; the star is
    /// a clockwise fan starting right after an uncovered angular gap.
    Boundary,
}

/// The edges incident to one vertex in clockwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct Star {
    pub edges: Vec<usize>,
    pub kind: StarKind,
}

impl Star {
    pub fn degree(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Debug, Clone)]
pub struct Triangulation {
    points: Vec<ScatterPoint>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    stars: Vec<Star>,
    edge_lookup: BTreeMap<(usize, usize), usize>,
}

/// Validates the input and builds the edge set and vertex stars.
///
/// Triangle indices are 0-based. Edges are sorted by `(i, j)`.
pub fn build_triangulation(
    points: Vec<ScatterPoint>,
    triangles: Vec<[usize; 3]>,
) -> Result<Triangulation, MeshError> {
    let n = points.len();
    if n < 3 {
        return Err(MeshError::TooFewPoints(n));
    }
    for (index, p) in points.iter().enumerate() {
        if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
            return Err(MeshError::NonFinite { index });
        }
    }
    for (t, tri) in triangles.iter().enumerate() {
        for &v in tri {
            if v >= n {
                return Err(MeshError::IndexOutOfRange {
                    triangle: t,
                    vertex: v,
                    count: n,
                });
            }
        }
    }

    let diag = bounding_diagonal(&points);
    let dist_tol = DEGENERACY_RTOL * diag;

    for a in 0..n {
        for b in (a + 1)..n {
            let d = (points[a].x - points[b].x).hypot(points[a].y - points[b].y);
            if d <= dist_tol {
                return Err(MeshError::DuplicateProjection {
                    first: a,
                    second: b,
                });
            }
        }
    }
    if all_collinear(&points, dist_tol) {
        return Err(MeshError::CollinearData);
    }

    let area_tol = DEGENERACY_RTOL * diag * diag;
    for (t, tri) in triangles.iter().enumerate() {
        let [a, b, c] = tri.map(|v| points[v].xy());
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] || cross3(a, b, c).abs() <= area_tol {
            return Err(MeshError::DegenerateTriangle(t));
        }
    }
    for s in 0..triangles.len() {
        for t in (s + 1)..triangles.len() {
            let ps = triangles[s].map(|v| points[v].xy());
            let pt = triangles[t].map(|v| points[v].xy());
            if interiors_overlap(&ps, &pt, dist_tol) {
                return Err(MeshError::OverlappingTriangles {
                    first: s,
                    second: t,
                });
            }
        }
    }

    let mut used = vec![false; n];
    let mut edge_lookup = BTreeMap::new();
    for tri in &triangles {
        for r in 0..3 {
            let (u, v) = (tri[r], tri[(r + 1) % 3]);
            used[u] = true;
            edge_lookup.insert((u.min(v), u.max(v)), usize::MAX);
        }
    }
    if let Some(v) = used.iter().position(|&u| !u) {
        return Err(MeshError::DanglingVertex(v));
    }
    let mut edges = Vec::with_capacity(edge_lookup.len());
    for (id, (&(i, j), slot)) in edge_lookup.iter_mut().enumerate() {
        *slot = id;
        let length = (points[i].x - points[j].x).hypot(points[i].y - points[j].y);
        edges.push(Edge { i, j, length });
    }

    let mut tri = Triangulation {
        points,
        triangles,
        edges,
        stars: Vec::new(),
        edge_lookup,
    };
    tri.stars = (0..n)
        .map(|v| tri.build_star(v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(tri)
}

impl Triangulation {
    pub fn points(&self) -> &[ScatterPoint] {
        &self.points
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn num_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn star(&self, v: usize) -> &Star {
        &self.stars[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.stars[v].degree()
    }

    /// Edge id joining `u` and `v`, in either order.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_lookup.get(&(u.min(v), u.max(v))).copied()
    }

    /// Incident edges of `v` in clockwise order (see [`Star`]).
    pub fn clockwise_star(&self, v: usize) -> Result<&[usize], MeshError> {
        self.stars
            .get(v)
            .map(|s| s.edges.as_slice())
            .ok_or(MeshError::NoSuchVertex(v))
    }

    /// Unit vector in the plane pointing from `from` along `edge`.
    pub fn edge_unit_vector(&self, from: usize, edge: usize) -> Result<[f64; 2], MeshError> {
        let e = self
            .edges
            .get(edge)
            .ok_or(MeshError::NotIncident { vertex: from, edge })?;
        let to = e
            .opposite(from)
            .ok_or(MeshError::NotIncident { vertex: from, edge })?;
        let (p, q) = (self.points[from], self.points[to]);
        Ok([(q.x - p.x) / e.length, (q.y - p.y) / e.length])
    }

    /// Total projected area of all triangles.
    pub fn total_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| 0.5 * cross3(self.points[t[0]].xy(), self.points[t[1]].xy(), self.points[t[2]].xy()).abs())
            .sum()
    }

    fn has_triangle(&self, a: usize, b: usize, c: usize) -> bool {
        let mut key = [a, b, c];
        key.sort_unstable();
        self.triangles.iter().any(|t| {
            let mut s = *t;
            s.sort_unstable();
            s == key
        })
    }

    fn build_star(&self, v: usize) -> Result<Star, MeshError> {
        let origin = self.points[v];
        let mut incident: Vec<(f64, usize, usize)> = self
            .edges
            .iter()
            .enumerate()
            .filter_map(|(id, e)| {
                e.opposite(v).map(|o| {
                    let p = self.points[o];
                    ((p.y - origin.y).atan2(p.x - origin.x), id, o)
                })
            })
            .collect();
        // Clockwise means decreasing polar angle.
        incident.sort_by(|a, b| b.0.total_cmp(&a.0));
        let m = incident.len();
        let angle_tol = 1e-14;
        for k in 0..m {
            let (cur, next) = (incident[k].0, incident[(k + 1) % m].0);
            let gap = if k + 1 < m { cur - next } else { cur - next + 2.0 * PI };
            if m > 1 && gap <= angle_tol {
                return Err(MeshError::TieAngle { vertex: v });
            }
        }

        // Wedge k spans clockwise from incident[k] to incident[k + 1]; it is
        // covered iff the matching triangle exists and the sweep is below pi.
        let mut first_gap = None;
        for k in 0..m {
            let (a, b) = (incident[k], incident[(k + 1) % m]);
            let sweep = (a.0 - b.0).rem_euclid(2.0 * PI);
            let covered = m > 1 && sweep < PI && self.has_triangle(v, a.2, b.2);
            if !covered {
                first_gap = Some(k);
                break;
            }
        }
        let (kind, start) = match first_gap {
            None => (StarKind::Interior, 0),
            Some(k) => (StarKind::Boundary, (k + 1) % m),
        };
        let edges = (0..m).map(|k| incident[(start + k) % m].1).collect();
        Ok(Star { edges, kind })
    }
}

fn bounding_diagonal(points: &[ScatterPoint]) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        lo[0] = lo[0].min(p.x);
        lo[1] = lo[1].min(p.y);
        hi[0] = hi[0].max(p.x);
        hi[1] = hi[1].max(p.y);
    }
    (hi[0] - lo[0]).hypot(hi[1] - lo[1])
}

fn all_collinear(points: &[ScatterPoint], dist_tol: f64) -> bool {
    let origin = points[0].xy();
    let far = points
        .iter()
        .map(|p| p.xy())
        .max_by(|a, b| dist(origin, *a).total_cmp(&dist(origin, *b)))
        .unwrap_or(origin);
    let base = dist(origin, far);
    if base <= dist_tol {
        return true;
    }
    points
        .iter()
        .all(|p| (cross3(origin, far, p.xy()) / base).abs() <= dist_tol)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Twice the signed area of `(a, b, c)`.
fn cross3(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Separating-axis test on the six edge normals; touching along an edge or at
/// a vertex does not count as overlap.
fn interiors_overlap(s: &[[f64; 2]; 3], t: &[[f64; 2]; 3], tol: f64) -> bool {
    for poly in [s, t] {
        for r in 0..3 {
            let (a, b) = (poly[r], poly[(r + 1) % 3]);
            let len = dist(a, b);
            let normal = [(b[1] - a[1]) / len, (a[0] - b[0]) / len];
            let project = |p: &[f64; 2]| normal[0] * p[0] + normal[1] * p[1];
            let (s_lo, s_hi) = extent(s.iter().map(project));
            let (t_lo, t_hi) = extent(t.iter().map(project));
            if s_hi <= t_lo + tol || t_hi <= s_lo + tol {
                return false;
            }
        }
    }
    true
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn pyramid() -> Triangulation {
        fixtures::pyramid().triangulation().unwrap()
    }

    fn seven_point() -> Triangulation {
        fixtures::seven_point().triangulation().unwrap()
    }

    fn pairs(tri: &Triangulation) -> Vec<(usize, usize)> {
        tri.edges().iter().map(|e| (e.i + 1, e.j + 1)).collect()
    }

    #[test]
    fn pyramid_edges() {
        let tri = pyramid();
        assert_eq!(pairs(&tri), vec![(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
        assert!((0..4).all(|v| tri.degree(v) == 3));
        assert_eq!(tri.star(3).kind, StarKind::Interior);
        assert_eq!(tri.star(0).kind, StarKind::Boundary);
    }

    #[test]
    fn single_triangle() {
        let pts = vec![
            ScatterPoint::new(0.0, 0.0, 1.0),
            ScatterPoint::new(1.0, 0.0, 2.0),
            ScatterPoint::new(0.0, 1.0, 3.0),
        ];
        let tri = build_triangulation(pts, vec![[0, 1, 2]]).unwrap();
        assert_eq!(tri.num_edges(), 3);
        for v in 0..3 {
            assert_eq!(tri.degree(v), 2);
            assert_eq!(tri.star(v).kind, StarKind::Boundary);
        }
    }

    #[test]
    fn seven_point_edges_and_degrees() {
        let tri = seven_point();
        let mut expected = vec![
            (1, 7), (1, 2), (1, 6), (2, 7), (2, 3), (2, 6), (3, 7),
            (3, 4), (3, 6), (4, 5), (4, 6), (4, 7), (5, 6), (5, 7),
        ];
        expected.sort();
        assert_eq!(pairs(&tri), expected);
        let degrees: Vec<_> = (0..7).map(|v| tri.degree(v)).collect();
        assert_eq!(degrees, vec![3, 4, 4, 4, 3, 5, 5]);
    }

    #[test]
    fn seven_point_star_of_v6_matches_angle_sort() {
        let tri = seven_point();
        let star = tri.clockwise_star(5).unwrap();
        let others: Vec<_> = star.iter().map(|&e| tri.edge(e).opposite(5).unwrap() + 1).collect();
        // V6 = (-0.5, 2.3) sits above V1..V5 on the x-axis, so the fan runs
        // from V5 (lower right) to V1 (lower left).
        let p6 = tri.points()[5];
        let mut oracle: Vec<(f64, usize)> = (0..5)
            .map(|k| {
                let p = tri.points()[k];
                ((p.y - p6.y).atan2(p.x - p6.x), k + 1)
            })
            .collect();
        oracle.sort_by(|a, b| b.0.total_cmp(&a.0));
        let oracle: Vec<_> = oracle.into_iter().map(|(_, k)| k).collect();
        assert_eq!(others, oracle);
        assert_eq!(others, vec![5, 4, 3, 2, 1]);
        assert_eq!(tri.star(5).kind, StarKind::Boundary);
    }

    #[test]
    fn unit_vectors() {
        let tri = pyramid();
        let e43 = tri.edge_between(3, 2).unwrap();
        let u = tri.edge_unit_vector(3, e43).unwrap();
        assert!((u[0]).abs() < 1e-15 && (u[1] - 1.0).abs() < 1e-15);
        let e12 = tri.edge_between(0, 1).unwrap();
        let u = tri.edge_unit_vector(0, e12).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-15 && u[1].abs() < 1e-15);
        let e41 = tri.edge_between(3, 0).unwrap();
        let u = tri.edge_unit_vector(3, e41).unwrap();
        assert!((u[0] + 3f64.sqrt() / 2.0).abs() < 1e-14 && (u[1] + 0.5).abs() < 1e-14);
        assert!(matches!(
            tri.edge_unit_vector(3, e12),
            Err(MeshError::NotIncident { .. })
        ));
    }

    #[test]
    fn pyramid_centre_star_has_120_degree_spacing() {
        let tri = pyramid();
        let us: Vec<_> = tri
            .clockwise_star(3)
            .unwrap()
            .iter()
            .map(|&e| tri.edge_unit_vector(3, e).unwrap())
            .collect();
        for k in 0..3 {
            let (a, b) = (us[k], us[(k + 1) % 3]);
            assert!((a[0] * b[0] + a[1] * b[1] + 0.5).abs() < 1e-14);
            // Clockwise: each next vector is a negative rotation of the last.
            assert!(a[0] * b[1] - a[1] * b[0] < 0.0);
        }
    }

    #[test]
    fn rejects_invalid_inputs() {
        let p = |x, y| ScatterPoint::new(x, y, 0.0);
        assert_eq!(
            build_triangulation(vec![p(0.0, 0.0), p(1.0, 0.0)], vec![]).unwrap_err(),
            MeshError::TooFewPoints(2)
        );
        assert_eq!(
            build_triangulation(vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 0.0)], vec![[0, 1, 2]])
                .unwrap_err(),
            MeshError::DuplicateProjection { first: 0, second: 2 }
        );
        assert_eq!(
            build_triangulation(vec![p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)], vec![[0, 1, 2]])
                .unwrap_err(),
            MeshError::CollinearData
        );
        let square = vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0), p(2.0, 0.0)];
        assert_eq!(
            build_triangulation(square.clone(), vec![[0, 1, 2], [0, 2, 3], [0, 1, 4]]).unwrap_err(),
            MeshError::DegenerateTriangle(2)
        );
        assert_eq!(
            build_triangulation(square.clone(), vec![[0, 1, 2], [0, 2, 3], [1, 3, 4]]).unwrap_err(),
            MeshError::OverlappingTriangles { first: 0, second: 2 }
        );
        assert_eq!(
            build_triangulation(square.clone(), vec![[0, 1, 2], [0, 2, 3]]).unwrap_err(),
            MeshError::DanglingVertex(4)
        );
        assert!(matches!(
            build_triangulation(square.clone(), vec![[0, 1, 7]]).unwrap_err(),
            MeshError::IndexOutOfRange { vertex: 7, .. }
        ));
        let mut bad = square;
        bad[1].z = f64::NAN;
        assert_eq!(
            build_triangulation(bad, vec![[0, 1, 2]]).unwrap_err(),
            MeshError::NonFinite { index: 1 }
        );
    }

    #[test]
    fn duplicated_triangle_counts_as_overlap() {
        let p = |x, y| ScatterPoint::new(x, y, 0.0);
        let pts = vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)];
        assert!(matches!(
            build_triangulation(pts, vec![[0, 1, 2], [2, 1, 0]]),
            Err(MeshError::OverlappingTriangles { .. })
        ));
    }

    #[test]
    fn areas_add_up_without_overlap() {
        // Pyramid domain is the equilateral triangle V1 V2 V3 of side 1.
        let tri = pyramid();
        assert!((tri.total_area() - 3f64.sqrt() / 4.0).abs() < 1e-15);
        // Seven-point domain is the quadrilateral V1 V6 V5 V7.
        let tri = seven_point();
        assert!((tri.total_area() - 0.5 * 4.0 * (2.3 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn every_edge_sits_in_exactly_two_stars() {
        for tri in [pyramid(), seven_point()] {
            let mut hits = vec![0; tri.num_edges()];
            for v in 0..tri.num_vertices() {
                for &e in tri.clockwise_star(v).unwrap() {
                    assert!(tri.edge(e).contains(v));
                    hits[e] += 1;
                }
            }
            assert!(hits.iter().all(|&h| h == 2));
        }
    }

    #[test]
    fn star_reversed_is_counterclockwise() {
        let tri = seven_point();
        for v in 0..tri.num_vertices() {
            let mut star: Vec<_> = tri.clockwise_star(v).unwrap().to_vec();
            star.reverse();
            let angles: Vec<f64> = star
                .iter()
                .map(|&e| {
                    let u = tri.edge_unit_vector(v, e).unwrap();
                    u[1].atan2(u[0])
                })
                .collect();
            let mut rises = 0;
            for k in 0..angles.len() {
                if angles[(k + 1) % angles.len()] < angles[k] {
                    rises += 1;
                }
            }
            // A counterclockwise cyclic sequence wraps around exactly once.
            assert_eq!(rises, 1, "vertex {v}");
            star.reverse();
            assert_eq!(star, tri.clockwise_star(v).unwrap());
        }
    }

    #[test]
    fn permuting_triangles_keeps_edges() {
        let doc = fixtures::seven_point();
        let base = doc.triangulation().unwrap();
        let (points, mut tris) = doc.to_internal().unwrap();
        tris.reverse();
        for t in tris.iter_mut() {
            t.rotate_left(1);
        }
        let permuted = build_triangulation(points, tris).unwrap();
        assert_eq!(base.edges(), permuted.edges());
        for v in 0..base.num_vertices() {
            assert_eq!(base.star(v), permuted.star(v));
        }
    }
}
