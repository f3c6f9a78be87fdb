//! Spherical trigonometry on the unit sphere.
//!
//! Points are unit vectors. Distances use `atan2(|p x q|, p . q)` and areas the
//! half-angle tangent of the excess computed from vertex vectors, both of
//! which stay accurate for the small triangles that the threshold
//! classifiers feed in. Every predicate takes an explicit
//! angular tolerance; [`DEFAULT_TOL`] is the conventional choice.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default angular tolerance, in radians.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct SpherePoint(Vector3<f64>);

impl SpherePoint {
    /// Normalizes `v` onto the sphere.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::InvalidPoint(format!(
                "cannot normalize vector ({}, {}, {})",
                v.x, v.y, v.z
            )));
        }
        Ok(Self(v / n))
    }

    pub fn from_xyz(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(Vector3::new(x, y, z))
    }

    /// Normalizes a vector known to be nonzero.
    pub(crate) fn from_nonzero(v: Vector3<f64>) -> Self {
        Self(v.normalize())
    }

    pub fn e1() -> Self {
        Self(Vector3::x())
    }

    pub fn e2() -> Self {
        Self(Vector3::y())
    }

    pub fn e3() -> Self {
        Self(Vector3::z())
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn into_vector(self) -> Vector3<f64> {
        self.0
    }

    pub fn antipode(&self) -> Self {
        Self(-self.0)
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.0.dot(&other.0)
    }

    /// Image under an orthogonal map (rotation or reflection).
    pub fn transformed(&self, m: &Matrix3<f64>) -> Self {
        Self::from_nonzero(m * self.0)
    }
}

impl TryFrom<[f64; 3]> for SpherePoint {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::from_xyz(v[0], v[1], v[2])
    }
}

impl From<SpherePoint> for [f64; 3] {
    fn from(p: SpherePoint) -> Self {
        [p.0.x, p.0.y, p.0.z]
    }
}

/// Great-circle distance in `[0, pi]`.
pub fn arc_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    p.0.cross(&q.0).norm().atan2(p.0.dot(&q.0))
}

/// Point at distance `d` from `a` along the minor arc towards `b`.
pub fn point_on_arc(a: &SpherePoint, b: &SpherePoint, d: f64) -> Result<SpherePoint> {
    let len = arc_distance(a, b);
    if !(d >= -DEFAULT_TOL && d <= len + DEFAULT_TOL) {
        return Err(Error::OutOfRange {
            value: d,
            min: 0.0,
            max: len,
        });
    }
    let d = d.clamp(0.0, len);
    if d == 0.0 {
        return Ok(*a);
    }
    if len > PI - 1e-12 {
        return Err(Error::InvalidPoint(
            "arc endpoints are antipodal; the minor arc is undefined".into(),
        ));
    }
    let towards = a.0.cross(&b.0).cross(&a.0).normalize();
    Ok(SpherePoint::from_nonzero(a.0 * d.cos() + towards * d.sin()))
}

/// Signed angular distance of `p` from the great circle through `a` and `b`;
/// positive on the left of the directed arc `a -> b`.
pub fn side_distance(a: &SpherePoint, b: &SpherePoint, p: &SpherePoint) -> f64 {
    let n = a.0.cross(&b.0).normalize();
    n.dot(&p.0).clamp(-1.0, 1.0).asin()
}

/// Three-valued point location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

impl Containment {
    /// Whether this location counts as contained, for a closed or open region.
    pub fn accepts(self, closed: bool) -> bool {
        match self {
            Containment::Inside => true,
            Containment::Boundary => closed,
            Containment::Outside => false,
        }
    }

    fn from_distances(dists: impl IntoIterator<Item = f64>, tol: f64) -> Self {
        let mut on_band = false;
        for d in dists {
            if d < -tol {
                return Containment::Outside;
            }
            if d <= tol {
                on_band = true;
            }
        }
        if on_band {
            Containment::Boundary
        } else {
            Containment::Inside
        }
    }
}

/// Positively oriented spherical triangle contained in an open hemisphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphTriangle {
    vertices: [SpherePoint; 3],
}

impl SphTriangle {
    /// Builds a triangle, swapping the last two vertices if the input is
    /// negatively oriented.
    pub fn new(a: SpherePoint, b: SpherePoint, c: SpherePoint) -> Result<Self> {
        let mut v = [a, b, c];
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let d = arc_distance(&v[i], &v[j]);
            if d <= DEFAULT_TOL || d >= PI - DEFAULT_TOL {
                return Err(Error::DegenerateTriangle(format!(
                    "vertices {i} and {j} are {d:.3e} rad apart"
                )));
            }
        }
        if v[0].0.dot(&v[1].0.cross(&v[2].0)) < 0.0 {
            v.swap(1, 2);
        }
        for i in 0..3 {
            let h = side_distance(&v[(i + 1) % 3], &v[(i + 2) % 3], &v[i]);
            if h <= DEFAULT_TOL {
                return Err(Error::DegenerateTriangle(format!(
                    "vertex {i} lies within {h:.3e} rad of the opposite great circle"
                )));
            }
        }
        Ok(Self { vertices: v })
    }

    /// Triangle with `|v0 v1| = ab`, `|v0 v2| = ac` and `|v1 v2| = bc`, placed
    /// with `v0` at the north pole and `v1` on the zero meridian.
    pub fn from_sides(ab: f64, ac: f64, bc: f64) -> Result<Self> {
        for s in [ab, ac, bc] {
            if !(s > 0.0 && s < PI) {
                return Err(Error::DegenerateTriangle(format!("side {s} outside (0, pi)")));
            }
        }
        if ab + ac <= bc || ab + bc <= ac || ac + bc <= ab || ab + ac + bc >= 2.0 * PI {
            return Err(Error::DegenerateTriangle(format!(
                "sides ({ab}, {ac}, {bc}) violate the spherical triangle inequalities"
            )));
        }
        // Haversine form of the law of cosines.
        let hav = |x: f64| (x / 2.0).sin().powi(2);
        let h = (hav(bc) - hav(ab - ac)) / (ab.sin() * ac.sin());
        let angle = 2.0 * h.clamp(0.0, 1.0).sqrt().asin();
        Self::from_sas(ab, ac, angle)
    }

    /// Triangle from two sides meeting at `v0` and the angle between them.
    pub fn from_sas(ab: f64, ac: f64, angle: f64) -> Result<Self> {
        if !(angle > 0.0 && angle < PI) {
            return Err(Error::DegenerateTriangle(format!(
                "angle {angle} outside (0, pi)"
            )));
        }
        let v0 = SpherePoint::e3();
        let v1 = SpherePoint::from_xyz(ab.sin(), 0.0, ab.cos())?;
        let v2 = SpherePoint::from_xyz(ac.sin() * angle.cos(), ac.sin() * angle.sin(), ac.cos())?;
        Self::new(v0, v1, v2)
    }

    pub fn vertices(&self) -> &[SpherePoint; 3] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &SpherePoint {
        &self.vertices[i]
    }

    pub fn side(&self, i: usize, j: usize) -> f64 {
        arc_distance(&self.vertices[i], &self.vertices[j])
    }

    /// `[|v0 v1|, |v0 v2|, |v1 v2|]`.
    pub fn side_lengths(&self) -> [f64; 3] {
        [self.side(0, 1), self.side(0, 2), self.side(1, 2)]
    }

    pub fn max_side(&self) -> f64 {
        self.side_lengths().into_iter().fold(0.0, f64::max)
    }

    /// Interior angle at vertex `i`.
    ///
    /// With `a` the vertex and `b`, `c` the next two in positive order,
    /// `(a x b) . (a x c) = b . c - (a . b)(a . c)` and
    /// `|(a x b) x (a x c)| = det(a, b, c)`, so the angle is their `atan2`.
    pub fn vertex_angle(&self, i: usize) -> f64 {
        let a = &self.vertices[i].0;
        let b = &self.vertices[(i + 1) % 3].0;
        let c = &self.vertices[(i + 2) % 3].0;
        // Angle between the planes through a, computed from cross products so
        // that tiny triangles do not cancel.
        let n1 = a.cross(b);
        let n2 = a.cross(c);
        n1.cross(&n2).dot(a).atan2(n1.dot(&n2))
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.vertex_angle(0), self.vertex_angle(1), self.vertex_angle(2)]
    }

    /// Spherical excess, computed from the vertices.
    pub fn area(&self) -> f64 {
        let [a, b, c] = &self.vertices;
        excess(a, b, c)
    }

    /// Spherical excess as angle sum minus pi.
    pub fn girard_area(&self) -> f64 {
        self.angles().iter().sum::<f64>() - PI
    }

    /// Signed distances from `p` to the sides `v0v1`, `v1v2`, `v2v0`; all
    /// positive strictly inside.
    pub fn side_distances(&self, p: &SpherePoint) -> [f64; 3] {
        let v = &self.vertices;
        [
            side_distance(&v[0], &v[1], p),
            side_distance(&v[1], &v[2], p),
            side_distance(&v[2], &v[0], p),
        ]
    }

    pub fn contains(&self, p: &SpherePoint, tol: f64) -> Containment {
        Containment::from_distances(self.side_distances(p), tol)
    }

    /// Image under an orthogonal map. Reflections are re-oriented.
    pub fn transformed(&self, m: &Matrix3<f64>) -> Result<Self> {
        let [a, b, c] = self.vertices.map(|p| p.transformed(m));
        Self::new(a, b, c)
    }

    /// Mirror image across the plane `y = 0`, with the last two vertices
    /// swapped to keep positive orientation.
    pub fn mirrored(&self) -> Self {
        let m = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
        let [a, b, c] = self.vertices.map(|p| p.transformed(&m));
        Self { vertices: [a, c, b] }
    }
}

/// Spherical excess of the triangle `abc` from
/// `tan(E/2) = a.(b x c) / (1 + a.b + b.c + c.a)`. The triple product is
/// taken on edge vectors so that small triangles keep full relative
/// precision; unlike l'Huilier's formula on side lengths this stays well
/// conditioned when the perimeter approaches `2 pi`.
pub(crate) fn excess(a: &SpherePoint, b: &SpherePoint, c: &SpherePoint) -> f64 {
    let (a, b, c) = (&a.0, &b.0, &c.0);
    let triple = a.dot(&(b - a).cross(&(c - a)));
    let denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * triple.abs().atan2(denom)
}

/// Strictly convex, positively oriented spherical polygon in an open hemisphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphPolygon {
    vertices: Vec<SpherePoint>,
}

impl SphPolygon {
    /// Validates convexity; a negatively oriented vertex cycle is reversed.
    pub fn new(mut vertices: Vec<SpherePoint>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolygon(format!("{n} vertices, need at least 3")));
        }
        for i in 0..n {
            let d = arc_distance(&vertices[i], &vertices[(i + 1) % n]);
            if d <= DEFAULT_TOL {
                return Err(Error::InvalidPolygon(format!(
                    "consecutive vertices {i} and {} coincide",
                    (i + 1) % n
                )));
            }
        }
        let margin = |vs: &[SpherePoint]| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..n {
                let (a, b) = (&vs[i], &vs[(i + 1) % n]);
                for (k, p) in vs.iter().enumerate() {
                    if k != i && k != (i + 1) % n {
                        let d = side_distance(a, b, p);
                        lo = lo.min(d);
                        hi = hi.max(d);
                    }
                }
            }
            (lo, hi)
        };
        let (lo, hi) = margin(&vertices);
        if hi < -DEFAULT_TOL {
            vertices.reverse();
        } else if lo <= DEFAULT_TOL {
            return Err(Error::InvalidPolygon(
                "vertices are not in strictly convex position".into(),
            ));
        }
        let sum: Vector3<f64> = vertices.iter().map(|p| p.0).sum();
        let c = sum.normalize();
        if sum.norm() < 1e-12 || vertices.iter().any(|p| p.0.dot(&c) <= 0.0) {
            return Err(Error::InvalidPolygon(
                "polygon is not contained in an open hemisphere".into(),
            ));
        }
        Ok(Self { vertices })
    }

    pub fn from_triangle(tri: &SphTriangle) -> Self {
        Self {
            vertices: tri.vertices.to_vec(),
        }
    }

    pub fn vertices(&self) -> &[SpherePoint] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn side_lengths(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| arc_distance(&self.vertices[i], &self.vertices[(i + 1) % n]))
            .collect()
    }

    /// Signed distances from `p` to each directed side `v_i v_{i+1}`.
    pub fn side_distances(&self, p: &SpherePoint) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| side_distance(&self.vertices[i], &self.vertices[(i + 1) % n], p))
            .collect()
    }

    pub fn contains(&self, p: &SpherePoint, tol: f64) -> Containment {
        Containment::from_distances(self.side_distances(p), tol)
    }

    /// Area as a fan of triangles from the first vertex.
    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        (1..v.len() - 1).map(|i| excess(&v[0], &v[i], &v[i + 1])).sum()
    }

    /// Largest distance between two vertices, which for a convex polygon is
    /// the largest distance between any two of its points.
    pub fn angular_diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut best = 0.0_f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                best = best.max(arc_distance(&v[i], &v[j]));
            }
        }
        best
    }

    /// Normalized vertex sum.
    pub fn centroid(&self) -> SpherePoint {
        SpherePoint::from_nonzero(self.vertices.iter().map(|p| p.0).sum())
    }

    pub fn transformed(&self, m: &Matrix3<f64>) -> Result<Self> {
        Self::new(self.vertices.iter().map(|p| p.transformed(m)).collect())
    }
}
