//! Solid angles at polytope vertices and their classification.
//!
//! A trihedral angle is *special* when its boundary carries an inscribed
//! regular octahedron. That happens exactly when its spherical triangle can be
//! placed in the regular triangle `T0` of side `pi/3` with one vertex on `t1`,
//! the second on the arc `t1 t2` and the third in the triangle `t1 v2 t3`.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{Matrix3, Point3, Rotation3, UnitQuaternion, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::octahedron::OctahedronPose;
use crate::sphere::{arc_distance, side_distance, SphPolygon, SphTriangle, SpherePoint};

/// Convex polyhedral cone given by its apex and its extreme rays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SolidAngleRecord", into = "SolidAngleRecord")]
pub struct SolidAngle {
    apex: Point3<f64>,
    edges: Vec<Vector3<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolidAngleRecord {
    pub apex: [f64; 3],
    pub edges: Vec<[f64; 3]>,
}

impl TryFrom<SolidAngleRecord> for SolidAngle {
    type Error = Error;

    fn try_from(r: SolidAngleRecord) -> Result<Self> {
        SolidAngle::new(
            Point3::from(r.apex),
            r.edges.into_iter().map(Vector3::from).collect(),
        )
    }
}

impl From<SolidAngle> for SolidAngleRecord {
    fn from(a: SolidAngle) -> Self {
        SolidAngleRecord {
            apex: a.apex.coords.into(),
            edges: a.edges.iter().map(|e| (*e).into()).collect(),
        }
    }
}

impl SolidAngle {
    /// Edges may have any positive length and either cyclic orientation; they
    /// are stored normalized and counterclockwise seen from outside.
    pub fn new(apex: Point3<f64>, edges: Vec<Vector3<f64>>) -> Result<Self> {
        if !apex.coords.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidSolidAngle("apex is not finite".into()));
        }
        let points = edges
            .into_iter()
            .map(SpherePoint::new)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::InvalidSolidAngle(e.to_string()))?;
        let poly = SphPolygon::new(points).map_err(|e| Error::InvalidSolidAngle(e.to_string()))?;
        Ok(Self {
            apex,
            edges: poly.vertices().iter().map(|p| *p.vector()).collect(),
        })
    }

    /// Trihedral angle whose edge directions are the vertices of `tri`.
    pub fn from_triangle(apex: Point3<f64>, tri: &SphTriangle) -> Self {
        Self {
            apex,
            edges: tri.vertices().iter().map(|p| *p.vector()).collect(),
        }
    }

    /// Trihedral angle with the given facet angles at the origin.
    pub fn trihedral_from_facet_angles(ab: f64, ac: f64, bc: f64) -> Result<Self> {
        Ok(Self::from_triangle(
            Point3::origin(),
            &SphTriangle::from_sides(ab, ac, bc)?,
        ))
    }

    pub fn apex(&self) -> &Point3<f64> {
        &self.apex
    }

    pub fn edges(&self) -> &[Vector3<f64>] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn spherical_polygon(&self) -> SphPolygon {
        SphPolygon::new(self.edges.iter().map(|e| SpherePoint::new(*e).unwrap()).collect())
            .expect("validated at construction")
    }

    /// Angles of the facets, facet `i` being spanned by edges `i` and `i + 1`.
    pub fn facet_angles(&self) -> Vec<f64> {
        self.spherical_polygon().side_lengths()
    }

    /// Unit inward normal of facet `i`.
    pub fn inward_normal(&self, i: usize) -> Vector3<f64> {
        let n = self.edges.len();
        self.edges[i].cross(&self.edges[(i + 1) % n]).normalize()
    }

    /// Signed distance of `x` to each facet plane, positive inside the cone.
    pub fn facet_distances(&self, x: &Point3<f64>) -> Vec<f64> {
        (0..self.edges.len())
            .map(|i| self.inward_normal(i).dot(&(x - self.apex)))
            .collect()
    }

    pub fn transformed(&self, rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> Result<Self> {
        Self::new(
            Point3::from(rotation * self.apex.coords + translation),
            self.edges.iter().map(|e| rotation * e).collect(),
        )
    }
}

/// The regular spherical triangle of side `pi/3` with `t1 = e3`, symmetric
/// about the meridian `y = 0`.
pub fn t0() -> SphTriangle {
    let [a, b, c] = t0_vertices();
    SphTriangle::new(a, b, c).expect("T0 is a valid triangle")
}

pub fn t0_vertices() -> [SpherePoint; 3] {
    let half = 0.5 * (1.0_f64 / 3.0).acos();
    let (s, c) = FRAC_PI_3.sin_cos();
    let at = |phi: f64| SpherePoint::from_xyz(s * phi.cos(), s * phi.sin(), c).unwrap();
    [SpherePoint::e3(), at(-half), at(half)]
}

/// Area of `T0`, `3 arccos(1/3) - pi`.
pub fn t0_area() -> f64 {
    3.0 * (1.0_f64 / 3.0).acos() - PI
}

/// Unit tangent at `t1` towards `t2`, and its left turn towards `t3`.
fn t0_tangents() -> (Vector3<f64>, Vector3<f64>) {
    let half = 0.5 * (1.0_f64 / 3.0).acos();
    let u = Vector3::new(half.cos(), -half.sin(), 0.0);
    (u, Vector3::z().cross(&u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Tag {
    Special,
    NonSpecial,
    Indeterminate,
}

impl std::fmt::Display for Tag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Tag::Special => "SPECIAL",
            Tag::NonSpecial => "NON_SPECIAL",
            Tag::Indeterminate => "INDETERMINATE",
        })
    }
}

/// A placement of a triangle inside `T0`.
///
/// `labeling = [i, j, k]` sends input vertex `i` to `t1`, `j` onto the arc
/// `t1 t2` and `k` into the triangle `t1 v2 t3`. `mirrored` is set when the
/// placement reverses orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementCertificate {
    pub labeling: [usize; 3],
    pub mirrored: bool,
    pub placed: [SpherePoint; 3],
    /// Signed distances of the placed `v3` from the sides `t1 v2`, `v2 t3`
    /// and `t3 t1`.
    pub margins: [f64; 3],
    /// `pi/3 - |v1 v2|`.
    pub reach_slack: f64,
}

impl PlacementCertificate {
    pub fn margin(&self) -> f64 {
        self.margins.iter().fold(self.reach_slack, |m, &x| m.min(x))
    }

    pub fn placed_triangle(&self) -> Result<SphTriangle> {
        let [a, b, c] = self.placed;
        SphTriangle::new(a, b, c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleClass {
    pub tag: Tag,
    pub margin: f64,
    pub certificate: Option<PlacementCertificate>,
}

impl AngleClass {
    fn from_margin(margin: f64, cert: Option<PlacementCertificate>, tol: f64) -> Self {
        let tag = if margin > tol {
            Tag::Special
        } else if margin < -tol {
            Tag::NonSpecial
        } else {
            Tag::Indeterminate
        };
        AngleClass {
            tag,
            margin,
            certificate: if tag == Tag::Special { cert } else { None },
        }
    }
}

pub fn spherical_triangle_of(angle: &SolidAngle) -> Result<SphTriangle> {
    if angle.len() != 3 {
        return Err(Error::NotTrihedral(angle.len()));
    }
    let p = |i: usize| SpherePoint::new(angle.edges[i]);
    SphTriangle::new(p(0)?, p(1)?, p(2)?)
}

/// Relabels so that `|v0 v1| >= |v0 v2| >= |v1 v2|`, reflecting if needed to
/// keep positive orientation.
pub fn normalize_ordering(tri: &SphTriangle) -> Result<SphTriangle> {
    let v = tri.vertices();
    // Opposite side of each vertex.
    let opposite = [tri.side(1, 2), tri.side(0, 2), tri.side(0, 1)];
    let mut order = [0, 1, 2];
    // v0 faces the shortest side, v2 the longest.
    order.sort_by(|&i, &j| opposite[i].total_cmp(&opposite[j]));
    let mut p = order.map(|i| v[i]);
    if p[0].vector().dot(&p[1].vector().cross(p[2].vector())) < 0.0 {
        let m = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
        p = p.map(|q| q.transformed(&m));
    }
    SphTriangle::new(p[0], p[1], p[2])
}

const LABELINGS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn evaluate_labeling(tri: &SphTriangle, lab: [usize; 3], flip: bool) -> PlacementCertificate {
    let v = tri.vertices();
    let [i, j, k] = lab;
    let a = arc_distance(&v[i], &v[j]);
    let b = arc_distance(&v[i], &v[k]);
    // Unsigned angle at v_i between the arcs to v_j and v_k.
    let p = v[i].vector();
    let n1 = p.cross(v[j].vector());
    let n2 = p.cross(v[k].vector());
    let angle = n1.cross(&n2).norm().atan2(n1.dot(&n2));

    let t = t0_vertices();
    let (u, w) = t0_tangents();
    let t1 = *t[0].vector();
    let side = if flip { -1.0 } else { 1.0 };
    let v2 = SpherePoint::new(t1 * a.cos() + u * a.sin()).unwrap();
    let v3 = SpherePoint::new(t1 * b.cos() + (u * angle.cos() + w * (side * angle.sin())) * b.sin()).unwrap();
    let margins = [
        side_distance(&t[0], &v2, &v3),
        side_distance(&v2, &t[2], &v3),
        side_distance(&t[2], &t[0], &v3),
    ];
    let input_sign = p.dot(&v[j].vector().cross(v[k].vector())) > 0.0;
    PlacementCertificate {
        labeling: lab,
        mirrored: input_sign == flip,
        placed: [t[0], v2, v3],
        margins,
        reach_slack: FRAC_PI_3 - a,
    }
}

/// Tries every labeling and both sides of `t1 t2` for the third vertex.
/// Ties keep the first placement in a fixed order.
pub fn placement_test(tri: &SphTriangle, tol: f64) -> AngleClass {
    let mut best: Option<PlacementCertificate> = None;
    for lab in LABELINGS {
        for flip in [false, true] {
            let c = evaluate_labeling(tri, lab, flip);
            if best.map_or(true, |b| c.margin() > b.margin()) {
                best = Some(c);
            }
        }
    }
    let best = best.unwrap();
    AngleClass::from_margin(best.margin(), Some(best), tol)
}

pub fn classify_trihedral(angle: &SolidAngle, tol: f64) -> Result<AngleClass> {
    let tri = spherical_triangle_of(angle)?;
    let sides = tri.side_lengths();
    if sides.iter().all(|&s| s < FRAC_PI_6 - tol) {
        // Normalized labeling: v1 opposite the shortest side, v3 opposite the longest.
        let opposite = [sides[2], sides[1], sides[0]];
        let mut lab = [0, 1, 2];
        lab.sort_by(|&i, &j| opposite[i].total_cmp(&opposite[j]));
        let lab = [lab[0], lab[1], lab[2]];
        for flip in [false, true] {
            let c = evaluate_labeling(&tri, lab, flip);
            if c.margin() > tol {
                return Ok(AngleClass::from_margin(c.margin(), Some(c), tol));
            }
        }
    }
    let longest = tri.max_side();
    if longest > FRAC_PI_3 + tol {
        return Ok(AngleClass {
            tag: Tag::NonSpecial,
            margin: FRAC_PI_3 - longest,
            certificate: None,
        });
    }
    Ok(placement_test(&tri, tol))
}

/// Octahedron inscribed in the boundary of a special trihedral angle, with
/// circumradius `scale`.
///
/// Three vertices `a' b' c'` lie on the facet through the edges placed at
/// `t1, v2`, the edge `ab` on the facet through `v3, t1` and `c` on the
/// remaining facet. The center solves a 3x3 linear system.
pub fn construct_inscribed_octahedron(
    angle: &SolidAngle,
    cert: &PlacementCertificate,
    scale: f64,
) -> Result<OctahedronPose> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::ConstructionFailed(format!(
            "scale {scale} must be positive"
        )));
    }
    if !(cert.margin() > 0.0) {
        return Err(Error::ConstructionFailed(format!(
            "certificate margin {:.3e} is not positive",
            cert.margin()
        )));
    }
    let tri = spherical_triangle_of(angle)?;
    let [i, j, k] = cert.labeling;
    let e = [i, j, k].map(|m| *tri.vertex(m).vector());
    let p = cert.placed.map(|q| *q.vector());
    for (x, y) in [(0, 1), (0, 2), (1, 2)] {
        let d_angle = e[x].cross(&e[y]).norm().atan2(e[x].dot(&e[y]));
        let d_cert = p[x].cross(&p[y]).norm().atan2(p[x].dot(&p[y]));
        if (d_angle - d_cert).abs() > 1e-9 {
            return Err(Error::ConstructionFailed(
                "certificate does not describe this angle".into(),
            ));
        }
    }

    let t = t0_vertices().map(|q| q.into_vector());
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let u1 = (t[0] - t[1] + t[2]) * r2;
    let u2 = (-t[0] - t[1] + t[2]) * r2;
    let u3 = (-t[0] + t[1] + t[2]) * r2;

    let n12 = p[0].cross(&p[1]);
    let n31 = p[2].cross(&p[0]);
    let n23 = p[1].cross(&p[2]);
    let m = Matrix3::from_rows(&[n12.transpose(), n31.transpose(), n23.transpose()]);
    let rhs = Vector3::new(n12.dot(&u1), -n31.dot(&u1), -n23.dot(&u3));
    let o = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::ConstructionFailed("singular facet system".into()))?;

    // Frame of the placed edges and of the real ones; the orthogonal map
    // between them carries the octahedron into the angle.
    let frame = |a: &Vector3<f64>, b: &Vector3<f64>| {
        let x = a.normalize();
        let y = (b - x * x.dot(b)).normalize();
        Matrix3::from_columns(&[x, y, x.cross(&y)])
    };
    let sigma = if cert.mirrored { -1.0 } else { 1.0 };
    let q = frame(&e[0], &e[1])
        * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, sigma))
        * frame(&p[0], &p[1]).transpose();
    if (q * p[2] - e[2]).norm() > 1e-9 {
        return Err(Error::ConstructionFailed(
            "certificate orientation does not match the angle".into(),
        ));
    }

    let axes = q * Matrix3::from_columns(&[u1, u2, u3]);
    let pose = OctahedronPose::from_frame(angle.apex + q * o * scale, &axes, scale);

    let tol = 1e-9 * scale;
    for x in pose.vertices() {
        let d = angle.facet_distances(&x);
        let lowest = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if lowest < -tol || lowest > tol {
            return Err(Error::ConstructionFailed(format!(
                "vertex misses the boundary by {lowest:.3e}"
            )));
        }
        let on: Vec<usize> = (0..3).filter(|&f| d[f].abs() <= tol).collect();
        let n = angle.len();
        let in_sector = on.iter().any(|&f| {
            let a = angle.edges[f];
            let b = angle.edges[(f + 1) % n];
            let r = x - angle.apex;
            a.cross(&r).dot(&a.cross(&b)) >= -tol && r.cross(&b).dot(&a.cross(&b)) >= -tol
        });
        if !in_sector {
            return Err(Error::ConstructionFailed(
                "vertex outside its facet sector".into(),
            ));
        }
    }
    Ok(pose)
}

/// Classifies, then constructs when the angle is special.
pub fn inscribe_in_trihedral(angle: &SolidAngle, scale: f64, tol: f64) -> Result<OctahedronPose> {
    let class = classify_trihedral(angle, tol)?;
    match (class.tag, class.certificate) {
        (Tag::Special, Some(cert)) => construct_inscribed_octahedron(angle, &cert, scale),
        _ => Err(Error::ConstructionFailed(format!(
            "angle is {} (margin {:.3e})",
            class.tag, class.margin
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FitVerdict {
    Fits,
    NoFit,
    Indeterminate,
}

/// Outcome of the search for a rotation placing a polygon inside `T0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub verdict: FitVerdict,
    /// Best worst-case signed distance from the sides of `T0`. For quick
    /// rejections this is the (negative) excess of diameter or area instead.
    pub margin: f64,
    pub rotation: Option<UnitQuaternion<f64>>,
}

/// Number of low-discrepancy rotations tried before refinement.
pub const FIT_GRID: usize = 12288;
const FIT_REFINE: usize = 32;

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Deterministic, nearly uniform rotations (Shoemake's map of a Halton
/// sequence).
pub fn halton_rotations(count: usize) -> Vec<UnitQuaternion<f64>> {
    (1..=count)
        .map(|i| {
            let (u1, u2, u3) = (
                radical_inverse(i, 2),
                radical_inverse(i, 3),
                radical_inverse(i, 5),
            );
            let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
            let tau = 2.0 * PI;
            UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
                b * (tau * u3).cos(),
                a * (tau * u2).sin(),
                a * (tau * u2).cos(),
                b * (tau * u3).sin(),
            ))
        })
        .collect()
}

struct FitProblem {
    normals: [Vector3<f64>; 3],
    points: Vec<Vector3<f64>>,
}

impl FitProblem {
    /// Smallest sine of the distance of a rotated vertex from a side of `T0`.
    fn score(&self, r: &Rotation3<f64>) -> f64 {
        let mut worst = f64::INFINITY;
        for p in &self.points {
            let q = r * p;
            for n in &self.normals {
                worst = worst.min(n.dot(&q));
            }
        }
        worst
    }

    /// Sequential linear programming on the left-multiplied rotation.
    fn refine(&self, start: Rotation3<f64>) -> (Rotation3<f64>, f64) {
        let mut r = start;
        let mut val = self.score(&r);
        let mut radius = 0.05;
        for _ in 0..200 {
            if radius < 1e-15 {
                break;
            }
            let mut lp = Problem::new(OptimizationDirection::Maximize);
            let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
            let w = [0, 1, 2].map(|_| lp.add_var(0.0, (-radius, radius)));
            for p in &self.points {
                let q = r * p;
                for n in &self.normals {
                    let c = q.cross(n);
                    lp.add_constraint(
                        [(t, -1.0), (w[0], c.x), (w[1], c.y), (w[2], c.z)],
                        ComparisonOp::Ge,
                        -n.dot(&q),
                    );
                }
            }
            let Ok(sol) = lp.solve() else { break };
            let omega = Vector3::new(sol[w[0]], sol[w[1]], sol[w[2]]);
            let predicted = sol[t] - val;
            let trial = Rotation3::new(omega) * r;
            let got = self.score(&trial);
            if got > val && predicted > 0.0 {
                let ratio = (got - val) / predicted;
                r = trial;
                val = got;
                if ratio > 0.75 {
                    radius = (radius * 2.0).min(0.5);
                } else if ratio < 0.25 {
                    radius *= 0.5;
                }
            } else {
                radius *= 0.25;
            }
        }
        (r, val)
    }
}

/// Rotations taking vertex `a` to a vertex of `T0` and the arc towards a
/// neighbour `b` along a side of `T0`.
fn alignment_seeds(points: &[Vector3<f64>]) -> Vec<Rotation3<f64>> {
    let t = t0_vertices().map(|q| q.into_vector());
    let frame = |a: &Vector3<f64>, b: &Vector3<f64>| {
        let y = (b - a * a.dot(b)).normalize();
        Matrix3::from_columns(&[*a, y, a.cross(&y)])
    };
    let n = points.len();
    let mut out = Vec::new();
    for ia in 0..n {
        for ib in [(ia + 1) % n, (ia + n - 1) % n] {
            let src = frame(&points[ia], &points[ib]);
            for ka in 0..3 {
                for kb in [(ka + 1) % 3, (ka + 2) % 3] {
                    let dst = frame(&t[ka], &t[kb]);
                    out.push(Rotation3::from_matrix_unchecked(dst * src.transpose()));
                }
            }
        }
    }
    out
}

/// Searches for a rotation taking every vertex of `poly` into `T0`.
///
/// Quick rejections on diameter and area, then a max-min search over a fixed
/// low-discrepancy grid refined locally from the best seeds. A `NoFit`
/// verdict is only as complete as the grid is fine.
pub fn fits_in_t0(poly: &SphPolygon, tol: f64) -> FitResult {
    let diameter = poly.angular_diameter();
    if diameter > FRAC_PI_3 + tol {
        return FitResult {
            verdict: FitVerdict::NoFit,
            margin: FRAC_PI_3 - diameter,
            rotation: None,
        };
    }
    let excess = poly.area() - t0_area();
    if excess > tol {
        return FitResult {
            verdict: FitVerdict::NoFit,
            margin: -excess,
            rotation: None,
        };
    }
    let t = t0_vertices();
    let problem = FitProblem {
        normals: [0, 1, 2].map(|k| t[k].vector().cross(t[(k + 1) % 3].vector()).normalize()),
        points: poly.vertices().iter().map(|p| *p.vector()).collect(),
    };
    let mut seeds: Vec<Rotation3<f64>> = alignment_seeds(&problem.points);
    seeds.extend(halton_rotations(FIT_GRID).iter().map(|q| q.to_rotation_matrix()));
    let scores: Vec<f64> = seeds.par_iter().map(|r| problem.score(r)).collect();
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(FIT_REFINE);
    let refined: Vec<(Rotation3<f64>, f64)> = order.par_iter().map(|&s| problem.refine(seeds[s])).collect();
    let mut best = refined[0];
    for r in &refined[1..] {
        if r.1 > best.1 {
            best = *r;
        }
    }
    let margin = best.1.clamp(-1.0, 1.0).asin();
    let verdict = if margin > tol {
        FitVerdict::Fits
    } else if margin < -tol {
        FitVerdict::NoFit
    } else {
        FitVerdict::Indeterminate
    };
    FitResult {
        verdict,
        margin,
        rotation: Some(UnitQuaternion::from_rotation_matrix(&best.0)),
    }
}

/// Class of an arbitrary convex solid angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GeneralClass {
    Trihedral(AngleClass),
    /// Cannot be rotated into `T0`.
    InA0 {
        margin: f64,
    },
    /// Fits into `T0`; this alone does not make the angle special.
    NotInA0 {
        margin: f64,
    },
    Indeterminate {
        margin: f64,
    },
}

impl GeneralClass {
    pub fn label(&self) -> String {
        match self {
            GeneralClass::Trihedral(c) => format!("TRIHEDRAL({})", c.tag),
            GeneralClass::InA0 { .. } => "IN_A0".into(),
            GeneralClass::NotInA0 { .. } => "NOT_IN_A0".into(),
            GeneralClass::Indeterminate { .. } => "INDETERMINATE".into(),
        }
    }

    pub fn note(&self) -> Option<&'static str> {
        match self {
            GeneralClass::NotInA0 { .. } => {
                Some("fitting inside T0 is necessary for an inscribed octahedron, not sufficient")
            }
            _ => None,
        }
    }
}

pub fn classify_general(angle: &SolidAngle, tol: f64) -> Result<GeneralClass> {
    if angle.len() == 3 {
        return Ok(GeneralClass::Trihedral(classify_trihedral(angle, tol)?));
    }
    let fit = fits_in_t0(&angle.spherical_polygon(), tol);
    Ok(match fit.verdict {
        FitVerdict::NoFit => GeneralClass::InA0 { margin: fit.margin },
        FitVerdict::Fits => GeneralClass::NotInA0 { margin: fit.margin },
        FitVerdict::Indeterminate => GeneralClass::Indeterminate { margin: fit.margin },
    })
}

/// Target length of the two equal sides at the end of a deformation path.
const PATH_END: f64 = FRAC_PI_3 + 0.02;

/// Deforms a non-special triangle to one with a side longer than `pi/3`
/// through non-special triangles: first lengthen `v1 v3` to `|v1 v2|` at a
/// fixed angle at `v1`, then lengthen both together.
pub fn deformation_path(tri: &SphTriangle, steps: usize, tol: f64) -> Result<Vec<SphTriangle>> {
    let start = normalize_ordering(tri)?;
    let class = placement_test(&start, tol);
    if class.tag != Tag::NonSpecial {
        return Err(Error::NotNonSpecial(class.tag.to_string()));
    }
    if start.max_side() > FRAC_PI_3 {
        return Ok(vec![start]);
    }
    let [ab, ac, _] = start.side_lengths();
    let angle = start.vertex_angle(0);
    let phase1 = ab - ac;
    let phase2 = PATH_END - ab;
    let total = phase1 + phase2;
    let steps = steps.max(2);
    let mut path = Vec::with_capacity(steps);
    path.push(start);
    for n in 1..steps {
        let s = total * n as f64 / (steps - 1) as f64;
        let next = if s <= phase1 {
            SphTriangle::from_sas(ab, ac + s, angle)?
        } else {
            let l = ab + (s - phase1);
            SphTriangle::from_sas(l, l, angle)?
        };
        let c = placement_test(&next, tol);
        if c.tag != Tag::NonSpecial {
            return Err(Error::PathVerificationFailed {
                step: n,
                tag: c.tag.to_string(),
            });
        }
        path.push(next);
    }
    Ok(path)
}
