#![allow(dead_code)]

use nalgebra::{Point3, Quaternion, Rotation3, Unit, UnitQuaternion, Vector3};
use octa::angles::{classify_trihedral, construct_inscribed_octahedron, SolidAngle, Tag};
use octa::octahedron::OctahedronPose;
use octa::polytope::{ConvexPolytope, Halfspace};
use octa::sphere::SphTriangle;
use rand::Rng;

pub fn random_rotation(rng: &mut impl Rng) -> UnitQuaternion<f64> {
    loop {
        let q = Quaternion::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if q.norm() > 0.1 && q.norm() <= 1.0 {
            return UnitQuaternion::from_quaternion(q);
        }
    }
}

pub fn random_unit(rng: &mut impl Rng) -> Vector3<f64> {
    random_rotation(rng) * Vector3::z()
}

/// A randomly placed triangle with sides drawn from `lo..hi`.
pub fn random_triangle(rng: &mut impl Rng, lo: f64, hi: f64) -> SphTriangle {
    loop {
        let s: [f64; 3] = std::array::from_fn(|_| rng.gen_range(lo..hi));
        if let Ok(t) = SphTriangle::from_sides(s[0], s[1], s[2]) {
            let r = random_rotation(rng).to_rotation_matrix();
            if let Ok(t) = t.transformed(r.matrix()) {
                return t;
            }
        }
    }
}

pub fn cube() -> ConvexPolytope {
    let mut hs = Vec::new();
    for i in 0..3 {
        for s in [1.0, -1.0] {
            let mut n = Vector3::zeros();
            n[i] = s;
            hs.push(Halfspace {
                normal: n,
                offset: 1.0,
            });
        }
    }
    ConvexPolytope::from_halfspaces(hs).unwrap()
}

pub fn tetrahedron() -> ConvexPolytope {
    ConvexPolytope::from_vertices(vec![
        Point3::new(1.0, 1.0, 1.0),
        Point3::new(1.0, -1.0, -1.0),
        Point3::new(-1.0, 1.0, -1.0),
        Point3::new(-1.0, -1.0, 1.0),
    ])
    .unwrap()
}

/// Intersection of 6 to 12 random halfspaces tangent to spheres of radius
/// 1 to 1.5 around the origin, kept only if bounded and simple.
pub fn random_simple_polytope(rng: &mut impl Rng) -> ConvexPolytope {
    loop {
        let m = rng.gen_range(6..=12);
        let hs = (0..m)
            .map(|_| Halfspace {
                normal: random_unit(rng),
                offset: rng.gen_range(1.0..1.5),
            })
            .collect();
        if let Ok(p) = ConvexPolytope::from_halfspaces(hs) {
            if p.is_simple().0 {
                return p;
            }
        }
    }
}

/// Edges of the cone `{x : n_i . x >= 0}`, in cyclic order.
pub fn cone_edges(normals: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    let mut rays: Vec<Vector3<f64>> = Vec::new();
    for i in 0..normals.len() {
        for j in i + 1..normals.len() {
            let c = normals[i].cross(&normals[j]);
            if c.norm() < 1e-9 {
                continue;
            }
            for r in [c.normalize(), -c.normalize()] {
                if normals.iter().all(|n| n.dot(&r) >= -1e-12) && rays.iter().all(|q| (q - r).norm() > 1e-9) {
                    rays.push(r);
                }
            }
        }
    }
    let axis = rays.iter().sum::<Vector3<f64>>().normalize();
    let u = axis.cross(&rays[0]).normalize();
    let w = axis.cross(&u);
    rays.sort_by(|a, b| a.dot(&w).atan2(a.dot(&u)).total_cmp(&b.dot(&w).atan2(b.dot(&u))));
    rays
}

/// A four-facet cone around a known inscribed octahedron. A special
/// trihedral angle and its constructed octahedron are cut by a plane through
/// the apex and one octahedron vertex, turned slightly inward from the facet
/// holding that vertex.
pub fn perturbed_special_cone(rng: &mut impl Rng) -> Option<(SolidAngle, OctahedronPose)> {
    let tri = random_triangle(rng, 0.1, 1.0);
    let angle = SolidAngle::from_triangle(Point3::origin(), &tri);
    let class = classify_trihedral(&angle, 1e-9).ok()?;
    if class.tag != Tag::Special || class.margin < 1e-4 {
        return None;
    }
    let pose = construct_inscribed_octahedron(&angle, class.certificate.as_ref()?, 1.0).ok()?;
    let normals: Vec<Vector3<f64>> = (0..3).map(|i| angle.inward_normal(i)).collect();
    let theta = rng.gen_range(0.02..0.3);
    for v in pose.vertices() {
        let d = angle.facet_distances(&v);
        let on: Vec<usize> = (0..3).filter(|&i| d[i].abs() < 1e-9).collect();
        if on.len() != 1 || (0..3).any(|i| i != on[0] && d[i] < 1e-3) {
            continue;
        }
        let axis = Unit::new_normalize(v.coords);
        for sign in [1.0, -1.0] {
            let n = Rotation3::from_axis_angle(&axis, sign * theta) * normals[on[0]];
            if pose.vertices().iter().all(|x| n.dot(&x.coords) >= -1e-12) {
                let mut all = normals.clone();
                all.push(n);
                let edges = cone_edges(&all);
                if edges.len() != 4 {
                    continue;
                }
                if let Ok(cone) = SolidAngle::new(Point3::origin(), edges) {
                    return Some((cone, pose));
                }
            }
        }
    }
    None
}
