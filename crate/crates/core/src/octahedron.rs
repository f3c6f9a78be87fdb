//! Regular octahedra as points of the similarity configuration space.
//!
//! A pose is a center, a rotation and a scale (circumradius). The six
//! vertices are `center ± scale·R·e_i`, listed as `a, b, c, a', b', c'` with
//! `a = +e1`, `a' = -e1` and so on, so opposite vertices differ by 3 in index.

use std::fmt::Write as _;

use nalgebra::{Matrix3, Point3, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertex labels in pose order.
pub const VERTEX_LABELS: [&str; 6] = ["a", "b", "c", "a'", "b'", "c'"];

/// The twelve edges: every pair of vertices that are not opposite.
pub const EDGES: [(usize, usize); 12] = [
    (0, 1),
    (0, 2),
    (0, 4),
    (0, 5),
    (1, 2),
    (1, 3),
    (1, 5),
    (2, 3),
    (2, 4),
    (3, 4),
    (3, 5),
    (4, 5),
];

/// The eight faces, counterclockwise seen from outside.
pub const FACES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 2, 1],
    [0, 2, 4],
    [0, 5, 1],
    [3, 4, 2],
    [3, 1, 5],
    [0, 4, 5],
    [3, 5, 4],
];

/// Unit direction of vertex `j` in the octahedron's own frame.
pub fn unit_offset(j: usize) -> Vector3<f64> {
    let mut v = Vector3::zeros();
    v[j % 3] = if j < 3 { 1.0 } else { -1.0 };
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoseRecord", into = "PoseRecord")]
pub struct OctahedronPose {
    pub center: Point3<f64>,
    pub rotation: UnitQuaternion<f64>,
    pub scale: f64,
}

/// JSON form: `{"center": [x, y, z], "rotation": [w, x, y, z], "scale": s}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoseRecord {
    pub center: [f64; 3],
    pub rotation: [f64; 4],
    pub scale: f64,
}

impl TryFrom<PoseRecord> for OctahedronPose {
    type Error = Error;

    fn try_from(r: PoseRecord) -> Result<Self> {
        let [w, x, y, z] = r.rotation;
        let q = nalgebra::Quaternion::new(w, x, y, z);
        let n = q.norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
            return Err(Error::Parse(format!("rotation quaternion has norm {n}")));
        }
        Self::new(
            Point3::new(r.center[0], r.center[1], r.center[2]),
            UnitQuaternion::from_quaternion(q),
            r.scale,
        )
    }
}

impl From<OctahedronPose> for PoseRecord {
    fn from(p: OctahedronPose) -> Self {
        let mut q = *p.rotation.quaternion();
        if q.w < 0.0 {
            q = -q;
        }
        PoseRecord {
            center: [p.center.x, p.center.y, p.center.z],
            rotation: [q.w, q.i, q.j, q.k],
            scale: p.scale,
        }
    }
}

impl OctahedronPose {
    pub fn new(center: Point3<f64>, rotation: UnitQuaternion<f64>, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Parse(format!(
                "octahedron scale must be positive, got {scale}"
            )));
        }
        if !center.coords.iter().all(|c| c.is_finite()) {
            return Err(Error::Parse("octahedron center is not finite".into()));
        }
        Ok(Self {
            center,
            rotation,
            scale,
        })
    }

    /// Pose whose vertex directions are the columns of an orthonormal `frame`
    /// and their negatives. A left-handed frame has its third axis flipped,
    /// which swaps the labels `c` and `c'` but not the vertex set.
    pub fn from_frame(center: Point3<f64>, frame: &Matrix3<f64>, scale: f64) -> Self {
        let mut m = *frame;
        if m.determinant() < 0.0 {
            let c = -m.column(2);
            m.set_column(2, &c);
        }
        let rot = Rotation3::from_matrix(&m);
        Self {
            center,
            rotation: UnitQuaternion::from_rotation_matrix(&rot),
            scale,
        }
    }

    pub fn identity(center: Point3<f64>, scale: f64) -> Self {
        Self {
            center,
            rotation: UnitQuaternion::identity(),
            scale,
        }
    }

    pub fn axes(&self) -> Matrix3<f64> {
        self.rotation.to_rotation_matrix().into_inner()
    }

    pub fn vertex(&self, j: usize) -> Point3<f64> {
        self.center + self.rotation * unit_offset(j) * self.scale
    }

    pub fn vertices(&self) -> [Point3<f64>; 6] {
        std::array::from_fn(|j| self.vertex(j))
    }

    /// Distance between opposite vertices.
    pub fn diameter(&self) -> f64 {
        2.0 * self.scale
    }

    /// Largest deviation of an edge or diagonal length from its ideal value.
    pub fn regularity_error(&self) -> f64 {
        let v = self.vertices();
        let edge = std::f64::consts::SQRT_2 * self.scale;
        let mut worst = 0.0_f64;
        for (i, j) in EDGES {
            worst = worst.max(((v[i] - v[j]).norm() - edge).abs());
        }
        for i in 0..3 {
            worst = worst.max(((v[i] - v[i + 3]).norm() - 2.0 * self.scale).abs());
        }
        worst
    }

    /// Hausdorff distance between the two vertex sets. Zero exactly when the
    /// poses describe the same octahedron, whatever the labeling.
    pub fn set_distance(&self, other: &OctahedronPose) -> f64 {
        let a = self.vertices();
        let b = other.vertices();
        let one_way = |x: &[Point3<f64>; 6], y: &[Point3<f64>; 6]| {
            x.iter()
                .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        one_way(&a, &b).max(one_way(&b, &a))
    }

    /// Wavefront OBJ with 6 vertices and 8 outward triangles.
    pub fn to_obj(&self) -> String {
        let mut out = String::from("# regular octahedron\n");
        for p in self.vertices() {
            let _ = writeln!(out, "v {:.17e} {:.17e} {:.17e}", p.x, p.y, p.z);
        }
        for f in FACES {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        out
    }
}
