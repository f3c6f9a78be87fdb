//! Slow, independent reference computations used to cross-check the rest of
//! the crate. Nothing here calls the projection or solver code of the other
//! modules.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::{Matrix3, Point3, SMatrix, SVector, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angles::SolidAngle;
use crate::error::{Error, Result};
use crate::octahedron::OctahedronPose;
use crate::polytope::ConvexPolytope;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleConfig {
    pub seeds_per_assignment: usize,
    pub seed: u64,
    /// Allowed distance outside a facet sector, relative to the scale.
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            seeds_per_assignment: 50,
            seed: 0,
            tol: 1e-9,
        }
    }
}

/// Octahedra of circumradius 1 found on the boundary of a cone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AngleSearch {
    pub poses: Vec<OctahedronPose>,
    /// Facet of each vertex, one entry per distinct pose.
    pub assignments: Vec<[usize; 6]>,
    pub assignments_tried: usize,
    pub seeds_per_assignment: usize,
}

fn axis_of(j: usize) -> (usize, f64) {
    (j % 3, if j < 3 { 1.0 } else { -1.0 })
}

fn vertex_of(axis: usize, sign: f64) -> usize {
    if sign > 0.0 {
        axis
    } else {
        axis + 3
    }
}

/// The 24 rotations of the octahedron as permutations of its vertex labels.
fn label_rotations() -> Vec<[usize; 6]> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::new();
    for p in perms {
        for mask in 0..8 {
            let signs = [0, 1, 2].map(|k| if mask >> k & 1 == 1 { -1.0 } else { 1.0 });
            let mut m = Matrix3::zeros();
            for k in 0..3 {
                m[(p[k], k)] = signs[k];
            }
            if m.determinant() < 0.0 {
                continue;
            }
            out.push(std::array::from_fn(|j| {
                let (a, s) = axis_of(j);
                vertex_of(p[a], s * signs[a])
            }));
        }
    }
    out
}

/// Vertex-to-facet assignments for a cone with `n` facets, one per orbit of
/// the octahedron's rotations. No facet gets two opposite vertices or more
/// than three vertices. For `n = 3` this leaves the 3+2+1 and 2+2+2 patterns.
pub fn facet_assignments(n: usize) -> Vec<[usize; 6]> {
    let rots = label_rotations();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for code in 0..n.pow(6) {
        let mut a = [0usize; 6];
        let mut c = code;
        for slot in a.iter_mut() {
            *slot = c % n;
            c /= n;
        }
        let mut counts = vec![0; n];
        for &f in &a {
            counts[f] += 1;
        }
        // Two faces on two facets would be parallel planes through the apex.
        if counts.iter().any(|&k| k > 3) || counts.iter().filter(|&&k| k == 3).count() > 1 {
            continue;
        }
        if (0..3).any(|j| a[j] == a[j + 3]) {
            continue;
        }
        let canon = rots
            .iter()
            .map(|r| {
                let mut b = [0usize; 6];
                for j in 0..6 {
                    b[r[j]] = a[j];
                }
                b
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(canon);
        }
    }
    out
}

/// Newton iterations on the six plane equations `n_f(j) . x_j = 0` for the
/// center and a left rotation increment, at unit scale.
fn newton(
    normals: &[Vector3<f64>],
    assign: &[usize; 6],
    mut center: Vector3<f64>,
    mut rot: UnitQuaternion<f64>,
) -> Option<(Vector3<f64>, UnitQuaternion<f64>)> {
    let dirs = |q: &UnitQuaternion<f64>| {
        std::array::from_fn::<Vector3<f64>, 6, _>(|j| {
            let (a, s) = axis_of(j);
            let mut e = Vector3::zeros();
            e[a] = s;
            q * e
        })
    };
    for _ in 0..60 {
        let d = dirs(&rot);
        let mut r = SVector::<f64, 6>::zeros();
        let mut jac = SMatrix::<f64, 6, 6>::zeros();
        for j in 0..6 {
            let n = normals[assign[j]];
            r[j] = n.dot(&(center + d[j]));
            let w = d[j].cross(&n);
            for k in 0..3 {
                jac[(j, k)] = n[k];
                jac[(j, k + 3)] = w[k];
            }
        }
        if r.amax() < 1e-13 {
            return Some((center, rot));
        }
        let step = jac.lu().solve(&(-r))?;
        let mut t = 1.0;
        let lim = step.amax();
        if lim > 1.0 {
            t = 1.0 / lim;
        }
        center += Vector3::new(step[0], step[1], step[2]) * t;
        rot = UnitQuaternion::new(Vector3::new(step[3], step[4], step[5]) * t) * rot;
        if center.norm() > 1e3 {
            return None;
        }
    }
    None
}

/// Searches the boundary of a cone for regular octahedra by solving each
/// vertex-to-facet pattern from random starts.
///
/// Returns poses of circumradius 1 in the cone's own position. An empty
/// answer only means nothing was found from the seeds tried. Cones with more
/// than three facets are searched the same way; the pattern count grows as
/// `n^6`.
pub fn direct_angle_search(angle: &SolidAngle, cfg: &OracleConfig) -> Result<AngleSearch> {
    let n = angle.len();
    if !(3..=8).contains(&n) {
        return Err(Error::InvalidSolidAngle(format!(
            "{n} facets, oracle handles 3 to 8"
        )));
    }
    let e = angle.edges();
    let normals: Vec<Vector3<f64>> = (0..n).map(|i| e[i].cross(&e[(i + 1) % n]).normalize()).collect();
    let axis = e.iter().sum::<Vector3<f64>>().normalize();
    let assignments = facet_assignments(n);

    let found: Vec<Vec<(OctahedronPose, [usize; 6])>> = assignments
        .par_iter()
        .enumerate()
        .map(|(ai, assign)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(ai as u64);
            let mut out = Vec::new();
            for _ in 0..cfg.seeds_per_assignment {
                let dir = e
                    .iter()
                    .map(|v| v * rng.gen_range(0.05..1.0))
                    .sum::<Vector3<f64>>()
                    .normalize();
                let dist = 10f64.powf(rng.gen_range(-0.3..2.3));
                let center = (dir + axis).normalize() * dist;
                let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ));
                let Some((c, r)) = newton(&normals, assign, center, q) else {
                    continue;
                };
                let pose = OctahedronPose {
                    center: angle.apex() + c,
                    rotation: r,
                    scale: 1.0,
                };
                let inside = pose
                    .vertices()
                    .iter()
                    .all(|x| normals.iter().all(|n| n.dot(&(x - angle.apex())) >= -cfg.tol));
                if inside
                    && out
                        .iter()
                        .all(|(p, _): &(OctahedronPose, _)| p.set_distance(&pose) > 1e-6)
                {
                    out.push((pose, *assign));
                }
            }
            out
        })
        .collect();

    let mut poses: Vec<OctahedronPose> = Vec::new();
    let mut assigned = Vec::new();
    for (p, a) in found.into_iter().flatten() {
        if poses.iter().all(|q| q.set_distance(&p) > 1e-6) {
            poses.push(p);
            assigned.push(a);
        }
    }
    Ok(AngleSearch {
        poses,
        assignments: assigned,
        assignments_tried: assignments.len(),
        seeds_per_assignment: cfg.seeds_per_assignment,
    })
}

/// Whether `x` lies in `P_eps`: its nearest point in the halfspaces moved
/// in by `eps` is at most `eps` away. The nearest point is found by trying
/// every set of one, two or three constraints as equalities.
pub fn membership_oracle(p: &ConvexPolytope, epsilon: f64, x: &Point3<f64>) -> bool {
    inner_distance(p, epsilon, x) <= epsilon
}

/// Distance from `x` to `P` with every facet moved in by `eps`.
pub fn inner_distance(p: &ConvexPolytope, epsilon: f64, x: &Point3<f64>) -> f64 {
    let hs: Vec<(Vector3<f64>, f64)> = p
        .halfspaces()
        .iter()
        .map(|h| (h.normal, h.offset - epsilon))
        .collect();
    let tol = 1e-12 * p.diameter();
    let feasible = |y: &Vector3<f64>| hs.iter().all(|(n, d)| n.dot(y) <= d + tol);
    if feasible(&x.coords) {
        return 0.0;
    }
    let m = hs.len();
    let mut best = f64::INFINITY;
    let mut try_set = |set: &[usize]| {
        // y = x - sum mu_i n_i with n_i . y = d_i.
        let k = set.len();
        let mut g = nalgebra::DMatrix::<f64>::zeros(k, k);
        let mut b = nalgebra::DVector::<f64>::zeros(k);
        for (r, &i) in set.iter().enumerate() {
            for (c, &j) in set.iter().enumerate() {
                g[(r, c)] = hs[i].0.dot(&hs[j].0);
            }
            b[r] = hs[i].0.dot(&x.coords) - hs[i].1;
        }
        if g.determinant().abs() < 1e-12 {
            return;
        }
        let Some(mu) = g.lu().solve(&b) else { return };
        let mut y = x.coords;
        for (r, &i) in set.iter().enumerate() {
            y -= hs[i].0 * mu[r];
        }
        if feasible(&y) {
            best = best.min((x.coords - y).norm());
        }
    };
    for i in 0..m {
        try_set(&[i]);
        for j in i + 1..m {
            try_set(&[i, j]);
            for k in j + 1..m {
                try_set(&[i, j, k]);
            }
        }
    }
    best
}

/// Monte-Carlo estimate of the solid angle (steradians) and its standard
/// error, from uniform directions.
pub fn mc_solid_angle_area(angle: &SolidAngle, samples: usize, seed: u64) -> (f64, f64) {
    let e = angle.edges();
    let n = e.len();
    let normals: Vec<Vector3<f64>> = (0..n).map(|i| e[i].cross(&e[(i + 1) % n])).collect();
    const CHUNK: usize = 1 << 16;
    let chunks = samples.div_ceil(CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len)
                .filter(|_| {
                    let z: f64 = rng.gen_range(-1.0..1.0);
                    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
                    let rho = (1.0 - z * z).sqrt();
                    let d = Vector3::new(rho * phi.cos(), rho * phi.sin(), z);
                    normals.iter().all(|m| m.dot(&d) >= 0.0)
                })
                .count()
        })
        .sum();
    let f = hits as f64 / samples as f64;
    (4.0 * PI * f, 4.0 * PI * (f * (1.0 - f) / samples as f64).sqrt())
}
