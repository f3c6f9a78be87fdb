//! Regular octahedra inscribed in the boundary of a convex polytope.
//!
//! The six vertex-to-boundary distances of a pose form 6 equations in 7
//! unknowns (center, rotation, scale), so solutions come in curves. They are
//! found on the smoothed body `P_eps`, followed as `eps` halves, and polished
//! against `P` itself.

use nalgebra::{Matrix3, Point3, SMatrix, SVector, UnitQuaternion, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angles::{classify_general, halton_rotations, GeneralClass};
use crate::error::{Error, Result};
use crate::octahedron::{unit_offset, OctahedronPose};
use crate::polytope::{ConvexPolytope, Feature, SmoothedBody};

type Jacobian = SMatrix<f64, 6, 7>;

/// Tuning knobs. Lengths ending in `_rel` are fractions of the diameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveConfig {
    pub tol_res_rel: f64,
    pub max_iter: usize,
    /// Rotations per center and scale in the multistart grid.
    pub rotations: usize,
    pub scales: usize,
    /// First smoothing radius; defaults to a fifth of the inradius.
    pub eps0: Option<f64>,
    pub exact_switch_rel: f64,
    pub collapse_rel: f64,
    pub exclusion_rel: f64,
    pub max_restarts: usize,
    pub certify_tol_rel: f64,
    /// Offset into the low-discrepancy rotation sequence.
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol_res_rel: 1e-10,
            max_iter: 200,
            rotations: 60,
            scales: 4,
            eps0: None,
            exact_switch_rel: 1e-6,
            collapse_rel: 1e-3,
            exclusion_rel: 0.05,
            max_restarts: 4,
            certify_tol_rel: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub pose: OctahedronPose,
    /// Signed distance of each vertex to the target boundary.
    pub residuals: [f64; 6],
    pub iterations: usize,
    pub converged: bool,
    /// Smoothing radius, 0 for `P` itself.
    pub epsilon: f64,
    pub tolerance: f64,
    /// Smallest over largest singular value of the Jacobian is below 1e-8.
    pub rank_deficient: bool,
}

impl SolveReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ContinuationTrace {
    pub steps: Vec<(f64, SolveReport)>,
    /// Octahedron diameter after each step.
    pub diameter_history: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexReport {
    pub position: Point3<f64>,
    pub distance: f64,
    pub feature: Feature,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certification {
    pub certified: bool,
    pub tolerance: f64,
    pub max_distance: f64,
    pub regularity_error: f64,
    pub vertices: Vec<VertexReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Inscription {
    pub trace: ContinuationTrace,
    pub report: SolveReport,
    pub certification: Certification,
    /// Continuations abandoned because the octahedron shrank into a vertex.
    pub collapses: usize,
    pub warnings: Vec<String>,
}

/// What the vertices should lie on.
#[derive(Clone, Copy)]
enum Target<'a> {
    Smoothed(&'a SmoothedBody),
    Exact(&'a ConvexPolytope),
}

impl Target<'_> {
    fn distance(&self, x: &Point3<f64>) -> (f64, Vector3<f64>) {
        match self {
            Target::Smoothed(s) => s.boundary_distance(x),
            Target::Exact(p) => p.signed_distance(x),
        }
    }

    fn epsilon(&self) -> f64 {
        match self {
            Target::Smoothed(s) => s.epsilon(),
            Target::Exact(_) => 0.0,
        }
    }

    fn diameter(&self) -> f64 {
        match self {
            Target::Smoothed(s) => s.base().diameter(),
            Target::Exact(p) => p.diameter(),
        }
    }
}

/// Row `j` is `g_j^T [I, -[R u_j]x, R u_j]` for the parameters (center,
/// scale times a left rotation increment, scale).
fn evaluate(
    target: Target,
    pose: &OctahedronPose,
    dist: impl Fn(Target, &Point3<f64>) -> (f64, Vector3<f64>),
) -> ([f64; 6], Jacobian) {
    let mut r = [0.0; 6];
    let mut jac = Jacobian::zeros();
    for j in 0..6 {
        let dir = pose.rotation * unit_offset(j);
        let x = pose.center + dir * pose.scale;
        let (d, g) = dist(target, &x);
        r[j] = d;
        let spin = dir.cross(&g);
        let row = [g.x, g.y, g.z, spin.x, spin.y, spin.z, g.dot(&dir)];
        for (k, v) in row.iter().enumerate() {
            jac[(j, k)] = *v;
        }
    }
    (r, jac)
}

/// Signed distances of the vertices to `P_eps` and their Jacobian.
///
/// Vertices inside the inner parallel body read `-eps` with a zero row.
pub fn residual(body: &SmoothedBody, pose: &OctahedronPose) -> ([f64; 6], Jacobian) {
    evaluate(Target::Smoothed(body), pose, |t, x| match t {
        Target::Smoothed(s) => s.signed_distance_smoothed(x),
        Target::Exact(p) => p.signed_distance(x),
    })
}

fn apply(pose: &OctahedronPose, step: &SVector<f64, 7>) -> Option<OctahedronPose> {
    let scale = pose.scale + step[6];
    if !(scale > 0.1 * pose.scale) {
        return None;
    }
    let omega = Vector3::new(step[3], step[4], step[5]) / pose.scale;
    Some(OctahedronPose {
        center: pose.center + Vector3::new(step[0], step[1], step[2]),
        rotation: UnitQuaternion::new(omega) * pose.rotation,
        scale,
    })
}

fn rank_deficient(jac: &Jacobian) -> bool {
    let sv = jac.transpose().svd(false, false).singular_values;
    let hi = sv.max();
    let lo = sv.min();
    !(hi > 0.0) || lo < 1e-8 * hi
}

fn levenberg_marquardt(target: Target, seed: &OctahedronPose, cfg: &SolveConfig) -> SolveReport {
    let tol = cfg.tol_res_rel * target.diameter();
    let dist = |t: Target, x: &Point3<f64>| t.distance(x);
    let max_abs = |r: &[f64; 6]| r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cost = |r: &[f64; 6]| r.iter().map(|v| v * v).sum::<f64>();

    let mut pose = *seed;
    let (mut r, mut jac) = evaluate(target, &pose, dist);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < cfg.max_iter && max_abs(&r) > tol {
        iterations += 1;
        let jjt = jac * jac.transpose() + SMatrix::<f64, 6, 6>::identity() * lambda;
        let rv = SVector::<f64, 6>::from_column_slice(&r);
        let Some(y) = jjt.cholesky().map(|c| c.solve(&rv)) else {
            lambda *= 10.0;
            continue;
        };
        let step = -(jac.transpose() * y);
        let accepted = apply(&pose, &step).and_then(|trial| {
            let (r2, j2) = evaluate(target, &trial, dist);
            (cost(&r2) < cost(&r)).then_some((trial, r2, j2))
        });
        match accepted {
            Some((trial, r2, j2)) => {
                pose = trial;
                r = r2;
                jac = j2;
                lambda = (lambda / 3.0).max(1e-12);
            }
            None => {
                lambda *= 4.0;
                if lambda > 1e12 {
                    break;
                }
            }
        }
    }
    SolveReport {
        pose,
        residuals: r,
        iterations,
        converged: max_abs(&r) <= tol,
        epsilon: target.epsilon(),
        tolerance: tol,
        rank_deficient: rank_deficient(&jac),
    }
}

/// Damped least squares from `seed` onto an octahedron inscribed in the
/// boundary of `body`. Never retries; a failed solve comes back with
/// `converged == false` and the best iterate.
pub fn solve_at_epsilon(body: &SmoothedBody, seed: &OctahedronPose, cfg: &SolveConfig) -> SolveReport {
    let mut rep = levenberg_marquardt(Target::Smoothed(body), seed, cfg);
    // Re-read through the public residual so `converged` cannot lie.
    let (r, _) = residual(body, &rep.pose);
    rep.residuals = r;
    rep.converged = rep.max_residual() <= rep.tolerance;
    rep
}

/// Same as [`solve_at_epsilon`] against `P` itself.
pub fn polish(poly: &ConvexPolytope, seed: &OctahedronPose, cfg: &SolveConfig) -> SolveReport {
    levenberg_marquardt(Target::Exact(poly), seed, cfg)
}

/// Distance from `from` to the boundary of `poly` along `dir`.
fn ray_length(poly: &ConvexPolytope, from: &Point3<f64>, dir: &Vector3<f64>) -> f64 {
    poly.halfspaces()
        .iter()
        .filter(|h| h.normal.dot(dir) > 1e-12)
        .map(|h| -h.excess(from) / h.normal.dot(dir))
        .fold(f64::INFINITY, f64::min)
}

/// Octahedron centred at the center of mass, aligned with the principal
/// axes (the identity for isotropic bodies), its nearest vertex on `P`.
pub fn reference_seed(poly: &ConvexPolytope) -> OctahedronPose {
    let (_, c, cov) = poly.mass_properties();
    let eig = cov.symmetric_eigen();
    let spread = eig.eigenvalues.max() - eig.eigenvalues.min();
    let frame = if spread <= 1e-9 * eig.eigenvalues.max().abs() {
        Matrix3::identity()
    } else {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        Matrix3::from_columns(&idx.map(|i| eig.eigenvectors.column(i).into_owned()))
    };
    let probe = OctahedronPose::from_frame(c, &frame, 1.0);
    let scale = (0..6)
        .map(|j| ray_length(poly, &c, &(probe.vertex(j) - c)))
        .fold(f64::INFINITY, f64::min);
    OctahedronPose::from_frame(c, &frame, scale)
}

/// Seeds of the multistart grid, in a fixed order.
fn multistart_seeds(poly: &ConvexPolytope, cfg: &SolveConfig) -> Vec<OctahedronPose> {
    let (_, centroid, _) = poly.mass_properties();
    let mut centers = vec![centroid];
    for v in poly.vertices() {
        centers.push(v + (centroid - v) * 0.3);
    }
    let diam = poly.diameter();
    let scales: Vec<f64> = (0..cfg.scales)
        .map(|k| {
            let t = if cfg.scales > 1 {
                k as f64 / (cfg.scales - 1) as f64
            } else {
                1.0
            };
            0.5 * diam * (0.01_f64 / 0.5).powf(1.0 - t) / 2.0
        })
        .collect();
    let skip = cfg.seed as usize * cfg.rotations;
    let rotations: Vec<_> = halton_rotations(skip + cfg.rotations).split_off(skip);
    let mut seeds = Vec::with_capacity(centers.len() * scales.len() * rotations.len());
    for c in &centers {
        for &s in &scales {
            for q in &rotations {
                seeds.push(OctahedronPose {
                    center: *c,
                    rotation: *q,
                    scale: s,
                });
            }
        }
    }
    seeds
}

/// Image of a pose under an orthogonal map about `origin`.
fn moved(pose: &OctahedronPose, q: &Matrix3<f64>, origin: &Point3<f64>) -> OctahedronPose {
    OctahedronPose::from_frame(
        origin + q * (pose.center - origin),
        &(q * pose.axes()),
        pose.scale,
    )
}

/// Sorts by residual then pose and drops duplicates up to the symmetries of
/// the octahedron and of `poly`.
fn dedupe_reports(poly: &ConvexPolytope, mut reports: Vec<SolveReport>) -> Vec<SolveReport> {
    let key = |r: &SolveReport| {
        let p = &r.pose;
        [r.max_residual(), p.center.x, p.center.y, p.center.z, p.scale]
    };
    reports.sort_by(|a, b| {
        key(a)
            .iter()
            .zip(key(b).iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let syms = poly.symmetries();
    let (_, origin, _) = poly.mass_properties();
    let tol = 1e-6 * poly.diameter();
    let mut out: Vec<SolveReport> = Vec::new();
    for r in reports {
        let dup = out.iter().any(|o| {
            syms.iter()
                .any(|q| moved(&r.pose, q, &origin).set_distance(&o.pose) < tol)
        });
        if !dup {
            out.push(r);
        }
    }
    out
}

fn multistart_filtered(
    body: &SmoothedBody,
    cfg: &SolveConfig,
    keep: impl Fn(&OctahedronPose) -> bool + Sync,
) -> Result<Vec<SolveReport>> {
    let seeds = multistart_seeds(body.base(), cfg);
    let reports: Vec<SolveReport> = seeds
        .par_iter()
        .map(|s| solve_at_epsilon(body, s, cfg))
        .filter(|r| r.converged && keep(&r.pose))
        .collect();
    if reports.is_empty() {
        return Err(Error::NoSolutionFound { seeds: seeds.len() });
    }
    Ok(dedupe_reports(body.base(), reports))
}

/// Solves from a grid of seeds in parallel and returns the distinct
/// converged octahedra, best residual first.
pub fn multistart(body: &SmoothedBody, cfg: &SolveConfig) -> Result<Vec<SolveReport>> {
    multistart_filtered(body, cfg, |_| true)
}

/// Whether all six vertices sit within `radius` of one vertex of `poly`.
fn near_vertex(poly: &ConvexPolytope, pose: &OctahedronPose, radius: f64) -> bool {
    poly.vertices()
        .iter()
        .any(|v| pose.vertices().iter().all(|x| (x - v).norm() <= radius))
}

/// Checks every vertex of `pose` against the boundary of `poly`.
pub fn certify(poly: &ConvexPolytope, pose: &OctahedronPose, tol: f64) -> Certification {
    let vertices: Vec<VertexReport> = pose
        .vertices()
        .iter()
        .map(|x| {
            let (distance, feature) = poly.distance_to_boundary(x);
            VertexReport {
                position: *x,
                distance,
                feature,
            }
        })
        .collect();
    let max_distance = vertices.iter().fold(0.0_f64, |m, v| m.max(v.distance));
    let regularity_error = pose.regularity_error();
    Certification {
        certified: max_distance <= tol && regularity_error <= 1e-12 * pose.scale,
        tolerance: tol,
        max_distance,
        regularity_error,
        vertices,
    }
}

enum Outcome {
    Done(ContinuationTrace, SolveReport),
    Collapsed,
    Lost,
}

/// Follows one solution from `start` down to `eps = 0`.
fn track(poly: &ConvexPolytope, start: SolveReport, eps0: f64, cfg: &SolveConfig) -> Result<Outcome> {
    let diam = poly.diameter();
    let collapse = cfg.collapse_rel * diam;
    let mut trace = ContinuationTrace::default();
    trace.diameter_history.push(start.pose.diameter());
    let mut pose = start.pose;
    let mut eps = eps0;
    trace.steps.push((eps, start));
    while eps >= cfg.exact_switch_rel * diam {
        let target = eps / 2.0;
        // Halve, retrying through intermediate radii when the jump is too big.
        let mut from = eps;
        let mut to = target;
        let mut tries = 0;
        loop {
            let body = SmoothedBody::new(poly.clone(), to)?;
            let rep = solve_at_epsilon(&body, &pose, cfg);
            if rep.converged {
                pose = rep.pose;
                trace.diameter_history.push(pose.diameter());
                trace.steps.push((to, rep));
                if pose.diameter() < collapse {
                    return Ok(Outcome::Collapsed);
                }
                if to == target {
                    break;
                }
                from = to;
                to = target;
                tries = 0;
            } else {
                tries += 1;
                if tries > 6 {
                    return Ok(Outcome::Lost);
                }
                to = 0.5 * (from + to);
            }
        }
        eps = target;
    }
    let rep = polish(poly, &pose, cfg);
    if !rep.converged {
        return Ok(Outcome::Lost);
    }
    Ok(Outcome::Done(trace, rep))
}

/// Non-simple vertices whose angle might block existence.
fn angle_warnings(poly: &ConvexPolytope) -> Vec<String> {
    let (simple, bad) = poly.is_simple();
    if simple {
        return vec![];
    }
    let mut out = vec![];
    for v in bad {
        let class = poly
            .solid_angle_at(v)
            .and_then(|a| classify_general(&a, crate::sphere::DEFAULT_TOL));
        match class {
            Ok(GeneralClass::InA0 { .. }) | Ok(GeneralClass::Trihedral(_)) => {}
            Ok(c) => out.push(format!(
                "vertex {v} is not simple and its angle is {}; existence is not guaranteed",
                c.label()
            )),
            Err(e) => out.push(format!("vertex {v}: {e}")),
        }
    }
    out
}

/// Finds, follows and certifies an octahedron inscribed in `poly`.
///
/// The first candidate comes from [`reference_seed`]; further candidates
/// come from [`multistart`] and avoid octahedra shrinking into a vertex.
pub fn continue_to_surface(poly: &ConvexPolytope, cfg: &SolveConfig) -> Result<Inscription> {
    let diam = poly.diameter();
    let eps0 = cfg.eps0.unwrap_or(0.2 * poly.inradius());
    let warnings = angle_warnings(poly);
    let body = SmoothedBody::new(poly.clone(), eps0)?;
    let exclusion = cfg.exclusion_rel * diam;

    let mut candidates: Vec<SolveReport> = Vec::new();
    let first = solve_at_epsilon(&body, &reference_seed(poly), cfg);
    if first.converged {
        candidates.push(first);
    }
    let mut searched = false;
    let mut collapses = 0;
    let mut tried = 0;
    loop {
        if candidates.is_empty() {
            if searched {
                break;
            }
            searched = true;
            match multistart_filtered(&body, cfg, |p| !near_vertex(poly, p, exclusion)) {
                Ok(mut found) => {
                    // Largest first: they are the least likely to collapse.
                    found.sort_by(|a, b| b.pose.scale.total_cmp(&a.pose.scale));
                    candidates = found;
                }
                Err(_) => break,
            }
        }
        let start = candidates.remove(0);
        tried += 1;
        if tried > cfg.max_restarts + 1 {
            break;
        }
        match track(poly, start, eps0, cfg)? {
            Outcome::Done(trace, report) => {
                let tol = cfg.certify_tol_rel * diam;
                let certification = certify(poly, &report.pose, tol);
                if certification.certified {
                    return Ok(Inscription {
                        trace,
                        report,
                        certification,
                        collapses,
                        warnings,
                    });
                }
            }
            Outcome::Collapsed => collapses += 1,
            Outcome::Lost => {}
        }
    }
    Err(Error::InscriptionFailed(format!(
        "no candidate survived continuation ({tried} tried, {collapses} collapsed into vertices)"
    )))
}
