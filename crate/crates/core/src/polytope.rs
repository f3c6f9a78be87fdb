//! Bounded convex polytopes in both representations, and the smoothed body
//! `P_eps`, the union of all `eps`-balls inside `P`.
//!
//! `P_eps` is never meshed. It equals the inner parallel body (every facet
//! pushed in by `eps`) grown by an `eps`-ball, so its signed distance is the
//! distance to the inner body minus `eps`.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::angles::SolidAngle;
use crate::error::{Error, Result};

/// The closed halfspace `normal . x <= offset`, with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl Halfspace {
    /// Normalizes `normal`, scaling `offset` along with it.
    pub fn new(normal: Vector3<f64>, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !(len > 0.0 && len.is_finite() && offset.is_finite()) {
            return Err(Error::Degenerate(format!(
                "halfspace with normal {normal:?} and offset {offset}"
            )));
        }
        Ok(Self {
            normal: normal / len,
            offset: offset / len,
        })
    }

    /// Signed distance from the bounding plane, positive outside.
    pub fn excess(&self, x: &Point3<f64>) -> f64 {
        self.normal.dot(&x.coords) - self.offset
    }
}

/// Boundary feature of a polytope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum Feature {
    Facet(usize),
    Edge(usize),
    Vertex(usize),
}

/// Bounded, full-dimensional convex polytope.
///
/// Vertices are sorted lexicographically. Facet `i` has halfspace `i` and a
/// vertex cycle that runs counterclockwise seen from outside, starting at its
/// smallest vertex index; facets are sorted by their sorted vertex lists.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolytope {
    halfspaces: Vec<Halfspace>,
    vertices: Vec<Point3<f64>>,
    facets: Vec<Vec<usize>>,
    vertex_facets: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    edge_facets: Vec<[usize; 2]>,
    diameter: f64,
    inradius: f64,
    chebyshev_center: Point3<f64>,
}

/// Facet found by the hull: its plane and the indices of the points on it.
struct RawFacet {
    normal: Vector3<f64>,
    points: Vec<usize>,
}

fn bbox_diagonal(points: &[Point3<f64>]) -> f64 {
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(&p.coords);
        hi = hi.sup(&p.coords);
    }
    (hi - lo).norm()
}

/// Drops points within `tol` of an earlier one.
fn dedupe(points: Vec<Point3<f64>>, tol: f64) -> Vec<Point3<f64>> {
    let mut out: Vec<Point3<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if out.iter().all(|q| (p - q).norm() > tol) {
            out.push(p);
        }
    }
    out
}

/// Supporting planes of a point set that touch it in at least three
/// non-collinear points. Brute force over triples, with an early exit as
/// soon as a point lies beyond the candidate plane.
fn hull_facets(points: &[Point3<f64>], tol: f64, scale: f64) -> Vec<RawFacet> {
    let n = points.len();
    let mut facets: Vec<RawFacet> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if facets.iter().any(|f| {
                    f.points.binary_search(&i).is_ok()
                        && f.points.binary_search(&j).is_ok()
                        && f.points.binary_search(&k).is_ok()
                }) {
                    continue;
                }
                let c = (points[j] - points[i]).cross(&(points[k] - points[i]));
                let len = c.norm();
                if len <= 1e-14 * scale * scale {
                    continue;
                }
                let nrm = c / len;
                let d = nrm.dot(&points[i].coords);
                let mut above = false;
                let mut below = false;
                for p in points {
                    let s = nrm.dot(&p.coords) - d;
                    above |= s > tol;
                    below |= s < -tol;
                    if above && below {
                        break;
                    }
                }
                if above && below {
                    continue;
                }
                let (nrm, d) = if above { (-nrm, -d) } else { (nrm, d) };
                let on: Vec<usize> = (0..n)
                    .filter(|&m| (nrm.dot(&points[m].coords) - d).abs() <= tol)
                    .collect();
                facets.push(RawFacet {
                    normal: nrm,
                    points: on,
                });
            }
        }
    }
    facets
}

/// Chebyshev center and radius of `{x : n_i . x <= d_i}`.
fn chebyshev(halfspaces: &[Halfspace]) -> Result<(Point3<f64>, f64)> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let x = [0, 1, 2].map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)));
    let r = lp.add_var(1.0, (0.0, f64::INFINITY));
    for h in halfspaces {
        lp.add_constraint(
            [
                (x[0], h.normal.x),
                (x[1], h.normal.y),
                (x[2], h.normal.z),
                (r, 1.0),
            ],
            ComparisonOp::Le,
            h.offset,
        );
    }
    match lp.solve() {
        Ok(sol) => Ok((Point3::new(sol[x[0]], sol[x[1]], sol[x[2]]), sol[r])),
        Err(minilp::Error::Infeasible) => Err(Error::Degenerate("halfspaces have empty intersection".into())),
        Err(minilp::Error::Unbounded) => Err(Error::Degenerate("halfspaces are unbounded".into())),
    }
}

impl ConvexPolytope {
    /// Convex hull of a point cloud. Interior points and points in the
    /// interior of facets or edges are dropped.
    pub fn from_vertices(points: Vec<Point3<f64>>) -> Result<Self> {
        Self::from_points(points, None)
    }

    /// Intersection of halfspaces. Redundant halfspaces are dropped;
    /// unbounded or flat intersections are rejected.
    pub fn from_halfspaces(halfspaces: Vec<Halfspace>) -> Result<Self> {
        if halfspaces.len() < 4 {
            return Err(Error::Degenerate(format!(
                "{} halfspaces cannot bound a 3-polytope",
                halfspaces.len()
            )));
        }
        let hs: Vec<Halfspace> = halfspaces
            .iter()
            .map(|h| Halfspace::new(h.normal, h.offset))
            .collect::<Result<_>>()?;
        let (center, radius) = chebyshev(&hs)?;
        // Work relative to the center so tolerances scale with the body.
        let local: Vec<Halfspace> = hs
            .iter()
            .map(|h| Halfspace {
                normal: h.normal,
                offset: h.offset - h.normal.dot(&center.coords),
            })
            .collect();
        if !(radius > 0.0) {
            return Err(Error::Degenerate("halfspace intersection is flat".into()));
        }
        let m = local.len();
        let mut points = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let a = Matrix3::from_rows(&[
                        local[i].normal.transpose(),
                        local[j].normal.transpose(),
                        local[k].normal.transpose(),
                    ]);
                    if a.determinant().abs() < 1e-12 {
                        continue;
                    }
                    let b = Vector3::new(local[i].offset, local[j].offset, local[k].offset);
                    let Some(x) = a.lu().solve(&b) else { continue };
                    let x = Point3::from(x);
                    let tol = 1e-9 * x.coords.norm().max(radius);
                    if local.iter().all(|h| h.excess(&x) <= tol) {
                        points.push(x);
                    }
                }
            }
        }
        let shifted: Vec<Point3<f64>> = points.into_iter().map(|p| p + center.coords).collect();
        Self::from_points(shifted, Some(&hs))
    }

    fn from_points(points: Vec<Point3<f64>>, planes: Option<&[Halfspace]>) -> Result<Self> {
        if points.iter().any(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::Degenerate("non-finite coordinate".into()));
        }
        let diag = bbox_diagonal(&points);
        if points.len() < 4 || !(diag > 0.0) {
            return Err(Error::Degenerate(format!("{} distinct points", points.len())));
        }
        let tol = 1e-9 * diag;
        let points = dedupe(points, tol);
        if points.len() < 4 {
            return Err(Error::Degenerate(format!("{} distinct points", points.len())));
        }
        let raw = hull_facets(&points, tol, diag);
        if raw.len() < 4 {
            return Err(Error::Degenerate("points are coplanar".into()));
        }

        // Vertices are the points lying on at least three facets.
        let mut count = vec![0usize; points.len()];
        for f in &raw {
            for &p in &f.points {
                count[p] += 1;
            }
        }
        let mut keep: Vec<usize> = (0..points.len()).filter(|&p| count[p] >= 3).collect();
        keep.sort_by(|&a, &b| {
            let (pa, pb) = (&points[a], &points[b]);
            pa.x.total_cmp(&pb.x)
                .then(pa.y.total_cmp(&pb.y))
                .then(pa.z.total_cmp(&pb.z))
        });
        let mut index = vec![usize::MAX; points.len()];
        for (new, &old) in keep.iter().enumerate() {
            index[old] = new;
        }
        let vertices: Vec<Point3<f64>> = keep.iter().map(|&i| points[i]).collect();

        let mut facets: Vec<(Vec<usize>, Halfspace)> = Vec::with_capacity(raw.len());
        for f in &raw {
            let ids: Vec<usize> = f
                .points
                .iter()
                .map(|&p| index[p])
                .filter(|&v| v != usize::MAX)
                .collect();
            if ids.len() < 3 {
                return Err(Error::Inconsistent("facet with fewer than three vertices".into()));
            }
            let centroid = ids.iter().map(|&v| vertices[v].coords).sum::<Vector3<f64>>() / ids.len() as f64;
            let e1 = (vertices[ids[0]].coords - centroid).normalize();
            let e2 = f.normal.cross(&e1);
            let mut cycle = ids.clone();
            let ang = |v: usize| {
                let r = vertices[v].coords - centroid;
                r.dot(&e2).atan2(r.dot(&e1))
            };
            cycle.sort_by(|&a, &b| ang(a).total_cmp(&ang(b)));
            let start = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap();
            cycle.rotate_left(start);

            let plane = match planes {
                Some(input) => {
                    let hit = input.iter().find(|h| {
                        h.normal.dot(&f.normal) > 1.0 - 1e-9
                            && ids.iter().all(|&v| h.excess(&vertices[v]).abs() <= tol)
                    });
                    match hit {
                        Some(h) => *h,
                        None => return Err(Error::Degenerate("halfspace intersection is unbounded".into())),
                    }
                }
                None => {
                    // Newell's normal of the ordered cycle.
                    let mut nrm = Vector3::zeros();
                    for i in 0..cycle.len() {
                        let a = vertices[cycle[i]].coords;
                        let b = vertices[cycle[(i + 1) % cycle.len()]].coords;
                        nrm += a.cross(&b);
                    }
                    let nrm = nrm.normalize();
                    let d =
                        cycle.iter().map(|&v| nrm.dot(&vertices[v].coords)).sum::<f64>() / cycle.len() as f64;
                    Halfspace {
                        normal: nrm,
                        offset: d,
                    }
                }
            };
            facets.push((cycle, plane));
        }
        facets.sort_by(|a, b| {
            let mut x = a.0.clone();
            let mut y = b.0.clone();
            x.sort_unstable();
            y.sort_unstable();
            x.cmp(&y)
        });

        let halfspaces: Vec<Halfspace> = facets.iter().map(|f| f.1).collect();
        let facets: Vec<Vec<usize>> = facets.into_iter().map(|f| f.0).collect();
        let mut vertex_facets = vec![Vec::new(); vertices.len()];
        for (fi, f) in facets.iter().enumerate() {
            for &v in f {
                vertex_facets[v].push(fi);
            }
        }
        let mut edge_map: std::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();
        for (fi, f) in facets.iter().enumerate() {
            for i in 0..f.len() {
                let (a, b) = (f[i], f[(i + 1) % f.len()]);
                edge_map.entry((a.min(b), a.max(b))).or_default().push(fi);
            }
        }
        let mut edges = Vec::with_capacity(edge_map.len());
        let mut edge_facets = Vec::with_capacity(edge_map.len());
        for (e, fs) in edge_map {
            if fs.len() != 2 {
                return Err(Error::Inconsistent(format!(
                    "edge {e:?} borders {} facets",
                    fs.len()
                )));
            }
            edges.push(e);
            edge_facets.push([fs[0], fs[1]]);
        }

        let mut diameter = 0.0_f64;
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                diameter = diameter.max((vertices[i] - vertices[j]).norm());
            }
        }
        let (chebyshev_center, inradius) = chebyshev(&halfspaces)?;
        if !(inradius > 1e-6 * diameter) {
            return Err(Error::Degenerate(format!(
                "inradius {inradius:.3e} is negligible against diameter {diameter:.3e}"
            )));
        }
        let poly = Self {
            halfspaces,
            vertices,
            facets,
            vertex_facets,
            edges,
            edge_facets,
            diameter,
            inradius,
            chebyshev_center,
        };
        poly.check_consistency()?;
        Ok(poly)
    }

    fn check_consistency(&self) -> Result<()> {
        let tol = 1e-9 * self.diameter;
        for (v, x) in self.vertices.iter().enumerate() {
            let mut tight = 0;
            for h in &self.halfspaces {
                let e = h.excess(x);
                if e > tol {
                    return Err(Error::Inconsistent(format!(
                        "vertex {v} violates a halfspace by {e:.3e}"
                    )));
                }
                if e.abs() <= tol {
                    tight += 1;
                }
            }
            if tight < 3 {
                return Err(Error::Inconsistent(format!(
                    "vertex {v} has {tight} tight halfspaces"
                )));
            }
        }
        // Euler's formula for a sphere-like boundary.
        let chi = self.vertices.len() as i64 - self.edges.len() as i64 + self.facets.len() as i64;
        if chi != 2 {
            return Err(Error::Inconsistent(format!("Euler characteristic {chi}")));
        }
        Ok(())
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    /// Vertex cycles of the facets.
    pub fn facets(&self) -> &[Vec<usize>] {
        &self.facets
    }

    /// Facets through vertex `v`, in increasing order.
    pub fn vertex_facets(&self, v: usize) -> &[usize] {
        &self.vertex_facets[v]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_facets(&self, e: usize) -> [usize; 2] {
        self.edge_facets[e]
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    /// Center of a largest inscribed ball.
    pub fn chebyshev_center(&self) -> Point3<f64> {
        self.chebyshev_center
    }

    pub fn contains(&self, x: &Point3<f64>, tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.excess(x) <= tol)
    }

    /// Volume, center of mass and second moment about the center of mass.
    pub fn mass_properties(&self) -> (f64, Point3<f64>, Matrix3<f64>) {
        let o = self.chebyshev_center.coords;
        let mut volume = 0.0;
        let mut first = Vector3::zeros();
        let mut second = Matrix3::zeros();
        for f in &self.facets {
            for i in 1..f.len() - 1 {
                let a = self.vertices[f[0]].coords - o;
                let b = self.vertices[f[i]].coords - o;
                let c = self.vertices[f[i + 1]].coords - o;
                let vol = a.dot(&b.cross(&c)) / 6.0;
                volume += vol;
                first += (a + b + c) * (vol / 4.0);
                // Second moment of a tetrahedron with one vertex at the origin.
                let s = a + b + c;
                second += (s * s.transpose() + a * a.transpose() + b * b.transpose() + c * c.transpose())
                    * (vol / 20.0);
            }
        }
        let mean = first / volume;
        let cov = second - mean * mean.transpose() * volume;
        (volume, Point3::from(mean + o), cov)
    }

    /// Returns whether every vertex lies on exactly three facets, with the
    /// vertices that do not.
    pub fn is_simple(&self) -> (bool, Vec<usize>) {
        let bad: Vec<usize> = (0..self.vertices.len())
            .filter(|&v| self.vertex_facets[v].len() != 3)
            .collect();
        (bad.is_empty(), bad)
    }

    /// Orthogonal maps about the center of mass that permute the vertices,
    /// identity first.
    pub fn symmetries(&self) -> Vec<Matrix3<f64>> {
        let (_, c, _) = self.mass_properties();
        let pts: Vec<Vector3<f64>> = self.vertices.iter().map(|v| v - c).collect();
        let tol = 1e-7 * self.diameter;
        let a = 0;
        let Some(b) =
            (1..pts.len()).find(|&b| pts[a].cross(&pts[b]).norm() > 1e-3 * pts[a].norm() * pts[b].norm())
        else {
            return vec![Matrix3::identity()];
        };
        let frame = |p: &Vector3<f64>, q: &Vector3<f64>| {
            let x = p.normalize();
            let y = (q - x * x.dot(q)).normalize();
            Matrix3::from_columns(&[x, y, x.cross(&y)])
        };
        let src = frame(&pts[a], &pts[b]);
        let mut out = vec![Matrix3::identity()];
        for a2 in 0..pts.len() {
            if (pts[a2].norm() - pts[a].norm()).abs() > tol {
                continue;
            }
            for b2 in 0..pts.len() {
                if b2 == a2
                    || (pts[b2].norm() - pts[b].norm()).abs() > tol
                    || ((pts[a2] - pts[b2]).norm() - (pts[a] - pts[b]).norm()).abs() > tol
                {
                    continue;
                }
                let dst = frame(&pts[a2], &pts[b2]);
                for sign in [1.0, -1.0] {
                    let q = dst * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, sign)) * src.transpose();
                    let maps = pts.iter().all(|p| pts.iter().any(|r| (q * p - r).norm() <= tol));
                    if maps && out.iter().all(|m| (m - q).norm() > 1e-9) {
                        out.push(q);
                    }
                }
            }
        }
        out
    }

    /// Vertices adjacent to `v` along edges.
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// The cone of `P` at vertex `v`, its edges ordered around the vertex.
    pub fn solid_angle_at(&self, v: usize) -> Result<SolidAngle> {
        let apex = self.vertices[v];
        let axis: Vector3<f64> = -self.vertex_facets[v]
            .iter()
            .map(|&f| self.halfspaces[f].normal)
            .sum::<Vector3<f64>>()
            .normalize();
        let e1 = axis
            .cross(&Vector3::x())
            .try_normalize(1e-6)
            .unwrap_or_else(|| axis.cross(&Vector3::y()).normalize());
        let e2 = axis.cross(&e1);
        let mut dirs: Vec<Vector3<f64>> = self
            .neighbours(v)
            .into_iter()
            .map(|u| (self.vertices[u] - apex).normalize())
            .collect();
        dirs.sort_by(|a, b| {
            a.dot(&e2)
                .atan2(a.dot(&e1))
                .total_cmp(&b.dot(&e2).atan2(b.dot(&e1)))
        });
        SolidAngle::new(apex, dirs)
    }

    /// Euclidean projection onto `P`.
    pub fn project(&self, x: &Point3<f64>) -> Point3<f64> {
        project(&self.halfspaces, &self.chebyshev_center, x, self.diameter)
            .unwrap_or_else(|| self.project_by_faces(x))
    }

    /// Exhaustive projection over facets, edges and vertices.
    pub fn project_by_faces(&self, x: &Point3<f64>) -> Point3<f64> {
        let tol = 1e-12 * self.diameter;
        if self.contains(x, 0.0) {
            return *x;
        }
        let mut best = self.vertices[0];
        let mut best_d = (x - best).norm();
        let mut consider = |y: Point3<f64>| {
            let d = (x - y).norm();
            if d < best_d {
                best_d = d;
                best = y;
            }
        };
        for (f, h) in self.halfspaces.iter().enumerate() {
            let foot = x - h.normal * h.excess(x);
            let cyc = &self.facets[f];
            let inside = (0..cyc.len()).all(|i| {
                let a = self.vertices[cyc[i]];
                let b = self.vertices[cyc[(i + 1) % cyc.len()]];
                (b - a).cross(&(foot - a)).dot(&h.normal) >= -tol * (b - a).norm()
            });
            if inside {
                consider(foot);
            }
        }
        for &(a, b) in &self.edges {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let t = ((x - pa).dot(&(pb - pa)) / (pb - pa).norm_squared()).clamp(0.0, 1.0);
            consider(pa + (pb - pa) * t);
        }
        for v in &self.vertices {
            consider(*v);
        }
        best
    }

    /// Signed distance to the boundary, negative inside, with a gradient.
    /// Inside, ties between nearest facets average their normals.
    pub fn signed_distance(&self, x: &Point3<f64>) -> (f64, Vector3<f64>) {
        signed_distance(&self.halfspaces, x, self.diameter, || self.project(x))
    }

    /// Unsigned distance to the boundary and the lowest-dimensional feature
    /// containing the nearest boundary point; ties go to the lowest index.
    pub fn distance_to_boundary(&self, x: &Point3<f64>) -> (f64, Feature) {
        let tol = 1e-9 * self.diameter;
        if self.contains(x, 0.0) {
            let mut best = (f64::INFINITY, 0);
            for (i, h) in self.halfspaces.iter().enumerate() {
                let d = -h.excess(x);
                if d < best.0 {
                    best = (d, i);
                }
            }
            return (best.0.max(0.0), Feature::Facet(best.1));
        }
        let y = self.project(x);
        let d = (x - y).norm();
        if let Some(v) = self.vertices.iter().position(|v| (v - y).norm() <= tol) {
            return (d, Feature::Vertex(v));
        }
        let on_edge = self.edges.iter().position(|&(a, b)| {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            (pb - pa).cross(&(y - pa)).norm() <= tol * (pb - pa).norm()
                && (y - pa).dot(&(pb - pa)) >= 0.0
                && (y - pb).dot(&(pa - pb)) >= 0.0
        });
        if let Some(e) = on_edge {
            return (d, Feature::Edge(e));
        }
        let f = (0..self.halfspaces.len())
            .min_by(|&a, &b| {
                self.halfspaces[a]
                    .excess(&y)
                    .abs()
                    .total_cmp(&self.halfspaces[b].excess(&y).abs())
            })
            .unwrap();
        (d, Feature::Facet(f))
    }
}

/// Primal active-set projection of `x` onto `{n_i . y <= d_i}`, started at
/// the interior point `start`. `None` if it fails to settle.
fn project(
    halfspaces: &[Halfspace],
    start: &Point3<f64>,
    x: &Point3<f64>,
    scale: f64,
) -> Option<Point3<f64>> {
    if halfspaces.iter().all(|h| h.excess(x) <= 0.0) {
        return Some(*x);
    }
    let tiny = 1e-15 * scale.max(x.coords.norm());
    let mut y = *start;
    let mut work: Vec<usize> = Vec::with_capacity(3);
    for _ in 0..100 {
        let g = x - y;
        let a: Vec<Vector3<f64>> = work.iter().map(|&i| halfspaces[i].normal).collect();
        // Step to the minimizer on the current face and the face multipliers.
        let (p, lambda) = match a.len() {
            0 => (g, vec![]),
            _ => {
                let k = a.len();
                let gram = nalgebra::DMatrix::from_fn(k, k, |r, c| a[r].dot(&a[c]));
                let rhs = nalgebra::DVector::from_fn(k, |r, _| a[r].dot(&g));
                let lam = gram.lu().solve(&rhs)?;
                let mut p = g;
                for r in 0..k {
                    p -= a[r] * lam[r];
                }
                (p, lam.iter().cloned().collect())
            }
        };
        if p.norm() <= tiny || work.len() == 3 {
            match lambda
                .iter()
                .enumerate()
                .filter(|(_, &l)| l < 0.0)
                .min_by(|a, b| a.1.total_cmp(b.1))
            {
                None => return Some(y),
                Some((r, _)) => {
                    work.remove(r);
                    continue;
                }
            }
        }
        let mut alpha = 1.0;
        let mut block = None;
        for (i, h) in halfspaces.iter().enumerate() {
            if work.contains(&i) {
                continue;
            }
            let rate = h.normal.dot(&p);
            if rate > 1e-15 * p.norm() {
                let t = (h.offset - h.normal.dot(&y.coords)) / rate;
                if t < alpha {
                    alpha = t.max(0.0);
                    block = Some(i);
                }
            }
        }
        y += p * alpha;
        if let Some(i) = block {
            work.push(i);
        }
    }
    None
}

fn signed_distance(
    halfspaces: &[Halfspace],
    x: &Point3<f64>,
    scale: f64,
    project: impl FnOnce() -> Point3<f64>,
) -> (f64, Vector3<f64>) {
    let worst = halfspaces
        .iter()
        .map(|h| h.excess(x))
        .fold(f64::NEG_INFINITY, f64::max);
    if worst <= 0.0 {
        let band = 1e-12 * scale;
        let mut g = Vector3::zeros();
        for h in halfspaces {
            if h.excess(x) >= worst - band {
                g += h.normal;
            }
        }
        let k = halfspaces.iter().filter(|h| h.excess(x) >= worst - band).count();
        return (worst, g / k as f64);
    }
    let y = project();
    let r = x - y;
    let d = r.norm();
    if d == 0.0 {
        return (0.0, Vector3::zeros());
    }
    (d, r / d)
}

/// `P_eps`: the union of all `eps`-balls contained in `P`.
#[derive(Debug, Clone)]
pub struct SmoothedBody {
    base: ConvexPolytope,
    epsilon: f64,
    inner: ConvexPolytope,
}

impl SmoothedBody {
    pub fn new(base: ConvexPolytope, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < base.inradius) {
            return Err(Error::EpsilonOutOfRange {
                epsilon,
                inradius: base.inradius,
            });
        }
        let shifted = base
            .halfspaces
            .iter()
            .map(|h| Halfspace {
                normal: h.normal,
                offset: h.offset - epsilon,
            })
            .collect();
        let inner = ConvexPolytope::from_halfspaces(shifted)?;
        Ok(Self { base, epsilon, inner })
    }

    pub fn base(&self) -> &ConvexPolytope {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The inner parallel body, `P` with every facet moved in by `eps`.
    pub fn inner_body(&self) -> &ConvexPolytope {
        &self.inner
    }

    /// `dist(x, inner) - eps` and its gradient. Constant `-eps` with zero
    /// gradient inside the inner body.
    pub fn signed_distance_smoothed(&self, x: &Point3<f64>) -> (f64, Vector3<f64>) {
        if self.inner.contains(x, 0.0) {
            return (-self.epsilon, Vector3::zeros());
        }
        let y = self.inner.project(x);
        let r = x - y;
        let d = r.norm();
        if d == 0.0 {
            return (-self.epsilon, Vector3::zeros());
        }
        (d - self.epsilon, r / d)
    }

    /// Signed distance to the boundary of `P_eps`. Agrees with
    /// [`signed_distance_smoothed`](Self::signed_distance_smoothed) outside the
    /// inner body and keeps decreasing with depth inside it.
    pub fn boundary_distance(&self, x: &Point3<f64>) -> (f64, Vector3<f64>) {
        let (d, g) = self.inner.signed_distance(x);
        (d - self.epsilon, g)
    }

    pub fn contains(&self, x: &Point3<f64>) -> bool {
        self.signed_distance_smoothed(x).0 <= 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub(crate) fn cube() -> ConvexPolytope {
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

    fn tetrahedron() -> ConvexPolytope {
        ConvexPolytope::from_vertices(vec![
            Point3::new(1.0, 1.0, 1.0),
            Point3::new(1.0, -1.0, -1.0),
            Point3::new(-1.0, 1.0, -1.0),
            Point3::new(-1.0, -1.0, 1.0),
        ])
        .unwrap()
    }

    fn pyramid() -> ConvexPolytope {
        ConvexPolytope::from_vertices(vec![
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(-1.0, 1.0, 0.0),
            Point3::new(-1.0, -1.0, 0.0),
            Point3::new(1.0, -1.0, 0.0),
            Point3::new(0.0, 0.0, 1.5),
        ])
        .unwrap()
    }

    #[test]
    fn cube_from_halfspaces() {
        let c = cube();
        assert_eq!(c.vertices().len(), 8);
        assert_eq!(c.facets().len(), 6);
        assert_eq!(c.edges().len(), 12);
        for v in 0..8 {
            assert_eq!(c.vertex_facets(v).len(), 3);
        }
        assert_eq!(c.vertices()[0], Point3::new(-1.0, -1.0, -1.0));
        assert_abs_diff_eq!(c.inradius(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.diameter(), 2.0 * 3f64.sqrt(), epsilon = 1e-12);
        assert!(c.is_simple().0);
    }

    #[test]
    fn tetrahedron_from_points() {
        let t = tetrahedron();
        assert_eq!(t.facets().len(), 4);
        assert_eq!(t.edges().len(), 6);
        assert!(t.is_simple().0);
    }

    #[test]
    fn interior_point_is_dropped() {
        let mut pts: Vec<Point3<f64>> = tetrahedron().vertices().to_vec();
        pts.push(Point3::new(0.1, 0.0, -0.1));
        let t = ConvexPolytope::from_vertices(pts).unwrap();
        assert_eq!(t.vertices().len(), 4);
    }

    #[test]
    fn redundant_and_unbounded_halfspaces() {
        let mut hs: Vec<Halfspace> = cube().halfspaces().to_vec();
        hs.push(Halfspace {
            normal: Vector3::new(1.0, 1.0, 1.0).normalize(),
            offset: 10.0,
        });
        let c = ConvexPolytope::from_halfspaces(hs.clone()).unwrap();
        assert_eq!(c.facets().len(), 6);
        hs.truncate(5);
        assert!(matches!(
            ConvexPolytope::from_halfspaces(hs),
            Err(Error::Degenerate(_))
        ));
        let flat = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
        ];
        assert!(matches!(
            ConvexPolytope::from_vertices(flat),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn simplicity() {
        let (simple, bad) = pyramid().is_simple();
        assert!(!simple);
        let apex = pyramid().vertices().iter().position(|v| v.z > 1.0).unwrap();
        assert_eq!(bad, vec![apex]);
        let oct = ConvexPolytope::from_vertices(vec![
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, -1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(0.0, 0.0, -1.0),
        ])
        .unwrap();
        let (simple, bad) = oct.is_simple();
        assert!(!simple);
        assert_eq!(bad.len(), 6);
    }

    #[test]
    fn solid_angles_at_vertices() {
        let c = cube();
        let a = c.solid_angle_at(7).unwrap();
        for e in a.edges() {
            assert_abs_diff_eq!(e.abs().max(), 1.0, epsilon = 1e-15);
        }
        for f in a.facet_angles() {
            assert_abs_diff_eq!(f, std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        }
        let t = tetrahedron();
        for f in t.solid_angle_at(0).unwrap().facet_angles() {
            assert_abs_diff_eq!(f, std::f64::consts::FRAC_PI_3, epsilon = 1e-12);
        }
        let p = pyramid();
        let apex = p.vertices().iter().position(|v| v.z > 1.0).unwrap();
        assert_eq!(p.solid_angle_at(apex).unwrap().len(), 4);
    }

    #[test]
    fn smoothed_cube_examples() {
        let s = SmoothedBody::new(cube(), 0.1).unwrap();
        assert_abs_diff_eq!(
            s.signed_distance_smoothed(&Point3::origin()).0,
            -0.1,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            s.signed_distance_smoothed(&Point3::new(1.0, 0.0, 0.0)).0,
            0.0,
            epsilon = 1e-15
        );
        let (d, g) = s.signed_distance_smoothed(&Point3::new(1.0, 1.0, 1.0));
        assert_abs_diff_eq!(d, 0.1 * 3f64.sqrt() - 0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(g, Vector3::repeat(1.0 / 3f64.sqrt()), epsilon = 1e-14);
        assert!(matches!(
            SmoothedBody::new(cube(), 1.0),
            Err(Error::EpsilonOutOfRange { .. })
        ));
    }

    #[test]
    fn boundary_distance_examples() {
        let c = cube();
        assert_eq!(
            c.distance_to_boundary(&Point3::origin()),
            (1.0, Feature::Facet(0))
        );
        let (d, f) = c.distance_to_boundary(&Point3::new(1.0, 0.0, 0.0));
        assert_eq!(d, 0.0);
        assert_eq!(
            c.halfspaces()[match f {
                Feature::Facet(i) => i,
                _ => panic!("{f:?}"),
            }]
            .normal,
            Vector3::x()
        );
        let (d, f) = c.distance_to_boundary(&Point3::new(2.0, 2.0, 2.0));
        assert_abs_diff_eq!(d, 3f64.sqrt(), epsilon = 1e-14);
        assert_eq!(f, Feature::Vertex(7));
    }

    #[test]
    fn active_set_matches_face_enumeration() {
        let t = tetrahedron();
        let mut state = 12345u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 8.0 - 4.0
        };
        for _ in 0..2000 {
            let x = Point3::new(next(), next(), next());
            let a = project(t.halfspaces(), &t.chebyshev_center(), &x, t.diameter()).unwrap();
            let b = t.project_by_faces(&x);
            assert!((a - b).norm() < 1e-12, "{x:?}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn symmetry_groups() {
        assert_eq!(cube().symmetries().len(), 48);
        assert_eq!(tetrahedron().symmetries().len(), 24);
        assert_eq!(pyramid().symmetries().len(), 8);
    }

    #[test]
    fn mass_properties_of_cube() {
        let (v, c, m) = cube().mass_properties();
        assert_abs_diff_eq!(v, 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.coords.norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m, Matrix3::identity() * (8.0 / 3.0), epsilon = 1e-12);
    }
}
