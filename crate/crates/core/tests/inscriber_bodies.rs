mod common;

use nalgebra::Point3;
use octa::angles::{classify_trihedral, construct_inscribed_octahedron, SolidAngle, Tag};
use octa::inscriber::{certify, continue_to_surface, multistart, SolveConfig};
use octa::octahedron::OctahedronPose;
use octa::polytope::{ConvexPolytope, SmoothedBody};
use octa::sphere::SphTriangle;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn hausdorff(a: &[Point3<f64>], b: &[Point3<f64>]) -> f64 {
    let one = |a: &[Point3<f64>], b: &[Point3<f64>]| {
        a.iter()
            .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

#[test]
fn tetrahedron_gives_the_edge_midpoint_octahedron() {
    let tet = common::tetrahedron();
    let ins = continue_to_surface(&tet, &SolveConfig::default()).unwrap();
    assert!(ins.certification.certified);
    assert!(ins.certification.max_distance <= 1e-8);
    let v = tet.vertices();
    let mids: Vec<Point3<f64>> = tet
        .edges()
        .iter()
        .map(|&(i, j)| nalgebra::center(&v[i], &v[j]))
        .collect();
    assert!(hausdorff(&ins.report.pose.vertices(), &mids) <= 1e-7);
}

#[test]
fn cube_gives_the_face_center_octahedron() {
    let cube = common::cube();
    let ins = continue_to_surface(&cube, &SolveConfig::default()).unwrap();
    assert!(ins.certification.max_distance <= 1e-8);
    let want = OctahedronPose::identity(Point3::origin(), 1.0).vertices();
    assert!(hausdorff(&ins.report.pose.vertices(), &want) <= 1e-7);
}

#[test]
fn random_simple_polytopes_are_inscribed() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..4 {
        let p = common::random_simple_polytope(&mut rng);
        let ins = continue_to_surface(&p, &SolveConfig::default()).unwrap();
        assert!(ins.certification.certified);
        assert!(ins.certification.max_distance <= 1e-7 * p.diameter());
        assert!(ins.warnings.is_empty());
        // A converged report certifies at twice its own residual.
        let again = certify(&p, &ins.report.pose, 2.0 * ins.report.max_residual());
        assert!(
            again.certified,
            "{} vs {}",
            again.max_distance,
            ins.report.max_residual()
        );
    }
}

#[test]
fn identical_inputs_give_identical_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let p = common::random_simple_polytope(&mut rng);
    let cfg = SolveConfig {
        seed: 9,
        ..SolveConfig::default()
    };
    let a = continue_to_surface(&p, &cfg).unwrap();
    let b = continue_to_surface(&p, &cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn cube_multistart_reports_each_octahedron_once() {
    let cube = common::cube();
    let body = SmoothedBody::new(cube.clone(), 0.1).unwrap();
    let found = multistart(
        &body,
        &SolveConfig {
            rotations: 12,
            scales: 2,
            ..SolveConfig::default()
        },
    )
    .unwrap();
    let syms = cube.symmetries();
    assert_eq!(syms.len(), 48);
    let tol = 1e-6 * cube.diameter();
    for (i, a) in found.iter().enumerate() {
        for b in &found[..i] {
            for g in &syms {
                let moved: Vec<Point3<f64>> = a
                    .pose
                    .vertices()
                    .iter()
                    .map(|x| Point3::from(g * x.coords))
                    .collect();
                assert!(hausdorff(&moved, &b.pose.vertices()) >= tol);
            }
        }
    }
}

/// A tall pyramid over a triangle: a special apex and wide base angles.
fn sharp_pyramid() -> (ConvexPolytope, SolidAngle) {
    let tri = SphTriangle::from_sides(0.3, 0.3, 0.3).unwrap();
    let angle = SolidAngle::from_triangle(Point3::origin(), &tri);
    let mut pts = vec![Point3::origin()];
    pts.extend(angle.edges().iter().map(|e| Point3::from(e * 10.0)));
    (ConvexPolytope::from_vertices(pts).unwrap(), angle)
}

#[test]
fn octahedron_in_the_sharp_corner_is_inscribed_in_the_pyramid() {
    let (p, angle) = sharp_pyramid();
    let class = classify_trihedral(&angle, 1e-9).unwrap();
    assert_eq!(class.tag, Tag::Special);
    let pose = construct_inscribed_octahedron(&angle, class.certificate.as_ref().unwrap(), 0.5).unwrap();
    let c = certify(&p, &pose, 1e-9 * p.diameter());
    assert!(c.certified, "{}", c.max_distance);
}

#[test]
fn continuation_keeps_its_size_near_a_special_corner() {
    let (p, _) = sharp_pyramid();
    let ins = continue_to_surface(&p, &SolveConfig::default()).unwrap();
    assert!(ins.certification.certified);
    let smallest = ins
        .trace
        .diameter_history
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    assert!(smallest > 1e-3 * p.diameter(), "{smallest}");
}

#[test]
fn square_pyramid_runs_with_a_warning() {
    let mut pts: Vec<Point3<f64>> = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .iter()
        .map(|&(x, y)| Point3::new(x, y, 0.0))
        .collect();
    pts.push(Point3::new(0.0, 0.0, 6.0));
    let p = ConvexPolytope::from_vertices(pts).unwrap();
    assert!(!p.is_simple().0);
    let apex = (0..5).find(|&i| p.vertices()[i].z > 1.0).unwrap();
    let ins = continue_to_surface(&p, &SolveConfig::default()).unwrap();
    assert!(
        ins.warnings.iter().any(|w| w.contains(&format!("vertex {apex}"))),
        "{:?}",
        ins.warnings
    );
    assert!(ins.certification.certified);
}
