mod common;

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};

use nalgebra::{Point3, Quaternion, UnitQuaternion};
use octa::angles::{
    classify_trihedral, construct_inscribed_octahedron, deformation_path, fits_in_t0, normalize_ordering,
    placement_test, FitVerdict, SolidAngle, Tag,
};
use octa::oracle::{direct_angle_search, OracleConfig};
use octa::sphere::SphTriangle;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn triangle(lo: f64, hi: f64) -> impl Strategy<Value = SphTriangle> {
    (prop::array::uniform3(lo..hi), prop::array::uniform4(-1.0f64..1.0)).prop_filter_map(
        "invalid",
        |(s, q)| {
            let q = Quaternion::new(q[0], q[1], q[2], q[3]);
            if q.norm() < 0.1 {
                return None;
            }
            let r = UnitQuaternion::from_quaternion(q).to_rotation_matrix();
            SphTriangle::from_sides(s[0], s[1], s[2])
                .ok()?
                .transformed(r.matrix())
                .ok()
        },
    )
}

fn relabelings(t: &SphTriangle) -> Vec<SphTriangle> {
    let v = *t.vertices();
    let mut out = Vec::new();
    for p in [[0, 1, 2], [1, 2, 0], [2, 0, 1], [0, 2, 1], [2, 1, 0], [1, 0, 2]] {
        out.push(SphTriangle::new(v[p[0]], v[p[1]], v[p[2]]).unwrap());
    }
    out.push(t.mirrored());
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn placement_is_a_congruence_invariant(t in triangle(0.05, 1.4)) {
        let base = placement_test(&t, TOL);
        for r in relabelings(&t) {
            let c = placement_test(&r, TOL);
            prop_assert!((c.margin - base.margin).abs() <= 1e-12, "{} vs {}", c.margin, base.margin);
            if base.margin.abs() > 2.0 * TOL {
                prop_assert_eq!(c.tag, base.tag);
            }
        }
    }

    #[test]
    fn normalize_ordering_keeps_the_outcome(t in triangle(0.05, 1.4)) {
        let n = normalize_ordering(&t).unwrap();
        let [a, b, c] = [n.side(0, 1), n.side(0, 2), n.side(1, 2)];
        prop_assert!(a >= b && b >= c);
        prop_assert!((n.area() - t.area()).abs() <= 1e-12);
        prop_assert!((placement_test(&n, TOL).margin - placement_test(&t, TOL).margin).abs() <= 1e-12);
    }

    #[test]
    fn small_triangles_are_special(t in triangle(1e-3, FRAC_PI_6 - 1e-3)) {
        prop_assert_eq!(placement_test(&t, TOL).tag, Tag::Special);
    }

    #[test]
    fn triangles_with_a_long_side_are_not_special(t in triangle(0.05, 2.0)) {
        prop_assume!(t.max_side() > FRAC_PI_3 + 1e-3);
        prop_assert_eq!(placement_test(&t, TOL).tag, Tag::NonSpecial);
    }

    #[test]
    fn constructed_octahedra_lie_on_the_cone(t in triangle(0.02, 1.0), scale in 0.01f64..100.0) {
        let angle = SolidAngle::from_triangle(Point3::new(0.3, -2.0, 1.0), &t);
        let class = classify_trihedral(&angle, TOL).unwrap();
        prop_assume!(class.tag == Tag::Special);
        let pose = construct_inscribed_octahedron(&angle, class.certificate.as_ref().unwrap(), scale).unwrap();
        prop_assert!(pose.regularity_error() <= 1e-12 * scale);
        for v in pose.vertices() {
            let d = angle.facet_distances(&v);
            let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!(lo.abs() <= 1e-8 * scale, "vertex off the boundary by {lo}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn deformation_paths_stay_non_special(t in triangle(0.6, FRAC_PI_3)) {
        let c = placement_test(&t, TOL);
        prop_assume!(c.tag == Tag::NonSpecial);
        let path = deformation_path(&t, 50, TOL).unwrap();
        prop_assert!(path.len() >= 50);
        for s in &path {
            prop_assert_eq!(placement_test(s, TOL).tag, Tag::NonSpecial);
        }
        prop_assert!(path.last().unwrap().max_side() > FRAC_PI_3 + 0.01);
    }
}

#[test]
fn oracle_agrees_with_classification() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut n, mut agree) = (0, 0);
    while n < 150 {
        let t = common::random_triangle(&mut rng, 0.05, 1.4);
        let angle = SolidAngle::from_triangle(Point3::origin(), &t);
        let c = classify_trihedral(&angle, TOL).unwrap();
        if c.margin.abs() < 1e-6 {
            continue;
        }
        n += 1;
        let found = !direct_angle_search(&angle, &OracleConfig::default())
            .unwrap()
            .poses
            .is_empty();
        if found == (c.tag == Tag::Special) {
            agree += 1;
        }
    }
    assert!(agree * 100 >= 99 * n, "{agree}/{n}");
}

#[test]
fn inscribed_non_simple_angles_fit_in_t0() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut n = 0;
    while n < 10 {
        let Some((cone, _)) = common::perturbed_special_cone(&mut rng) else {
            continue;
        };
        let search = direct_angle_search(
            &cone,
            &OracleConfig {
                seeds_per_assignment: 10,
                ..Default::default()
            },
        )
        .unwrap();
        if search.poses.is_empty() {
            continue;
        }
        n += 1;
        let fit = fits_in_t0(&cone.spherical_polygon(), TOL);
        assert_ne!(fit.verdict, FitVerdict::NoFit, "margin {}", fit.margin);
    }
}
