use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use octa::sphere::{arc_distance, point_on_arc, SphTriangle, SpherePoint};
use proptest::prelude::*;
use std::f64::consts::PI;

fn point() -> impl Strategy<Value = SpherePoint> {
    prop::array::uniform3(-1.0f64..1.0).prop_filter_map("near zero", |v| {
        SpherePoint::new(Vector3::from(v))
            .ok()
            .filter(|_| Vector3::from(v).norm() > 1e-3)
    })
}

fn rotation() -> impl Strategy<Value = Matrix3<f64>> {
    prop::array::uniform4(-1.0f64..1.0).prop_filter_map("near zero", |q| {
        let q = Quaternion::new(q[0], q[1], q[2], q[3]);
        (q.norm() > 1e-3).then(|| *UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix())
    })
}

fn triangle() -> impl Strategy<Value = SphTriangle> {
    (point(), point(), point()).prop_filter_map("degenerate", |(a, b, c)| SphTriangle::new(a, b, c).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn arc_distance_triangle_inequality(a in point(), b in point(), c in point()) {
        prop_assert!(arc_distance(&a, &c) <= arc_distance(&a, &b) + arc_distance(&b, &c) + 1e-12);
    }

    #[test]
    fn girard_matches_lhuilier(t in triangle()) {
        prop_assert!((t.girard_area() - t.area()).abs() <= 1e-10, "{} vs {}", t.girard_area(), t.area());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn area_bounds_and_rotation_invariance(t in triangle(), r in rotation()) {
        let a = t.area();
        prop_assert!(a > 0.0 && a < 2.0 * PI);
        let rt = t.transformed(&r).unwrap();
        prop_assert!((rt.area() - a).abs() <= 1e-12);
    }

    #[test]
    fn containment_is_rotation_equivariant(t in triangle(), p in point(), r in rotation()) {
        let rt = t.transformed(&r).unwrap();
        prop_assert_eq!(rt.contains(&p.transformed(&r), 1e-12), t.contains(&p, 1e-12));
    }

    #[test]
    fn point_on_arc_stays_on_the_great_circle(a in point(), b in point(), s in 0.0f64..1.0) {
        prop_assume!(arc_distance(&a, &b) > 1e-6 && arc_distance(&a, &b) < PI - 1e-6);
        let p = point_on_arc(&a, &b, arc_distance(&a, &b) * s).unwrap();
        let det = Matrix3::from_columns(&[*a.vector(), *p.vector(), *b.vector()]).determinant();
        prop_assert!(det.abs() <= 1e-12);
        prop_assert!((arc_distance(&a, &p) - arc_distance(&a, &b) * s).abs() <= 1e-12);
    }
}
