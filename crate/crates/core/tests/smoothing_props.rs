mod common;

use nalgebra::{Point3, Vector3};
use octa::oracle::{inner_distance, membership_oracle};
use octa::polytope::{ConvexPolytope, SmoothedBody};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bodies() -> Vec<ConvexPolytope> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    vec![
        common::cube(),
        common::tetrahedron(),
        common::random_simple_polytope(&mut rng),
        common::random_simple_polytope(&mut rng),
    ]
}

fn box_point(p: &ConvexPolytope, rng: &mut impl Rng) -> Point3<f64> {
    let c = p.chebyshev_center();
    let h = p.diameter();
    c + Vector3::new(rng.gen_range(-h..h), rng.gen_range(-h..h), rng.gen_range(-h..h))
}

#[test]
fn smoothed_sign_matches_the_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in bodies() {
        let eps = 0.2 * p.inradius();
        let body = SmoothedBody::new(p.clone(), eps).unwrap();
        for _ in 0..20_000 {
            let x = box_point(&p, &mut rng);
            let r = body.signed_distance_smoothed(&x).0;
            if r.abs() < 1e-9 {
                continue;
            }
            assert_eq!(r <= 0.0, membership_oracle(&p, eps, &x), "{x:?} r = {r}");
            let d = inner_distance(&p, eps, &x);
            assert!((r.max(-eps) - (d - eps)).abs() <= 1e-9, "{r} vs {}", d - eps);
        }
    }
}

#[test]
fn smoothed_body_lies_between_inner_body_and_polytope() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for p in bodies() {
        let eps = 0.2 * p.inradius();
        let body = SmoothedBody::new(p.clone(), eps).unwrap();
        for v in body.inner_body().vertices() {
            assert!(body.contains(v));
        }
        let c = p.chebyshev_center();
        for _ in 0..2_500 {
            let dir = common::random_unit(&mut rng);
            let (mut lo, mut hi) = (0.0, p.diameter());
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if body.contains(&(c + dir * mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let x = c + dir * lo;
            for h in p.halfspaces() {
                assert!(h.excess(&x) <= 1e-9, "{}", h.excess(&x));
            }
        }
    }
}

#[test]
fn smoothed_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in bodies() {
        let body = SmoothedBody::new(p.clone(), 0.2 * p.inradius()).unwrap();
        let h = 1e-6 * p.diameter();
        let mut checked = 0;
        while checked < 250 {
            let x = box_point(&p, &mut rng);
            if body.inner_body().signed_distance(&x).0 < 1e-3 * p.diameter() {
                continue;
            }
            checked += 1;
            let (_, g) = body.signed_distance_smoothed(&x);
            for k in 0..3 {
                let mut e = Vector3::zeros();
                e[k] = h;
                let fd = (body.signed_distance_smoothed(&(x + e)).0
                    - body.signed_distance_smoothed(&(x - e)).0)
                    / (2.0 * h);
                assert!((fd - g[k]).abs() <= 1e-5 * g.norm(), "{fd} vs {}", g[k]);
            }
        }
    }
}

#[test]
fn larger_radius_gives_smaller_body() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for p in bodies() {
        let (e1, e2) = (0.1 * p.inradius(), 0.4 * p.inradius());
        let b1 = SmoothedBody::new(p.clone(), e1).unwrap();
        let b2 = SmoothedBody::new(p.clone(), e2).unwrap();
        for _ in 0..5_000 {
            let x = box_point(&p, &mut rng);
            let (r1, r2) = (
                b1.signed_distance_smoothed(&x).0,
                b2.signed_distance_smoothed(&x).0,
            );
            assert!(r2 >= r1 - (e2 - e1) - 1e-12);
            if b2.contains(&x) {
                assert!(b1.contains(&x));
            }
        }
    }
}
