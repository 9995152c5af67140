use proptest::prelude::*;
use riemann_ssn::geometry::{distance, exp_map, log_map, parallel_transport};
use riemann_ssn::{ManifoldKind, Point, Tangent};

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn sphere_point(n: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-1.0f64..1.0, n + 1)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(move |v| Point::normalized(ManifoldKind::Sphere(n), v).unwrap())
}

/// Point and tangent vector of norm at most `max_len`.
fn point_and_tangent(max_len: f64) -> impl Strategy<Value = (Point, Tangent)> {
    (1usize..5).prop_flat_map(move |n| {
        (
            sphere_point(n),
            prop::collection::vec(-1.0f64..1.0, n + 1),
            0.0..max_len,
        )
            .prop_map(|(p, g, len)| {
                let v = p.project(&g).unwrap();
                let nv = v.norm();
                let v = if nv > 1e-8 {
                    v.scale(len / nv)
                } else {
                    p.zero_tangent()
                };
                (p, v)
            })
    })
}

fn pair(max_dist: f64) -> impl Strategy<Value = (Point, Point, Tangent)> {
    (
        point_and_tangent(max_dist),
        prop::collection::vec(-2.0f64..2.0, 5),
    )
        .prop_map(|((p, v), w)| {
            let q = exp_map(&p, &v).unwrap();
            let u = p.project(&w[..p.coords().len()]).unwrap();
            (p, q, u)
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn log_inverts_exp((p, v) in point_and_tangent(3.0)) {
        let q = exp_map(&p, &v).unwrap();
        let back = log_map(&p, &q).unwrap();
        prop_assert!(close(back.comps(), v.comps(), 1e-9), "{:?} vs {:?}", back, v);
        prop_assert!((distance(&p, &q).unwrap() - v.norm()).abs() <= 1e-10);
    }

    #[test]
    fn exp_inverts_log((p, q, _u) in pair(3.1)) {
        let l = log_map(&p, &q).unwrap();
        prop_assert!(l.inner(&l).unwrap() >= 0.0);
        prop_assert!(close(exp_map(&p, &l).unwrap().coords(), q.coords(), 1e-10));
        let normal: f64 = l.comps().iter().zip(p.coords()).map(|(a, b)| a * b).sum();
        prop_assert!(normal.abs() <= 1e-12);
    }

    #[test]
    fn geodesics_have_constant_speed((p, v) in point_and_tangent(3.0), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let a = exp_map(&p, &v.scale(s)).unwrap();
        let b = exp_map(&p, &v.scale(t)).unwrap();
        prop_assert!((distance(&a, &b).unwrap() - (s - t).abs() * v.norm()).abs() <= 1e-10);
    }

    #[test]
    fn transport_is_an_isometry((p, q, u) in pair(3.0), w in prop::collection::vec(-2.0f64..2.0, 5)) {
        let v = p.project(&w[..p.coords().len()]).unwrap();
        let pu = parallel_transport(&p, &q, &u).unwrap();
        let pv = parallel_transport(&p, &q, &v).unwrap();
        prop_assert_eq!(pu.base(), &q);
        prop_assert!((pu.norm() - u.norm()).abs() <= 1e-12);
        prop_assert!((pu.inner(&pv).unwrap() - u.inner(&v).unwrap()).abs() <= 1e-12);
        let back = parallel_transport(&q, &p, &pu).unwrap();
        prop_assert!(close(back.comps(), u.comps(), 1e-12));
    }

    #[test]
    fn transport_composes_along_a_geodesic((p, v) in point_and_tangent(3.0), s in 0.0f64..1.0, w in prop::collection::vec(-2.0f64..2.0, 5)) {
        let q = exp_map(&p, &v).unwrap();
        let m = exp_map(&p, &v.scale(s)).unwrap();
        let u = p.project(&w[..p.coords().len()]).unwrap();
        let direct = parallel_transport(&p, &q, &u).unwrap();
        let via = parallel_transport(&m, &q, &parallel_transport(&p, &m, &u).unwrap()).unwrap();
        prop_assert!(close(direct.comps(), via.comps(), 1e-10));
    }

    #[test]
    fn transport_carries_the_velocity((p, v) in point_and_tangent(3.0)) {
        // the geodesic velocity is parallel along the geodesic
        let q = exp_map(&p, &v).unwrap();
        let moved = parallel_transport(&p, &q, &v).unwrap();
        let back = log_map(&q, &p).unwrap().scale(-1.0);
        prop_assert!(close(moved.comps(), back.comps(), 1e-9));
    }

    #[test]
    fn flat_exp_is_translation(x in prop::collection::vec(-5.0f64..5.0, 3), v in prop::collection::vec(-5.0f64..5.0, 3)) {
        let p = Point::new(ManifoldKind::Euclidean(3), x.clone()).unwrap();
        let t = p.tangent(v.clone()).unwrap();
        let q = exp_map(&p, &t).unwrap();
        let moved = parallel_transport(&p, &q, &t).unwrap();
        let sum: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
        prop_assert_eq!(q.coords(), &sum[..]);
        prop_assert_eq!(moved.comps(), t.comps());
    }
}
