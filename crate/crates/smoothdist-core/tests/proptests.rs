use proptest::prelude::*;
use smoothdist_core::prelude::*;
use smoothdist_core::bvh::NodeKind;
use smoothdist_core::weights::TriWeightPoly;

fn coord() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

fn point() -> impl Strategy<Value = Vec3> {
    (coord(), coord(), coord()).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn primitive() -> impl Strategy<Value = Primitive> {
    (1usize..=3, prop::collection::vec(point(), 3))
        .prop_map(|(n, v)| Primitive::from_slice(&v[..n]))
        .prop_filter("non-degenerate", |p| p.len() == 1 || p.measure() > 1e-3)
}

/// Disjoint simplices, each with its own vertices.
fn soup() -> impl Strategy<Value = SimplexMesh> {
    prop::collection::vec(primitive(), 1..12).prop_map(|prims| {
        let mut v = Vec::new();
        let mut s = Vec::new();
        for p in prims {
            let o = v.len();
            v.extend_from_slice(p.vertices());
            s.push(match p.len() {
                1 => Simplex::Point(o),
                2 => Simplex::Edge([o, o + 1]),
                _ => Simplex::Triangle([o, o + 1, o + 2]),
            });
        }
        SimplexMesh::new(v, s).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_is_symmetric(f in primitive(), g in primitive()) {
        let a = simplex_distance(&f, &g);
        let b = simplex_distance(&g, &f);
        prop_assert!((a.d - b.d).abs() <= 1e-6 * (1.0 + a.d));
    }

    #[test]
    fn closest_points_realize_the_distance(f in primitive(), g in primitive()) {
        let c = simplex_distance(&f, &g);
        let gap = (c.point_on_query(&g) - c.point_on_data(&f)).norm();
        prop_assert!((gap - c.d).abs() <= 1e-6 * c.d.max(1e-9));
        for w in [c.phi, c.lambda] {
            prop_assert!(w.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
        }
        if c.d > 0.0 {
            prop_assert!((c.grad.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_distance_is_bracketed(mesh in soup(), g in primitive(), alpha in 2.0..200.0f64, beta in 0.0..0.9f64) {
        let field = Field::new(mesh).unwrap();
        let params = SmoothParams::new(alpha, 6.0 * alpha);
        let exact = field.smooth_min_dist(&g, &params).d_hat;
        let bh = field.smooth_min_dist(&g, &params.with_beta(beta)).d_hat;
        let (d_min, _) = exact_min_distance(field.mesh(), &g).unwrap();
        if exact.is_finite() {
            prop_assert!(exact <= d_min + 1e-9);
            let lower = d_min - (field.weights().scale() * field.mesh().len() as f64).ln() / alpha;
            prop_assert!(exact >= lower - 1e-9);
        }
        prop_assert!(bh <= exact + 1e-9 || (bh.is_infinite() && exact.is_infinite()));
    }

    #[test]
    fn point_clouds_nest_in_alpha(pts in prop::collection::vec(point(), 1..20), q in point()) {
        let field = Field::with_unit_weights(SimplexMesh::point_cloud(pts).unwrap()).unwrap();
        let probe = Primitive::point(q * 3.0);
        let mut last = f64::NEG_INFINITY;
        for alpha in [5.0, 10.0, 20.0, 40.0] {
            let d = field.smooth_min_dist(&probe, &SmoothParams::new(alpha, alpha)).d_hat;
            prop_assert!(d >= last);
            last = d;
        }
    }

    #[test]
    fn triangle_coefficients_round_trip(v in 1u32..=8, e in 1u32..=8) {
        let w = TriWeightPoly::build(v, e);
        let again = TriWeightPoly::from_unique(w.unique);
        prop_assert_eq!(w.coeffs36(), again.coeffs36());
    }

    #[test]
    fn tree_boxes_nest(mesh in soup()) {
        let t = Bvh::build(&mesh).unwrap();
        for n in t.nodes() {
            if let NodeKind::Inner(l, r) = n.kind {
                let (a, b) = (&t.nodes()[l as usize], &t.nodes()[r as usize]);
                prop_assert!(n.bbox.contains_box(&a.bbox) && n.bbox.contains_box(&b.bbox));
                prop_assert_eq!(n.count, a.count + b.count);
            }
        }
    }
}
