mod common;

use rand::Rng;
use smoothdist_core::bvh::{bh_condition, box_closest_point, box_primitive_proximity, NodeKind};
use smoothdist_core::exact_dist::qp_distance;
use smoothdist_core::prelude::*;

/// Primitive indices below `node`, gathered recursively.
fn below(t: &Bvh, node: usize, out: &mut Vec<usize>) {
    match t.nodes()[node].kind {
        NodeKind::Leaf(i) => out.push(i as usize),
        NodeKind::Inner(l, r) => {
            below(t, l as usize, out);
            below(t, r as usize, out);
        }
    }
}

fn random_mesh<R: Rng>(rng: &mut R) -> SimplexMesh {
    let n = rng.gen_range(1..60);
    let mut v = Vec::new();
    let mut s = Vec::new();
    for _ in 0..n {
        let k = rng.gen_range(0..3);
        let p = common::primitive(rng, k, 0.0, 1.0, 0.3);
        let base = v.len();
        v.extend_from_slice(p.vertices());
        s.push(match k {
            0 => Simplex::Point(base),
            1 => Simplex::Edge([base, base + 1]),
            _ => Simplex::Triangle([base, base + 1, base + 2]),
        });
    }
    SimplexMesh::new(v, s).unwrap()
}

#[test]
fn counts_for_point_clouds() {
    let pts: Vec<Vec3> = (0..37).map(|i| Vec3::new(i as f64, (i * i % 7) as f64, 0.0)).collect();
    let t = Bvh::build(&SimplexMesh::point_cloud(pts).unwrap()).unwrap();
    let leaves = t.nodes().iter().filter(|n| matches!(n.kind, NodeKind::Leaf(_))).count();
    assert_eq!(leaves, 37);
    assert_eq!(t.root().count, 37);
}

#[test]
fn boxes_contain_their_primitives() {
    let mut rng = common::rng(41);
    for _ in 0..1000 {
        let m = random_mesh(&mut rng);
        let t = Bvh::build(&m).unwrap();
        for (k, node) in t.nodes().iter().enumerate() {
            let mut ids = Vec::new();
            below(&t, k, &mut ids);
            assert_eq!(ids.len(), node.count as usize);
            for i in ids {
                assert!(m.primitive(i).vertices().iter().all(|p| node.bbox.contains(p)));
            }
            assert!((node.diam - node.bbox.diagonal()).abs() == 0.0);
        }
    }
}

#[test]
fn tree_is_deterministic() {
    let mut rng = common::rng(42);
    let m = random_mesh(&mut rng);
    assert_eq!(Bvh::build(&m).unwrap(), Bvh::build(&m).unwrap());
}

#[test]
fn closest_box_point_beats_samples() {
    let mut rng = common::rng(43);
    let b = Aabb { min: Vec3::new(0.0, -1.0, 0.5), max: Vec3::new(1.0, 0.5, 2.0) };
    for _ in 0..5 {
        let p = common::vec3(&mut rng, -2.0, 3.0);
        let y = box_closest_point(&b, &p);
        let d = (p - y).norm();
        for _ in 0..100_000 {
            let s = Vec3::from_fn(|a, _| rng.gen_range(b.min[a]..=b.max[a]));
            assert!(d <= (p - s).norm() + 1e-15);
        }
    }
    let inside = Vec3::new(0.5, 0.0, 1.0);
    assert_eq!(box_closest_point(&b, &inside), inside);
}

#[test]
fn point_query_center_is_the_clamp() {
    let b = Aabb { min: Vec3::zeros(), max: Vec3::repeat(1.0) };
    let p = Vec3::new(2.0, 0.5, -1.0);
    match box_primitive_proximity(&b, &Primitive::point(p)) {
        Proximity::Center { y, d, .. } => {
            assert_eq!(y, Vec3::new(1.0, 0.5, 0.0));
            assert_eq!(d, 2f64.sqrt());
        }
        Proximity::MustDescend => panic!("points always get a center"),
    }
}

#[test]
fn edge_beyond_one_face_uses_the_face() {
    let b = Aabb { min: Vec3::zeros(), max: Vec3::repeat(1.0) };
    let g = Primitive::edge(Vec3::new(1.5, -0.5, 0.3), Vec3::new(2.5, 0.4, 1.7));
    let Proximity::Center { y, d, .. } = box_primitive_proximity(&b, &g) else { panic!("edge is outside +x") };
    assert_eq!(y.x, 1.0);
    let face = [
        Primitive::triangle(Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0), Vec3::new(1.0, 1.0, 1.0)),
        Primitive::triangle(Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0), Vec3::new(1.0, 0.0, 1.0)),
    ];
    let oracle = face.iter().map(|f| qp_distance(f, &g).d).fold(f64::INFINITY, f64::min);
    assert!((d - oracle).abs() < 1e-12, "{d} {oracle}");
}

#[test]
fn centers_never_overestimate_contents() {
    let mut rng = common::rng(44);
    for _ in 0..300 {
        let m = random_mesh(&mut rng);
        let t = Bvh::build(&m).unwrap();
        let k = rng.gen_range(0..3);
        let g = common::primitive(&mut rng, k, -0.5, 1.5, 0.4);
        for (n, node) in t.nodes().iter().enumerate() {
            if let Proximity::Center { d, y, lambda } = box_primitive_proximity(&node.bbox, &g) {
                assert!(d >= 0.0);
                assert!(((g.eval(&lambda) - y).norm() - d).abs() < 1e-12);
                let mut ids = Vec::new();
                below(&t, n, &mut ids);
                for i in ids {
                    assert!(d <= simplex_distance(&m.primitive(i), &g).d + 1e-12);
                }
            }
        }
    }
}

#[test]
fn admissibility_examples() {
    let mut rng = common::rng(45);
    let m = random_mesh(&mut rng);
    let t = Bvh::build(&m).unwrap();
    let node = t.root();
    assert!(!bh_condition(node, 1e9, 0.0));
    assert!(!bh_condition(node, 0.0, 10.0));
    assert!(bh_condition(node, node.diam * 3.0, 0.5));
}
