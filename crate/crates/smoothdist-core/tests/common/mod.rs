//! Shared generators for the integration tests.
#![allow(dead_code)]

use rand::Rng;
use smoothdist_core::prelude::*;

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn vec3<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Vec3 {
    Vec3::new(rng.gen_range(lo..hi), rng.gen_range(lo..hi), rng.gen_range(lo..hi))
}

pub fn unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = vec3(rng, -1.0, 1.0);
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Random point, edge or triangle of reasonable shape.
pub fn primitive<R: Rng>(rng: &mut R, kind: usize, lo: f64, hi: f64, size: f64) -> Primitive {
    let a = vec3(rng, lo, hi);
    match kind {
        0 => Primitive::point(a),
        1 => Primitive::edge(a, a + unit(rng) * rng.gen_range(0.2 * size..size)),
        _ => loop {
            let b = a + unit(rng) * rng.gen_range(0.2 * size..size);
            let c = a + unit(rng) * rng.gen_range(0.2 * size..size);
            let t = Primitive::triangle(a, b, c);
            if t.measure() > 0.05 * size * size {
                break t;
            }
        },
    }
}

/// Small mixed mesh: a triangle strip sharing vertices, a polyline hanging
/// off it and a few points, some on strip vertices.
pub fn mixed_mesh<R: Rng>(rng: &mut R) -> SimplexMesh {
    let mut v = Vec::new();
    let mut s = Vec::new();
    let n = rng.gen_range(2..6);
    for i in 0..n {
        let x = i as f64 * 0.25;
        v.push(Vec3::new(x, rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05)));
        v.push(Vec3::new(x + 0.1, 0.3 + rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05)));
    }
    for i in 0..n - 1 {
        let (a, b, c, d) = (2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3);
        s.push(Simplex::Triangle([a, c, b]));
        s.push(Simplex::Triangle([b, c, d]));
    }
    let mut prev = 2 * n - 1;
    for _ in 0..rng.gen_range(1..5) {
        v.push(v[prev] + unit(rng) * rng.gen_range(0.1..0.3));
        s.push(Simplex::Edge([prev, v.len() - 1]));
        prev = v.len() - 1;
    }
    for _ in 0..rng.gen_range(0..4) {
        if rng.gen_bool(0.5) {
            s.push(Simplex::Point(rng.gen_range(0..v.len())));
        } else {
            v.push(vec3(rng, -0.2, 1.2));
            s.push(Simplex::Point(v.len() - 1));
        }
    }
    SimplexMesh::new(v, s).unwrap()
}

/// Closed icosahedron.
pub fn icosahedron() -> SimplexMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let v = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z))
    .collect();
    let f = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    SimplexMesh::new(v, f.iter().map(|&t| Simplex::Triangle(t)).collect()).unwrap()
}

/// Two edges meeting at the origin at a right angle.
pub fn corner() -> SimplexMesh {
    SimplexMesh::new(
        vec![Vec3::new(-1.0, 0.0, 0.0), Vec3::zeros(), Vec3::new(0.0, 1.0, 0.0)],
        vec![Simplex::Edge([0, 1]), Simplex::Edge([1, 2])],
    )
    .unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
