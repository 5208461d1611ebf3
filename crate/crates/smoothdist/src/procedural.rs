//! Generated meshes for demos, benchmarks and tests.

use rand::Rng;
use smoothdist_core::prelude::*;

/// Subdivided icosahedron on the unit sphere; `20 · 4^level` triangles.
pub fn icosphere(level: u32) -> SimplexMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
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
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid = std::collections::HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let simplices = faces.into_iter().map(Simplex::Triangle).collect();
    SimplexMesh::new(verts, simplices).expect("icosphere is valid")
}

/// Torus around the z axis with `2 · nu · nv` triangles. `bumps` adds a
/// smooth radial ripple of that relative amplitude to the tube.
pub fn torus(major: f64, minor: f64, nu: usize, nv: usize, bumps: f64) -> SimplexMesh {
    let mut verts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = i as f64 / nu as f64 * std::f64::consts::TAU;
        for j in 0..nv {
            let v = j as f64 / nv as f64 * std::f64::consts::TAU;
            let r = minor * (1.0 + bumps * (3.0 * u).sin() * (2.0 * v).cos());
            let rr = major + r * v.cos();
            verts.push(Vec3::new(rr * u.cos(), rr * u.sin(), r * v.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut simplices = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            simplices.push(Simplex::Triangle([id(i, j), id(i + 1, j), id(i + 1, j + 1)]));
            simplices.push(Simplex::Triangle([id(i, j), id(i + 1, j + 1), id(i, j + 1)]));
        }
    }
    SimplexMesh::new(verts, simplices).expect("torus is valid")
}

/// A random mixed scene of at most `max_prims` primitives inside `[0, 1]³`:
/// a jittered height-field patch, polylines (some attached to the patch),
/// spikes leaving patch vertices, and isolated or vertex-sharing points.
pub fn random_mixed<R: Rng>(rng: &mut R, max_prims: usize) -> SimplexMesh {
    loop {
        if let Some(m) = try_random_mixed(rng, max_prims) {
            return m;
        }
    }
}

fn try_random_mixed<R: Rng>(rng: &mut R, max_prims: usize) -> Option<SimplexMesh> {
    let mut verts: Vec<Vec3> = Vec::new();
    let mut simplices: Vec<Simplex> = Vec::new();
    let budget = max_prims.max(4);

    // patch
    let nx = rng.gen_range(2..=7);
    let ny = rng.gen_range(2..=7);
    let size = rng.gen_range(0.3..0.8);
    let origin = Vec3::new(rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.3), rng.gen_range(0.2..0.6));
    let axis = random_unit(rng);
    let angle = rng.gen_range(0.0..std::f64::consts::PI);
    let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
    for i in 0..nx {
        for j in 0..ny {
            let p = Vec3::new(
                (i as f64 + rng.gen_range(-0.2..0.2)) / (nx - 1) as f64 * size,
                (j as f64 + rng.gen_range(-0.2..0.2)) / (ny - 1) as f64 * size,
                rng.gen_range(-0.08..0.08) * size,
            );
            verts.push(origin + rot * p);
        }
    }
    let id = |i: usize, j: usize| i * ny + j;
    let use_tris = rng.gen_bool(0.85);
    if use_tris {
        for i in 0..nx - 1 {
            for j in 0..ny - 1 {
                if rng.gen_bool(0.5) {
                    simplices.push(Simplex::Triangle([id(i, j), id(i + 1, j), id(i + 1, j + 1)]));
                    simplices.push(Simplex::Triangle([id(i, j), id(i + 1, j + 1), id(i, j + 1)]));
                } else {
                    simplices.push(Simplex::Triangle([id(i, j), id(i + 1, j), id(i, j + 1)]));
                    simplices.push(Simplex::Triangle([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]));
                }
            }
        }
    } else {
        // wireframe of the grid
        for i in 0..nx {
            for j in 0..ny {
                if i + 1 < nx {
                    simplices.push(Simplex::Edge([id(i, j), id(i + 1, j)]));
                }
                if j + 1 < ny {
                    simplices.push(Simplex::Edge([id(i, j), id(i, j + 1)]));
                }
            }
        }
    }
    let patch_verts = verts.len();

    // polylines
    for _ in 0..rng.gen_range(0..=3) {
        let n = rng.gen_range(2..=12);
        let mut prev = if rng.gen_bool(0.5) {
            rng.gen_range(0..patch_verts)
        } else {
            verts.push(random_point(rng));
            verts.len() - 1
        };
        for _ in 1..n {
            let step = random_unit(rng) * rng.gen_range(0.03..0.15);
            verts.push(clamp_unit(verts[prev] + step));
            let cur = verts.len() - 1;
            simplices.push(Simplex::Edge([prev, cur]));
            prev = cur;
        }
    }

    // spikes
    for _ in 0..rng.gen_range(0..=6) {
        let a = rng.gen_range(0..patch_verts);
        verts.push(clamp_unit(verts[a] + random_unit(rng) * rng.gen_range(0.05..0.2)));
        simplices.push(Simplex::Edge([a, verts.len() - 1]));
    }

    // points
    for _ in 0..rng.gen_range(0..=25) {
        if rng.gen_bool(0.3) {
            simplices.push(Simplex::Point(rng.gen_range(0..verts.len())));
        } else {
            verts.push(random_point(rng));
            simplices.push(Simplex::Point(verts.len() - 1));
        }
    }

    if simplices.is_empty() {
        return None;
    }
    simplices.truncate(budget);
    // drop vertices no simplex references
    let mut remap = vec![usize::MAX; verts.len()];
    let mut kept = Vec::new();
    for s in &simplices {
        for &i in s.indices() {
            if remap[i] == usize::MAX {
                remap[i] = kept.len();
                kept.push(verts[i]);
            }
        }
    }
    let simplices = simplices
        .iter()
        .map(|s| match *s {
            Simplex::Point(a) => Simplex::Point(remap[a]),
            Simplex::Edge([a, b]) => Simplex::Edge([remap[a], remap[b]]),
            Simplex::Triangle([a, b, c]) => Simplex::Triangle([remap[a], remap[b], remap[c]]),
        })
        .collect();
    SimplexMesh::new(kept, simplices).ok()
}

/// A random point, edge or triangle near `[0, 1]³` with edge lengths up to
/// `max_size`.
pub fn random_query<R: Rng>(rng: &mut R, max_size: f64) -> Primitive {
    let c = Vec3::new(rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
    let other = |rng: &mut R| {
        let u = random_unit(rng);
        c + u * rng.gen_range(0.2 * max_size..max_size)
    };
    match rng.gen_range(0..3) {
        0 => Primitive::point(c),
        1 => Primitive::edge(c, other(rng)),
        _ => loop {
            let (b, d) = (other(rng), other(rng));
            let tri = Primitive::triangle(c, b, d);
            let longest = (b - c).norm().max((d - c).norm()).max((d - b).norm());
            if tri.measure() > 1e-3 * longest * longest {
                break tri;
            }
        },
    }
}

/// Uniformly distributed unit vector.
pub fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_point<R: Rng>(rng: &mut R) -> Vec3 {
    Vec3::new(rng.gen(), rng.gen(), rng.gen())
}

fn clamp_unit(p: Vec3) -> Vec3 {
    p.map(|x| x.clamp(0.0, 1.0))
}
