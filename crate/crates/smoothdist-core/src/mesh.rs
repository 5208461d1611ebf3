//! Mixed simplicial meshes, adjacency and normalization.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::geom::{Primitive, Vec3};
use crate::Error;

/// Triangles whose area is below this fraction of the squared longest edge
/// are rejected as degenerate.
pub const SLIVER_TOLERANCE: f64 = 1e-12;

/// Index list of a point, an edge or a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Simplex {
    /// A single vertex.
    Point(usize),
    /// Two vertices.
    Edge([usize; 2]),
    /// Three vertices.
    Triangle([usize; 3]),
}

impl Simplex {
    /// Vertex indices.
    #[inline]
    pub fn indices(&self) -> &[usize] {
        match self {
            Simplex::Point(i) => core::slice::from_ref(i),
            Simplex::Edge(e) => e,
            Simplex::Triangle(t) => t,
        }
    }

    /// Intrinsic dimension `n(f)`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.indices().len() - 1
    }
}

/// Count of each simplex kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KindCounts {
    /// Number of point simplices.
    pub points: usize,
    /// Number of edges.
    pub edges: usize,
    /// Number of triangles.
    pub triangles: usize,
}

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    /// Lower corner.
    pub min: Vec3,
    /// Upper corner.
    pub max: Vec3,
}

impl Aabb {
    /// The empty box; absorbs nothing and is grown by [`Aabb::grow`].
    pub fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    /// Box spanned by a set of points.
    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Self::empty();
        for p in pts {
            b.grow(p);
        }
        b
    }

    /// Extends the box to contain `p`.
    #[inline]
    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    /// Smallest box containing both.
    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&o.min),
            max: self.max.sup(&o.max),
        }
    }

    /// Length of the diagonal, `|B|`.
    #[inline]
    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    /// Midpoint.
    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Whether `p` lies in the closed box.
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|a| self.min[a] <= p[a] && p[a] <= self.max[a])
    }

    /// Whether `o` lies in the closed box.
    pub fn contains_box(&self, o: &Aabb) -> bool {
        self.contains(&o.min) && self.contains(&o.max)
    }
}

/// Vertex positions plus a mixed list of points, edges and triangles.
///
/// Immutable once built; every simplex has been checked for valid,
/// distinct indices and nonzero length or area.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexMesh {
    vertices: Vec<Vec3>,
    simplices: Vec<Simplex>,
}

impl SimplexMesh {
    /// Validates and wraps the geometry.
    ///
    /// Out-of-range indices fail on the first offender; degenerate simplices
    /// are collected so the error lists all of them.
    pub fn new(vertices: Vec<Vec3>, simplices: Vec<Simplex>) -> Result<Self, Error> {
        let n = vertices.len();
        let mut bad = Vec::new();
        for (i, s) in simplices.iter().enumerate() {
            for &k in s.indices() {
                if k >= n {
                    return Err(Error::IndexOutOfRange { simplex: i, index: k, len: n });
                }
            }
            if is_degenerate(&vertices, s) {
                bad.push(i);
            }
        }
        if !bad.is_empty() {
            return Err(Error::Degenerate { simplices: bad });
        }
        Ok(Self { vertices, simplices })
    }

    /// A point cloud with one point simplex per vertex.
    pub fn point_cloud(vertices: Vec<Vec3>) -> Result<Self, Error> {
        let simplices = (0..vertices.len()).map(Simplex::Point).collect();
        Self::new(vertices, simplices)
    }

    /// Vertex positions.
    #[inline]
    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    /// Simplex list.
    #[inline]
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    /// Number of simplices `|F|`.
    #[inline]
    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    /// True when there are no simplices.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Coordinates of simplex `i`.
    #[inline]
    pub fn primitive(&self, i: usize) -> Primitive {
        let v = &self.vertices;
        match self.simplices[i] {
            Simplex::Point(a) => Primitive::point(v[a]),
            Simplex::Edge([a, b]) => Primitive::edge(v[a], v[b]),
            Simplex::Triangle([a, b, c]) => Primitive::triangle(v[a], v[b], v[c]),
        }
    }

    /// Iterator over all primitives in simplex order.
    pub fn primitives(&self) -> impl Iterator<Item = Primitive> + '_ {
        (0..self.len()).map(move |i| self.primitive(i))
    }

    /// Number of points, edges and triangles.
    pub fn kind_counts(&self) -> KindCounts {
        let mut k = KindCounts::default();
        for s in &self.simplices {
            match s {
                Simplex::Point(_) => k.points += 1,
                Simplex::Edge(_) => k.edges += 1,
                Simplex::Triangle(_) => k.triangles += 1,
            }
        }
        k
    }

    /// Box around all vertices, referenced or not.
    pub fn bounding_box(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter())
    }

    /// Shortest edge over standalone edges and triangle sides.
    pub fn min_edge_length(&self) -> Result<f64, Error> {
        let v = &self.vertices;
        let mut best = f64::INFINITY;
        for s in &self.simplices {
            match *s {
                Simplex::Point(_) => {}
                Simplex::Edge([a, b]) => best = best.min((v[a] - v[b]).norm()),
                Simplex::Triangle([a, b, c]) => {
                    best = best
                        .min((v[a] - v[b]).norm())
                        .min((v[b] - v[c]).norm())
                        .min((v[c] - v[a]).norm());
                }
            }
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::NoEdges)
        }
    }

    /// Applies `p -> scale * p + shift` to every vertex.
    pub fn transformed(&self, scale: f64, shift: &Vec3) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| p * scale + shift).collect(),
            simplices: self.simplices.clone(),
        }
    }

    /// Uniformly scales and translates so the box is centred at
    /// `(0.5, 0.5, 0.5)` with diagonal `0.5`. A zero-diagonal mesh is only
    /// translated.
    pub fn normalize_to_benchmark_frame(&self) -> Result<Self, Error> {
        if self.is_empty() || self.vertices.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let b = self.bounding_box();
        let diag = b.diagonal();
        let scale = if diag > 0.0 { 0.5 / diag } else { 1.0 };
        let shift = Vec3::repeat(0.5) - b.center() * scale;
        Ok(self.transformed(scale, &shift))
    }

    /// Vertex and edge valences plus one-rings.
    pub fn compute_adjacency(&self) -> Adjacency {
        Adjacency::new(self)
    }
}

fn is_degenerate(v: &[Vec3], s: &Simplex) -> bool {
    let finite = |i: usize| v[i].iter().all(|x| x.is_finite());
    if !s.indices().iter().all(|&i| finite(i)) {
        return true;
    }
    match *s {
        Simplex::Point(_) => false,
        Simplex::Edge([a, b]) => a == b || v[a] == v[b],
        Simplex::Triangle([a, b, c]) => {
            if a == b || b == c || a == c {
                return true;
            }
            let (e0, e1, e2) = (v[b] - v[a], v[c] - v[a], v[c] - v[b]);
            let longest = e0.norm_squared().max(e1.norm_squared()).max(e2.norm_squared());
            e0.cross(&e1).norm() <= SLIVER_TOLERANCE * longest
        }
    }
}

/// Undirected edge key with the smaller index first.
#[inline]
pub fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Incidence counts used by the weight construction.
///
/// Only non-point simplices contribute: a vertex's valence counts every
/// edge or triangle containing it, and an edge's valence counts every
/// standalone edge or triangle containing it.
#[derive(Clone, Debug, PartialEq)]
pub struct Adjacency {
    /// `|N_k|` per vertex.
    pub vertex_valence: Vec<u32>,
    /// `|N_kl|` per undirected edge, keyed by [`edge_key`].
    pub edge_valence: BTreeMap<(usize, usize), u32>,
    /// Non-point simplices incident to each vertex, in simplex order.
    pub one_ring: Vec<Vec<usize>>,
}

impl Adjacency {
    /// Counts incidences over `mesh`.
    pub fn new(mesh: &SimplexMesh) -> Self {
        let mut vertex_valence = vec![0u32; mesh.vertices().len()];
        let mut one_ring = vec![Vec::new(); mesh.vertices().len()];
        let mut edge_valence = BTreeMap::new();
        for (i, s) in mesh.simplices().iter().enumerate() {
            if s.dim() == 0 {
                continue;
            }
            let idx = s.indices();
            for &k in idx {
                vertex_valence[k] += 1;
                one_ring[k].push(i);
            }
            for a in 0..idx.len() {
                for b in a + 1..idx.len() {
                    *edge_valence.entry(edge_key(idx[a], idx[b])).or_insert(0) += 1;
                }
            }
        }
        Self { vertex_valence, edge_valence, one_ring }
    }

    /// Valence of the edge `(a, b)`, 0 if absent.
    pub fn edge(&self, a: usize, b: usize) -> u32 {
        self.edge_valence.get(&edge_key(a, b)).copied().unwrap_or(0)
    }
}
