//! Small geometric vocabulary shared by every module.

use nalgebra::Vector3;

/// 3D vector in model units.
pub type Vec3 = Vector3<f64>;

/// A simplex with explicit coordinates: a point, an edge or a triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pts: [Vec3; 3],
    len: u8,
}

impl Primitive {
    /// A single point.
    pub fn point(p: Vec3) -> Self {
        Self { pts: [p, p, p], len: 1 }
    }

    /// The segment `(1 - t) a + t b`.
    pub fn edge(a: Vec3, b: Vec3) -> Self {
        Self { pts: [a, b, b], len: 2 }
    }

    /// The triangle `(1 - s - t) a + s b + t c`.
    pub fn triangle(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Self { pts: [a, b, c], len: 3 }
    }

    /// Builds a primitive from 1 to 3 vertices.
    ///
    /// # Panics
    /// If `v` is empty or has more than 3 entries.
    pub fn from_slice(v: &[Vec3]) -> Self {
        match v {
            [a] => Self::point(*a),
            [a, b] => Self::edge(*a, *b),
            [a, b, c] => Self::triangle(*a, *b, *c),
            _ => panic!("a primitive has 1 to 3 vertices, got {}", v.len()),
        }
    }

    /// Vertex coordinates.
    #[inline]
    pub fn vertices(&self) -> &[Vec3] {
        &self.pts[..self.len as usize]
    }

    /// Number of vertices (1, 2 or 3).
    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    /// Always false; a primitive has at least one vertex.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Intrinsic dimension `n(f)`: 0, 1 or 2.
    #[inline]
    pub fn dim(&self) -> usize {
        self.len as usize - 1
    }

    /// Point at full barycentric weights `b` (one per vertex, unused entries ignored).
    #[inline]
    pub fn eval(&self, b: &[f64; 3]) -> Vec3 {
        let mut p = self.pts[0] * b[0];
        for k in 1..self.len() {
            p += self.pts[k] * b[k];
        }
        p
    }

    /// Vertex centroid.
    pub fn centroid(&self) -> Vec3 {
        let n = self.len() as f64;
        self.vertices().iter().fold(Vec3::zeros(), |a, v| a + v) / n
    }

    /// Length for edges, area for triangles, 1 for points.
    pub fn measure(&self) -> f64 {
        match self.len {
            1 => 1.0,
            2 => (self.pts[1] - self.pts[0]).norm(),
            _ => 0.5 * (self.pts[1] - self.pts[0]).cross(&(self.pts[2] - self.pts[0])).norm(),
        }
    }

    /// The same primitive moved by `t`.
    pub fn translated(&self, t: &Vec3) -> Self {
        let mut out = *self;
        for p in out.pts.iter_mut() {
            *p += t;
        }
        out
    }

    /// The same primitive with vertex `k` moved by `t`.
    pub fn with_vertex_moved(&self, k: usize, t: &Vec3) -> Self {
        assert!(k < self.len(), "vertex {k} out of range");
        let mut out = *self;
        out.pts[k] += t;
        // keep the padding copies in sync so `eval` stays well defined
        for j in out.len()..3 {
            out.pts[j] = out.pts[out.len() - 1];
        }
        out
    }
}
