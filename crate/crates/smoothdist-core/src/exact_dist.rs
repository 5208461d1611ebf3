//! Exact distances between simplices.
//!
//! Point–point, point–edge, point–triangle and edge–edge use closed forms.
//! Pairs involving a triangle and an edge or triangle go through a tiny QP
//! that enumerates every pair of faces (vertex subsets) of the two simplices,
//! solves the equality-constrained least-squares problem on each and keeps
//! the best feasible one. Faces are visited by increasing dimension, so when
//! the minimizer is not unique (parallel features) the lowest-dimensional
//! face found first wins, which keeps results deterministic.
//!
//! Barycentric coordinates are stored as full weight vectors: entry `k`
//! multiplies vertex `k` and unused entries are zero. For an edge the usual
//! parameter `t` is `w[1]`; for a triangle `(phi1, phi2)` is `(w[1], w[2])`.

use nalgebra::{Matrix4, Vector4};

use crate::geom::{Primitive, Vec3};
use crate::mesh::SimplexMesh;
use crate::Error;

/// Closest pair between a data simplex `f` and a query simplex `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosestPair {
    /// Distance `‖f(phi) − g(lambda)‖`.
    pub d: f64,
    /// Gradient of `d` under rigid translation of `g`: `(g(lambda) − f(phi)) / d`,
    /// or zero when `d == 0`.
    pub grad: Vec3,
    /// Barycentric weights of the closest point on `f`.
    pub phi: [f64; 3],
    /// Barycentric weights of the closest point on `g`.
    pub lambda: [f64; 3],
}

impl ClosestPair {
    fn new(f: &Primitive, g: &Primitive, phi: [f64; 3], lambda: [f64; 3]) -> Self {
        let diff = g.eval(&lambda) - f.eval(&phi);
        let d = diff.norm();
        let grad = if d > 0.0 { diff / d } else { Vec3::zeros() };
        Self { d, grad, phi, lambda }
    }

    /// Closest point on the data simplex.
    pub fn point_on_data(&self, f: &Primitive) -> Vec3 {
        f.eval(&self.phi)
    }

    /// Closest point on the query simplex.
    pub fn point_on_query(&self, g: &Primitive) -> Vec3 {
        g.eval(&self.lambda)
    }

    fn swapped(self) -> Self {
        Self { d: self.d, grad: -self.grad, phi: self.lambda, lambda: self.phi }
    }
}

/// Closest pair between data simplex `f` and query simplex `g`.
///
/// Inputs are assumed non-degenerate (meshes reject degenerate simplices at
/// construction).
pub fn simplex_distance(f: &Primitive, g: &Primitive) -> ClosestPair {
    let (fv, gv) = (f.vertices(), g.vertices());
    match (fv.len(), gv.len()) {
        (1, 1) => ClosestPair::new(f, g, [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
        (2, 1) => {
            let t = point_segment(&gv[0], &fv[0], &fv[1]);
            ClosestPair::new(f, g, [1.0 - t, t, 0.0], [1.0, 0.0, 0.0])
        }
        (1, 2) => simplex_distance(g, f).swapped(),
        (3, 1) => {
            let b = point_triangle(&gv[0], &fv[0], &fv[1], &fv[2]);
            ClosestPair::new(f, g, b, [1.0, 0.0, 0.0])
        }
        (1, 3) => simplex_distance(g, f).swapped(),
        (2, 2) => {
            let (s, t) = segment_segment(&fv[0], &fv[1], &gv[0], &gv[1]);
            ClosestPair::new(f, g, [1.0 - s, s, 0.0], [1.0 - t, t, 0.0])
        }
        _ => qp_distance(f, g),
    }
}

/// Brute-force minimum distance from `g` to every simplex of `mesh`, with the
/// index of the first minimizer.
pub fn exact_min_distance(mesh: &SimplexMesh, g: &Primitive) -> Result<(f64, usize), Error> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mut best = (f64::INFINITY, 0);
    for (i, f) in mesh.primitives().enumerate() {
        let d = simplex_distance(&f, g).d;
        if d < best.0 {
            best = (d, i);
        }
    }
    Ok(best)
}

/// Parameter `t` of the point on segment `ab` closest to `p`.
#[inline]
pub fn point_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let t = (p - a).dot(&ab) / ab.norm_squared();
    t.clamp(0.0, 1.0)
}

/// Barycentric weights of the point on triangle `abc` closest to `p`,
/// by Voronoi region classification.
pub fn point_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> [f64; 3] {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return [1.0, 0.0, 0.0];
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return [0.0, 1.0, 0.0];
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return [1.0 - v, v, 0.0];
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return [0.0, 0.0, 1.0];
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return [1.0 - w, 0.0, w];
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return [0.0, 1.0 - w, w];
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    [1.0 - v - w, v, w]
}

/// Parameters `(s, t)` of the closest points on segments `p1q1` and `p2q2`.
/// Parallel segments take `s = 0` first.
pub fn segment_segment(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> (f64, f64) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let c = d1.dot(&r);
    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-14 * a * e {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    (s, t)
}

/// Vertex subsets of a simplex with `n` vertices, ordered by size and then
/// lexicographically.
fn faces(n: usize) -> &'static [u8] {
    const F1: [u8; 1] = [0b001];
    const F2: [u8; 3] = [0b01, 0b10, 0b11];
    const F3: [u8; 7] = [0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];
    match n {
        1 => &F1,
        2 => &F2,
        _ => &F3,
    }
}

/// Indices of the set bits of `mask`, ascending.
#[inline]
fn members(mask: u8, out: &mut [usize; 3]) -> usize {
    let mut n = 0;
    for k in 0..3 {
        if mask & (1 << k) != 0 {
            out[n] = k;
            n += 1;
        }
    }
    n
}

/// Affine parametrization of a face pair: residual `r(x) = r0 + J x`.
struct FacePair {
    fs: [usize; 3],
    nf: usize,
    gs: [usize; 3],
    ng: usize,
    cols: [Vec3; 4],
    r0: Vec3,
}

impl FacePair {
    fn new(f: &Primitive, g: &Primitive, fmask: u8, gmask: u8) -> Self {
        let (fv, gv) = (f.vertices(), g.vertices());
        let mut fs = [0; 3];
        let mut gs = [0; 3];
        let nf = members(fmask, &mut fs);
        let ng = members(gmask, &mut gs);
        let mut cols = [Vec3::zeros(); 4];
        let mut c = 0;
        for i in 1..nf {
            cols[c] = fv[fs[i]] - fv[fs[0]];
            c += 1;
        }
        for j in 1..ng {
            cols[c] = -(gv[gs[j]] - gv[gs[0]]);
            c += 1;
        }
        Self { fs, nf, gs, ng, cols, r0: fv[fs[0]] - gv[gs[0]] }
    }

    #[inline]
    fn dim(&self) -> usize {
        self.nf + self.ng - 2
    }

    /// Gram matrix `JᵀJ`, padded with identity beyond `dim`.
    fn gram(&self) -> Matrix4<f64> {
        let n = self.dim();
        let mut m = Matrix4::identity();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.cols[i].dot(&self.cols[j]);
            }
        }
        m
    }

    /// `Jᵀ v`, zero-padded.
    fn jt(&self, v: &Vec3) -> Vector4<f64> {
        let mut out = Vector4::zeros();
        for i in 0..self.dim() {
            out[i] = self.cols[i].dot(v);
        }
        out
    }

    /// Full barycentric weights from reduced coordinates `x`.
    fn weights(&self, x: &Vector4<f64>) -> ([f64; 3], [f64; 3]) {
        let mut phi = [0.0; 3];
        let mut lam = [0.0; 3];
        let mut c = 0;
        let mut rest = 1.0;
        for i in 1..self.nf {
            phi[self.fs[i]] = x[c];
            rest -= x[c];
            c += 1;
        }
        phi[self.fs[0]] = rest;
        rest = 1.0;
        for j in 1..self.ng {
            lam[self.gs[j]] = x[c];
            rest -= x[c];
            c += 1;
        }
        lam[self.gs[0]] = rest;
        (phi, lam)
    }
}

/// Solves the stationarity system on one face pair; `None` when the Gram
/// matrix is numerically singular.
fn solve_face(fp: &FacePair) -> Option<Vector4<f64>> {
    let n = fp.dim();
    if n == 0 {
        return Some(Vector4::zeros());
    }
    let m = fp.gram();
    let scale = (0..n).map(|i| m[(i, i)]).fold(0.0, f64::max);
    let chol = m.cholesky()?;
    let l = chol.l_dirty();
    for i in 0..n {
        if l[(i, i)] * l[(i, i)] <= 1e-13 * scale {
            return None;
        }
    }
    Some(-chol.solve(&fp.jt(&fp.r0)))
}

/// Global minimizer by enumeration of face pairs.
pub fn qp_distance(f: &Primitive, g: &Primitive) -> ClosestPair {
    const TOL: f64 = 1e-12;
    let mut best: Option<(f64, [f64; 3], [f64; 3])> = None;
    for &fm in faces(f.len()) {
        for &gm in faces(g.len()) {
            let fp = FacePair::new(f, g, fm, gm);
            let Some(x) = solve_face(&fp) else { continue };
            let (mut phi, mut lam) = fp.weights(&x);
            if phi.iter().chain(lam.iter()).any(|&w| w < -TOL) {
                continue;
            }
            clamp_simplex(&mut phi);
            clamp_simplex(&mut lam);
            let d2 = (g.eval(&lam) - f.eval(&phi)).norm_squared();
            let better = match best {
                None => true,
                Some((b, ..)) => d2 < b * (1.0 - 1e-12) - 1e-300,
            };
            if better {
                best = Some((d2, phi, lam));
            }
        }
    }
    // vertex pairs are always feasible, so some candidate exists
    let (_, phi, lam) = best.expect("vertex pairs are feasible");
    ClosestPair::new(f, g, phi, lam)
}

fn clamp_simplex(w: &mut [f64; 3]) {
    let mut s = 0.0;
    for x in w.iter_mut() {
        *x = x.max(0.0);
        s += *x;
    }
    for x in w.iter_mut() {
        *x /= s;
    }
}

/// Derivative of the data-side barycentrics of a closest pair with respect
/// to moving query vertex `k` along axis `m`: `dphi[k][m][a]`.
///
/// The active faces are read off the support of `phi` and `lambda`; on that
/// face pair the closest points satisfy `Zᵀ Jᵀ r = 0`, which is
/// differentiated implicitly. Singular configurations (parallel features)
/// use a pseudo-inverse. Summing over `k` gives the response to translating
/// the whole query simplex.
pub fn closest_point_sensitivity(
    f: &Primitive,
    g: &Primitive,
    cp: &ClosestPair,
) -> [[[f64; 3]; 3]; 3] {
    const SUPPORT: f64 = 1e-12;
    let mut out = [[[0.0; 3]; 3]; 3];
    let mask = |w: &[f64; 3], n: usize| -> u8 {
        (0..n).filter(|&k| w[k] > SUPPORT).fold(0u8, |m, k| m | (1 << k))
    };
    let fm = mask(&cp.phi, f.len());
    let gm = mask(&cp.lambda, g.len());
    if fm.count_ones() <= 1 {
        return out; // closest point pinned to a data vertex
    }
    let fp = FacePair::new(f, g, fm, gm);
    let n = fp.dim();
    let minv = pinv4(&fp.gram(), n);
    let r = f.eval(&cp.phi) - g.eval(&cp.lambda);
    for k in 0..g.len() {
        for m in 0..3 {
            let mut e = Vec3::zeros();
            e[m] = 1.0;
            let dr = -e * cp.lambda[k];
            let mut b = fp.jt(&dr);
            // only query-direction columns move with query vertices
            let first_g = fp.nf - 1;
            for j in 1..fp.ng {
                let coef = (fp.gs[j] == k) as i32 - (fp.gs[0] == k) as i32;
                if coef != 0 {
                    b[first_g + j - 1] += -(coef as f64) * r[m];
                }
            }
            let dy = -(minv * b);
            let mut sum = 0.0;
            for i in 1..fp.nf {
                out[k][m][fp.fs[i]] = dy[i - 1];
                sum += dy[i - 1];
            }
            out[k][m][fp.fs[0]] = -sum;
        }
    }
    out
}

/// Pseudo-inverse of the leading `n×n` block, zero elsewhere.
fn pinv4(m: &Matrix4<f64>, n: usize) -> Matrix4<f64> {
    let mut a = Matrix4::zeros();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = m[(i, j)];
        }
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Matrix4::zeros();
    }
    svd.pseudo_inverse(1e-12 * smax).unwrap_or_else(|_| Matrix4::zeros())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn point_point() {
        let cp = simplex_distance(&Primitive::point(v(0., 0., 0.)), &Primitive::point(v(3., 4., 0.)));
        assert_eq!(cp.d, 5.0);
        assert!((cp.grad - v(0.6, 0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn endpoint_clamp() {
        let f = Primitive::edge(v(0., 0., 0.), v(1., 0., 0.));
        let cp = simplex_distance(&f, &Primitive::point(v(2., 1., 0.)));
        assert!((cp.d - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(cp.phi[1], 1.0);
        assert_eq!(cp.point_on_data(&f), v(1., 0., 0.));
    }

    #[test]
    fn zero_distance_has_zero_gradient() {
        let f = Primitive::triangle(v(0., 0., 0.), v(1., 0., 0.), v(0., 1., 0.));
        // dyadic coordinates so the barycentric round trip is exact
        let cp = simplex_distance(&f, &Primitive::point(v(0.25, 0.25, 0.)));
        assert_eq!(cp.d, 0.0);
        assert_eq!(cp.grad, Vec3::zeros());
    }

    #[test]
    fn crossing_triangles_touch() {
        let f = Primitive::triangle(v(0., 0., 0.), v(1., 0., 0.), v(0., 1., 0.));
        let g = Primitive::triangle(v(0.2, 0.2, -1.), v(0.3, 0.2, 1.), v(0.2, 0.3, 1.));
        assert!(simplex_distance(&f, &g).d < 1e-12);
    }

    #[test]
    fn parallel_edges_pick_endpoint() {
        let f = Primitive::edge(v(0., 0., 0.), v(2., 0., 0.));
        let g = Primitive::edge(v(1., 1., 0.), v(3., 1., 0.));
        let cp = simplex_distance(&f, &g);
        assert!((cp.d - 1.0).abs() < 1e-15);
        let tri = Primitive::triangle(v(0., 0., 0.), v(2., 0., 0.), v(0., -1., 0.));
        let cq = simplex_distance(&tri, &g);
        assert!((cq.d - 1.0).abs() < 1e-15);
        assert_eq!(cq, simplex_distance(&tri, &g));
    }
}
