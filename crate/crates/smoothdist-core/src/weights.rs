//! Per-primitive weight polynomials that undo the concentration of the soft
//! minimum at shared vertices and edges.
//!
//! A primitive's weight is `w = (A · w̃(phi))^S` with `S = α / max(α, α_U)`.
//! Points use `w = 1`. Edges use a quartic in `t` and triangles a symmetric
//! degree-7 polynomial in `(s, t) = (phi1, phi2)`. Both have zero normal
//! derivative on the boundary, so the field stays C¹ across neighbours.
//!
//! # Triangle coefficients
//!
//! The 36 monomials `s^a t^b` with `a + b <= 7` are ordered by `a`, then `b`
//! (see [`TRI_MONOMIALS`]). The boundary conditions force every coefficient
//! with `a == 1` or `b == 1` to zero. Symmetry leaves the 13 values listed in
//! [`TRI_UNIQUE`], with `c[a][b] = c[b][a]`.
//!
//! The 36 interpolation and boundary equations have rank 30. The minimum-norm
//! solution dips below `1/v` when an edge valence is 3 or more, which would
//! break `A · w̃ >= 1`. So the solver adds the component of the symmetric null
//! space that minimizes the Laplacian energy subject to
//! `w̃ >= (1 − η) min(1/v, 1/e)` on a grid, and `A` is then taken from the
//! polished true minimum.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Matrix3, Matrix5, Vector3, Vector5};

use crate::geom::Vec3;
use crate::mesh::{Adjacency, Simplex, SimplexMesh};

/// Relative singular-value cutoff of the pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Grid resolution of the lower-bound constraint on triangle weights.
const BARRIER_GRID: usize = 48;
/// Slack `η` of the grid constraint `w̃ >= (1 − η) min(1/v, 1/e)`.
const BARRIER_SLACK: f64 = 1e-3;
/// Relative margin added on top of the polished extrema when setting `A`
/// and the far-field weight.
const EXTREMUM_MARGIN: f64 = 1e-9;

/// `S = α / max(α, α_U)`.
#[inline]
pub fn attenuation(alpha: f64, alpha_u: f64) -> f64 {
    alpha / alpha.max(alpha_u)
}

/// Quartic `w̃(t) = Σ c_k t^k` on an edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeWeightPoly {
    /// Coefficients of `1, t, t², t³, t⁴`.
    pub coeffs: [f64; 5],
}

impl EdgeWeightPoly {
    /// Unique quartic with `w̃(0) = 1/n0`, `w̃(1) = 1/n1`, `w̃(1/2) = 1` and
    /// zero slope at both ends.
    ///
    /// # Panics
    /// If a valence is zero.
    pub fn build(n0: u32, n1: u32) -> Self {
        assert!(n0 >= 1 && n1 >= 1, "valences must be at least 1");
        let m = Matrix5::new(
            1.0, 0.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, 0.0, //
            1.0, 1.0, 1.0, 1.0, 1.0, //
            0.0, 1.0, 2.0, 3.0, 4.0, //
            1.0, 0.5, 0.25, 0.125, 0.0625,
        );
        let rhs = Vector5::new(1.0 / n0 as f64, 0.0, 1.0 / n1 as f64, 0.0, 1.0);
        let c = m.lu().solve(&rhs).expect("edge weight system is nonsingular");
        Self { coeffs: [c[0], c[1], c[2], c[3], c[4]] }
    }

    /// `w̃(t)`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let c = &self.coeffs;
        c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4])))
    }

    /// `dw̃/dt`.
    #[inline]
    pub fn deriv(&self, t: f64) -> f64 {
        let c = &self.coeffs;
        c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * 4.0 * c[4]))
    }

    /// Exact minimum and maximum on `[0, 1]`.
    ///
    /// With zero slope at both ends the derivative factors as
    /// `t (t − 1) · 4c₄ (t − t*)`, leaving one interior candidate.
    pub fn extrema(&self) -> (f64, f64) {
        let c = &self.coeffs;
        let mut lo = self.eval(0.0).min(self.eval(1.0));
        let mut hi = self.eval(0.0).max(self.eval(1.0));
        if c[4] != 0.0 {
            let ts = c[2] / (2.0 * c[4]);
            if (0.0..=1.0).contains(&ts) {
                lo = lo.min(self.eval(ts));
                hi = hi.max(self.eval(ts));
            }
        }
        (lo, hi)
    }
}

/// The 36 exponents `(a, b)` of `s^a t^b`, `a + b <= 7`, ordered by `a` then `b`.
pub const TRI_MONOMIALS: [(u8, u8); 36] = {
    let mut out = [(0u8, 0u8); 36];
    let mut i = 0;
    let mut a = 0;
    while a < 8 {
        let mut b = 0;
        while a + b < 8 {
            out[i] = (a as u8, b as u8);
            i += 1;
            b += 1;
        }
        a += 1;
    }
    out
};

/// Exponents of the 13 stored coefficients; each stands for `(a, b)` and `(b, a)`.
pub const TRI_UNIQUE: [(u8, u8); 13] = [
    (0, 0),
    (2, 2),
    (3, 3),
    (0, 2),
    (0, 3),
    (0, 4),
    (0, 5),
    (0, 6),
    (0, 7),
    (2, 3),
    (2, 4),
    (2, 5),
    (3, 4),
];

/// Position of `s^a t^b` in [`TRI_MONOMIALS`].
#[inline]
pub fn tri_monomial_index(a: usize, b: usize) -> usize {
    // rows a' < a contribute 8 - a' monomials each
    a * 8 - a * (a.saturating_sub(1)) / 2 + b
}

/// Symmetric degree-7 polynomial `w̃(s, t)` on the reference triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct TriWeightPoly {
    /// The 13 stored coefficients, in [`TRI_UNIQUE`] order.
    pub unique: [f64; 13],
    dense: [[f64; 8]; 8],
}

impl TriWeightPoly {
    /// Expands stored coefficients into the dense table.
    pub fn from_unique(unique: [f64; 13]) -> Self {
        let mut dense = [[0.0; 8]; 8];
        for (k, &(a, b)) in TRI_UNIQUE.iter().enumerate() {
            dense[a as usize][b as usize] = unique[k];
            dense[b as usize][a as usize] = unique[k];
        }
        Self { unique, dense }
    }

    /// Coefficients in [`TRI_MONOMIALS`] order.
    pub fn coeffs36(&self) -> [f64; 36] {
        let mut out = [0.0; 36];
        for (i, &(a, b)) in TRI_MONOMIALS.iter().enumerate() {
            out[i] = self.dense[a as usize][b as usize];
        }
        out
    }

    /// Builds the weight for max vertex valence `v` and max edge valence `e`.
    ///
    /// # Panics
    /// If `v == 0` or `e == 0`.
    pub fn build(v: u32, e: u32) -> Self {
        assert!(v >= 1 && e >= 1, "valences must be at least 1");
        let c = solve_tri_system(v, e);
        let mut u = [0.0; 13];
        for (k, &(a, b)) in TRI_UNIQUE.iter().enumerate() {
            let (i, j) = (tri_monomial_index(a as usize, b as usize), tri_monomial_index(b as usize, a as usize));
            u[k] = 0.5 * (c[i] + c[j]);
        }
        Self::from_unique(u)
    }

    /// `w̃(s, t)`.
    #[inline]
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        let mut acc = 0.0;
        for a in (0..8).rev() {
            let row = &self.dense[a];
            let mut inner = 0.0;
            for b in (0..8 - a).rev() {
                inner = inner * t + row[b];
            }
            acc = acc * s + inner;
        }
        acc
    }

    /// `(w̃, ∂w̃/∂s, ∂w̃/∂t)`.
    #[inline]
    pub fn eval_grad(&self, s: f64, t: f64) -> (f64, f64, f64) {
        let (mut w, mut ws, mut wt) = (0.0, 0.0, 0.0);
        for a in (0..8).rev() {
            let row = &self.dense[a];
            let (mut p, mut dp) = (0.0, 0.0);
            for b in (0..8 - a).rev() {
                dp = dp * t + p;
                p = p * t + row[b];
            }
            ws = ws * s + w;
            w = w * s + p;
            wt = wt * s + dp;
        }
        (w, ws, wt)
    }

    /// Minimum and maximum over the reference triangle, from a dense grid
    /// polished by projected gradient steps.
    pub fn extrema(&self) -> (f64, f64) {
        const N: usize = 160;
        let mut lo: Vec<(f64, f64, f64)> = Vec::new();
        let mut hi: Vec<(f64, f64, f64)> = Vec::new();
        for i in 0..=N {
            for j in 0..=N - i {
                let (s, t) = (i as f64 / N as f64, j as f64 / N as f64);
                let w = self.eval(s, t);
                keep_best(&mut lo, (w, s, t), 12, |a, b| a < b);
                keep_best(&mut hi, (w, s, t), 12, |a, b| a > b);
            }
        }
        let mut wmin = f64::INFINITY;
        for &(w, s, t) in &lo {
            wmin = wmin.min(w).min(self.polish(s, t, 1.0));
        }
        let mut wmax = f64::NEG_INFINITY;
        for &(w, s, t) in &hi {
            wmax = wmax.max(w).max(-self.polish(s, t, -1.0));
        }
        (wmin, wmax)
    }

    /// Minimizes `sign · w̃` from `(s, t)` with projected gradient descent.
    fn polish(&self, mut s: f64, mut t: f64, sign: f64) -> f64 {
        let mut f = sign * self.eval(s, t);
        let mut step = 1e-2;
        for _ in 0..400 {
            let (_, gs, gt) = self.eval_grad(s, t);
            let (gs, gt) = (sign * gs, sign * gt);
            let mut accepted = false;
            while step > 1e-14 {
                let (ns, nt) = project_triangle(s - step * gs, t - step * gt);
                let nf = sign * self.eval(ns, nt);
                if nf < f {
                    s = ns;
                    t = nt;
                    f = nf;
                    step *= 2.0;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        f
    }
}

fn keep_best(v: &mut Vec<(f64, f64, f64)>, x: (f64, f64, f64), k: usize, better: fn(f64, f64) -> bool) {
    if v.len() < k {
        v.push(x);
        return;
    }
    let mut worst = 0;
    for i in 1..v.len() {
        if better(v[worst].0, v[i].0) {
            worst = i;
        }
    }
    if better(x.0, v[worst].0) {
        v[worst] = x;
    }
}

/// Maps a point onto `{s, t >= 0, s + t <= 1}`: clamp to the quadrant, then
/// project onto the hypotenuse if still outside.
fn project_triangle(s: f64, t: f64) -> (f64, f64) {
    let (s, t) = (s.max(0.0), t.max(0.0));
    if s + t <= 1.0 {
        return (s, t);
    }
    let s2 = ((s - t + 1.0) * 0.5).clamp(0.0, 1.0);
    (s2, 1.0 - s2)
}

/// Monomial values `s^a t^b` in [`TRI_MONOMIALS`] order.
fn monomials(s: f64, t: f64) -> [f64; 36] {
    let mut sp = [1.0; 8];
    let mut tp = [1.0; 8];
    for k in 1..8 {
        sp[k] = sp[k - 1] * s;
        tp[k] = tp[k - 1] * t;
    }
    let mut out = [0.0; 36];
    for (i, &(a, b)) in TRI_MONOMIALS.iter().enumerate() {
        out[i] = sp[a as usize] * tp[b as usize];
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// Rows of the 36-equation triangle system and its right-hand side.
///
/// Rows 0..10 are point values (3 vertices, the 1/3 and 2/3 points of each
/// edge, the barycenter). Rows 10..23 zero the normal derivative on the two
/// legs `s = 0` and `t = 0`. Rows 23..36 zero `(∂s + ∂t) w̃` along the
/// hypotenuse, written in both orientations.
pub fn tri_system(v: u32, e: u32) -> (DMatrix<f64>, DVector<f64>) {
    let (vf, ef) = (v as f64, e as f64);
    let mut a = DMatrix::zeros(36, 36);
    let mut y = DVector::zeros(36);
    let third = 1.0 / 3.0;
    let two = 2.0 / 3.0;
    let points = [
        ((0.0, 0.0), 1.0 / vf),
        ((1.0, 0.0), 1.0 / vf),
        ((0.0, 1.0), 1.0 / vf),
        ((third, 0.0), 1.0 / ef),
        ((two, 0.0), 1.0 / ef),
        ((third, two), 1.0 / ef),
        ((two, third), 1.0 / ef),
        ((0.0, third), 1.0 / ef),
        ((0.0, two), 1.0 / ef),
        ((third, third), barycenter_target(v, e)),
    ];
    let mut r = 0;
    for &((s, t), val) in &points {
        let m = monomials(s, t);
        for i in 0..36 {
            a[(r, i)] = m[i];
        }
        y[r] = val;
        r += 1;
    }
    // ∂s w̃(0, t) = Σ_b c[1][b] t^b
    for b in 0..7 {
        a[(r, tri_monomial_index(1, b))] = 1.0;
        r += 1;
    }
    // ∂t w̃(s, 0) = Σ_a c[a][1] s^a, the a = 1 term is already present
    for aa in 0..7 {
        if aa == 1 {
            continue;
        }
        a[(r, tri_monomial_index(aa, 1))] = 1.0;
        r += 1;
    }
    // (∂s + ∂t) w̃ at (x, 1 − x) as a polynomial in x, and with s, t swapped
    for (swap, count) in [(false, 7), (true, 6)] {
        let mut h = [[0.0; 36]; 7];
        for (i, &(ea, eb)) in TRI_MONOMIALS.iter().enumerate() {
            let (ea, eb) = (ea as usize, eb as usize);
            for (ca, cb, coef) in [(ea.wrapping_sub(1), eb, ea), (ea, eb.wrapping_sub(1), eb)] {
                if coef == 0 {
                    continue;
                }
                let (pa, pb) = if swap { (cb, ca) } else { (ca, cb) };
                // x^pa (1 − x)^pb
                for k in 0..=pb {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    h[pa + k][i] += coef as f64 * binomial(pb, k) * sign;
                }
            }
        }
        for row in h.iter().take(count) {
            for i in 0..36 {
                a[(r, i)] = row[i];
            }
            r += 1;
        }
    }
    debug_assert_eq!(r, 36);
    (a, y)
}

/// `(v − 1)/v`, raised to the smallest boundary target. For `v = 1` the
/// plain value is 0, which no finite `A` could lift to 1.
fn barycenter_target(v: u32, e: u32) -> f64 {
    let vf = v as f64;
    ((vf - 1.0) / vf).max(lower_target(v, e))
}

/// Smallest interpolation target, `min(1/v, 1/e)`.
fn lower_target(v: u32, e: u32) -> f64 {
    1.0 / v.max(e) as f64
}

/// Laplacian energy `∫ (Δw̃)²` over the reference triangle as a quadratic form.
fn laplacian_energy() -> DMatrix<f64> {
    // ∫ s^a t^b over the triangle = a! b! / (a + b + 2)!
    let integral = |a: usize, b: usize| factorial(a) * factorial(b) / factorial(a + b + 2);
    let lap = |(a, b): (u8, u8)| {
        let (a, b) = (a as usize, b as usize);
        let mut terms: Vec<(f64, usize, usize)> = Vec::new();
        if a >= 2 {
            terms.push(((a * (a - 1)) as f64, a - 2, b));
        }
        if b >= 2 {
            terms.push(((b * (b - 1)) as f64, a, b - 2));
        }
        terms
    };
    let mut l = DMatrix::zeros(36, 36);
    for i in 0..36 {
        let ti = lap(TRI_MONOMIALS[i]);
        for j in 0..36 {
            let tj = lap(TRI_MONOMIALS[j]);
            let mut acc = 0.0;
            for &(c1, a1, b1) in &ti {
                for &(c2, a2, b2) in &tj {
                    acc += c1 * c2 * integral(a1 + a2, b1 + b2);
                }
            }
            l[(i, j)] = acc;
        }
    }
    l
}

/// Solves the triangle system, returning 36 coefficients.
fn solve_tri_system(v: u32, e: u32) -> [f64; 36] {
    let (a, y) = tri_system(v, e);
    let svd = a.svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let sv = &svd.singular_values;
    let smax = sv.max();
    let mut c0 = DVector::zeros(36);
    let mut null = Vec::new();
    for k in 0..36 {
        if sv[k] > PINV_CUTOFF * smax {
            let coef = u.column(k).dot(&y) / sv[k];
            c0 += vt.row(k).transpose() * coef;
        } else {
            null.push(vt.row(k).transpose());
        }
    }
    // symmetric part of the null space, orthonormalized
    let swap: [usize; 36] = core::array::from_fn(|i| {
        let (a, b) = TRI_MONOMIALS[i];
        tri_monomial_index(b as usize, a as usize)
    });
    let mut ns = DMatrix::zeros(36, null.len());
    for (k, n) in null.iter().enumerate() {
        for i in 0..36 {
            ns[(i, k)] = 0.5 * (n[i] + n[swap[i]]);
        }
    }
    let nsvd = ns.svd(true, false);
    let nu = nsvd.u.expect("u requested");
    let nmax = nsvd.singular_values.max();
    let basis: Vec<DVector<f64>> = (0..nsvd.singular_values.len())
        .filter(|&k| nsvd.singular_values[k] > 1e-8 * nmax)
        .map(|k| nu.column(k).into_owned())
        .collect();
    let mut c = c0.clone();
    if basis.len() == 3 {
        let z = barrier_select(lower_target(v, e), &c0, &basis);
        for k in 0..3 {
            c += &basis[k] * z[k];
        }
    }
    core::array::from_fn(|i| c[i])
}

/// Picks the null-space offset `z` minimizing Laplacian energy (plus a tiny
/// ridge) subject to `w̃ >= (1 − η) · lower` on a grid, by a log-barrier Newton
/// method with a phase-one start when the minimum-norm solution is
/// infeasible.
fn barrier_select(lower: f64, c0: &DVector<f64>, basis: &[DVector<f64>]) -> Vector3<f64> {
    let l = laplacian_energy();
    let nsm = DMatrix::from_columns(basis);
    let h_full = nsm.transpose() * &l * &nsm;
    let mut h = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            h[(i, j)] = 0.5 * (h_full[(i, j)] + h_full[(j, i)]);
        }
        h[(i, i)] += 1e-6;
    }
    let gv = nsm.transpose() * (&l * c0);
    let gvec = Vector3::new(gv[0], gv[1], gv[2]);

    let floor = (1.0 - BARRIER_SLACK) * lower;
    let mut rows: Vec<(Vector3<f64>, f64)> = Vec::new();
    let g = BARRIER_GRID;
    for i in 0..=g {
        for j in 0..=g - i {
            let m = monomials(i as f64 / g as f64, j as f64 / g as f64);
            let mv = DVector::from_row_slice(&m);
            let bz = nsm.transpose() * &mv;
            rows.push((Vector3::new(bz[0], bz[1], bz[2]), mv.dot(c0) - floor));
        }
    }
    let mut z = h.lu().solve(&-gvec).unwrap_or_else(Vector3::zeros);
    if rows.iter().any(|(b, b0)| b0 + b.dot(&z) <= 0.0) {
        let (z1, t) = phase_one(&rows, z);
        z = z1;
        if t <= 1e-12 {
            // The floor is out of reach (edge valence above vertex valence
            // forces a dip below 1/e along the edges). Lower it to just under
            // the best achievable minimum.
            let shift = BARRIER_SLACK * lower - t;
            for r in rows.iter_mut() {
                r.1 += shift;
            }
        }
    }
    let slack = |z: &Vector3<f64>| rows.iter().map(|(b, b0)| b0 + b.dot(z)).fold(f64::INFINITY, f64::min);
    let obj = |z: &Vector3<f64>, mu: f64| -> f64 {
        let mut f = 0.5 * z.dot(&(h * z)) + gvec.dot(z);
        for (b, b0) in &rows {
            f -= mu * libm::log(b0 + b.dot(z));
        }
        f
    };
    let mut mu = 1.0;
    while mu >= 1e-12 {
        for _ in 0..50 {
            let mut grad = h * z + gvec;
            let mut hess = h;
            for (b, b0) in &rows {
                let r = b0 + b.dot(&z);
                grad -= b * (mu / r);
                hess += b * b.transpose() * (mu / (r * r));
            }
            let Some(d) = hess.lu().solve(&-grad) else { break };
            let f0 = obj(&z, mu);
            let mut a = 1.0;
            loop {
                let zn = z + d * a;
                if slack(&zn) > 0.0 && obj(&zn, mu) <= f0 + 1e-4 * a * grad.dot(&d) {
                    break;
                }
                a *= 0.5;
                if a < 1e-16 {
                    a = 0.0;
                    break;
                }
            }
            z += d * a;
            if -grad.dot(&d) < 1e-14 || a == 0.0 {
                break;
            }
        }
        mu *= 0.2;
    }
    z
}

/// Maximizes the smallest slack, stopping early once it is positive.
/// Returns the point and its smallest slack.
fn phase_one(rows: &[(Vector3<f64>, f64)], mut z: Vector3<f64>) -> (Vector3<f64>, f64) {
    let min_slack = |z: &Vector3<f64>| rows.iter().map(|(b, b0)| b0 + b.dot(z)).fold(f64::INFINITY, f64::min);
    let mut t = min_slack(&z) - 1.0;
    let mut mu = 1.0;
    while mu >= 1e-12 {
        for _ in 0..50 {
            // minimize −t − μ Σ log(b0 + b·z − t) over (z, t)
            let mut gz = Vector3::zeros();
            let mut gt = -1.0;
            let mut hzz = Matrix3::zeros();
            let mut hzt = Vector3::zeros();
            let mut htt = 0.0;
            for (b, b0) in rows {
                let r = b0 + b.dot(&z) - t;
                gz -= b * (mu / r);
                gt += mu / r;
                let w = mu / (r * r);
                hzz += b * b.transpose() * w;
                hzt -= b * w;
                htt += w;
            }
            let mut hf = nalgebra::Matrix4::zeros();
            hf.fixed_view_mut::<3, 3>(0, 0).copy_from(&hzz);
            for i in 0..3 {
                hf[(i, 3)] = hzt[i];
                hf[(3, i)] = hzt[i];
                hf[(i, i)] += 1e-14;
            }
            hf[(3, 3)] = htt + 1e-14;
            let rhs = nalgebra::Vector4::new(-gz[0], -gz[1], -gz[2], -gt);
            let Some(d) = hf.lu().solve(&rhs) else { break };
            let dz = Vector3::new(d[0], d[1], d[2]);
            let mut a = 1.0;
            while rows.iter().any(|(b, b0)| b0 + b.dot(&(z + dz * a)) - (t + d[3] * a) <= 0.0) {
                a *= 0.5;
                if a < 1e-16 {
                    break;
                }
            }
            z += dz * a;
            t += d[3] * a;
            if t > 1e-12 {
                return (z, t);
            }
        }
        mu *= 0.2;
    }
    (z, min_slack(&z))
}

/// Weight attached to one data primitive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PrimWeight {
    /// Constant `w̃ = 1`, `A` not applied (points).
    Unit,
    /// Edge quartic.
    Edge(EdgeWeightPoly),
    /// Index into [`WeightSet::tri_polys`].
    Tri(u32),
}

/// Weights for every primitive of a data mesh plus the global scale `A`.
#[derive(Clone, Debug)]
pub struct WeightSet {
    prims: Vec<PrimWeight>,
    tri_polys: Vec<TriWeightPoly>,
    tri_keys: Vec<(u32, u32)>,
    scale: f64,
    wt_max: f64,
}

impl WeightSet {
    /// Builds weights from mesh valences.
    pub fn build(mesh: &SimplexMesh, adj: &Adjacency) -> Self {
        let mut prims = Vec::with_capacity(mesh.len());
        let mut tri_polys = Vec::new();
        let mut tri_keys = Vec::new();
        let mut tri_index: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut edge_cache: BTreeMap<(u32, u32), (EdgeWeightPoly, f64, f64)> = BTreeMap::new();
        let mut tri_extrema: Vec<(f64, f64)> = Vec::new();
        let mut scale: f64 = 1.0;
        let mut wt_max: f64 = 0.0;
        for s in mesh.simplices() {
            match *s {
                Simplex::Point(_) => prims.push(PrimWeight::Unit),
                Simplex::Edge([a, b]) => {
                    let (n0, n1) = (adj.vertex_valence[a], adj.vertex_valence[b]);
                    let (p, lo, hi) = *edge_cache.entry((n0, n1)).or_insert_with(|| {
                        let p = EdgeWeightPoly::build(n0, n1);
                        let (lo, hi) = p.extrema();
                        (p, lo, hi)
                    });
                    scale = scale.max(n0.max(n1) as f64).max((1.0 + EXTREMUM_MARGIN) / lo);
                    wt_max = wt_max.max(hi);
                    prims.push(PrimWeight::Edge(p));
                }
                Simplex::Triangle([a, b, c]) => {
                    let vv = adj.vertex_valence[a].max(adj.vertex_valence[b]).max(adj.vertex_valence[c]);
                    let ee = adj.edge(a, b).max(adj.edge(b, c)).max(adj.edge(c, a));
                    let idx = *tri_index.entry((vv, ee)).or_insert_with(|| {
                        let p = TriWeightPoly::build(vv, ee);
                        tri_extrema.push(p.extrema());
                        tri_polys.push(p);
                        tri_keys.push((vv, ee));
                        (tri_polys.len() - 1) as u32
                    });
                    let (lo, hi) = tri_extrema[idx as usize];
                    scale = scale.max(vv as f64).max((1.0 + EXTREMUM_MARGIN) / lo);
                    wt_max = wt_max.max(hi);
                    prims.push(PrimWeight::Tri(idx));
                }
            }
        }
        Self { prims, tri_polys, tri_keys, scale, wt_max: wt_max * (1.0 + EXTREMUM_MARGIN) }
    }

    /// Unit weights everywhere, `A = 1`.
    pub fn unit(n: usize) -> Self {
        Self {
            prims: alloc::vec![PrimWeight::Unit; n],
            tri_polys: Vec::new(),
            tri_keys: Vec::new(),
            scale: 1.0,
            wt_max: 0.0,
        }
    }

    /// Global scale `A`.
    #[inline]
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Largest `w̃` over all non-point primitives (0 if there are none).
    #[inline]
    pub fn wt_max(&self) -> f64 {
        self.wt_max
    }

    /// Weight kind of primitive `i`.
    #[inline]
    pub fn prim(&self, i: usize) -> PrimWeight {
        self.prims[i]
    }

    /// Number of primitives covered.
    pub fn len(&self) -> usize {
        self.prims.len()
    }

    /// True when no primitives are covered.
    pub fn is_empty(&self) -> bool {
        self.prims.is_empty()
    }

    /// Distinct triangle polynomials.
    pub fn tri_polys(&self) -> &[TriWeightPoly] {
        &self.tri_polys
    }

    /// `(v, e)` of each entry in [`WeightSet::tri_polys`].
    pub fn tri_keys(&self) -> &[(u32, u32)] {
        &self.tri_keys
    }

    /// True when every primitive has unit weight.
    pub fn is_unit(&self) -> bool {
        self.prims.iter().all(|p| matches!(p, PrimWeight::Unit))
    }

    /// Unscaled `w̃` of primitive `i` at `phi` with its parameter derivatives.
    #[inline]
    pub fn raw(&self, i: usize, phi: &[f64; 3]) -> (f64, [f64; 2]) {
        match self.prims[i] {
            PrimWeight::Unit => (1.0, [0.0; 2]),
            PrimWeight::Edge(p) => (p.eval(phi[1]), [p.deriv(phi[1]), 0.0]),
            PrimWeight::Tri(k) => {
                let (w, ws, wt) = self.tri_polys[k as usize].eval_grad(phi[1], phi[2]);
                (w, [ws, wt])
            }
        }
    }

    /// Unscaled `w̃` of primitive `i` without derivatives.
    #[inline]
    pub fn raw_value(&self, i: usize, phi: &[f64; 3]) -> f64 {
        match self.prims[i] {
            PrimWeight::Unit => 1.0,
            PrimWeight::Edge(p) => p.eval(phi[1]),
            PrimWeight::Tri(k) => self.tri_polys[k as usize].eval(phi[1], phi[2]),
        }
    }

    /// `w = (A w̃)^S` and `dw/dphi`; points give `(1, 0)`.
    #[inline]
    pub fn evaluate(&self, i: usize, phi: &[f64; 3], s: f64) -> (f64, [f64; 2]) {
        if let PrimWeight::Unit = self.prims[i] {
            return (1.0, [0.0; 2]);
        }
        let (wt, d) = self.raw(i, phi);
        let aw = self.scale * wt;
        let w = pow(aw, s);
        let k = if s == 1.0 { self.scale } else { s * w / aw * self.scale };
        (w, [k * d[0], k * d[1]])
    }

    /// `w = (A w̃)^S` only.
    #[inline]
    pub fn value(&self, i: usize, phi: &[f64; 3], s: f64) -> f64 {
        if let PrimWeight::Unit = self.prims[i] {
            return 1.0;
        }
        pow(self.scale * self.raw_value(i, phi), s)
    }

    /// Upper bound on every primitive weight at attenuation `s`, used as the
    /// far-field weight.
    pub fn far_weight(&self, s: f64) -> f64 {
        if self.wt_max == 0.0 {
            1.0
        } else {
            pow(self.scale * self.wt_max, s).max(1.0)
        }
    }
}

#[inline]
fn pow(x: f64, s: f64) -> f64 {
    if s == 1.0 {
        x
    } else {
        libm::pow(x, s)
    }
}

/// World-space weight gradient with α-scaled shape-function gradients,
/// treating the closest-point projection as the identity.
///
/// Edges use `∇t = (v1 − v0) / (α ‖v1 − v0‖²)`; triangles use the dual basis
/// of the edge vectors divided by α.
pub fn weight_gradient_world(verts: &[Vec3], dw_dphi: &[f64; 2], alpha: f64) -> Vec3 {
    let [g1, g2] = shape_gradients(verts);
    (g1 * dw_dphi[0] + g2 * dw_dphi[1]) / alpha
}

/// Unscaled gradients of the barycentric parameters `(phi1, phi2)` in the
/// plane of the primitive; zero for unused parameters.
pub fn shape_gradients(verts: &[Vec3]) -> [Vec3; 2] {
    match verts.len() {
        2 => {
            let e = verts[1] - verts[0];
            [e / e.norm_squared(), Vec3::zeros()]
        }
        3 => {
            let e1 = verts[1] - verts[0];
            let e2 = verts[2] - verts[0];
            let (a, b, c) = (e1.dot(&e1), e1.dot(&e2), e2.dot(&e2));
            let det = a * c - b * b;
            [(e1 * c - e2 * b) / det, (e2 * a - e1 * b) / det]
        }
        _ => [Vec3::zeros(); 2],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_index_matches_table() {
        for (i, &(a, b)) in TRI_MONOMIALS.iter().enumerate() {
            assert_eq!(tri_monomial_index(a as usize, b as usize), i);
        }
    }

    #[test]
    fn edge_quartic_for_valence_two() {
        let p = EdgeWeightPoly::build(2, 2);
        let want = [0.5, 0.0, 8.0, -16.0, 8.0];
        for k in 0..5 {
            assert!((p.coeffs[k] - want[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_grad_matches_eval() {
        let p = TriWeightPoly::build(6, 2);
        let (s, t) = (0.21, 0.37);
        let (w, ws, wt) = p.eval_grad(s, t);
        assert!((w - p.eval(s, t)).abs() < 1e-14);
        let h = 1e-6;
        let fs = (p.eval(s + h, t) - p.eval(s - h, t)) / (2.0 * h);
        let ft = (p.eval(s, t + h) - p.eval(s, t - h)) / (2.0 * h);
        assert!((ws - fs).abs() < 1e-7 && (wt - ft).abs() < 1e-7);
    }

    #[test]
    fn projection_lands_on_triangle() {
        for &(s, t) in &[(2.0, 0.1), (-1.0, 3.0), (0.9, 0.9), (0.3, 0.2)] {
            let (a, b) = project_triangle(s, t);
            assert!(a >= 0.0 && b >= 0.0 && a + b <= 1.0 + 1e-15);
        }
    }
}
