//! The smooth distance evaluator.
//!
//! `d̂(M, g) = −(1/α) log Σ_i w_i exp(−α d(f_i, g))`, summed over a BVH where
//! admissible clusters are replaced by `n_B · W · exp(−α d(y_B, g))` with
//! `y_B` the closest point of the cluster's box. Since `W` bounds every
//! weight in the cluster and `y_B` is no farther than any primitive in it,
//! the approximation only ever lowers `d̂`.

use alloc::vec;
use alloc::vec::Vec;

use crate::bvh::{bh_condition, box_closest_point, box_primitive_proximity, Bvh, NodeKind, Proximity};
use crate::exact_dist::{closest_point_sensitivity, simplex_distance};
use crate::geom::{Primitive, Vec3};
use crate::mesh::SimplexMesh;
use crate::weights::{attenuation, weight_gradient_world, WeightSet};
use crate::Error;

/// Guard added to the denominator of the gradient.
pub const DEFAULT_EPSILON: f64 = 1e-300;

/// How weight gradients are propagated to the query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GradMode {
    /// The derivative of `d̂` itself: weight gradients follow the actual
    /// motion of the closest point, and per-vertex gradients account for
    /// where on the query simplex each closest point sits.
    #[default]
    Exact,
    /// Weight gradients use shape-function gradients measured in the metric
    /// `α² I` with the closest-point projection taken as the identity, and
    /// per-vertex gradients split the translation gradient equally between
    /// the vertices of each query simplex. Cheaper; matches `Exact` for unit
    /// weights with point queries.
    Metric,
}

/// Evaluation parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothParams {
    /// Accuracy, in inverse length units.
    pub alpha: f64,
    /// Attenuation threshold; weights are fully applied once `α >= α_U`.
    pub alpha_u: f64,
    /// Barnes-Hut admissibility; 0 evaluates every primitive.
    pub beta: f64,
    /// Accuracy of the outer soft minimum over query simplices.
    pub alpha_q: f64,
    /// Divide-by-zero guard of the gradient.
    pub epsilon: f64,
    /// Gradient propagation rule.
    pub grad_mode: GradMode,
}

impl SmoothParams {
    /// `β = 0`, `α_q = α`, exact gradients.
    pub fn new(alpha: f64, alpha_u: f64) -> Self {
        Self { alpha, alpha_u, beta: 0.0, alpha_q: alpha, epsilon: DEFAULT_EPSILON, grad_mode: GradMode::Exact }
    }

    /// Sets `β`.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    /// Sets `α_q`.
    pub fn with_alpha_q(mut self, alpha_q: f64) -> Self {
        self.alpha_q = alpha_q;
        self
    }

    /// Sets the gradient rule.
    pub fn with_grad_mode(mut self, mode: GradMode) -> Self {
        self.grad_mode = mode;
        self
    }

    /// `S = α / max(α, α_U)`.
    #[inline]
    pub fn attenuation(&self) -> f64 {
        attenuation(self.alpha, self.alpha_u)
    }

    /// Checks every field against its domain.
    pub fn validate(&self) -> Result<(), Error> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        let bad = |m: &str| Err(Error::InvalidParameter(alloc::string::String::from(m)));
        if !pos(self.alpha) {
            return bad("alpha must be positive and finite");
        }
        if !pos(self.alpha_u) {
            return bad("alpha_u must be positive and finite");
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta must be finite and non-negative");
        }
        if !pos(self.alpha_q) {
            return bad("alpha_q must be positive and finite");
        }
        if !pos(self.epsilon) {
            return bad("epsilon must be positive");
        }
        Ok(())
    }
}

/// Traversal counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Leaves evaluated exactly.
    pub leaves: u64,
    /// Far-field expansions used.
    pub far_field: u64,
}

impl core::ops::AddAssign for Stats {
    fn add_assign(&mut self, o: Self) {
        self.leaves += o.leaves;
        self.far_field += o.far_field;
    }
}

/// Raw sums collected over the tree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contributions {
    /// `c = Σ w_i exp(−α d_i)` including far-field terms.
    pub c: f64,
    /// `Σ (w_i e_i ∇d_i − e_i ∇w_i / α)`, the numerator of `∇d̂`.
    pub grad_c: Vec3,
    /// The same numerator split per query vertex (unused entries zero).
    pub vertex_grad_c: [Vec3; 3],
    /// Traversal counters.
    pub stats: Stats,
}

/// Output of [`Field::smooth_min_dist`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothResult {
    /// `d̂`, `+∞` when every term underflowed.
    pub d_hat: f64,
    /// Gradient under rigid translation of the query.
    pub grad: Vec3,
    /// Gradient with respect to each query vertex (unused entries zero).
    pub vertex_grads: [Vec3; 3],
    /// Traversal counters.
    pub stats: Stats,
}

/// Output of [`Field::smooth_mesh_dist`].
#[derive(Clone, Debug, PartialEq)]
pub struct MeshDistance {
    /// `d̂(M, M̄)`.
    pub d_hat: f64,
    /// Gradient with respect to every query vertex.
    pub vertex_grads: Vec<Vec3>,
    /// Traversal counters summed over query simplices.
    pub stats: Stats,
}

/// A data mesh with its tree and weights, ready for queries.
///
/// Immutable and `Sync`; any number of threads may query it at once.
#[derive(Clone, Debug)]
pub struct Field {
    mesh: SimplexMesh,
    bvh: Bvh,
    weights: WeightSet,
}

impl Field {
    /// Builds adjacency, weights and the tree.
    pub fn new(mesh: SimplexMesh) -> Result<Self, Error> {
        let adj = mesh.compute_adjacency();
        let weights = WeightSet::build(&mesh, &adj);
        let bvh = Bvh::build(&mesh)?;
        Ok(Self { mesh, bvh, weights })
    }

    /// Every primitive weighted 1.
    pub fn with_unit_weights(mesh: SimplexMesh) -> Result<Self, Error> {
        let weights = WeightSet::unit(mesh.len());
        let bvh = Bvh::build(&mesh)?;
        Ok(Self { mesh, bvh, weights })
    }

    /// Assembles from prebuilt parts (for example loaded from a cache).
    pub fn from_parts(mesh: SimplexMesh, bvh: Bvh, weights: WeightSet) -> Result<Self, Error> {
        if bvh.root().count as usize != mesh.len() || weights.len() != mesh.len() {
            return Err(Error::InvalidParameter("tree or weights do not match the mesh".into()));
        }
        Ok(Self { mesh, bvh, weights })
    }

    /// The data mesh.
    pub fn mesh(&self) -> &SimplexMesh {
        &self.mesh
    }

    /// The tree.
    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    /// The weights.
    pub fn weights(&self) -> &WeightSet {
        &self.weights
    }

    /// Sums of exponentials and gradient numerators over the subtree at `node`.
    pub fn collect_contributions(&self, node: usize, g: &Primitive, params: &SmoothParams) -> Contributions {
        let alpha = params.alpha;
        let s = params.attenuation();
        let far_w = self.weights.far_weight(s);
        let nq = g.len();
        let mut out = Contributions { c: 0.0, grad_c: Vec3::zeros(), vertex_grad_c: [Vec3::zeros(); 3], stats: Stats::default() };
        let nodes = self.bvh.nodes();
        let mut stack = [0u32; 2 * crate::bvh::MAX_DEPTH];
        let mut top = 1;
        stack[0] = node as u32;
        while top > 0 {
            top -= 1;
            let n = &nodes[stack[top] as usize];
            if params.beta > 0.0 {
                if let Proximity::Center { y, d, lambda } = box_primitive_proximity(&n.bbox, g) {
                    if bh_condition(n, d, params.beta) {
                        let term = n.count as f64 * far_w * libm::exp(-alpha * d);
                        let dir = (g.eval(&lambda) - y) / d;
                        out.c += term;
                        out.grad_c += dir * term;
                        for k in 0..nq {
                            out.vertex_grad_c[k] += dir * (term * lambda[k]);
                        }
                        out.stats.far_field += 1;
                        continue;
                    }
                }
            }
            match n.kind {
                NodeKind::Leaf(i) => {
                    out.stats.leaves += 1;
                    self.leaf_term(i as usize, g, params, s, &mut out);
                }
                NodeKind::Inner(l, r) => {
                    stack[top] = r;
                    stack[top + 1] = l;
                    top += 2;
                }
            }
        }
        out
    }

    fn leaf_term(&self, i: usize, g: &Primitive, params: &SmoothParams, s: f64, out: &mut Contributions) {
        let alpha = params.alpha;
        let f = self.mesh.primitive(i);
        let cp = simplex_distance(&f, g);
        let e = libm::exp(-alpha * cp.d);
        if e == 0.0 {
            return;
        }
        let (w, dw) = self.weights.evaluate(i, &cp.phi, s);
        let we = w * e;
        out.c += we;
        out.grad_c += cp.grad * we;
        for k in 0..g.len() {
            out.vertex_grad_c[k] += cp.grad * (we * cp.lambda[k]);
        }
        if dw == [0.0, 0.0] {
            return;
        }
        match params.grad_mode {
            GradMode::Metric => {
                // per-vertex sums are rebuilt by equal splitting in `finish`
                let gw = weight_gradient_world(f.vertices(), &dw, alpha);
                out.grad_c -= gw * (e / alpha);
            }
            GradMode::Exact => {
                let sens = closest_point_sensitivity(&f, g, &cp);
                for k in 0..g.len() {
                    let mut gk = Vec3::zeros();
                    for m in 0..3 {
                        let dphi = &sens[k][m];
                        gk[m] = dw[0] * dphi[1] + dw[1] * dphi[2];
                    }
                    out.vertex_grad_c[k] -= gk * (e / alpha);
                    out.grad_c -= gk * (e / alpha);
                }
            }
        }
    }

    /// `d̂ = −log(c)/α` and `∇d̂ = ∇c / (c + ε)`.
    pub fn smooth_min_dist(&self, g: &Primitive, params: &SmoothParams) -> SmoothResult {
        let c = self.collect_contributions(0, g, params);
        finish(&c, g.len(), params)
    }

    /// `d̂` without gradients; the fast path for ray marching and grids.
    pub fn smooth_min_value(&self, g: &Primitive, params: &SmoothParams) -> (f64, Stats) {
        let alpha = params.alpha;
        let s = params.attenuation();
        let far_w = self.weights.far_weight(s);
        let nodes = self.bvh.nodes();
        let point = (g.len() == 1).then(|| g.vertices()[0]);
        let mut stats = Stats::default();
        let mut c = 0.0;
        let mut stack = [0u32; 2 * crate::bvh::MAX_DEPTH];
        let mut top = 1;
        while top > 0 {
            top -= 1;
            let n = &nodes[stack[top] as usize];
            if params.beta > 0.0 {
                // same distance as `box_primitive_proximity`, minus the bookkeeping
                let d = match point {
                    Some(p) => Some((p - box_closest_point(&n.bbox, &p)).norm()),
                    None => match box_primitive_proximity(&n.bbox, g) {
                        Proximity::Center { d, .. } => Some(d),
                        Proximity::MustDescend => None,
                    },
                };
                if let Some(d) = d {
                    if bh_condition(n, d, params.beta) {
                        c += n.count as f64 * far_w * libm::exp(-alpha * d);
                        stats.far_field += 1;
                        continue;
                    }
                }
            }
            match n.kind {
                NodeKind::Leaf(i) => {
                    stats.leaves += 1;
                    let i = i as usize;
                    let cp = simplex_distance(&self.mesh.primitive(i), g);
                    let e = libm::exp(-alpha * cp.d);
                    if e > 0.0 {
                        c += self.weights.value(i, &cp.phi, s) * e;
                    }
                }
                NodeKind::Inner(l, r) => {
                    stack[top] = r;
                    stack[top + 1] = l;
                    top += 2;
                }
            }
        }
        (d_hat_of(c, alpha), stats)
    }

    /// `d̂(M, M̄)` with per-vertex gradients, evaluated serially.
    pub fn smooth_mesh_dist(&self, query: &SimplexMesh, params: &SmoothParams) -> Result<MeshDistance, Error> {
        if query.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let per: Vec<SmoothResult> = query.primitives().map(|g| self.smooth_min_dist(&g, params)).collect();
        Ok(combine_query_mesh(query, &per, params.alpha_q))
    }
}

#[inline]
fn d_hat_of(c: f64, alpha: f64) -> f64 {
    if c > 0.0 {
        -libm::log(c) / alpha
    } else {
        f64::INFINITY
    }
}

fn finish(c: &Contributions, nq: usize, params: &SmoothParams) -> SmoothResult {
    let d_hat = d_hat_of(c.c, params.alpha);
    if !d_hat.is_finite() {
        return SmoothResult { d_hat, grad: Vec3::zeros(), vertex_grads: [Vec3::zeros(); 3], stats: c.stats };
    }
    let inv = 1.0 / (c.c + params.epsilon);
    let grad = c.grad_c * inv;
    let mut vertex_grads = [Vec3::zeros(); 3];
    for k in 0..nq {
        vertex_grads[k] = match params.grad_mode {
            GradMode::Exact => c.vertex_grad_c[k] * inv,
            GradMode::Metric => grad / nq as f64,
        };
    }
    SmoothResult { d_hat, grad, vertex_grads, stats: c.stats }
}

/// Outer soft minimum over query simplices with per-vertex gradients.
///
/// `per[j]` is the inner result of simplex `j`; its per-vertex gradients are
/// weighted by the softmax share of simplex `j` and accumulated onto the
/// mesh vertices. The outer sum is shifted by its smallest term before
/// exponentiating, which changes nothing mathematically but keeps large
/// `α_q · d̂` finite.
pub fn combine_query_mesh(query: &SimplexMesh, per: &[SmoothResult], alpha_q: f64) -> MeshDistance {
    let mut stats = Stats::default();
    for r in per {
        stats += r.stats;
    }
    let mut vertex_grads = vec![Vec3::zeros(); query.vertices().len()];
    let m = per.iter().map(|r| r.d_hat).fold(f64::INFINITY, f64::min);
    if !m.is_finite() {
        return MeshDistance { d_hat: m, vertex_grads, stats };
    }
    let ws: Vec<f64> = per.iter().map(|r| libm::exp(-alpha_q * (r.d_hat - m))).collect();
    let total: f64 = ws.iter().sum();
    for (j, s) in query.simplices().iter().enumerate() {
        if ws[j] == 0.0 {
            continue;
        }
        let share = ws[j] / total;
        for (k, &v) in s.indices().iter().enumerate() {
            vertex_grads[v] += per[j].vertex_grads[k] * share;
        }
    }
    MeshDistance { d_hat: m - libm::log(total) / alpha_q, vertex_grads, stats }
}

/// Soft minimum of several `(value, gradient)` pairs at accuracy `alpha`,
/// used to merge per-pair constraints into one.
pub fn soft_min(terms: &[(f64, Vec3)], alpha: f64) -> (f64, Vec3) {
    let m = terms.iter().map(|t| t.0).fold(f64::INFINITY, f64::min);
    if !m.is_finite() {
        return (m, Vec3::zeros());
    }
    let mut total = 0.0;
    let mut g = Vec3::zeros();
    for (d, gd) in terms {
        let w = libm::exp(-alpha * (d - m));
        total += w;
        g += gd * w;
    }
    (m - libm::log(total) / alpha, g / total)
}

/// Parameters suggested by mesh geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaHeuristic {
    /// Suggested `α`.
    pub alpha: f64,
    /// Suggested `α_U = 6α`.
    pub alpha_u: f64,
    /// Set for point clouds, where the suggestion needs manual tuning.
    pub warning: Option<&'static str>,
}

/// Ratio of the suggested `α_U` to `α`.
pub const ALPHA_U_RATIO: f64 = 6.0;

/// `α = 1 / min edge length` for meshes with edges. Point clouds get
/// `α = 100 / bbox diagonal` with a warning.
pub fn alpha_heuristic(mesh: &SimplexMesh) -> Result<AlphaHeuristic, Error> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let (alpha, warning) = match mesh.min_edge_length() {
        Ok(l) => (1.0 / l, None),
        Err(_) => {
            let diag = mesh.bounding_box().diagonal();
            let a = if diag > 0.0 { 100.0 / diag } else { 100.0 };
            (a, Some("point cloud: alpha from 100 / bbox diagonal; manual tuning is advised"))
        }
    };
    Ok(AlphaHeuristic { alpha, alpha_u: ALPHA_U_RATIO * alpha, warning })
}

/// The point-cloud rule read literally: `α = 100 × bbox diagonal`.
pub fn point_cloud_alpha_verbatim(mesh: &SimplexMesh) -> f64 {
    100.0 * mesh.bounding_box().diagonal()
}
