//! Bounding volume hierarchy with the far-field bookkeeping needed by the
//! Barnes-Hut traversal.

use alloc::vec::Vec;

use crate::exact_dist::simplex_distance;
use crate::geom::{Primitive, Vec3};
pub use crate::mesh::Aabb;
use crate::mesh::SimplexMesh;
use crate::Error;

/// Children of an inner node or the primitive of a leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// Index of the single primitive in the leaf.
    Leaf(u32),
    /// Node indices of the two children.
    Inner(u32, u32),
}

/// One tree node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BvhNode {
    /// Box containing every primitive below.
    pub bbox: Aabb,
    /// Leaf or inner node.
    pub kind: NodeKind,
    /// Number of primitives below, `n_B`.
    pub count: u32,
    /// Box diagonal, `|B|`.
    pub diam: f64,
}

/// Binary tree with one primitive per leaf; node 0 is the root.
#[derive(Clone, Debug, PartialEq)]
pub struct Bvh {
    nodes: Vec<BvhNode>,
}

/// Maximum tree depth supported by the fixed traversal stack. A median split
/// gives depth `ceil(log2 n) + 1`, so this covers any realistic mesh.
pub const MAX_DEPTH: usize = 64;

impl Bvh {
    /// Builds by recursive longest-axis median split on primitive centroids,
    /// ties broken by primitive index.
    pub fn build(mesh: &SimplexMesh) -> Result<Self, Error> {
        if mesh.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let items: Vec<(Aabb, Vec3)> = mesh
            .primitives()
            .map(|p| (Aabb::from_points(p.vertices().iter()), p.centroid()))
            .collect();
        let mut order: Vec<u32> = (0..mesh.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * mesh.len() - 1);
        build_rec(&items, &mut order, &mut nodes);
        Ok(Self { nodes })
    }

    /// Rebuilds from a node array, checking structural invariants.
    pub fn from_nodes(nodes: Vec<BvhNode>, num_prims: usize) -> Result<Self, Error> {
        let bad = |m: &str| Error::InvalidParameter(alloc::format!("bvh: {m}"));
        if nodes.is_empty() || nodes.len() != 2 * num_prims - 1 {
            return Err(bad("node count does not match primitive count"));
        }
        let mut seen = alloc::vec![false; num_prims];
        for (i, n) in nodes.iter().enumerate() {
            match n.kind {
                NodeKind::Leaf(p) => {
                    let p = p as usize;
                    if p >= num_prims || seen[p] || n.count != 1 {
                        return Err(bad("invalid leaf"));
                    }
                    seen[p] = true;
                }
                NodeKind::Inner(l, r) => {
                    let (l, r) = (l as usize, r as usize);
                    if l <= i || r <= i || l >= nodes.len() || r >= nodes.len() {
                        return Err(bad("child index out of order"));
                    }
                    if nodes[l].count + nodes[r].count != n.count {
                        return Err(bad("count mismatch"));
                    }
                }
            }
        }
        Ok(Self { nodes })
    }

    /// All nodes, root first.
    #[inline]
    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    /// The root node.
    #[inline]
    pub fn root(&self) -> &BvhNode {
        &self.nodes[0]
    }

    /// Longest root-to-leaf path, counted in nodes.
    pub fn depth(&self) -> usize {
        fn rec(nodes: &[BvhNode], i: usize) -> usize {
            match nodes[i].kind {
                NodeKind::Leaf(_) => 1,
                NodeKind::Inner(l, r) => 1 + rec(nodes, l as usize).max(rec(nodes, r as usize)),
            }
        }
        rec(&self.nodes, 0)
    }
}

fn build_rec(items: &[(Aabb, Vec3)], order: &mut [u32], nodes: &mut Vec<BvhNode>) -> u32 {
    let me = nodes.len() as u32;
    let mut bbox = Aabb::empty();
    for &i in order.iter() {
        bbox = bbox.union(&items[i as usize].0);
    }
    let placeholder = BvhNode { bbox, kind: NodeKind::Leaf(order[0]), count: order.len() as u32, diam: bbox.diagonal() };
    nodes.push(placeholder);
    if order.len() == 1 {
        return me;
    }
    let cb = Aabb::from_points(order.iter().map(|&i| &items[i as usize].1));
    let ext = cb.max - cb.min;
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        let (ca, cb) = (items[a as usize].1[axis], items[b as usize].1[axis]);
        ca.total_cmp(&cb).then(a.cmp(&b))
    });
    let (lo, hi) = order.split_at_mut(mid);
    let l = build_rec(items, lo, nodes);
    let r = build_rec(items, hi, nodes);
    nodes[me as usize].kind = NodeKind::Inner(l, r);
    me
}

/// Closest point of the closed box to `p`.
#[inline]
pub fn box_closest_point(b: &Aabb, p: &Vec3) -> Vec3 {
    Vec3::new(
        p.x.clamp(b.min.x, b.max.x),
        p.y.clamp(b.min.y, b.max.y),
        p.z.clamp(b.min.z, b.max.z),
    )
}

/// Outcome of the box–primitive test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Proximity {
    /// The box lies on the far side of at least one face plane: `y` is the
    /// expansion center, `d = d(y, g)` and `lambda` locates the matching
    /// point on `g`.
    Center {
        /// Expansion center on the box.
        y: Vec3,
        /// Distance from `y` to the query.
        d: f64,
        /// Barycentric weights of the closest point on the query.
        lambda: [f64; 3],
    },
    /// The query straddles every face plane it touches; children must be visited.
    MustDescend,
}

/// Expansion center of `b` with respect to query `g`.
///
/// Points use the clamp. Edges and triangles count the face half-spaces they
/// lie strictly outside of. With three, the center is the shared corner; with
/// two, the closest point on the shared box edge; with one, the closest point
/// on that face. Any box point can be moved onto the identified feature
/// without increasing its distance to `g`, so `d` never exceeds the distance
/// from `g` to anything inside the box.
pub fn box_primitive_proximity(b: &Aabb, g: &Primitive) -> Proximity {
    if g.len() == 1 {
        let p = g.vertices()[0];
        let y = box_closest_point(b, &p);
        return Proximity::Center { y, d: (p - y).norm(), lambda: [1.0, 0.0, 0.0] };
    }
    // per axis: Some(plane coordinate) when g is strictly outside that side
    let mut fixed = [None; 3];
    let mut k = 0;
    for a in 0..3 {
        let vs = g.vertices();
        if vs.iter().all(|v| v[a] > b.max[a]) {
            fixed[a] = Some(b.max[a]);
        } else if vs.iter().all(|v| v[a] < b.min[a]) {
            fixed[a] = Some(b.min[a]);
        }
        if fixed[a].is_some() {
            k += 1;
        }
    }
    if k == 0 {
        return Proximity::MustDescend;
    }
    let corner = |lo_hi: [bool; 3]| -> Vec3 {
        Vec3::from_fn(|a, _| match fixed[a] {
            Some(c) => c,
            None => {
                if lo_hi[a] {
                    b.max[a]
                } else {
                    b.min[a]
                }
            }
        })
    };
    let mut free = [0usize; 3];
    let mut nfree = 0;
    for a in 0..3 {
        if fixed[a].is_none() {
            free[nfree] = a;
            nfree += 1;
        }
    }
    let feature = match &free[..nfree] {
        [] => Primitive::point(corner([false; 3])),
        [a] => {
            let p0 = corner([false; 3]);
            let mut hi = [false; 3];
            hi[*a] = true;
            let p1 = corner(hi);
            if p0 == p1 {
                Primitive::point(p0)
            } else {
                Primitive::edge(p0, p1)
            }
        }
        [a, c] => {
            let mut ma = [false; 3];
            ma[*a] = true;
            let mut mc = [false; 3];
            mc[*c] = true;
            let p00 = corner([false; 3]);
            let p10 = corner(ma);
            let p01 = corner(mc);
            let mut both = ma;
            both[*c] = true;
            let p11 = corner(both);
            match (p00 == p10, p00 == p01) {
                (true, true) => Primitive::point(p00),
                (true, false) => Primitive::edge(p00, p01),
                (false, true) => Primitive::edge(p00, p10),
                (false, false) => {
                    let t1 = simplex_distance(&Primitive::triangle(p00, p10, p11), g);
                    let t2 = simplex_distance(&Primitive::triangle(p00, p11, p01), g);
                    let (cp, tri) = if t1.d <= t2.d {
                        (t1, Primitive::triangle(p00, p10, p11))
                    } else {
                        (t2, Primitive::triangle(p00, p11, p01))
                    };
                    return Proximity::Center { y: cp.point_on_data(&tri), d: cp.d, lambda: cp.lambda };
                }
            }
        }
        _ => unreachable!("k >= 1 leaves at most two free axes"),
    };
    let cp = simplex_distance(&feature, g);
    Proximity::Center { y: cp.point_on_data(&feature), d: cp.d, lambda: cp.lambda }
}

/// Barnes-Hut admissibility `|B| / d < β`; false for `β = 0` or `d = 0`.
#[inline]
pub fn bh_condition(node: &BvhNode, d: f64, beta: f64) -> bool {
    beta > 0.0 && d > 0.0 && node.diam < beta * d
}
