//! Integrated and sampled edge distances, kept as negative controls.
//!
//! Neither is conservative: averaging `exp(−α r)` over an edge overestimates
//! the distance at low `α`, and a unit-weight soft minimum over sample points
//! sees the gaps between samples at high `α`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geom::Vec3;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "quadrature order must be at least 1");
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x)
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.reverse();
    out
}

/// `−(1/α) log ∫₀¹ exp(−α ‖a + t(b − a) − q‖) dt` by Gauss–Legendre
/// quadrature of the given order.
///
/// The measure is the edge parameter, so the integral is an average of
/// `exp(−α r)` and the result is never below the nearest quadrature node's
/// distance.
pub fn integrated_edge_distance(a: &Vec3, b: &Vec3, q: &Vec3, alpha: f64, order: usize) -> f64 {
    let nodes: Vec<(f64, f64)> = gauss_legendre(order)
        .into_iter()
        .map(|(x, w)| ((a + (b - a) * (0.5 * (x + 1.0)) - q).norm(), 0.5 * w))
        .collect();
    shifted_soft_min(&nodes, alpha)
}

/// Unit-weight soft minimum over `n` evenly spaced points of the edge,
/// endpoints included.
pub fn sampled_edge_distance(a: &Vec3, b: &Vec3, q: &Vec3, alpha: f64, n: usize) -> f64 {
    assert!(n >= 2, "need at least the two endpoints");
    let nodes: Vec<(f64, f64)> = (0..n)
        .map(|i| ((a + (b - a) * (i as f64 / (n - 1) as f64) - q).norm(), 1.0))
        .collect();
    shifted_soft_min(&nodes, alpha)
}

/// `−(1/α) log Σ w exp(−α r)` over `(r, w)` pairs, shifted by the smallest
/// `r` so that distant edges at high `α` stay finite.
fn shifted_soft_min(nodes: &[(f64, f64)], alpha: f64) -> f64 {
    let m = nodes.iter().map(|n| n.0).fold(f64::INFINITY, f64::min);
    let sum: f64 = nodes.iter().map(|&(r, w)| w * libm::exp(-alpha * (r - m))).sum();
    m - libm::log(sum) / alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_rule() {
        let r = gauss_legendre(5);
        let wsum: f64 = r.iter().map(|p| p.1).sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // exact for degree 9
        let m8: f64 = r.iter().map(|&(x, w)| w * x.powi(8)).sum();
        assert!((m8 - 2.0 / 9.0).abs() < 1e-14);
        assert!((r[2].0).abs() < 1e-15);
        assert!((r[4].0 - 0.906_179_845_938_664).abs() < 1e-14);
    }

    #[test]
    fn single_node() {
        assert_eq!(gauss_legendre(1).len(), 1);
        assert!(gauss_legendre(1)[0].0.abs() < 1e-15);
    }
}
