//! Parallel evaluation over a configurable worker pool.
//!
//! Every query is pure, so results are identical for any thread count; only
//! timings change.

use rayon::prelude::*;
use smoothdist_core::prelude::*;
use smoothdist_core::smooth::Stats;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "SMOOTHDIST_THREADS";

/// Worker count: the explicit value, else `SMOOTHDIST_THREADS`, else the
/// number of logical CPUs.
pub fn resolve_threads(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Builds a pool with `resolve_threads(explicit)` workers.
pub fn thread_pool(explicit: Option<usize>) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_threads(explicit))
        .build()
        .expect("thread pool")
}

/// `d̂` and traversal counters at every point.
pub fn evaluate_points(field: &Field, params: &SmoothParams, points: &[Vec3], pool: &rayon::ThreadPool) -> Vec<(f64, Stats)> {
    pool.install(|| points.par_iter().map(|p| field.smooth_min_value(&Primitive::point(*p), params)).collect())
}

/// Full results (value and gradients) for every query primitive.
pub fn evaluate_primitives(field: &Field, params: &SmoothParams, queries: &[Primitive], pool: &rayon::ThreadPool) -> Vec<SmoothResult> {
    pool.install(|| queries.par_iter().map(|g| field.smooth_min_dist(g, params)).collect())
}

/// `d̂(M, M̄)` with the inner evaluations spread over the pool and one
/// serial reduction at the end.
pub fn smooth_mesh_dist_par(
    field: &Field,
    query: &SimplexMesh,
    params: &SmoothParams,
    pool: &rayon::ThreadPool,
) -> Result<smoothdist_core::smooth::MeshDistance, smoothdist_core::Error> {
    if query.is_empty() {
        return Err(smoothdist_core::Error::EmptyMesh);
    }
    let prims: Vec<Primitive> = query.primitives().collect();
    let per = evaluate_primitives(field, params, &prims, pool);
    Ok(smoothdist_core::smooth::combine_query_mesh(query, &per, params.alpha_q))
}
