//! Grid benchmark and β ablation.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use smoothdist_core::prelude::*;

use crate::render::{displacement, trace, Displacement, RenderConfig, Rendered};

/// One voxel-center evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridRow {
    /// Linear index `i + n (j + n k)`.
    pub index: usize,
    /// `d̂` at the voxel center.
    pub d_hat: f64,
    /// Leaves visited.
    pub leaves: u64,
    /// Far-field expansions used.
    pub far_field: u64,
}

/// Totals for one z-slab of the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlabRow {
    /// Slab index `k`.
    pub slab: usize,
    /// Sum of leaves visited in the slab.
    pub leaves: u64,
    /// Wall time spent evaluating the slab.
    pub seconds: f64,
}

/// Output of [`grid_bench`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridBench {
    /// Grid resolution per axis.
    pub resolution: usize,
    /// One row per voxel, in index order.
    pub rows: Vec<GridRow>,
    /// One row per z-slab.
    pub slabs: Vec<SlabRow>,
    /// Time to build tree and weights for the normalized mesh.
    pub build_seconds: f64,
    /// Wall time of all queries.
    pub query_seconds: f64,
}

impl GridBench {
    /// Leaves visited over the whole grid.
    pub fn total_leaves(&self) -> u64 {
        self.slabs.iter().map(|s| s.leaves).sum()
    }

    /// Summed per-slab evaluation time. Unlike `query_seconds` this does
    /// not depend on how slabs were scheduled.
    pub fn slab_seconds(&self) -> f64 {
        self.slabs.iter().map(|s| s.seconds).sum()
    }

    /// Writes `index,i,j,k,d_hat,leaves,far_field`. Timing is left out so the
    /// file is reproducible; see [`write_slab_csv`](Self::write_slab_csv).
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let n = self.resolution;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "i", "j", "k", "d_hat", "leaves", "far_field"])?;
        for r in &self.rows {
            let (i, j, k) = (r.index % n, (r.index / n) % n, r.index / (n * n));
            out.write_record([
                r.index.to_string(),
                i.to_string(),
                j.to_string(),
                k.to_string(),
                fmt_f64(r.d_hat),
                r.leaves.to_string(),
                r.far_field.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Writes `slab,leaves,seconds`.
    pub fn write_slab_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["slab", "leaves", "seconds"])?;
        for s in &self.slabs {
            out.write_record([s.slab.to_string(), s.leaves.to_string(), s.seconds.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Normalizes `mesh` to the benchmark frame and evaluates `d̂` at the
/// `n³` voxel centers of `[0, 1]³`, one z-slab per task.
pub fn grid_bench(mesh: &SimplexMesh, params: &SmoothParams, n: usize, pool: &rayon::ThreadPool) -> Result<GridBench, smoothdist_core::Error> {
    if n == 0 {
        return Err(smoothdist_core::Error::InvalidParameter("grid resolution must be at least 1".into()));
    }
    params.validate()?;
    let start = Instant::now();
    let field = Field::new(mesh.normalize_to_benchmark_frame()?)?;
    let build_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let per_slab: Vec<(Vec<GridRow>, SlabRow)> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|k| {
                let t = Instant::now();
                let mut rows = Vec::with_capacity(n * n);
                let mut leaves = 0;
                for j in 0..n {
                    for i in 0..n {
                        let c = |x: usize| (x as f64 + 0.5) / n as f64;
                        let p = Vec3::new(c(i), c(j), c(k));
                        let (d_hat, st) = field.smooth_min_value(&Primitive::point(p), params);
                        leaves += st.leaves;
                        rows.push(GridRow { index: i + n * (j + n * k), d_hat, leaves: st.leaves, far_field: st.far_field });
                    }
                }
                (rows, SlabRow { slab: k, leaves, seconds: t.elapsed().as_secs_f64() })
            })
            .collect()
    });
    let query_seconds = start.elapsed().as_secs_f64();
    let mut rows = Vec::with_capacity(n * n * n);
    let mut slabs = Vec::with_capacity(n);
    for (r, s) in per_slab {
        rows.extend(r);
        slabs.push(s);
    }
    Ok(GridBench { resolution: n, rows, slabs, build_seconds, query_seconds })
}

/// One β of an ablation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AblationRow {
    /// Barnes-Hut accuracy.
    pub beta: f64,
    /// Render wall time.
    pub seconds: f64,
    /// Mean leaves visited per pixel.
    pub leaves_per_pixel: f64,
    /// Pixels that hit the isosurface.
    pub hits: usize,
    /// Displacement relative to the β = 0 render.
    pub error: Displacement,
}

/// Renders the same view at `β = 0` and at each listed β, and compares hit
/// depths ray by ray. The reference render is reused for a β of zero.
pub fn ablate_beta(
    field: &Field,
    params: &SmoothParams,
    betas: &[f64],
    cfg: &RenderConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<AblationRow>, smoothdist_core::Error> {
    for &b in betas {
        params.with_beta(b).validate()?;
    }
    let diag = field.mesh().bounding_box().diagonal().max(f64::MIN_POSITIVE);
    let reference = trace(field, &params.with_beta(0.0), cfg, pool);
    let row = |beta: f64, img: &Rendered| AblationRow {
        beta,
        seconds: img.seconds,
        leaves_per_pixel: img.mean_leaves_per_pixel(),
        hits: img.hits(),
        error: displacement(img, &reference, diag),
    };
    Ok(betas
        .iter()
        .map(|&b| {
            if b == 0.0 {
                row(b, &reference)
            } else {
                row(b, &trace(field, &params.with_beta(b), cfg, pool))
            }
        })
        .collect())
}

/// Writes `beta,seconds,leaves_per_pixel,hits,mean_error,max_error,common_hits,mismatched`.
pub fn write_ablation_csv<W: Write>(rows: &[AblationRow], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["beta", "seconds", "leaves_per_pixel", "hits", "mean_error", "max_error", "common_hits", "mismatched"])?;
    for r in rows {
        out.write_record([
            r.beta.to_string(),
            r.seconds.to_string(),
            r.leaves_per_pixel.to_string(),
            r.hits.to_string(),
            r.error.mean.to_string(),
            r.error.max.to_string(),
            r.error.common_hits.to_string(),
            r.error.mismatched.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Round-trip float formatting with `inf` for the underflow case.
pub fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x:?}")
    }
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}
