//! Sphere tracing of the `d̂ = threshold` isosurface.
//!
//! Rays start where they enter the mesh box grown by the widest possible
//! shell, advance by `max(d̂, min_step)` and stop at the first sample with
//! `d̂ < threshold`. Hits are shaded by the gradient used as a normal.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use smoothdist_core::prelude::*;

/// Pinhole camera.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    /// Eye position.
    pub origin: Vec3,
    /// Point looked at.
    pub target: Vec3,
    /// Approximate up direction.
    pub up: Vec3,
    /// Vertical field of view in degrees.
    pub fov_deg: f64,
}

impl Camera {
    /// Looks at the box center from direction `(1, 0.7, 1.3)`, far enough
    /// that the whole box fits the view.
    pub fn framing(bbox: &Aabb, fov_deg: f64) -> Self {
        let c = bbox.center();
        let r = 0.5 * bbox.diagonal().max(1e-9);
        let dist = r / (0.5 * fov_deg.to_radians()).sin() * 1.05;
        let dir = Vec3::new(1.0, 0.7, 1.3).normalize();
        Self { origin: c + dir * dist, target: c, up: Vec3::new(0.0, 1.0, 0.0), fov_deg }
    }

    /// Parses `"ox,oy,oz:tx,ty,tz"`.
    pub fn parse(s: &str, fov_deg: f64) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or("camera must look like 'ox,oy,oz:tx,ty,tz'")?;
        let origin = parse_vec3(a)?;
        let target = parse_vec3(b)?;
        if (target - origin).norm() == 0.0 {
            return Err("camera origin and target coincide".into());
        }
        Ok(Self { origin, target, up: Vec3::new(0.0, 1.0, 0.0), fov_deg })
    }

    /// Unit ray direction through the center of pixel `(x, y)`.
    pub fn ray(&self, x: usize, y: usize, width: usize, height: usize) -> Vec3 {
        let fwd = (self.target - self.origin).normalize();
        let mut right = fwd.cross(&self.up);
        if right.norm() < 1e-12 {
            right = fwd.cross(&Vec3::new(1.0, 0.0, 0.0));
        }
        let right = right.normalize();
        let up = right.cross(&fwd);
        let h = (0.5 * self.fov_deg.to_radians()).tan();
        let aspect = width as f64 / height as f64;
        let px = ((x as f64 + 0.5) / width as f64 * 2.0 - 1.0) * h * aspect;
        let py = (1.0 - (y as f64 + 0.5) / height as f64 * 2.0) * h;
        (fwd + right * px + up * py).normalize()
    }
}

/// Parses `"x,y,z"`.
pub fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number '{}'", t.trim())))
        .collect::<Result<_, _>>()?;
    if v.len() != 3 {
        return Err(format!("expected 3 comma-separated numbers, got '{s}'"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(format!("non-finite coordinate in '{s}'"));
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

/// Image and marching settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderConfig {
    /// The camera.
    pub camera: Camera,
    /// Image width in pixels.
    pub width: usize,
    /// Image height in pixels.
    pub height: usize,
    /// Hit threshold in model units; `None` means `1e-3 ·` bbox diagonal.
    pub threshold: Option<f64>,
    /// Marching steps per ray before giving up.
    pub max_steps: usize,
}

impl RenderConfig {
    /// Checks the documented ranges.
    pub fn validate(&self) -> Result<(), String> {
        if self.width == 0 || self.height == 0 {
            return Err("image size must be at least 1x1".into());
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0 && t.is_finite()) {
                return Err("threshold must be positive".into());
            }
        }
        if self.max_steps == 0 {
            return Err("max steps must be at least 1".into());
        }
        let c = &self.camera;
        if !(c.origin.iter().chain(c.target.iter()).all(|x| x.is_finite()) && c.fov_deg > 0.0 && c.fov_deg < 180.0) {
            return Err("camera must be finite with a field of view in (0, 180)".into());
        }
        Ok(())
    }
}

/// Result of tracing one image.
#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    /// Width in pixels.
    pub width: usize,
    /// Height in pixels.
    pub height: usize,
    /// Row-major gray levels.
    pub gray: Vec<u8>,
    /// Ray parameter of the hit per pixel, `None` for misses.
    pub depth: Vec<Option<f64>>,
    /// Total field evaluations.
    pub evaluations: u64,
    /// Leaves visited over all evaluations.
    pub leaves: u64,
    /// Far-field expansions over all evaluations.
    pub far_field: u64,
    /// Wall time of the trace.
    pub seconds: f64,
}

impl Rendered {
    /// Mean leaves visited per pixel.
    pub fn mean_leaves_per_pixel(&self) -> f64 {
        self.leaves as f64 / (self.width * self.height) as f64
    }

    /// Number of pixels that hit the isosurface.
    pub fn hits(&self) -> usize {
        self.depth.iter().filter(|d| d.is_some()).count()
    }
}

struct PixelOut {
    gray: u8,
    depth: Option<f64>,
    evals: u64,
    leaves: u64,
    far: u64,
}

/// Marches one ray per pixel. Rows are distributed over `pool`.
pub fn trace(field: &Field, params: &SmoothParams, cfg: &RenderConfig, pool: &rayon::ThreadPool) -> Rendered {
    let bbox = field.mesh().bounding_box();
    let diag = bbox.diagonal();
    let threshold = cfg.threshold.unwrap_or(1e-3 * diag.max(1e-12));
    let min_step = 0.1 * threshold;
    let s = params.attenuation();
    let n = field.mesh().len() as f64;
    let spread = (field.weights().far_weight(s) * n).ln().max(0.0) / params.alpha;
    // every hit lies within this distance of the mesh box
    let margin = threshold + spread + min_step;
    let grown = Aabb { min: bbox.min - Vec3::repeat(margin), max: bbox.max + Vec3::repeat(margin) };
    // when c underflows every primitive is farther than 745/α; back off by
    // the shell spread so the step cannot jump over a hit
    let underflow_step = ((740.0 / params.alpha) - spread - threshold).max(min_step);

    let start = Instant::now();
    let (w, h) = (cfg.width, cfg.height);
    let pixels: Vec<PixelOut> = pool.install(|| {
        (0..w * h)
            .into_par_iter()
            .with_min_len(w)
            .map(|i| {
                let (x, y) = (i % w, i / w);
                let dir = cfg.camera.ray(x, y, w, h);
                march(field, params, &cfg.camera.origin, &dir, &grown, threshold, min_step, underflow_step, cfg.max_steps)
            })
            .collect()
    });
    let seconds = start.elapsed().as_secs_f64();
    let mut out = Rendered {
        width: w,
        height: h,
        gray: Vec::with_capacity(w * h),
        depth: Vec::with_capacity(w * h),
        evaluations: 0,
        leaves: 0,
        far_field: 0,
        seconds,
    };
    for p in pixels {
        out.gray.push(p.gray);
        out.depth.push(p.depth);
        out.evaluations += p.evals;
        out.leaves += p.leaves;
        out.far_field += p.far;
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn march(
    field: &Field,
    params: &SmoothParams,
    origin: &Vec3,
    dir: &Vec3,
    bbox: &Aabb,
    threshold: f64,
    min_step: f64,
    underflow_step: f64,
    max_steps: usize,
) -> PixelOut {
    let mut out = PixelOut { gray: 0, depth: None, evals: 0, leaves: 0, far: 0 };
    let Some((t0, t1)) = ray_box(origin, dir, bbox) else {
        return out;
    };
    let mut t = t0.max(0.0);
    for _ in 0..max_steps {
        if t > t1 {
            break;
        }
        let p = origin + dir * t;
        let (d, st) = field.smooth_min_value(&Primitive::point(p), params);
        out.evals += 1;
        out.leaves += st.leaves;
        out.far += st.far_field;
        if d < threshold {
            let r = field.smooth_min_dist(&Primitive::point(p), params);
            let n = r.grad.try_normalize(1e-300).unwrap_or_else(|| -dir);
            let shade = 0.15 + 0.85 * n.dot(dir).abs();
            out.gray = (shade * 255.0).round().clamp(0.0, 255.0) as u8;
            out.depth = Some(t);
            return out;
        }
        t += if d.is_finite() { d.max(min_step) } else { underflow_step };
    }
    out
}

/// Entry and exit parameters of a ray through a box (slab method).
pub fn ray_box(o: &Vec3, d: &Vec3, b: &Aabb) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for a in 0..3 {
        if d[a] == 0.0 {
            if o[a] < b.min[a] || o[a] > b.max[a] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d[a];
        let (mut ta, mut tb) = ((b.min[a] - o[a]) * inv, (b.max[a] - o[a]) * inv);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
    }
    (t0 <= t1 && t1 >= 0.0).then_some((t0, t1))
}

/// Writes a binary PPM (P6) with equal RGB channels.
pub fn write_ppm<W: Write>(img: &Rendered, mut w: W) -> std::io::Result<()> {
    write!(w, "P6\n{} {}\n255\n", img.width, img.height)?;
    let mut rgb = Vec::with_capacity(img.gray.len() * 3);
    for &g in &img.gray {
        rgb.extend_from_slice(&[g, g, g]);
    }
    w.write_all(&rgb)
}

/// Writes a PPM or PNG depending on the extension of `path`.
pub fn save_image(img: &Rendered, path: &Path) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let ext = path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase());
    if ext.as_deref() == Some("png") {
        image::GrayImage::from_raw(img.width as u32, img.height as u32, img.gray.clone())
            .ok_or("image buffer size mismatch")?
            .save_with_format(path, image::ImageFormat::Png)?;
    } else {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_ppm(img, &mut f)?;
        f.flush()?;
    }
    Ok(())
}

/// Displacement of each β render from a reference along identical rays.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Displacement {
    /// Mean `|t − t_ref|` over rays that hit in both, divided by the bbox diagonal.
    pub mean: f64,
    /// Largest such value.
    pub max: f64,
    /// Rays that hit in both renders.
    pub common_hits: usize,
    /// Rays that hit in exactly one of the two renders.
    pub mismatched: usize,
}

/// Compares two renders of the same camera.
pub fn displacement(img: &Rendered, reference: &Rendered, diag: f64) -> Displacement {
    let (mut sum, mut max, mut common, mut mismatched) = (0.0, 0.0f64, 0, 0);
    for (a, b) in img.depth.iter().zip(&reference.depth) {
        match (a, b) {
            (Some(a), Some(b)) => {
                let e = (a - b).abs() / diag;
                sum += e;
                max = max.max(e);
                common += 1;
            }
            (None, None) => {}
            _ => mismatched += 1,
        }
    }
    Displacement { mean: if common > 0 { sum / common as f64 } else { 0.0 }, max, common_hits: common, mismatched }
}
