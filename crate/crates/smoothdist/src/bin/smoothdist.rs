use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use smoothdist::bench::{ablate_beta, grid_bench, write_ablation_csv};
use smoothdist::io::{load_mesh, save_obj, Format};
use smoothdist::render::{save_image, trace, Camera, RenderConfig};
use smoothdist::report::{parse_primitive, query_report, write_demo_csv};
use smoothdist::{batch, procedural};
use smoothdist_core::demo::{self, ConstraintMode, Scenario};
use smoothdist_core::prelude::*;
use smoothdist_core::smooth::alpha_heuristic;

#[derive(Parser)]
#[command(name = "smoothdist", version, about = "Conservative smooth distance fields over points, edges and triangles")]
struct Cli {
    /// Worker threads (default: SMOOTHDIST_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sphere-trace the isosurface of d̂ to a PPM or PNG image.
    Trace {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        view: ViewArgs,
        /// Output image (.ppm or .png).
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate d̂ at the voxel centers of an N³ grid over the normalized mesh.
    GridBench {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        field: FieldArgs,
        /// Grid resolution per axis.
        #[arg(long, default_value_t = 100)]
        grid: usize,
        /// Output CSV; per-slab timings go to the same path with `.slabs.csv`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render at several β and compare hit depths with β = 0.
    Ablate {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        view: ViewArgs,
        /// Comma-separated β values.
        #[arg(long, default_value = "0,0.1,0.2,0.3,0.4,0.5")]
        betas: String,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print d̂, its gradient and the exact distance for one query.
    Query {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        field: FieldArgs,
        /// Query vertices: "x,y,z", "x,y,z;x,y,z" or three groups.
        #[arg(long)]
        at: String,
        /// Also sum every primitive directly and compare.
        #[arg(long)]
        exact: bool,
    },
    /// Drop a point mass into a V-shaped bowl and write its trajectory.
    Demo {
        #[arg(long, value_enum, default_value_t = ScenarioArg::Deep)]
        scenario: ScenarioArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Smooth)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = demo::DEMO_DT)]
        dt: f64,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a generated mesh as OBJ.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Output OBJ.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Subdivided icosahedron.
    Icosphere {
        #[arg(long, default_value_t = 3)]
        level: u32,
    },
    /// Torus with optional surface ripples.
    Torus {
        #[arg(long, default_value_t = 60)]
        nu: usize,
        #[arg(long, default_value_t = 60)]
        nv: usize,
        #[arg(long, default_value_t = 0.0)]
        bumps: f64,
    },
    /// Random mix of triangles, edges and points.
    Mixed {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_prims: usize,
    },
    /// One of the demo bowls.
    Bowl {
        #[arg(long, value_enum, default_value_t = ScenarioArg::Deep)]
        scenario: ScenarioArg,
    },
}

#[derive(Args)]
struct MeshArgs {
    /// Input mesh (OBJ, XYZ or PLY).
    mesh: PathBuf,
    /// Override the format implied by the extension.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct FieldArgs {
    /// Accuracy α (default: 1 / shortest edge).
    #[arg(long)]
    alpha: Option<f64>,
    /// Attenuation threshold α_U (default: 6α).
    #[arg(long)]
    alpha_u: Option<f64>,
    /// Barnes-Hut accuracy β.
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Accuracy over query primitives for mesh-to-mesh distances.
    #[arg(long)]
    alpha_q: Option<f64>,
}

#[derive(Args)]
struct ViewArgs {
    /// Camera as "ox,oy,oz:tx,ty,tz" (default: frame the mesh).
    #[arg(long)]
    camera: Option<String>,
    /// Vertical field of view in degrees.
    #[arg(long, default_value_t = 40.0)]
    fov: f64,
    /// Image size as WxH.
    #[arg(long, default_value = "256x256")]
    size: String,
    /// Hit threshold (default: 1e-3 of the bbox diagonal).
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, default_value_t = 512)]
    max_steps: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Obj,
    Xyz,
    Ply,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Shallow,
    Deep,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Smooth,
}

impl MeshArgs {
    fn load(&self) -> Result<SimplexMesh> {
        let fmt = self.format.map(|f| match f {
            FormatArg::Obj => Format::Obj,
            FormatArg::Xyz => Format::Xyz,
            FormatArg::Ply => Format::Ply,
        });
        load_mesh(&self.mesh, fmt).with_context(|| format!("loading {}", self.mesh.display()))
    }
}

impl FieldArgs {
    fn params(&self, mesh: &SimplexMesh) -> Result<SmoothParams> {
        let alpha = match self.alpha {
            Some(a) => a,
            None => {
                let h = alpha_heuristic(mesh)?;
                if let Some(w) = h.warning {
                    log::warn!("{w}");
                }
                h.alpha
            }
        };
        let alpha_u = self.alpha_u.unwrap_or(smoothdist_core::smooth::ALPHA_U_RATIO * alpha);
        let mut p = SmoothParams::new(alpha, alpha_u).with_beta(self.beta);
        if let Some(q) = self.alpha_q {
            p = p.with_alpha_q(q);
        }
        p.validate()?;
        log::info!("alpha {} alpha_u {} beta {}", p.alpha, p.alpha_u, p.beta);
        Ok(p)
    }
}

impl ViewArgs {
    fn config(&self, bbox: &Aabb) -> Result<RenderConfig> {
        let (w, h) = self.size.split_once(['x', 'X']).context("size must look like WxH")?;
        let camera = match &self.camera {
            Some(s) => Camera::parse(s, self.fov).map_err(anyhow::Error::msg)?,
            None => Camera::framing(bbox, self.fov),
        };
        let cfg = RenderConfig {
            camera,
            width: w.trim().parse().context("bad image width")?,
            height: h.trim().parse().context("bad image height")?,
            threshold: self.threshold,
            max_steps: self.max_steps,
        };
        cfg.validate().map_err(anyhow::Error::msg)?;
        Ok(cfg)
    }
}

fn scenario(s: ScenarioArg) -> Scenario {
    match s {
        ScenarioArg::Shallow => Scenario::Shallow,
        ScenarioArg::Deep => Scenario::Deep,
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Trace { mesh, field, view, out } => {
            let m = mesh.load()?;
            let params = field.params(&m)?;
            let cfg = view.config(&m.bounding_box())?;
            let pool = batch::thread_pool(cli.threads);
            let f = Field::new(m)?;
            let img = trace(&f, &params, &cfg, &pool);
            save_image(&img, &out).map_err(|e| anyhow::anyhow!("writing {}: {e}", out.display()))?;
            println!(
                "time {:.3} s, hits {}, mean leaves per pixel {:.2}, far-field {}",
                img.seconds,
                img.hits(),
                img.mean_leaves_per_pixel(),
                img.far_field
            );
        }
        Cmd::GridBench { mesh, field, grid, out } => {
            let m = mesh.load()?;
            let params = field.params(&m.normalize_to_benchmark_frame()?)?;
            let pool = batch::thread_pool(cli.threads);
            let g = grid_bench(&m, &params, grid, &pool)?;
            g.write_csv(create(&out)?)?;
            g.write_slab_csv(create(&out.with_extension("slabs.csv"))?)?;
            println!(
                "build {:.3} s, queries {:.3} s, leaves {}",
                g.build_seconds,
                g.query_seconds,
                g.total_leaves()
            );
        }
        Cmd::Ablate { mesh, field, view, betas, out } => {
            let m = mesh.load()?;
            let params = field.params(&m)?;
            let cfg = view.config(&m.bounding_box())?;
            let betas: Vec<f64> = betas
                .split(',')
                .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad beta '{s}'")))
                .collect::<Result<_>>()?;
            let pool = batch::thread_pool(cli.threads);
            let f = Field::new(m)?;
            let rows = ablate_beta(&f, &params, &betas, &cfg, &pool)?;
            write_ablation_csv(&rows, create(&out)?)?;
            for r in &rows {
                println!("beta {} time {:.3} s mean error {:.3e} max error {:.3e}", r.beta, r.seconds, r.error.mean, r.error.max);
            }
        }
        Cmd::Query { mesh, field, at, exact } => {
            let m = mesh.load()?;
            let params = field.params(&m)?;
            let g = parse_primitive(&at).map_err(anyhow::Error::msg)?;
            let f = Field::new(m)?;
            println!("{}", query_report(&f, &g, &params, exact));
        }
        Cmd::Demo { scenario: s, mode, steps, dt, out } => {
            let mode = match mode {
                ModeArg::Exact => ConstraintMode::Exact,
                ModeArg::Smooth => ConstraintMode::Smooth,
            };
            let rows = demo::run_demo(scenario(s), mode, steps, dt)?;
            write_demo_csv(&rows, create(&out)?)?;
            let min_c = rows.iter().map(|r| r.constraint).fold(f64::INFINITY, f64::min);
            println!("{} rows, smallest constraint {min_c:e}", rows.len());
        }
        Cmd::Gen { kind, out } => {
            let Some(out) = out else { bail!("--out is required") };
            let m = match kind {
                GenKind::Icosphere { level } => {
                    if level > 7 {
                        bail!("level above 7 is too large");
                    }
                    procedural::icosphere(level)
                }
                GenKind::Torus { nu, nv, bumps } => {
                    if nu < 3 || nv < 3 {
                        bail!("torus needs at least 3 segments each way");
                    }
                    procedural::torus(1.0, 0.3, nu, nv, bumps)
                }
                GenKind::Mixed { seed, max_prims } => {
                    procedural::random_mixed(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed), max_prims)
                }
                GenKind::Bowl { scenario: s } => demo::v_bowl(scenario(s).wall_angle_deg(), demo::WALL_LENGTH),
            };
            save_obj(&m, &out)?;
            println!("{} simplices", m.len());
        }
    }
    Ok(())
}
