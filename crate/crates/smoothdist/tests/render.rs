use smoothdist::batch::thread_pool;
use smoothdist::bench::{ablate_beta, grid_bench, pearson, write_ablation_csv};
use smoothdist::procedural;
use smoothdist::render::{displacement, parse_vec3, ray_box, trace, write_ppm, Camera, RenderConfig};
use smoothdist_core::prelude::*;

fn config(camera: Camera, size: usize, threshold: Option<f64>) -> RenderConfig {
    RenderConfig { camera, width: size, height: size, threshold, max_steps: 512 }
}

#[test]
fn mesh_behind_the_camera_is_background() {
    let field = Field::new(procedural::icosphere(1)).unwrap();
    let cam = Camera::parse("0,0,5:0,0,10", 40.0).unwrap();
    let img = trace(&field, &SmoothParams::new(20.0, 120.0), &config(cam, 16, None), &thread_pool(Some(1)));
    assert_eq!(img.hits(), 0);
    assert!(img.gray.iter().all(|&g| g == 0));
    assert_eq!(img.evaluations, 0);
}

#[test]
fn single_point_renders_a_disc() {
    let field = Field::new(SimplexMesh::point_cloud(vec![Vec3::zeros()]).unwrap()).unwrap();
    let cam = Camera::parse("0,0,3:0,0,0", 40.0).unwrap();
    let (n, r) = (64, 0.3);
    let img = trace(&field, &SmoothParams::new(50.0, 300.0), &config(cam, n, Some(r)), &thread_pool(Some(2)));
    // Steps of d̂ can pass through the rim of the shell, so the disc is
    // solid inside half the threshold and never extends past it.
    let mut inner = 0;
    for y in 0..n {
        for x in 0..n {
            // distance from the point to the ray line
            let perp = cam.origin.cross(&cam.ray(x, y, n, n)).norm();
            let hit = img.depth[y * n + x].is_some();
            assert!(!hit || perp < r, "pixel {x},{y}");
            if perp < 0.5 * r {
                assert!(hit, "pixel {x},{y}");
                inner += 1;
            }
        }
    }
    assert!(inner > 40, "{inner}");
}

#[test]
fn renders_do_not_depend_on_thread_count() {
    let field = Field::new(procedural::torus(1.0, 0.3, 16, 8, 0.1)).unwrap();
    let p = SmoothParams::new(30.0, 180.0).with_beta(0.3);
    let cfg = config(Camera::framing(&field.mesh().bounding_box(), 40.0), 24, None);
    let a = trace(&field, &p, &cfg, &thread_pool(Some(1)));
    let b = trace(&field, &p, &cfg, &thread_pool(Some(3)));
    assert_eq!(a.gray, b.gray);
    assert_eq!(a.depth, b.depth);
    assert!(a.hits() > 0);
    let mut ppm = Vec::new();
    write_ppm(&a, &mut ppm).unwrap();
    assert!(ppm.starts_with(b"P6\n24 24\n255\n"));
    assert_eq!(ppm.len(), 13 + 24 * 24 * 3);
}

#[test]
fn reference_row_of_an_ablation_has_no_error() {
    let field = Field::new(procedural::icosphere(2)).unwrap();
    let cfg = config(Camera::framing(&field.mesh().bounding_box(), 40.0), 16, None);
    let rows = ablate_beta(&field, &SmoothParams::new(40.0, 240.0), &[0.0, 0.5], &cfg, &thread_pool(Some(1))).unwrap();
    assert_eq!(rows[0].error.mean, 0.0);
    assert_eq!(rows[0].error.mismatched, 0);
    assert_eq!(rows[0].error.common_hits, rows[0].hits);
    assert!(rows[1].error.mean < 0.04);
    let mut csv = Vec::new();
    write_ablation_csv(&rows, &mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 3);
    assert!(ablate_beta(&field, &SmoothParams::new(40.0, 240.0), &[-1.0], &cfg, &thread_pool(Some(1))).is_err());
}

#[test]
fn displacement_counts_mismatches() {
    let field = Field::new(procedural::icosphere(1)).unwrap();
    let cfg = config(Camera::framing(&field.mesh().bounding_box(), 40.0), 8, None);
    let a = trace(&field, &SmoothParams::new(20.0, 120.0), &cfg, &thread_pool(Some(1)));
    let mut b = a.clone();
    let hit = b.depth.iter().position(Option::is_some).unwrap();
    b.depth[hit] = None;
    let d = displacement(&a, &b, 2.0);
    assert_eq!((d.mean, d.mismatched, d.common_hits), (0.0, 1, a.hits() - 1));
}

#[test]
fn tiny_grid_has_eight_rows() {
    let pool = thread_pool(Some(2));
    let g = grid_bench(&procedural::icosphere(1), &SmoothParams::new(20.0, 120.0), 2, &pool).unwrap();
    assert_eq!(g.rows.len(), 8);
    assert_eq!(g.slabs.len(), 2);
    assert!(g.rows.iter().enumerate().all(|(i, r)| r.index == i && r.d_hat.is_finite()));
    assert_eq!(g.total_leaves(), g.rows.iter().map(|r| r.leaves).sum::<u64>());

    // at high α the corners underflow
    let far = grid_bench(&procedural::icosphere(1), &SmoothParams::new(1e4, 6e4), 2, &pool).unwrap();
    assert!(far.rows.iter().all(|r| r.d_hat == f64::INFINITY));
    let mut csv = Vec::new();
    far.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "index,i,j,k,d_hat,leaves,far_field");
    assert!(text.lines().nth(8).unwrap().starts_with("7,1,1,1,inf,"));
    assert!(grid_bench(&procedural::icosphere(1), &SmoothParams::new(20.0, 120.0), 0, &pool).is_err());
}

#[test]
fn grid_csv_is_reproducible() {
    let pool = thread_pool(Some(3));
    let m = procedural::torus(1.0, 0.3, 12, 8, 0.0);
    let p = SmoothParams::new(30.0, 180.0).with_beta(0.5);
    let run = || {
        let mut out = Vec::new();
        grid_bench(&m, &p, 5, &pool).unwrap().write_csv(&mut out).unwrap();
        out
    };
    assert_eq!(run(), run());
}

#[test]
fn helpers() {
    assert_eq!(parse_vec3(" 1, -2.5,3e1").unwrap(), Vec3::new(1.0, -2.5, 30.0));
    assert!(parse_vec3("1,2").is_err() && parse_vec3("1,2,nan").is_err());
    assert!(Camera::parse("1,1,1:1,1,1", 40.0).is_err());
    let b = Aabb { min: Vec3::zeros(), max: Vec3::repeat(1.0) };
    assert_eq!(ray_box(&Vec3::new(-1.0, 0.5, 0.5), &Vec3::new(1.0, 0.0, 0.0), &b), Some((1.0, 2.0)));
    assert_eq!(ray_box(&Vec3::new(-1.0, 2.0, 0.5), &Vec3::new(1.0, 0.0, 0.0), &b), None);
    assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.5]) - 0.9986).abs() < 1e-3);
    let mut cfg = config(Camera::parse("0,0,3:0,0,0", 40.0).unwrap(), 0, None);
    assert!(cfg.validate().is_err());
    cfg.width = 4;
    cfg.height = 4;
    cfg.threshold = Some(0.0);
    assert!(cfg.validate().is_err());
    cfg.threshold = None;
    cfg.camera.fov_deg = 180.0;
    assert!(cfg.validate().is_err());
}
