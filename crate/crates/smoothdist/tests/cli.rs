use std::path::Path;
use std::process::{Command, Output};

use smoothdist::io::save_obj;
use smoothdist::procedural;
use smoothdist::report::{brute_force_d_hat, parse_primitive, query_report};
use smoothdist_core::prelude::*;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smoothdist"))
        .args(args)
        .env_remove("SMOOTHDIST_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_mesh(dir: &Path, name: &str, m: &SimplexMesh) -> String {
    let p = dir.join(name);
    save_obj(m, &p).unwrap();
    p.to_str().unwrap().to_string()
}

fn field_line(report: &str, key: &str) -> String {
    report.lines().find(|l| l.starts_with(key)).unwrap()[key.len()..].trim().to_string()
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.obj");
    let out = run(&["query", missing.to_str().unwrap(), "--at", "0,0,0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.obj"));

    let bad = dir.path().join("bad.obj");
    std::fs::write(&bad, "v 0 0 0\nv 1 0 0\nf 1 1 2\n").unwrap();
    assert_eq!(run(&["query", bad.to_str().unwrap(), "--at", "0,0,0"]).status.code(), Some(1));

    let m = write_mesh(dir.path(), "ico.obj", &procedural::icosphere(0));
    assert_eq!(run(&["query", &m, "--at", "0,0"]).status.code(), Some(1));
    assert_eq!(run(&["query", &m, "--at", "0,0,0", "--alpha=-1"]).status.code(), Some(1));
    let out = dir.path().join("x.ppm");
    assert_eq!(run(&["trace", &m, "--size", "0x4", "--out", out.to_str().unwrap()]).status.code(), Some(1));
    assert!(!run(&["no-such-command"]).status.success());
}

#[test]
fn query_exact_matches_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_mesh(dir.path(), "torus.obj", &procedural::torus(1.0, 0.3, 16, 10, 0.0));
    let text = ok(&["query", &m, "--at", "1.2,0.5,0.1", "--alpha", "25", "--exact"]);
    let d_hat: f64 = field_line(&text, "d_hat").parse().unwrap();
    let brute: f64 = field_line(&text, "brute_force").parse().unwrap();
    assert!((d_hat - brute).abs() <= 1e-12 * brute.abs().max(1.0), "{text}");
    assert!(field_line(&text, "gap").parse::<f64>().unwrap() >= 0.0);

    let on_vertex = ok(&["query", &m, "--at", "1.3,0,0", "--alpha", "25"]);
    assert_eq!(field_line(&on_vertex, "d_min").parse::<f64>().unwrap(), 0.0);
    assert!(field_line(&on_vertex, "d_hat").parse::<f64>().unwrap() <= 0.0);

    let far = ok(&["query", &m, "--at", "50,0,0", "--alpha", "1000"]);
    assert_eq!(field_line(&far, "d_hat"), "inf");
}

#[test]
fn report_agrees_with_brute_force_for_all_query_kinds() {
    let field = Field::new(procedural::icosphere(2)).unwrap();
    let params = SmoothParams::new(15.0, 90.0);
    for at in ["0.2,1.5,0", "0,0,1.4;0.3,0.4,1.6", "1.5,0,0;0,1.5,0;0,0,1.5"] {
        let g = parse_primitive(at).unwrap();
        let r = query_report(&field, &g, &params, true);
        let b = brute_force_d_hat(&field, &g, &params);
        assert_eq!(r.brute_force, Some(b));
        assert!((r.result.d_hat - b).abs() < 1e-12);
        assert!(r.result.d_hat <= r.d_min);
    }
    assert!(parse_primitive("0,0,0;0,0,0").is_err());
    assert!(parse_primitive("0,0,0;1,0,0;2,0,0").is_err());
    assert!(parse_primitive("0,0,0;1,0,0;0,1,0;0,0,1").is_err());
}

#[test]
fn trace_is_bit_identical_on_one_thread() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_mesh(dir.path(), "ico.obj", &procedural::icosphere(2));
    let render = |name: &str| {
        let p = dir.path().join(name);
        ok(&["--threads", "1", "trace", &m, "--alpha", "30", "--beta", "0.3", "--size", "32x24", "--out", p.to_str().unwrap()]);
        std::fs::read(p).unwrap()
    };
    let a = render("a.ppm");
    assert_eq!(a, render("b.ppm"));
    assert!(a.starts_with(b"P6\n32 24\n255\n"));
    assert!(a[13..].iter().any(|&g| g > 0));

    let png = dir.path().join("c.png");
    ok(&["trace", &m, "--alpha", "30", "--size", "8x8", "--out", png.to_str().unwrap()]);
    assert!(std::fs::read(png).unwrap().starts_with(b"\x89PNG"));
}

#[test]
fn grid_bench_writes_rows_and_slabs() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_mesh(dir.path(), "ico.obj", &procedural::icosphere(1));
    let out = dir.path().join("grid.csv");
    let bench = |threads: &str| {
        ok(&["--threads", threads, "grid-bench", &m, "--alpha", "40", "--grid", "3", "--out", out.to_str().unwrap()]);
        std::fs::read_to_string(&out).unwrap()
    };
    let a = bench("1");
    assert_eq!(a.lines().count(), 1 + 27);
    assert_eq!(a, bench("1"));
    assert_eq!(a, bench("4"));
    let slabs = std::fs::read_to_string(dir.path().join("grid.slabs.csv")).unwrap();
    assert_eq!(slabs.lines().count(), 1 + 3);
}

#[test]
fn ablate_writes_one_row_per_beta() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_mesh(dir.path(), "ico.obj", &procedural::icosphere(2));
    let out = dir.path().join("ab.csv");
    ok(&["ablate", &m, "--alpha", "30", "--size", "16x16", "--betas", "0,0.2,0.5", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("0,"));
    assert_eq!(run(&["ablate", &m, "--betas", "0,x", "--out", out.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn demo_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo.csv");
    ok(&["demo", "--steps", "0", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "t,x,y,z,vx,vy,vz,constraint,iterations");
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("0.0,"));

    ok(&["demo", "--scenario", "shallow", "--mode", "exact", "--steps", "50", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 52);
    assert_eq!(run(&["demo", "--dt", "0", "--out", out.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn gen_writes_loadable_meshes() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["gen", "icosphere", "--level", "1"],
        vec!["gen", "torus", "--nu", "8", "--nv", "6", "--bumps", "0.1"],
        vec!["gen", "mixed", "--seed", "4"],
        vec!["gen", "bowl", "--scenario", "shallow"],
    ] {
        let p = dir.path().join(format!("{}.obj", args[1]));
        let mut a = args.clone();
        a.extend(["--out", p.to_str().unwrap()]);
        ok(&a);
        let m = smoothdist::io::load_mesh(&p, None).unwrap();
        assert!(!m.is_empty());
    }
    assert_eq!(run(&["gen", "icosphere"]).status.code(), Some(1));
}
