use smoothdist_core::demo::*;
use smoothdist_core::prelude::*;

fn bowl(s: Scenario, mode: ConstraintMode) -> BowlConstraint {
    BowlConstraint::new(v_bowl(s.wall_angle_deg(), WALL_LENGTH), SmoothParams::new(DEMO_ALPHA, DEMO_ALPHA_U), mode).unwrap()
}

#[test]
fn free_fall_takes_the_unconstrained_step() {
    let cons = bowl(Scenario::Deep, ConstraintMode::Smooth);
    let state = DemoState {
        position: Vec3::new(0.0, 10.0, 0.0),
        velocity: Vec3::new(0.3, -1.0, 0.0),
        h: 0.01,
        gravity: Vec3::new(0.0, -GRAVITY, 0.0),
    };
    let out = step(&state, &cons, &SolverConfig::default());
    let expected = state.position + state.velocity * 0.01 + state.gravity * 1e-4;
    assert_eq!(out.state.position, expected);
    assert_eq!(out.iterations, 0);
    assert!((out.state.velocity - (expected - state.position) / 0.01).norm() < 1e-15);
}

#[test]
fn free_fall_energy_drift_is_first_order() {
    let cons = bowl(Scenario::Deep, ConstraintMode::Smooth);
    let h = 1e-3;
    let mut s = DemoState { position: Vec3::new(0.0, 50.0, 0.0), velocity: Vec3::zeros(), h, gravity: Vec3::new(0.0, -GRAVITY, 0.0) };
    let energy = |s: &DemoState| 0.5 * s.velocity.norm_squared() + GRAVITY * s.position.y;
    for _ in 0..500 {
        let e0 = energy(&s);
        s = step(&s, &cons, &SolverConfig::default()).state;
        assert!((energy(&s) - e0).abs() <= 20.0 * h);
    }
}

#[test]
fn zero_steps_give_the_initial_row() {
    let rows = run_demo(Scenario::Shallow, ConstraintMode::Smooth, 0, DEMO_DT).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].t, 0.0);
    assert_eq!(rows[0].position, initial_state(Scenario::Shallow, DEMO_DT).position);
    assert!(run_demo(Scenario::Shallow, ConstraintMode::Smooth, 1, 0.0).is_err());
}

#[test]
fn smooth_shallow_bowl_stays_feasible() {
    let rows = run_demo(Scenario::Shallow, ConstraintMode::Smooth, 400, DEMO_DT).unwrap();
    assert!(rows.iter().all(|r| r.constraint >= 0.0));
    assert!(rows.iter().all(|r| r.position.z == 0.0));
}

#[test]
fn settles_on_a_flat_floor() {
    // Unsigned distance has no shell over a lone edge, so a falling mass can
    // step straight through it. Over the shared vertex of two edges the shell
    // is ln 2 / α thick, wider than one step at impact speed.
    let floor = SimplexMesh::new(
        vec![Vec3::new(-5.0, 0.0, 0.0), Vec3::zeros(), Vec3::new(5.0, 0.0, 0.0)],
        vec![Simplex::Edge([0, 1]), Simplex::Edge([1, 2])],
    )
    .unwrap();
    let cons = BowlConstraint::new(floor, SmoothParams::new(DEMO_ALPHA, DEMO_ALPHA_U), ConstraintMode::Smooth).unwrap();
    let mut s = DemoState { position: Vec3::new(0.0, 0.3, 0.0), velocity: Vec3::zeros(), h: DEMO_DT, gravity: Vec3::new(0.0, -GRAVITY, 0.0) };
    for _ in 0..400 {
        let out = step(&s, &cons, &SolverConfig::default());
        assert!(out.constraint >= -1e-12);
        s = out.state;
    }
    assert!(s.velocity.y.abs() < 1e-6, "{}", s.velocity.y);
}

#[test]
fn exact_and_smooth_diverge_after_contact() {
    let exact = run_demo(Scenario::Deep, ConstraintMode::Exact, 300, DEMO_DT).unwrap();
    let smooth = run_demo(Scenario::Deep, ConstraintMode::Smooth, 300, DEMO_DT).unwrap();
    let contact = |rows: &[DemoRow]| rows.iter().position(|r| r.iterations > 0).unwrap();
    let first_contact = contact(&exact).min(contact(&smooth));
    assert!(first_contact > 0);
    // identical free fall until then
    assert_eq!(exact[first_contact - 1].position, smooth[first_contact - 1].position);
    let apart = exact.iter().zip(&smooth).skip(first_contact).map(|(a, b)| (a.position - b.position).norm()).fold(0.0, f64::max);
    assert!(apart > 0.05);
}

#[test]
fn exact_constraint_is_offset_minimum_distance() {
    let cons = bowl(Scenario::Shallow, ConstraintMode::Exact);
    assert_eq!(cons.mode(), ConstraintMode::Exact);
    let (c, g) = cons.eval(&Vec3::new(0.0, -1.0, 0.0));
    assert!((c - (1.0 - 1.0 / DEMO_ALPHA)).abs() < 1e-15);
    assert!((g - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-15);
}
