//! A point mass dropped into a V-shaped bowl, stepped with implicit Euler
//! under a single distance constraint.
//!
//! Each step solves `min ½‖p − p̃‖²` with `p̃ = p + h v + h² g` subject to
//! `c(p) >= 0`, using a primal-dual interior-point method whose primal
//! Hessian block is the identity. Every iterate stays strictly feasible.
//! The bowl is an edge mesh in the `z = 0` plane and the motion stays in
//! that plane.

use alloc::vec::Vec;

use crate::exact_dist::simplex_distance;
use crate::geom::{Primitive, Vec3};
use crate::mesh::{Simplex, SimplexMesh};
use crate::smooth::{Field, SmoothParams};
use crate::Error;

/// Which distance the constraint uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintMode {
    /// `c(p) = d_min(p) − 1/α`: exact minimum distance with a standoff
    /// comparable to the smooth shell.
    Exact,
    /// `c(p) = d̂(M, p)`.
    Smooth,
}

/// Built-in bowls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// Walls at 25° from horizontal.
    Shallow,
    /// Walls at 60° from horizontal.
    Deep,
}

impl Scenario {
    /// Wall angle from horizontal, in degrees.
    pub fn wall_angle_deg(self) -> f64 {
        match self {
            Scenario::Shallow => 25.0,
            Scenario::Deep => 60.0,
        }
    }
}

/// Length of each bowl wall.
pub const WALL_LENGTH: f64 = 2.0;
/// Default accuracy of the demo field.
pub const DEMO_ALPHA: f64 = 20.0;
/// Default attenuation threshold of the demo field.
pub const DEMO_ALPHA_U: f64 = 120.0;
/// Default time step.
pub const DEMO_DT: f64 = 1.0 / 200.0;
/// Gravity.
pub const GRAVITY: f64 = 9.81;

/// Two edges meeting at the origin, rising at `angle_deg` to either side.
pub fn v_bowl(angle_deg: f64, wall_length: f64) -> SimplexMesh {
    let a = angle_deg.to_radians();
    let (c, s) = (libm::cos(a) * wall_length, libm::sin(a) * wall_length);
    SimplexMesh::new(
        alloc::vec![Vec3::new(-c, s, 0.0), Vec3::zeros(), Vec3::new(c, s, 0.0)],
        alloc::vec![Simplex::Edge([0, 1]), Simplex::Edge([1, 2])],
    )
    .expect("bowl geometry is valid")
}

/// Position, velocity, time step and gravity of the point mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DemoState {
    /// Position; `z` stays 0.
    pub position: Vec3,
    /// Velocity.
    pub velocity: Vec3,
    /// Current time step (halved after a failed step).
    pub h: f64,
    /// Gravity vector.
    pub gravity: Vec3,
}

/// Constraint `c(p) >= 0` over a bowl.
#[derive(Clone, Debug)]
pub struct BowlConstraint {
    field: Field,
    params: SmoothParams,
    mode: ConstraintMode,
}

impl BowlConstraint {
    /// Wraps a bowl mesh.
    pub fn new(mesh: SimplexMesh, params: SmoothParams, mode: ConstraintMode) -> Result<Self, Error> {
        params.validate()?;
        Ok(Self { field: Field::new(mesh)?, params, mode })
    }

    /// The constraint mode.
    pub fn mode(&self) -> ConstraintMode {
        self.mode
    }

    /// `(c(p), ∇c(p))`.
    pub fn eval(&self, p: &Vec3) -> (f64, Vec3) {
        let q = Primitive::point(*p);
        match self.mode {
            ConstraintMode::Smooth => {
                let r = self.field.smooth_min_dist(&q, &self.params);
                (r.d_hat, r.grad)
            }
            ConstraintMode::Exact => {
                let mesh = self.field.mesh();
                let mut best = (f64::INFINITY, Vec3::zeros());
                for f in mesh.primitives() {
                    let cp = simplex_distance(&f, &q);
                    if cp.d < best.0 {
                        best = (cp.d, cp.grad);
                    }
                }
                (best.0 - 1.0 / self.params.alpha, best.1)
            }
        }
    }
}

/// Interior-point settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stop when the KKT residual drops below this.
    pub kkt_tol: f64,
    /// Iteration cap; the last feasible iterate is accepted.
    pub max_iters: usize,
    /// Barrier reduction factor.
    pub mu_factor: f64,
    /// Step halvings before a step is rejected.
    pub max_halvings: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { kkt_tol: 1e-8, max_iters: 100, mu_factor: 0.2, max_halvings: 12 }
    }
}

/// Result of one accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    /// The new state.
    pub state: DemoState,
    /// Interior-point iterations of the accepted solve.
    pub iterations: usize,
    /// Constraint value at the new position.
    pub constraint: f64,
    /// Time actually advanced.
    pub dt: f64,
}

/// The line search could not keep the iterate feasible.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LineSearchFailure;

/// Solves one incremental potential. Returns the minimizer and iteration count.
pub fn solve_step(
    p_prev: &Vec3,
    p_target: &Vec3,
    cons: &BowlConstraint,
    cfg: &SolverConfig,
) -> Result<(Vec3, usize), LineSearchFailure> {
    let (ct, _) = cons.eval(p_target);
    if ct > 0.0 {
        return Ok((*p_target, 0));
    }
    let mut p = *p_prev;
    let (mut c, mut gc) = cons.eval(&p);
    if c <= 0.0 {
        return Err(LineSearchFailure);
    }
    // Centre the first barrier a step length off the boundary: an iterate
    // that starts nearly on c = 0 otherwise creeps along it in tiny steps.
    let mut z = (p - p_target).norm().max(1e-12);
    let mut mu = z * c.max(z);
    for it in 0..cfg.max_iters {
        let rd = (p - p_target) - gc * z;
        let kkt = rd.norm() + (z * c).abs();
        if kkt < cfg.kkt_tol {
            return Ok((p, it));
        }
        if rd.norm() + (z * c - mu).abs() < 10.0 * mu {
            mu *= cfg.mu_factor;
        }
        // (I + (z/c) ∇c ∇cᵀ) dp = −rd − ∇c (zc − μ)/c, by Sherman–Morrison
        let sigma = z / c;
        let b = -rd - gc * ((z * c - mu) / c);
        let dp = b - gc * (sigma * gc.dot(&b) / (1.0 + sigma * gc.norm_squared()));
        let dz = (-(z * c - mu) - z * gc.dot(&dp)) / c;
        let mut a: f64 = 1.0;
        if dz < 0.0 {
            a = a.min(-0.99 * z / dz);
        }
        let merit = |q: &Vec3, cq: f64| 0.5 * (q - p_target).norm_squared() - mu * libm::log(cq);
        let m0 = merit(&p, c);
        loop {
            let pn = p + dp * a;
            let (cn, gn) = cons.eval(&pn);
            if cn > 0.0 && merit(&pn, cn) <= m0 + 1e-14 * (1.0 + m0.abs()) {
                p = pn;
                c = cn;
                gc = gn;
                z += dz * a;
                break;
            }
            a *= 0.5;
            if a < 1e-12 {
                return Err(LineSearchFailure);
            }
        }
    }
    Ok((p, cfg.max_iters))
}

/// Advances one step, halving `h` until the solve succeeds. If every
/// halving fails the mass is held in place with zero velocity.
pub fn step(state: &DemoState, cons: &BowlConstraint, cfg: &SolverConfig) -> StepOutcome {
    let mut h = state.h;
    for _ in 0..=cfg.max_halvings {
        let target = state.position + state.velocity * h + state.gravity * (h * h);
        if let Ok((mut p, iterations)) = solve_step(&state.position, &target, cons, cfg) {
            p.z = state.position.z;
            let velocity = (p - state.position) / h;
            let constraint = cons.eval(&p).0;
            return StepOutcome {
                state: DemoState { position: p, velocity, h, gravity: state.gravity },
                iterations,
                constraint,
                dt: h,
            };
        }
        h *= 0.5;
    }
    StepOutcome {
        state: DemoState { velocity: Vec3::zeros(), h, ..*state },
        iterations: cfg.max_iters,
        constraint: cons.eval(&state.position).0,
        dt: h,
    }
}

/// One trajectory sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DemoRow {
    /// Simulated time.
    pub t: f64,
    /// Position.
    pub position: Vec3,
    /// Velocity.
    pub velocity: Vec3,
    /// Constraint value (`d̂` or `d_min − 1/α`).
    pub constraint: f64,
    /// Interior-point iterations of the step that produced this row.
    pub iterations: usize,
}

/// Initial state: at rest 0.2 above the left wall, halfway out.
pub fn initial_state(scenario: Scenario, dt: f64) -> DemoState {
    let a = scenario.wall_angle_deg().to_radians();
    let x = -0.5 * WALL_LENGTH * libm::cos(a);
    let y = -x * libm::tan(a) + 0.2;
    DemoState {
        position: Vec3::new(x, y, 0.0),
        velocity: Vec3::zeros(),
        h: dt,
        gravity: Vec3::new(0.0, -GRAVITY, 0.0),
    }
}

/// Runs `steps` steps and returns `steps + 1` rows, starting with the
/// initial state.
pub fn run_demo(scenario: Scenario, mode: ConstraintMode, steps: usize, dt: f64) -> Result<Vec<DemoRow>, Error> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    let mesh = v_bowl(scenario.wall_angle_deg(), WALL_LENGTH);
    let cons = BowlConstraint::new(mesh, SmoothParams::new(DEMO_ALPHA, DEMO_ALPHA_U), mode)?;
    let cfg = SolverConfig::default();
    let mut state = initial_state(scenario, dt);
    let mut t = 0.0;
    let mut rows = Vec::with_capacity(steps + 1);
    rows.push(DemoRow {
        t,
        position: state.position,
        velocity: state.velocity,
        constraint: cons.eval(&state.position).0,
        iterations: 0,
    });
    for _ in 0..steps {
        let out = step(&state, &cons, &cfg);
        t += out.dt;
        state = out.state;
        rows.push(DemoRow {
            t,
            position: state.position,
            velocity: state.velocity,
            constraint: out.constraint,
            iterations: out.iterations,
        });
    }
    Ok(rows)
}
