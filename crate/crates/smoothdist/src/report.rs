//! Single-query inspection and demo trajectory output.

use std::fmt;
use std::io::Write;

use smoothdist_core::demo::DemoRow;
use smoothdist_core::prelude::*;

use crate::bench::fmt_f64;
use crate::render::parse_vec3;

/// Parses a query primitive from one to three `x,y,z` groups separated by `;`.
pub fn parse_primitive(s: &str) -> Result<Primitive, String> {
    let pts: Vec<Vec3> = s.split(';').map(parse_vec3).collect::<Result<_, _>>()?;
    let prim = match pts.as_slice() {
        [a] => Primitive::point(*a),
        [a, b] => Primitive::edge(*a, *b),
        [a, b, c] => Primitive::triangle(*a, *b, *c),
        _ => return Err("a query has one to three vertices separated by ';'".into()),
    };
    if pts.len() > 1 && !(prim.measure() > 0.0) {
        return Err("query primitive is degenerate".into());
    }
    Ok(prim)
}

/// Everything printed by the `query` command.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryReport {
    /// Tree-accelerated result.
    pub result: SmoothResult,
    /// Exact minimum distance.
    pub d_min: f64,
    /// Index of the closest data primitive.
    pub closest: usize,
    /// `d_min − d̂`; nonnegative when the field is conservative.
    pub gap: f64,
    /// Sum over every primitive without the tree, when requested.
    pub brute_force: Option<f64>,
}

/// Evaluates one query; with `exact` also sums every primitive directly.
pub fn query_report(field: &Field, g: &Primitive, params: &SmoothParams, exact: bool) -> QueryReport {
    let result = field.smooth_min_dist(g, params);
    let (d_min, closest) = exact_min_distance(field.mesh(), g).expect("field meshes are nonempty");
    QueryReport {
        gap: d_min - result.d_hat,
        result,
        d_min,
        closest,
        brute_force: exact.then(|| brute_force_d_hat(field, g, params)),
    }
}

/// `d̂` summed over every primitive with no tree and no far field.
pub fn brute_force_d_hat(field: &Field, g: &Primitive, params: &SmoothParams) -> f64 {
    let s = params.attenuation();
    let mut c = 0.0;
    for (i, f) in field.mesh().primitives().enumerate() {
        let cp = simplex_distance(&f, g);
        let e = (-params.alpha * cp.d).exp();
        if e > 0.0 {
            c += field.weights().value(i, &cp.phi, s) * e;
        }
    }
    if c > 0.0 {
        -c.ln() / params.alpha
    } else {
        f64::INFINITY
    }
}

impl fmt::Display for QueryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.result;
        writeln!(f, "d_hat        {}", fmt_f64(r.d_hat))?;
        writeln!(f, "gradient     {} {} {}", r.grad.x, r.grad.y, r.grad.z)?;
        writeln!(f, "d_min        {}", self.d_min)?;
        writeln!(f, "closest      {}", self.closest)?;
        writeln!(f, "gap          {}", fmt_f64(self.gap))?;
        writeln!(f, "leaves       {}", r.stats.leaves)?;
        write!(f, "far_field    {}", r.stats.far_field)?;
        if let Some(b) = self.brute_force {
            let diff = if b == r.d_hat { 0.0 } else { (b - r.d_hat).abs() };
            write!(f, "\nbrute_force  {}\nabs_diff     {}", fmt_f64(b), diff)?;
        }
        Ok(())
    }
}

/// Writes `t,x,y,z,vx,vy,vz,constraint,iterations`.
pub fn write_demo_csv<W: Write>(rows: &[DemoRow], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "x", "y", "z", "vx", "vy", "vz", "constraint", "iterations"])?;
    for r in rows {
        let p = r.position;
        let v = r.velocity;
        out.write_record([
            fmt_f64(r.t),
            fmt_f64(p.x),
            fmt_f64(p.y),
            fmt_f64(p.z),
            fmt_f64(v.x),
            fmt_f64(v.y),
            fmt_f64(v.z),
            fmt_f64(r.constraint),
            r.iterations.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
