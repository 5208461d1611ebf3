//! Conservative, differentiable smooth distances between co-dimensional
//! simplicial geometry.
//!
//! The crate evaluates a LogSumExp soft minimum of exact simplex distances,
//! weighted so that shared vertices and edges do not bulge the isosurface,
//! and accelerated by a Barnes-Hut traversal that never overestimates.
//!
//! Everything here is `no_std` (with `alloc`). File formats, rendering and
//! parallel batch evaluation live in the companion `smoothdist` crate.
//!
//! ```
//! use smoothdist_core::prelude::*;
//!
//! let mesh = SimplexMesh::new(
//!     vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
//!     vec![Simplex::Triangle([0, 1, 2])],
//! )
//! .unwrap();
//! let field = Field::new(mesh).unwrap();
//! let params = SmoothParams::new(200.0, 1200.0);
//! let r = field.smooth_min_dist(&Primitive::point(Vec3::new(0.2, 0.2, 0.5)), &params);
//! assert!(r.d_hat <= 0.5 && r.d_hat > 0.45);
//! ```

#![no_std]
#![warn(missing_docs)]

extern crate alloc;

pub mod bvh;
pub mod demo;
pub mod exact_dist;
pub mod geom;
pub mod mesh;
pub mod quadrature;
pub mod smooth;
pub mod weights;

mod error;

pub use error::Error;

/// Common imports.
pub mod prelude {
    pub use crate::bvh::{Aabb, Bvh, BvhNode, Proximity};
    pub use crate::exact_dist::{exact_min_distance, simplex_distance, ClosestPair};
    pub use crate::geom::{Primitive, Vec3};
    pub use crate::mesh::{Adjacency, Simplex, SimplexMesh};
    pub use crate::smooth::{Field, GradMode, SmoothParams, SmoothResult};
    pub use crate::weights::WeightSet;
    pub use crate::Error;
}
