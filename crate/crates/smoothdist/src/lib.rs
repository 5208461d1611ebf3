//! File formats, parallel batch evaluation, sphere-traced rendering,
//! benchmarks and the command-line tool built on `smoothdist-core`.

#![warn(missing_docs)]

pub mod batch;
pub mod bench;
pub mod io;
pub mod procedural;
pub mod render;
pub mod report;

pub use smoothdist_core as core;
