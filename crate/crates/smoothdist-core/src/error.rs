use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors raised while building meshes, trees and fields.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A simplex refers to a vertex that does not exist.
    IndexOutOfRange {
        /// Position of the simplex in the simplex list.
        simplex: usize,
        /// The offending vertex index.
        index: usize,
        /// Number of vertices in the mesh.
        len: usize,
    },
    /// Simplices with repeated indices, zero length or zero area.
    Degenerate {
        /// Positions of the offending simplices in the simplex list.
        simplices: Vec<usize>,
    },
    /// The operation needs at least one simplex.
    EmptyMesh,
    /// The mesh has no edges or triangles.
    NoEdges,
    /// A parameter is outside its domain.
    InvalidParameter(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::IndexOutOfRange { simplex, index, len } => write!(
                f,
                "simplex {simplex} references vertex {index} but the mesh has {len} vertices"
            ),
            Error::Degenerate { simplices } => {
                write!(f, "degenerate simplices at positions {simplices:?}")
            }
            Error::EmptyMesh => write!(f, "mesh has no simplices"),
            Error::NoEdges => write!(f, "mesh has no edges"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
