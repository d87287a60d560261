//! Partition of unity interpolation of large scattered 2D/3D data sets with
//! compactly supported radial basis functions, driven by a block-based
//! partitioning structure whose neighbour search costs O(1) per query.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod bench;
pub mod blockpart;
pub mod cli;
pub mod geometry;
pub mod kernels;
pub mod io;
pub mod pum;
pub mod reconstruct;
pub mod separatrix;
pub mod shapes;
pub mod validation;

pub use error::{Error, Result};
