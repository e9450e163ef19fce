//! Exact affine stratifications of piecewise-affine covers, with the toric
//! momentum-map instance and Duistermaat-Heckman density polynomials.
//!
//! All geometry is carried out over arbitrary-precision rationals. Floating
//! point appears only in SVG rendering and in the Monte-Carlo volume oracle.

mod combinatorics;
pub mod cover;
pub mod dh;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod par;
pub mod polyhedron;
pub mod render;
pub mod stratifier;
pub mod toric;

pub use error::{Error, Result};
