//! Overlap-based dissimilarity between 2D polygonal shapes and analysis of the
//! resulting dissimilarity matrices.
//!
//! The [`geometry`] module computes exact even-odd areas and overlaps,
//! [`score`] turns them into a normalized dissimilarity minimized over
//! similarity transforms, and [`analysis`] embeds and clusters the matrix.

// `!(x > 0.0)` is used on purpose so NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod io;
pub mod minimize;
pub mod par;
pub mod score;

pub use error::{Error, Result};
