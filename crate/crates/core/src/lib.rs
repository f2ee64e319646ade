//! Optimal Sobolev constants of electro-magnetic Robin Laplacians.
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Coordinate loops index several parallel arrays at once.
#![allow(clippy::needless_range_loop, clippy::manual_memcpy)]

pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod discretize;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod minimize;
pub mod model1d;
pub mod models;
pub mod parallel;
pub mod partition;
pub mod quadrature;
pub mod waveguide;

pub use error::{Error, Result};
