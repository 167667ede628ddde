//! Numerical toolkit for Zoll surfaces of revolution: meridian profiles and
//! the isothermal chart, geodesic flow, the separated Laplace spectrum and its
//! clusters, observability diagnostics of eigenfunctions, and a modal damped
//! wave solver.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod damping;
pub mod error;
pub mod geodesics;
pub mod geometry;
pub mod observability;
pub mod quadrature;
pub mod spectral;
pub mod wavesim;

pub use error::{Error, Result};
