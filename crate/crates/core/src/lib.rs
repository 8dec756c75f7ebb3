//! Exit-time moment spectra of geodesic balls in rotationally symmetric
//! model spaces, isoperimetric comparison spaces built from curvature,
//! tangency and mean-convexity bounds, and independent stochastic and
//! finite-element cross-checks.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod chebyshev;
pub mod comparison;
pub mod diffusion;
pub mod dual;
pub mod error;
pub mod expr;
pub mod mesh;
pub mod quadrature;
pub mod radial;
pub mod spectrum;
pub mod warp_models;

pub use error::{Error, Result};
pub use spectrum::{solve_hierarchy, MomentSpectrum, Provenance, RadialProfileSet};
pub use warp_models::{space_form_warping, ModelSpace, WarpingFunction};
