//! Dual-layer LCD + diffuser superresolution display toolkit.
//!
//! Two stacked LCD panels behind a thin diffuser synthesize a light field
//! whose angular integration on the diffuser forms an image at higher
//! resolution than either panel. This crate models that image formation as a
//! sparse projection of the (low-rank) light-field matrix, decomposes target
//! images into time-multiplexed pattern pairs with a splitting solver, and
//! ships the surrounding evaluation machinery: conditioning analysis,
//! parameter sweeps, slanted-edge MTF measurement, and comparison baselines.
//! With the diffuser switched off the same hardware doubles as a
//! high-dynamic-range 2D display or a glasses-free 3D light-field display;
//! both modes are covered by the bounded low-rank factorization routines.

pub mod analysis;
pub mod artifacts;
pub mod config;
pub mod error;
pub mod factorize;
pub mod geometry;
pub mod image;
pub mod modes;
pub mod patterns;
pub mod pnm;
pub mod projection;
pub mod render;
pub mod solver;

pub use config::{load_config, parse_config, DisplayConfig};
pub use error::{Error, Result};
pub use geometry::{diffuser_footprints, DiffuserModel, DiffuserProfile, DisplayGeometry};
pub use image::ImagePlane;
pub use patterns::PatternSet;
pub use projection::{build_projection, LightFieldSupport, ProjectionOperator};
pub use render::{render_view, simulate_native};
pub use solver::{decompose_superres, SolveDiagnostics, SolverConfig};
