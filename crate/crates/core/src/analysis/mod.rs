//! Evaluation machinery: image metrics, conditioning of the projection
//! operator, parameter sweeps, slanted-edge MTF measurement, test charts,
//! and the comparison baselines.

pub mod baselines;
pub mod charts;
pub mod conditioning;
pub mod metrics;
pub mod mtf;
pub mod sweep;

pub use baselines::{baseline_cubic, baseline_wobulation};
pub use conditioning::condition_number;
pub use metrics::psnr;
pub use mtf::{mtf_slanted_edge, MtfCurve};
pub use sweep::{sweep, SweepGrid, SweepKind, SweepResult};
