//! Joint UAV placement, user pairing and power allocation for a downlink
//! NOMA visible-light network served by an LED mounted on a hovering UAV.
//!
//! The pipeline places the UAV above the user centroid, pairs users by
//! channel gain, and then searches UAV position and transmit powers jointly
//! with Harris Hawks Optimization on a penalized weighted sum-rate.
//!
//! * [`vlc`]: Lambertian line-of-sight channel gains.
//! * [`noma`]: rates, SIC margins, weights, optical intensity limits.
//! * [`clustering`]: scenarios and user grouping.
//! * [`hho`]: the optimizer.
//! * [`penalty`]: solution encoding, constraints and fitness.
//! * [`experiment`]: schemes, parameter sweeps and CSV output.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clustering;
pub mod error;
pub mod experiment;
pub mod hho;
pub mod noma;
pub mod penalty;
pub mod vlc;

pub use clustering::{centroid_placement, grand_cluster, random_pairing, sort_and_pair, Scenario};
pub use error::{Error, Result};
pub use hho::{optimize, HhoConfig, OptimizationTrace, SearchSpace};
pub use noma::{Clustering, PowerAllocation, SystemConfig};
pub use penalty::{FeasibilityReport, PenaltyConfig, Problem, SolutionVector};
pub use vlc::{LambertianOrder, Position3D, VlcParams};
