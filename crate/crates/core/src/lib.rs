//! Consensus building over a three-value simplex (slow loop) coupled with
//! cooperation-rate prediction and behavioral intervention ranking (fast loop).
//!
//! The crate is organized by subsystem:
//!
//! - [`board`]: the standard scenario-cloud and consensus SVG boards.
//! - [`ternary`]: barycentric geometry, region clipping and SVG boards.
//! - [`sim`]: community-energy simulation and the scenario sweep.
//! - [`pclm`]: paired-comparison preference estimation on a simplex grid.
//! - [`intent`]: clustering of preference points into intent groups.
//! - [`consensus`]: reference point, compromise paths, narrowing and
//!   positionality-weighted social choice.
//! - [`kenn`]: masked-connectivity cooperation network and the utility/norm
//!   cross-point solver.
//! - [`service`]: session lifecycle, telemetry rules and the HTTP API.

pub mod board;
pub mod consensus;
pub mod error;
pub mod intent;
pub mod jsonl;
pub mod kenn;
pub mod pclm;
pub mod service;
pub mod sim;
pub mod ternary;

pub use error::{CoosError, Result};
pub use ternary::{Axis, SimplexRegion, TernaryPoint};
