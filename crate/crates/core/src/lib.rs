//! Monte Carlo simulation of clustered LEO satellite downlink networks.
//!
//! Satellites sit on a spherical shell above a single ground terminal.
//! Clusters are a master plus slaves on a small spherical cap; cooperative
//! schemes (joint transmission, dynamic point selection) are compared with an
//! unclustered constellation by coverage probability and ergodic capacity.
//!
//! Drop evaluation is data-parallel over rayon when the `parallel` feature
//! (on by default) is enabled, and sequential otherwise. Results are
//! bit-identical either way.

pub mod channel;
pub mod error;
pub mod formation;
pub mod fronthaul;
pub mod geometry;
pub mod montecarlo;
pub mod selftest;
pub mod transmission;

pub use error::{Error, Result};
