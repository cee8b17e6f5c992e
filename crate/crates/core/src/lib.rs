//! Monte Carlo evaluation of joint transmission in ultra-dense networks.
//!
//! Base stations and users are independent Poisson point processes on a
//! square torus, with more BSs than users. Every user is served by up to `N`
//! of the nearest BSs in its user-centric Voronoi cell, either by
//! non-coherent power summation or by coherent MRT combining (optionally
//! with delayed CSI). BSs that serve no one sleep and do not interfere.
//! Propagation follows a bounded dual-slope path loss law; fading is
//! Rayleigh. Reported metrics are spectral efficiency, its gain over single
//! association, and network energy efficiency.

pub mod analysis;
pub mod channel;
pub mod config;
pub mod geometry;
pub mod link;
pub mod metrics;
pub mod output;
pub mod preset;
pub mod sim;
pub mod sweep;

pub use config::{ConfigFile, SimulationConfig};
pub use metrics::MetricsReport;
