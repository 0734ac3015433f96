//! Deterministic cluster-level channel simulator for millimetre-wave indoor
//! links with first-order reflections and diffuse scattering.
//!
//! A cluster is one reflecting surface seen by a receiver. The pipeline is
//! geometry ([`geometry`]), per-ray losses ([`propagation`]), the cluster
//! impulse response and its binning ([`cir`]), and composition of clusters
//! with the LOS ray ([`channel`]). [`scenario`], [`report`] and [`compare`]
//! handle files, statistics and validation against measurements.

// `!(x > y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cir;
pub mod compare;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod propagation;
pub mod report;
pub mod scenario;

pub use channel::{compose_channel, los_ray, ChannelResponse, ClusterResponse, LosRay};
pub use cir::{bin_cir, cluster_cir, BinnedCir, ClusterConfig, RayDensity, TheoreticalCir};
pub use compare::{compare, ComparisonReport, Reference};
pub use error::{Error, Result};
pub use geometry::{solve_specular, support_region, ClusterGeometry, Extent, Side};
pub use propagation::{Material, Polarization, RadioParams};
pub use report::{simulate, ScenarioStats, SimulationOutput};
pub use scenario::{load_scenario, parse_scenario, Scenario};
