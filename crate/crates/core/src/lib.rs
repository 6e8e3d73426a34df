//! Deterministic simulator and defense library for UAV swarms under GPS
//! spoofing, insider, and multi-hop penetration attacks.
//!
//! The crate is organized around the per-slot defense pipeline:
//!
//! - [`swarm`]: UAV entities, 3-D deployment, time-varying topology, clock.
//! - [`threat`]: GPS spoofing with dynamic bias, insider misreporting, and
//!   multi-hop penetration scenarios with network snapshot emission.
//! - [`perception`]: cooperative spoofing detection via ranging residuals,
//!   anchor selection, linearized multilateration, weighted fusion.
//! - [`game`]: Bayesian outer game (fictitious play) over a mean-field inner
//!   game (implicit HJB/FPK finite differences, Thomas algorithm) driving
//!   the per-UAV collaborative defense intensity inside an MPC loop.
//! - [`trust`]: behavioral probing, Bayesian type inference, graded access,
//!   and distributed decayed trust with betrayal penalty.
//! - [`graph`]: Datalog compilation of raw scan data, semi-naive fixpoint
//!   with provenance, attack-path tracing/verification/dedup/exploration,
//!   and patch prioritization.
//! - [`baselines`]: the six comparison strategies (COS, LFS, GS defense;
//!   FLS, SAS, GP hardening).
//! - [`sim`] / [`harness`]: slot pipeline, metrics capture, batch running.
//! - [`plot`]: self-contained SVG figure regeneration.
//!
//! Every run is a pure function of its [`config::ScenarioConfig`] (including
//! the seed): reruns produce byte-identical CSV and SVG output.

pub mod baselines;
pub mod config;
pub mod game;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod perception;
pub mod plot;
pub mod sim;
pub mod swarm;
pub mod threat;
pub mod trust;

pub use config::ScenarioConfig;
pub use metrics::MetricsRow;
pub use sim::Simulation;

/// 3-D position/velocity vector in meters (or m/s).
pub type Vec3 = nalgebra::Vector3<f64>;
