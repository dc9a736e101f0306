//! Cycle-accurate simulator for a wireless-augmented 8x8 mesh NoC with
//! on-line temperature forecasting and proactive thermal management.
//!
//! The crate is organised around one shared component model: every core,
//! switch and mesh link of the fabric is a thermally modelled element with
//! a flattened global index (cores first, then switches, then links; 240
//! elements for the default 8x8 fabric).  The modules build on each other:
//!
//! * [`topology`] - mesh + wireless-overlay construction and hop metrics
//! * [`thermal`] - lumped-RC thermal network and utilization->power map
//! * [`ann`] - three-stream temperature predictor (float training plus a
//!   hardware-faithful fixed-point inference pipeline)
//! * [`routing`] - distance-vector rerouting with penalty costs and a
//!   Dijkstra oracle for validation
//! * [`noc`] - the wormhole-switched network simulator (virtual channels,
//!   token-passing wireless channel, utilization statistics)
//! * [`dtm`] - sliding-window thermal-management decisions, task
//!   reallocation and the 32-bit control-message encoding
//! * [`experiment`] - warmup + simulate + compare experiment engine
//!
//! Everything is deterministic for a given root seed: seeds are split per
//! subsystem with [`seed::subsystem_seed`], no unordered containers are
//! iterated on the simulation path, and reports serialize byte-identically
//! across reruns.

pub mod ann;
pub mod dtm;
pub mod error;
pub mod experiment;
pub mod noc;
pub mod routing;
pub mod seed;
pub mod thermal;
pub mod topology;

pub use error::Error;
pub use thermal::{PowerProfile, RcThermalModel, ThermalState, UtilizationVector};
pub use topology::{ComponentId, ComponentKind, Topology};

/// Crate version stamped into run manifests.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
