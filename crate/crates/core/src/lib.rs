//! Composition, analysis and enforcement engine for drone-swarm connectivity
//! services.
//!
//! A swarm of drones serves ground devices: entry drones terminate device
//! links, relays forward traffic and gateway drones hand it to the terrestrial
//! backhaul. This crate wires those per-drone (atomic) services into
//! end-to-end compositions, scores them with a two-class non-preemptive
//! priority M/G/1 model, selects the SLA-optimal composition and, when none is
//! compliant, runs a staged reconfiguration loop.
//!
//! Module map:
//!
//! - [`model`]: domain types, device allocation, validity checking, registry.
//! - [`link_budget`]: service rate and device capacity from the radio budget.
//! - [`composition`]: direct, clustered and parallel composition strategies.
//! - [`queueing`]: per-node priority delays and end-to-end latency.
//! - [`selection`]: candidate enumeration and SLA-optimal selection.
//! - [`enforcement`]: stability/SLA enforcement edits and recommendations.
//! - [`controller`]: the request path tying selection and enforcement together.
//! - [`sim`]: discrete-event simulation used as an oracle for the analytics.
//! - [`baselines`]: capped brute-force direct and clustered baselines.
//! - [`workload`]: topology scales and request generation.
//! - [`experiments`]: batch experiment harness producing CSV/JSON summaries.
//! - [`scenario`]: the JSON scenario file format.

pub mod baselines;
pub mod composition;
pub mod controller;
pub mod enforcement;
pub mod experiments;
pub mod link_budget;
pub mod model;
pub mod output;
pub mod queueing;
pub mod scenario;
pub mod selection;
pub mod sim;
pub mod workload;

pub use composition::{CompositionParams, CompositionPlan, CostWeights, NextHop, Strategy};
pub use controller::{Controller, Decision};
pub use model::{
    Allocation, Area, Device, DeviceId, Drone, DroneId, Position, Role, SwarmState, Topology,
};
pub use queueing::{DelayMode, LatencyMetric, QueueingConfig};
pub use selection::SlaSpec;
