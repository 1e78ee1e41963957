//! Composition strategies that wire atomic services into end-to-end plans.
//!
//! Every plan is a forwarding graph in which each non-gateway drone has exactly
//! one successor and gateways hand traffic to the backhaul.

mod clustered;
mod cost;
mod direct;
pub mod kmeans;
mod parallel;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clustered::{cluster_count, clustered_from_parts, compose_clustered, compose_clustered_k, ClusterPart};
pub use cost::{argmin_cost, weighted_costs, CostInput, CostScaling, CostWeights};
pub use direct::{compose_direct, direct_from_assignment};
pub use kmeans::KMeansConfig;
pub use parallel::{compose_parallel, parallel_from_chains, path_count};

pub(crate) use clustered::parts_of;
pub(crate) use parallel::chains_of;

use crate::model::{DistanceMetric, DroneId, Position, SwarmState, Topology};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComposeError {
    #[error("{k} clusters/paths requested but only {available} non-gateway drones exist")]
    TooFewDrones { k: usize, available: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("drone {0} has no forwarding entry")]
    MissingHop(DroneId),
    #[error("drone {0} is not part of the topology")]
    UnknownDrone(DroneId),
    #[error("forwarding loop through drone {0}")]
    Cycle(DroneId),
    #[error("drone {0} reaches the backhaul without passing a gateway")]
    NonGatewayExit(DroneId),
    #[error("gateway {0} forwards to another drone")]
    GatewayForwards(DroneId),
}

/// Composition pattern. The derived order is the selection tie-break order
/// (fewest hops first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Direct,
    Clustered,
    Parallel,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Direct, Strategy::Clustered, Strategy::Parallel];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Direct => "direct",
            Strategy::Clustered => "clustered",
            Strategy::Parallel => "parallel",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Strategy::Direct),
            "clustered" => Ok(Strategy::Clustered),
            "parallel" => Ok(Strategy::Parallel),
            other => Err(format!("unknown strategy '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NextHop {
    Drone(DroneId),
    /// Terrestrial backhaul behind a gateway.
    Backhaul,
}

/// A forwarding graph from entry drones to gateways.
///
/// `paths` holds the strategy's structural paths, each ending at a gateway:
/// one `[drone, gateway]` per drone for direct plans, `[member, head, gateway]`
/// or `[head, gateway]` per drone for clustered plans, and one full relay
/// chain (upstream tail first) per path for parallel plans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionPlan {
    pub strategy: Strategy,
    pub alpha: f64,
    pub forward: BTreeMap<DroneId, NextHop>,
    pub paths: Vec<Vec<DroneId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_heads: Option<Vec<DroneId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl CompositionPlan {
    pub fn next_hop(&self, drone: DroneId) -> Option<NextHop> {
        self.forward.get(&drone).copied()
    }

    /// Drone sequence from `source` to the backhaul-facing gateway.
    pub fn route_from(&self, source: DroneId) -> Result<Vec<DroneId>, PlanError> {
        let mut route = vec![source];
        let mut cur = source;
        loop {
            match self.forward.get(&cur) {
                None => return Err(PlanError::MissingHop(cur)),
                Some(NextHop::Backhaul) => return Ok(route),
                Some(NextHop::Drone(next)) => {
                    if route.contains(next) {
                        return Err(PlanError::Cycle(*next));
                    }
                    route.push(*next);
                    cur = *next;
                }
            }
        }
    }

    /// One route per traffic source (every drone that forwards to another
    /// drone), in drone-id order.
    pub fn source_routes(&self) -> Result<Vec<Vec<DroneId>>, PlanError> {
        self.forward
            .iter()
            .filter(|(_, hop)| matches!(hop, NextHop::Drone(_)))
            .map(|(d, _)| self.route_from(*d))
            .collect()
    }

    pub fn gateway_of(&self, drone: DroneId) -> Option<DroneId> {
        self.route_from(drone).ok().and_then(|r| r.last().copied())
    }

    /// Members (including the head) per cluster head.
    pub fn clusters(&self) -> BTreeMap<DroneId, Vec<DroneId>> {
        let heads: BTreeSet<DroneId> = self
            .cluster_heads
            .iter()
            .flatten()
            .copied()
            .collect();
        let mut out: BTreeMap<DroneId, Vec<DroneId>> =
            heads.iter().map(|h| (*h, vec![*h])).collect();
        for (d, hop) in &self.forward {
            if let NextHop::Drone(next) = hop {
                if heads.contains(next) && !heads.contains(d) {
                    out.entry(*next).or_default().push(*d);
                }
            }
        }
        for members in out.values_mut() {
            members.sort();
        }
        out
    }

    /// Relay chains of a parallel plan, gateway stripped, upstream tail first.
    pub fn chains(&self) -> Vec<Vec<DroneId>> {
        self.paths
            .iter()
            .map(|p| p[..p.len().saturating_sub(1)].to_vec())
            .collect()
    }

    /// Structural checks: every topology drone present, gateways exit to the
    /// backhaul, no loops, every non-gateway drone reaches a gateway.
    pub fn check(&self, topology: &Topology) -> Result<(), PlanError> {
        for drone in topology.drones() {
            let hop = self
                .forward
                .get(&drone.id)
                .ok_or(PlanError::MissingHop(drone.id))?;
            if drone.is_gateway() && *hop != NextHop::Backhaul {
                return Err(PlanError::GatewayForwards(drone.id));
            }
        }
        for (d, hop) in &self.forward {
            let drone = topology.drone(*d).ok_or(PlanError::UnknownDrone(*d))?;
            if let NextHop::Drone(n) = hop {
                topology.drone(*n).ok_or(PlanError::UnknownDrone(*n))?;
            } else if !drone.is_gateway() {
                return Err(PlanError::NonGatewayExit(*d));
            }
            self.route_from(*d)?;
        }
        Ok(())
    }

    /// Largest drone-to-drone hop count over the source routes.
    pub fn max_hops(&self) -> usize {
        self.source_routes()
            .map(|rs| rs.iter().map(|r| r.len() - 1).max().unwrap_or(0))
            .unwrap_or(0)
    }
}

/// Knobs shared by all strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompositionParams {
    pub weights: CostWeights,
    /// k-means seed.
    pub seed: u64,
    pub metric: DistanceMetric,
    pub kmeans: KMeansConfig,
}

impl Default for CompositionParams {
    fn default() -> Self {
        Self {
            weights: CostWeights::default(),
            seed: 0,
            metric: DistanceMetric::Ground,
            kmeans: KMeansConfig::default(),
        }
    }
}

impl CompositionParams {
    pub fn with_alpha(&self, alpha: f64) -> Self {
        let mut p = self.clone();
        p.weights.alpha = alpha;
        p
    }

    pub(crate) fn distance(&self, a: &Position, b: &Position) -> f64 {
        self.metric.between(a, b)
    }
}

/// Runs the named strategy with the default k formula.
pub fn compose(
    strategy: Strategy,
    state: &SwarmState,
    params: &CompositionParams,
) -> Result<CompositionPlan, ComposeError> {
    match strategy {
        Strategy::Direct => Ok(compose_direct(state, params)),
        Strategy::Clustered => compose_clustered(state, params),
        Strategy::Parallel => compose_parallel(state, params),
    }
}

/// `max(|G|, ceil(|U| lambda / mu))`.
pub(crate) fn required_units(num_devices: usize, lambda: f64, mu: f64, num_gateways: usize) -> usize {
    let ratio = num_devices as f64 * lambda / mu;
    let snapped = if (ratio - ratio.round()).abs() < 1e-9 * ratio.abs().max(1.0) {
        ratio.round()
    } else {
        ratio.ceil()
    };
    let needed = if snapped.is_finite() && snapped > 0.0 {
        snapped as usize
    } else {
        0
    };
    needed.max(num_gateways)
}

/// Per-gateway data traffic tracker used while assigning.
pub(crate) struct GatewayLoads<'a> {
    state: &'a SwarmState,
    pub ids: Vec<DroneId>,
    pub traffic: Vec<f64>,
}

impl<'a> GatewayLoads<'a> {
    pub fn new(state: &'a SwarmState) -> Self {
        let ids = state.topology().gateway_ids();
        let traffic = vec![0.0; ids.len()];
        Self { state, ids, traffic }
    }

    pub fn utilization(&self, i: usize) -> f64 {
        self.traffic[i] / self.state.service_rate(self.ids[i]).unwrap_or(1.0)
    }

    pub fn index_of(&self, id: DroneId) -> Option<usize> {
        self.ids.iter().position(|g| *g == id)
    }

    /// Weighted-cost choice of gateway for traffic located at `from`.
    pub fn choose(&self, from: &Position, alpha: f64, params: &CompositionParams) -> usize {
        let inputs: Vec<CostInput> = self
            .ids
            .iter()
            .enumerate()
            .map(|(i, g)| CostInput {
                distance: params.distance(from, &self.state.position(*g).unwrap()),
                load: self.utilization(i),
            })
            .collect();
        let keys: Vec<usize> = (0..self.ids.len()).collect();
        argmin_cost(&keys, &inputs, alpha, params.weights.scaling).unwrap_or(0)
    }
}
