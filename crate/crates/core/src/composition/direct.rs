use std::collections::BTreeMap;

use super::{CompositionParams, CompositionPlan, GatewayLoads, NextHop, Strategy};
use crate::model::{DroneId, SwarmState};

/// Every non-gateway drone forwards straight to one gateway. Drones are
/// assigned in id order; each picks the gateway with the lowest weighted
/// distance/load cost, and that gateway's load grows before the next choice.
pub fn compose_direct(state: &SwarmState, params: &CompositionParams) -> CompositionPlan {
    let alpha = params.weights.alpha;
    let mut loads = GatewayLoads::new(state);
    let mut assignment = BTreeMap::new();
    for drone in state.topology().access_drones() {
        let g = loads.choose(&drone.position, alpha, params);
        loads.traffic[g] += state.own_traffic(drone.id);
        assignment.insert(drone.id, loads.ids[g]);
    }
    direct_from_assignment(state, &assignment, alpha)
}

/// Builds a direct plan from an explicit drone → gateway map.
pub fn direct_from_assignment(
    state: &SwarmState,
    assignment: &BTreeMap<DroneId, DroneId>,
    alpha: f64,
) -> CompositionPlan {
    let mut forward: BTreeMap<DroneId, NextHop> = BTreeMap::new();
    let mut paths = Vec::with_capacity(assignment.len());
    for (d, g) in assignment {
        forward.insert(*d, NextHop::Drone(*g));
        paths.push(vec![*d, *g]);
    }
    for g in state.topology().gateway_ids() {
        forward.insert(g, NextHop::Backhaul);
    }
    CompositionPlan {
        strategy: Strategy::Direct,
        alpha,
        forward,
        paths,
        cluster_heads: None,
        k: None,
    }
}
