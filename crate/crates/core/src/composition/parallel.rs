use std::collections::{BTreeMap, BTreeSet};

use super::{
    argmin_cost, required_units, weighted_costs, ComposeError, CompositionParams,
    CompositionPlan, CostInput, NextHop, Strategy,
};
use crate::model::{DroneId, SwarmState};

/// Number of parallel paths; same formula as the cluster count.
pub fn path_count(num_devices: usize, lambda: f64, mu: f64, num_gateways: usize) -> usize {
    required_units(num_devices, lambda, mu, num_gateways)
}

struct Chain {
    /// Gateway-adjacent anchor first; new members are appended upstream.
    members: Vec<DroneId>,
    gateway: DroneId,
    traffic: f64,
}

/// Disjoint relay chains into the gateways.
///
/// Each gateway anchors one chain at its cheapest unassigned drone; when more
/// paths are needed the cheapest remaining (drone, gateway) pairs open extra
/// chains. Remaining drones then join, one at a time, the (drone, chain) pair
/// with the lowest cost over distance to the chain's upstream tail and the
/// chain's current load.
pub fn compose_parallel(
    state: &SwarmState,
    params: &CompositionParams,
) -> Result<CompositionPlan, ComposeError> {
    let alpha = params.weights.alpha;
    let scaling = params.weights.scaling;
    let gateways = state.topology().gateway_ids();
    let access = state.topology().access_ids();
    let k = path_count(
        state.device_count(),
        state.mean_device_rate(),
        state.mean_access_rate(),
        gateways.len(),
    );
    if k > access.len() {
        return Err(ComposeError::TooFewDrones {
            k,
            available: access.len(),
        });
    }
    let pos = |d: DroneId| state.position(d).unwrap();
    let mut unassigned: BTreeSet<DroneId> = access.iter().copied().collect();
    let mut chains: Vec<Chain> = Vec::with_capacity(k);

    for g in &gateways {
        let candidates: Vec<DroneId> = unassigned.iter().copied().collect();
        let inputs: Vec<CostInput> = candidates
            .iter()
            .map(|d| CostInput {
                distance: params.distance(&pos(*d), &pos(*g)),
                load: state.own_load(*d),
            })
            .collect();
        let d = argmin_cost(&candidates, &inputs, alpha, scaling).unwrap();
        unassigned.remove(&d);
        chains.push(Chain {
            members: vec![d],
            gateway: *g,
            traffic: state.own_traffic(d),
        });
    }

    if k > gateways.len() {
        let mut pairs: Vec<(DroneId, DroneId)> = Vec::new();
        let mut inputs = Vec::new();
        for d in &unassigned {
            for g in &gateways {
                pairs.push((*d, *g));
                inputs.push(CostInput {
                    distance: params.distance(&pos(*d), &pos(*g)),
                    load: state.own_load(*d),
                });
            }
        }
        let costs = weighted_costs(&inputs, alpha, scaling);
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.sort_by(|a, b| costs[*a].total_cmp(&costs[*b]).then(pairs[*a].cmp(&pairs[*b])));
        for i in order {
            if chains.len() == k {
                break;
            }
            let (d, g) = pairs[i];
            if unassigned.remove(&d) {
                chains.push(Chain {
                    members: vec![d],
                    gateway: g,
                    traffic: state.own_traffic(d),
                });
            }
        }
    }

    while !unassigned.is_empty() {
        let mut keys = Vec::new();
        let mut inputs = Vec::new();
        for d in &unassigned {
            for (p, chain) in chains.iter().enumerate() {
                let tail = *chain.members.last().unwrap();
                let anchor_mu = state.service_rate(chain.members[0]).unwrap();
                keys.push((*d, p));
                inputs.push(CostInput {
                    distance: params.distance(&pos(*d), &pos(tail)),
                    load: chain.traffic / anchor_mu,
                });
            }
        }
        let (d, p) = argmin_cost(&keys, &inputs, alpha, scaling).unwrap();
        unassigned.remove(&d);
        chains[p].members.push(d);
        chains[p].traffic += state.own_traffic(d);
    }

    let chains: Vec<(Vec<DroneId>, DroneId)> = chains
        .into_iter()
        .map(|c| (c.members, c.gateway))
        .collect();
    Ok(parallel_from_chains(state, &chains, alpha))
}

/// Builds a parallel plan from chains given as (anchor-first members, gateway).
pub fn parallel_from_chains(
    state: &SwarmState,
    chains: &[(Vec<DroneId>, DroneId)],
    alpha: f64,
) -> CompositionPlan {
    let mut forward: BTreeMap<DroneId, NextHop> = BTreeMap::new();
    let mut paths = Vec::with_capacity(chains.len());
    for (members, gateway) in chains {
        let mut next = *gateway;
        for m in members {
            forward.insert(*m, NextHop::Drone(next));
            next = *m;
        }
        let mut path: Vec<DroneId> = members.iter().rev().copied().collect();
        path.push(*gateway);
        paths.push(path);
    }
    for g in state.topology().gateway_ids() {
        forward.insert(g, NextHop::Backhaul);
    }
    CompositionPlan {
        strategy: Strategy::Parallel,
        alpha,
        forward,
        paths,
        cluster_heads: None,
        k: Some(chains.len()),
    }
}

/// Chains of a parallel plan as (anchor-first members, gateway).
pub(crate) fn chains_of(plan: &CompositionPlan) -> Vec<(Vec<DroneId>, DroneId)> {
    plan.paths
        .iter()
        .map(|p| {
            let (g, rest) = p.split_last().unwrap();
            (rest.iter().rev().copied().collect(), *g)
        })
        .collect()
}
