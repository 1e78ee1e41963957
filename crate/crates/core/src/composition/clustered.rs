use std::collections::BTreeMap;

use super::kmeans::kmeans;
use super::{
    argmin_cost, required_units, ComposeError, CompositionParams, CompositionPlan, CostInput,
    GatewayLoads, NextHop, Strategy,
};
use crate::model::{DroneId, Position, SwarmState};

/// Number of clusters: `max(|G|, ceil(|U| lambda / mu))`.
pub fn cluster_count(num_devices: usize, lambda: f64, mu: f64, num_gateways: usize) -> usize {
    required_units(num_devices, lambda, mu, num_gateways)
}

/// One cluster of a clustered plan.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPart {
    pub head: DroneId,
    pub members: Vec<DroneId>,
    pub gateway: DroneId,
}

/// Clustered composition with `k` from [`cluster_count`].
pub fn compose_clustered(
    state: &SwarmState,
    params: &CompositionParams,
) -> Result<CompositionPlan, ComposeError> {
    let k = cluster_count(
        state.device_count(),
        state.mean_device_rate(),
        state.mean_access_rate(),
        state.topology().gateway_ids().len(),
    );
    compose_clustered_k(state, params, k)
}

/// k-means groups the non-gateway drones; each cluster (in order of its
/// lowest drone id) picks a gateway by weighted cost from its centroid, then
/// a head by weighted cost towards that gateway. Members forward to the head,
/// the head forwards to the gateway.
pub fn compose_clustered_k(
    state: &SwarmState,
    params: &CompositionParams,
    k: usize,
) -> Result<CompositionPlan, ComposeError> {
    let parts = cluster_parts(state, params, k)?;
    Ok(clustered_from_parts(state, &parts, params.weights.alpha))
}

/// k-means partition of the non-gateway drones, members in id order,
/// clusters in order of their lowest member id.
pub(crate) fn partition(
    state: &SwarmState,
    params: &CompositionParams,
    k: usize,
) -> Result<Vec<Vec<DroneId>>, ComposeError> {
    let access: Vec<_> = state.topology().access_drones().collect();
    if k == 0 || k > access.len() {
        return Err(ComposeError::TooFewDrones {
            k,
            available: access.len(),
        });
    }
    let points: Vec<[f64; 2]> = access
        .iter()
        .map(|d| [d.position.x, d.position.y])
        .collect();
    let clustering = kmeans(&points, k, params.seed, &params.kmeans);
    Ok((0..k)
        .map(|c| {
            clustering
                .members(c)
                .into_iter()
                .map(|i| access[i].id)
                .collect()
        })
        .collect())
}

pub(crate) fn centroid(state: &SwarmState, members: &[DroneId]) -> Position {
    let n = members.len() as f64;
    let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
    for m in members {
        let p = state.position(*m).unwrap();
        x += p.x;
        y += p.y;
        z += p.altitude;
    }
    Position::new(x / n, y / n, z / n)
}

/// Head choice within a cluster: weighted distance to `gateway` and own load.
pub(crate) fn choose_head(
    state: &SwarmState,
    params: &CompositionParams,
    members: &[DroneId],
    gateway: DroneId,
    alpha: f64,
) -> DroneId {
    let gpos = state.position(gateway).unwrap();
    let inputs: Vec<CostInput> = members
        .iter()
        .map(|m| CostInput {
            distance: params.distance(&state.position(*m).unwrap(), &gpos),
            load: state.own_load(*m),
        })
        .collect();
    argmin_cost(members, &inputs, alpha, params.weights.scaling).unwrap()
}

fn cluster_parts(
    state: &SwarmState,
    params: &CompositionParams,
    k: usize,
) -> Result<Vec<ClusterPart>, ComposeError> {
    let alpha = params.weights.alpha;
    let clusters = partition(state, params, k)?;
    let mut loads = GatewayLoads::new(state);
    let mut parts = Vec::with_capacity(clusters.len());
    for members in clusters {
        let c = centroid(state, &members);
        let g = loads.choose(&c, alpha, params);
        let gateway = loads.ids[g];
        let head = choose_head(state, params, &members, gateway, alpha);
        loads.traffic[g] += members.iter().map(|m| state.own_traffic(*m)).sum::<f64>();
        parts.push(ClusterPart {
            head,
            members,
            gateway,
        });
    }
    Ok(parts)
}

/// Builds a clustered plan from explicit (head, members, gateway) triples.
pub fn clustered_from_parts(state: &SwarmState, parts: &[ClusterPart], alpha: f64) -> CompositionPlan {
    let mut forward: BTreeMap<DroneId, NextHop> = BTreeMap::new();
    let mut routes: BTreeMap<DroneId, Vec<DroneId>> = BTreeMap::new();
    for part in parts {
        forward.insert(part.head, NextHop::Drone(part.gateway));
        routes.insert(part.head, vec![part.head, part.gateway]);
        for m in &part.members {
            if *m != part.head {
                forward.insert(*m, NextHop::Drone(part.head));
                routes.insert(*m, vec![*m, part.head, part.gateway]);
            }
        }
    }
    for g in state.topology().gateway_ids() {
        forward.insert(g, NextHop::Backhaul);
    }
    let mut heads: Vec<DroneId> = parts.iter().map(|p| p.head).collect();
    heads.sort();
    CompositionPlan {
        strategy: Strategy::Clustered,
        alpha,
        forward,
        paths: routes.into_values().collect(),
        cluster_heads: Some(heads),
        k: Some(parts.len()),
    }
}

/// Recovers (head, members, gateway) triples from a clustered plan, in order
/// of each cluster's lowest member id.
pub(crate) fn parts_of(plan: &CompositionPlan) -> Vec<ClusterPart> {
    let mut parts: Vec<ClusterPart> = plan
        .clusters()
        .into_iter()
        .map(|(head, members)| ClusterPart {
            head,
            gateway: match plan.next_hop(head) {
                Some(NextHop::Drone(g)) => g,
                _ => head,
            },
            members,
        })
        .collect();
    parts.sort_by_key(|p| p.members[0]);
    parts
}
