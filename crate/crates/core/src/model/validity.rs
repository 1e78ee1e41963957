use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Allocation, DeviceId, DroneId, ModelError, Topology};
use crate::composition::{CompositionPlan, NextHop};

/// One drone's bundle of device links and drone-to-drone relay links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicService {
    pub drone: DroneId,
    pub device_links: BTreeSet<(DeviceId, DroneId)>,
    pub relay_links: BTreeSet<(DroneId, DroneId)>,
}

impl AtomicService {
    pub fn new(
        drone: DroneId,
        device_links: BTreeSet<(DeviceId, DroneId)>,
        relay_links: BTreeSet<(DroneId, DroneId)>,
    ) -> Result<Self, ModelError> {
        let foreign = device_links.iter().any(|(_, d)| *d != drone)
            || relay_links.iter().any(|(from, _)| *from != drone);
        if foreign {
            return Err(ModelError::ForeignLink { owner: drone });
        }
        Ok(Self {
            drone,
            device_links,
            relay_links,
        })
    }

    pub fn neighbors(&self) -> Vec<DroneId> {
        self.relay_links.iter().map(|(_, to)| *to).collect()
    }
}

/// Union of atomic services wired by a composition plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeService {
    pub atomic_services: BTreeMap<DroneId, AtomicService>,
    pub plan: CompositionPlan,
}

impl CompositeService {
    /// Builds one atomic service per drone in the plan, with device links from
    /// the allocation and the relay link to the plan's next hop.
    pub fn from_plan(plan: &CompositionPlan, allocation: &Allocation) -> Self {
        let mut atomic_services: BTreeMap<DroneId, AtomicService> = plan
            .forward
            .iter()
            .map(|(drone, hop)| {
                let relay_links = match hop {
                    NextHop::Drone(next) => [(*drone, *next)].into_iter().collect(),
                    NextHop::Backhaul => BTreeSet::new(),
                };
                (
                    *drone,
                    AtomicService {
                        drone: *drone,
                        device_links: BTreeSet::new(),
                        relay_links,
                    },
                )
            })
            .collect();
        for (u, d) in allocation.iter() {
            atomic_services
                .entry(d)
                .or_insert_with(|| AtomicService {
                    drone: d,
                    device_links: BTreeSet::new(),
                    relay_links: BTreeSet::new(),
                })
                .device_links
                .insert((u, d));
        }
        Self {
            atomic_services,
            plan: plan.clone(),
        }
    }

    pub fn with_extra_relay_link(&self, from: DroneId, to: DroneId) -> Self {
        let mut out = self.clone();
        out.atomic_services
            .entry(from)
            .or_insert_with(|| AtomicService {
                drone: from,
                device_links: BTreeSet::new(),
                relay_links: BTreeSet::new(),
            })
            .relay_links
            .insert((from, to));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceReach {
    pub device: DeviceId,
    pub entry: Option<DroneId>,
    /// Drone sequence from the entry drone to a gateway, when one exists.
    pub route: Option<Vec<DroneId>>,
}

impl DeviceReach {
    /// Drone-to-drone hops on the route.
    pub fn hops(&self) -> Option<usize> {
        self.route.as_ref().map(|r| r.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub devices: Vec<DeviceReach>,
    pub valid: bool,
}

impl ValidityReport {
    pub fn unreachable(&self) -> Vec<DeviceId> {
        self.devices
            .iter()
            .filter(|r| r.route.is_none())
            .map(|r| r.device)
            .collect()
    }
}

/// Checks that every device has a link path ending at a gateway.
pub fn validate_composite(service: &CompositeService, topology: &Topology) -> ValidityReport {
    let gateways = topology.gateway_ids();
    let mut adjacency: BTreeMap<DroneId, BTreeSet<DroneId>> = BTreeMap::new();
    let mut entry_of: BTreeMap<DeviceId, DroneId> = BTreeMap::new();
    for atomic in service.atomic_services.values() {
        for (from, to) in &atomic.relay_links {
            adjacency.entry(*from).or_default().insert(*to);
        }
        for (u, d) in &atomic.device_links {
            entry_of.insert(*u, *d);
        }
    }

    let mut cache: BTreeMap<DroneId, Option<Vec<DroneId>>> = BTreeMap::new();
    let devices: Vec<DeviceReach> = topology
        .devices()
        .iter()
        .map(|dev| {
            let entry = entry_of.get(&dev.id).copied();
            let route = entry.and_then(|start| {
                cache
                    .entry(start)
                    .or_insert_with(|| shortest_route(start, &adjacency, &gateways))
                    .clone()
            });
            DeviceReach {
                device: dev.id,
                entry,
                route,
            }
        })
        .collect();
    let valid = devices.iter().all(|r| r.route.is_some());
    ValidityReport { devices, valid }
}

fn shortest_route(
    start: DroneId,
    adjacency: &BTreeMap<DroneId, BTreeSet<DroneId>>,
    gateways: &[DroneId],
) -> Option<Vec<DroneId>> {
    let mut parent: BTreeMap<DroneId, DroneId> = BTreeMap::new();
    let mut seen: BTreeSet<DroneId> = [start].into_iter().collect();
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if gateways.contains(&node) {
            let mut route = vec![node];
            let mut cur = node;
            while let Some(p) = parent.get(&cur) {
                route.push(*p);
                cur = *p;
            }
            route.reverse();
            return Some(route);
        }
        for next in adjacency.get(&node).into_iter().flatten() {
            if seen.insert(*next) {
                parent.insert(*next, node);
                queue.push_back(*next);
            }
        }
    }
    None
}
