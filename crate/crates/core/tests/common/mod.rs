#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use swarmlink::model::{allocate_devices, AllocationPolicy};
use swarmlink::workload::{generate_devices, generate_topology, ScenarioScale, SwarmProfile};
use swarmlink::{Allocation, Area, Device, DeviceId, Drone, DroneId, Position, Role, SwarmState, Topology};

pub fn drone(id: u32, role: Role, x: f64, y: f64, mu: f64) -> Drone {
    Drone {
        id: DroneId(id),
        role,
        position: Position::new(x, y, 40.0),
        service_rate: mu,
        capacity: 1000,
    }
}

pub fn entry(id: u32, x: f64, y: f64, mu: f64) -> Drone {
    drone(id, Role::Entry, x, y, mu)
}

pub fn gateway(id: u32, x: f64, y: f64, mu: f64) -> Drone {
    drone(id, Role::Gateway, x, y, mu)
}

/// Swarm where drone `id` serves `count` devices of rate `lambda`, all placed
/// on top of it and allocated explicitly.
pub fn build(drones: Vec<Drone>, devices: &[(u32, usize)], lambda: f64) -> SwarmState {
    let mut list = Vec::new();
    let mut alloc = BTreeMap::new();
    let mut next = 0u32;
    for (owner, count) in devices {
        let d = drones.iter().find(|d| d.id.0 == *owner).expect("owner exists");
        for _ in 0..*count {
            list.push(Device {
                id: DeviceId(next),
                position: Position::ground(d.position.x, d.position.y),
                arrival_rate: lambda,
            });
            alloc.insert(DeviceId(next), d.id);
            next += 1;
        }
    }
    let topology = Topology::new(Area::default(), drones, list).expect("valid topology");
    SwarmState::new(topology, Allocation::new(alloc)).expect("valid allocation")
}

/// Uniform random swarm with nearest-feasible allocation.
pub fn random_state(entries: usize, gateways: usize, devices: usize, lambda: f64, seed: u64) -> SwarmState {
    let profile = SwarmProfile::default();
    let scale = ScenarioScale::new("test", entries, gateways);
    let topology = generate_topology(&scale, &profile, lambda, seed).unwrap();
    let cap = topology.drones()[0].capacity as usize;
    let n = devices.min(cap * entries);
    let topology = topology
        .with_devices(generate_devices(n, lambda, profile.area, seed.wrapping_add(1)))
        .unwrap();
    let allocation = allocate_devices(&topology, &AllocationPolicy::default()).unwrap();
    SwarmState::new(topology, allocation).unwrap()
}

/// Random swarms from light to heavily overloaded.
pub fn arb_state() -> impl Strategy<Value = SwarmState> {
    (1usize..=8, 1usize..=4, 0usize..=160, 5.0f64..200.0, any::<u64>())
        .prop_map(|(e, g, n, lambda, seed)| random_state(e, g, n, lambda, seed))
}

/// Small swarms whose direct assignment space `|G|^|entry|` stays within 200.
pub fn arb_enumerable_state() -> impl Strategy<Value = SwarmState> {
    prop_oneof![
        (1usize..=7, Just(2usize)),
        (1usize..=4, Just(3usize)),
        (1usize..=3, Just(4usize)),
        (1usize..=3, Just(5usize)),
    ]
    .prop_flat_map(|(e, g)| (Just(e), Just(g), 0usize..=150, 20.0f64..200.0, any::<u64>()))
    .prop_map(|(e, g, n, lambda, seed)| random_state(e, g, n, lambda, seed))
}

pub fn rel_err(actual: f64, expected: f64) -> f64 {
    ((actual - expected) / expected).abs()
}
