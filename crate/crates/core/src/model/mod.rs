//! Swarm domain model: drones, devices, topology, allocation, atomic and
//! composite services, and the in-memory service registry.

mod allocation;
mod registry;
mod types;
mod validity;

pub use allocation::{allocate_devices, AllocationPolicy};
pub use registry::{discover, publish, RegistryQuery, ServiceDescriptor, ServiceRegistry};
pub use types::{
    Allocation, Area, Device, DeviceId, DistanceMetric, Drone, DroneId, Position, Role,
    SwarmState, Topology,
};
pub use validity::{
    validate_composite, AtomicService, CompositeService, DeviceReach, ValidityReport,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate drone id {0}")]
    DuplicateDrone(DroneId),
    #[error("duplicate device id {0}")]
    DuplicateDevice(DeviceId),
    #[error("topology has no gateway drone")]
    NoGateway,
    #[error("topology has no entry drone")]
    NoEntryDrone,
    #[error("drone {0} has non-positive service rate")]
    InvalidServiceRate(DroneId),
    #[error("drone {0} has zero device capacity")]
    InvalidCapacity(DroneId),
    #[error("device {0} has non-positive arrival rate")]
    InvalidArrivalRate(DeviceId),
    #[error("position ({x}, {y}) lies outside the {width} x {height} m service area")]
    OutOfArea { x: f64, y: f64, width: f64, height: f64 },
    #[error("service area must have positive width and height")]
    InvalidArea,
    #[error("insufficient capacity: device {device:?} cannot be placed ({demand} devices, {capacity} slots)")]
    InsufficientCapacity {
        device: Option<DeviceId>,
        demand: usize,
        capacity: usize,
    },
    #[error("unknown drone {0}")]
    UnknownDrone(DroneId),
    #[error("unknown device {0}")]
    UnknownDevice(DeviceId),
    #[error("allocation maps device {device} to gateway drone {drone}")]
    AllocatedToGateway { device: DeviceId, drone: DroneId },
    #[error("drone {drone} holds {count} devices, capacity {capacity}")]
    OverCapacity {
        drone: DroneId,
        count: usize,
        capacity: u32,
    },
    #[error("atomic service of drone {owner} contains a link not owned by it")]
    ForeignLink { owner: DroneId },
}
