use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DroneId(pub u32);

impl fmt::Display for DroneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeviceId(pub u32);

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Position in meters. Devices sit on the ground (altitude 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub altitude: f64,
}

impl Position {
    pub fn new(x: f64, y: f64, altitude: f64) -> Self {
        Self { x, y, altitude }
    }

    pub fn ground(x: f64, y: f64) -> Self {
        Self::new(x, y, 0.0)
    }

    pub fn ground_distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn spatial_distance(&self, other: &Position) -> f64 {
        let dz = self.altitude - other.altitude;
        (self.ground_distance(other).powi(2) + dz * dz).sqrt()
    }
}

/// Distance used for allocation and cost decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    /// Ground-plane distance; drones share a hover altitude.
    #[default]
    Ground,
    Spatial,
}

impl DistanceMetric {
    pub fn between(self, a: &Position, b: &Position) -> f64 {
        match self {
            DistanceMetric::Ground => a.ground_distance(b),
            DistanceMetric::Spatial => a.spatial_distance(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Entry,
    Relay,
    Gateway,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drone {
    pub id: DroneId,
    pub role: Role,
    pub position: Position,
    /// Data packets per second.
    pub service_rate: f64,
    /// Maximum number of devices the drone may serve.
    pub capacity: u32,
}

impl Drone {
    /// Gateways bridge to the backhaul and serve no devices.
    pub fn serves_devices(&self) -> bool {
        self.role != Role::Gateway
    }

    pub fn is_gateway(&self) -> bool {
        self.role == Role::Gateway
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub id: DeviceId,
    pub position: Position,
    /// Data packets per second.
    pub arrival_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

impl Area {
    pub fn square(side: f64) -> Self {
        Self {
            width: side,
            height: side,
        }
    }

    pub fn contains(&self, p: &Position) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }
}

impl Default for Area {
    fn default() -> Self {
        Self::square(100.0)
    }
}

#[derive(Deserialize)]
struct TopologyRepr {
    area: Area,
    drones: Vec<Drone>,
    #[serde(default)]
    devices: Vec<Device>,
}

/// Drones and devices over a service area. Both lists are kept sorted by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TopologyRepr")]
pub struct Topology {
    area: Area,
    drones: Vec<Drone>,
    devices: Vec<Device>,
}

impl TryFrom<TopologyRepr> for Topology {
    type Error = ModelError;

    fn try_from(repr: TopologyRepr) -> Result<Self, Self::Error> {
        Topology::new(repr.area, repr.drones, repr.devices)
    }
}

impl Topology {
    pub fn new(
        area: Area,
        mut drones: Vec<Drone>,
        mut devices: Vec<Device>,
    ) -> Result<Self, ModelError> {
        if !(area.width > 0.0 && area.height > 0.0) {
            return Err(ModelError::InvalidArea);
        }
        drones.sort_by_key(|d| d.id);
        devices.sort_by_key(|d| d.id);
        for pair in drones.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(ModelError::DuplicateDrone(pair[0].id));
            }
        }
        for pair in devices.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(ModelError::DuplicateDevice(pair[0].id));
            }
        }
        let out_of_area = |p: &Position| ModelError::OutOfArea {
            x: p.x,
            y: p.y,
            width: area.width,
            height: area.height,
        };
        for d in &drones {
            if !(d.service_rate > 0.0 && d.service_rate.is_finite()) {
                return Err(ModelError::InvalidServiceRate(d.id));
            }
            if d.capacity == 0 {
                return Err(ModelError::InvalidCapacity(d.id));
            }
            if !area.contains(&d.position) {
                return Err(out_of_area(&d.position));
            }
        }
        for u in &devices {
            if !(u.arrival_rate > 0.0 && u.arrival_rate.is_finite()) {
                return Err(ModelError::InvalidArrivalRate(u.id));
            }
            if !area.contains(&u.position) {
                return Err(out_of_area(&u.position));
            }
        }
        if !drones.iter().any(Drone::is_gateway) {
            return Err(ModelError::NoGateway);
        }
        if !drones.iter().any(|d| d.role == Role::Entry) {
            return Err(ModelError::NoEntryDrone);
        }
        Ok(Self {
            area,
            drones,
            devices,
        })
    }

    pub fn area(&self) -> Area {
        self.area
    }

    pub fn drones(&self) -> &[Drone] {
        &self.drones
    }

    pub fn devices(&self) -> &[Device] {
        &self.devices
    }

    pub fn drone(&self, id: DroneId) -> Option<&Drone> {
        self.drones
            .binary_search_by_key(&id, |d| d.id)
            .ok()
            .map(|i| &self.drones[i])
    }

    pub fn device(&self, id: DeviceId) -> Option<&Device> {
        self.devices
            .binary_search_by_key(&id, |d| d.id)
            .ok()
            .map(|i| &self.devices[i])
    }

    pub fn gateways(&self) -> impl Iterator<Item = &Drone> + '_ {
        self.drones.iter().filter(|d| d.is_gateway())
    }

    /// Entry and relay drones, i.e. everything that is not a gateway.
    pub fn access_drones(&self) -> impl Iterator<Item = &Drone> + '_ {
        self.drones.iter().filter(|d| d.serves_devices())
    }

    pub fn gateway_ids(&self) -> Vec<DroneId> {
        self.gateways().map(|d| d.id).collect()
    }

    pub fn access_ids(&self) -> Vec<DroneId> {
        self.access_drones().map(|d| d.id).collect()
    }

    /// Same drones, new device population.
    pub fn with_devices(&self, devices: Vec<Device>) -> Result<Self, ModelError> {
        Self::new(self.area, self.drones.clone(), devices)
    }

    /// Same topology with extra drones (used by scale-out what-ifs).
    pub fn with_extra_drones(&self, extra: Vec<Drone>) -> Result<Self, ModelError> {
        let mut drones = self.drones.clone();
        drones.extend(extra);
        Self::new(self.area, drones, self.devices.clone())
    }
}

/// Device-to-drone assignment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation {
    assignments: BTreeMap<DeviceId, DroneId>,
}

impl Allocation {
    pub fn new(assignments: BTreeMap<DeviceId, DroneId>) -> Self {
        Self { assignments }
    }

    pub fn drone_of(&self, device: DeviceId) -> Option<DroneId> {
        self.assignments.get(&device).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DeviceId, DroneId)> + '_ {
        self.assignments.iter().map(|(u, d)| (*u, *d))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Devices per drone; drones without devices are absent.
    pub fn counts(&self) -> BTreeMap<DroneId, usize> {
        let mut out = BTreeMap::new();
        for d in self.assignments.values() {
            *out.entry(*d).or_insert(0) += 1;
        }
        out
    }

    pub fn devices_on(&self, drone: DroneId) -> Vec<DeviceId> {
        self.assignments
            .iter()
            .filter(|(_, d)| **d == drone)
            .map(|(u, _)| *u)
            .collect()
    }

    /// Checks totality over the topology's devices, role and capacity limits.
    pub fn check(&self, topology: &Topology) -> Result<(), ModelError> {
        for dev in topology.devices() {
            if !self.assignments.contains_key(&dev.id) {
                return Err(ModelError::UnknownDevice(dev.id));
            }
        }
        for (u, d) in &self.assignments {
            if topology.device(*u).is_none() {
                return Err(ModelError::UnknownDevice(*u));
            }
            let drone = topology.drone(*d).ok_or(ModelError::UnknownDrone(*d))?;
            if !drone.serves_devices() {
                return Err(ModelError::AllocatedToGateway {
                    device: *u,
                    drone: *d,
                });
            }
        }
        for (d, count) in self.counts() {
            let cap = topology.drone(d).map(|x| x.capacity).unwrap_or(0);
            if count > cap as usize {
                return Err(ModelError::OverCapacity {
                    drone: d,
                    count,
                    capacity: cap,
                });
            }
        }
        Ok(())
    }
}

/// Topology plus allocation, with per-drone offered data traffic cached.
///
/// This is the read-only swarm snapshot consumed by composition, queueing and
/// enforcement.
#[derive(Debug, Clone)]
pub struct SwarmState {
    topology: Topology,
    allocation: Allocation,
    own_traffic: BTreeMap<DroneId, f64>,
}

impl SwarmState {
    pub fn new(topology: Topology, allocation: Allocation) -> Result<Self, ModelError> {
        allocation.check(&topology)?;
        let mut own_traffic: BTreeMap<DroneId, f64> =
            topology.drones().iter().map(|d| (d.id, 0.0)).collect();
        for (u, d) in allocation.iter() {
            let lambda = topology.device(u).map(|x| x.arrival_rate).unwrap_or(0.0);
            *own_traffic.entry(d).or_insert(0.0) += lambda;
        }
        Ok(Self {
            topology,
            allocation,
            own_traffic,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn allocation(&self) -> &Allocation {
        &self.allocation
    }

    /// Data packets/s generated by the devices allocated to `drone`.
    pub fn own_traffic(&self, drone: DroneId) -> f64 {
        self.own_traffic.get(&drone).copied().unwrap_or(0.0)
    }

    /// Own traffic divided by the drone's service rate.
    pub fn own_load(&self, drone: DroneId) -> f64 {
        match self.topology.drone(drone) {
            Some(d) => self.own_traffic(drone) / d.service_rate,
            None => 0.0,
        }
    }

    pub fn total_demand(&self) -> f64 {
        self.own_traffic.values().sum()
    }

    pub fn device_count(&self) -> usize {
        self.topology.devices().len()
    }

    /// Mean per-device arrival rate (0 with no devices).
    pub fn mean_device_rate(&self) -> f64 {
        let n = self.device_count();
        if n == 0 {
            0.0
        } else {
            self.total_demand() / n as f64
        }
    }

    /// Mean service rate over the non-gateway drones.
    pub fn mean_access_rate(&self) -> f64 {
        let rates: Vec<f64> = self
            .topology
            .access_drones()
            .map(|d| d.service_rate)
            .collect();
        rates.iter().sum::<f64>() / rates.len().max(1) as f64
    }

    pub fn position(&self, drone: DroneId) -> Option<Position> {
        self.topology.drone(drone).map(|d| d.position)
    }

    pub fn service_rate(&self, drone: DroneId) -> Option<f64> {
        self.topology.drone(drone).map(|d| d.service_rate)
    }

    pub fn gateway_set(&self) -> BTreeSet<DroneId> {
        self.topology.gateway_ids().into_iter().collect()
    }
}
