//! Swarm scales, random topologies and per-bin request generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::link_budget::{device_capacity, LinkBudget, LinkBudgetError};
use crate::model::{
    allocate_devices, AllocationPolicy, Area, Device, DeviceId, Drone, DroneId, ModelError,
    Position, Role, SwarmState, Topology,
};
use crate::selection::SlaSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorkloadError {
    #[error(transparent)]
    LinkBudget(#[from] LinkBudgetError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown scale '{0}'")]
    UnknownScale(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioScale {
    pub name: String,
    pub entry_drones: usize,
    pub gateways: usize,
}

impl ScenarioScale {
    pub fn small() -> Self {
        Self::new("small", 10, 3)
    }

    pub fn medium() -> Self {
        Self::new("medium", 25, 5)
    }

    pub fn large() -> Self {
        Self::new("large", 100, 10)
    }

    /// Desk-scale stand-in for `large` when wall-clock time matters.
    pub fn reduced_large() -> Self {
        Self::new("large", 50, 8)
    }

    pub fn new(name: &str, entry_drones: usize, gateways: usize) -> Self {
        Self {
            name: name.to_string(),
            entry_drones,
            gateways,
        }
    }

    pub fn by_name(name: &str) -> Result<Self, WorkloadError> {
        match name {
            "small" => Ok(Self::small()),
            "medium" => Ok(Self::medium()),
            "large" => Ok(Self::large()),
            "reduced_large" => Ok(Self::reduced_large()),
            other => Err(WorkloadError::UnknownScale(other.to_string())),
        }
    }
}

/// Radio and placement parameters shared by every generated swarm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwarmProfile {
    pub area: Area,
    /// Common hover altitude in meters.
    pub altitude: f64,
    pub link: LinkBudget,
    /// Default per-device data rate in packets/s.
    pub device_lambda: f64,
    pub allocation: AllocationPolicy,
}

impl Default for SwarmProfile {
    fn default() -> Self {
        Self {
            area: Area::default(),
            altitude: 40.0,
            link: LinkBudget::default(),
            device_lambda: 50.0,
            allocation: AllocationPolicy::default(),
        }
    }
}

impl SwarmProfile {
    /// Per-drone data service rate from the link budget.
    pub fn service_rate(&self) -> Result<f64, LinkBudgetError> {
        self.link.data_service_rate(self.altitude)
    }

    /// Devices one drone can hold at per-device rate `lambda`.
    pub fn capacity(&self, lambda: f64) -> Result<u32, LinkBudgetError> {
        device_capacity(self.service_rate()?, lambda)
    }
}

/// Uniformly placed drones: ids `0..entry` are entry drones, the next
/// `gateways` ids are gateways. No devices.
pub fn generate_topology(
    scale: &ScenarioScale,
    profile: &SwarmProfile,
    lambda: f64,
    seed: u64,
) -> Result<Topology, WorkloadError> {
    let mu = profile.service_rate()?;
    let capacity = profile.capacity(lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let area = profile.area;
    let drones = (0..scale.entry_drones + scale.gateways)
        .map(|i| Drone {
            id: DroneId(i as u32),
            role: if i < scale.entry_drones {
                Role::Entry
            } else {
                Role::Gateway
            },
            position: Position::new(
                rng.gen_range(0.0..=area.width),
                rng.gen_range(0.0..=area.height),
                profile.altitude,
            ),
            service_rate: mu,
            capacity,
        })
        .collect();
    Ok(Topology::new(area, drones, Vec::new())?)
}

/// `count` ground devices placed uniformly in `area`.
pub fn generate_devices(count: usize, lambda: f64, area: Area, seed: u64) -> Vec<Device> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| Device {
            id: DeviceId(i as u32),
            position: Position::ground(
                rng.gen_range(0.0..=area.width),
                rng.gen_range(0.0..=area.height),
            ),
            arrival_rate: lambda,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinAxis {
    SlaLatency,
    DeviceCount,
}

/// Values a request takes when its own axis is not perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequestTemplate {
    pub device_count: usize,
    pub per_device_lambda: f64,
    pub sla: SlaSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub index: usize,
    /// Perturbed value along the bin axis.
    pub value: f64,
    pub device_count: usize,
    pub per_device_lambda: f64,
    pub sla: SlaSpec,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestBin {
    pub nominal: f64,
    pub axis: BinAxis,
    pub requests: Vec<Request>,
}

/// `count` requests around `nominal`: each draws a factor uniformly from
/// `[1 - perturbation, 1 + perturbation]` and its own seed, both from a
/// stream seeded with `seed`. Device counts are rounded to the nearest
/// integer.
pub fn generate_requests(
    nominal: f64,
    axis: BinAxis,
    template: &RequestTemplate,
    count: usize,
    perturbation: f64,
    seed: u64,
) -> RequestBin {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let requests = (0..count)
        .map(|index| {
            let factor = if perturbation > 0.0 {
                rng.gen_range(1.0 - perturbation..=1.0 + perturbation)
            } else {
                1.0
            };
            let value = nominal * factor;
            let mut req = Request {
                index,
                value,
                device_count: template.device_count,
                per_device_lambda: template.per_device_lambda,
                sla: template.sla,
                seed: rng.gen(),
            };
            match axis {
                BinAxis::SlaLatency => req.sla.latency_bound = value,
                BinAxis::DeviceCount => {
                    req.device_count = value.round() as usize;
                    req.value = req.device_count as f64;
                }
            }
            req
        })
        .collect();
    RequestBin {
        nominal,
        axis,
        requests,
    }
}

/// Builds the swarm for one request: fresh drone and device positions from
/// the request seed, then nearest-feasible allocation.
pub fn materialize(
    request: &Request,
    scale: &ScenarioScale,
    profile: &SwarmProfile,
) -> Result<SwarmState, WorkloadError> {
    let mut rng = ChaCha8Rng::seed_from_u64(request.seed);
    let topo_seed: u64 = rng.gen();
    let device_seed: u64 = rng.gen();
    let topology = generate_topology(scale, profile, request.per_device_lambda, topo_seed)?;
    let devices = generate_devices(
        request.device_count,
        request.per_device_lambda,
        profile.area,
        device_seed,
    );
    let topology = topology.with_devices(devices)?;
    let allocation = allocate_devices(&topology, &profile.allocation)?;
    Ok(SwarmState::new(topology, allocation)?)
}
