//! JSON scenario files: swarm layout, radio profile and optional request
//! overrides.
//!
//! Missing per-drone service rates and capacities come from the link budget;
//! missing device rates from `device_lambda`. Every optional field falls back
//! to the built-in default, and command-line flags override both.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "area": { "width": 100, "height": 100 },
//!   "altitude": 40,
//!   "device_lambda": 50,
//!   "drones": [
//!     { "id": 0, "role": "entry", "x": 10, "y": 20 },
//!     { "id": 1, "role": "gateway", "x": 90, "y": 80, "service_rate": 4000 }
//!   ],
//!   "devices": [{ "id": 0, "x": 12, "y": 18 }],
//!   "sla": { "latency_bound": 0.002, "metric": "avg", "rho_max": 0.95 }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composition::CompositionParams;
use crate::link_budget::{LinkBudget, LinkBudgetError};
use crate::model::{
    allocate_devices, AllocationPolicy, Area, Device, DeviceId, Drone, DroneId, ModelError,
    Position, Role, SwarmState, Topology,
};
use crate::queueing::QueueingConfig;
use crate::selection::SlaSpec;
use crate::workload::{
    generate_devices, generate_topology, RequestBin, ScenarioScale, SwarmProfile, WorkloadError,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid scenario JSON: {0}")]
    Parse(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    LinkBudget(#[from] LinkBudgetError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneSpec {
    pub id: u32,
    pub role: Role,
    pub x: f64,
    pub y: f64,
    /// Defaults to the scenario altitude.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub altitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub seed: u64,
    pub area: Area,
    pub altitude: f64,
    pub link_budget: LinkBudget,
    pub device_lambda: f64,
    pub allocation: AllocationPolicy,
    pub drones: Vec<DroneSpec>,
    pub devices: Vec<DeviceSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sla: Option<SlaSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub composition: Option<CompositionParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub queueing: Option<QueueingConfig>,
    /// Request bins saved for exact replay.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub requests: Vec<RequestBin>,
}

impl Default for Scenario {
    fn default() -> Self {
        let profile = SwarmProfile::default();
        Self {
            seed: 0,
            area: profile.area,
            altitude: profile.altitude,
            link_budget: profile.link,
            device_lambda: profile.device_lambda,
            allocation: profile.allocation,
            drones: Vec::new(),
            devices: Vec::new(),
            sla: None,
            composition: None,
            queueing: None,
            requests: Vec::new(),
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn profile(&self) -> SwarmProfile {
        SwarmProfile {
            area: self.area,
            altitude: self.altitude,
            link: self.link_budget.clone(),
            device_lambda: self.device_lambda,
            allocation: self.allocation,
        }
    }

    pub fn topology(&self) -> Result<Topology, ScenarioError> {
        let profile = self.profile();
        let needs_rate = self
            .drones
            .iter()
            .any(|d| d.service_rate.is_none() || d.capacity.is_none());
        let default_mu = if needs_rate {
            Some(profile.service_rate()?)
        } else {
            None
        };
        let drones = self
            .drones
            .iter()
            .map(|d| {
                let mu = d.service_rate.or(default_mu).unwrap_or(0.0);
                let capacity = match d.capacity {
                    Some(c) => c,
                    None => crate::link_budget::device_capacity(mu, self.device_lambda)?,
                };
                Ok(Drone {
                    id: DroneId(d.id),
                    role: d.role,
                    position: Position::new(d.x, d.y, d.altitude.unwrap_or(self.altitude)),
                    service_rate: mu,
                    capacity,
                })
            })
            .collect::<Result<Vec<_>, LinkBudgetError>>()?;
        let devices = self
            .devices
            .iter()
            .map(|d| Device {
                id: DeviceId(d.id),
                position: Position::ground(d.x, d.y),
                arrival_rate: d.arrival_rate.unwrap_or(self.device_lambda),
            })
            .collect();
        Ok(Topology::new(self.area, drones, devices)?)
    }

    /// Topology plus nearest-feasible device allocation.
    pub fn state(&self) -> Result<SwarmState, ScenarioError> {
        let topology = self.topology()?;
        let allocation = allocate_devices(&topology, &self.allocation)?;
        Ok(SwarmState::new(topology, allocation)?)
    }

    /// Random layout at the given scale with `devices` uniform devices.
    pub fn generated(
        scale: &ScenarioScale,
        devices: usize,
        profile: &SwarmProfile,
        seed: u64,
    ) -> Result<Self, ScenarioError> {
        let topology = generate_topology(scale, profile, profile.device_lambda, seed)?;
        let devices = generate_devices(devices, profile.device_lambda, profile.area, seed ^ 0x5eed);
        Ok(Self {
            seed,
            area: profile.area,
            altitude: profile.altitude,
            link_budget: profile.link.clone(),
            device_lambda: profile.device_lambda,
            allocation: profile.allocation,
            drones: topology
                .drones()
                .iter()
                .map(|d| DroneSpec {
                    id: d.id.0,
                    role: d.role,
                    x: d.position.x,
                    y: d.position.y,
                    altitude: None,
                    service_rate: None,
                    capacity: None,
                })
                .collect(),
            devices: devices
                .iter()
                .map(|d| DeviceSpec {
                    id: d.id.0,
                    x: d.position.x,
                    y: d.position.y,
                    arrival_rate: None,
                })
                .collect(),
            ..Self::default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_uses_link_budget_defaults() {
        let s = Scenario::from_json(
            r#"{"drones":[{"id":0,"role":"entry","x":1,"y":1},{"id":1,"role":"gateway","x":5,"y":5}],
                "devices":[{"id":0,"x":1,"y":2}]}"#,
        )
        .unwrap();
        let state = s.state().unwrap();
        let d = state.topology().drone(DroneId(0)).unwrap();
        assert_eq!(d.capacity, 73);
        assert_eq!(d.position.altitude, 40.0);
        assert_eq!(state.topology().devices()[0].arrival_rate, 50.0);
    }

    #[test]
    fn generated_round_trips() {
        let s = Scenario::generated(&ScenarioScale::small(), 50, &SwarmProfile::default(), 3).unwrap();
        let back = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
        assert_eq!(back.state().unwrap().device_count(), 50);
    }
}
