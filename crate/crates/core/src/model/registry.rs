use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AtomicService, DroneId, ModelError, Role, Topology};

/// Registry entry for one drone's atomic service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceDescriptor {
    pub service: AtomicService,
    pub role: Role,
    pub neighbors: Vec<DroneId>,
    pub reaches_gateway: bool,
    /// Data packets per second.
    pub service_rate: f64,
    /// Current offered utilization.
    pub load: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegistryQuery {
    All,
    Role(Role),
    ReachesGateway(bool),
}

impl RegistryQuery {
    fn matches(&self, d: &ServiceDescriptor) -> bool {
        match self {
            RegistryQuery::All => true,
            RegistryQuery::Role(r) => d.role == *r,
            RegistryQuery::ReachesGateway(want) => d.reaches_gateway == *want,
        }
    }
}

/// In-memory catalog of published atomic services, keyed by drone id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ServiceRegistry {
    catalog: BTreeMap<DroneId, ServiceDescriptor>,
}

impl ServiceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.catalog.len()
    }

    pub fn is_empty(&self) -> bool {
        self.catalog.is_empty()
    }

    pub fn get(&self, drone: DroneId) -> Option<&ServiceDescriptor> {
        self.catalog.get(&drone)
    }
}

/// Returns a registry with `descriptor` added, replacing any earlier entry
/// for the same drone.
pub fn publish(
    registry: &ServiceRegistry,
    topology: &Topology,
    descriptor: ServiceDescriptor,
) -> Result<ServiceRegistry, ModelError> {
    let id = descriptor.service.drone;
    if topology.drone(id).is_none() {
        return Err(ModelError::UnknownDrone(id));
    }
    let mut next = registry.clone();
    next.catalog.insert(id, descriptor);
    Ok(next)
}

/// Matching descriptors in drone-id order.
pub fn discover(registry: &ServiceRegistry, query: RegistryQuery) -> Vec<ServiceDescriptor> {
    registry
        .catalog
        .values()
        .filter(|d| query.matches(d))
        .cloned()
        .collect()
}
