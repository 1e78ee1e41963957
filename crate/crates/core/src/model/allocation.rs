use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Allocation, DistanceMetric, ModelError, Topology};

/// Device-to-drone allocation rule: nearest serving drone with spare capacity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AllocationPolicy {
    /// Maximum device-drone distance in meters; `None` means the whole area.
    pub radius: Option<f64>,
    #[serde(default)]
    pub metric: DistanceMetric,
}

/// Assigns every device, in id order, to the nearest non-gateway drone that
/// still has spare capacity. Distance ties go to the lowest drone id.
pub fn allocate_devices(
    topology: &Topology,
    policy: &AllocationPolicy,
) -> Result<Allocation, ModelError> {
    let servers: Vec<_> = topology.access_drones().collect();
    let capacity: usize = servers.iter().map(|d| d.capacity as usize).sum();
    let demand = topology.devices().len();
    if demand > capacity {
        return Err(ModelError::InsufficientCapacity {
            device: None,
            demand,
            capacity,
        });
    }

    let mut used = vec![0u32; servers.len()];
    let mut assignments = BTreeMap::new();
    for device in topology.devices() {
        let mut best: Option<(f64, usize)> = None;
        for (i, drone) in servers.iter().enumerate() {
            if used[i] >= drone.capacity {
                continue;
            }
            let dist = policy.metric.between(&device.position, &drone.position);
            if policy.radius.is_some_and(|r| dist > r) {
                continue;
            }
            // servers are sorted by id, so strict < keeps the lowest id on ties
            if best.map_or(true, |(b, _)| dist < b) {
                best = Some((dist, i));
            }
        }
        let (_, i) = best.ok_or(ModelError::InsufficientCapacity {
            device: Some(device.id),
            demand,
            capacity,
        })?;
        used[i] += 1;
        assignments.insert(device.id, servers[i].id);
    }
    Ok(Allocation::new(assignments))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Area, Device, DeviceId, Drone, DroneId, Position, Role};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn drone(id: u32, role: Role, x: f64, y: f64, cap: u32) -> Drone {
        Drone {
            id: DroneId(id),
            role,
            position: Position::new(x, y, 40.0),
            service_rate: 100.0,
            capacity: cap,
        }
    }

    fn device(id: u32, x: f64, y: f64) -> Device {
        Device {
            id: DeviceId(id),
            position: Position::ground(x, y),
            arrival_rate: 1.0,
        }
    }

    #[test]
    fn single_feasible_choice() {
        let topo = Topology::new(
            Area::square(100.0),
            vec![
                drone(0, Role::Entry, 10.0, 10.0, 5),
                drone(1, Role::Gateway, 90.0, 90.0, 5),
            ],
            vec![device(0, 10.0, 10.0)],
        )
        .unwrap();
        let a = allocate_devices(&topo, &AllocationPolicy::default()).unwrap();
        assert_eq!(a.drone_of(DeviceId(0)), Some(DroneId(0)));
    }

    #[test]
    fn capacity_forces_spill() {
        let topo = Topology::new(
            Area::square(100.0),
            vec![
                drone(0, Role::Entry, 10.0, 10.0, 1),
                drone(1, Role::Entry, 80.0, 80.0, 1),
                drone(2, Role::Gateway, 50.0, 50.0, 1),
            ],
            vec![device(0, 11.0, 10.0), device(1, 12.0, 10.0)],
        )
        .unwrap();
        let a = allocate_devices(&topo, &AllocationPolicy::default()).unwrap();
        assert_eq!(a.drone_of(DeviceId(0)), Some(DroneId(0)));
        assert_eq!(a.drone_of(DeviceId(1)), Some(DroneId(1)));
    }

    #[test]
    fn insufficient_capacity_is_reported() {
        let topo = Topology::new(
            Area::square(100.0),
            vec![
                drone(0, Role::Entry, 10.0, 10.0, 1),
                drone(1, Role::Gateway, 50.0, 50.0, 1),
            ],
            vec![device(0, 11.0, 10.0), device(1, 12.0, 10.0)],
        )
        .unwrap();
        let err = allocate_devices(&topo, &AllocationPolicy::default()).unwrap_err();
        assert!(matches!(err, ModelError::InsufficientCapacity { .. }));
    }

    #[test]
    fn radius_excludes_far_drones() {
        let topo = Topology::new(
            Area::square(100.0),
            vec![
                drone(0, Role::Entry, 90.0, 90.0, 5),
                drone(1, Role::Gateway, 50.0, 50.0, 1),
            ],
            vec![device(0, 0.0, 0.0)],
        )
        .unwrap();
        let policy = AllocationPolicy {
            radius: Some(20.0),
            ..Default::default()
        };
        assert!(allocate_devices(&topo, &policy).is_err());
    }

    #[test]
    fn equidistant_tie_goes_to_lowest_id() {
        let topo = Topology::new(
            Area::square(100.0),
            vec![
                drone(3, Role::Entry, 60.0, 50.0, 5),
                drone(1, Role::Entry, 40.0, 50.0, 5),
                drone(9, Role::Gateway, 0.0, 0.0, 1),
            ],
            vec![device(0, 50.0, 50.0)],
        )
        .unwrap();
        let a = allocate_devices(&topo, &AllocationPolicy::default()).unwrap();
        assert_eq!(a.drone_of(DeviceId(0)), Some(DroneId(1)));
    }

    /// Replays the allocation and checks that, when each device was placed,
    /// every strictly better drone (closer, or as close with a lower id) was full.
    fn nearest_feasible_oracle(topo: &Topology, alloc: &Allocation) -> bool {
        let mut used: BTreeMap<DroneId, u32> = BTreeMap::new();
        for dev in topo.devices() {
            let chosen = alloc.drone_of(dev.id).unwrap();
            let chosen_dist = dev
                .position
                .ground_distance(&topo.drone(chosen).unwrap().position);
            for d in topo.access_drones() {
                let dist = dev.position.ground_distance(&d.position);
                let better = dist < chosen_dist || (dist == chosen_dist && d.id < chosen);
                if better && used.get(&d.id).copied().unwrap_or(0) < d.capacity {
                    return false;
                }
            }
            *used.entry(chosen).or_insert(0) += 1;
        }
        true
    }

    #[test]
    fn hundred_devices_match_exhaustive_nearest_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut drones: Vec<Drone> = (0..10)
            .map(|i| {
                drone(
                    i,
                    Role::Entry,
                    rng.gen_range(0.0..100.0),
                    rng.gen_range(0.0..100.0),
                    20,
                )
            })
            .collect();
        drones.push(drone(10, Role::Gateway, 50.0, 50.0, 20));
        let devices = (0..100)
            .map(|i| device(i, rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
            .collect();
        let topo = Topology::new(Area::square(100.0), drones, devices).unwrap();
        let alloc = allocate_devices(&topo, &AllocationPolicy::default()).unwrap();
        assert_eq!(alloc.len(), 100);
        assert!(alloc.counts().values().all(|&c| c <= 20));
        assert!(nearest_feasible_oracle(&topo, &alloc));
    }
}
