//! Discrete-event simulation of a composition plan.
//!
//! Devices emit Poisson data streams, every drone emits a Poisson control
//! stream, and each drone is a single server with two FIFO queues under
//! non-preemptive priority (control first). Forwarding between drones takes
//! no time. Statistics cover packets that arrive at a node after the warmup.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composition::{CompositionPlan, NextHop, PlanError};
use crate::model::{DroneId, SwarmState};
use crate::queueing::{QueueingConfig, ServiceDistribution, TrafficClass};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("duration {duration} must exceed warmup {warmup} >= 0")]
    InvalidHorizon { duration: f64, warmup: f64 },
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Seconds of simulated time.
    pub duration: f64,
    /// Seconds excluded from statistics.
    pub warmup: f64,
    pub seed: u64,
    pub service_distribution: ServiceDistribution,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            duration: 120.0,
            warmup: 10.0,
            seed: 0,
            service_distribution: ServiceDistribution::Deterministic,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.warmup >= 0.0 && self.duration > self.warmup) {
            return Err(SimError::InvalidHorizon {
                duration: self.duration,
                warmup: self.warmup,
            });
        }
        Ok(())
    }
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Summary {
    pub count: u64,
    mean: f64,
    m2: f64,
}

impl Summary {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// `None` when no sample was recorded.
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }

    pub fn variance(&self) -> Option<f64> {
        (self.count > 1).then(|| self.m2 / (self.count - 1) as f64)
    }
}

impl Serialize for Summary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            count: u64,
            mean: Option<f64>,
            variance: Option<f64>,
        }
        Repr {
            count: self.count,
            mean: self.mean(),
            variance: self.variance(),
        }
        .serialize(s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ClassCounts {
    pub control: u64,
    pub data: u64,
}

impl ClassCounts {
    fn bump(&mut self, class: TrafficClass) {
        match class {
            TrafficClass::Control => self.control += 1,
            TrafficClass::Data => self.data += 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NodeStats {
    pub wait_c: Summary,
    pub wait_d: Summary,
    pub sojourn_c: Summary,
    pub sojourn_d: Summary,
    /// Busy fraction of the measurement window.
    pub rho: f64,
    /// Whole-run counts, for flow accounting.
    pub arrivals: ClassCounts,
    pub departures: ClassCounts,
    pub in_system_at_end: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SimResult {
    pub nodes: BTreeMap<DroneId, NodeStats>,
    /// End-to-end data latency per traffic source drone.
    pub paths: BTreeMap<DroneId, Summary>,
    pub l_avg: Option<f64>,
    /// Largest per-source mean latency.
    pub l_max: Option<f64>,
    pub generated: ClassCounts,
    /// Packets handed to the backhaul.
    pub completed: ClassCounts,
}

#[derive(Debug, Clone, Copy)]
struct Packet {
    class: TrafficClass,
    source: usize,
    born: f64,
    arrived: f64,
    started: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Device(usize),
    Control(usize),
    Departure(usize),
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.seq.cmp(&other.seq))
    }
}

struct Node {
    id: DroneId,
    next: Option<usize>,
    xbar_c: f64,
    xbar_d: f64,
    control: VecDeque<Packet>,
    data: VecDeque<Packet>,
    serving: Option<Packet>,
    busy: f64,
    stats: NodeStats,
}

struct Sim {
    rng: ChaCha8Rng,
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
    nodes: Vec<Node>,
    warmup: f64,
    duration: f64,
    exponential: bool,
    paths: BTreeMap<usize, Summary>,
    all: Summary,
    generated: ClassCounts,
    completed: ClassCounts,
}

impl Sim {
    fn schedule(&mut self, time: f64, kind: EventKind) {
        self.seq += 1;
        self.heap.push(Reverse(Event {
            time,
            seq: self.seq,
            kind,
        }));
    }

    fn exp(&mut self, rate: f64) -> f64 {
        let u: f64 = 1.0 - self.rng.gen::<f64>();
        -u.ln() / rate
    }

    fn service_time(&mut self, mean: f64) -> f64 {
        if self.exponential {
            let u: f64 = 1.0 - self.rng.gen::<f64>();
            -u.ln() * mean
        } else {
            mean
        }
    }

    fn busy_overlap(&self, start: f64, end: f64) -> f64 {
        (end.min(self.duration) - start.max(self.warmup)).max(0.0)
    }

    fn start_service(&mut self, n: usize, mut p: Packet, now: f64) {
        p.started = now;
        let mean = match p.class {
            TrafficClass::Control => self.nodes[n].xbar_c,
            TrafficClass::Data => self.nodes[n].xbar_d,
        };
        let s = self.service_time(mean);
        self.nodes[n].serving = Some(p);
        self.schedule(now + s, EventKind::Departure(n));
    }

    fn arrive(&mut self, n: usize, mut p: Packet, now: f64) {
        p.arrived = now;
        self.nodes[n].stats.arrivals.bump(p.class);
        if self.nodes[n].serving.is_none() {
            self.start_service(n, p, now);
        } else {
            match p.class {
                TrafficClass::Control => self.nodes[n].control.push_back(p),
                TrafficClass::Data => self.nodes[n].data.push_back(p),
            }
        }
    }

    fn depart(&mut self, n: usize, now: f64) {
        let p = self.nodes[n].serving.take().expect("departure from idle server");
        let overlap = self.busy_overlap(p.started, now);
        let warmup = self.warmup;
        let node = &mut self.nodes[n];
        node.busy += overlap;
        node.stats.departures.bump(p.class);
        if p.arrived >= warmup {
            let (wait, sojourn) = match p.class {
                TrafficClass::Control => (&mut node.stats.wait_c, &mut node.stats.sojourn_c),
                TrafficClass::Data => (&mut node.stats.wait_d, &mut node.stats.sojourn_d),
            };
            wait.push(p.started - p.arrived);
            sojourn.push(now - p.arrived);
        }
        let next = node.next;
        let queued = node.control.pop_front().or_else(|| node.data.pop_front());
        if let Some(q) = queued {
            self.start_service(n, q, now);
        }
        match next {
            Some(m) => self.arrive(m, p, now),
            None => {
                self.completed.bump(p.class);
                if p.class == TrafficClass::Data && p.born >= warmup {
                    let latency = now - p.born;
                    self.paths.entry(p.source).or_default().push(latency);
                    self.all.push(latency);
                }
            }
        }
    }
}

/// Runs the plan for `config.duration` seconds. Control rates and packet
/// sizes come from `queueing`; the service distribution from `config`.
pub fn simulate(
    plan: &CompositionPlan,
    state: &SwarmState,
    queueing: &QueueingConfig,
    config: &SimConfig,
) -> Result<SimResult, SimError> {
    config.validate()?;
    plan.check(state.topology())?;
    let drones = state.topology().drones();
    let index: BTreeMap<DroneId, usize> = drones.iter().enumerate().map(|(i, d)| (d.id, i)).collect();
    let nodes: Vec<Node> = drones
        .iter()
        .map(|d| {
            let (xbar_c, xbar_d) = queueing.mean_service_times(d.service_rate);
            let next = match plan.next_hop(d.id) {
                Some(NextHop::Drone(n)) => Some(index[&n]),
                _ => None,
            };
            Node {
                id: d.id,
                next,
                xbar_c,
                xbar_d,
                control: VecDeque::new(),
                data: VecDeque::new(),
                serving: None,
                busy: 0.0,
                stats: NodeStats::default(),
            }
        })
        .collect();
    let mut sim = Sim {
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        heap: BinaryHeap::new(),
        seq: 0,
        nodes,
        warmup: config.warmup,
        duration: config.duration,
        exponential: config.service_distribution == ServiceDistribution::Exponential,
        paths: BTreeMap::new(),
        all: Summary::default(),
        generated: ClassCounts::default(),
        completed: ClassCounts::default(),
    };

    let devices: Vec<(usize, f64)> = state
        .topology()
        .devices()
        .iter()
        .filter_map(|u| {
            let d = state.allocation().drone_of(u.id)?;
            Some((index[&d], u.arrival_rate))
        })
        .collect();
    let control: Vec<f64> = drones
        .iter()
        .map(|d| queueing.control_fraction * state.own_traffic(d.id))
        .collect();

    for (i, (_, rate)) in devices.iter().enumerate() {
        if *rate > 0.0 {
            let t = sim.exp(*rate);
            sim.schedule(t, EventKind::Device(i));
        }
    }
    for (i, rate) in control.iter().enumerate() {
        if *rate > 0.0 {
            let t = sim.exp(*rate);
            sim.schedule(t, EventKind::Control(i));
        }
    }

    while let Some(Reverse(ev)) = sim.heap.pop() {
        if ev.time > config.duration {
            break;
        }
        let now = ev.time;
        match ev.kind {
            EventKind::Device(i) => {
                let (node, rate) = devices[i];
                sim.generated.data += 1;
                let p = Packet {
                    class: TrafficClass::Data,
                    source: node,
                    born: now,
                    arrived: now,
                    started: now,
                };
                sim.arrive(node, p, now);
                let t = now + sim.exp(rate);
                sim.schedule(t, EventKind::Device(i));
            }
            EventKind::Control(node) => {
                sim.generated.control += 1;
                let p = Packet {
                    class: TrafficClass::Control,
                    source: node,
                    born: now,
                    arrived: now,
                    started: now,
                };
                sim.arrive(node, p, now);
                let t = now + sim.exp(control[node]);
                sim.schedule(t, EventKind::Control(node));
            }
            EventKind::Departure(n) => sim.depart(n, now),
        }
    }

    let window = config.duration - config.warmup;
    let mut result = SimResult {
        generated: sim.generated,
        completed: sim.completed,
        l_avg: sim.all.mean(),
        ..SimResult::default()
    };
    for i in 0..sim.nodes.len() {
        let tail = sim.nodes[i]
            .serving
            .map_or(0.0, |p| sim.busy_overlap(p.started, config.duration));
        let node = &mut sim.nodes[i];
        node.busy += tail;
        node.stats.rho = (node.busy / window).clamp(0.0, 1.0);
        node.stats.in_system_at_end =
            (node.control.len() + node.data.len() + usize::from(node.serving.is_some())) as u64;
        result.nodes.insert(node.id, std::mem::take(&mut node.stats));
    }
    for (source, summary) in sim.paths {
        result.paths.insert(sim.nodes[source].id, summary);
    }
    result.l_max = result
        .paths
        .values()
        .filter_map(|s| s.mean())
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_tracks_mean_and_variance() {
        let mut s = Summary::default();
        assert_eq!(s.mean(), None);
        for x in [1.0, 2.0, 3.0, 4.0] {
            s.push(x);
        }
        assert_eq!(s.mean(), Some(2.5));
        assert!((s.variance().unwrap() - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn horizon_validation() {
        let bad = SimConfig {
            duration: 5.0,
            warmup: 10.0,
            ..SimConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(SimConfig::default().validate().is_ok());
    }
}
