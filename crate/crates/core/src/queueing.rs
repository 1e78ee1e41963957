//! Two-class non-preemptive priority M/G/1 model per drone and end-to-end
//! latency aggregation over a composition plan.
//!
//! Control packets are served ahead of data packets, an in-service packet is
//! never preempted. With `rho = lc*xc + ld*xd` and `rho_c = lc*xc`:
//!
//! - [`DelayMode::Paper`]: `R = (lc*x2c + ld*x2d) / (2 (1 - rho))`
//! - [`DelayMode::Standard`]: `R = (lc*x2c + ld*x2d) / 2`
//!
//! and in both modes `Wc = R / (1 - rho_c)`, `Wd = R / ((1 - rho_c)(1 - rho))`,
//! `D = W + xbar`. Only `Standard` is the textbook result. `Paper` carries an
//! extra `1/(1 - rho)` in the residual; it is the default for the experiment
//! curves.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::composition::{CompositionPlan, PlanError};
use crate::model::{DroneId, SwarmState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueueingError {
    #[error("invalid queue input: {0}")]
    InvalidInput(String),
    #[error("path crosses unstable drone {node}")]
    UnstablePath { node: DroneId },
    #[error("no delay computed for drone {0}")]
    MissingNode(DroneId),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayMode {
    #[default]
    Paper,
    Standard,
}

impl std::str::FromStr for DelayMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(DelayMode::Paper),
            "standard" => Ok(DelayMode::Standard),
            other => Err(format!("unknown delay mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceDistribution {
    /// Fixed service time, `E[X^2] = xbar^2`.
    #[default]
    Deterministic,
    /// Exponential service time, `E[X^2] = 2 xbar^2`.
    Exponential,
}

impl std::str::FromStr for ServiceDistribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deterministic" => Ok(ServiceDistribution::Deterministic),
            "exponential" => Ok(ServiceDistribution::Exponential),
            other => Err(format!("unknown service distribution '{other}'")),
        }
    }
}

impl ServiceDistribution {
    pub fn second_moment(self, mean: f64) -> f64 {
        match self {
            ServiceDistribution::Deterministic => mean * mean,
            ServiceDistribution::Exponential => 2.0 * mean * mean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficClass {
    Control,
    Data,
}

/// How packets are generated and served at every drone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QueueingConfig {
    pub mode: DelayMode,
    pub distribution: ServiceDistribution,
    /// Control packets generated per drone as a fraction of its own data rate.
    pub control_fraction: f64,
    pub data_bits: u32,
    pub control_bits: u32,
}

impl Default for QueueingConfig {
    fn default() -> Self {
        Self {
            mode: DelayMode::Paper,
            distribution: ServiceDistribution::Deterministic,
            control_fraction: 0.05,
            data_bits: 8192,
            control_bits: 256,
        }
    }
}

impl QueueingConfig {
    pub fn with_mode(self, mode: DelayMode) -> Self {
        Self { mode, ..self }
    }

    /// Mean service times `(xbar_c, xbar_d)` at a drone serving `mu` data
    /// packets per second. Control packets take time in proportion to size.
    pub fn mean_service_times(&self, mu: f64) -> (f64, f64) {
        let xd = 1.0 / mu;
        let xc = xd * self.control_bits as f64 / self.data_bits as f64;
        (xc, xd)
    }

    /// Queue input for a drone with service rate `mu` and the given rates.
    pub fn node_input(&self, mu: f64, lambda_c: f64, lambda_d: f64) -> NodeQueueInput {
        let (xc, xd) = self.mean_service_times(mu);
        NodeQueueInput {
            lambda_c,
            lambda_d,
            xbar_c: xc,
            xbar_d: xd,
            x2_c: self.distribution.second_moment(xc),
            x2_d: self.distribution.second_moment(xd),
        }
    }
}

/// Per-drone two-class arrival rates and service-time moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeQueueInput {
    pub lambda_c: f64,
    pub lambda_d: f64,
    pub xbar_c: f64,
    pub xbar_d: f64,
    pub x2_c: f64,
    pub x2_d: f64,
}

impl NodeQueueInput {
    pub fn validate(&self) -> Result<(), QueueingError> {
        let fields = [
            ("lambda_c", self.lambda_c),
            ("lambda_d", self.lambda_d),
            ("xbar_c", self.xbar_c),
            ("xbar_d", self.xbar_d),
            ("x2_c", self.x2_c),
            ("x2_d", self.x2_d),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(QueueingError::InvalidInput(format!("{name} = {v}")));
            }
        }
        for (name, m, m2) in [("control", self.xbar_c, self.x2_c), ("data", self.xbar_d, self.x2_d)] {
            if m2 < m * m * (1.0 - 1e-12) {
                return Err(QueueingError::InvalidInput(format!(
                    "{name} second moment {m2} below squared mean {}",
                    m * m
                )));
            }
        }
        Ok(())
    }

    pub fn rho(&self) -> f64 {
        self.lambda_c * self.xbar_c + self.lambda_d * self.xbar_d
    }

    pub fn rho_c(&self) -> f64 {
        self.lambda_c * self.xbar_c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassDelays {
    pub residual: f64,
    pub w_c: f64,
    pub w_d: f64,
    pub d_c: f64,
    pub d_d: f64,
}

/// Delay figures for one drone; `delays` is `None` when `rho >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeDelay {
    pub rho: f64,
    pub rho_c: f64,
    pub delays: Option<ClassDelays>,
}

impl NodeDelay {
    pub fn stable(&self) -> bool {
        self.delays.is_some()
    }

    pub fn sojourn(&self, class: TrafficClass) -> Latency {
        match (self.delays, class) {
            (Some(d), TrafficClass::Control) => Latency::Finite(d.d_c),
            (Some(d), TrafficClass::Data) => Latency::Finite(d.d_d),
            (None, _) => Latency::Unstable,
        }
    }

    pub fn waiting(&self, class: TrafficClass) -> Latency {
        match (self.delays, class) {
            (Some(d), TrafficClass::Control) => Latency::Finite(d.w_c),
            (Some(d), TrafficClass::Data) => Latency::Finite(d.w_d),
            (None, _) => Latency::Unstable,
        }
    }
}

/// Evaluates the priority formulas for one node.
pub fn node_delay(input: &NodeQueueInput, mode: DelayMode) -> NodeDelay {
    let rho = input.rho();
    let rho_c = input.rho_c();
    if rho >= 1.0 {
        return NodeDelay {
            rho,
            rho_c,
            delays: None,
        };
    }
    let work = input.lambda_c * input.x2_c + input.lambda_d * input.x2_d;
    let residual = match mode {
        DelayMode::Paper => work / (2.0 * (1.0 - rho)),
        DelayMode::Standard => work / 2.0,
    };
    let w_c = residual / (1.0 - rho_c);
    let w_d = residual / ((1.0 - rho_c) * (1.0 - rho));
    NodeDelay {
        rho,
        rho_c,
        delays: Some(ClassDelays {
            residual,
            w_c,
            w_d,
            d_c: w_c + input.xbar_c,
            d_d: w_d + input.xbar_d,
        }),
    }
}

/// A latency that is either a finite number of seconds or unbounded because
/// some queue on the way is unstable. Ordered with `Unstable` above every
/// finite value; serialized as a number or the string `"unstable"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Latency {
    Finite(f64),
    Unstable,
}

impl Latency {
    pub fn value(self) -> Option<f64> {
        match self {
            Latency::Finite(v) => Some(v),
            Latency::Unstable => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Latency::Finite(_))
    }

    pub fn total_cmp(&self, other: &Latency) -> Ordering {
        match (self, other) {
            (Latency::Finite(a), Latency::Finite(b)) => a.total_cmp(b),
            (Latency::Finite(_), Latency::Unstable) => Ordering::Less,
            (Latency::Unstable, Latency::Finite(_)) => Ordering::Greater,
            (Latency::Unstable, Latency::Unstable) => Ordering::Equal,
        }
    }

    /// True when finite and at most `bound`.
    pub fn within(self, bound: f64) -> bool {
        matches!(self, Latency::Finite(v) if v <= bound)
    }
}

impl PartialOrd for Latency {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl fmt::Display for Latency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Latency::Finite(v) => write!(f, "{v}"),
            Latency::Unstable => f.write_str("unstable"),
        }
    }
}

impl Serialize for Latency {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Latency::Finite(v) => s.serialize_f64(*v),
            Latency::Unstable => s.serialize_str("unstable"),
        }
    }
}

impl<'de> Deserialize<'de> for Latency {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Latency::Finite(v)),
            Raw::Text(t) if t == "unstable" => Ok(Latency::Unstable),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("invalid latency '{t}'"))),
        }
    }
}

/// Which aggregate the SLA bound applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatencyMetric {
    #[default]
    Avg,
    Max,
}

impl std::str::FromStr for LatencyMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "avg" => Ok(LatencyMetric::Avg),
            "max" => Ok(LatencyMetric::Max),
            other => Err(format!("unknown latency metric '{other}'")),
        }
    }
}

/// Per-drone arrival rates induced by a plan.
///
/// Data: a drone carries its own device traffic plus everything forwarded to
/// it. Control: every drone emits `control_fraction` of its own data rate,
/// forwarded along the same route.
pub fn derive_node_arrivals(
    plan: &CompositionPlan,
    state: &SwarmState,
    config: &QueueingConfig,
) -> Result<BTreeMap<DroneId, NodeQueueInput>, PlanError> {
    let mut data: BTreeMap<DroneId, f64> = state
        .topology()
        .drones()
        .iter()
        .map(|d| (d.id, 0.0))
        .collect();
    for drone in state.topology().drones() {
        let own = state.own_traffic(drone.id);
        if own == 0.0 {
            continue;
        }
        for hop in plan.route_from(drone.id)? {
            *data.entry(hop).or_insert(0.0) += own;
        }
    }
    Ok(data
        .into_iter()
        .map(|(id, lambda_d)| {
            let mu = state.service_rate(id).unwrap_or(1.0);
            let input = config.node_input(mu, config.control_fraction * lambda_d, lambda_d);
            (id, input)
        })
        .collect())
}

pub fn node_delays(
    inputs: &BTreeMap<DroneId, NodeQueueInput>,
    mode: DelayMode,
) -> BTreeMap<DroneId, NodeDelay> {
    inputs
        .iter()
        .map(|(id, input)| (*id, node_delay(input, mode)))
        .collect()
}

/// Sum of per-node sojourn times of `class` along `path`.
pub fn path_latency(
    path: &[DroneId],
    delays: &BTreeMap<DroneId, NodeDelay>,
    class: TrafficClass,
) -> Result<f64, QueueingError> {
    let mut total = 0.0;
    for id in path {
        let node = delays.get(id).ok_or(QueueingError::MissingNode(*id))?;
        match node.sojourn(class) {
            Latency::Finite(v) => total += v,
            Latency::Unstable => return Err(QueueingError::UnstablePath { node: *id }),
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLatency {
    pub route: Vec<DroneId>,
    /// Share of total data traffic entering on this route.
    pub omega: f64,
    pub latency: Latency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionLatency {
    pub per_path: Vec<PathLatency>,
    pub l_avg: Latency,
    pub l_max: Latency,
    /// Every node on some route is stable.
    pub feasible: bool,
}

impl CompositionLatency {
    pub fn value(&self, metric: LatencyMetric) -> Latency {
        match metric {
            LatencyMetric::Avg => self.l_avg,
            LatencyMetric::Max => self.l_max,
        }
    }
}

/// Aggregates data latency over routes given with their injected traffic.
///
/// Weights are demand-proportional; with no traffic at all every route gets
/// the same weight. `L_max` only considers routes that carry traffic.
pub fn latency_over_routes(
    routes: &[(Vec<DroneId>, f64)],
    delays: &BTreeMap<DroneId, NodeDelay>,
) -> CompositionLatency {
    let total: f64 = routes.iter().map(|r| r.1).sum();
    let n = routes.len();
    let mut per_path = Vec::with_capacity(n);
    let mut feasible = true;
    let mut avg = 0.0;
    let mut avg_unstable = false;
    let mut max = Latency::Finite(0.0);
    let mut any = false;
    for (route, traffic) in routes {
        let latency = match path_latency(route, delays, TrafficClass::Data) {
            Ok(v) => Latency::Finite(v),
            Err(_) => {
                feasible = false;
                Latency::Unstable
            }
        };
        let omega = if total > 0.0 {
            traffic / total
        } else {
            1.0 / n as f64
        };
        if omega > 0.0 {
            any = true;
            match latency {
                Latency::Finite(v) => avg += omega * v,
                Latency::Unstable => avg_unstable = true,
            }
            if latency.total_cmp(&max) == Ordering::Greater {
                max = latency;
            }
        }
        per_path.push(PathLatency {
            route: route.clone(),
            omega,
            latency,
        });
    }
    let l_avg = if avg_unstable {
        Latency::Unstable
    } else {
        Latency::Finite(avg)
    };
    if !any {
        max = Latency::Finite(0.0);
    }
    // guard against rounding in the weighted sum
    let l_avg = match (l_avg, max) {
        (Latency::Finite(a), Latency::Finite(m)) if a > m => Latency::Finite(m),
        _ => l_avg,
    };
    CompositionLatency {
        per_path,
        l_avg,
        l_max: max,
        feasible,
    }
}

/// End-to-end data latency of a plan: one route per traffic source.
pub fn composition_latency(
    plan: &CompositionPlan,
    state: &SwarmState,
    delays: &BTreeMap<DroneId, NodeDelay>,
) -> Result<CompositionLatency, PlanError> {
    let routes: Vec<(Vec<DroneId>, f64)> = plan
        .source_routes()?
        .into_iter()
        .map(|r| {
            let traffic = state.own_traffic(r[0]);
            (r, traffic)
        })
        .collect();
    Ok(latency_over_routes(&routes, delays))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    /// Drones with `rho > rho_max`, in id order.
    pub offending: Vec<DroneId>,
}

/// Passes when every node has `rho <= rho_max` (inclusive).
pub fn stability_check(delays: &BTreeMap<DroneId, NodeDelay>, rho_max: f64) -> StabilityReport {
    let offending: Vec<DroneId> = delays
        .iter()
        .filter(|(_, d)| d.rho > rho_max)
        .map(|(id, _)| *id)
        .collect();
    StabilityReport {
        stable: offending.is_empty(),
        offending,
    }
}

/// Everything the queueing model says about one plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub inputs: BTreeMap<DroneId, NodeQueueInput>,
    pub delays: BTreeMap<DroneId, NodeDelay>,
    pub latency: CompositionLatency,
}

impl Analysis {
    pub fn max_rho(&self) -> f64 {
        self.delays.values().map(|d| d.rho).fold(0.0, f64::max)
    }

    /// `rho < 1` at every node.
    pub fn all_stable(&self) -> bool {
        self.delays.values().all(|d| d.stable())
    }

    pub fn unstable_nodes(&self) -> Vec<DroneId> {
        self.delays
            .iter()
            .filter(|(_, d)| !d.stable())
            .map(|(id, _)| *id)
            .collect()
    }
}

pub fn analyze(
    plan: &CompositionPlan,
    state: &SwarmState,
    config: &QueueingConfig,
) -> Result<Analysis, PlanError> {
    let inputs = derive_node_arrivals(plan, state, config)?;
    let delays = node_delays(&inputs, config.mode);
    let latency = composition_latency(plan, state, &delays)?;
    Ok(Analysis {
        inputs,
        delays,
        latency,
    })
}

pub const DELAY_HEADER: [&str; 9] = ["drone_id", "rho", "rho_c", "R", "W_c", "W_d", "D_c", "D_d", "stable"];

/// One CSV row of the per-node delay table; unstable nodes carry `inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayRow {
    pub drone_id: u32,
    pub rho: f64,
    pub rho_c: f64,
    pub r: f64,
    pub w_c: f64,
    pub w_d: f64,
    pub d_c: f64,
    pub d_d: f64,
    pub stable: bool,
}

pub fn delay_rows(delays: &BTreeMap<DroneId, NodeDelay>) -> Vec<DelayRow> {
    delays
        .iter()
        .map(|(id, d)| {
            let inf = f64::INFINITY;
            let c = d.delays.unwrap_or(ClassDelays {
                residual: inf,
                w_c: inf,
                w_d: inf,
                d_c: inf,
                d_d: inf,
            });
            DelayRow {
                drone_id: id.0,
                rho: d.rho,
                rho_c: d.rho_c,
                r: c.residual,
                w_c: c.w_c,
                w_d: c.w_d,
                d_c: c.d_c,
                d_d: c.d_d,
                stable: d.stable(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixture() -> NodeQueueInput {
        NodeQueueInput {
            lambda_c: 0.1,
            lambda_d: 0.4,
            xbar_c: 0.5,
            xbar_d: 1.0,
            x2_c: 0.25,
            x2_d: 1.0,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn empty_system_has_pure_service_delay() {
        let mut input = fixture();
        input.lambda_c = 0.0;
        input.lambda_d = 0.0;
        for mode in [DelayMode::Paper, DelayMode::Standard] {
            let d = node_delay(&input, mode).delays.unwrap();
            assert_eq!(d.residual, 0.0);
            assert_eq!(d.w_c, 0.0);
            assert_eq!(d.d_c, 0.5);
            assert_eq!(d.d_d, 1.0);
        }
    }

    #[test]
    fn two_class_fixture_paper_mode() {
        let d = node_delay(&fixture(), DelayMode::Paper);
        assert!(rel(d.rho, 0.45) < 1e-12);
        assert!(rel(d.rho_c, 0.05) < 1e-12);
        let c = d.delays.unwrap();
        assert!(rel(c.residual, 0.38636363636363635) < 1e-9);
        assert!(rel(c.w_c, 0.40669856459330145) < 1e-9);
        assert!(rel(c.w_d, 0.739451935624184) < 1e-9);
        assert!(rel(c.d_d, 1.739451935624184) < 1e-9);
    }

    #[test]
    fn two_class_fixture_standard_mode() {
        let c = node_delay(&fixture(), DelayMode::Standard).delays.unwrap();
        assert!(rel(c.residual, 0.2125) < 1e-12);
        assert!(rel(c.w_c, 0.22368421052631579) < 1e-9);
        assert!(rel(c.w_d, 0.40669856459330145) < 1e-9);
    }

    #[test]
    fn overload_is_reported_not_computed() {
        let input = NodeQueueInput {
            lambda_c: 0.0,
            lambda_d: 1.2,
            xbar_c: 0.0,
            xbar_d: 1.0,
            x2_c: 0.0,
            x2_d: 1.0,
        };
        let d = node_delay(&input, DelayMode::Paper);
        assert!(rel(d.rho, 1.2) < 1e-12);
        assert!(!d.stable());
        assert_eq!(d.sojourn(TrafficClass::Data), Latency::Unstable);
    }

    #[test]
    fn single_class_standard_matches_mm1_and_paper_doubles_it() {
        let cfg = QueueingConfig {
            distribution: ServiceDistribution::Exponential,
            ..QueueingConfig::default()
        };
        let input = cfg.node_input(1.0, 0.0, 0.5);
        let std = node_delay(&input, DelayMode::Standard).delays.unwrap();
        assert!((std.w_d - 1.0).abs() < 1e-12);
        let paper = node_delay(&input, DelayMode::Paper).delays.unwrap();
        assert!((paper.w_d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_jensen_violation_and_negatives() {
        let mut input = fixture();
        input.x2_d = 0.5;
        assert!(input.validate().is_err());
        let mut input = fixture();
        input.lambda_c = -1.0;
        assert!(input.validate().is_err());
        assert!(fixture().validate().is_ok());
    }

    fn delays_of(values: &[(u32, f64)]) -> BTreeMap<DroneId, NodeDelay> {
        values
            .iter()
            .map(|(id, d)| {
                (
                    DroneId(*id),
                    NodeDelay {
                        rho: 0.5,
                        rho_c: 0.0,
                        delays: Some(ClassDelays {
                            residual: 0.0,
                            w_c: 0.0,
                            w_d: 0.0,
                            d_c: 0.0,
                            d_d: *d,
                        }),
                    },
                )
            })
            .collect()
    }

    #[test]
    fn path_sums_and_unstable_paths() {
        let d = node_delay(&fixture(), DelayMode::Paper);
        let delays: BTreeMap<_, _> = [(DroneId(0), d), (DroneId(1), d)].into_iter().collect();
        let one = path_latency(&[DroneId(0)], &delays, TrafficClass::Data).unwrap();
        assert!(rel(one, 1.739451935624184) < 1e-9);
        let two = path_latency(&[DroneId(0), DroneId(1)], &delays, TrafficClass::Data).unwrap();
        assert!(rel(two, 3.478903871248369) < 1e-9);

        let mut with_bad = delays.clone();
        with_bad.insert(
            DroneId(2),
            NodeDelay {
                rho: 1.5,
                rho_c: 0.0,
                delays: None,
            },
        );
        assert_eq!(
            path_latency(&[DroneId(0), DroneId(2)], &with_bad, TrafficClass::Data),
            Err(QueueingError::UnstablePath { node: DroneId(2) })
        );
    }

    #[test]
    fn weighted_mean_and_max() {
        let delays = delays_of(&[(0, 1.0), (1, 3.0)]);
        let lat = latency_over_routes(
            &[(vec![DroneId(0)], 2.0), (vec![DroneId(1)], 2.0)],
            &delays,
        );
        assert_eq!(lat.l_avg, Latency::Finite(2.0));
        assert_eq!(lat.l_max, Latency::Finite(3.0));
        assert!(lat.feasible);

        let single = latency_over_routes(&[(vec![DroneId(1)], 5.0)], &delays);
        assert_eq!(single.l_avg, single.l_max);
    }

    #[test]
    fn stability_boundary_is_inclusive() {
        let mut delays = delays_of(&[(0, 1.0)]);
        delays.get_mut(&DroneId(0)).unwrap().rho = 0.95;
        assert!(stability_check(&delays, 0.95).stable);
        delays.get_mut(&DroneId(0)).unwrap().rho = 0.99;
        let report = stability_check(&delays, 0.95);
        assert!(!report.stable);
        assert_eq!(report.offending, vec![DroneId(0)]);
        let idle = delays_of(&[(0, 0.0), (1, 0.0)])
            .into_iter()
            .map(|(k, mut v)| {
                v.rho = 0.0;
                (k, v)
            })
            .collect();
        assert!(stability_check(&idle, 0.5).stable);
    }

    #[test]
    fn latency_serde_uses_marker() {
        let v = serde_json::to_string(&[Latency::Finite(1.5), Latency::Unstable]).unwrap();
        assert_eq!(v, "[1.5,\"unstable\"]");
        let back: Vec<Latency> = serde_json::from_str(&v).unwrap();
        assert_eq!(back, vec![Latency::Finite(1.5), Latency::Unstable]);
        assert!(Latency::Finite(1e300) < Latency::Unstable);
    }

    fn arb_input() -> impl Strategy<Value = NodeQueueInput> {
        (0.0f64..2.0, 0.0f64..2.0, 0.01f64..1.0, 0.01f64..1.0, 1.0f64..3.0, 1.0f64..3.0).prop_map(
            |(lc, ld, xc, xd, kc, kd)| NodeQueueInput {
                lambda_c: lc,
                lambda_d: ld,
                xbar_c: xc,
                xbar_d: xd,
                x2_c: kc * xc * xc,
                x2_d: kd * xd * xd,
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn control_never_waits_longer_than_data(input in arb_input()) {
            for mode in [DelayMode::Paper, DelayMode::Standard] {
                let d = node_delay(&input, mode);
                prop_assert_eq!(d.stable(), d.rho < 1.0);
                if let Some(c) = d.delays {
                    prop_assert!(c.w_c <= c.w_d);
                    prop_assert!((c.d_d - c.w_d - input.xbar_d).abs() < 1e-12 * c.d_d.max(1.0));
                }
            }
        }

        #[test]
        fn data_wait_nondecreasing_in_data_rate(input in arb_input(), extra in 0.0f64..1.0) {
            let mut more = input;
            more.lambda_d += extra;
            for mode in [DelayMode::Paper, DelayMode::Standard] {
                let a = node_delay(&input, mode);
                let b = node_delay(&more, mode);
                if let (Some(x), Some(y)) = (a.delays, b.delays) {
                    prop_assert!(y.w_d >= x.w_d - 1e-12 * x.w_d.max(1.0));
                }
                if !a.stable() {
                    prop_assert!(!b.stable());
                }
            }
        }

        #[test]
        fn exponential_single_class_is_mm1(mu in 0.1f64..100.0, load in 0.01f64..0.99) {
            let cfg = QueueingConfig {
                distribution: ServiceDistribution::Exponential,
                ..QueueingConfig::default()
            };
            let lambda = load * mu;
            let d = node_delay(&cfg.node_input(mu, 0.0, lambda), DelayMode::Standard);
            let w = d.delays.unwrap().w_d;
            let mm1 = load / (mu - lambda);
            prop_assert!(((w - mm1) / mm1).abs() < 1e-9);
        }

        #[test]
        fn max_dominates_avg_and_shorter_paths_are_faster(
            lat in prop::collection::vec(0.0f64..5.0, 1..6),
            traffic in prop::collection::vec(0.0f64..10.0, 1..6),
            drop in 0usize..6,
        ) {
            let delays = delays_of(
                &lat.iter().enumerate().map(|(i, v)| (i as u32, *v)).collect::<Vec<_>>(),
            );
            let ids: Vec<DroneId> = (0..lat.len() as u32).map(DroneId).collect();
            let routes: Vec<(Vec<DroneId>, f64)> = (0..traffic.len())
                .map(|i| (ids[i % ids.len()..].to_vec(), traffic[i]))
                .collect();
            let agg = latency_over_routes(&routes, &delays);
            prop_assert!(agg.l_max >= agg.l_avg);
            let omega: f64 = agg.per_path.iter().map(|p| p.omega).sum();
            prop_assert!((omega - 1.0).abs() < 1e-9);

            let full = path_latency(&ids, &delays, TrafficClass::Data).unwrap();
            let mut shorter = ids.clone();
            shorter.remove(drop % ids.len());
            let less = path_latency(&shorter, &delays, TrafficClass::Data).unwrap();
            prop_assert!(less <= full + 1e-12);
        }
    }
}
