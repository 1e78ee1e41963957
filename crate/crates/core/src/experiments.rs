//! Batch experiments: violation rate against SLA bounds, latency against
//! device count, strategy-selection frequencies and swarm-size scaling.
//!
//! Requests run concurrently on a rayon pool; results are always ordered by
//! bin, then method, then request index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{brute_force_clustered, brute_force_direct, BruteForceConfig};
use crate::composition::{compose, Strategy};
use crate::controller::{Controller, Decision};
use crate::model::SwarmState;
use crate::queueing::{Latency, LatencyMetric};
use crate::selection::{evaluate_plan, SlaSpec};
use crate::workload::{
    generate_requests, materialize, BinAxis, Request, RequestTemplate, ScenarioScale, SwarmProfile,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown experiment '{0}' (expected exp1, exp2, exp3 or exp4)")]
    UnknownExperiment(String),
    #[error("no bins configured")]
    NoBins,
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentName {
    Exp1,
    Exp2,
    Exp3,
    Exp4,
}

impl ExperimentName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exp1 => "exp1",
            Self::Exp2 => "exp2",
            Self::Exp3 => "exp3",
            Self::Exp4 => "exp4",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exp1" => Ok(Self::Exp1),
            "exp2" => Ok(Self::Exp2),
            "exp3" => Ok(Self::Exp3),
            "exp4" => Ok(Self::Exp4),
            other => Err(ExperimentError::UnknownExperiment(other.to_string())),
        }
    }
}

/// Settings shared by all experiments. `bins`, `scale` and `scales` fall
/// back to per-experiment defaults when unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub requests_per_bin: usize,
    /// Relative half-width of the uniform perturbation around each bin.
    pub perturbation: f64,
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
    pub profile: SwarmProfile,
    pub controller: Controller,
    /// SLA template; the SLA-latency axis overrides its bound per request.
    pub sla: SlaSpec,
    /// Nominal device count when the axis is the SLA bound.
    pub device_count: usize,
    pub bins: Option<Vec<f64>>,
    pub scale: Option<ScenarioScale>,
    pub scales: Option<Vec<ScenarioScale>>,
    pub brute_force: BruteForceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            requests_per_bin: 100,
            perturbation: 0.1,
            workers: None,
            profile: SwarmProfile::default(),
            controller: Controller::default(),
            sla: SlaSpec::new(0.005, LatencyMetric::Avg, 0.95).expect("valid default"),
            device_count: 110,
            bins: None,
            scale: None,
            scales: None,
            brute_force: BruteForceConfig::default(),
        }
    }
}

pub const EXP1_BINS: [f64; 7] = [0.0008, 0.00085, 0.0009, 0.00095, 0.001, 0.0011, 0.0013];
pub const EXP2_BINS: [f64; 11] = [
    100.0, 125.0, 150.0, 175.0, 200.0, 225.0, 250.0, 275.0, 300.0, 325.0, 350.0,
];
pub const EXP4_BINS: [f64; 10] = [
    50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0, 500.0, 600.0,
];

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, se, n })
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

/// Deterministic per-bin seed: stream `bin` of the experiment seed.
pub fn bin_seed(seed: u64, bin: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(bin as u64 + 1);
    rng.gen()
}

fn run_pool<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, ExperimentError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

fn template(config: &ExperimentConfig, device_count: usize) -> RequestTemplate {
    RequestTemplate {
        device_count,
        per_device_lambda: config.profile.device_lambda,
        sla: config.sla,
    }
}

fn bins_or(config: &ExperimentConfig, default: &[f64]) -> Result<Vec<f64>, ExperimentError> {
    let bins = config.bins.clone().unwrap_or_else(|| default.to_vec());
    if bins.is_empty() {
        return Err(ExperimentError::NoBins);
    }
    Ok(bins)
}

fn requests_for(config: &ExperimentConfig, bins: &[f64], axis: BinAxis) -> Vec<Vec<Request>> {
    bins.iter()
        .enumerate()
        .map(|(i, nominal)| {
            generate_requests(
                *nominal,
                axis,
                &template(config, config.device_count),
                config.requests_per_bin,
                config.perturbation,
                bin_seed(config.seed, i),
            )
            .requests
        })
        .collect()
}

// ---------------------------------------------------------------- exp1

pub const EXP1_METHODS: [&str; 3] = ["heuristic", "bf_direct", "bf_clustered"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationStats {
    pub method: String,
    pub violation_rate: f64,
    pub violation_se: f64,
    pub mean_runtime_s: f64,
    pub runtime_se_s: f64,
    pub requests: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp1Bin {
    pub sla_bin: f64,
    pub methods: Vec<ViolationStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp1Result {
    pub scale: ScenarioScale,
    pub bins: Vec<Exp1Bin>,
}

impl Exp1Result {
    pub fn stats(&self, bin: usize, method: &str) -> Option<&ViolationStats> {
        self.bins.get(bin)?.methods.iter().find(|m| m.method == method)
    }
}

/// (violated, runtime seconds) per method for one request.
fn exp1_request(
    config: &ExperimentConfig,
    scale: &ScenarioScale,
    request: &Request,
) -> [(bool, f64); 3] {
    let sla = request.sla;
    let Ok(state) = materialize(request, scale, &config.profile) else {
        return [(true, 0.0); 3];
    };
    let t = Instant::now();
    let decision = config.controller.decide(&state, &sla);
    let heuristic = (!decision.compliant, t.elapsed().as_secs_f64());

    let t = Instant::now();
    let direct = brute_force_direct(&state, &sla, &config.controller.queueing, &config.brute_force);
    let bf_direct = (direct.best_compliant.is_none(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    let clustered = brute_force_clustered(
        &state,
        &sla,
        &config.controller.queueing,
        &config.controller.params,
        &config.brute_force,
    );
    let bf_clustered = (
        clustered.map_or(true, |r| r.best_compliant.is_none()),
        t.elapsed().as_secs_f64(),
    );
    [heuristic, bf_direct, bf_clustered]
}

/// Violation rate and per-request runtime against the SLA latency bound.
pub fn exp1(config: &ExperimentConfig) -> Result<Exp1Result, ExperimentError> {
    let scale = config.scale.clone().unwrap_or_else(ScenarioScale::small);
    let bins = bins_or(config, &EXP1_BINS)?;
    let requests = requests_for(config, &bins, BinAxis::SlaLatency);
    let outcomes: Vec<Vec<[(bool, f64); 3]>> = run_pool(config.workers, || {
        requests
            .par_iter()
            .map(|reqs| reqs.par_iter().map(|r| exp1_request(config, &scale, r)).collect())
            .collect()
    })?;
    let bins = bins
        .iter()
        .zip(outcomes)
        .map(|(nominal, rows)| Exp1Bin {
            sla_bin: *nominal,
            methods: EXP1_METHODS
                .iter()
                .enumerate()
                .map(|(m, name)| {
                    let v: Vec<f64> = rows.iter().map(|r| if r[m].0 { 1.0 } else { 0.0 }).collect();
                    let t: Vec<f64> = rows.iter().map(|r| r[m].1).collect();
                    let v = MeanSe::of(&v);
                    let t = MeanSe::of(&t);
                    ViolationStats {
                        method: name.to_string(),
                        violation_rate: v.map_or(f64::NAN, |s| s.mean),
                        violation_se: v.map_or(f64::NAN, |s| s.se),
                        mean_runtime_s: t.map_or(f64::NAN, |s| s.mean),
                        runtime_se_s: t.map_or(f64::NAN, |s| s.se),
                        requests: rows.len(),
                    }
                })
                .collect(),
        })
        .collect();
    Ok(Exp1Result { scale, bins })
}

// ---------------------------------------------------------------- latency stats

/// Latency summary of one method (or scale) over a bin's requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub method: String,
    /// Mean over the requests whose plan is stable.
    pub mean_latency_s: Option<f64>,
    pub latency_se_s: Option<f64>,
    pub stable_fraction: f64,
    /// Every request of the bin got a stable plan.
    pub stable: bool,
    pub requests: usize,
}

impl LatencyStats {
    fn from_latencies(method: &str, latencies: &[Latency]) -> Self {
        let finite: Vec<f64> = latencies.iter().filter_map(|l| l.value()).collect();
        let stats = MeanSe::of(&finite);
        let n = latencies.len();
        Self {
            method: method.to_string(),
            mean_latency_s: stats.map(|s| s.mean),
            latency_se_s: stats.map(|s| s.se),
            stable_fraction: if n == 0 { 0.0 } else { finite.len() as f64 / n as f64 },
            stable: n > 0 && finite.len() == n,
            requests: n,
        }
    }
}

fn installed_latency(decision: &Decision) -> Latency {
    if decision.stable() {
        decision.latency()
    } else {
        Latency::Unstable
    }
}

// ---------------------------------------------------------------- exp2

pub const EXP2_METHODS: [&str; 4] = ["direct", "clustered", "parallel", "enforced"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyBin {
    pub device_bin: f64,
    pub methods: Vec<LatencyStats>,
}

impl LatencyBin {
    pub fn stats(&self, method: &str) -> Option<&LatencyStats> {
        self.methods.iter().find(|m| m.method == method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp2Result {
    pub scale: ScenarioScale,
    pub bins: Vec<LatencyBin>,
    /// Per-request count where the enforced plan had a higher latency than
    /// a stable fixed strategy.
    pub dominance_violations: usize,
}

impl Exp2Result {
    /// First bin (device count) at which `method` is not stable everywhere.
    pub fn first_unstable_bin(&self, method: &str) -> Option<f64> {
        self.bins
            .iter()
            .find(|b| b.stats(method).is_some_and(|s| !s.stable))
            .map(|b| b.device_bin)
    }
}

/// Latencies for the fixed strategies at the configured alpha without
/// enforcement, then the full controller.
fn exp2_request(config: &ExperimentConfig, scale: &ScenarioScale, request: &Request) -> [Latency; 4] {
    let Ok(state) = materialize(request, scale, &config.profile) else {
        return [Latency::Unstable; 4];
    };
    let fixed = |s: Strategy| fixed_latency(config, &state, &request.sla, s);
    let decision = config.controller.decide(&state, &request.sla);
    [
        fixed(Strategy::Direct),
        fixed(Strategy::Clustered),
        fixed(Strategy::Parallel),
        installed_latency(&decision),
    ]
}

fn fixed_latency(config: &ExperimentConfig, state: &SwarmState, sla: &SlaSpec, strategy: Strategy) -> Latency {
    match compose(strategy, state, &config.controller.params) {
        Ok(plan) => {
            let e = evaluate_plan(0, plan, state, sla, &config.controller.queueing);
            if e.stable() {
                e.latency
            } else {
                Latency::Unstable
            }
        }
        Err(_) => Latency::Unstable,
    }
}

fn device_bins(config: &ExperimentConfig, bins: &[f64]) -> Vec<Vec<Request>> {
    bins.iter()
        .enumerate()
        .map(|(i, nominal)| {
            generate_requests(
                *nominal,
                BinAxis::DeviceCount,
                &template(config, nominal.round() as usize),
                config.requests_per_bin,
                config.perturbation,
                bin_seed(config.seed, i),
            )
            .requests
        })
        .collect()
}

/// Latency against device count for the fixed strategies and the framework.
pub fn exp2(config: &ExperimentConfig) -> Result<Exp2Result, ExperimentError> {
    let scale = config.scale.clone().unwrap_or_else(ScenarioScale::medium);
    let bins = bins_or(config, &EXP2_BINS)?;
    let requests = device_bins(config, &bins);
    let outcomes: Vec<Vec<[Latency; 4]>> = run_pool(config.workers, || {
        requests
            .par_iter()
            .map(|reqs| reqs.par_iter().map(|r| exp2_request(config, &scale, r)).collect())
            .collect()
    })?;
    let dominance_violations = outcomes
        .iter()
        .flatten()
        .map(|row| {
            row[..3]
                .iter()
                .filter(|fixed| fixed.is_finite() && row[3].total_cmp(fixed).is_gt())
                .count()
        })
        .sum();
    let bins = bins
        .iter()
        .zip(outcomes)
        .map(|(nominal, rows)| LatencyBin {
            device_bin: *nominal,
            methods: EXP2_METHODS
                .iter()
                .enumerate()
                .map(|(m, name)| {
                    let l: Vec<Latency> = rows.iter().map(|r| r[m]).collect();
                    LatencyStats::from_latencies(name, &l)
                })
                .collect(),
        })
        .collect();
    Ok(Exp2Result {
        scale,
        bins,
        dominance_violations,
    })
}

// ---------------------------------------------------------------- exp3

/// Column order of the frequency table; `none` counts requests with no plan.
pub const EXP3_CHOICES: [&str; 4] = ["direct", "clustered", "parallel", "none"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp3Bin {
    pub device_bin: f64,
    pub frequencies: BTreeMap<String, f64>,
    pub requests: usize,
}

impl Exp3Bin {
    pub fn frequency(&self, choice: &str) -> f64 {
        self.frequencies.get(choice).copied().unwrap_or(0.0)
    }

    /// Most frequent choice; ties go to the earlier column.
    pub fn modal(&self) -> &'static str {
        let mut best = EXP3_CHOICES[0];
        for c in EXP3_CHOICES {
            if self.frequency(c) > self.frequency(best) {
                best = c;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp3Result {
    pub scale: ScenarioScale,
    pub bins: Vec<Exp3Bin>,
}

/// Strategy the controller installs for each request, binned by load.
pub fn exp3(config: &ExperimentConfig) -> Result<Exp3Result, ExperimentError> {
    let scale = config.scale.clone().unwrap_or_else(ScenarioScale::medium);
    let bins = bins_or(config, &EXP2_BINS)?;
    let requests = device_bins(config, &bins);
    let choices: Vec<Vec<&'static str>> = run_pool(config.workers, || {
        requests
            .par_iter()
            .map(|reqs| {
                reqs.par_iter()
                    .map(|r| {
                        let Ok(state) = materialize(r, &scale, &config.profile) else {
                            return "none";
                        };
                        match config.controller.decide(&state, &r.sla).strategy() {
                            Some(Strategy::Direct) => "direct",
                            Some(Strategy::Clustered) => "clustered",
                            Some(Strategy::Parallel) => "parallel",
                            None => "none",
                        }
                    })
                    .collect()
            })
            .collect()
    })?;
    let bins = bins
        .iter()
        .zip(choices)
        .map(|(nominal, picks)| {
            let n = picks.len();
            let frequencies = EXP3_CHOICES
                .iter()
                .map(|c| {
                    let count = picks.iter().filter(|p| *p == c).count();
                    (c.to_string(), if n == 0 { 0.0 } else { count as f64 / n as f64 })
                })
                .collect();
            Exp3Bin {
                device_bin: *nominal,
                frequencies,
                requests: n,
            }
        })
        .collect();
    Ok(Exp3Result { scale, bins })
}

// ---------------------------------------------------------------- exp4

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp4Result {
    pub scales: Vec<ScenarioScale>,
    /// One entry per bin; `methods` holds one row per scale, named after it.
    pub bins: Vec<LatencyBin>,
}

impl Exp4Result {
    /// Largest bin up to which `scale` stays stable at every bin.
    pub fn max_stable_bin(&self, scale: &str) -> Option<f64> {
        let mut last = None;
        for b in &self.bins {
            match b.stats(scale) {
                Some(s) if s.stable => last = Some(b.device_bin),
                _ => break,
            }
        }
        last
    }
}

/// Enforced-framework latency against device count for several scales. Each
/// scale sees the same device layouts per bin.
pub fn exp4(config: &ExperimentConfig) -> Result<Exp4Result, ExperimentError> {
    let scales = config.scales.clone().unwrap_or_else(|| {
        vec![
            ScenarioScale::small(),
            ScenarioScale::medium(),
            ScenarioScale::large(),
        ]
    });
    let bins = bins_or(config, &EXP4_BINS)?;
    let requests = device_bins(config, &bins);
    let outcomes: Vec<Vec<Vec<Latency>>> = run_pool(config.workers, || {
        requests
            .par_iter()
            .map(|reqs| {
                scales
                    .par_iter()
                    .map(|scale| {
                        reqs.par_iter()
                            .map(|r| match materialize(r, scale, &config.profile) {
                                Ok(state) => installed_latency(&config.controller.decide(&state, &r.sla)),
                                Err(_) => Latency::Unstable,
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    })?;
    let bins = bins
        .iter()
        .zip(outcomes)
        .map(|(nominal, per_scale)| LatencyBin {
            device_bin: *nominal,
            methods: scales
                .iter()
                .zip(per_scale)
                .map(|(s, l)| LatencyStats::from_latencies(&s.name, &l))
                .collect(),
        })
        .collect();
    Ok(Exp4Result { scales, bins })
}

// ---------------------------------------------------------------- reports

/// CSV table plus JSON summary for one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: ExperimentName,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: serde_json::Value,
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

impl Exp1Result {
    pub fn report(&self, config: &ExperimentConfig) -> ExperimentReport {
        let rows = self
            .bins
            .iter()
            .flat_map(|b| {
                b.methods.iter().map(move |m| {
                    vec![
                        format!("{}", b.sla_bin),
                        m.method.clone(),
                        format!("{}", m.violation_rate),
                        format!("{}", m.mean_runtime_s),
                        format!("{}", m.violation_se),
                        format!("{}", m.runtime_se_s),
                        m.requests.to_string(),
                    ]
                })
            })
            .collect();
        ExperimentReport {
            name: ExperimentName::Exp1,
            header: header(&[
                "sla_bin",
                "method",
                "violation_rate",
                "mean_runtime_s",
                "violation_se",
                "runtime_se_s",
                "requests",
            ]),
            rows,
            summary: serde_json::json!({ "experiment": "exp1", "config": config, "result": self }),
        }
    }
}

fn latency_rows(label: &str, bins: &[LatencyBin]) -> (Vec<String>, Vec<Vec<String>>) {
    let rows = bins
        .iter()
        .flat_map(|b| {
            b.methods.iter().map(move |m| {
                vec![
                    format!("{}", b.device_bin),
                    m.method.clone(),
                    fmt_opt(m.mean_latency_s),
                    fmt_opt(m.latency_se_s),
                    m.stable.to_string(),
                    format!("{}", m.stable_fraction),
                    m.requests.to_string(),
                ]
            })
        })
        .collect();
    (
        header(&[
            "device_bin",
            label,
            "mean_latency_s",
            "latency_se_s",
            "stable",
            "stable_fraction",
            "requests",
        ]),
        rows,
    )
}

impl Exp2Result {
    pub fn report(&self, config: &ExperimentConfig) -> ExperimentReport {
        let (header, rows) = latency_rows("method", &self.bins);
        let first_unstable: BTreeMap<&str, Option<f64>> = EXP2_METHODS
            .iter()
            .map(|m| (*m, self.first_unstable_bin(m)))
            .collect();
        ExperimentReport {
            name: ExperimentName::Exp2,
            header,
            rows,
            summary: serde_json::json!({
                "experiment": "exp2",
                "config": config,
                "first_unstable_bin": first_unstable,
                "dominance_violations": self.dominance_violations,
                "result": self,
            }),
        }
    }
}

impl Exp3Result {
    pub fn report(&self, config: &ExperimentConfig) -> ExperimentReport {
        let mut cols = vec!["device_bin"];
        cols.extend(EXP3_CHOICES);
        cols.extend(["modal", "requests"]);
        let rows = self
            .bins
            .iter()
            .map(|b| {
                let mut row = vec![format!("{}", b.device_bin)];
                row.extend(EXP3_CHOICES.iter().map(|c| format!("{}", b.frequency(c))));
                row.push(b.modal().to_string());
                row.push(b.requests.to_string());
                row
            })
            .collect();
        ExperimentReport {
            name: ExperimentName::Exp3,
            header: header(&cols),
            rows,
            summary: serde_json::json!({ "experiment": "exp3", "config": config, "result": self }),
        }
    }
}

impl Exp4Result {
    pub fn report(&self, config: &ExperimentConfig) -> ExperimentReport {
        let (header, rows) = latency_rows("scale", &self.bins);
        let max_stable: BTreeMap<&str, Option<f64>> = self
            .scales
            .iter()
            .map(|s| (s.name.as_str(), self.max_stable_bin(&s.name)))
            .collect();
        ExperimentReport {
            name: ExperimentName::Exp4,
            header,
            rows,
            summary: serde_json::json!({
                "experiment": "exp4",
                "config": config,
                "max_stable_bin": max_stable,
                "result": self,
            }),
        }
    }
}

/// Runs the named experiment and renders its report.
pub fn run(name: ExperimentName, config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    Ok(match name {
        ExperimentName::Exp1 => exp1(config)?.report(config),
        ExperimentName::Exp2 => exp2(config)?.report(config),
        ExperimentName::Exp3 => exp3(config)?.report(config),
        ExperimentName::Exp4 => exp4(config)?.report(config),
    })
}
