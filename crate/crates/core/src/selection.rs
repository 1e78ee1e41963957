//! Candidate enumeration and SLA-optimal composition selection.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composition::{compose, CompositionParams, CompositionPlan, Strategy};
use crate::model::{DroneId, SwarmState};
use crate::queueing::{analyze, Analysis, Latency, LatencyMetric, QueueingConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlaError {
    #[error("latency bound must be positive, got {0}")]
    InvalidBound(f64),
    #[error("rho_max must lie in (0, 1), got {0}")]
    InvalidRhoMax(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlaSpec {
    /// Seconds.
    pub latency_bound: f64,
    pub metric: LatencyMetric,
    pub rho_max: f64,
}

impl SlaSpec {
    pub fn new(latency_bound: f64, metric: LatencyMetric, rho_max: f64) -> Result<Self, SlaError> {
        let sla = Self {
            latency_bound,
            metric,
            rho_max,
        };
        sla.validate()?;
        Ok(sla)
    }

    pub fn validate(&self) -> Result<(), SlaError> {
        if !(self.latency_bound > 0.0) {
            return Err(SlaError::InvalidBound(self.latency_bound));
        }
        if !(self.rho_max > 0.0 && self.rho_max < 1.0) {
            return Err(SlaError::InvalidRhoMax(self.rho_max));
        }
        Ok(())
    }
}

impl Default for SlaSpec {
    fn default() -> Self {
        Self {
            latency_bound: 1.0,
            metric: LatencyMetric::Avg,
            rho_max: 0.95,
        }
    }
}

pub const ALPHA_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// One enumerated composition; `plan` is an error string when the strategy
/// could not be instantiated.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub strategy: Strategy,
    pub alpha: f64,
    pub plan: Result<CompositionPlan, String>,
}

/// Direct, Clustered, Parallel at the configured alpha, or at every alpha of
/// [`ALPHA_GRID`] (strategy-major order) when `alpha_grid` is set.
pub fn enumerate_candidates(
    state: &SwarmState,
    params: &CompositionParams,
    alpha_grid: bool,
) -> Vec<Candidate> {
    let alphas: Vec<f64> = if alpha_grid {
        ALPHA_GRID.to_vec()
    } else {
        vec![params.weights.alpha]
    };
    let mut out = Vec::new();
    for strategy in Strategy::ALL {
        for alpha in &alphas {
            let p = params.with_alpha(*alpha);
            out.push(Candidate {
                strategy,
                alpha: *alpha,
                plan: compose(strategy, state, &p).map_err(|e| e.to_string()),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Infeasibility {
    CompositionFailed { message: String },
    CapacityBreach { drones: Vec<DroneId> },
    Unstable { nodes: Vec<DroneId> },
    LatencyBound { latency: f64, bound: f64 },
}

impl std::fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ids = |v: &[DroneId]| {
            v.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        match self {
            Infeasibility::CompositionFailed { message } => write!(f, "composition failed: {message}"),
            Infeasibility::CapacityBreach { drones } => write!(f, "capacity exceeded at {}", ids(drones)),
            Infeasibility::Unstable { nodes } => write!(f, "unstable at {}", ids(nodes)),
            Infeasibility::LatencyBound { latency, bound } => {
                write!(f, "latency {latency} exceeds bound {bound}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEvaluation {
    pub index: usize,
    pub strategy: Strategy,
    pub alpha: f64,
    pub plan: Option<CompositionPlan>,
    pub analysis: Option<Analysis>,
    /// The SLA metric value (`L_avg` or `L_max`).
    pub latency: Latency,
    pub feasible: bool,
    pub reason: Option<Infeasibility>,
}

impl CandidateEvaluation {
    pub fn max_rho(&self) -> f64 {
        self.analysis.as_ref().map_or(f64::INFINITY, |a| a.max_rho())
    }

    /// `rho < 1` everywhere.
    pub fn stable(&self) -> bool {
        self.analysis.as_ref().is_some_and(|a| a.all_stable())
    }

    /// Stable at the SLA ceiling and within the latency bound.
    pub fn compliant(&self, sla: &SlaSpec) -> bool {
        self.analysis.is_some()
            && self.max_rho() <= sla.rho_max
            && self.latency.within(sla.latency_bound)
    }
}

fn capacity_breaches(state: &SwarmState) -> Vec<DroneId> {
    state
        .allocation()
        .counts()
        .into_iter()
        .filter(|(d, n)| {
            state
                .topology()
                .drone(*d)
                .map_or(true, |drone| *n > drone.capacity as usize)
        })
        .map(|(d, _)| d)
        .collect()
}

/// Scores a plan against the SLA: stability (`rho < 1`), device capacity,
/// then the latency bound.
pub fn evaluate_plan(
    index: usize,
    plan: CompositionPlan,
    state: &SwarmState,
    sla: &SlaSpec,
    config: &QueueingConfig,
) -> CandidateEvaluation {
    let strategy = plan.strategy;
    let alpha = plan.alpha;
    let analysis = match analyze(&plan, state, config) {
        Ok(a) => a,
        Err(e) => {
            return CandidateEvaluation {
                index,
                strategy,
                alpha,
                plan: Some(plan),
                analysis: None,
                latency: Latency::Unstable,
                feasible: false,
                reason: Some(Infeasibility::CompositionFailed {
                    message: e.to_string(),
                }),
            }
        }
    };
    let latency = analysis.latency.value(sla.metric);
    let breaches = capacity_breaches(state);
    let unstable = analysis.unstable_nodes();
    let reason = if !unstable.is_empty() {
        Some(Infeasibility::Unstable { nodes: unstable })
    } else if !breaches.is_empty() {
        Some(Infeasibility::CapacityBreach { drones: breaches })
    } else {
        match latency {
            Latency::Finite(v) if v > sla.latency_bound => Some(Infeasibility::LatencyBound {
                latency: v,
                bound: sla.latency_bound,
            }),
            _ => None,
        }
    };
    CandidateEvaluation {
        index,
        strategy,
        alpha,
        plan: Some(plan),
        analysis: Some(analysis),
        latency,
        feasible: reason.is_none(),
        reason,
    }
}

pub fn evaluate_candidate(
    index: usize,
    candidate: &Candidate,
    state: &SwarmState,
    sla: &SlaSpec,
    config: &QueueingConfig,
) -> CandidateEvaluation {
    match &candidate.plan {
        Ok(plan) => evaluate_plan(index, plan.clone(), state, sla, config),
        Err(message) => CandidateEvaluation {
            index,
            strategy: candidate.strategy,
            alpha: candidate.alpha,
            plan: None,
            analysis: None,
            latency: Latency::Unstable,
            feasible: false,
            reason: Some(Infeasibility::CompositionFailed {
                message: message.clone(),
            }),
        },
    }
}

/// Relative tolerance under which two latencies count as tied.
const LATENCY_TIE: f64 = 1e-12;

/// Orders by latency, then strategy (fewest hops first), then index.
pub(crate) fn latency_order(a: &CandidateEvaluation, b: &CandidateEvaluation) -> Ordering {
    let by_latency = match (a.latency, b.latency) {
        (Latency::Finite(x), Latency::Finite(y)) if (x - y).abs() <= LATENCY_TIE * x.abs().max(y.abs()) => {
            Ordering::Equal
        }
        (x, y) => x.total_cmp(&y),
    };
    by_latency
        .then(a.strategy.cmp(&b.strategy))
        .then(a.index.cmp(&b.index))
}

/// Evaluation table plus the winning row, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub table: Vec<CandidateEvaluation>,
    pub winner: Option<usize>,
}

impl Selection {
    pub fn winner(&self) -> Option<&CandidateEvaluation> {
        self.winner.map(|i| &self.table[i])
    }

    /// True when no candidate is stable, within capacity and within the bound.
    pub fn no_feasible(&self) -> bool {
        self.winner.is_none()
    }

    pub fn csv_rows(&self) -> Vec<SelectionRow> {
        self.table.iter().map(SelectionRow::from).collect()
    }
}

pub const SELECTION_HEADER: [&str; 6] = ["strategy", "alpha", "L_avg", "L_max", "feasible", "reason"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionRow {
    pub strategy: Strategy,
    pub alpha: f64,
    pub l_avg: String,
    pub l_max: String,
    pub feasible: bool,
    pub reason: String,
}

impl From<&CandidateEvaluation> for SelectionRow {
    fn from(e: &CandidateEvaluation) -> Self {
        let (l_avg, l_max) = match &e.analysis {
            Some(a) => (a.latency.l_avg.to_string(), a.latency.l_max.to_string()),
            None => ("unstable".to_string(), "unstable".to_string()),
        };
        Self {
            strategy: e.strategy,
            alpha: e.alpha,
            l_avg,
            l_max,
            feasible: e.feasible,
            reason: e.reason.as_ref().map(|r| r.to_string()).unwrap_or_default(),
        }
    }
}

/// Evaluates every candidate and picks the feasible one with the lowest SLA
/// latency.
pub fn select_composition(
    candidates: &[Candidate],
    state: &SwarmState,
    sla: &SlaSpec,
    config: &QueueingConfig,
) -> Selection {
    let table: Vec<CandidateEvaluation> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| evaluate_candidate(i, c, state, sla, config))
        .collect();
    let winner = table
        .iter()
        .filter(|e| e.feasible)
        .min_by(|a, b| latency_order(a, b))
        .map(|e| e.index);
    Selection { table, winner }
}
