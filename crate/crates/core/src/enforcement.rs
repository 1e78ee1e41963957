//! Stability and SLA enforcement: four ordered corrective edits, cycled until
//! a compliant plan appears or no edit makes progress, then a scale-out or
//! SLA-downgrade recommendation.
//!
//! Edits, in order:
//!
//! 1. [`Enforcer::rebalance_gateways_direct`]: re-run direct assignment over
//!    an `alpha_g` grid (Direct plans only).
//! 2. [`Enforcer::rebalance_gateways_aggregate`]: move cluster heads or chain
//!    anchors to other gateways, membership untouched (Clustered/Parallel).
//! 3. [`Enforcer::split_cluster`]: `k -> k + 1` when a head is overloaded.
//! 4. [`Enforcer::multiply_paths`]: cut the busiest chain in two.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composition::{
    chains_of, clustered_from_parts, compose_clustered_k, compose_direct, parallel_from_chains,
    parts_of, CompositionParams, CompositionPlan, GatewayLoads, Strategy,
};
use crate::model::{DroneId, Position, SwarmState};
use crate::queueing::{Latency, QueueingConfig};
use crate::selection::{evaluate_plan, CandidateEvaluation, Selection, SlaSpec, ALPHA_GRID};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnforceError {
    #[error("edit needs a {expected} plan, got {actual}")]
    WrongStrategy { expected: &'static str, actual: Strategy },
    #[error("no cluster or chain can be split further")]
    NoSplitPossible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edit {
    GatewayRebalanceDirect,
    GatewayRebalanceAggregate,
    ClusterSplit,
    PathMultiply,
    ScaleOut,
    SlaDowngrade,
}

impl Edit {
    /// The four corrective edits in application order.
    pub const CYCLE: [Edit; 4] = [
        Edit::GatewayRebalanceDirect,
        Edit::GatewayRebalanceAggregate,
        Edit::ClusterSplit,
        Edit::PathMultiply,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnforcementConfig {
    /// Hard cap on full edit cycles.
    pub max_cycles: usize,
    /// Stop after this many consecutive cycles that do not improve the best
    /// plan seen so far.
    pub patience: usize,
    pub alpha_grid: Vec<f64>,
}

impl Default for EnforcementConfig {
    fn default() -> Self {
        Self {
            max_cycles: 20,
            patience: 2,
            alpha_grid: ALPHA_GRID.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditEffect {
    Applied,
    NoChange,
    /// The edit is gated to another strategy.
    NotApplicable,
    NoSplitPossible,
}

/// One line of the enforcement trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub cycle: usize,
    pub edit: Edit,
    pub effect: EditEffect,
    pub pre_max_rho: f64,
    pub post_max_rho: f64,
    pub pre_latency: Latency,
    pub post_latency: Latency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleOutSuggestion {
    /// Gateways to add, each a clone of an existing gateway.
    pub gateways: usize,
    pub position: Position,
    pub service_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DowngradeSuggestion {
    /// The loosest-needed bound: the lowest latency seen among plans that are
    /// stable at the utilization ceiling.
    LatencyBound { latency: f64 },
    /// No plan was stable at the ceiling; only less traffic can help.
    DemandReduction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnforcementOutcome {
    pub final_plan: Option<CompositionPlan>,
    pub final_evaluation: Option<CandidateEvaluation>,
    pub edits: Vec<Edit>,
    pub trace: Vec<TraceEntry>,
    pub compliant: bool,
    pub downgrade_suggestion: Option<DowngradeSuggestion>,
    pub scaleout_suggestion: Option<ScaleOutSuggestion>,
    pub cycles: usize,
}

impl EnforcementOutcome {
    pub fn latency(&self) -> Latency {
        self.final_evaluation
            .as_ref()
            .map_or(Latency::Unstable, |e| e.latency)
    }
}

/// Everything the edits need to rebuild and re-score plans.
#[derive(Debug, Clone, Copy)]
pub struct Enforcer<'a> {
    pub state: &'a SwarmState,
    pub params: &'a CompositionParams,
    pub sla: &'a SlaSpec,
    pub queueing: &'a QueueingConfig,
    pub config: &'a EnforcementConfig,
}

/// Preference between two evaluations: compliant first, then stable
/// (`rho < 1`), then lower SLA latency, then lower peak utilization.
pub fn preference(a: &CandidateEvaluation, b: &CandidateEvaluation, sla: &SlaSpec) -> Ordering {
    b.compliant(sla)
        .cmp(&a.compliant(sla))
        .then(b.stable().cmp(&a.stable()))
        .then(a.latency.total_cmp(&b.latency))
        .then(a.max_rho().total_cmp(&b.max_rho()))
}

fn better(a: &CandidateEvaluation, b: &CandidateEvaluation, sla: &SlaSpec) -> bool {
    preference(a, b, sla) == Ordering::Less
}

impl<'a> Enforcer<'a> {
    pub fn evaluate(&self, plan: CompositionPlan) -> CandidateEvaluation {
        evaluate_plan(0, plan, self.state, self.sla, self.queueing)
    }

    /// Best of `current` and the distinct `options` under [`preference`].
    fn pick_best(&self, current: &CandidateEvaluation, options: Vec<CompositionPlan>) -> CandidateEvaluation {
        let mut best = current.clone();
        let mut tried: Vec<CompositionPlan> = Vec::with_capacity(options.len());
        for plan in options {
            if Some(&plan) == current.plan.as_ref() || tried.contains(&plan) {
                continue;
            }
            tried.push(plan.clone());
            let e = self.evaluate(plan);
            if better(&e, &best, self.sla) {
                best = e;
            }
        }
        best
    }

    fn plan_of(e: CandidateEvaluation) -> CompositionPlan {
        e.plan.expect("evaluated plans carry their plan")
    }

    /// Edit 1: re-runs direct assignment for every `alpha_g` in the grid and
    /// keeps the best outcome; returns the plan unchanged when nothing beats it.
    pub fn rebalance_gateways_direct(&self, plan: &CompositionPlan) -> Result<CompositionPlan, EnforceError> {
        self.rebalance_direct_from(&self.evaluate(plan.clone()))
            .map(Self::plan_of)
    }

    fn rebalance_direct_from(&self, current: &CandidateEvaluation) -> Result<CandidateEvaluation, EnforceError> {
        let plan = current.plan.as_ref().expect("current plan");
        if plan.strategy != Strategy::Direct {
            return Err(EnforceError::WrongStrategy {
                expected: "direct",
                actual: plan.strategy,
            });
        }
        if self.state.topology().gateway_ids().len() < 2 {
            return Ok(current.clone());
        }
        let options = self
            .config
            .alpha_grid
            .iter()
            .map(|a| compose_direct(self.state, &self.params.with_alpha(*a)))
            .collect();
        Ok(self.pick_best(current, options))
    }

    /// Edit 2: reassigns head→gateway (clustered) or anchor→gateway
    /// (parallel) edges over the `alpha_g` grid. Cluster and chain membership
    /// never changes.
    pub fn rebalance_gateways_aggregate(
        &self,
        plan: &CompositionPlan,
    ) -> Result<CompositionPlan, EnforceError> {
        self.rebalance_aggregate_from(&self.evaluate(plan.clone()))
            .map(Self::plan_of)
    }

    fn rebalance_aggregate_from(&self, current: &CandidateEvaluation) -> Result<CandidateEvaluation, EnforceError> {
        let plan = current.plan.as_ref().expect("current plan");
        if plan.strategy == Strategy::Direct {
            return Err(EnforceError::WrongStrategy {
                expected: "clustered or parallel",
                actual: plan.strategy,
            });
        }
        if self.state.topology().gateway_ids().len() < 2 {
            return Ok(current.clone());
        }
        let options = self
            .config
            .alpha_grid
            .iter()
            .map(|a| self.regateway(plan, *a))
            .collect();
        Ok(self.pick_best(current, options))
    }

    fn regateway(&self, plan: &CompositionPlan, alpha_g: f64) -> CompositionPlan {
        let state = self.state;
        let mut loads = GatewayLoads::new(state);
        let traffic = |members: &[DroneId]| members.iter().map(|m| state.own_traffic(*m)).sum::<f64>();
        match plan.strategy {
            Strategy::Clustered => {
                let mut parts = parts_of(plan);
                for part in &mut parts {
                    let from = state.position(part.head).unwrap();
                    let g = loads.choose(&from, alpha_g, self.params);
                    loads.traffic[g] += traffic(&part.members);
                    part.gateway = loads.ids[g];
                }
                clustered_from_parts(state, &parts, plan.alpha)
            }
            _ => {
                let mut chains = chains_of(plan);
                for (members, gateway) in &mut chains {
                    let from = state.position(members[0]).unwrap();
                    let g = loads.choose(&from, alpha_g, self.params);
                    loads.traffic[g] += traffic(members);
                    *gateway = loads.ids[g];
                }
                parallel_from_chains(state, &chains, plan.alpha)
            }
        }
    }

    /// Edit 3: when some cluster head runs above `rho_max`, re-clusters with
    /// one more cluster. Returns the plan unchanged when no head is overloaded.
    pub fn split_cluster(&self, plan: &CompositionPlan) -> Result<CompositionPlan, EnforceError> {
        self.split_cluster_from(&self.evaluate(plan.clone()))
    }

    fn split_cluster_from(&self, eval: &CandidateEvaluation) -> Result<CompositionPlan, EnforceError> {
        let plan = eval.plan.as_ref().expect("current plan");
        if plan.strategy != Strategy::Clustered {
            return Err(EnforceError::WrongStrategy {
                expected: "clustered",
                actual: plan.strategy,
            });
        }
        let Some(analysis) = eval.analysis.as_ref() else {
            return Ok(plan.clone());
        };
        let overloaded = plan
            .cluster_heads
            .iter()
            .flatten()
            .any(|h| analysis.delays.get(h).is_some_and(|d| d.rho > self.sla.rho_max));
        if !overloaded {
            return Ok(plan.clone());
        }
        let k = plan.k.unwrap_or(1);
        let available = self.state.topology().access_ids().len();
        if k >= available {
            return Err(EnforceError::NoSplitPossible);
        }
        compose_clustered_k(self.state, &self.params.with_alpha(plan.alpha), k + 1)
            .map_err(|_| EnforceError::NoSplitPossible)
    }

    /// Edit 4: cuts the most utilized chain (ties: lowest path index) at its
    /// midpoint. The upstream half keeps the original gateway, its last drone
    /// now forwarding to it directly; the gateway-side half becomes a new
    /// chain attached to the cheapest gateway under `alpha_g`.
    pub fn multiply_paths(&self, plan: &CompositionPlan) -> Result<CompositionPlan, EnforceError> {
        self.multiply_paths_from(&self.evaluate(plan.clone()))
    }

    fn multiply_paths_from(&self, eval: &CandidateEvaluation) -> Result<CompositionPlan, EnforceError> {
        let plan = eval.plan.as_ref().expect("current plan");
        if plan.strategy != Strategy::Parallel {
            return Err(EnforceError::WrongStrategy {
                expected: "parallel",
                actual: plan.strategy,
            });
        }
        let rho = |d: &DroneId| {
            eval.analysis
                .as_ref()
                .and_then(|a| a.delays.get(d))
                .map_or(f64::INFINITY, |x| x.rho)
        };
        let mut target: Option<(usize, f64)> = None;
        for (i, path) in plan.paths.iter().enumerate() {
            let members = &path[..path.len() - 1];
            if members.len() < 2 {
                continue;
            }
            let util = members.iter().map(rho).fold(0.0, f64::max);
            if target.map_or(true, |(_, u)| util > u) {
                target = Some((i, util));
            }
        }
        let Some((index, _)) = target else {
            return Err(EnforceError::NoSplitPossible);
        };
        Ok(self.cut_chain(plan, index))
    }

    fn cut_chain(&self, plan: &CompositionPlan, index: usize) -> CompositionPlan {
        let state = self.state;
        let mut chains = chains_of(plan);
        let (members, gateway) = chains[index].clone();
        // members are anchor-first; the upstream half sits at the back
        let n = members.len();
        let upstream = n / 2;
        let downstream: Vec<DroneId> = members[..n - upstream].to_vec();
        let upstream_half: Vec<DroneId> = members[n - upstream..].to_vec();
        chains[index] = (upstream_half, gateway);

        let mut loads = GatewayLoads::new(state);
        for (m, g) in &chains {
            let i = loads.index_of(*g).unwrap();
            loads.traffic[i] += m.iter().map(|d| state.own_traffic(*d)).sum::<f64>();
        }
        let from = state.position(downstream[0]).unwrap();
        let g = loads.choose(&from, self.params.weights.alpha_g, self.params);
        chains.push((downstream, loads.ids[g]));
        let mut out = parallel_from_chains(state, &chains, plan.alpha);
        out.k = Some(chains.len());
        out
    }

    /// Applies one edit to the current evaluation; the new evaluation is
    /// returned when the plan changed.
    fn apply(&self, edit: Edit, current: &CandidateEvaluation) -> (EditEffect, Option<CandidateEvaluation>) {
        let plan = current.plan.as_ref().expect("current plan");
        let result = match edit {
            Edit::GatewayRebalanceDirect => self.rebalance_direct_from(current),
            Edit::GatewayRebalanceAggregate => self.rebalance_aggregate_from(current),
            Edit::ClusterSplit => self.split_cluster_from(current).map(|p| self.evaluate_changed(p, current)),
            Edit::PathMultiply => self.multiply_paths_from(current).map(|p| self.evaluate_changed(p, current)),
            Edit::ScaleOut | Edit::SlaDowngrade => return (EditEffect::NotApplicable, None),
        };
        match result {
            Ok(next) if next.plan.as_ref() == Some(plan) => (EditEffect::NoChange, None),
            Ok(next) => (EditEffect::Applied, Some(next)),
            Err(EnforceError::WrongStrategy { .. }) => (EditEffect::NotApplicable, None),
            Err(EnforceError::NoSplitPossible) => (EditEffect::NoSplitPossible, None),
        }
    }

    fn evaluate_changed(&self, next: CompositionPlan, current: &CandidateEvaluation) -> CandidateEvaluation {
        if current.plan.as_ref() == Some(&next) {
            current.clone()
        } else {
            self.evaluate(next)
        }
    }

    /// Runs the edit cycle on a single plan.
    pub fn enforce_plan(&self, plan: CompositionPlan) -> EnforcementOutcome {
        self.run(self.evaluate(plan), &[])
    }

    /// Edit cycle from an evaluated plan; `earlier` plans count towards the
    /// downgrade suggestion.
    fn run(&self, start: CandidateEvaluation, earlier: &[CandidateEvaluation]) -> EnforcementOutcome {
        let mut current = start;
        let mut best = current.clone();
        let mut seen: Vec<CandidateEvaluation> = earlier.to_vec();
        seen.push(current.clone());
        let mut edits = Vec::new();
        let mut trace = Vec::new();
        let mut cycles = 0;

        if current.compliant(self.sla) {
            return self.finish(current, edits, trace, 0);
        }
        let mut stale = 0;
        while cycles < self.config.max_cycles {
            cycles += 1;
            let mut improved = false;
            let mut changed = false;
            for edit in Edit::CYCLE {
                let (effect, next) = self.apply(edit, &current);
                let pre = (current.max_rho(), current.latency);
                if let Some(next) = next {
                    current = next;
                    seen.push(current.clone());
                    changed = true;
                }
                edits.push(edit);
                trace.push(TraceEntry {
                    cycle: cycles,
                    edit,
                    effect,
                    pre_max_rho: pre.0,
                    post_max_rho: current.max_rho(),
                    pre_latency: pre.1,
                    post_latency: current.latency,
                });
                if better(&current, &best, self.sla) {
                    best = current.clone();
                    improved = true;
                }
                if current.compliant(self.sla) {
                    return self.finish(current, edits, trace, cycles);
                }
            }
            if !changed {
                break;
            }
            stale = if improved { 0 } else { stale + 1 };
            if stale >= self.config.patience {
                break;
            }
        }
        let mut out = self.finish(best, edits, trace, cycles);
        self.recommend(&mut out, &seen);
        out
    }

    fn finish(
        &self,
        final_eval: CandidateEvaluation,
        edits: Vec<Edit>,
        trace: Vec<TraceEntry>,
        cycles: usize,
    ) -> EnforcementOutcome {
        let compliant = final_eval.compliant(self.sla);
        EnforcementOutcome {
            final_plan: final_eval.plan.clone(),
            final_evaluation: Some(final_eval),
            edits,
            trace,
            compliant,
            downgrade_suggestion: None,
            scaleout_suggestion: None,
            cycles,
        }
    }

    fn recommend(&self, out: &mut EnforcementOutcome, seen: &[CandidateEvaluation]) {
        let overloaded = out
            .final_evaluation
            .as_ref()
            .and_then(|e| e.analysis.as_ref())
            .map(|a| {
                a.delays
                    .iter()
                    .filter(|(_, d)| d.rho > self.sla.rho_max)
                    .map(|(id, _)| *id)
                    .collect::<Vec<_>>()
            })
            .unwrap_or_default();
        let rec = recommend_scaleout_or_downgrade(self.state, self.queueing, self.sla, seen, &overloaded);
        if rec.scaleout.is_some() {
            out.edits.push(Edit::ScaleOut);
        }
        out.edits.push(Edit::SlaDowngrade);
        out.scaleout_suggestion = rec.scaleout;
        out.downgrade_suggestion = Some(rec.downgrade);
    }

    /// Enforcement after a failed selection, starting from the most
    /// preferred evaluated candidate (compliant, then stable, then lowest
    /// latency).
    pub fn enforce(&self, selection: &Selection) -> EnforcementOutcome {
        let start = selection
            .table
            .iter()
            .filter(|e| e.plan.is_some())
            .min_by(|a, b| preference(a, b, self.sla).then(a.index.cmp(&b.index)));
        match start {
            Some(start) => self.run(start.clone(), &selection.table),
            None => EnforcementOutcome {
                final_plan: None,
                final_evaluation: None,
                edits: vec![Edit::SlaDowngrade],
                trace: Vec::new(),
                compliant: false,
                downgrade_suggestion: Some(DowngradeSuggestion::DemandReduction),
                scaleout_suggestion: None,
                cycles: 0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub scaleout: Option<ScaleOutSuggestion>,
    pub downgrade: DowngradeSuggestion,
}

/// Smallest number of added gateways `n` (each with service rate `mu_new`)
/// so that `load / (gateway_capacity + n * mu_new) < rho_max`.
pub fn gateways_needed(load: f64, gateway_capacity: f64, mu_new: f64, rho_max: f64) -> usize {
    if load / gateway_capacity < rho_max {
        return 0;
    }
    let x = (load / rho_max - gateway_capacity) / mu_new;
    let mut n = x.ceil().max(0.0) as usize;
    while load / (gateway_capacity + n as f64 * mu_new) >= rho_max {
        n += 1;
    }
    while n > 0 && load / (gateway_capacity + (n - 1) as f64 * mu_new) < rho_max {
        n -= 1;
    }
    n
}

/// Recommendation once the edit cycle is exhausted.
///
/// Scale-out: gateways to add (placed at the centroid of `overloaded`) so
/// that the total offered work spread over all gateways, as a direct plan
/// would, drops below `rho_max`. Downgrade: the lowest SLA latency among
/// `seen` plans that respect `rho_max`, else a demand reduction.
pub fn recommend_scaleout_or_downgrade(
    state: &SwarmState,
    queueing: &QueueingConfig,
    sla: &SlaSpec,
    seen: &[CandidateEvaluation],
    overloaded: &[DroneId],
) -> Recommendation {
    let gateways: Vec<_> = state.topology().gateways().collect();
    let capacity: f64 = gateways.iter().map(|g| g.service_rate).sum();
    let mu_new = capacity / gateways.len().max(1) as f64;
    let work_per_data = 1.0
        + queueing.control_fraction * queueing.control_bits as f64 / queueing.data_bits as f64;
    let load = state.total_demand() * work_per_data;
    let n = gateways_needed(load, capacity, mu_new, sla.rho_max);
    let scaleout = (n > 0).then(|| {
        let points: Vec<Position> = if overloaded.is_empty() {
            gateways.iter().map(|g| g.position).collect()
        } else {
            overloaded.iter().filter_map(|d| state.position(*d)).collect()
        };
        let m = points.len().max(1) as f64;
        let position = Position::new(
            points.iter().map(|p| p.x).sum::<f64>() / m,
            points.iter().map(|p| p.y).sum::<f64>() / m,
            points.iter().map(|p| p.altitude).sum::<f64>() / m,
        );
        ScaleOutSuggestion {
            gateways: n,
            position,
            service_rate: mu_new,
        }
    });
    let downgrade = seen
        .iter()
        .filter(|e| e.analysis.is_some() && e.max_rho() <= sla.rho_max)
        .filter_map(|e| e.latency.value())
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
        .map_or(DowngradeSuggestion::DemandReduction, |latency| {
            DowngradeSuggestion::LatencyBound { latency }
        });
    Recommendation {
        scaleout,
        downgrade,
    }
}
