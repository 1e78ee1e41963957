//! Request path of the orchestrator: select a composition for an SLA, enforce
//! when no candidate complies, and publish the installed plan's atomic
//! services to the registry.

use serde::{Deserialize, Serialize};

use crate::composition::{CompositionParams, CompositionPlan, NextHop, Strategy};
use crate::enforcement::{EnforcementConfig, EnforcementOutcome, Enforcer};
use crate::model::{publish, CompositeService, ModelError, ServiceDescriptor, ServiceRegistry, SwarmState};
use crate::queueing::{Latency, QueueingConfig};
use crate::selection::{enumerate_candidates, select_composition, CandidateEvaluation, Selection, SlaSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub selection: Vec<CandidateEvaluation>,
    /// Index into `selection` of the winner, when selection succeeded.
    pub winner: Option<usize>,
    pub enforcement: Option<EnforcementOutcome>,
    /// Plan to install: the winner, or the enforcement result.
    pub plan: Option<CompositionPlan>,
    pub evaluation: Option<CandidateEvaluation>,
    /// Stable at `rho_max` and within the latency bound.
    pub compliant: bool,
}

impl Decision {
    pub fn latency(&self) -> Latency {
        self.evaluation
            .as_ref()
            .map_or(Latency::Unstable, |e| e.latency)
    }

    pub fn strategy(&self) -> Option<Strategy> {
        self.plan.as_ref().map(|p| p.strategy)
    }

    /// `rho < 1` everywhere on the installed plan.
    pub fn stable(&self) -> bool {
        self.evaluation.as_ref().is_some_and(|e| e.stable())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Controller {
    pub params: CompositionParams,
    pub queueing: QueueingConfig,
    pub enforcement: EnforcementConfig,
    /// Enumerate every strategy at each alpha of the grid.
    pub alpha_grid: bool,
    pub registry: ServiceRegistry,
}

impl Controller {
    pub fn new(params: CompositionParams, queueing: QueueingConfig) -> Self {
        Self {
            params,
            queueing,
            ..Self::default()
        }
    }

    pub fn select(&self, state: &SwarmState, sla: &SlaSpec) -> Selection {
        let candidates = enumerate_candidates(state, &self.params, self.alpha_grid);
        select_composition(&candidates, state, sla, &self.queueing)
    }

    pub fn enforcer<'a>(&'a self, state: &'a SwarmState, sla: &'a SlaSpec) -> Enforcer<'a> {
        Enforcer {
            state,
            params: &self.params,
            sla,
            queueing: &self.queueing,
            config: &self.enforcement,
        }
    }

    /// Selection, then enforcement when the winner is missing or breaches
    /// `rho_max`.
    pub fn decide(&self, state: &SwarmState, sla: &SlaSpec) -> Decision {
        let selection = self.select(state, sla);
        if let Some(w) = selection.winner().filter(|w| w.compliant(sla)) {
            let evaluation = w.clone();
            return Decision {
                plan: evaluation.plan.clone(),
                evaluation: Some(evaluation),
                winner: selection.winner,
                selection: selection.table,
                enforcement: None,
                compliant: true,
            };
        }
        let outcome = self.enforcer(state, sla).enforce(&selection);
        Decision {
            plan: outcome.final_plan.clone(),
            evaluation: outcome.final_evaluation.clone(),
            compliant: outcome.compliant,
            winner: selection.winner,
            selection: selection.table,
            enforcement: Some(outcome),
        }
    }

    /// [`Controller::decide`] followed by publishing the installed plan.
    pub fn serve(&mut self, state: &SwarmState, sla: &SlaSpec) -> Result<Decision, ModelError> {
        let decision = self.decide(state, sla);
        if let (Some(plan), Some(eval)) = (&decision.plan, &decision.evaluation) {
            self.registry = publish_plan(&self.registry, state, plan, eval)?;
        }
        Ok(decision)
    }
}

/// Publishes one descriptor per drone of an installed plan.
pub fn publish_plan(
    registry: &ServiceRegistry,
    state: &SwarmState,
    plan: &CompositionPlan,
    evaluation: &CandidateEvaluation,
) -> Result<ServiceRegistry, ModelError> {
    let composite = CompositeService::from_plan(plan, state.allocation());
    let mut next = registry.clone();
    for (id, service) in composite.atomic_services {
        let drone = state
            .topology()
            .drone(id)
            .ok_or(ModelError::UnknownDrone(id))?;
        let load = evaluation
            .analysis
            .as_ref()
            .and_then(|a| a.delays.get(&id))
            .map_or(0.0, |d| d.rho);
        let reaches_gateway = drone.is_gateway()
            || (plan.next_hop(id) != Some(NextHop::Backhaul) && plan.gateway_of(id).is_some());
        let descriptor = ServiceDescriptor {
            neighbors: service.neighbors(),
            service,
            role: drone.role,
            reaches_gateway,
            service_rate: drone.service_rate,
            load,
        };
        next = publish(&next, state.topology(), descriptor)?;
    }
    Ok(next)
}
