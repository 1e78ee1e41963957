//! Capped brute-force baselines over direct gateway assignments and clustered
//! configurations, scored with the same queueing model as the heuristics.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::composition::kmeans::kmeans;
use crate::composition::{
    cluster_count, clustered_from_parts, direct_from_assignment, ClusterPart, ComposeError, CostWeights,
    CompositionParams,
};
use crate::model::{DroneId, SwarmState};
use crate::queueing::QueueingConfig;
use crate::selection::{evaluate_plan, latency_order, CandidateEvaluation, SlaSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BruteForceConfig {
    /// Maximum number of candidates evaluated.
    pub cap: usize,
    /// Sampling seed used when the space exceeds the cap.
    pub seed: u64,
    /// Clustered search covers `k` up to the formula value plus this.
    pub k_slack: usize,
    /// Explicit inclusive `k` range for the clustered search.
    pub k_range: Option<(usize, usize)>,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        Self {
            cap: 200,
            seed: 0,
            k_slack: 2,
            k_range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    /// Lowest-latency feasible candidate.
    pub best: Option<CandidateEvaluation>,
    /// Lowest-latency candidate that is stable (`rho < 1`), feasible or not.
    pub best_stable: Option<CandidateEvaluation>,
    /// Lowest-latency candidate meeting both `rho_max` and the bound.
    pub best_compliant: Option<CandidateEvaluation>,
    pub examined: usize,
    /// Size of the full candidate space (saturating).
    pub space: u128,
}

/// Indices `0..space` to evaluate: all of them when `space <= cap`, else
/// `cap` distinct uniform draws, sorted.
fn candidate_indices(space: u128, cap: usize, seed: u64) -> Vec<u128> {
    if space <= cap as u128 {
        return (0..space).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = HashSet::with_capacity(cap);
    let mut out = Vec::with_capacity(cap);
    while out.len() < cap {
        let i = rng.gen_range(0..space);
        if picked.insert(i) {
            out.push(i);
        }
    }
    out.sort_unstable();
    out
}

fn reduce(evals: Vec<CandidateEvaluation>, space: u128, sla: &SlaSpec) -> BruteForceResult {
    let examined = evals.len();
    let best = evals
        .iter()
        .filter(|e| e.feasible)
        .min_by(|a, b| latency_order(a, b))
        .cloned();
    let best_stable = evals
        .iter()
        .filter(|e| e.stable())
        .min_by(|a, b| latency_order(a, b))
        .cloned();
    let best_compliant = evals
        .iter()
        .filter(|e| e.compliant(sla))
        .min_by(|a, b| latency_order(a, b))
        .cloned();
    BruteForceResult {
        best,
        best_stable,
        best_compliant,
        examined,
        space,
    }
}

/// Every non-gateway drone forwards to one gateway; candidates are the
/// `|G|^n` assignment maps, decoded as base-`|G|` numbers (lowest drone id is
/// the least significant digit).
pub fn brute_force_direct(
    state: &SwarmState,
    sla: &SlaSpec,
    queueing: &QueueingConfig,
    config: &BruteForceConfig,
) -> BruteForceResult {
    let gateways = state.topology().gateway_ids();
    let access = state.topology().access_ids();
    let g = gateways.len() as u128;
    let space = (0..access.len()).fold(1u128, |acc, _| acc.saturating_mul(g));
    let evals = candidate_indices(space, config.cap, config.seed)
        .into_iter()
        .enumerate()
        .map(|(i, mut code)| {
            let mut assignment = BTreeMap::new();
            for d in &access {
                assignment.insert(*d, gateways[(code % g) as usize]);
                code /= g;
            }
            let plan = direct_from_assignment(state, &assignment, CostWeights::default().alpha);
            evaluate_plan(i, plan, state, sla, queueing)
        })
        .collect();
    reduce(evals, space, sla)
}

struct KBlock {
    clusters: Vec<Vec<DroneId>>,
    size: u128,
}

/// For each `k`, the k-means partition of the non-gateway drones (seeded as
/// the heuristic) with one head and one gateway chosen per cluster.
pub fn brute_force_clustered(
    state: &SwarmState,
    sla: &SlaSpec,
    queueing: &QueueingConfig,
    params: &CompositionParams,
    config: &BruteForceConfig,
) -> Result<BruteForceResult, ComposeError> {
    let gateways = state.topology().gateway_ids();
    let access: Vec<_> = state.topology().access_drones().collect();
    let n = access.len();
    let (lo, hi) = config.k_range.unwrap_or_else(|| {
        let formula = cluster_count(
            state.device_count(),
            state.mean_device_rate(),
            state.mean_access_rate(),
            gateways.len(),
        );
        (gateways.len(), (formula + config.k_slack).min(n))
    });
    if lo == 0 || lo > n {
        return Err(ComposeError::TooFewDrones { k: lo, available: n });
    }
    let points: Vec<[f64; 2]> = access.iter().map(|d| [d.position.x, d.position.y]).collect();
    let g = gateways.len() as u128;
    let blocks: Vec<KBlock> = (lo..=hi.min(n))
        .map(|k| {
            let c = kmeans(&points, k, params.seed, &params.kmeans);
            let clusters: Vec<Vec<DroneId>> = (0..k)
                .map(|j| c.members(j).into_iter().map(|i| access[i].id).collect())
                .collect();
            let size = clusters
                .iter()
                .fold(1u128, |acc, m| acc.saturating_mul(m.len() as u128 * g));
            KBlock { clusters, size }
        })
        .collect();
    let space = blocks.iter().fold(0u128, |acc, b| acc.saturating_add(b.size));
    let evals = candidate_indices(space, config.cap, config.seed)
        .into_iter()
        .enumerate()
        .map(|(i, code)| {
            let mut code = code;
            let mut block = &blocks[0];
            for b in &blocks {
                block = b;
                if code < b.size {
                    break;
                }
                code -= b.size;
            }
            let parts: Vec<ClusterPart> = block
                .clusters
                .iter()
                .map(|members| {
                    let m = members.len() as u128;
                    let head = members[(code % m) as usize];
                    code /= m;
                    let gateway = gateways[(code % g) as usize];
                    code /= g;
                    ClusterPart {
                        head,
                        members: members.clone(),
                        gateway,
                    }
                })
                .collect();
            let plan = clustered_from_parts(state, &parts, params.weights.alpha);
            evaluate_plan(i, plan, state, sla, queueing)
        })
        .collect();
    Ok(reduce(evals, space, sla))
}
