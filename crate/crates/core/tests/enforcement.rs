mod common;

use std::collections::BTreeSet;

use common::{arb_state, build, entry, gateway};
use proptest::prelude::*;
use swarmlink::composition::{
    clustered_from_parts, compose_clustered_k, direct_from_assignment, parallel_from_chains, ClusterPart,
};
use swarmlink::enforcement::{
    gateways_needed, DowngradeSuggestion, Edit, EditEffect, EnforceError, EnforcementConfig, Enforcer,
};
use swarmlink::queueing::{analyze, stability_check, QueueingConfig};
use swarmlink::selection::{evaluate_plan, Selection};
use swarmlink::{
    CompositionParams, CompositionPlan, Controller, DroneId, LatencyMetric, SlaSpec, Strategy as Kind, SwarmState,
};

struct Ctx {
    params: CompositionParams,
    queueing: QueueingConfig,
    config: EnforcementConfig,
    sla: SlaSpec,
}

impl Ctx {
    fn new(bound: f64, rho_max: f64) -> Self {
        Self {
            params: CompositionParams::default(),
            queueing: QueueingConfig::default(),
            config: EnforcementConfig::default(),
            sla: SlaSpec::new(bound, LatencyMetric::Avg, rho_max).unwrap(),
        }
    }

    fn enforcer<'a>(&'a self, state: &'a SwarmState) -> Enforcer<'a> {
        Enforcer {
            state,
            params: &self.params,
            sla: &self.sla,
            queueing: &self.queueing,
            config: &self.config,
        }
    }

    /// A failed selection whose only row is `plan`.
    fn failed_selection(&self, state: &SwarmState, plan: CompositionPlan) -> Selection {
        Selection {
            table: vec![evaluate_plan(0, plan, state, &self.sla, &self.queueing)],
            winner: None,
        }
    }
}

fn id(i: u32) -> DroneId {
    DroneId(i)
}

fn two_gateway_swarm() -> SwarmState {
    build(
        vec![
            entry(0, 5.0, 0.0, 1000.0),
            entry(1, 10.0, 0.0, 1000.0),
            gateway(2, 0.0, 0.0, 100.0),
            gateway(3, 100.0, 0.0, 100.0),
        ],
        &[(0, 4), (1, 4)],
        10.0,
    )
}

#[test]
fn one_rebalance_fixes_an_overloaded_gateway() {
    let ctx = Ctx::new(1.0, 0.75);
    let state = two_gateway_swarm();
    let both_on_first = direct_from_assignment(&state, &[(id(0), id(2)), (id(1), id(2))].into_iter().collect(), 0.5);
    let start = analyze(&both_on_first, &state, &ctx.queueing).unwrap();
    assert!(start.delays[&id(2)].rho > 0.75);

    let out = ctx.enforcer(&state).enforce(&ctx.failed_selection(&state, both_on_first));
    assert!(out.compliant);
    assert_eq!(out.edits, vec![Edit::GatewayRebalanceDirect]);
    let plan = out.final_plan.unwrap();
    assert_ne!(plan.gateway_of(id(0)), plan.gateway_of(id(1)));
    let a = analyze(&plan, &state, &ctx.queueing).unwrap();
    assert!(stability_check(&a.delays, 0.75).stable);
}

#[test]
fn direct_rebalance_degenerate_cases() {
    let ctx = Ctx::new(1.0, 0.75);
    let single = build(vec![entry(0, 5.0, 0.0, 1000.0), gateway(1, 0.0, 0.0, 100.0)], &[(0, 5)], 10.0);
    let plan = direct_from_assignment(&single, &[(id(0), id(1))].into_iter().collect(), 0.5);
    assert_eq!(ctx.enforcer(&single).rebalance_gateways_direct(&plan).unwrap(), plan);

    let state = two_gateway_swarm();
    let balanced = direct_from_assignment(&state, &[(id(0), id(2)), (id(1), id(3))].into_iter().collect(), 0.5);
    assert_eq!(ctx.enforcer(&state).rebalance_gateways_direct(&balanced).unwrap(), balanced);

    let clustered = compose_clustered_k(&state, &ctx.params, 2).unwrap();
    assert!(matches!(
        ctx.enforcer(&state).rebalance_gateways_direct(&clustered),
        Err(EnforceError::WrongStrategy { .. })
    ));
}

#[test]
fn aggregate_rebalance_moves_one_head() {
    let ctx = Ctx::new(1.0, 0.75);
    let state = build(
        vec![
            entry(0, 5.0, 10.0, 1000.0),
            entry(1, 6.0, 12.0, 1000.0),
            entry(2, 5.0, 90.0, 1000.0),
            entry(3, 6.0, 88.0, 1000.0),
            gateway(4, 0.0, 50.0, 100.0),
            gateway(5, 100.0, 50.0, 100.0),
        ],
        &[(0, 2), (1, 2), (2, 2), (3, 2)],
        10.0,
    );
    let parts = vec![
        ClusterPart { head: id(1), members: vec![id(0), id(1)], gateway: id(4) },
        ClusterPart { head: id(3), members: vec![id(2), id(3)], gateway: id(4) },
    ];
    let saturated = clustered_from_parts(&state, &parts, 0.5);
    let before = saturated.clusters();
    let after = ctx.enforcer(&state).rebalance_gateways_aggregate(&saturated).unwrap();
    assert_eq!(after.clusters(), before);
    let moved = [id(1), id(3)].iter().filter(|h| after.gateway_of(**h) == Some(id(5))).count();
    assert_eq!(moved, 1);
    let a = analyze(&after, &state, &ctx.queueing).unwrap();
    assert!(a.delays[&id(4)].rho < 0.75 && a.delays[&id(5)].rho < 0.75);
}

#[test]
fn aggregate_rebalance_moves_a_chain() {
    let ctx = Ctx::new(1.0, 0.75);
    let state = build(
        vec![
            entry(0, 5.0, 10.0, 1000.0),
            entry(1, 10.0, 10.0, 1000.0),
            entry(2, 5.0, 90.0, 1000.0),
            entry(3, 10.0, 90.0, 1000.0),
            gateway(4, 0.0, 50.0, 100.0),
            gateway(5, 100.0, 50.0, 100.0),
        ],
        &[(0, 2), (1, 2), (2, 2), (3, 2)],
        10.0,
    );
    let chains = vec![(vec![id(1), id(0)], id(4)), (vec![id(3), id(2)], id(4))];
    let plan = parallel_from_chains(&state, &chains, 0.5);
    let after = ctx.enforcer(&state).rebalance_gateways_aggregate(&plan).unwrap();
    assert_eq!(after.chains(), plan.chains());
    let gateways: BTreeSet<DroneId> = [id(1), id(3)].iter().filter_map(|a| after.gateway_of(*a)).collect();
    assert_eq!(gateways.len(), 2);
}

fn star_swarm() -> SwarmState {
    build(
        vec![
            entry(0, 10.0, 10.0, 1.0),
            entry(1, 12.0, 10.0, 1.0),
            entry(2, 90.0, 10.0, 1.0),
            entry(3, 92.0, 10.0, 1.0),
            gateway(4, 50.0, 50.0, 100.0),
        ],
        &[(0, 3), (1, 3), (2, 3), (3, 3)],
        0.1,
    )
}

#[test]
fn overloaded_star_is_split() {
    let ctx = Ctx::new(100.0, 0.95);
    let state = star_swarm();
    let star = compose_clustered_k(&state, &ctx.params, 1).unwrap();
    let head = star.cluster_heads.clone().unwrap()[0];
    let a = analyze(&star, &state, &ctx.queueing).unwrap();
    assert!(a.inputs[&head].lambda_d > 1.0);

    let split = ctx.enforcer(&state).split_cluster(&star).unwrap();
    assert_eq!(split.k, Some(2));
    let b = analyze(&split, &state, &ctx.queueing).unwrap();
    for h in split.cluster_heads.clone().unwrap() {
        assert!((b.inputs[&h].lambda_d - 0.6).abs() < 1e-9);
    }

    let out = ctx.enforcer(&state).enforce(&ctx.failed_selection(&state, star));
    assert!(out.compliant);
    assert_eq!(out.edits.last(), Some(&Edit::ClusterSplit));
}

#[test]
fn split_degenerate_cases() {
    let ctx = Ctx::new(100.0, 0.95);
    let state = star_swarm();
    let calm = compose_clustered_k(&state, &ctx.params, 2).unwrap();
    assert_eq!(ctx.enforcer(&state).split_cluster(&calm).unwrap(), calm);

    let heavy = build(
        vec![entry(0, 10.0, 10.0, 1.0), entry(1, 12.0, 10.0, 1.0), gateway(2, 50.0, 50.0, 100.0)],
        &[(0, 10), (1, 10)],
        0.1,
    );
    let full = compose_clustered_k(&heavy, &ctx.params, 2).unwrap();
    assert_eq!(ctx.enforcer(&heavy).split_cluster(&full), Err(EnforceError::NoSplitPossible));
}

fn line_swarm() -> SwarmState {
    build(
        vec![
            entry(0, 10.0, 10.0, 1000.0),
            entry(1, 20.0, 10.0, 1000.0),
            entry(2, 30.0, 10.0, 1000.0),
            entry(3, 40.0, 10.0, 1000.0),
            entry(4, 10.0, 90.0, 1000.0),
            entry(5, 20.0, 90.0, 1000.0),
            entry(6, 30.0, 90.0, 1000.0),
            entry(7, 40.0, 90.0, 1000.0),
            gateway(8, 50.0, 10.0, 1000.0),
            gateway(9, 50.0, 90.0, 1000.0),
        ],
        &[(0, 1), (1, 1), (2, 1), (3, 1), (4, 1), (5, 1), (6, 1), (7, 1)],
        10.0,
    )
}

#[test]
fn long_chain_is_cut_in_two() {
    let ctx = Ctx::new(1.0, 0.95);
    let state = line_swarm();
    // anchor-first: 3 forwards to gateway 8, 0 is the upstream tail
    let plan = parallel_from_chains(
        &state,
        &[
            (vec![id(3), id(2), id(1), id(0)], id(8)),
            (vec![id(7)], id(9)),
            (vec![id(6)], id(9)),
            (vec![id(5)], id(9)),
            (vec![id(4)], id(9)),
        ],
        0.5,
    );
    let before = analyze(&plan, &state, &ctx.queueing).unwrap();
    let after = ctx.enforcer(&state).multiply_paths(&plan).unwrap();
    assert_eq!(after.paths.len(), 6);
    let mut lens: Vec<usize> = after.chains().iter().map(Vec::len).collect();
    lens.sort();
    assert_eq!(lens, vec![1, 1, 1, 1, 2, 2]);
    let a = analyze(&after, &state, &ctx.queueing).unwrap();
    for d in [id(2), id(3)] {
        assert!(a.inputs[&d].lambda_d < before.inputs[&d].lambda_d);
    }
    let total = |x: &swarmlink::queueing::Analysis| x.inputs[&id(8)].lambda_d + x.inputs[&id(9)].lambda_d;
    assert!((total(&a) - total(&before)).abs() < 1e-9);
}

#[test]
fn chain_cut_tie_goes_to_first_path_and_singletons_cannot_split() {
    let ctx = Ctx::new(1.0, 0.95);
    let state = line_swarm();
    let plan = parallel_from_chains(
        &state,
        &[
            (vec![id(3), id(2)], id(8)),
            (vec![id(7), id(6)], id(9)),
            (vec![id(1)], id(8)),
            (vec![id(0)], id(8)),
            (vec![id(5)], id(9)),
            (vec![id(4)], id(9)),
        ],
        0.5,
    );
    let after = ctx.enforcer(&state).multiply_paths(&plan).unwrap();
    assert_eq!(after.chains()[0].len(), 1);
    assert_eq!(after.chains()[1], plan.chains()[1]);

    let singles = parallel_from_chains(
        &state,
        &(0..8).map(|i| (vec![id(i)], if i < 4 { id(8) } else { id(9) })).collect::<Vec<_>>(),
        0.5,
    );
    assert_eq!(ctx.enforcer(&state).multiply_paths(&singles), Err(EnforceError::NoSplitPossible));
}

#[test]
fn demand_beyond_the_swarm_recommends_scale_out() {
    let state = build(
        vec![entry(0, 10.0, 10.0, 1000.0), entry(1, 20.0, 10.0, 1000.0), gateway(2, 50.0, 50.0, 100.0)],
        &[(0, 8), (1, 8)],
        10.0,
    );
    let sla = SlaSpec::new(1.0, LatencyMetric::Avg, 0.95).unwrap();
    let d = Controller::default().decide(&state, &sla);
    let out = d.enforcement.unwrap();
    assert!(!out.compliant);
    assert!(out.edits.contains(&Edit::ScaleOut));
    assert_eq!(out.edits.last(), Some(&Edit::SlaDowngrade));
    let work = 160.0 * (1.0 + 0.05 * 256.0 / 8192.0);
    let expected = ((work / 0.95 - 100.0) / 100.0_f64).ceil() as usize;
    assert_eq!(out.scaleout_suggestion.unwrap().gateways, expected);
    assert_eq!(out.downgrade_suggestion, Some(DowngradeSuggestion::DemandReduction));
}

#[test]
fn stable_but_slow_recommends_a_looser_bound() {
    let ctx = Ctx::new(1e-9, 0.95);
    let state = two_gateway_swarm();
    let d = Controller::default().decide(&state, &ctx.sla);
    let out = d.enforcement.unwrap();
    assert!(!out.compliant);
    assert!(out.scaleout_suggestion.is_none());
    let best = d
        .selection
        .iter()
        .filter_map(|e| e.latency.value())
        .fold(f64::INFINITY, f64::min);
    match out.downgrade_suggestion.unwrap() {
        DowngradeSuggestion::LatencyBound { latency } => assert!(latency <= best),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn scale_out_arithmetic() {
    assert_eq!(gateways_needed(50.0, 100.0, 100.0, 0.95), 0);
    assert_eq!(gateways_needed(300.0, 100.0, 100.0, 0.95), 3);
    assert_eq!(gateways_needed(95.0, 100.0, 100.0, 0.95), 1);
}

/// Position of an edit in the corrective cycle.
fn step(e: Edit) -> Option<usize> {
    Edit::CYCLE.iter().position(|c| *c == e)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn edit_log_follows_the_cycle(state in arb_state(), bound in 1e-4f64..0.02, rho_max in 0.5f64..0.99) {
        let sla = SlaSpec::new(bound, LatencyMetric::Avg, rho_max).unwrap();
        let controller = Controller::default();
        let selection = controller.select(&state, &sla);
        let out = controller.enforcer(&state, &sla).enforce(&selection);

        // corrective edits cycle 1,2,3,4,1,2,... then optional ScaleOut, SlaDowngrade
        let corrective: Vec<Edit> = out.edits.iter().copied().filter(|e| step(*e).is_some()).collect();
        for (i, e) in corrective.iter().enumerate() {
            prop_assert_eq!(*e, Edit::CYCLE[i % 4]);
        }
        let tail = &out.edits[corrective.len()..];
        if out.compliant {
            prop_assert!(tail.is_empty());
            let eval = out.final_evaluation.as_ref().unwrap();
            let a = analyze(out.final_plan.as_ref().unwrap(), &state, &QueueingConfig::default()).unwrap();
            prop_assert!(stability_check(&a.delays, rho_max).stable);
            prop_assert!(a.latency.l_avg.within(bound));
            prop_assert!(eval.compliant(&sla));
            // early stop: the last corrective edit is the one that produced compliance
            if let Some(last) = out.trace.last() {
                prop_assert_eq!(last.edit, *corrective.last().unwrap());
            }
        } else {
            prop_assert!(tail == [Edit::SlaDowngrade] || tail == [Edit::ScaleOut, Edit::SlaDowngrade]);
            prop_assert!(out.downgrade_suggestion.is_some());
        }
        prop_assert!(out.cycles <= EnforcementConfig::default().max_cycles);
        prop_assert_eq!(out.trace.len(), corrective.len());
        for t in &out.trace {
            if t.effect == EditEffect::NotApplicable {
                prop_assert!(t.pre_latency == t.post_latency);
            }
        }
    }

    #[test]
    fn aggregate_rebalance_keeps_membership(state in arb_state(), k_extra in 0usize..3, alpha_g in 0.0f64..=1.0) {
        let ctx = Ctx::new(0.01, 0.9);
        let mut params = ctx.params.clone();
        params.weights.alpha_g = alpha_g;
        let e = Enforcer { params: &params, ..ctx.enforcer(&state) };
        let g = state.topology().gateway_ids().len();
        if let Ok(plan) = compose_clustered_k(&state, &params, g + k_extra) {
            let after = e.rebalance_gateways_aggregate(&plan).unwrap();
            prop_assert_eq!(after.clusters(), plan.clusters());
        }
        if let Ok(plan) = swarmlink::composition::compose(Kind::Parallel, &state, &params) {
            let after = e.rebalance_gateways_aggregate(&plan).unwrap();
            prop_assert_eq!(after.chains(), plan.chains());
        }
    }
}
