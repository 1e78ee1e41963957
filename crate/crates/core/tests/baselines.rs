mod common;

use common::{arb_enumerable_state, build, entry, gateway, random_state};
use proptest::prelude::*;
use swarmlink::baselines::{brute_force_clustered, brute_force_direct, BruteForceConfig};
use swarmlink::composition::compose_direct;
use swarmlink::selection::evaluate_plan;
use swarmlink::{CompositionParams, LatencyMetric, QueueingConfig, SlaSpec, SwarmState};

fn sla() -> SlaSpec {
    SlaSpec::new(0.05, LatencyMetric::Avg, 0.95).unwrap()
}

fn swarm(entries: u32, gateways: u32) -> SwarmState {
    let mut drones: Vec<_> = (0..entries).map(|i| entry(i, 5.0 + 9.0 * i as f64, 20.0, 1000.0)).collect();
    drones.extend((0..gateways).map(|j| gateway(entries + j, 10.0 + 30.0 * j as f64, 80.0, 1000.0)));
    let alloc: Vec<(u32, usize)> = (0..entries).map(|i| (i, 2)).collect();
    build(drones, &alloc, 5.0)
}

#[test]
fn small_direct_space_is_exhausted() {
    let r = brute_force_direct(&swarm(3, 2), &sla(), &QueueingConfig::default(), &BruteForceConfig::default());
    assert_eq!(r.space, 8);
    assert_eq!(r.examined, 8);
    assert!(r.best.is_some());
}

#[test]
fn large_direct_space_is_capped() {
    let r = brute_force_direct(&swarm(10, 3), &sla(), &QueueingConfig::default(), &BruteForceConfig::default());
    assert_eq!(r.space, 59049);
    assert_eq!(r.examined, 200);
}

#[test]
fn clustered_space_counts_heads_and_gateways() {
    let cfg = BruteForceConfig {
        k_range: Some((1, 1)),
        ..BruteForceConfig::default()
    };
    let r = brute_force_clustered(&swarm(3, 1), &sla(), &QueueingConfig::default(), &CompositionParams::default(), &cfg)
        .unwrap();
    assert_eq!(r.space, 3);
    assert_eq!(r.examined, 3);
}

#[test]
fn clustered_space_is_capped() {
    let state = random_state(25, 5, 250, 50.0, 3);
    let r = brute_force_clustered(
        &state,
        &sla(),
        &QueueingConfig::default(),
        &CompositionParams::default(),
        &BruteForceConfig::default(),
    )
    .unwrap();
    assert!(r.space > 200);
    assert_eq!(r.examined, 200);
}

#[test]
fn zero_k_is_rejected() {
    let cfg = BruteForceConfig {
        k_range: Some((0, 2)),
        ..BruteForceConfig::default()
    };
    let r = brute_force_clustered(&swarm(3, 1), &sla(), &QueueingConfig::default(), &CompositionParams::default(), &cfg);
    assert!(r.is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn examined_is_min_of_space_and_cap(entries in 1u32..9, gateways in 1u32..5, cap in 1usize..300, seed in any::<u64>()) {
        let cfg = BruteForceConfig { cap, seed, ..BruteForceConfig::default() };
        let r = brute_force_direct(&swarm(entries, gateways), &sla(), &QueueingConfig::default(), &cfg);
        prop_assert_eq!(r.space, (gateways as u128).pow(entries));
        prop_assert_eq!(r.examined as u128, r.space.min(cap as u128));
    }

    #[test]
    fn exhaustive_search_dominates_the_heuristic(state in arb_enumerable_state(), bound in 1e-3f64..0.05) {
        let sla = SlaSpec::new(bound, LatencyMetric::Avg, 0.95).unwrap();
        let q = QueueingConfig::default();
        let r = brute_force_direct(&state, &sla, &q, &BruteForceConfig::default());
        prop_assert!(r.space <= 200);
        prop_assert_eq!(r.examined as u128, r.space);
        let heuristic = evaluate_plan(0, compose_direct(&state, &CompositionParams::default()), &state, &sla, &q);
        if heuristic.stable() {
            let best = r.best_stable.as_ref().unwrap();
            prop_assert!(best.latency.value().unwrap() <= heuristic.latency.value().unwrap() + 1e-12);
        }
        if heuristic.feasible {
            let best = r.best.as_ref().unwrap();
            prop_assert!(best.latency.value().unwrap() <= heuristic.latency.value().unwrap() + 1e-12);
        }
    }
}
