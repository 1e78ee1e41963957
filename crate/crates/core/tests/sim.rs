mod common;

use common::{build, entry, gateway, rel_err};
use proptest::prelude::*;
use swarmlink::composition::{compose, direct_from_assignment};
use swarmlink::queueing::{node_delay, DelayMode, QueueingConfig, ServiceDistribution};
use swarmlink::sim::{simulate, SimConfig};
use swarmlink::{CompositionParams, DroneId, Strategy as Kind, SwarmState};

/// One entry drone with service rate `mu` and devices totalling `lambda_d`
/// pkt/s, forwarding to a practically instantaneous gateway.
fn single_node(mu: f64, lambda_d: f64, devices: usize) -> SwarmState {
    build(
        vec![entry(0, 10.0, 10.0, mu), gateway(1, 50.0, 50.0, 1e9)],
        &[(0, devices)],
        lambda_d / devices as f64,
    )
}

fn direct(state: &SwarmState) -> swarmlink::CompositionPlan {
    direct_from_assignment(state, &[(DroneId(0), DroneId(1))].into_iter().collect(), 0.5)
}

#[test]
fn no_traffic_no_completions() {
    let state = build(vec![entry(0, 10.0, 10.0, 1.0), gateway(1, 50.0, 50.0, 1.0)], &[], 1.0);
    let r = simulate(&direct(&state), &state, &QueueingConfig::default(), &SimConfig::default()).unwrap();
    assert_eq!(r.completed.data + r.completed.control, 0);
    assert!(r.l_avg.is_none());
    assert!(r.nodes.values().all(|n| n.wait_d.mean().is_none() && n.rho == 0.0));
}

#[test]
fn mm1_waiting_time() {
    let state = single_node(1.0, 0.5, 1);
    let q = QueueingConfig {
        control_fraction: 0.0,
        distribution: ServiceDistribution::Exponential,
        ..QueueingConfig::default()
    };
    let cfg = SimConfig {
        duration: 230_000.0,
        warmup: 1_000.0,
        seed: 5,
        service_distribution: ServiceDistribution::Exponential,
    };
    let r = simulate(&direct(&state), &state, &q, &cfg).unwrap();
    let node = &r.nodes[&DroneId(0)];
    assert!(node.wait_d.count >= 100_000);
    assert!(rel_err(node.wait_d.mean().unwrap(), 1.0) < 0.10);
    assert!(rel_err(node.rho, 0.5) < 0.02);
}

#[test]
fn two_class_fixture_matches_standard_mode() {
    // xbar_d = 1, xbar_c = 0.5, lambda_d = 0.4, lambda_c = 0.1
    let state = single_node(1.0, 0.4, 1);
    let q = QueueingConfig {
        control_fraction: 0.25,
        control_bits: 4096,
        data_bits: 8192,
        ..QueueingConfig::default()
    };
    let cfg = SimConfig {
        duration: 1_050_000.0,
        warmup: 1_000.0,
        seed: 9,
        service_distribution: ServiceDistribution::Deterministic,
    };
    let r = simulate(&direct(&state), &state, &q, &cfg).unwrap();
    let node = &r.nodes[&DroneId(0)];
    assert!(node.wait_c.count >= 100_000 && node.wait_d.count >= 100_000);
    let expect = node_delay(&q.node_input(1.0, 0.1, 0.4), DelayMode::Standard).delays.unwrap();
    assert!((expect.w_c - 0.22368421052631579).abs() < 1e-12);
    assert!(rel_err(node.wait_c.mean().unwrap(), expect.w_c) < 0.10);
    assert!(rel_err(node.wait_d.mean().unwrap(), expect.w_d) < 0.10);
    assert!(rel_err(node.rho, 0.45) < 0.02);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn runs_are_reproducible_and_conserve_packets(
        n in 1usize..5,
        devices in 1usize..6,
        lambda in 0.5f64..20.0,
        pick in 0usize..3,
        seed in any::<u64>(),
    ) {
        let mut drones: Vec<_> = (0..n as u32).map(|i| entry(i, 10.0 + 15.0 * i as f64, 20.0, 100.0)).collect();
        drones.push(gateway(n as u32, 90.0, 90.0, 200.0));
        let alloc: Vec<(u32, usize)> = (0..n as u32).map(|i| (i, devices)).collect();
        let state = build(drones, &alloc, lambda);
        let Ok(plan) = compose(Kind::ALL[pick], &state, &CompositionParams::default()) else {
            return Ok(());
        };
        let cfg = SimConfig { duration: 3.0, warmup: 0.5, seed, ..SimConfig::default() };
        let q = QueueingConfig::default();
        let a = simulate(&plan, &state, &q, &cfg).unwrap();
        let b = simulate(&plan, &state, &q, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.completed.data <= a.generated.data);
        prop_assert!(a.completed.control <= a.generated.control);
        for node in a.nodes.values() {
            let arrivals = node.arrivals.data + node.arrivals.control;
            let departures = node.departures.data + node.departures.control;
            prop_assert_eq!(arrivals, departures + node.in_system_at_end);
            prop_assert!((0.0..=1.0).contains(&node.rho));
        }
    }
}
