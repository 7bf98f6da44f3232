use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wsan_core::engine::{run, RunOutput};
use wsan_core::nodes::{DataFilter, ProcessingSite};
use wsan_core::parallel::{run_batch, run_batch_sequential};
use wsan_core::pubsub::DispatchPolicy;
use wsan_core::scenario::{FireSpec, Scenario, SubscriptionSpec};
use wsan_core::topology::{LatencyClass, TopologyKind};

const REFERENCE: &str = include_str!("../../../scenarios/reference.toml");

fn reference() -> Scenario {
    Scenario::from_toml_str(REFERENCE).unwrap()
}

fn check_invariants(out: &RunOutput) {
    let recs = &out.trace.records;
    assert!(recs.windows(2).all(|w| w[0].t <= w[1].t), "trace time went backwards");
    for class in LatencyClass::ALL {
        let c = out.metrics.link(class);
        assert_eq!(c.sent, c.delivered + c.dropped, "{}", class.name());
    }
    for f in &out.metrics.fires {
        let chain = [f.detected_at, f.dispatched_at, f.responded_at, f.contained_at];
        let present: Vec<f64> = chain.iter().flatten().copied().collect();
        assert!(present.windows(2).all(|w| w[0] <= w[1]), "latencies out of order: {f:?}");
        assert!(present.iter().all(|&t| t >= f.t0));
    }
    assert_eq!(out.all_contained, out.metrics.fires.iter().all(|f| f.contained_at.is_some()));
}

#[test]
fn reference_containment_matches_pipeline_sum() {
    let sc = reference();
    let out = run(&sc).unwrap();
    check_invariants(&out);
    let f = &out.metrics.fires[0];
    let travel = (50.0f64 * 50.0 * 2.0).sqrt() / sc.actors.speed;
    let expected = f.detection_latency().unwrap() + 2.0 * sc.network.wsan_latency_s + travel + sc.actors.service_time;
    assert!((f.containment_time().unwrap() - expected).abs() < 1e-9);
    assert!(out.all_contained);
}

#[test]
fn horizon_before_detection() {
    let mut sc = reference();
    sc.horizon = 0.5;
    let out = run(&sc).unwrap();
    assert_eq!(out.trace.of_kind("detection").count(), 0);
    assert!(!out.all_contained);
    check_invariants(&out);
}

#[test]
fn static_fire_out_of_range_is_never_contained() {
    let mut sc = reference();
    // halfway between four sensors, farther than r from each
    sc.fire_events = vec![FireSpec { x: 100.0, y: 100.0, speed: 0.0, t0: 0.0 }];
    let out = run(&sc).unwrap();
    assert!(!out.all_contained);
    assert_eq!(out.metrics.fires[0].detected_at, None);
}

#[test]
fn subscription_required_denies_unwatched_detections() {
    let mut sc = reference();
    sc.topology.cloud_gated = true;
    sc.topology.authorization = DispatchPolicy::SubscriptionRequired;
    sc.subscriptions.clear();
    let out = run(&sc).unwrap();
    assert!(out.trace.of_kind("authorization").all(|r| r.detail.as_deref() == Some("denied")));
    assert_eq!(out.metrics.fires[0].dispatched_at, None);
    assert!(!out.all_contained);

    sc.subscriptions.push(SubscriptionSpec {
        subscriber: "ops".into(),
        topic_filter: "wsan/reference/quadrant/#".into(),
        period: 30.0,
    });
    let out = run(&sc).unwrap();
    assert!(out.all_contained);
}

#[test]
fn reject_all_filter_blocks_dispatch() {
    let mut sc = reference();
    sc.topology.kind = TopologyKind::AutomaticWithCloud;
    sc.topology.filter = DataFilter::RejectAll;
    let out = run(&sc).unwrap();
    assert!(out.trace.of_kind("filtered").count() > 0);
    assert_eq!(out.trace.of_kind("dispatch").count(), 0);
}

#[test]
fn busy_actor_queues_second_fire() {
    let mut sc = reference();
    sc.fire_events = vec![
        FireSpec { x: 60.0, y: 60.0, speed: 0.5, t0: 0.0 },
        FireSpec { x: 140.0, y: 140.0, speed: 0.5, t0: 0.0 },
    ];
    let out = run(&sc).unwrap();
    check_invariants(&out);
    assert!(out.trace.of_kind("actor_queued").count() > 0);
    assert!(out.all_contained);
}

#[test]
fn direct_actor_variation_routes_commands_through_broker() {
    let mut sc = reference();
    sc.topology.kind = TopologyKind::AutomaticWithCloud;
    sc.topology.direct_actor_variation = true;
    let out = run(&sc).unwrap();
    let cmds: Vec<_> = out.trace.of_kind("send").filter(|r| r.port == "actorcommand").collect();
    assert!(!cmds.is_empty());
    assert!(cmds.iter().all(|r| r.src == "broker"));
    assert!(out.all_contained);
}

fn random_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let n = 2 * rng.random_range(1..=4u32);
    let r = rng.random_range(5.0..60.0);
    let side = n as f64 * 2.0 * r;
    let kind = [TopologyKind::SemiAutomatic, TopologyKind::AutomaticInCloud, TopologyKind::AutomaticWithCloud]
        [rng.random_range(0..3)];
    let mut sc = reference();
    sc.name = format!("fuzz{}", rng.random::<u16>());
    sc.horizon = rng.random_range(1.0..400.0);
    sc.grid.n = n;
    sc.grid.r = r;
    sc.topology.kind = kind;
    sc.topology.cloud_gated = kind == TopologyKind::SemiAutomatic && rng.random_bool(0.3);
    sc.topology.processing_site =
        if kind.is_automatic() && rng.random_bool(0.5) { ProcessingSite::Actor } else { ProcessingSite::Interface };
    sc.topology.direct_actor_variation = kind == TopologyKind::AutomaticWithCloud
        && sc.topology.processing_site == ProcessingSite::Interface
        && rng.random_bool(0.5);
    sc.topology.authorization =
        if rng.random_bool(0.5) { DispatchPolicy::Default } else { DispatchPolicy::SubscriptionRequired };
    sc.topology.filter = match rng.random_range(0..3) {
        0 => DataFilter::AcceptAll,
        1 => DataFilter::RejectAll,
        _ => DataFilter::Quadrants(vec![rng.random_range(0..4)]),
    };
    sc.fire_events = (0..rng.random_range(0..4))
        .map(|_| FireSpec {
            // occasionally outside the area or with a bad speed, to exercise validation
            x: rng.random_range(-0.05 * side..1.02 * side),
            y: rng.random_range(0.0..side),
            speed: rng.random_range(-0.1..2.0),
            t0: rng.random_range(0.0..100.0),
        })
        .collect();
    sc.network.drop_probability = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..0.5) };
    sc.network.seed = rng.random();
    sc.network.wsan_latency_s = rng.random_range(0.0..0.02);
    sc.network.cloud_latency_s = rng.random_range(0.0..0.3);
    sc.actors.speed = rng.random_range(0.2..5.0);
    sc.actors.service_time = rng.random_range(0.0..60.0);
    sc.sensing.period = rng.random_range(0.2..5.0);
    sc.subscriptions = (0..rng.random_range(0..3))
        .map(|i| SubscriptionSpec {
            subscriber: format!("m{i}"),
            topic_filter: format!("wsan/{}/+/#", sc.name),
            period: rng.random_range(1.0..50.0),
        })
        .collect();
    sc
}

#[test]
fn accepted_scenarios_always_run() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let generated: Vec<Scenario> = (0..1000).map(|_| random_scenario(&mut rng)).collect();
    let valid: Vec<Scenario> = generated.into_iter().filter(|s| s.validate().is_ok()).collect();
    assert!(valid.len() > 500, "only {} valid", valid.len());
    let results = run_batch(&valid);
    for (sc, r) in valid.iter().zip(&results) {
        let out = r.as_ref().unwrap_or_else(|e| panic!("{e}\n{}", sc.to_toml_string()));
        check_invariants(out);
    }
    // the sequential path gives the same bytes
    let seq = run_batch_sequential(&valid[..50]);
    for (a, b) in results.iter().zip(&seq) {
        assert_eq!(a.as_ref().unwrap().trace.to_text(), b.as_ref().unwrap().trace.to_text());
    }
}
