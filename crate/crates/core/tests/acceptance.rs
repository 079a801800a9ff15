//! Acceptance gate: nine end-to-end criteria covering the oracles and
//! invariants of the simulation engine, the brake models, the cause
//! classifier and the sweep harness. Each test prints a single PASS/FAIL
//! line (visible with `--nocapture`) and asserts the same condition.

use precrash_sim::brake::BrakeType;
use precrash_sim::cause::{classify, CrashCause};
use precrash_sim::engine::{run, RunOptions};
use precrash_sim::generator::{
    generate, generate_corpus, pair_targeted_corpus, CorpusProfile, CrossingSpec, PairCategory,
};
use precrash_sim::geometry::{obb_overlap, OrientedBox, Vec2};
use precrash_sim::harness::{run_experiment, ExperimentConfig, ScenarioSource};
use precrash_sim::perception::{SensorSet, SensorSetName};
use precrash_sim::prediction::{stopping_distance, stopping_distance_numeric, PredictionParams};
use precrash_sim::scenario::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::time::Instant;

fn report(name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {}: {} — {}",
        name,
        if pass { "PASS" } else { "FAIL" },
        detail
    );
    assert!(pass, "acceptance {name} failed: {detail}");
}

/// Constant-velocity crossing corpus on dry road; every scenario collides
/// when unbraked.
fn constant_velocity_corpus(n: usize, seed: u64) -> Vec<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let spec = CrossingSpec {
                id: format!("cv-{i:04}"),
                ego_speed: rng.gen_range(5.0..11.0),
                opp_speed: rng.gen_range(4.0..9.0),
                ..Default::default()
            };
            generate(&spec).unwrap()
        })
        .collect()
}

#[test]
fn criterion_1_stopping_distance_oracle() {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut v0 = 1.0;
    while v0 <= 30.0 + 1e-9 {
        for decel in [4.0, 9.0] {
            let mut mu = 0.2;
            while mu <= 1.0 + 1e-9 {
                for delay in [0.0, 0.12] {
                    let closed = stopping_distance(v0, decel, 45.0, delay, mu)
                        .unwrap()
                        .distance;
                    let numeric = stopping_distance_numeric(v0, decel, 45.0, delay, mu);
                    let rel = (closed - numeric).abs() / numeric.max(1e-9);
                    worst = worst.max(rel);
                }
                mu += 0.05;
            }
        }
        v0 += 1.0;
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "1 stopping-distance oracle",
        worst < 1e-3 && elapsed < 5.0,
        &format!("worst relative error {worst:.2e}, runtime {elapsed:.2}s"),
    );
}

#[test]
fn criterion_2_ttb_fidelity() {
    let corpus = constant_velocity_corpus(200, 41);
    let sensors = SensorSet::by_name(SensorSetName::FiveROneV);
    let params = PredictionParams::default();
    let stages = BrakeType::V2x.stages(2.0);
    let options = RunOptions {
        record_trace: true,
        ..Default::default()
    };
    let mut avoided = 0;
    let mut worst_dev = 0.0_f64;
    let mut all_in_band = true;
    for s in &corpus {
        let outcome = run(s, &stages, &sensors, false, &params, &options).unwrap();
        if outcome.crashed() {
            continue;
        }
        avoided += 1;
        let t_trigger = outcome.trigger_events[0].1;
        let v_trigger = outcome
            .trace
            .iter()
            .find(|r| (r.t - t_trigger).abs() < 1e-9)
            .unwrap()
            .ego_v;
        let last = outcome.trace.last().unwrap();
        // Ego drives +x toward the crossing at the origin; the opponent tube
        // is the corridor |x| <= opp_width / 2 around its +y path.
        let ego_front = last.ego_x + s.ego.length / 2.0;
        let tube_edge = -s.opponent.width / 2.0;
        let gap = tube_edge - ego_front;
        let tol = v_trigger * 0.01 + 0.05;
        let dev = (gap - 0.5).abs();
        worst_dev = worst_dev.max(dev - tol);
        if dev > tol {
            all_in_band = false;
        }
    }
    report(
        "2 TTB fidelity",
        all_in_band && avoided > 0,
        &format!("{avoided}/200 avoided, worst band excess {worst_dev:.4} m"),
    );
}

#[test]
fn criterion_3_sensor_set_invariance_of_v2x() {
    let corpus = generate_corpus(200, CorpusProfile::Mixed, 42).unwrap();
    let cfg = ExperimentConfig {
        source: ScenarioSource::Inline(corpus),
        brake_types: vec![BrakeType::V2x],
        sensor_sets: SensorSetName::ALL.to_vec(),
        ttc_thresholds: vec![2.0],
        classify_crashes: false,
        ..Default::default()
    };
    let rep = run_experiment(&cfg).unwrap();
    let sets: Vec<&Vec<String>> = SensorSetName::ALL
        .iter()
        .map(|&ss| {
            &rep.cell(BrakeType::V2x, ss, 2.0)
                .unwrap()
                .aggregate
                .avoided_ids
        })
        .collect();
    let identical = sets.windows(2).all(|w| w[0] == w[1]);
    report(
        "3 V2X sensor-set invariance",
        identical,
        &format!(
            "avoided sets of size {:?} identical across 1V/1R1V/5R1V: {identical}",
            sets.iter().map(|s| s.len()).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_4_ttc_threshold_monotonicity() {
    let corpus = constant_velocity_corpus(200, 43);
    let cfg = ExperimentConfig {
        source: ScenarioSource::Inline(corpus),
        brake_types: vec![BrakeType::V2x],
        ttc_thresholds: vec![1.25, 1.5, 2.0],
        classify_crashes: false,
        ..Default::default()
    };
    let rep = run_experiment(&cfg).unwrap();
    let avoided = |ttc: f64| -> BTreeSet<String> {
        rep.cell(BrakeType::V2x, SensorSetName::FiveROneV, ttc)
            .unwrap()
            .aggregate
            .avoided_ids
            .iter()
            .cloned()
            .collect()
    };
    let (a, b, c) = (avoided(1.25), avoided(1.5), avoided(2.0));
    let monotone = a.is_subset(&b) && b.is_subset(&c);
    report(
        "4 TTC-threshold monotonicity",
        monotone,
        &format!(
            "avoided @1.25s ⊆ @1.5s ⊆ @2.0s ({} ⊆ {} ⊆ {})",
            a.len(),
            b.len(),
            c.len()
        ),
    );
}

#[test]
fn criterion_5_two_stage_full_avoidance_baseline() {
    let corpus = constant_velocity_corpus(200, 44);
    let n = corpus.len();
    let cfg = ExperimentConfig {
        source: ScenarioSource::Inline(corpus),
        brake_types: vec![BrakeType::TwoStage],
        ttc_thresholds: vec![2.0],
        classify_crashes: false,
        ..Default::default()
    };
    let rep = run_experiment(&cfg).unwrap();
    let cell = &rep
        .cell(BrakeType::TwoStage, SensorSetName::FiveROneV, 2.0)
        .unwrap()
        .aggregate;
    report(
        "5 two-stage 100% avoidance baseline",
        cell.avoided_count == n,
        &format!("{}/{} avoided", cell.avoided_count, n),
    );
}

#[test]
fn criterion_6_known_friction_ablation() {
    // Mid friction with ego speeds where the AEB can stop within its TTC
    // window if and only if it plans with the true friction.
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let corpus: Vec<Scenario> = (0..100)
        .map(|i| {
            let spec = CrossingSpec {
                id: format!("mu-{i:04}"),
                ego_speed: rng.gen_range(7.5..8.5),
                opp_speed: rng.gen_range(4.0..8.0),
                friction_mu: 0.7,
                ..Default::default()
            };
            generate(&spec).unwrap()
        })
        .collect();
    let run_with = |friction_known: bool| {
        let cfg = ExperimentConfig {
            source: ScenarioSource::Inline(corpus.clone()),
            brake_types: vec![BrakeType::Aeb],
            friction_known,
            overrides: [("a_lat_max".to_string(), 2.5)].into_iter().collect(),
            ..Default::default()
        };
        run_experiment(&cfg).unwrap()
    };
    let unknown = run_with(false);
    let known = run_with(true);
    let cell = |r: &precrash_sim::harness::AggregateReport| {
        r.cell(BrakeType::Aeb, SensorSetName::FiveROneV, 1.25)
            .unwrap()
            .aggregate
            .clone()
    };
    let (u, k) = (cell(&unknown), cell(&known));
    let friction_unknown = u.causes.get("Friction").copied().unwrap_or(0);
    let friction_known_count = k.causes.get("Friction").copied().unwrap_or(0);
    let pass = k.avoided_count > u.avoided_count && friction_known_count == 0;
    report(
        "6 known-friction ablation",
        pass,
        &format!(
            "avoided {} -> {}, Friction causes {} -> {}",
            u.avoided_count, k.avoided_count, friction_unknown, friction_known_count
        ),
    );
}

#[test]
fn criterion_7_cause_classifier_oracle() {
    let mut mismatches = Vec::new();
    let mut total = 0;
    for cause in CrashCause::ALL_TARGETABLE {
        let corpus = generate_corpus(20, CorpusProfile::CauseTargeted(cause), 12345).unwrap();
        for s in &corpus {
            total += 1;
            let brake = BrakeType::parse(&s.meta["designed_brake"]).unwrap();
            let ttc: f64 = s.meta["designed_ttc_threshold"].parse().unwrap();
            let sensors =
                SensorSet::by_name(SensorSetName::parse(&s.meta["designed_sensor_set"]).unwrap());
            let friction_known: bool = s.meta["designed_friction_known"].parse().unwrap();
            let a_lat: f64 = s.meta["designed_a_lat_max"].parse().unwrap();
            let params = PredictionParams {
                a_lat_max: a_lat,
                ..Default::default()
            };
            let stages = brake.stages(ttc);
            let outcome = run(
                s,
                &stages,
                &sensors,
                friction_known,
                &params,
                &RunOptions::default(),
            )
            .unwrap();
            if !outcome.crashed() {
                mismatches.push(format!("{} avoided", s.id));
                continue;
            }
            let label = classify(&outcome, s, &stages, &sensors, friction_known, &params)
                .unwrap()
                .stages
                .last()
                .unwrap()
                .resolved_label;
            if label != cause {
                mismatches.push(format!("{} -> {label}", s.id));
            }
        }
    }
    for cat in PairCategory::ALL {
        let corpus = pair_targeted_corpus(cat, 20, 777).unwrap();
        let expected = cat.expected_pair();
        for s in &corpus {
            total += 1;
            let ttc: f64 = s.meta["designed_ttc_threshold"].parse().unwrap();
            let sensors =
                SensorSet::by_name(SensorSetName::parse(&s.meta["designed_sensor_set"]).unwrap());
            let a_lat: f64 = s.meta["designed_a_lat_max"].parse().unwrap();
            let safety: f64 = s.meta["designed_safety_dist"].parse().unwrap();
            let params = PredictionParams {
                a_lat_max: a_lat,
                ..Default::default()
            };
            let mut stages = BrakeType::TwoStage.stages(ttc);
            for st in &mut stages {
                st.safety_dist = safety;
            }
            let outcome = run(s, &stages, &sensors, false, &params, &RunOptions::default())
                .unwrap();
            if !outcome.crashed() {
                mismatches.push(format!("{} avoided", s.id));
                continue;
            }
            let pair = classify(&outcome, s, &stages, &sensors, false, &params)
                .unwrap()
                .resolved_pair;
            if pair != Some(expected) {
                mismatches.push(format!("{} -> {pair:?}", s.id));
            }
        }
    }
    report(
        "7 cause-classifier oracle",
        mismatches.is_empty(),
        &format!(
            "{}/{} designed labels matched{}",
            total - mismatches.len(),
            total,
            if mismatches.is_empty() {
                String::new()
            } else {
                format!("; first mismatch: {}", mismatches[0])
            }
        ),
    );
}

/// Exact convex-polygon overlap oracle: corner containment either way or any
/// edge pair intersecting.
fn overlap_oracle(a: &OrientedBox, b: &OrientedBox) -> bool {
    let ca = a.corners();
    let cb = b.corners();
    if ca.iter().any(|&p| b.contains(p)) || cb.iter().any(|&p| a.contains(p)) {
        return true;
    }
    for i in 0..4 {
        for j in 0..4 {
            if precrash_sim::geometry::segments_intersect(
                ca[i],
                ca[(i + 1) % 4],
                cb[j],
                cb[(j + 1) % 4],
            ) {
                return true;
            }
        }
    }
    false
}

/// Smallest separating-axis margin: a near-zero value means the boxes are
/// within float noise of tangency.
fn sat_margin(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let mut margin = f64::INFINITY;
    let axes = [
        Vec2::from_heading(a.heading),
        Vec2::from_heading(a.heading).perp(),
        Vec2::from_heading(b.heading),
        Vec2::from_heading(b.heading).perp(),
    ];
    let mut max_gap = f64::NEG_INFINITY;
    for axis in axes {
        let proj = |bx: &OrientedBox| {
            let ps = bx.corners().map(|c| c.dot(axis));
            let lo = ps.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        };
        let (alo, ahi) = proj(a);
        let (blo, bhi) = proj(b);
        let overlap = ahi.min(bhi) - alo.max(blo);
        margin = margin.min(overlap.abs());
        max_gap = max_gap.max(-overlap);
    }
    if max_gap > 0.0 {
        max_gap
    } else {
        margin
    }
}

#[test]
fn criterion_8_collision_predicate() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut tested = 0;
    let mut agreements = 0;
    while tested < 1000 {
        let a = OrientedBox::new(
            Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(0.5..5.0),
            rng.gen_range(0.3..2.5),
        );
        let b = OrientedBox::new(
            Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(0.5..5.0),
            rng.gen_range(0.3..2.5),
        );
        if sat_margin(&a, &b) < 1e-6 {
            continue;
        }
        tested += 1;
        if obb_overlap(&a, &b) == overlap_oracle(&a, &b) {
            agreements += 1;
        }
    }
    report(
        "8 collision predicate",
        agreements == tested,
        &format!("{agreements}/{tested} agreements with the polygon oracle"),
    );
}

#[test]
fn criterion_9_determinism_and_performance() {
    let start = Instant::now();
    let run_jobs = |jobs: usize| {
        let cfg = ExperimentConfig {
            source: ScenarioSource::Generated {
                n: 1000,
                profile: CorpusProfile::Mixed,
                seed: 2024,
            },
            brake_types: BrakeType::ALL.to_vec(),
            ttc_thresholds: vec![2.0],
            classify_crashes: false,
            jobs,
            ..Default::default()
        };
        serde_json::to_string(&run_experiment(&cfg).unwrap()).unwrap()
    };
    let serial = run_jobs(1);
    let parallel = run_jobs(8);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "9 determinism & performance",
        serial == parallel && elapsed < 60.0,
        &format!(
            "1000-scenario x 3-brake sweep bit-identical across jobs 1/8: {}, runtime {elapsed:.1}s",
            serial == parallel
        ),
    );
}
