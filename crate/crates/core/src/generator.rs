//! Synthetic crossing scenario generation.
//!
//! All scenarios are right-angle crossings with the conflict point at the
//! origin: the ego drives along +x, the opponent along +y from the ego's
//! right. Start positions are placed so that (for the configured behaviors)
//! the opponent reaches the conflict point `approach_sync` seconds after the
//! ego does; a sync of zero therefore produces a collision when nothing
//! brakes.

use crate::cause::CrashCause;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::scenario::{Obstruction, Scenario, TrajectorySample, VehicleTrack, VehicleType, SIM_DT};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Behavior {
    Constant,
    /// Constant longitudinal acceleration from `t_start` on (speed floored
    /// at zero for decelerations).
    Accelerate { accel: f64, t_start: f64 },
    /// Constant-rate heading change from `t_start` on, speed unchanged.
    Turn { yaw_rate: f64, t_start: f64 },
}

impl Default for Behavior {
    fn default() -> Self {
        Behavior::Constant
    }
}

/// Square view obstruction in the quadrant between the two approach legs,
/// set back from each vehicle's path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstructionSpec {
    /// Distance from the ego path (the x axis) to the near edge.
    pub setback_ego: f64,
    /// Distance from the opponent path (the y axis) to the near edge.
    pub setback_opp: f64,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingSpec {
    pub id: String,
    pub ego_speed: f64,
    pub opp_speed: f64,
    /// Opponent arrival at the conflict point relative to the ego's, in
    /// seconds (0 = simultaneous arrival of the reference points).
    pub approach_sync: f64,
    pub duration: f64,
    pub friction_mu: f64,
    pub ego_behavior: Behavior,
    pub opp_behavior: Behavior,
    pub obstruction: Option<ObstructionSpec>,
    pub opp_vehicle: VehicleType,
    pub meta: BTreeMap<String, String>,
}

impl Default for CrossingSpec {
    fn default() -> Self {
        CrossingSpec {
            id: "crossing".into(),
            ego_speed: 10.0,
            opp_speed: 7.5,
            approach_sync: 0.0,
            duration: 10.0,
            friction_mu: 1.0,
            ego_behavior: Behavior::Constant,
            opp_behavior: Behavior::Constant,
            obstruction: None,
            opp_vehicle: VehicleType::PassengerCar,
            meta: BTreeMap::new(),
        }
    }
}

fn vehicle_dims(t: VehicleType) -> (f64, f64) {
    match t {
        VehicleType::PassengerCar => (4.0, 2.0),
        VehicleType::Bicycle => (1.8, 0.8),
    }
}

/// Speed profile under a behavior; position integration happens separately.
fn speed_at(v0: f64, behavior: Behavior, t: f64) -> f64 {
    match behavior {
        Behavior::Constant | Behavior::Turn { .. } => v0,
        Behavior::Accelerate { accel, t_start } => (v0 + accel * (t - t_start).max(0.0)).max(0.0),
    }
}

fn accel_at(v0: f64, behavior: Behavior, t: f64) -> f64 {
    match behavior {
        Behavior::Constant | Behavior::Turn { .. } => 0.0,
        Behavior::Accelerate { accel, t_start } => {
            if t >= t_start && speed_at(v0, behavior, t) > 0.0 {
                accel
            } else {
                0.0
            }
        }
    }
}

/// Path length covered by time `t` (trapezoidal on the simulation grid;
/// exact for piecewise-linear speed profiles up to grid alignment).
fn path_length_until(v0: f64, behavior: Behavior, t: f64) -> f64 {
    let n = (t / SIM_DT).round() as usize;
    let mut d = 0.0;
    for k in 0..n {
        let a = speed_at(v0, behavior, k as f64 * SIM_DT);
        let b = speed_at(v0, behavior, (k + 1) as f64 * SIM_DT);
        d += 0.5 * (a + b) * SIM_DT;
    }
    d
}

fn build_track(
    vehicle_type: VehicleType,
    start: Vec2,
    heading0: f64,
    v0: f64,
    behavior: Behavior,
    duration: f64,
) -> VehicleTrack {
    let (length, width) = vehicle_dims(vehicle_type);
    let n = (duration / SIM_DT).round() as usize;
    let mut samples = Vec::with_capacity(n + 1);
    let mut pos = start;
    let mut heading = heading0;
    for k in 0..=n {
        let t = k as f64 * SIM_DT;
        let v = speed_at(v0, behavior, t);
        samples.push(TrajectorySample {
            t,
            x: pos.x,
            y: pos.y,
            heading,
            speed: v,
            accel: accel_at(v0, behavior, t),
        });
        // Advance to the next tick with midpoint heading and speed.
        let t_next = t + SIM_DT;
        let v_next = speed_at(v0, behavior, t_next);
        let heading_next = match behavior {
            Behavior::Turn { yaw_rate, t_start } => {
                heading0 + yaw_rate * (t_next - t_start).max(0.0)
            }
            _ => heading0,
        };
        let heading_mid = 0.5 * (heading + heading_next);
        pos = pos + Vec2::from_heading(heading_mid).scale(0.5 * (v + v_next) * SIM_DT);
        heading = heading_next;
    }
    VehicleTrack {
        vehicle_type,
        length,
        width,
        samples,
    }
}

/// Builds a crossing scenario from a spec. The ego starts `ego_speed *
/// duration/2` meters before the conflict point; the opponent start is
/// placed so its (behavior-integrated) arrival trails the ego's by
/// `approach_sync`.
pub fn generate(spec: &CrossingSpec) -> Result<Scenario> {
    if spec.ego_speed <= 0.0 || spec.opp_speed <= 0.0 {
        return Err(Error::Infeasible("speeds must be positive".into()));
    }
    if spec.duration < 2.0 * SIM_DT {
        return Err(Error::Infeasible("duration too short".into()));
    }
    let t_cross = spec.duration / 2.0;
    let d_ego = spec.ego_speed * t_cross;
    let ego = build_track(
        VehicleType::PassengerCar,
        Vec2::new(-d_ego, 0.0),
        0.0,
        spec.ego_speed,
        spec.ego_behavior,
        spec.duration,
    );

    // Actual ego arrival at x = 0 under its behavior.
    let t_arrival = ego
        .samples
        .windows(2)
        .find(|w| w[0].x < 0.0 && w[1].x >= 0.0)
        .map(|w| {
            let f = -w[0].x / (w[1].x - w[0].x);
            w[0].t + f * SIM_DT
        })
        .ok_or_else(|| Error::Infeasible("ego never reaches the conflict point".into()))?;

    let t_opp_arrival = t_arrival + spec.approach_sync;
    if t_opp_arrival <= 0.0 || t_opp_arrival >= spec.duration {
        return Err(Error::Infeasible(
            "opponent arrival outside the scenario duration".into(),
        ));
    }
    let d_opp = path_length_until(spec.opp_speed, spec.opp_behavior, t_opp_arrival);
    let opp = build_track(
        spec.opp_vehicle,
        Vec2::new(0.0, -d_opp),
        std::f64::consts::FRAC_PI_2,
        spec.opp_speed,
        spec.opp_behavior,
        spec.duration,
    );

    let obstructions = spec
        .obstruction
        .iter()
        .map(|o| {
            let x1 = -o.setback_opp;
            let x0 = x1 - o.size;
            let y1 = -o.setback_ego;
            let y0 = y1 - o.size;
            Obstruction {
                polygon: vec![
                    Vec2::new(x0, y0),
                    Vec2::new(x1, y0),
                    Vec2::new(x1, y1),
                    Vec2::new(x0, y1),
                ],
            }
        })
        .collect();

    let mut meta = spec.meta.clone();
    meta.insert("generator".into(), "crossing".into());
    meta.insert("ego_speed".into(), format!("{:.3}", spec.ego_speed));
    meta.insert("opp_speed".into(), format!("{:.3}", spec.opp_speed));
    meta.insert("approach_sync".into(), format!("{:.3}", spec.approach_sync));

    let scenario = Scenario {
        id: spec.id.clone(),
        friction_mu: spec.friction_mu,
        obstructions,
        ego,
        opponent: opp,
        meta,
    };
    scenario.validate()?;
    Ok(scenario)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorpusProfile {
    Mixed,
    CauseTargeted(CrashCause),
}

impl CorpusProfile {
    pub fn parse(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("mixed") {
            return Ok(CorpusProfile::Mixed);
        }
        if let Some(rest) = s.strip_prefix("cause:") {
            return Ok(CorpusProfile::CauseTargeted(CrashCause::parse(rest)?));
        }
        Err(Error::Config(format!(
            "unknown corpus profile `{s}` (expected `mixed` or `cause:<name>`)"
        )))
    }
}

fn jitter(rng: &mut ChaCha8Rng, center: f64, spread: f64) -> f64 {
    rng.gen_range(center - spread..=center + spread)
}

/// Run setup a cause-targeted scenario is designed for, stored in the
/// scenario meta so downstream tools can reproduce the intended experiment.
fn targeted_meta(
    cause: CrashCause,
    brake: &str,
    ttc_threshold: f64,
    sensor_set: &str,
    friction_known: bool,
    a_lat_max: f64,
) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("designed_cause".into(), cause.as_str().into());
    m.insert("designed_brake".into(), brake.into());
    m.insert("designed_ttc_threshold".into(), format!("{ttc_threshold}"));
    m.insert("designed_sensor_set".into(), sensor_set.into());
    m.insert("designed_friction_known".into(), friction_known.to_string());
    m.insert("designed_a_lat_max".into(), format!("{a_lat_max}"));
    m
}

fn targeted_spec(cause: CrashCause, index: usize, rng: &mut ChaCha8Rng) -> Result<CrossingSpec> {
    let id = format!("{}-{index:04}", cause.as_str().to_ascii_lowercase());
    let spec = match cause {
        // Onboard line of sight opens only close to the conflict point, so
        // the AEB's detection arrives well after its last brake time.
        CrashCause::Detection => CrossingSpec {
            id,
            ego_speed: jitter(rng, 8.0, 0.4),
            opp_speed: jitter(rng, 6.0, 0.4),
            friction_mu: 1.0,
            obstruction: Some(ObstructionSpec {
                setback_ego: 3.0,
                setback_opp: 3.0,
                size: 30.0,
            }),
            meta: targeted_meta(cause, "aeb", 1.25, "1R1V", false, 3.0),
            ..Default::default()
        },
        // Known low friction pushes the last brake time far out while a
        // lateral evasion stays possible much longer.
        CrashCause::Tte => CrossingSpec {
            id,
            ego_speed: jitter(rng, 15.0, 0.8),
            opp_speed: jitter(rng, 8.0, 0.8),
            friction_mu: 0.3,
            meta: targeted_meta(cause, "aeb", 1.25, "5R1V", true, 5.0),
            ..Default::default()
        },
        // Partial brake with an aggressive 1.25 s threshold: the TTC window
        // opens only after the weak brake's last useful activation time.
        CrashCause::Ttc => CrossingSpec {
            id,
            ego_speed: jitter(rng, 15.0, 0.8),
            opp_speed: jitter(rng, 7.5, 0.5),
            friction_mu: 1.0,
            meta: targeted_meta(cause, "v2x", 1.25, "5R1V", false, 5.0),
            ..Default::default()
        },
        // Sustained ego acceleration holds the accelerator gate closed
        // through the crash.
        CrashCause::EgoAcceleration => CrossingSpec {
            id,
            ego_speed: jitter(rng, 8.0, 0.4),
            opp_speed: jitter(rng, 7.0, 0.5),
            friction_mu: 1.0,
            ego_behavior: Behavior::Accelerate {
                accel: 2.0,
                t_start: 0.0,
            },
            meta: targeted_meta(cause, "v2x", 2.0, "5R1V", false, 5.0),
            ..Default::default()
        },
        // Unknown low friction: the brake fires on its dry-road schedule but
        // the road delivers far less deceleration.
        CrashCause::Friction => CrossingSpec {
            id,
            ego_speed: jitter(rng, 7.0, 0.3),
            opp_speed: jitter(rng, 5.0, 0.5),
            friction_mu: 0.3,
            meta: targeted_meta(cause, "v2x", 2.0, "5R1V", false, 5.0),
            ..Default::default()
        },
        // Opponent curves into the ego's stopping position late in the
        // approach; the constant-heading prediction cannot anticipate it.
        CrashCause::Steering => CrossingSpec {
            id,
            ego_speed: jitter(rng, 6.0, 0.2),
            opp_speed: jitter(rng, 7.5, 0.3),
            friction_mu: 1.0,
            opp_behavior: Behavior::Turn {
                yaw_rate: 0.5,
                t_start: 4.2,
            },
            meta: targeted_meta(cause, "v2x", 2.0, "5R1V", false, 5.0),
            ..Default::default()
        },
        // Opponent starts slow (constant-speed extrapolation predicts a miss)
        // and accelerates into the conflict.
        CrashCause::OpponentAcceleration => CrossingSpec {
            id,
            ego_speed: jitter(rng, 8.0, 0.4),
            opp_speed: jitter(rng, 5.0, 0.3),
            friction_mu: 1.0,
            opp_behavior: Behavior::Accelerate {
                accel: 2.0,
                t_start: 1.0,
            },
            meta: targeted_meta(cause, "v2x", 2.0, "5R1V", false, 5.0),
            ..Default::default()
        },
        CrashCause::NotClassified => {
            return Err(Error::Config(
                "NotClassified is not a generatable target".into(),
            ))
        }
    };
    Ok(spec)
}

/// 2-stage cascade constructions whose crash resolves to a specific
/// (AEB cause, V2X cause) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairCategory {
    /// (EgoAcceleration, EgoAcceleration): the driver accelerates through
    /// the whole approach.
    EgoAccelBoth,
    /// (Friction, TTC): unknown mid friction caps the AEB below its
    /// commanded force while the aggressive 1.25 s threshold starves the
    /// weak partial brake.
    FrictionTtc,
    /// (Friction, Steering): unknown mid friction plus an opponent curving
    /// into the ego's stopping position.
    FrictionSteering,
    /// (Detection, TTC): a corner obstruction blinds the onboard sensor
    /// until far too late; the partial brake is starved by its threshold.
    DetectionTtc,
}

impl PairCategory {
    pub const ALL: [PairCategory; 4] = [
        PairCategory::EgoAccelBoth,
        PairCategory::FrictionTtc,
        PairCategory::FrictionSteering,
        PairCategory::DetectionTtc,
    ];

    pub fn expected_pair(&self) -> (CrashCause, CrashCause) {
        match self {
            PairCategory::EgoAccelBoth => {
                (CrashCause::EgoAcceleration, CrashCause::EgoAcceleration)
            }
            PairCategory::FrictionTtc => (CrashCause::Friction, CrashCause::Ttc),
            PairCategory::FrictionSteering => (CrashCause::Friction, CrashCause::Steering),
            PairCategory::DetectionTtc => (CrashCause::Detection, CrashCause::Ttc),
        }
    }
}

/// Builds a 2-stage scenario for a pair category. The meta carries the run
/// setup (threshold, sensor set, parameter overrides) the construction is
/// designed for.
pub fn pair_targeted_spec(
    category: PairCategory,
    index: usize,
    rng: &mut ChaCha8Rng,
) -> CrossingSpec {
    let (aeb_cause, v2x_cause) = category.expected_pair();
    let id = format!(
        "pair-{}-{}-{index:04}",
        aeb_cause.as_str().to_ascii_lowercase(),
        v2x_cause.as_str().to_ascii_lowercase()
    );
    let meta = |ttc: f64, sensor: &str, a_lat: f64, safety: f64| {
        let mut m = targeted_meta(aeb_cause, "two-stage", ttc, sensor, false, a_lat);
        m.insert(
            "designed_pair".into(),
            format!("{}|{}", aeb_cause.as_str(), v2x_cause.as_str()),
        );
        m.insert("designed_safety_dist".into(), format!("{safety}"));
        m
    };
    match category {
        PairCategory::EgoAccelBoth => CrossingSpec {
            id,
            ego_speed: jitter(rng, 8.0, 0.4),
            opp_speed: jitter(rng, 7.0, 0.5),
            friction_mu: 1.0,
            ego_behavior: Behavior::Accelerate {
                accel: 2.0,
                t_start: 0.0,
            },
            meta: meta(2.0, "5R1V", 5.0, 0.5),
            ..Default::default()
        },
        PairCategory::FrictionTtc => CrossingSpec {
            id,
            ego_speed: jitter(rng, 8.0, 0.2),
            opp_speed: jitter(rng, 5.0, 0.2),
            friction_mu: 0.6,
            opp_vehicle: VehicleType::Bicycle,
            meta: meta(1.25, "5R1V", 2.5, 0.1),
            ..Default::default()
        },
        PairCategory::FrictionSteering => CrossingSpec {
            id,
            ego_speed: jitter(rng, 6.125, 0.1),
            opp_speed: jitter(rng, 5.0, 0.1),
            friction_mu: 0.7,
            opp_vehicle: VehicleType::Bicycle,
            opp_behavior: Behavior::Turn {
                yaw_rate: 0.4,
                t_start: 4.15,
            },
            meta: meta(2.0, "5R1V", 2.0, 0.1),
            ..Default::default()
        },
        PairCategory::DetectionTtc => CrossingSpec {
            id,
            ego_speed: jitter(rng, 15.0, 0.5),
            opp_speed: jitter(rng, 8.0, 0.5),
            friction_mu: 1.0,
            obstruction: Some(ObstructionSpec {
                setback_ego: 3.0,
                setback_opp: 3.0,
                size: 30.0,
            }),
            meta: meta(1.25, "1R1V", 3.0, 0.5),
            ..Default::default()
        },
    }
}

/// Deterministic corpus of pair-targeted 2-stage scenarios.
pub fn pair_targeted_corpus(
    category: PairCategory,
    n: usize,
    seed: u64,
) -> Result<Vec<Scenario>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| generate(&pair_targeted_spec(category, i, &mut rng)))
        .collect()
}

fn mixed_spec(index: usize, rng: &mut ChaCha8Rng) -> CrossingSpec {
    let ego_speed = rng.gen_range(5.0..20.0);
    let opp_speed = rng.gen_range(3.0..15.0);
    let friction_mu = *[0.3, 0.5, 0.8, 1.0]
        .get(rng.gen_range(0..4usize))
        .unwrap();
    let obstruction = if rng.gen_bool(0.25) {
        Some(ObstructionSpec {
            setback_ego: rng.gen_range(2.0..8.0),
            setback_opp: rng.gen_range(2.0..8.0),
            size: rng.gen_range(10.0..30.0),
        })
    } else {
        None
    };
    let opp_vehicle = if rng.gen_bool(0.15) {
        VehicleType::Bicycle
    } else {
        VehicleType::PassengerCar
    };
    CrossingSpec {
        id: format!("mixed-{index:04}"),
        ego_speed,
        opp_speed,
        approach_sync: rng.gen_range(-0.3..0.3),
        friction_mu,
        obstruction,
        opp_vehicle,
        ..Default::default()
    }
}

/// Generates `n` scenarios deterministically from a seed. The same
/// (n, profile, seed) triple always yields byte-identical scenarios.
pub fn generate_corpus(n: usize, profile: CorpusProfile, seed: u64) -> Result<Vec<Scenario>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let spec = match profile {
            CorpusProfile::Mixed => mixed_spec(i, &mut rng),
            CorpusProfile::CauseTargeted(cause) => targeted_spec(cause, i, &mut rng)?,
        };
        out.push(generate(&spec)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, RunOptions};
    use crate::perception::{SensorSet, SensorSetName};
    use crate::prediction::PredictionParams;

    fn unbraked_crashes(s: &Scenario) -> bool {
        let sensors = SensorSet::by_name(SensorSetName::FiveROneV);
        run(
            s,
            &[],
            &sensors,
            true,
            &PredictionParams::default(),
            &RunOptions::default(),
        )
        .unwrap()
        .crashed()
    }

    #[test]
    fn sync_zero_constant_crossing_crashes() {
        let s = generate(&CrossingSpec::default()).unwrap();
        assert!(unbraked_crashes(&s));
    }

    #[test]
    fn large_sync_avoids() {
        let spec = CrossingSpec {
            approach_sync: 2.5,
            ..Default::default()
        };
        let s = generate(&spec).unwrap();
        assert!(!unbraked_crashes(&s));
    }

    #[test]
    fn sync_collision_boundary_matches_box_sizes() {
        // Constant behaviors: centers meet iff |sync| is below roughly
        // (combined half extents) / speed. Test both sides with margin.
        for sync in [-0.3, 0.0, 0.3] {
            let spec = CrossingSpec {
                approach_sync: sync,
                ..Default::default()
            };
            assert!(unbraked_crashes(&generate(&spec).unwrap()), "sync {sync}");
        }
        for sync in [-1.5, 1.5] {
            let spec = CrossingSpec {
                approach_sync: sync,
                ..Default::default()
            };
            assert!(!unbraked_crashes(&generate(&spec).unwrap()), "sync {sync}");
        }
    }

    #[test]
    fn ego_arrival_is_at_half_duration_for_constant_speed() {
        let s = generate(&CrossingSpec::default()).unwrap();
        // Ego center crosses x = 0 at duration/2.
        let at = s.ego.sample_at(5.0).unwrap();
        assert!(at.x.abs() < 1e-6, "x = {}", at.x);
    }

    #[test]
    fn accelerating_ego_still_meets_opponent() {
        let spec = CrossingSpec {
            ego_behavior: Behavior::Accelerate {
                accel: 2.0,
                t_start: 0.0,
            },
            ..Default::default()
        };
        let s = generate(&spec).unwrap();
        assert!(unbraked_crashes(&s));
    }

    #[test]
    fn accelerating_opponent_still_meets_ego() {
        let spec = CrossingSpec {
            opp_speed: 5.0,
            opp_behavior: Behavior::Accelerate {
                accel: 2.0,
                t_start: 1.0,
            },
            ..Default::default()
        };
        let s = generate(&spec).unwrap();
        assert!(unbraked_crashes(&s));
    }

    #[test]
    fn obstruction_sits_between_the_legs() {
        let spec = CrossingSpec {
            obstruction: Some(ObstructionSpec {
                setback_ego: 3.0,
                setback_opp: 4.0,
                size: 10.0,
            }),
            ..Default::default()
        };
        let s = generate(&spec).unwrap();
        let poly = &s.obstructions[0].polygon;
        for p in poly {
            assert!(p.x <= -4.0 + 1e-9 && p.x >= -14.0 - 1e-9);
            assert!(p.y <= -3.0 + 1e-9 && p.y >= -13.0 - 1e-9);
        }
    }

    #[test]
    fn corpus_is_deterministic() {
        let a = generate_corpus(20, CorpusProfile::Mixed, 42).unwrap();
        let b = generate_corpus(20, CorpusProfile::Mixed, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_corpus(20, CorpusProfile::Mixed, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_speed_is_infeasible() {
        let spec = CrossingSpec {
            ego_speed: 0.0,
            ..Default::default()
        };
        assert!(matches!(generate(&spec), Err(Error::Infeasible(_))));
    }

    #[test]
    fn generated_scenarios_validate_and_round_trip() {
        for s in generate_corpus(5, CorpusProfile::Mixed, 7).unwrap() {
            s.validate().unwrap();
            let json = serde_json::to_string(&s).unwrap();
            let (parsed, warnings) = crate::scenario::parse_scenario(&json, true).unwrap();
            assert!(warnings.is_empty(), "{warnings:?}");
            assert_eq!(parsed.ego.samples.len(), s.ego.samples.len());
        }
    }

    #[test]
    fn targeted_corpus_carries_design_meta() {
        for cause in CrashCause::ALL_TARGETABLE {
            let corpus = generate_corpus(3, CorpusProfile::CauseTargeted(cause), 1).unwrap();
            for s in corpus {
                assert_eq!(s.meta["designed_cause"], cause.as_str());
                assert!(s.meta.contains_key("designed_brake"));
            }
        }
    }
}
