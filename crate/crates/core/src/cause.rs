//! Crash-cause classification for unavoided crashes.
//!
//! Trigger-related causes (Detection, TTE, TTC, ego acceleration) are
//! measured against the theoretical last-possible brake activation time t*:
//! a condition whose satisfaction time lies beyond t* delayed the brake past
//! the point of no return, and among those only the one with the highest
//! temporal distance to t* is reported. Friction, steering and opponent
//! acceleration are evaluated as separate flags.

use crate::brake::{evaluate_stage, BrakeStageConfig, StageName};
use crate::engine::{run, RunOptions, SimulationOutcome};
use crate::error::{Error, Result};
use crate::perception::{
    in_field_of_view, recognition_point_of_sample, DetectionState, SensorSet,
};
use crate::prediction::{PredictionParams, VehicleDims};
use crate::scenario::{Scenario, SIM_DT};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrashCause {
    Detection,
    Tte,
    Ttc,
    EgoAcceleration,
    Friction,
    Steering,
    OpponentAcceleration,
    NotClassified,
}

impl CrashCause {
    pub const ALL_TARGETABLE: [CrashCause; 7] = [
        CrashCause::Detection,
        CrashCause::Tte,
        CrashCause::Ttc,
        CrashCause::EgoAcceleration,
        CrashCause::Friction,
        CrashCause::Steering,
        CrashCause::OpponentAcceleration,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CrashCause::Detection => "Detection",
            CrashCause::Tte => "TTE",
            CrashCause::Ttc => "TTC",
            CrashCause::EgoAcceleration => "EgoAcceleration",
            CrashCause::Friction => "Friction",
            CrashCause::Steering => "Steering",
            CrashCause::OpponentAcceleration => "OpponentAcceleration",
            CrashCause::NotClassified => "NotClassified",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "detection" => Ok(CrashCause::Detection),
            "tte" => Ok(CrashCause::Tte),
            "ttc" => Ok(CrashCause::Ttc),
            "egoacceleration" | "ego_acceleration" | "ego-acceleration" => {
                Ok(CrashCause::EgoAcceleration)
            }
            "friction" => Ok(CrashCause::Friction),
            "steering" => Ok(CrashCause::Steering),
            "opponentacceleration" | "opponent_acceleration" | "opponent-acceleration" => {
                Ok(CrashCause::OpponentAcceleration)
            }
            "notclassified" | "not_classified" => Ok(CrashCause::NotClassified),
            other => Err(Error::Config(format!("unknown crash cause `{other}`"))),
        }
    }
}

impl std::fmt::Display for CrashCause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageCauseReport {
    pub stage: StageName,
    pub primary_trigger_cause: Option<CrashCause>,
    pub friction_flag: bool,
    pub steering_flag: bool,
    pub opp_accel_flag: bool,
    pub resolved_label: CrashCause,
    /// Theoretical last avoid time for this stage under the true friction;
    /// None when the crash is unavoidable even with immediate braking.
    pub t_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrashCauseReport {
    pub stages: Vec<StageCauseReport>,
    /// (AEB cause, V2X cause) when both stages are configured.
    pub resolved_pair: Option<(CrashCause, CrashCause)>,
}

/// Latest activation time at which a counterfactual run with the stage
/// force-triggered (ignoring all trigger conditions) still avoids the crash.
/// `world_mu` is the friction the counterfactual world applies: the true
/// scenario value for trigger-cause analysis, the assumed value for the
/// friction test. Returns None when no activation time avoids the crash.
pub fn theoretical_ttb_time(
    scenario: &Scenario,
    stage_cfg: &BrakeStageConfig,
    world_mu: f64,
    sensors: &SensorSet,
    params: &PredictionParams,
) -> Result<Option<f64>> {
    let mut world = scenario.clone();
    world.friction_mu = world_mu;
    let unbraked = run(&world, &[], sensors, true, params, &RunOptions::default())?;
    if !unbraked.crashed() {
        return Ok(Some(unbraked.t_end));
    }
    let (t0, _) = world.common_interval();
    let t0 = (t0 / SIM_DT).round() * SIM_DT;
    let crash_tick = ((unbraked.t_end - t0) / SIM_DT).round() as i64;
    let avoided_with_trigger_at = |k: i64| -> Result<bool> {
        let t_force = t0 + k as f64 * SIM_DT;
        let options = RunOptions {
            forced_trigger: Some((0, t_force)),
            conditions_disabled: true,
            record_trace: false,
        };
        let outcome = run(&world, &[*stage_cfg], sensors, true, params, &options)?;
        Ok(!outcome.crashed())
    };
    // Backward scan for the latest avoiding trigger time. A plain bisection
    // is not safe here (with turning opponents the avoid/crash boundary need
    // not be monotone), so scan on a coarse grid first and refine the step
    // above the latest coarse hit tick by tick.
    const COARSE: i64 = 25;
    let mut coarse_hit: Option<i64> = None;
    let mut k = crash_tick;
    while k >= 0 {
        if avoided_with_trigger_at(k)? {
            coarse_hit = Some(k);
            break;
        }
        k -= COARSE;
    }
    let Some(base) = coarse_hit else {
        if k != 0 && avoided_with_trigger_at(0)? {
            return Ok(Some(t0));
        }
        return Ok(None);
    };
    let mut latest = base;
    for k in base + 1..(base + COARSE).min(crash_tick + 1) {
        if avoided_with_trigger_at(k)? {
            latest = k;
        } else {
            break;
        }
    }
    Ok(Some(t0 + latest as f64 * SIM_DT))
}

/// Satisfaction times of the trigger-related conditions of one stage,
/// measured on the recorded (unbraked) ground truth with the same per-tick
/// evaluation the engine uses. Detection is the first availability of the
/// stage's real sensor chain; the remaining entries come from a
/// perfect-information replay (no occlusion, no delay) so that a late
/// detection does not also inflate them, and are the final rising edge
/// before the crash, i.e. the moment after which the condition held
/// continuously.
struct ConditionTimes {
    detection: f64,
    ttc_window_open: f64,
    tte: Option<f64>,
    ego_accel_clear: f64,
    /// Final rising edge of the crash prediction itself. When the TTC
    /// window opens on this very edge the threshold comparison was not the
    /// binding part — the prediction was.
    crash_predicted: f64,
}

fn condition_times(
    scenario: &Scenario,
    cfg: &BrakeStageConfig,
    sensors: &SensorSet,
    params: &PredictionParams,
    t_crash: f64,
) -> Result<ConditionTimes> {
    let channel = sensors
        .channel(cfg.source_channel)
        .ok_or_else(|| Error::Config("stage channel not present in sensor set".into()))?;
    let (t0, _) = scenario.common_interval();
    let t0 = (t0 / SIM_DT).round() * SIM_DT;
    let ticks = ((t_crash - t0) / SIM_DT).round() as usize;
    let ego_dims = VehicleDims {
        length: scenario.ego.length,
        width: scenario.ego.width,
    };
    let opp_dims = VehicleDims {
        length: scenario.opponent.length,
        width: scenario.opponent.width,
    };

    let mut det_state = DetectionState::default();
    let mut perfect_state = DetectionState::default();
    let mut detection = f64::INFINITY;
    let mut ttc_window_open = f64::INFINITY;
    let mut tte_elapsed = f64::INFINITY;
    let mut ego_accel_clear = f64::INFINITY;
    let mut crash_predicted = f64::INFINITY;
    for k in 0..=ticks {
        let t = t0 + k as f64 * SIM_DT;
        let ego = scenario.ego.sample_at(t.min(scenario.ego.t_max()))?;
        let opp = scenario.opponent.sample_at(t.min(scenario.opponent.t_max()))?;
        let point = recognition_point_of_sample(
            &opp,
            scenario.opponent.length,
            scenario.opponent.vehicle_type,
            channel,
        );
        let visible = in_field_of_view(
            channel,
            &ego,
            scenario.ego.length,
            point,
            &scenario.obstructions,
        );
        det_state.update(visible, t, &opp, channel.detection_delay)?;
        if detection.is_infinite() && det_state.available(t) {
            detection = t;
        }
        perfect_state.update(true, t, &opp, 0.0)?;
        let decision = evaluate_stage(cfg, &perfect_state, &ego, ego_dims, opp_dims, t, params);
        let ledger = decision.ledger;
        if ledger.crash_predicted {
            if crash_predicted.is_infinite() {
                crash_predicted = t;
            }
        } else {
            crash_predicted = f64::INFINITY;
        }
        if ledger.crash_predicted && ledger.below_ttc_threshold {
            if ttc_window_open.is_infinite() {
                ttc_window_open = t;
            }
        } else {
            ttc_window_open = f64::INFINITY;
        }
        if ledger.tte_elapsed == Some(true) {
            if tte_elapsed.is_infinite() {
                tte_elapsed = t;
            }
        } else {
            tte_elapsed = f64::INFINITY;
        }
        if ledger.no_ego_accel {
            if ego_accel_clear.is_infinite() {
                ego_accel_clear = t;
            }
        } else {
            ego_accel_clear = f64::INFINITY;
        }
    }

    let tte = if cfg.use_tte_condition {
        Some(tte_elapsed)
    } else {
        None
    };

    Ok(ConditionTimes {
        detection,
        ttc_window_open,
        tte,
        ego_accel_clear,
        crash_predicted,
    })
}

/// Classifies one stage of a crashed run.
pub fn classify_stage(
    outcome: &SimulationOutcome,
    scenario: &Scenario,
    cfg: &BrakeStageConfig,
    sensors: &SensorSet,
    friction_known: bool,
    params: &PredictionParams,
) -> Result<StageCauseReport> {
    let mu = scenario.friction_mu;
    let mu_assumed = if friction_known { mu } else { 1.0 };
    let mut cfg = *cfg;
    cfg.mu_assumed = mu_assumed;

    let unbraked = run(scenario, &[], sensors, true, params, &RunOptions::default())?;
    let t_crash = if unbraked.crashed() {
        unbraked.t_end
    } else {
        outcome.t_end
    };

    let t_star = theoretical_ttb_time(scenario, &cfg, mu, sensors, params)?;
    let times = condition_times(scenario, &cfg, sensors, params, t_crash)?;

    let half_tick = SIM_DT / 2.0;
    let mut primary: Option<(CrashCause, f64)> = None;
    if let Some(t_star) = t_star {
        let mut candidates: Vec<(CrashCause, f64)> = vec![
            (CrashCause::Detection, times.detection),
            (CrashCause::Ttc, times.ttc_window_open),
            (CrashCause::EgoAcceleration, times.ego_accel_clear),
        ];
        if let Some(tte) = times.tte {
            candidates.insert(1, (CrashCause::Tte, tte));
        }
        for (cause, sat) in candidates {
            let distance = sat - t_star;
            if distance > half_tick {
                let better = primary.map(|(_, d)| distance > d).unwrap_or(true);
                if better {
                    primary = Some((cause, distance));
                }
            }
        }
    }
    let mut primary_trigger_cause = primary.map(|(c, _)| c);
    // A TTC window that opens on the rising edge of the crash prediction
    // itself was not held back by the threshold comparison but by the
    // prediction: a maneuvering opponent defeats the constant-velocity
    // model. Attribute such cases to the maneuver.
    if primary_trigger_cause == Some(CrashCause::Ttc)
        && (times.ttc_window_open - times.crash_predicted).abs() <= half_tick
    {
        let opp_turned = opponent_heading_change_exceeds(scenario, t_crash, 10f64.to_radians())?;
        let opp_accelerated =
            opponent_accel_while_detected(scenario, &cfg, sensors, t_crash, cfg.ego_accel_threshold)?;
        if opp_accelerated {
            primary_trigger_cause = Some(CrashCause::OpponentAcceleration);
        } else if opp_turned {
            primary_trigger_cause = Some(CrashCause::Steering);
        }
    }

    // Friction: the stage fired on its believed (dry-road) schedule — no
    // trigger condition was late — yet the road could not deliver the
    // commanded deceleration.
    let fired = outcome
        .trigger_events
        .iter()
        .any(|(name, _)| *name == cfg.name);
    let friction_flag = fired
        && !friction_known
        && mu * crate::scenario::G < cfg.max_decel - 1e-9
        && primary_trigger_cause.is_none();

    // Steering: significant heading change of either vehicle within the
    // allowed brake activation window.
    let window_start = (t_crash - cfg.ttc_threshold).max(scenario.common_interval().0);
    let steering_flag = heading_change_exceeds(scenario, window_start, t_crash, 10f64.to_radians())?;

    // Opponent acceleration while its state is known to the stage channel.
    let opp_accel_flag = opponent_accel_while_detected(
        scenario,
        &cfg,
        sensors,
        t_crash,
        cfg.ego_accel_threshold,
    )?;

    let resolved_label = primary_trigger_cause.unwrap_or(if friction_flag {
        CrashCause::Friction
    } else if steering_flag {
        CrashCause::Steering
    } else if opp_accel_flag {
        CrashCause::OpponentAcceleration
    } else {
        CrashCause::NotClassified
    });

    Ok(StageCauseReport {
        stage: cfg.name,
        primary_trigger_cause,
        friction_flag,
        steering_flag,
        opp_accel_flag,
        resolved_label,
        t_star,
    })
}

/// Heading change of the opponent over its whole recorded history up to the
/// crash (the flag window is deliberately not applied here: a maneuver that
/// defeats the prediction may predate the activation window).
fn opponent_heading_change_exceeds(
    scenario: &Scenario,
    t_crash: f64,
    threshold: f64,
) -> Result<bool> {
    let track = &scenario.opponent;
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut t = track.t_min();
    let end = t_crash.min(track.t_max());
    while t <= end + 1e-9 {
        let h = track.sample_at(t)?.heading;
        if let Some(p) = prev {
            let mut d = (h - p) % std::f64::consts::TAU;
            if d > std::f64::consts::PI {
                d -= std::f64::consts::TAU;
            } else if d < -std::f64::consts::PI {
                d += std::f64::consts::TAU;
            }
            total += d;
        }
        prev = Some(h);
        t += SIM_DT;
    }
    Ok(total.abs() > threshold)
}

fn heading_change_exceeds(
    scenario: &Scenario,
    t_from: f64,
    t_to: f64,
    threshold: f64,
) -> Result<bool> {
    for track in [&scenario.ego, &scenario.opponent] {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut unwrapped = 0.0;
        let mut prev: Option<f64> = None;
        let mut t = t_from.max(track.t_min());
        let end = t_to.min(track.t_max());
        while t <= end + 1e-9 {
            let h = track.sample_at(t)?.heading;
            if let Some(p) = prev {
                let mut d = (h - p) % std::f64::consts::TAU;
                if d > std::f64::consts::PI {
                    d -= std::f64::consts::TAU;
                } else if d < -std::f64::consts::PI {
                    d += std::f64::consts::TAU;
                }
                unwrapped += d;
            }
            prev = Some(h);
            lo = lo.min(unwrapped);
            hi = hi.max(unwrapped);
            t += SIM_DT;
        }
        if hi - lo > threshold {
            return Ok(true);
        }
    }
    Ok(false)
}

fn opponent_accel_while_detected(
    scenario: &Scenario,
    cfg: &BrakeStageConfig,
    sensors: &SensorSet,
    t_crash: f64,
    threshold: f64,
) -> Result<bool> {
    let channel = sensors
        .channel(cfg.source_channel)
        .ok_or_else(|| Error::Config("stage channel not present in sensor set".into()))?;
    let (t0, _) = scenario.common_interval();
    let t0 = (t0 / SIM_DT).round() * SIM_DT;
    let ticks = ((t_crash - t0) / SIM_DT).round() as usize;
    let mut det_state = DetectionState::default();
    for k in 0..=ticks {
        let t = t0 + k as f64 * SIM_DT;
        let ego = scenario.ego.sample_at(t.min(scenario.ego.t_max()))?;
        let opp = scenario.opponent.sample_at(t.min(scenario.opponent.t_max()))?;
        let point = recognition_point_of_sample(
            &opp,
            scenario.opponent.length,
            scenario.opponent.vehicle_type,
            channel,
        );
        let visible = in_field_of_view(
            channel,
            &ego,
            scenario.ego.length,
            point,
            &scenario.obstructions,
        );
        det_state.update(visible, t, &opp, channel.detection_delay)?;
        if det_state.available(t) && opp.accel.abs() > threshold {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Classifies every configured stage of a crashed run. For the 2-stage
/// cascade the resolved pair is ordered (AEB cause, V2X cause).
pub fn classify(
    outcome: &SimulationOutcome,
    scenario: &Scenario,
    stages: &[BrakeStageConfig],
    sensors: &SensorSet,
    friction_known: bool,
    params: &PredictionParams,
) -> Result<CrashCauseReport> {
    if !outcome.crashed() {
        return Err(Error::Config(
            "classification requires a crashed outcome".into(),
        ));
    }
    let mut stage_reports = Vec::with_capacity(stages.len());
    for cfg in stages {
        stage_reports.push(classify_stage(
            outcome,
            scenario,
            cfg,
            sensors,
            friction_known,
            params,
        )?);
    }
    let aeb = stage_reports
        .iter()
        .find(|r| r.stage == StageName::Aeb)
        .map(|r| r.resolved_label);
    let v2x = stage_reports
        .iter()
        .find(|r| r.stage == StageName::V2xPartial)
        .map(|r| r.resolved_label);
    let resolved_pair = match (aeb, v2x) {
        (Some(a), Some(v)) => Some((a, v)),
        _ => None,
    };
    Ok(CrashCauseReport {
        stages: stage_reports,
        resolved_pair,
    })
}
