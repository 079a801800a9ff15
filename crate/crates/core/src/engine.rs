//! Closed-loop fixed-step simulation: replays both tracks, evaluates the
//! brake cascade every 10 ms, applies commanded braking to the ego's
//! longitudinal speed along its recorded path and detects collisions.

use crate::brake::{evaluate_stage, BrakeStageConfig, ConditionLedger, StageName};
use crate::error::Result;
use crate::geometry::{obb_overlap, OrientedBox, Vec2};
use crate::perception::{recognition_point_of_sample, ChannelKind, DetectionState, SensorSet};
use crate::prediction::{PredictionParams, VehicleDims};
use crate::scenario::{Scenario, TrajectorySample, VehicleTrack, G, SIM_DT};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunResult {
    Avoided,
    Crash,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub t: f64,
    pub ego_x: f64,
    pub ego_y: f64,
    pub ego_heading: f64,
    pub ego_v: f64,
    pub ego_decel: f64,
    pub opp_x: f64,
    pub opp_y: f64,
    pub det_onboard: bool,
    pub det_v2x: bool,
    /// One entry per configured stage: (fired so far, this tick's ledger).
    pub stages: Vec<(bool, ConditionLedger)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub result: RunResult,
    pub t_end: f64,
    pub impact_speed_ego: f64,
    pub impact_relative_speed: f64,
    pub trigger_events: Vec<(StageName, f64)>,
    pub trace: Vec<TickRecord>,
}

impl SimulationOutcome {
    pub fn crashed(&self) -> bool {
        self.result == RunResult::Crash
    }
}

/// Longitudinal actuation state of the ego vehicle after the first trigger.
/// The deceleration ramps at the configured jerk toward the commanded value,
/// capped by the road friction limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoActuationState {
    pub arc_pos: f64,
    pub speed: f64,
    pub current_decel: f64,
}

impl EgoActuationState {
    /// Advances one step of `dt`, ramping toward `demand` (already the
    /// commanded deceleration; the friction cap is applied here). Exact
    /// piecewise integration: the ramp corner and the standstill point are
    /// handled inside the tick. Returns the distance traveled.
    pub fn step(&mut self, dt: f64, demand: f64, mu_actual: f64, jerk: f64) -> f64 {
        let target = demand.min(mu_actual * G);
        let mut tau_left = dt;
        let mut dist = 0.0;
        let mut stopped = false;
        // Ramp phase (deceleration never decreases while latched).
        if self.current_decel < target - 1e-12 {
            let tau_corner = ((target - self.current_decel) / jerk).min(tau_left);
            let (d, s) = self.integrate_ramp(tau_corner, jerk);
            dist += d;
            stopped = s;
            tau_left -= tau_corner;
        }
        if !stopped && tau_left > 0.0 {
            let a = self.current_decel;
            if a <= 1e-12 {
                dist += self.speed * tau_left;
            } else {
                let t_stop = self.speed / a;
                let tau = t_stop.min(tau_left);
                dist += self.speed * tau - 0.5 * a * tau * tau;
                self.speed = (self.speed - a * tau).max(0.0);
            }
        }
        self.arc_pos += dist;
        dist
    }

    /// Integrates over `tau` seconds of linearly increasing deceleration.
    /// Returns (distance, reached standstill).
    fn integrate_ramp(&mut self, tau: f64, jerk: f64) -> (f64, bool) {
        let a0 = self.current_decel;
        // Check for standstill inside the ramp: v(tau') = v - a0 tau' - j tau'^2/2.
        let v = self.speed;
        let disc = a0 * a0 + 2.0 * jerk * v;
        let t_stop = (-a0 + disc.sqrt()) / jerk;
        let tau_eff = tau.min(t_stop);
        let dist = v * tau_eff - 0.5 * a0 * tau_eff * tau_eff - jerk * tau_eff.powi(3) / 6.0;
        self.speed = (v - a0 * tau_eff - 0.5 * jerk * tau_eff * tau_eff).max(0.0);
        self.current_decel = a0 + jerk * tau_eff;
        if t_stop <= tau {
            self.speed = 0.0;
            (dist, true)
        } else {
            (dist, false)
        }
    }
}

/// Arc-length parameterization of the recorded ego path. Beyond the recorded
/// end the path is extrapolated along the last heading.
struct ArcPath {
    pts: Vec<Vec2>,
    cum: Vec<f64>,
    headings: Vec<f64>,
}

impl ArcPath {
    fn new(track: &VehicleTrack) -> Self {
        let pts: Vec<Vec2> = track.samples.iter().map(|s| s.position()).collect();
        let mut cum = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in pts.windows(2) {
            acc += w[0].dist(w[1]);
            cum.push(acc);
        }
        let headings = track.samples.iter().map(|s| s.heading).collect();
        ArcPath { pts, cum, headings }
    }

    fn arc_at_index(&self, i: usize) -> f64 {
        self.cum[i]
    }

    fn pose_at(&self, s: f64) -> (Vec2, f64) {
        let n = self.pts.len();
        let total = self.cum[n - 1];
        if s >= total {
            let heading = *self.headings.last().unwrap();
            let last = self.pts[n - 1];
            return (last + Vec2::from_heading(heading).scale(s - total), heading);
        }
        let i = match self.cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let seg_len = self.cum[i + 1] - self.cum[i];
        if seg_len < 1e-9 {
            return (self.pts[i], self.headings[i]);
        }
        let f = (s - self.cum[i]) / seg_len;
        let d = self.pts[i + 1] - self.pts[i];
        let heading = d.y.atan2(d.x);
        (self.pts[i] + d.scale(f), heading)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub record_trace: bool,
    /// Forces the given stage (by index) to latch at the given time,
    /// bypassing all trigger conditions. Used for counterfactual
    /// "brake here" analysis.
    pub forced_trigger: Option<(usize, f64)>,
    /// When set, trigger conditions are never evaluated (pure replay of the
    /// recorded tracks aside from a forced trigger).
    pub conditions_disabled: bool,
}

struct StageRun {
    cfg: BrakeStageConfig,
    fired_at: Option<f64>,
}

/// Runs one scenario against a brake cascade. `stages` may be empty (pure
/// replay). Deterministic: identical inputs produce identical traces.
pub fn run(
    scenario: &Scenario,
    stages: &[BrakeStageConfig],
    sensors: &SensorSet,
    friction_known: bool,
    params: &PredictionParams,
    options: &RunOptions,
) -> Result<SimulationOutcome> {
    let ego_track = &scenario.ego;
    let opp_track = &scenario.opponent;
    let ego_dims = VehicleDims {
        length: ego_track.length,
        width: ego_track.width,
    };
    let opp_dims = VehicleDims {
        length: opp_track.length,
        width: opp_track.width,
    };
    let mu = scenario.friction_mu;

    let mut stage_runs: Vec<StageRun> = stages
        .iter()
        .map(|cfg| {
            let mut cfg = *cfg;
            cfg.mu_assumed = if friction_known { mu } else { 1.0 };
            StageRun { cfg, fired_at: None }
        })
        .collect();

    let (t0, _) = scenario.common_interval();
    let t0 = (t0 / SIM_DT).round() * SIM_DT;
    let opp_end = opp_track.t_max();
    let ego_end = ego_track.t_max();

    let path = ArcPath::new(ego_track);
    let ego_start_idx = ((t0 - ego_track.t_min()) / SIM_DT).round() as usize;

    let mut detections = vec![DetectionState::default(); 2]; // onboard, v2x
    let mut actuation: Option<EgoActuationState> = None;
    let mut ego_now = ego_track.sample_at(t0)?;
    let mut trace = Vec::new();
    let mut trigger_events: Vec<(StageName, f64)> = Vec::new();

    let mut tick: usize = 0;
    let max_ticks = ((opp_end - t0) / SIM_DT).round() as usize + 1;
    let mut outcome_result = RunResult::Avoided;
    let mut t_end = t0;
    let mut impact_speed_ego = 0.0;
    let mut impact_relative_speed = 0.0;

    while tick <= max_ticks {
        let t = t0 + tick as f64 * SIM_DT;
        if t > opp_end + 1e-9 {
            break;
        }
        // Untriggered replay ends with the ego recording.
        if actuation.is_none() && t > ego_end + 1e-9 {
            break;
        }
        let opp_now = opp_track.sample_at(t)?;

        // 1. Detection update per channel. Skipped for pure counterfactual
        // replays where no trigger condition (and no trace) consumes it.
        let need_detection = !options.conditions_disabled || options.record_trace;
        let channels = if need_detection {
            [
                (ChannelKind::Onboard, Some(sensors.onboard)),
                (ChannelKind::V2x, sensors.v2x),
            ]
        } else {
            [(ChannelKind::Onboard, None), (ChannelKind::V2x, None)]
        };
        for (i, (_, channel)) in channels.iter().enumerate() {
            if let Some(ch) = channel {
                let point = recognition_point_of_sample(
                    &opp_now,
                    opp_track.length,
                    opp_track.vehicle_type,
                    ch,
                );
                let visible = crate::perception::in_field_of_view(
                    ch,
                    &ego_now,
                    ego_track.length,
                    point,
                    &scenario.obstructions,
                );
                detections[i].update(visible, t, &opp_now, ch.detection_delay)?;
            }
        }

        // 2. Trigger evaluation (latched stages stay latched).
        let mut ledgers = Vec::with_capacity(stage_runs.len());
        for (idx, sr) in stage_runs.iter_mut().enumerate() {
            let det = match sr.cfg.source_channel {
                ChannelKind::Onboard => &detections[0],
                ChannelKind::V2x => &detections[1],
            };
            let decision = if options.conditions_disabled {
                None
            } else {
                Some(evaluate_stage(
                    &sr.cfg, det, &ego_now, ego_dims, opp_dims, t, params,
                ))
            };
            let forced_now = options
                .forced_trigger
                .map(|(i, tf)| i == idx && t >= tf - 1e-9)
                .unwrap_or(false);
            if sr.fired_at.is_none()
                && (forced_now || decision.as_ref().map(|d| d.fire).unwrap_or(false))
            {
                sr.fired_at = Some(t);
                trigger_events.push((sr.cfg.name, t));
            }
            ledgers.push((
                sr.fired_at.is_some(),
                decision.map(|d| d.ledger).unwrap_or_default(),
            ));
        }

        // Switch from replay to actuated motion at the first trigger.
        if actuation.is_none() && stage_runs.iter().any(|s| s.fired_at.is_some()) {
            let idx = (ego_start_idx + tick).min(path.pts.len() - 1);
            actuation = Some(EgoActuationState {
                arc_pos: path.arc_at_index(idx),
                speed: ego_now.speed,
                current_decel: 0.0,
            });
        }

        if options.record_trace {
            trace.push(TickRecord {
                t,
                ego_x: ego_now.x,
                ego_y: ego_now.y,
                ego_heading: ego_now.heading,
                ego_v: ego_now.speed,
                ego_decel: actuation.map(|a| a.current_decel).unwrap_or(0.0),
                opp_x: opp_now.x,
                opp_y: opp_now.y,
                det_onboard: detections[0].available(t),
                det_v2x: detections[1].available(t),
                stages: ledgers,
            });
        }

        // 3. Collision test on current footprints.
        let ego_box = OrientedBox::new(ego_now.position(), ego_now.heading, ego_track.length, ego_track.width);
        let opp_box = OrientedBox::new(opp_now.position(), opp_now.heading, opp_track.length, opp_track.width);
        t_end = t;
        if detect_collision(&ego_box, &opp_box) {
            outcome_result = RunResult::Crash;
            impact_speed_ego = ego_now.speed;
            let rel = Vec2::from_heading(ego_now.heading).scale(ego_now.speed)
                - Vec2::from_heading(opp_now.heading).scale(opp_now.speed);
            impact_relative_speed = rel.norm();
            break;
        }

        // 4. Advance the ego to t + dt.
        let t_next = t + SIM_DT;
        match &mut actuation {
            None => {
                if t_next <= ego_end + 1e-9 {
                    ego_now = ego_track.sample_at(t_next)?;
                }
            }
            Some(act) => {
                // Commanded deceleration: maximum over stages whose
                // application delay has elapsed.
                let demand = stage_runs
                    .iter()
                    .filter_map(|sr| {
                        sr.fired_at
                            .filter(|tf| t >= tf + sr.cfg.application_delay - 1e-9)
                            .map(|_| sr.cfg.max_decel)
                    })
                    .fold(0.0, f64::max);
                let jerk = stage_runs
                    .iter()
                    .map(|sr| sr.cfg.jerk)
                    .fold(f64::INFINITY, f64::min)
                    .min(45.0);
                act.step(SIM_DT, demand, mu, jerk);
                let (pos, heading) = path.pose_at(act.arc_pos);
                ego_now = TrajectorySample {
                    t: t_next,
                    x: pos.x,
                    y: pos.y,
                    heading,
                    speed: act.speed,
                    accel: -act.current_decel,
                };
            }
        }
        tick += 1;
    }

    Ok(SimulationOutcome {
        result: outcome_result,
        t_end,
        impact_speed_ego,
        impact_relative_speed,
        trigger_events,
        trace,
    })
}

pub fn detect_collision(ego_box: &OrientedBox, opp_box: &OrientedBox) -> bool {
    obb_overlap(ego_box, opp_box)
}

/// Writes a per-run trace as CSV with a fixed column order.
pub fn write_trace_csv<W: std::io::Write>(trace: &[TickRecord], mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "t,ego_x,ego_y,ego_v,ego_a,opp_x,opp_y,det_onboard,det_v2x,stage_flags"
    )?;
    for r in trace {
        let flags: String = r
            .stages
            .iter()
            .map(|(fired, _)| if *fired { '1' } else { '0' })
            .collect();
        writeln!(
            w,
            "{:.3},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{}",
            r.t,
            r.ego_x,
            r.ego_y,
            r.ego_v,
            -r.ego_decel,
            r.opp_x,
            r.opp_y,
            r.det_onboard as u8,
            r.det_v2x as u8,
            flags
        )?;
    }
    Ok(())
}
