//! Kinematic crash prediction and criticality measures.
//!
//! Both vehicles are extrapolated at constant speed and heading. The
//! opponent sweeps a tube (its width-inflated footprint along the predicted
//! path); a crash is predicted when the ego front ray enters that tube
//! within the horizon, the arrival-time intervals at the conflict region
//! overlap, and first contact is with the ego front.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::scenario::{TrajectorySample, G};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleDims {
    pub length: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CrashPrediction {
    pub predicted: bool,
    pub crash_point: Vec2,
    /// Time until the ego reference point reaches the crash point at current
    /// speed.
    pub ttc: f64,
    /// Ego arc-distance from the ego front to the near edge of the opponent
    /// tube, net of the safety distance (floored at 0).
    pub x_crash: f64,
    /// Arc-distance from the ego front to the tube entry/exit.
    pub tube_entry_point: f64,
    pub tube_exit_point: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingProfile {
    pub commanded_decel: f64,
    pub jerk: f64,
    pub application_delay: f64,
    pub effective_decel: f64,
    pub distance: f64,
    pub time_to_stop: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionParams {
    /// Extrapolation horizon for crash prediction.
    pub horizon: f64,
    /// Lateral acceleration assumed available for an evasive maneuver.
    pub a_lat_max: f64,
    /// Extra lateral clearance required for the evasion test.
    pub evade_margin: f64,
}

impl Default for PredictionParams {
    fn default() -> Self {
        PredictionParams {
            horizon: 5.0,
            a_lat_max: 5.0,
            evade_margin: 0.5,
        }
    }
}

pub fn predict_crash(
    ego: &TrajectorySample,
    ego_dims: VehicleDims,
    opp: &TrajectorySample,
    opp_dims: VehicleDims,
    safety_dist: f64,
    horizon: f64,
) -> CrashPrediction {
    let none = CrashPrediction::default();
    let v_e = ego.speed;
    let v_o = opp.speed;
    if v_e <= 1e-9 {
        return none;
    }
    let u_e = Vec2::from_heading(ego.heading);
    let u_o = Vec2::from_heading(opp.heading);
    let e = ego.position();
    let o = opp.position();

    // Centerline intersection for the crash point and TTC.
    let denom = u_e.cross(u_o);
    if denom.abs() < 1e-9 {
        return none; // parallel paths
    }
    let d = o - e;
    let s_cross = d.cross(u_o) / denom; // along ego path, from ego center
    if s_cross <= 0.0 {
        return none;
    }
    let crash_point = e + u_e.scale(s_cross);
    let ttc = s_cross / v_e;

    // Opponent tube: strip of half-width w_o/2 around the opponent
    // centerline, spanning from its rear now to its front at the horizon.
    let front = e + u_e.scale(ego_dims.length / 2.0);
    let n_o = u_o.perp();
    let rel = front - o;
    let lat0 = rel.dot(n_o);
    let lat_rate = u_e.dot(n_o);
    let lon0 = rel.dot(u_o);
    let lon_rate = u_e.dot(u_o);
    let lon_min = -opp_dims.length / 2.0;
    let lon_max = v_o * horizon + opp_dims.length / 2.0;

    let mut d_lo: f64 = 0.0;
    let mut d_hi = f64::INFINITY;
    for (p0, rate, lo, hi) in [
        (lat0, lat_rate, -opp_dims.width / 2.0, opp_dims.width / 2.0),
        (lon0, lon_rate, lon_min, lon_max),
    ] {
        if rate.abs() < 1e-12 {
            if p0 < lo || p0 > hi {
                return none;
            }
        } else {
            let (a, b) = ((lo - p0) / rate, (hi - p0) / rate);
            d_lo = d_lo.max(a.min(b));
            d_hi = d_hi.min(a.max(b));
        }
    }
    if d_hi < d_lo {
        return none;
    }
    let (d_entry, d_exit) = (d_lo, d_hi);
    if d_entry / v_e > horizon {
        return none;
    }

    // Ego occupancy of the tube (front enters, rear exits).
    let t_e1 = d_entry / v_e;
    let t_e2 = (d_exit + ego_dims.length) / v_e;

    // Opponent occupancy of the conflict region: arc range along its own
    // path where its centerline lies within the ego corridor, inflated by
    // its length.
    let n_e = u_e.perp();
    let lat_o0 = (o - e).dot(n_e);
    let lat_o_rate = u_o.dot(n_e);
    let (t_o1, t_o2) = if lat_o_rate.abs() < 1e-12 {
        if lat_o0.abs() <= ego_dims.width / 2.0 {
            (0.0, f64::INFINITY)
        } else {
            return none;
        }
    } else {
        let r_a = (-ego_dims.width / 2.0 - lat_o0) / lat_o_rate;
        let r_b = (ego_dims.width / 2.0 - lat_o0) / lat_o_rate;
        let (r1, r2) = (r_a.min(r_b), r_a.max(r_b));
        if v_o <= 1e-9 {
            // Static opponent: occupies the conflict region iff it is there now.
            if r1 - opp_dims.length / 2.0 <= 0.0 && 0.0 <= r2 + opp_dims.length / 2.0 {
                (0.0, f64::INFINITY)
            } else {
                return none;
            }
        } else {
            (
                (r1 - opp_dims.length / 2.0) / v_o,
                (r2 + opp_dims.length / 2.0) / v_o,
            )
        }
    };

    let overlap_lo = t_e1.max(t_o1).max(0.0);
    let overlap_hi = t_e2.min(t_o2).min(horizon);
    if overlap_hi < overlap_lo {
        return none;
    }
    // Front-crash requirement: at the first possible contact instant the ego
    // front must not yet have left the tube.
    if t_o1 * v_e > d_exit + 1e-9 {
        return none;
    }

    CrashPrediction {
        predicted: true,
        crash_point,
        ttc,
        x_crash: (d_entry - safety_dist).max(0.0),
        tube_entry_point: d_entry,
        tube_exit_point: d_exit,
    }
}

/// Closed-form stopping distance of the three-phase profile: constant-speed
/// application delay, jerk-limited ramp to the effective deceleration, then
/// constant deceleration to standstill.
pub fn stopping_distance(
    v0: f64,
    commanded_decel: f64,
    jerk: f64,
    application_delay: f64,
    mu_assumed: f64,
) -> Result<StoppingProfile> {
    if commanded_decel <= 0.0 || jerk <= 0.0 {
        return Err(Error::Config(
            "deceleration and jerk must be positive".into(),
        ));
    }
    if v0 < 0.0 {
        return Err(Error::Config("initial speed must be >= 0".into()));
    }
    let a_eff = commanded_decel.min(mu_assumed * G);
    let mut profile = StoppingProfile {
        commanded_decel,
        jerk,
        application_delay,
        effective_decel: a_eff,
        distance: 0.0,
        time_to_stop: 0.0,
    };
    if v0 == 0.0 {
        return Ok(profile);
    }
    let d_delay = v0 * application_delay;
    let t_ramp = a_eff / jerk;
    let v_after_ramp = v0 - a_eff * a_eff / (2.0 * jerk);
    let (dist, time) = if v_after_ramp > 0.0 {
        let d_ramp = v0 * t_ramp - jerk * t_ramp.powi(3) / 6.0;
        let d_const = v_after_ramp * v_after_ramp / (2.0 * a_eff);
        (
            d_delay + d_ramp + d_const,
            application_delay + t_ramp + v_after_ramp / a_eff,
        )
    } else {
        // Standstill is reached inside the jerk ramp.
        let t_stop = (2.0 * v0 / jerk).sqrt();
        (
            d_delay + v0 * t_stop - jerk * t_stop.powi(3) / 6.0,
            application_delay + t_stop,
        )
    };
    profile.distance = dist;
    profile.time_to_stop = time;
    Ok(profile)
}

/// Remaining time until the distance to crash equals the stopping distance,
/// assuming the ego holds its current speed until activation. TTB <= 0 means
/// "activate now"; a standing ego yields +inf (no crash reachable).
pub fn time_to_brake(pred: &CrashPrediction, profile: &StoppingProfile, ego_speed: f64) -> f64 {
    debug_assert!(pred.predicted);
    if ego_speed <= 1e-9 {
        return f64::INFINITY;
    }
    (pred.x_crash - profile.distance) / ego_speed
}

/// Remaining time during which a bounded-lateral-acceleration swerve can
/// still clear the opponent tube. TTE <= 0 means evasion is no longer
/// possible.
pub fn time_to_evade(
    pred: &CrashPrediction,
    ego_dims: VehicleDims,
    opp_dims: VehicleDims,
    params: &PredictionParams,
) -> Result<f64> {
    debug_assert!(pred.predicted);
    if params.a_lat_max <= 0.0 {
        return Err(Error::Config("a_lat_max must be positive".into()));
    }
    let y_req = (ego_dims.width + opp_dims.width) / 2.0 + params.evade_margin;
    let t_evade = (2.0 * y_req / params.a_lat_max).sqrt();
    Ok(pred.ttc - t_evade)
}

/// 1 ms numerical integration of the jerk-limited braking profile. Test
/// oracle for the closed form; kept in the library so the acceptance suite
/// can sweep it.
pub fn stopping_distance_numeric(
    v0: f64,
    commanded_decel: f64,
    jerk: f64,
    application_delay: f64,
    mu_assumed: f64,
) -> f64 {
    let a_eff = commanded_decel.min(mu_assumed * G);
    let dt = 1e-3;
    let mut t = 0.0;
    let mut v = v0;
    let mut x = 0.0;
    let accel_at = |t: f64| -> f64 {
        if t < application_delay {
            0.0
        } else {
            (jerk * (t - application_delay)).min(a_eff)
        }
    };
    while v > 0.0 && t < 120.0 {
        let a0 = accel_at(t);
        let a1 = accel_at(t + dt);
        let v_next = (v - 0.5 * (a0 + a1) * dt).max(0.0);
        x += 0.5 * (v + v_next) * dt;
        v = v_next;
        t += dt;
    }
    x
}
