//! Scenario data model and the JSON interchange format.
//!
//! A scenario holds two timestamped vehicle tracks (ego and opponent), view
//! obstruction polygons and the road friction coefficient. Tracks are
//! resampled onto the fixed 10 ms simulation grid at load time.

use crate::error::{Error, Result};
use crate::geometry::{OrientedBox, Vec2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Fixed simulation step, 10 ms.
pub const SIM_DT: f64 = 0.01;

pub const G: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleType {
    PassengerCar,
    Bicycle,
}

/// One timestamped state of a vehicle: pose plus longitudinal speed and
/// acceleration. Serialized as the array `[t, x, y, heading, speed, accel]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 6]", into = "[f64; 6]")]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    pub accel: f64,
}

impl From<[f64; 6]> for TrajectorySample {
    fn from(a: [f64; 6]) -> Self {
        TrajectorySample {
            t: a[0],
            x: a[1],
            y: a[2],
            heading: a[3],
            speed: a[4],
            accel: a[5],
        }
    }
}

impl From<TrajectorySample> for [f64; 6] {
    fn from(s: TrajectorySample) -> Self {
        [s.t, s.x, s.y, s.heading, s.speed, s.accel]
    }
}

impl TrajectorySample {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleTrack {
    pub vehicle_type: VehicleType,
    pub length: f64,
    pub width: f64,
    pub samples: Vec<TrajectorySample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Obstruction {
    pub polygon: Vec<Vec2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub friction_mu: f64,
    #[serde(default)]
    pub obstructions: Vec<Obstruction>,
    pub ego: VehicleTrack,
    pub opponent: VehicleTrack,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

/// Shortest-arc interpolation between two angles.
fn lerp_angle(a: f64, b: f64, f: f64) -> f64 {
    let mut d = (b - a) % std::f64::consts::TAU;
    if d > std::f64::consts::PI {
        d -= std::f64::consts::TAU;
    } else if d < -std::f64::consts::PI {
        d += std::f64::consts::TAU;
    }
    a + d * f
}

fn lerp(a: f64, b: f64, f: f64) -> f64 {
    a + (b - a) * f
}

impl VehicleTrack {
    pub fn t_min(&self) -> f64 {
        self.samples.first().map(|s| s.t).unwrap_or(0.0)
    }

    pub fn t_max(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }

    /// Linear interpolation between the two enclosing samples; heading uses
    /// shortest-arc interpolation.
    pub fn sample_at(&self, t: f64) -> Result<TrajectorySample> {
        let (t0, t1) = (self.t_min(), self.t_max());
        if t < t0 - 1e-9 || t > t1 + 1e-9 {
            return Err(Error::TimeOutOfRange { t, min: t0, max: t1 });
        }
        let t = t.clamp(t0, t1);
        let idx = match self
            .samples
            .binary_search_by(|s| s.t.partial_cmp(&t).unwrap())
        {
            Ok(i) => return Ok(self.samples[i]),
            Err(i) => i,
        };
        if idx == 0 {
            return Ok(self.samples[0]);
        }
        if idx >= self.samples.len() {
            return Ok(*self.samples.last().unwrap());
        }
        let a = self.samples[idx - 1];
        let b = self.samples[idx];
        let f = (t - a.t) / (b.t - a.t);
        Ok(TrajectorySample {
            t,
            x: lerp(a.x, b.x, f),
            y: lerp(a.y, b.y, f),
            heading: lerp_angle(a.heading, b.heading, f),
            speed: lerp(a.speed, b.speed, f).max(0.0),
            accel: lerp(a.accel, b.accel, f),
        })
    }

    /// Resamples onto the absolute 10 ms grid (multiples of [`SIM_DT`])
    /// covering the track's time range. Grid-aligned samples are preserved
    /// exactly, so resampling is idempotent on grid-aligned input.
    pub fn resample(&self) -> Result<VehicleTrack> {
        let t0 = self.t_min();
        let t1 = self.t_max();
        let k0 = (t0 / SIM_DT - 1e-6).ceil() as i64;
        let k1 = (t1 / SIM_DT + 1e-6).floor() as i64;
        if k1 < k0 + 1 {
            return Err(Error::validation(
                "samples",
                format!("track range [{t0}, {t1}] s spans fewer than 2 grid steps"),
            ));
        }
        let mut samples = Vec::with_capacity((k1 - k0 + 1) as usize);
        for k in k0..=k1 {
            let t = k as f64 * SIM_DT;
            let mut s = self.sample_at(t)?;
            s.t = t;
            samples.push(s);
        }
        Ok(VehicleTrack {
            samples,
            ..self.clone()
        })
    }

    pub fn arc_length(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[0].position().dist(w[1].position()))
            .sum()
    }

    fn validate(&self, field: &str, warnings: &mut Vec<String>) -> Result<()> {
        if self.length <= 0.0 {
            return Err(Error::validation(format!("{field}.length"), "must be > 0"));
        }
        if self.width <= 0.0 {
            return Err(Error::validation(format!("{field}.width"), "must be > 0"));
        }
        if self.samples.len() < 2 {
            return Err(Error::validation(
                format!("{field}.samples"),
                "need at least 2 samples",
            ));
        }
        for (i, w) in self.samples.windows(2).enumerate() {
            if w[1].t <= w[0].t {
                return Err(Error::validation(
                    format!("{field}.samples[{}].t", i + 1),
                    "timestamps must be strictly increasing",
                ));
            }
        }
        for (i, s) in self.samples.iter().enumerate() {
            if s.speed < 0.0 {
                return Err(Error::validation(
                    format!("{field}.samples[{i}].speed"),
                    "must be >= 0",
                ));
            }
            if !s.heading.is_finite() || !s.x.is_finite() || !s.y.is_finite() {
                return Err(Error::validation(
                    format!("{field}.samples[{i}]"),
                    "non-finite value",
                ));
            }
        }
        if !self.arc_length().is_finite() {
            return Err(Error::validation(
                format!("{field}.samples"),
                "non-finite arc length",
            ));
        }
        // Position increments should be consistent with the recorded speeds;
        // mismatch is a data-quality warning, not an error.
        for (i, w) in self.samples.windows(2).enumerate() {
            let dt = w[1].t - w[0].t;
            let ds = w[0].position().dist(w[1].position());
            let expected = 0.5 * (w[0].speed + w[1].speed) * dt;
            if (ds - expected).abs() > 0.5 {
                warnings.push(format!(
                    "{field}.samples[{i}]: position step {ds:.2} m inconsistent with speed ({expected:.2} m expected)"
                ));
                break;
            }
        }
        Ok(())
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if !(self.friction_mu > 0.0 && self.friction_mu <= 1.5) {
            return Err(Error::validation("friction_mu", "must be in (0, 1.5]"));
        }
        self.ego.validate("ego", &mut warnings)?;
        self.opponent.validate("opponent", &mut warnings)?;
        if self.ego.t_min() > self.opponent.t_max() || self.opponent.t_min() > self.ego.t_max() {
            return Err(Error::validation(
                "opponent.samples",
                "ego and opponent tracks share no common time interval",
            ));
        }
        for (i, ob) in self.obstructions.iter().enumerate() {
            if ob.polygon.len() < 3 {
                return Err(Error::validation(
                    format!("obstructions[{i}]"),
                    "polygon needs at least 3 vertices",
                ));
            }
            if !polygon_is_simple(&ob.polygon) {
                return Err(Error::validation(
                    format!("obstructions[{i}]"),
                    "polygon is self-intersecting",
                ));
            }
        }
        Ok(warnings)
    }

    /// Common time interval covered by both tracks.
    pub fn common_interval(&self) -> (f64, f64) {
        (
            self.ego.t_min().max(self.opponent.t_min()),
            self.ego.t_max().min(self.opponent.t_max()),
        )
    }
}

fn polygon_is_simple(poly: &[Vec2]) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a1, a2) = (poly[i], poly[(i + 1) % n]);
        for j in i + 1..n {
            // Skip adjacent edges (they share a vertex by construction).
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (b1, b2) = (poly[j], poly[(j + 1) % n]);
            if crate::geometry::segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

/// Vehicle footprint at time `t`, centered at the track's reference point
/// (the geometric center).
pub fn footprint(track: &VehicleTrack, t: f64) -> Result<OrientedBox> {
    let s = track.sample_at(t)?;
    Ok(OrientedBox::new(
        s.position(),
        s.heading,
        track.length,
        track.width,
    ))
}

const TOP_LEVEL_KEYS: &[&str] = &["id", "friction_mu", "obstructions", "ego", "opponent", "meta"];
const TRACK_KEYS: &[&str] = &["vehicle_type", "length", "width", "samples"];

fn check_unknown_keys(
    value: &serde_json::Value,
    allowed: &[&str],
    ctx: &str,
    strict: bool,
    warnings: &mut Vec<String>,
) -> Result<()> {
    if let Some(map) = value.as_object() {
        for key in map.keys() {
            if !allowed.contains(&key.as_str()) {
                if strict {
                    return Err(Error::Parse(format!("unknown key `{ctx}{key}`")));
                }
                warnings.push(format!("ignoring unknown key `{ctx}{key}`"));
            }
        }
    }
    Ok(())
}

/// Parses a scenario from its JSON text, validates it and resamples both
/// tracks onto the 10 ms grid. In strict mode unknown keys are rejected;
/// lenient mode collects warnings instead.
pub fn parse_scenario(json: &str, strict: bool) -> Result<(Scenario, Vec<String>)> {
    let value: serde_json::Value =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    let mut warnings = Vec::new();
    check_unknown_keys(&value, TOP_LEVEL_KEYS, "", strict, &mut warnings)?;
    for field in ["ego", "opponent"] {
        if let Some(track) = value.get(field) {
            check_unknown_keys(track, TRACK_KEYS, &format!("{field}."), strict, &mut warnings)?;
        }
    }
    let mut scenario: Scenario =
        serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    warnings.extend(scenario.validate()?);
    scenario.ego = scenario.ego.resample()?;
    scenario.opponent = scenario.opponent.resample()?;
    Ok((scenario, warnings))
}

pub fn load_scenario(path: impl AsRef<Path>, strict: bool) -> Result<(Scenario, Vec<String>)> {
    let path = path.as_ref();
    let json = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_scenario(&json, strict)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let json = serde_json::to_string_pretty(scenario)
        .map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, json).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}
