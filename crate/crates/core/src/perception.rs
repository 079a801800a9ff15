//! Sensor models: the onboard sensor cone and the V2X "sensor" (360°,
//! range-limited, occlusion-immune), detection delays and the per-tick
//! detection state of the opponent.

use crate::error::{Error, Result};
use crate::geometry::{segment_intersects_polygon, Vec2};
use crate::scenario::{Obstruction, TrajectorySample, VehicleTrack, VehicleType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Onboard,
    V2x,
}

/// Sensor mount position along the ego centerline, measured from the front.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mount {
    FromFrontMeters(f64),
    FromFrontFraction(f64),
}

impl Mount {
    fn offset_from_front(&self, vehicle_length: f64) -> f64 {
        match *self {
            Mount::FromFrontMeters(m) => m,
            Mount::FromFrontFraction(f) => f * vehicle_length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorChannelConfig {
    pub kind: ChannelKind,
    pub half_angle: f64,
    pub range: f64,
    pub mount: Mount,
    /// Fraction of the opponent length, measured from its front, at which
    /// the opponent is recognized.
    pub recognition_point_fraction: f64,
    pub detection_delay: f64,
    pub occludable: bool,
}

impl SensorChannelConfig {
    /// V2X channel: 360° field of view, 56 m antenna-to-antenna range,
    /// immune to view obstructions. The ego antenna mirrors the opponent's
    /// mount point at 3/4 of the vehicle length from the front.
    pub fn v2x() -> Self {
        SensorChannelConfig {
            kind: ChannelKind::V2x,
            half_angle: std::f64::consts::PI,
            range: 56.0,
            mount: Mount::FromFrontFraction(0.75),
            recognition_point_fraction: 0.75,
            detection_delay: 0.3,
            occludable: false,
        }
    }

    fn onboard(full_angle_deg: f64, mount_from_front: f64) -> Self {
        SensorChannelConfig {
            kind: ChannelKind::Onboard,
            half_angle: (full_angle_deg / 2.0).to_radians(),
            range: 120.0,
            mount: Mount::FromFrontMeters(mount_from_front),
            recognition_point_fraction: 0.5,
            detection_delay: 0.2,
            occludable: true,
        }
    }
}

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    serde::Serialize,
    serde::Deserialize,
)]
pub enum SensorSetName {
    /// Single video sensor, 100° / 120 m.
    #[serde(rename = "1V")]
    OneV,
    /// One radar + one video merged cone, 120° / 120 m.
    #[serde(rename = "1R1V")]
    OneROneV,
    /// Five radars + one video merged cone, 240° / 120 m.
    #[serde(rename = "5R1V")]
    FiveROneV,
}

impl SensorSetName {
    pub const ALL: [SensorSetName; 3] = [
        SensorSetName::OneV,
        SensorSetName::OneROneV,
        SensorSetName::FiveROneV,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1v" => Ok(SensorSetName::OneV),
            "1r1v" => Ok(SensorSetName::OneROneV),
            "5r1v" => Ok(SensorSetName::FiveROneV),
            other => Err(Error::Config(format!("unknown sensor set `{other}`"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SensorSetName::OneV => "1V",
            SensorSetName::OneROneV => "1R1V",
            SensorSetName::FiveROneV => "5R1V",
        }
    }
}

impl std::fmt::Display for SensorSetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Onboard sensor set (merged into one effective cone) plus the V2X channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSet {
    pub name: SensorSetName,
    pub onboard: SensorChannelConfig,
    pub v2x: Option<SensorChannelConfig>,
}

impl SensorSet {
    pub fn by_name(name: SensorSetName) -> Self {
        let onboard = match name {
            SensorSetName::OneV => SensorChannelConfig::onboard(100.0, 1.40),
            SensorSetName::OneROneV => SensorChannelConfig::onboard(120.0, 0.25),
            SensorSetName::FiveROneV => SensorChannelConfig::onboard(240.0, 0.25),
        };
        SensorSet {
            name,
            onboard,
            v2x: Some(SensorChannelConfig::v2x()),
        }
    }

    pub fn channel(&self, kind: ChannelKind) -> Option<&SensorChannelConfig> {
        match kind {
            ChannelKind::Onboard => Some(&self.onboard),
            ChannelKind::V2x => self.v2x.as_ref(),
        }
    }
}

/// Point at which a sensor channel recognizes the opponent: on its
/// centerline, `fraction` of the vehicle length behind the front. Bicycle
/// antennas sit at 1/2 of the bicycle length regardless of the configured
/// V2X fraction.
pub fn recognition_point(
    opponent: &VehicleTrack,
    t: f64,
    channel: &SensorChannelConfig,
) -> Result<Vec2> {
    let s = opponent.sample_at(t)?;
    Ok(recognition_point_of_sample(
        &s,
        opponent.length,
        opponent.vehicle_type,
        channel,
    ))
}

pub fn recognition_point_of_sample(
    opp: &TrajectorySample,
    opp_length: f64,
    opp_type: VehicleType,
    channel: &SensorChannelConfig,
) -> Vec2 {
    let fraction = if opp_type == VehicleType::Bicycle && channel.kind == ChannelKind::V2x {
        0.5
    } else {
        channel.recognition_point_fraction
    };
    let u = Vec2::from_heading(opp.heading);
    opp.position() + u.scale(opp_length / 2.0 - fraction * opp_length)
}

pub fn mount_point(channel: &SensorChannelConfig, ego: &TrajectorySample, ego_length: f64) -> Vec2 {
    let u = Vec2::from_heading(ego.heading);
    ego.position() + u.scale(ego_length / 2.0 - channel.mount.offset_from_front(ego_length))
}

/// Range, opening-angle and (for occludable channels) line-of-sight test of
/// a single point against one sensor channel.
pub fn in_field_of_view(
    channel: &SensorChannelConfig,
    ego: &TrajectorySample,
    ego_length: f64,
    opp_point: Vec2,
    obstructions: &[Obstruction],
) -> bool {
    let mount = mount_point(channel, ego, ego_length);
    let rel = opp_point - mount;
    let dist = rel.norm();
    if dist > channel.range {
        return false;
    }
    if channel.half_angle < std::f64::consts::PI - 1e-12 && dist > 1e-9 {
        let u = Vec2::from_heading(ego.heading);
        let cos_bearing = rel.dot(u) / dist;
        if cos_bearing < channel.half_angle.cos() - 1e-12 {
            return false;
        }
    }
    if channel.occludable {
        for ob in obstructions {
            if segment_intersects_polygon(mount, opp_point, &ob.polygon) {
                return false;
            }
        }
    }
    true
}

/// Per-channel knowledge of the opponent. A visibility gap resets the delay
/// clock; the last known state is retained after visibility is lost but no
/// longer counts as available for triggering.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DetectionState {
    pub first_in_fov_t: Option<f64>,
    pub available_from_t: Option<f64>,
    pub last_known: Option<TrajectorySample>,
    pub currently_visible: bool,
    last_update_t: Option<f64>,
}

impl DetectionState {
    pub fn update(
        &mut self,
        visible_now: bool,
        t: f64,
        opp_sample: &TrajectorySample,
        delay: f64,
    ) -> Result<()> {
        if let Some(last) = self.last_update_t {
            if t <= last {
                return Err(Error::Config(format!(
                    "detection updates must be monotone in t ({t} after {last})"
                )));
            }
        }
        self.last_update_t = Some(t);
        if visible_now {
            let first = *self.first_in_fov_t.get_or_insert(t);
            let available_from = first + delay;
            self.available_from_t = Some(available_from);
            self.currently_visible = true;
            if t >= available_from - 1e-9 {
                self.last_known = Some(*opp_sample);
            }
        } else {
            self.currently_visible = false;
            self.first_in_fov_t = None;
            self.available_from_t = None;
        }
        Ok(())
    }

    /// Whether the channel's information may be used for triggering at `t`.
    pub fn available(&self, t: f64) -> bool {
        self.currently_visible
            && self
                .available_from_t
                .map(|a| t >= a - 1e-9)
                .unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(x: f64, y: f64, heading: f64) -> TrajectorySample {
        TrajectorySample {
            t: 0.0,
            x,
            y,
            heading,
            speed: 10.0,
            accel: 0.0,
        }
    }

    fn square_obstruction(cx: f64, cy: f64, half: f64) -> Obstruction {
        Obstruction {
            polygon: vec![
                Vec2::new(cx - half, cy - half),
                Vec2::new(cx + half, cy - half),
                Vec2::new(cx + half, cy + half),
                Vec2::new(cx - half, cy + half),
            ],
        }
    }

    #[test]
    fn recognition_point_fractions() {
        let opp = sample(0.0, 0.0, 0.0);
        let mut ch = SensorChannelConfig::v2x();
        ch.recognition_point_fraction = 0.5;
        let p = recognition_point_of_sample(&opp, 4.0, VehicleType::PassengerCar, &ch);
        assert!(p.dist(Vec2::ZERO) < 1e-12); // geometric center

        ch.recognition_point_fraction = 0.75;
        let p = recognition_point_of_sample(&opp, 4.0, VehicleType::PassengerCar, &ch);
        // 1 m ahead of the rear end.
        assert!((p.x - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn bicycle_antenna_at_half_length() {
        let opp = sample(0.0, 0.0, 0.0);
        let ch = SensorChannelConfig::v2x(); // configured fraction 3/4
        let p = recognition_point_of_sample(&opp, 1.8, VehicleType::Bicycle, &ch);
        assert!(p.dist(Vec2::ZERO) < 1e-12);
        // Onboard channels keep their configured fraction for bicycles.
        let onboard = SensorSet::by_name(SensorSetName::OneROneV).onboard;
        let p = recognition_point_of_sample(&opp, 1.8, VehicleType::Bicycle, &onboard);
        assert!(p.dist(Vec2::ZERO) < 1e-12); // 1/2 configured anyway
    }

    #[test]
    fn v2x_sees_through_obstruction_within_range() {
        let ego = sample(0.0, 0.0, 0.0);
        let v2x = SensorChannelConfig::v2x();
        // Ego antenna at 3/4 of 4 m from the front: x = 2 - 3 = -1.
        let target = Vec2::new(54.0, 0.0); // 55 m from the antenna
        let obstruction = square_obstruction(25.0, 0.0, 2.0);
        assert!(in_field_of_view(&v2x, &ego, 4.0, target, &[obstruction.clone()]));
        // The onboard cone is blocked by the same obstruction.
        let onboard = SensorSet::by_name(SensorSetName::OneROneV).onboard;
        assert!(!in_field_of_view(&onboard, &ego, 4.0, target, &[obstruction]));
    }

    #[test]
    fn onboard_out_of_range() {
        let ego = sample(0.0, 0.0, 0.0);
        let onboard = SensorSet::by_name(SensorSetName::OneROneV).onboard;
        assert!(!in_field_of_view(&onboard, &ego, 4.0, Vec2::new(130.0, 0.0), &[]));
        assert!(in_field_of_view(&onboard, &ego, 4.0, Vec2::new(100.0, 0.0), &[]));
    }

    #[test]
    fn v2x_range_boundary() {
        let ego = sample(0.0, 0.0, 0.0);
        let v2x = SensorChannelConfig::v2x();
        // Antenna at (-1, 0); 56 m range.
        assert!(in_field_of_view(&v2x, &ego, 4.0, Vec2::new(55.0, 0.0), &[]));
        assert!(!in_field_of_view(&v2x, &ego, 4.0, Vec2::new(55.1, 0.0), &[]));
    }

    #[test]
    fn cone_angle_limits() {
        let ego = sample(0.0, 0.0, 0.0);
        let onboard = SensorSet::by_name(SensorSetName::OneV).onboard; // 100° -> ±50°
        let mount = mount_point(&onboard, &ego, 4.0);
        let at_angle = |deg: f64| {
            let rad = deg.to_radians();
            mount + Vec2::from_heading(rad).scale(50.0)
        };
        assert!(in_field_of_view(&onboard, &ego, 4.0, at_angle(49.0), &[]));
        assert!(!in_field_of_view(&onboard, &ego, 4.0, at_angle(51.0), &[]));
        // Directly behind is visible only for the 360° channel.
        assert!(!in_field_of_view(&onboard, &ego, 4.0, at_angle(180.0), &[]));
        let v2x = SensorChannelConfig::v2x();
        assert!(in_field_of_view(&v2x, &ego, 4.0, at_angle(180.0), &[]));
    }

    #[test]
    fn detection_delay_sets_availability() {
        let mut st = DetectionState::default();
        let opp = sample(0.0, 0.0, 0.0);
        let mut t = 2.0;
        while t < 2.5 {
            st.update(true, t, &opp, 0.3).unwrap();
            t += 0.01;
        }
        assert_eq!(st.first_in_fov_t, Some(2.0));
        assert!((st.available_from_t.unwrap() - 2.3).abs() < 1e-12);
        assert!(st.available(2.3));
        assert!(st.last_known.is_some());
    }

    #[test]
    fn never_visible_all_unset() {
        let mut st = DetectionState::default();
        let opp = sample(0.0, 0.0, 0.0);
        st.update(false, 0.0, &opp, 0.3).unwrap();
        assert!(st.first_in_fov_t.is_none());
        assert!(st.last_known.is_none());
        assert!(!st.available(10.0));
    }

    #[test]
    fn visibility_gap_resets_delay_clock() {
        let mut st = DetectionState::default();
        let opp = sample(0.0, 0.0, 0.0);
        // Visible 2.0-2.1 s (too short for the 0.3 s delay), gap, visible
        // again from 2.5 s.
        let mut t = 2.0;
        while t <= 2.1 + 1e-9 {
            st.update(true, t, &opp, 0.3).unwrap();
            t += 0.01;
        }
        st.update(false, 2.2, &opp, 0.3).unwrap();
        assert!(st.first_in_fov_t.is_none());
        let mut t = 2.5;
        while t <= 3.0 {
            st.update(true, t, &opp, 0.3).unwrap();
            t += 0.01;
        }
        assert!((st.available_from_t.unwrap() - 2.8).abs() < 1e-12);
        assert!(!st.available(2.7));
        assert!(st.available(2.8));
    }

    #[test]
    fn non_monotone_update_rejected() {
        let mut st = DetectionState::default();
        let opp = sample(0.0, 0.0, 0.0);
        st.update(true, 1.0, &opp, 0.3).unwrap();
        assert!(st.update(true, 0.5, &opp, 0.3).is_err());
    }

    proptest! {
        #[test]
        fn v2x_ignores_obstructions(
            ox in -60.0..60.0f64,
            oy in -60.0..60.0f64,
            half in 0.5..10.0f64,
            px in -60.0..60.0f64,
            py in -60.0..60.0f64,
        ) {
            let ego = sample(0.0, 0.0, 0.0);
            let v2x = SensorChannelConfig::v2x();
            let p = Vec2::new(px, py);
            let with = in_field_of_view(&v2x, &ego, 4.0, p, &[square_obstruction(ox, oy, half)]);
            let without = in_field_of_view(&v2x, &ego, 4.0, p, &[]);
            prop_assert_eq!(with, without);
        }

        #[test]
        fn onboard_detection_monotone_in_aperture(
            angle in 10.0..170.0f64,
            extra in 1.0..180.0f64,
            range in 20.0..100.0f64,
            extra_range in 1.0..50.0f64,
            px in -120.0..120.0f64,
            py in -120.0..120.0f64,
            ox in -30.0..30.0f64,
            oy in -30.0..30.0f64,
        ) {
            let ego = sample(0.0, 0.0, 0.0);
            let mut small = SensorSet::by_name(SensorSetName::OneROneV).onboard;
            small.half_angle = (angle / 2.0).to_radians();
            small.range = range;
            let mut large = small;
            large.half_angle = ((angle + extra).min(360.0) / 2.0).to_radians();
            large.range = range + extra_range;
            let obstructions = [square_obstruction(ox, oy, 2.0)];
            let p = Vec2::new(px, py);
            let seen_small = in_field_of_view(&small, &ego, 4.0, p, &obstructions);
            let seen_large = in_field_of_view(&large, &ego, 4.0, p, &obstructions);
            prop_assert!(!seen_small || seen_large);
        }

        #[test]
        fn availability_offset_equals_delay(delay in 0.0..1.0f64, t0 in 0.0..5.0f64) {
            let mut st = DetectionState::default();
            let opp = sample(0.0, 0.0, 0.0);
            let mut t = t0;
            for _ in 0..200 {
                st.update(true, t, &opp, delay).unwrap();
                t += 0.01;
            }
            let first = st.first_in_fov_t.unwrap();
            let avail = st.available_from_t.unwrap();
            prop_assert!((avail - first - delay).abs() < 1e-12);
        }
    }
}
