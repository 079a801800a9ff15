//! Per-tick brake trigger evaluation and the 2-stage cascade composition.

use crate::error::{Error, Result};
use crate::perception::{ChannelKind, DetectionState};
use crate::prediction::{
    predict_crash, stopping_distance, time_to_brake, time_to_evade, PredictionParams, VehicleDims,
};
use crate::scenario::TrajectorySample;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StageName {
    Aeb,
    V2xPartial,
}

impl StageName {
    pub fn as_str(&self) -> &'static str {
        match self {
            StageName::Aeb => "AEB",
            StageName::V2xPartial => "V2X_PARTIAL",
        }
    }
}

impl std::fmt::Display for StageName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters of one brake stage (defaults follow the brake parametrization
/// table: 4/9 m/s² max deceleration, 45 m/s³ jerk, 120 ms application
/// delay, 1 m/s² ego acceleration gate, 0.5 m safety distance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrakeStageConfig {
    pub name: StageName,
    pub source_channel: ChannelKind,
    pub max_decel: f64,
    pub jerk: f64,
    pub application_delay: f64,
    pub ttc_threshold: f64,
    pub ego_accel_threshold: f64,
    pub safety_dist: f64,
    pub use_tte_condition: bool,
    /// Friction coefficient assumed by the stage when estimating its
    /// stopping distance: 1.0 when the road friction is unknown, the
    /// scenario value when it is known.
    pub mu_assumed: f64,
}

impl BrakeStageConfig {
    pub fn aeb() -> Self {
        BrakeStageConfig {
            name: StageName::Aeb,
            source_channel: ChannelKind::Onboard,
            max_decel: 9.0,
            jerk: 45.0,
            application_delay: 0.12,
            ttc_threshold: 1.25,
            ego_accel_threshold: 1.0,
            safety_dist: 0.5,
            use_tte_condition: true,
            mu_assumed: 1.0,
        }
    }

    pub fn v2x_partial(ttc_threshold: f64) -> Self {
        BrakeStageConfig {
            name: StageName::V2xPartial,
            source_channel: ChannelKind::V2x,
            max_decel: 4.0,
            jerk: 45.0,
            application_delay: 0.12,
            ttc_threshold,
            ego_accel_threshold: 1.0,
            safety_dist: 0.5,
            use_tte_condition: false,
            mu_assumed: 1.0,
        }
    }
}

/// Brake function presets selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrakeType {
    Aeb,
    V2x,
    TwoStage,
}

impl BrakeType {
    pub const ALL: [BrakeType; 3] = [BrakeType::Aeb, BrakeType::V2x, BrakeType::TwoStage];

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aeb" => Ok(BrakeType::Aeb),
            "v2x" => Ok(BrakeType::V2x),
            "two-stage" | "two_stage" | "2-stage" => Ok(BrakeType::TwoStage),
            other => Err(Error::Config(format!("unknown brake type `{other}`"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BrakeType::Aeb => "aeb",
            BrakeType::V2x => "v2x",
            BrakeType::TwoStage => "two-stage",
        }
    }

    /// Ordered stage list for this brake type. The TTC threshold applies to
    /// the V2X stage; the AEB stage keeps its fixed 1.25 s threshold.
    pub fn stages(&self, v2x_ttc_threshold: f64) -> Vec<BrakeStageConfig> {
        match self {
            BrakeType::Aeb => vec![BrakeStageConfig::aeb()],
            BrakeType::V2x => vec![BrakeStageConfig::v2x_partial(v2x_ttc_threshold)],
            BrakeType::TwoStage => vec![
                BrakeStageConfig::v2x_partial(v2x_ttc_threshold),
                BrakeStageConfig::aeb(),
            ],
        }
    }
}

impl std::fmt::Display for BrakeType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-tick record of every trigger condition together with the computed
/// criticality values.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConditionLedger {
    pub detected: bool,
    pub crash_predicted: bool,
    pub below_ttc_threshold: bool,
    pub ttb_elapsed: bool,
    pub no_ego_accel: bool,
    /// Only evaluated when the stage uses the TTE condition.
    pub tte_elapsed: Option<bool>,
    pub ttc: Option<f64>,
    pub ttb: Option<f64>,
    pub tte: Option<f64>,
}

impl ConditionLedger {
    pub fn all_true(&self) -> bool {
        self.detected
            && self.crash_predicted
            && self.below_ttc_threshold
            && self.ttb_elapsed
            && self.no_ego_accel
            && self.tte_elapsed.unwrap_or(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerDecision {
    pub stage: StageName,
    pub fire: bool,
    pub t: f64,
    pub ledger: ConditionLedger,
}

/// Evaluates all trigger conditions of one stage at time `t`. The opponent
/// state used for prediction is the stage channel's last known sample.
pub fn evaluate_stage(
    cfg: &BrakeStageConfig,
    detection: &DetectionState,
    ego: &TrajectorySample,
    ego_dims: VehicleDims,
    opp_dims: VehicleDims,
    t: f64,
    params: &PredictionParams,
) -> TriggerDecision {
    let mut ledger = ConditionLedger {
        no_ego_accel: ego.accel < cfg.ego_accel_threshold,
        ..Default::default()
    };
    ledger.detected = detection.available(t);
    if ledger.detected {
        if let Some(opp) = detection.last_known {
            let pred = predict_crash(ego, ego_dims, &opp, opp_dims, cfg.safety_dist, params.horizon);
            ledger.crash_predicted = pred.predicted;
            if pred.predicted {
                ledger.ttc = Some(pred.ttc);
                ledger.below_ttc_threshold = pred.ttc <= cfg.ttc_threshold + 1e-9;
                if let Ok(profile) = stopping_distance(
                    ego.speed,
                    cfg.max_decel,
                    cfg.jerk,
                    cfg.application_delay,
                    cfg.mu_assumed,
                ) {
                    let ttb = time_to_brake(&pred, &profile, ego.speed);
                    ledger.ttb = Some(ttb);
                    ledger.ttb_elapsed = ttb <= 1e-9;
                }
                if cfg.use_tte_condition {
                    if let Ok(tte) = time_to_evade(&pred, ego_dims, opp_dims, params) {
                        ledger.tte = Some(tte);
                        ledger.tte_elapsed = Some(tte <= 1e-9);
                    }
                } else {
                    ledger.tte_elapsed = None;
                }
            }
        }
    }
    TriggerDecision {
        stage: cfg.name,
        fire: ledger.all_true(),
        t,
        ledger,
    }
}
