//! Counterfactual pre-crash simulation of automatic braking functions.
//!
//! The library replays two-vehicle crossing scenarios on a fixed 10 ms
//! grid, evaluates per tick whether an onboard-sensor AEB, a V2X-triggered
//! partial brake or their 2-stage cascade would trigger, applies the
//! resulting braking to the ego vehicle, detects collisions and classifies
//! unavoided crashes into a crash-cause taxonomy. A batch harness sweeps
//! brake types, sensor sets and TTC thresholds over scenario corpora.

pub mod brake;
pub mod cause;
pub mod engine;
pub mod error;
pub mod generator;
pub mod geometry;
pub mod harness;
pub mod perception;
pub mod prediction;
pub mod scenario;

pub use error::{Error, Result};
pub use scenario::{Scenario, SIM_DT};
