//! C ABI for the pre-crash simulation engine.
//!
//! Conventions: every function returns a [`PrecrashStatus`] code (0 =
//! success); scenario objects are opaque handles freed with
//! [`precrash_scenario_free`]; strings returned through out-parameters are
//! owned by the caller and must be released with [`precrash_string_free`].
//! On failure a thread-local message is available via
//! [`precrash_last_error`].

use precrash_sim::brake::BrakeType;
use precrash_sim::engine::{run, RunOptions};
use precrash_sim::error::Error;
use precrash_sim::harness::{
    render_report, run_experiment, ExperimentConfig, ReportFormat, ScenarioSource,
};
use precrash_sim::perception::{SensorSet, SensorSetName};
use precrash_sim::prediction::PredictionParams;
use precrash_sim::scenario::{parse_scenario, Scenario};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;

/// Status codes returned by every API function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecrashStatus {
    Ok = 0,
    ParseError = 1,
    ValidationError = 2,
    IoError = 3,
    ConfigError = 4,
    Infeasible = 5,
    OutOfRange = 6,
    NullArgument = 7,
    InvalidUtf8 = 8,
}

/// Opaque scenario handle.
pub struct PrecrashScenario {
    inner: Scenario,
}

/// Result of a single simulation run.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PrecrashRunResult {
    /// 1 when the run ended in a crash, 0 when avoided.
    pub crashed: i32,
    pub t_end: f64,
    pub impact_speed_ego: f64,
    pub impact_relative_speed: f64,
    /// Number of brake stages that fired.
    pub trigger_count: i32,
    /// Time of the first stage trigger; negative when nothing fired.
    pub first_trigger_t: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PrecrashStatus {
    match err {
        Error::Parse(_) => PrecrashStatus::ParseError,
        Error::Validation { .. } => PrecrashStatus::ValidationError,
        Error::Io { .. } => PrecrashStatus::IoError,
        Error::Config(_) => PrecrashStatus::ConfigError,
        Error::Infeasible(_) => PrecrashStatus::Infeasible,
        Error::TimeOutOfRange { .. } => PrecrashStatus::OutOfRange,
    }
}

fn fail(err: Error) -> PrecrashStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// # Safety
/// `ptr` must be null or a pointer previously returned by this library
/// through a string out-parameter.
#[no_mangle]
pub unsafe extern "C" fn precrash_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

/// Message of the most recent error on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn precrash_last_error() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, PrecrashStatus> {
    if ptr.is_null() {
        set_error("null argument".into());
        return Err(PrecrashStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        PrecrashStatus::InvalidUtf8
    })
}

/// Parses a scenario from JSON text.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn precrash_scenario_from_json(
    json: *const c_char,
    strict: i32,
    out: *mut *mut PrecrashScenario,
) -> PrecrashStatus {
    if out.is_null() {
        set_error("null out-parameter".into());
        return PrecrashStatus::NullArgument;
    }
    let json = match cstr_arg(json) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match parse_scenario(json, strict != 0) {
        Ok((scenario, _warnings)) => {
            *out = Box::into_raw(Box::new(PrecrashScenario { inner: scenario }));
            PrecrashStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Loads a scenario from a JSON file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn precrash_scenario_load(
    path: *const c_char,
    strict: i32,
    out: *mut *mut PrecrashScenario,
) -> PrecrashStatus {
    let path = match cstr_arg(path) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match precrash_sim::scenario::load_scenario(path, strict != 0) {
        Ok((scenario, _)) => {
            if out.is_null() {
                set_error("null out-parameter".into());
                return PrecrashStatus::NullArgument;
            }
            *out = Box::into_raw(Box::new(PrecrashScenario { inner: scenario }));
            PrecrashStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `scenario` must be null or a handle from a load/parse call, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn precrash_scenario_free(scenario: *mut PrecrashScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Scenario id as a newly allocated string (release with
/// [`precrash_string_free`]).
///
/// # Safety
/// `scenario` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn precrash_scenario_id(
    scenario: *const PrecrashScenario,
    out: *mut *mut c_char,
) -> PrecrashStatus {
    if scenario.is_null() || out.is_null() {
        set_error("null argument".into());
        return PrecrashStatus::NullArgument;
    }
    match CString::new((*scenario).inner.id.clone()) {
        Ok(c) => {
            *out = c.into_raw();
            PrecrashStatus::Ok
        }
        Err(_) => {
            set_error("scenario id contains NUL".into());
            PrecrashStatus::ParseError
        }
    }
}

fn parse_setup(
    brake: &str,
    sensor_set: &str,
) -> Result<(BrakeType, SensorSet), Error> {
    let brake = BrakeType::parse(brake)?;
    let sensors = SensorSet::by_name(SensorSetName::parse(sensor_set)?);
    Ok((brake, sensors))
}

/// Simulates one scenario with the given brake function.
///
/// # Safety
/// `scenario` must be a live handle; `brake`/`sensor_set` valid strings;
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn precrash_simulate(
    scenario: *const PrecrashScenario,
    brake: *const c_char,
    sensor_set: *const c_char,
    ttc_threshold: f64,
    friction_known: i32,
    out: *mut PrecrashRunResult,
) -> PrecrashStatus {
    if scenario.is_null() || out.is_null() {
        set_error("null argument".into());
        return PrecrashStatus::NullArgument;
    }
    let brake = match cstr_arg(brake) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let sensor_set = match cstr_arg(sensor_set) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let (brake, sensors) = match parse_setup(brake, sensor_set) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    let stages = brake.stages(ttc_threshold);
    match run(
        &(*scenario).inner,
        &stages,
        &sensors,
        friction_known != 0,
        &PredictionParams::default(),
        &RunOptions::default(),
    ) {
        Ok(outcome) => {
            *out = PrecrashRunResult {
                crashed: outcome.crashed() as i32,
                t_end: outcome.t_end,
                impact_speed_ego: outcome.impact_speed_ego,
                impact_relative_speed: outcome.impact_relative_speed,
                trigger_count: outcome.trigger_events.len() as i32,
                first_trigger_t: outcome
                    .trigger_events
                    .first()
                    .map(|(_, t)| *t)
                    .unwrap_or(-1.0),
            };
            PrecrashStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Runs a sweep over a directory of scenario files and returns the report
/// as a JSON string (release with [`precrash_string_free`]). `brakes`,
/// `sensor_sets` and `ttc_thresholds` are comma-separated lists.
///
/// # Safety
/// All string arguments must be valid NUL-terminated strings; `out_json`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn precrash_sweep(
    scenario_dir: *const c_char,
    brakes: *const c_char,
    sensor_sets: *const c_char,
    ttc_thresholds: *const c_char,
    friction_known: i32,
    classify: i32,
    jobs: i32,
    out_json: *mut *mut c_char,
) -> PrecrashStatus {
    if out_json.is_null() {
        set_error("null out-parameter".into());
        return PrecrashStatus::NullArgument;
    }
    macro_rules! arg {
        ($p:expr) => {
            match cstr_arg($p) {
                Ok(s) => s,
                Err(status) => return status,
            }
        };
    }
    let dir = arg!(scenario_dir);
    let brakes = arg!(brakes);
    let sensor_sets = arg!(sensor_sets);
    let ttc = arg!(ttc_thresholds);

    let build = || -> Result<String, Error> {
        let cfg = ExperimentConfig {
            source: ScenarioSource::Directory(PathBuf::from(dir)),
            brake_types: brakes
                .split(',')
                .map(BrakeType::parse)
                .collect::<Result<_, _>>()?,
            sensor_sets: sensor_sets
                .split(',')
                .map(SensorSetName::parse)
                .collect::<Result<_, _>>()?,
            ttc_thresholds: ttc
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("ttc `{s}`: {e}")))
                })
                .collect::<Result<_, _>>()?,
            friction_known: friction_known != 0,
            classify_crashes: classify != 0,
            jobs: jobs.max(1) as usize,
            ..Default::default()
        };
        let report = run_experiment(&cfg)?;
        render_report(&report, ReportFormat::Json)
    };
    match build() {
        Ok(json) => match CString::new(json) {
            Ok(c) => {
                *out_json = c.into_raw();
                PrecrashStatus::Ok
            }
            Err(_) => {
                set_error("report contains NUL".into());
                PrecrashStatus::ParseError
            }
        },
        Err(e) => fail(e),
    }
}
