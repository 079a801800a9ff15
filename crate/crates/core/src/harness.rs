//! Batch experiment runner: expands the (brake × sensor set × TTC
//! threshold) sweep matrix over a scenario corpus, runs every cell in
//! parallel with a deterministic merge and aggregates paper-style tables.

use crate::brake::{BrakeStageConfig, BrakeType, StageName};
use crate::cause::{classify, CrashCause};
use crate::engine::{run, RunOptions};
use crate::error::{Error, Result};
use crate::generator::{generate_corpus, CorpusProfile};
use crate::perception::{SensorSet, SensorSetName};
use crate::prediction::PredictionParams;
use crate::scenario::{load_scenario, Scenario};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const CAUSE_COLUMNS: [CrashCause; 8] = [
    CrashCause::Detection,
    CrashCause::Tte,
    CrashCause::Ttc,
    CrashCause::EgoAcceleration,
    CrashCause::Friction,
    CrashCause::Steering,
    CrashCause::OpponentAcceleration,
    CrashCause::NotClassified,
];

#[derive(Debug, Clone)]
pub enum ScenarioSource {
    Directory(PathBuf),
    Generated {
        n: usize,
        profile: CorpusProfile,
        seed: u64,
    },
    Inline(Vec<Scenario>),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: ScenarioSource,
    pub brake_types: Vec<BrakeType>,
    pub sensor_sets: Vec<SensorSetName>,
    pub ttc_thresholds: Vec<f64>,
    pub friction_known: bool,
    /// Parameter overrides by name (jerk, application_delay, safety_dist,
    /// ego_accel_threshold, horizon, a_lat_max, evade_margin).
    pub overrides: BTreeMap<String, f64>,
    /// Classify crashed runs (adds counterfactual analysis cost).
    pub classify_crashes: bool,
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            source: ScenarioSource::Inline(Vec::new()),
            brake_types: vec![BrakeType::Aeb, BrakeType::V2x, BrakeType::TwoStage],
            sensor_sets: vec![SensorSetName::FiveROneV],
            ttc_thresholds: vec![2.0],
            friction_known: false,
            overrides: BTreeMap::new(),
            classify_crashes: true,
            jobs: 1,
        }
    }
}

/// One sweep cell. The threshold is stored in milliseconds so the key is
/// exactly orderable and hashable.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct CellKey {
    pub brake: BrakeType,
    pub sensor_set: SensorSetName,
    pub ttc_ms: u32,
}

impl CellKey {
    pub fn ttc_threshold(&self) -> f64 {
        self.ttc_ms as f64 / 1000.0
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CellAggregate {
    pub n: usize,
    pub avoided_count: usize,
    pub crash_count: usize,
    /// Cell-level cause histogram: resolved label of the final cascade
    /// stage (the AEB stage for the 2-stage brake).
    pub causes: BTreeMap<String, usize>,
    /// Per-stage histograms keyed by stage name.
    pub stage_causes: BTreeMap<String, BTreeMap<String, usize>>,
    /// 2-stage (AEB cause, V2X cause) pair histogram, keyed "AEB|V2X".
    pub paired_causes: BTreeMap<String, usize>,
    /// Scenario ids of avoided runs (sorted), for avoided-set comparisons.
    pub avoided_ids: Vec<String>,
}

impl CellAggregate {
    pub fn avoided_pct(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.avoided_count as f64 / self.n as f64 * 100.0
        }
    }

    /// Monoid merge; the identity is `CellAggregate::default()`.
    pub fn merge(&mut self, other: &CellAggregate) {
        self.n += other.n;
        self.avoided_count += other.avoided_count;
        self.crash_count += other.crash_count;
        for (k, v) in &other.causes {
            *self.causes.entry(k.clone()).or_default() += v;
        }
        for (stage, hist) in &other.stage_causes {
            let mine = self.stage_causes.entry(stage.clone()).or_default();
            for (k, v) in hist {
                *mine.entry(k.clone()).or_default() += v;
            }
        }
        for (k, v) in &other.paired_causes {
            *self.paired_causes.entry(k.clone()).or_default() += v;
        }
        self.avoided_ids.extend(other.avoided_ids.iter().cloned());
        self.avoided_ids.sort();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub brake: BrakeType,
    pub sensor_set: SensorSetName,
    pub ttc_threshold: f64,
    #[serde(flatten)]
    pub aggregate: CellAggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub corpus_size: usize,
    pub skipped: Vec<String>,
    pub cells: Vec<CellReport>,
}

impl AggregateReport {
    pub fn cell(&self, brake: BrakeType, sensor_set: SensorSetName, ttc: f64) -> Option<&CellReport> {
        self.cells.iter().find(|c| {
            c.brake == brake && c.sensor_set == sensor_set && (c.ttc_threshold - ttc).abs() < 1e-9
        })
    }
}

/// Expands the sweep matrix. `v2x` and `two-stage` multiply over the TTC
/// thresholds; `aeb` has a fixed 1.25 s threshold and contributes one cell
/// per sensor set.
pub fn expand_cells(cfg: &ExperimentConfig) -> Vec<CellKey> {
    let mut cells = Vec::new();
    for &brake in &cfg.brake_types {
        for &sensor_set in &cfg.sensor_sets {
            match brake {
                BrakeType::Aeb => cells.push(CellKey {
                    brake,
                    sensor_set,
                    ttc_ms: 1250,
                }),
                BrakeType::V2x | BrakeType::TwoStage => {
                    for &ttc in &cfg.ttc_thresholds {
                        cells.push(CellKey {
                            brake,
                            sensor_set,
                            ttc_ms: (ttc * 1000.0).round() as u32,
                        });
                    }
                }
            }
        }
    }
    cells.sort();
    cells.dedup();
    cells
}

fn apply_overrides(
    overrides: &BTreeMap<String, f64>,
    params: &mut PredictionParams,
    stages: &mut [BrakeStageConfig],
) -> Result<()> {
    for (key, &value) in overrides {
        match key.as_str() {
            "horizon" => params.horizon = value,
            "a_lat_max" => params.a_lat_max = value,
            "evade_margin" => params.evade_margin = value,
            "jerk" => stages.iter_mut().for_each(|s| s.jerk = value),
            "application_delay" => stages.iter_mut().for_each(|s| s.application_delay = value),
            "safety_dist" => stages.iter_mut().for_each(|s| s.safety_dist = value),
            "ego_accel_threshold" => stages
                .iter_mut()
                .for_each(|s| s.ego_accel_threshold = value),
            other => return Err(Error::Config(format!("unknown override `{other}`"))),
        }
    }
    Ok(())
}

struct RunRecord {
    cell: CellKey,
    scenario_id: String,
    avoided: bool,
    cell_cause: Option<CrashCause>,
    stage_causes: Vec<(StageName, CrashCause)>,
    pair: Option<(CrashCause, CrashCause)>,
}

fn run_one(
    scenario: &Scenario,
    cell: &CellKey,
    cfg: &ExperimentConfig,
) -> Result<RunRecord> {
    let mut params = PredictionParams::default();
    let mut stages = cell.brake.stages(cell.ttc_threshold());
    apply_overrides(&cfg.overrides, &mut params, &mut stages)?;
    let sensors = SensorSet::by_name(cell.sensor_set);
    let outcome = run(
        scenario,
        &stages,
        &sensors,
        cfg.friction_known,
        &params,
        &RunOptions::default(),
    )?;
    let mut record = RunRecord {
        cell: *cell,
        scenario_id: scenario.id.clone(),
        avoided: !outcome.crashed(),
        cell_cause: None,
        stage_causes: Vec::new(),
        pair: None,
    };
    if outcome.crashed() && cfg.classify_crashes {
        let report = classify(
            &outcome,
            scenario,
            &stages,
            &sensors,
            cfg.friction_known,
            &params,
        )?;
        record.stage_causes = report
            .stages
            .iter()
            .map(|s| (s.stage, s.resolved_label))
            .collect();
        // Cell-level label: the final cascade stage's resolved cause.
        record.cell_cause = report.stages.last().map(|s| s.resolved_label);
        record.pair = report.resolved_pair;
    } else if outcome.crashed() {
        record.cell_cause = Some(CrashCause::NotClassified);
    }
    Ok(record)
}

pub fn resolve_scenarios(source: &ScenarioSource) -> Result<(Vec<Scenario>, Vec<String>)> {
    match source {
        ScenarioSource::Inline(v) => Ok((v.clone(), Vec::new())),
        ScenarioSource::Generated { n, profile, seed } => {
            Ok((generate_corpus(*n, *profile, *seed)?, Vec::new()))
        }
        ScenarioSource::Directory(dir) => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(|e| Error::Io {
                    path: dir.display().to_string(),
                    source: e,
                })?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(Error::Config(format!(
                    "no scenario files in {}",
                    dir.display()
                )));
            }
            let mut scenarios = Vec::new();
            let mut skipped = Vec::new();
            for p in paths {
                match load_scenario(&p, true) {
                    Ok((s, _)) => scenarios.push(s),
                    Err(e) => skipped.push(format!("{}: {e}", p.display())),
                }
            }
            Ok((scenarios, skipped))
        }
    }
}

/// Runs the full sweep. Deterministic: for a fixed config the report is
/// bit-identical regardless of `jobs`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AggregateReport> {
    let cells = expand_cells(cfg);
    if cells.is_empty() {
        return Err(Error::Config(
            "experiment expands to zero sweep cells".into(),
        ));
    }
    let (scenarios, skipped) = resolve_scenarios(&cfg.source)?;
    if scenarios.is_empty() {
        return Err(Error::Config("empty scenario corpus".into()));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    // Index-ordered collection: rayon preserves input order, so the merge
    // below is independent of scheduling.
    let per_scenario: Vec<Result<Vec<RunRecord>>> = pool.install(|| {
        scenarios
            .par_iter()
            .map(|scenario| {
                cells
                    .iter()
                    .map(|cell| run_one(scenario, cell, cfg))
                    .collect()
            })
            .collect()
    });

    let mut table: BTreeMap<CellKey, CellAggregate> = BTreeMap::new();
    for records in per_scenario {
        for r in records? {
            let agg = table.entry(r.cell).or_default();
            agg.n += 1;
            if r.avoided {
                agg.avoided_count += 1;
                agg.avoided_ids.push(r.scenario_id.clone());
            } else {
                agg.crash_count += 1;
                if let Some(c) = r.cell_cause {
                    *agg.causes.entry(c.as_str().into()).or_default() += 1;
                }
                for (stage, c) in &r.stage_causes {
                    *agg
                        .stage_causes
                        .entry(stage.as_str().into())
                        .or_default()
                        .entry(c.as_str().into())
                        .or_default() += 1;
                }
                if let Some((a, v)) = r.pair {
                    let key = format!("{}|{}", a.as_str(), v.as_str());
                    *agg.paired_causes.entry(key).or_default() += 1;
                }
            }
        }
    }
    for agg in table.values_mut() {
        agg.avoided_ids.sort();
    }

    Ok(AggregateReport {
        corpus_size: scenarios.len(),
        skipped,
        cells: table
            .into_iter()
            .map(|(k, aggregate)| CellReport {
                brake: k.brake,
                sensor_set: k.sensor_set,
                ttc_threshold: k.ttc_threshold(),
                aggregate,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

pub fn render_report(report: &AggregateReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(report).map_err(|e| Error::Parse(e.to_string()))
        }
        ReportFormat::Csv => Ok(render_csv(report)),
        ReportFormat::Markdown => Ok(render_markdown(report)),
    }
}

pub fn emit_report(
    report: &AggregateReport,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    let text = render_report(report, format)?;
    std::fs::write(path.as_ref(), text).map_err(|e| Error::Io {
        path: path.as_ref().display().to_string(),
        source: e,
    })
}

fn render_csv(report: &AggregateReport) -> String {
    let mut out = String::from("brake,sensor_set,ttc_threshold,n,avoided_pct");
    for c in CAUSE_COLUMNS {
        out.push(',');
        out.push_str(c.as_str());
    }
    out.push('\n');
    for cell in &report.cells {
        out.push_str(&format!(
            "{},{},{:.2},{},{:.1}",
            cell.brake,
            cell.sensor_set,
            cell.ttc_threshold,
            cell.aggregate.n,
            cell.aggregate.avoided_pct()
        ));
        for c in CAUSE_COLUMNS {
            let count = cell.aggregate.causes.get(c.as_str()).copied().unwrap_or(0);
            out.push_str(&format!(",{count}"));
        }
        out.push('\n');
    }
    out
}

/// Table-style grid: one row per sensor set, one column per (brake,
/// threshold) combination, cells showing the avoidance percentage.
fn render_markdown(report: &AggregateReport) -> String {
    let mut columns: Vec<(BrakeType, u32)> = report
        .cells
        .iter()
        .map(|c| (c.brake, (c.ttc_threshold * 1000.0).round() as u32))
        .collect();
    columns.sort_by_key(|(b, ttc)| (*b, std::cmp::Reverse(*ttc)));
    columns.dedup();
    let mut rows: Vec<SensorSetName> = report.cells.iter().map(|c| c.sensor_set).collect();
    rows.sort();
    rows.dedup();

    let header: Vec<String> = std::iter::once("Sensor set".to_string())
        .chain(columns.iter().map(|(b, ttc)| match b {
            BrakeType::Aeb => "AEB".to_string(),
            BrakeType::V2x => format!("V2X @{:.2} s", *ttc as f64 / 1000.0),
            BrakeType::TwoStage => format!("2-stage @{:.2} s", *ttc as f64 / 1000.0),
        }))
        .collect();
    let mut out = format!("| {} |\n", header.join(" | "));
    out.push_str(&format!("|{}\n", " --- |".repeat(header.len())));
    for row in rows {
        let mut line = vec![row.as_str().to_string()];
        for (brake, ttc) in &columns {
            let cell = report.cell(*brake, row, *ttc as f64 / 1000.0);
            line.push(
                cell.map(|c| format!("{:.1}%", c.aggregate.avoided_pct()))
                    .unwrap_or_else(|| "-".into()),
            );
        }
        out.push_str(&format!("| {} |\n", line.join(" | ")));
    }
    out
}
