//! Command-line interface: corpus generation, single-scenario simulation,
//! experiment sweeps, crash-cause classification and scenario validation.

use clap::{Args, Parser, Subcommand};
use precrash_sim::brake::BrakeType;
use precrash_sim::cause::classify;
use precrash_sim::engine::{run, write_trace_csv, RunOptions};
use precrash_sim::generator::{generate_corpus, CorpusProfile};
use precrash_sim::harness::{
    emit_report, run_experiment, ExperimentConfig, ReportFormat, ScenarioSource,
};
use precrash_sim::perception::{SensorSet, SensorSetName};
use precrash_sim::prediction::PredictionParams;
use precrash_sim::scenario::{load_scenario, save_scenario};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "precrash",
    version,
    about = "Counterfactual pre-crash simulation of automatic braking functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario corpus into a directory.
    Generate {
        #[arg(long)]
        n: usize,
        /// `mixed` or `cause:<name>` (e.g. cause:friction).
        #[arg(long, default_value = "mixed")]
        profile: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a single scenario with one brake function.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        setup: RunSetup,
        /// Write a per-tick trace CSV to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Accept unknown keys in the scenario file (with warnings).
        #[arg(long)]
        lenient: bool,
    },
    /// Run a full experiment sweep over a corpus.
    Sweep {
        /// Directory of scenario JSON files.
        #[arg(long)]
        scenarios: Option<PathBuf>,
        /// Generate a corpus of this size instead of reading a directory.
        #[arg(long)]
        generate: Option<usize>,
        #[arg(long, default_value = "mixed")]
        profile: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated brake types (aeb, v2x, two-stage).
        #[arg(long, default_value = "aeb,v2x,two-stage")]
        brakes: String,
        /// Comma-separated sensor sets (1V, 1R1V, 5R1V).
        #[arg(long = "sensor-sets", default_value = "5R1V")]
        sensor_sets: String,
        /// Comma-separated V2X TTC thresholds in seconds.
        #[arg(long = "ttc", default_value = "2.0")]
        ttc_thresholds: String,
        #[arg(long = "friction-known")]
        friction_known: bool,
        /// Skip crash-cause classification (faster).
        #[arg(long = "no-classify")]
        no_classify: bool,
        /// Parameter override `name=value`; repeatable.
        #[arg(long = "override")]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "json")]
        format: String,
        /// Experiment config JSON (defaults to $PRECRASH_CONFIG); explicit
        /// flags override config values.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Re-run scenarios and classify every crash.
    Classify {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        scenarios: Option<PathBuf>,
        #[command(flatten)]
        setup: RunSetup,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate scenario files.
    Validate {
        files: Vec<PathBuf>,
        #[arg(long)]
        lenient: bool,
    },
}

#[derive(Args)]
struct RunSetup {
    #[arg(long, default_value = "two-stage")]
    brake: String,
    #[arg(long = "sensor-set", default_value = "5R1V")]
    sensor_set: String,
    #[arg(long = "ttc", default_value_t = 2.0)]
    ttc_threshold: f64,
    #[arg(long = "friction-known")]
    friction_known: bool,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Usage errors exit 2; --help/--version exit 0.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> precrash_sim::Result<()> {
    match cli.command {
        Command::Generate {
            n,
            profile,
            seed,
            out,
        } => {
            let profile = CorpusProfile::parse(&profile)?;
            std::fs::create_dir_all(&out).map_err(|e| precrash_sim::Error::Io {
                path: out.display().to_string(),
                source: e,
            })?;
            let corpus = generate_corpus(n, profile, seed)?;
            for s in &corpus {
                save_scenario(s, out.join(format!("{}.json", s.id)))?;
            }
            println!("wrote {} scenarios to {}", corpus.len(), out.display());
            Ok(())
        }
        Command::Simulate {
            scenario,
            setup,
            trace,
            lenient,
        } => {
            let (scenario, warnings) = load_scenario(&scenario, !lenient)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            let brake = BrakeType::parse(&setup.brake)?;
            let sensors = SensorSet::by_name(SensorSetName::parse(&setup.sensor_set)?);
            let stages = brake.stages(setup.ttc_threshold);
            let options = RunOptions {
                record_trace: trace.is_some(),
                ..Default::default()
            };
            let outcome = run(
                &scenario,
                &stages,
                &sensors,
                setup.friction_known,
                &PredictionParams::default(),
                &options,
            )?;
            if let Some(path) = trace {
                let file = std::fs::File::create(&path).map_err(|e| precrash_sim::Error::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
                write_trace_csv(&outcome.trace, file).map_err(|e| precrash_sim::Error::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
            }
            println!(
                "{}",
                serde_json::json!({
                    "scenario": scenario.id,
                    "brake": brake.as_str(),
                    "result": if outcome.crashed() { "crash" } else { "avoided" },
                    "t_end": outcome.t_end,
                    "impact_speed_ego": outcome.impact_speed_ego,
                    "impact_relative_speed": outcome.impact_relative_speed,
                    "trigger_events": outcome
                        .trigger_events
                        .iter()
                        .map(|(s, t)| serde_json::json!({"stage": s.as_str(), "t": t}))
                        .collect::<Vec<_>>(),
                })
            );
            Ok(())
        }
        Command::Sweep {
            scenarios,
            generate,
            profile,
            seed,
            brakes,
            sensor_sets,
            ttc_thresholds,
            friction_known,
            no_classify,
            overrides,
            jobs,
            out,
            format,
            config,
        } => {
            let mut cfg = match config
                .or_else(|| std::env::var("PRECRASH_CONFIG").ok().map(PathBuf::from))
            {
                Some(path) => load_config(&path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(dir) = scenarios {
                cfg.source = ScenarioSource::Directory(dir);
            } else if let Some(n) = generate {
                cfg.source = ScenarioSource::Generated {
                    n,
                    profile: CorpusProfile::parse(&profile)?,
                    seed,
                };
            }
            cfg.brake_types = brakes
                .split(',')
                .map(BrakeType::parse)
                .collect::<precrash_sim::Result<_>>()?;
            cfg.sensor_sets = sensor_sets
                .split(',')
                .map(SensorSetName::parse)
                .collect::<precrash_sim::Result<_>>()?;
            cfg.ttc_thresholds = ttc_thresholds
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| precrash_sim::Error::Config(format!("ttc `{s}`: {e}")))
                })
                .collect::<precrash_sim::Result<_>>()?;
            cfg.friction_known = friction_known;
            cfg.classify_crashes = !no_classify;
            cfg.jobs = jobs;
            for ov in overrides {
                let (k, v) = ov.split_once('=').ok_or_else(|| {
                    precrash_sim::Error::Config(format!("override `{ov}` is not name=value"))
                })?;
                let v: f64 = v.parse().map_err(|e| {
                    precrash_sim::Error::Config(format!("override `{ov}`: {e}"))
                })?;
                cfg.overrides.insert(k.to_string(), v);
            }
            let report = run_experiment(&cfg)?;
            for s in &report.skipped {
                eprintln!("skipped: {s}");
            }
            emit_report(&report, ReportFormat::parse(&format)?, &out)?;
            println!("wrote {} cells to {}", report.cells.len(), out.display());
            Ok(())
        }
        Command::Classify {
            scenario,
            scenarios,
            setup,
            out,
        } => {
            let mut inputs = Vec::new();
            if let Some(f) = scenario {
                inputs.push(load_scenario(&f, true)?.0);
            }
            if let Some(dir) = scenarios {
                let (loaded, skipped) =
                    precrash_sim::harness::resolve_scenarios(&ScenarioSource::Directory(dir))?;
                for s in skipped {
                    eprintln!("skipped: {s}");
                }
                inputs.extend(loaded);
            }
            if inputs.is_empty() {
                return Err(precrash_sim::Error::Config(
                    "classify needs --scenario or --scenarios".into(),
                ));
            }
            let brake = BrakeType::parse(&setup.brake)?;
            let sensors = SensorSet::by_name(SensorSetName::parse(&setup.sensor_set)?);
            let stages = brake.stages(setup.ttc_threshold);
            let params = PredictionParams::default();
            let mut rows = Vec::new();
            for s in &inputs {
                let outcome = run(
                    s,
                    &stages,
                    &sensors,
                    setup.friction_known,
                    &params,
                    &RunOptions::default(),
                )?;
                let mut row = serde_json::json!({
                    "scenario_id": s.id,
                    "brake": brake.as_str(),
                    "sensor_set": sensors.name.as_str(),
                    "ttc_threshold": setup.ttc_threshold,
                    "result": if outcome.crashed() { "crash" } else { "avoided" },
                });
                if outcome.crashed() {
                    let report =
                        classify(&outcome, s, &stages, &sensors, setup.friction_known, &params)?;
                    row["stage_causes"] = serde_json::to_value(&report.stages)
                        .map_err(|e| precrash_sim::Error::Parse(e.to_string()))?;
                    if let Some((a, v)) = report.resolved_pair {
                        row["resolved_pair"] =
                            serde_json::json!([a.as_str(), v.as_str()]);
                    }
                }
                rows.push(row);
            }
            let text = serde_json::to_string_pretty(&rows)
                .map_err(|e| precrash_sim::Error::Parse(e.to_string()))?;
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| precrash_sim::Error::Io {
                    path: path.display().to_string(),
                    source: e,
                })?,
                None => println!("{text}"),
            }
            Ok(())
        }
        Command::Validate { files, lenient } => {
            if files.is_empty() {
                return Err(precrash_sim::Error::Config("no files given".into()));
            }
            let mut failed = false;
            for f in &files {
                match load_scenario(f, !lenient) {
                    Ok((s, warnings)) => {
                        for w in warnings {
                            eprintln!("{}: warning: {w}", f.display());
                        }
                        println!("{}: ok ({})", f.display(), s.id);
                    }
                    Err(e) => {
                        eprintln!("{}: {e}", f.display());
                        failed = true;
                    }
                }
            }
            if failed {
                Err(precrash_sim::Error::Config("validation failed".into()))
            } else {
                Ok(())
            }
        }
    }
}

/// Experiment config file: the same vocabulary as the sweep flags.
fn load_config(path: &PathBuf) -> precrash_sim::Result<ExperimentConfig> {
    #[derive(serde::Deserialize)]
    struct FileConfig {
        scenarios: Option<PathBuf>,
        n: Option<usize>,
        profile: Option<String>,
        seed: Option<u64>,
        friction_known: Option<bool>,
        classify: Option<bool>,
        jobs: Option<usize>,
        #[serde(default)]
        overrides: BTreeMap<String, f64>,
    }
    let text = std::fs::read_to_string(path).map_err(|e| precrash_sim::Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let fc: FileConfig =
        serde_json::from_str(&text).map_err(|e| precrash_sim::Error::Parse(e.to_string()))?;
    let mut cfg = ExperimentConfig::default();
    if let Some(dir) = fc.scenarios {
        cfg.source = ScenarioSource::Directory(dir);
    } else if let Some(n) = fc.n {
        cfg.source = ScenarioSource::Generated {
            n,
            profile: CorpusProfile::parse(fc.profile.as_deref().unwrap_or("mixed"))?,
            seed: fc.seed.unwrap_or(0),
        };
    }
    if let Some(v) = fc.friction_known {
        cfg.friction_known = v;
    }
    if let Some(v) = fc.classify {
        cfg.classify_crashes = v;
    }
    if let Some(v) = fc.jobs {
        cfg.jobs = v;
    }
    cfg.overrides = fc.overrides;
    Ok(cfg)
}
