use std::path::Path;

use serde::Serialize;
use witamp_core::pipelines::{run_pipeline, sig17, Method, PipelineRun};
use witamp_core::verifier::{haar_instance, no_instance, yes_instance, StageResources};
use witamp_core::{parameter_schedule, Budget, ParameterSchedule, Tolerances, VerifierInstance};

use crate::config::{InstanceClass, InstanceSource, RunConfig};
use crate::Failure;

pub const RESOURCES_FORMAT: &str = "witamp-resources";
pub const SCHEDULE_FILE: &str = "schedule.json";
pub const RESOURCES_FILE: &str = "resources.json";
pub const ACCEPTANCE_FILE: &str = "acceptance.csv";

/// Spectral margin used to sort an instance into the yes or no class.
const CLASS_SLACK: f64 = 1e-12;
/// Slack added to every bound before a row counts as failed.
const BOUND_SLACK: f64 = 1e-9;

pub struct SourcedInstance {
    pub label: String,
    pub seed: Option<u64>,
    pub instance: VerifierInstance,
}

pub fn instances(cfg: &RunConfig) -> Result<Vec<SourcedInstance>, Failure> {
    match &cfg.instances {
        InstanceSource::Random {
            count,
            witness_width,
            class,
        } => (0..*count)
            .map(|i| {
                let seed = cfg.seed.wrapping_add(i as u64);
                let (label, instance) = match (class, i % 2) {
                    (InstanceClass::Yes, _) | (InstanceClass::Mixed, 0) => ("random-yes", yes_instance(cfg.c, *witness_width, seed)?),
                    (InstanceClass::No, _) | (InstanceClass::Mixed, _) => ("random-no", no_instance(cfg.s, *witness_width, seed)?),
                    (InstanceClass::Haar, _) => ("haar", haar_instance(*witness_width, seed)?),
                };
                Ok(SourcedInstance {
                    label: label.to_string(),
                    seed: Some(seed),
                    instance,
                })
            })
            .collect(),
        InstanceSource::Files { paths } => paths
            .iter()
            .map(|p| {
                let text = std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
                let instance = VerifierInstance::from_json(&text)
                    .map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?;
                Ok(SourcedInstance {
                    label: p.display().to_string(),
                    seed: None,
                    instance,
                })
            })
            .collect(),
    }
}

/// One CSV row: an instance, its promise class, and the bound it must meet.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceRow {
    pub instance: usize,
    pub source: String,
    pub seed: Option<u64>,
    pub class: &'static str,
    pub lambda_max: f64,
    pub target_completeness: f64,
    pub target_soundness: f64,
    /// Final acceptance of the input's best witness.
    pub completeness: f64,
    /// Final acceptance maximized over witnesses.
    pub soundness: f64,
    pub bound: &'static str,
    pub met: bool,
    pub anchor: String,
}

#[derive(Debug, Serialize)]
struct StageMethod {
    index: usize,
    stage: &'static str,
    method: Method,
    simulated_qubits: u32,
}

#[derive(Debug, Serialize)]
struct InstanceResources {
    instance: usize,
    source: String,
    base_qubits: u32,
    total_qubits: u32,
    peak_simulated_qubits: u32,
    extra_qubits: u32,
    calls_v: u64,
    calls_v_dagger: u64,
    predicted_extra_qubits: u32,
    predicted_calls_v: u64,
    predicted_calls_v_dagger: u64,
    matches_prediction: bool,
    stage_breakdown: Vec<StageResources>,
    evaluation: Vec<StageMethod>,
}

#[derive(Debug, Serialize)]
struct ResourcesFile {
    format: &'static str,
    version: u32,
    construction: &'static str,
    cutoff: &'static str,
    p: u64,
    max_qubits: u32,
    instances: Vec<InstanceResources>,
}

pub struct RunOutcome {
    pub schedule: ParameterSchedule,
    pub rows: Vec<AcceptanceRow>,
    pub schedule_json: String,
    pub resources_json: String,
    pub acceptance_csv: String,
}

impl RunOutcome {
    pub fn all_met(&self) -> bool {
        self.rows.iter().all(|r| r.met)
    }

    pub fn write(&self, dir: &Path) -> Result<(), Failure> {
        let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join(SCHEDULE_FILE), &self.schedule_json).map_err(io)?;
        std::fs::write(dir.join(RESOURCES_FILE), &self.resources_json).map_err(io)?;
        std::fs::write(dir.join(ACCEPTANCE_FILE), &self.acceptance_csv).map_err(io)?;
        Ok(())
    }

    /// Fixed-width summary table for the terminal.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:>3}  {:<10}  {:<8}  {:>10}  {:>12}  {:>12}  {:<12}  {}\n",
            "#", "source", "class", "lambda_max", "best_witness", "max_accept", "bound", "met"
        );
        for r in &self.rows {
            out += &format!(
                "{:>3}  {:<10}  {:<8}  {:>10.6}  {:>12.6e}  {:>12.6e}  {:<12}  {}\n",
                r.instance,
                truncate(&r.source, 10),
                r.class,
                r.lambda_max,
                r.completeness,
                r.soundness,
                r.bound,
                if r.met { "yes" } else { "NO" }
            );
        }
        out
    }
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

fn row(index: usize, src: &SourcedInstance, run: &PipelineRun, c: f64, s: f64) -> AcceptanceRow {
    let lambda_max = run.evaluation.base_eigenvalues.first().copied().unwrap_or(0.0);
    let target = run.schedule.final_target();
    let (tc, ts) = target.map_or((f64::NAN, f64::NAN), |t| (t.completeness, t.soundness));
    let completeness = run.evaluation.top_eigenstate_acceptance();
    let soundness = run.evaluation.max_acceptance();
    let (class, bound, met) = if lambda_max >= c - CLASS_SLACK {
        ("yes", "completeness", target.is_none_or(|t| completeness >= t.completeness - BOUND_SLACK))
    } else if lambda_max <= s + CLASS_SLACK {
        ("no", "soundness", target.is_none_or(|t| soundness <= t.soundness + BOUND_SLACK))
    } else {
        ("no-promise", "none", true)
    };
    AcceptanceRow {
        instance: index,
        source: src.label.clone(),
        seed: src.seed,
        class,
        lambda_max,
        target_completeness: tc,
        target_soundness: ts,
        completeness,
        soundness,
        bound,
        met,
        anchor: target.map(|t| t.anchor.clone()).unwrap_or_default(),
    }
}

fn resources(index: usize, src: &SourcedInstance, run: &PipelineRun) -> InstanceResources {
    let r = run.instance.resources();
    let sch = &run.schedule;
    InstanceResources {
        instance: index,
        source: src.label.clone(),
        base_qubits: src.instance.total_qubits(),
        total_qubits: run.instance.total_qubits(),
        peak_simulated_qubits: run.evaluation.peak_simulated_qubits,
        extra_qubits: r.extra_qubits,
        calls_v: r.calls_v,
        calls_v_dagger: r.calls_v_dagger,
        predicted_extra_qubits: sch.predicted_extra_qubits,
        predicted_calls_v: sch.predicted_calls_v,
        predicted_calls_v_dagger: sch.predicted_calls_v_dagger,
        matches_prediction: r.extra_qubits == sch.predicted_extra_qubits
            && (r.calls_v, r.calls_v_dagger) == (sch.predicted_calls_v, sch.predicted_calls_v_dagger),
        stage_breakdown: r.stage_breakdown.clone(),
        evaluation: run
            .evaluation
            .stages
            .iter()
            .map(|st| StageMethod {
                index: st.index,
                stage: st.kind.name(),
                method: st.method,
                simulated_qubits: st.simulated_qubits,
            })
            .collect(),
    }
}

fn csv_float(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        sig17(x)
    }
}

fn acceptance_csv(rows: &[AcceptanceRow]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record([
        "instance",
        "source",
        "seed",
        "class",
        "lambda_max",
        "target_completeness",
        "target_soundness",
        "best_witness_acceptance",
        "max_acceptance",
        "bound",
        "met",
        "anchor",
    ])
    .map_err(fail)?;
    for r in rows {
        w.write_record([
            r.instance.to_string(),
            r.source.clone(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            r.class.to_string(),
            csv_float(r.lambda_max),
            csv_float(r.target_completeness),
            csv_float(r.target_soundness),
            csv_float(r.completeness),
            csv_float(r.soundness),
            r.bound.to_string(),
            r.met.to_string(),
            r.anchor.clone(),
        ])
        .map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Io(e.to_string()))
}

/// Runs the configured pipeline on every instance.
pub fn execute(cfg: &RunConfig, budget: &Budget) -> Result<RunOutcome, Failure> {
    cfg.validate()?;
    let pipeline = cfg.pipeline();
    let schedule = parameter_schedule(&pipeline)?;
    let tol = Tolerances::default();
    let mut rows = Vec::new();
    let mut res = Vec::new();
    for (i, src) in instances(cfg)?.iter().enumerate() {
        let run = run_pipeline(&src.instance, &pipeline, budget, &tol)?;
        rows.push(row(i, src, &run, cfg.c, cfg.s));
        res.push(resources(i, src, &run));
    }
    let file = ResourcesFile {
        format: RESOURCES_FORMAT,
        version: 1,
        construction: cfg.construction.name(),
        cutoff: pipeline.cutoff().name(),
        p: cfg.p,
        max_qubits: budget.max_qubits,
        instances: res,
    };
    let resources_json = serde_json::to_string_pretty(&file).map_err(|e| Failure::Io(e.to_string()))? + "\n";
    Ok(RunOutcome {
        schedule_json: schedule.to_json()? + "\n",
        schedule,
        acceptance_csv: acceptance_csv(&rows)?,
        rows,
        resources_json,
    })
}
