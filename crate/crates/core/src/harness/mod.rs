//! Validation runs over fixture prompts, report comparison and simulator
//! scenarios. The `botender` binary is a thin shell over this module.

mod fixtures;
mod scenario;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gateway::Gateway;
use crate::provocation::{EngineConfig, EngineReport, ProvocationEngine, ReportMode};
use crate::types::PipelineKind;

pub use fixtures::{
    fixture_cases, fixture_cases_json, fixture_script, script_baseline_prompt, script_botender_prompt,
    validation_assets, validation_channels, CaseSet, FixtureCase, FixturePrompt, FixtureSet, Pitfall,
    FIXTURE_CHANNEL, VALIDATION_SERVER,
};
pub use scenario::{
    demo_scenario, demo_script, run_scenario, ApiLogEntry, Scenario, ScenarioEvent, SimulationResult, DEMO_SERVER,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid fixtures: {0}")]
    Fixtures(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("invalid report {path}: {message}")]
    Report { path: String, message: String },
    #[error("prompt sets differ: missing from first [{}], missing from second [{}]", missing_in_a.join(", "), missing_in_b.join(", "))]
    PromptMismatch {
        missing_in_a: Vec<String>,
        missing_in_b: Vec<String>,
    },
    #[error("invalid scenario: {0}")]
    Scenario(String),
}

/// One report per prompt.
pub fn run_prompt(engine: &ProvocationEngine, mode: ReportMode, prompt: &FixturePrompt, gateway: &Gateway) -> EngineReport {
    let (put, task_set) = match (prompt.prompt(), prompt.task_set()) {
        (Ok(p), Ok(ts)) => (p, ts),
        (Err(e), _) | (_, Err(e)) => {
            let put = crate::provocation::PromptUnderTest {
                trigger: prompt.trigger.clone(),
                action: prompt.action.clone(),
            };
            return EngineReport::failed(Some(&prompt.id), &put, mode, e.to_string());
        }
    };
    match mode {
        ReportMode::Botender => engine.botender_report(Some(&prompt.id), &put, &task_set, gateway),
        ReportMode::Baseline => engine.baseline_report(Some(&prompt.id), &put, &task_set, gateway),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationSummary {
    pub written: Vec<PathBuf>,
    /// Prompt ids whose report records an error.
    pub failed: Vec<String>,
}

/// Runs every prompt and writes `<out>/<prompt id>.json`. Prompts run
/// sequentially unless `parallel > 1`; output files do not depend on it.
pub fn run_validation(
    fixtures: &FixtureSet,
    mode: ReportMode,
    gateway: &Gateway,
    engine_config: EngineConfig,
    out: &Path,
    parallel: usize,
) -> Result<ValidationSummary, HarnessError> {
    if fixtures.prompts.is_empty() {
        return Err(HarnessError::Fixtures("no prompts".into()));
    }
    std::fs::create_dir_all(out).map_err(|e| HarnessError::Io(format!("{}: {e}", out.display())))?;
    let engine = ProvocationEngine::new(validation_assets(), engine_config);
    let run = |p: &FixturePrompt| {
        let report = run_prompt(&engine, mode, p, gateway);
        tracing::info!(prompt = %p.id, mode = mode.as_str(), cases = report.cases.len(), "prompt done");
        (p.id.clone(), report)
    };
    let reports: Vec<(String, EngineReport)> = if parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallel)
            .build()
            .map_err(|e| HarnessError::Io(e.to_string()))?;
        pool.install(|| fixtures.prompts.par_iter().map(run).collect())
    } else {
        fixtures.prompts.iter().map(run).collect()
    };
    let mut summary = ValidationSummary::default();
    for (id, report) in reports {
        let path = out.join(format!("{id}.json"));
        std::fs::write(&path, report.to_json_pretty() + "\n").map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        if report.error.is_some() {
            summary.failed.push(id);
        }
        summary.written.push(path);
    }
    Ok(summary)
}

/// Reads every `*.json` report in `dir`, keyed by prompt id (file stem when
/// the report has none).
pub fn load_reports(dir: &Path) -> Result<BTreeMap<String, EngineReport>, HarnessError> {
    let entries = std::fs::read_dir(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| HarnessError::Io(e.to_string()))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        let report_err = |message: String| HarnessError::Report {
            path: path.display().to_string(),
            message,
        };
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| report_err(e.to_string()))?;
        crate::provocation::validate_report(&value).map_err(|e| report_err(e.to_string()))?;
        let report: EngineReport = serde_json::from_value(value).map_err(|e| report_err(e.to_string()))?;
        let id = report
            .prompt
            .id
            .clone()
            .or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()))
            .unwrap_or_default();
        out.insert(id, report);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub prompt: String,
    pub cases_a: usize,
    pub cases_b: usize,
    pub kinds_a: BTreeSet<PipelineKind>,
    pub kinds_b: BTreeSet<PipelineKind>,
    /// Distinct (channel, message) pairs present in both reports.
    pub overlap: usize,
}

pub fn compare_reports(
    a: &BTreeMap<String, EngineReport>,
    b: &BTreeMap<String, EngineReport>,
) -> Result<Vec<ComparisonRow>, HarnessError> {
    let missing_in_a: Vec<String> = b.keys().filter(|k| !a.contains_key(*k)).cloned().collect();
    let missing_in_b: Vec<String> = a.keys().filter(|k| !b.contains_key(*k)).cloned().collect();
    if !missing_in_a.is_empty() || !missing_in_b.is_empty() {
        return Err(HarnessError::PromptMismatch {
            missing_in_a,
            missing_in_b,
        });
    }
    let pairs = |r: &EngineReport| -> BTreeSet<(String, String)> {
        r.cases
            .iter()
            .map(|c| (c.channel.clone(), c.user_message.clone()))
            .collect()
    };
    let kinds = |r: &EngineReport| -> BTreeSet<PipelineKind> { r.cases.iter().filter_map(|c| c.kind).collect() };
    Ok(a.iter()
        .map(|(id, ra)| {
            let rb = &b[id];
            ComparisonRow {
                prompt: id.clone(),
                cases_a: ra.cases.len(),
                cases_b: rb.cases.len(),
                kinds_a: kinds(ra),
                kinds_b: kinds(rb),
                overlap: pairs(ra).intersection(&pairs(rb)).count(),
            }
        })
        .collect())
}

pub fn compare_dirs(a: &Path, b: &Path) -> Result<Vec<ComparisonRow>, HarnessError> {
    compare_reports(&load_reports(a)?, &load_reports(b)?)
}
