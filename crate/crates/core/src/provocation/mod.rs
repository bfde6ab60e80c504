//! Case-based provocation engine.
//!
//! Three pipelines (ambiguity, narrowness, consequence) each run
//! detect → generate → execute → evaluate. Candidates the evaluator approves
//! are merged into one pool, exact duplicates are dropped, and a selector
//! picks the most provocative few. A baseline generator that is not aimed at
//! provocation is provided for comparison.
//!
//! Fan-out runs on a bounded rayon pool. Results are always merged in
//! (kind, finding, candidate) order, so parallelism never changes output.

pub mod render;
mod report;

use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{handle_message, AgentError, PromptAssets, TaskSet, UserMessage};
use crate::gateway::{
    Envelope, EnvelopeSchema, Evaluation, Finding, Gateway, GatewayError, GeneratedCase,
    GeneratedDetail,
};
use crate::prompts;
use crate::types::{Anomaly, ChannelName, PipelineKind};

pub use report::{validate_report, EngineReport, ReportCase, ReportMode, ReportPrompt, ReportSchemaError};

/// The (trigger, action) pair being probed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptUnderTest {
    pub trigger: String,
    pub action: String,
}

impl PromptUnderTest {
    pub fn new(trigger: impl Into<String>, action: impl Into<String>) -> Result<Self, EngineError> {
        let prompt = Self {
            trigger: trigger.into(),
            action: action.into(),
        };
        if prompt.trigger.trim().is_empty() || prompt.action.trim().is_empty() {
            return Err(EngineError::InvalidPrompt);
        }
        Ok(prompt)
    }
}

/// Where a candidate came from. Kind-specific fields live only on the
/// matching variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Ambiguity {
        finding: Finding,
        interpretation: String,
    },
    Narrowness {
        finding: Finding,
        uncovered_scenario: String,
    },
    Consequence {
        finding: Finding,
    },
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Execution {
    pub triggered_task: Option<String>,
    pub bot_response: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseCandidate {
    pub prompt: PromptUnderTest,
    pub provenance: Provenance,
    pub reasoning: String,
    pub channel: ChannelName,
    pub user_message: String,
    pub execution: Option<Execution>,
    pub evaluation: Option<Evaluation>,
    pub selection_reason: Option<String>,
}

impl CaseCandidate {
    /// Builds a candidate from generator output. Fails when the generated
    /// detail does not belong to the finding's kind.
    pub fn from_generated(
        prompt: &PromptUnderTest,
        finding: Option<&Finding>,
        generated: GeneratedCase,
        channel: ChannelName,
    ) -> Result<Self, EngineError> {
        let provenance = match (finding, generated.detail) {
            (Some(f @ Finding::Ambiguity { .. }), GeneratedDetail::Interpretation { interpretation, .. }) => {
                Provenance::Ambiguity {
                    finding: f.clone(),
                    interpretation,
                }
            }
            (Some(f @ Finding::Narrowness { .. }), GeneratedDetail::UncoveredScenario(s)) => {
                Provenance::Narrowness {
                    finding: f.clone(),
                    uncovered_scenario: s,
                }
            }
            (Some(f @ Finding::Consequence { .. }), GeneratedDetail::Plain) => {
                Provenance::Consequence { finding: f.clone() }
            }
            (None, GeneratedDetail::Plain) => Provenance::Baseline,
            _ => return Err(EngineError::KindMismatch),
        };
        Ok(Self {
            prompt: prompt.clone(),
            provenance,
            reasoning: generated.reasoning,
            channel,
            user_message: generated.user_message,
            execution: None,
            evaluation: None,
            selection_reason: None,
        })
    }

    pub fn kind(&self) -> Option<PipelineKind> {
        match &self.provenance {
            Provenance::Ambiguity { .. } => Some(PipelineKind::Ambiguity),
            Provenance::Narrowness { .. } => Some(PipelineKind::Narrowness),
            Provenance::Consequence { .. } => Some(PipelineKind::Consequence),
            Provenance::Baseline => None,
        }
    }

    pub fn finding(&self) -> Option<&Finding> {
        match &self.provenance {
            Provenance::Ambiguity { finding, .. }
            | Provenance::Narrowness { finding, .. }
            | Provenance::Consequence { finding } => Some(finding),
            Provenance::Baseline => None,
        }
    }

    pub fn interpretation(&self) -> Option<&str> {
        match &self.provenance {
            Provenance::Ambiguity { interpretation, .. } => Some(interpretation),
            _ => None,
        }
    }

    pub fn uncovered_scenario(&self) -> Option<&str> {
        match &self.provenance {
            Provenance::Narrowness {
                uncovered_scenario, ..
            } => Some(uncovered_scenario),
            _ => None,
        }
    }

    pub fn passed(&self) -> bool {
        self.evaluation.as_ref().is_some_and(|e| e.label)
    }

    pub fn message(&self) -> UserMessage {
        UserMessage::new(self.channel.clone(), self.user_message.clone())
    }

    fn dedupe_key(&self) -> (ChannelName, String) {
        (self.channel.clone(), self.user_message.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Detect,
    Generate,
    Execute,
    Evaluate,
    Select,
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("prompt under test needs a non-empty trigger and action")]
    InvalidPrompt,
    #[error("generated case does not match the finding's kind")]
    KindMismatch,
    #[error("{stage:?} stage failed{}: {message}", kind.map(|k| format!(" ({k})")).unwrap_or_default())]
    Stage {
        kind: Option<PipelineKind>,
        stage: Stage,
        message: String,
    },
    #[error("candidate has not been executed")]
    NotExecuted,
    #[error("selection pool contains a candidate without a passing evaluation")]
    Ungated,
    #[error("all three pipelines failed: {0}")]
    AllPipelinesFailed(String),
}

impl EngineError {
    fn gateway(kind: Option<PipelineKind>, stage: Stage, err: GatewayError) -> Self {
        EngineError::Stage {
            kind,
            stage,
            message: err.to_string(),
        }
    }

    fn agent(kind: Option<PipelineKind>, err: AgentError) -> Self {
        EngineError::Stage {
            kind,
            stage: Stage::Execute,
            message: err.to_string(),
        }
    }

    fn as_anomaly(&self) -> Anomaly {
        Anomaly::new("stage_error", self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Worker threads for the pipeline fan-out.
    pub parallelism: usize,
    /// Cases the selector keeps.
    pub selector_count: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            parallelism: 4,
            selector_count: 5,
        }
    }
}

/// Output of [`ProvocationEngine::run_pipelines`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PipelineRun {
    /// Passing, de-duplicated candidates in merge order.
    pub pool: Vec<CaseCandidate>,
    pub anomalies: Vec<Anomaly>,
    pub failed_kinds: Vec<PipelineKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Selection {
    pub cases: Vec<CaseCandidate>,
    pub anomalies: Vec<Anomaly>,
    pub selector_called: bool,
}

#[derive(Debug, Default)]
struct Outcome {
    candidates: Vec<CaseCandidate>,
    anomalies: Vec<Anomaly>,
    errors: usize,
    chains: usize,
}

impl Outcome {
    fn absorb(&mut self, other: Outcome) {
        self.candidates.extend(other.candidates);
        self.anomalies.extend(other.anomalies);
        self.errors += other.errors;
        self.chains += other.chains;
    }

    fn failed(err: EngineError) -> Self {
        Outcome {
            anomalies: vec![err.as_anomaly()],
            errors: 1,
            chains: 1,
            ..Outcome::default()
        }
    }
}

pub struct ProvocationEngine {
    assets: PromptAssets,
    config: EngineConfig,
    pool: Arc<rayon::ThreadPool>,
}

impl std::fmt::Debug for ProvocationEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProvocationEngine")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl ProvocationEngine {
    pub fn new(assets: PromptAssets, config: EngineConfig) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallelism.max(1))
            .thread_name(|i| format!("provocation-{i}"))
            .build()
            .expect("failed to build provocation thread pool");
        Self {
            assets,
            config,
            pool: Arc::new(pool),
        }
    }

    pub fn assets(&self) -> &PromptAssets {
        &self.assets
    }

    pub fn config(&self) -> EngineConfig {
        self.config
    }

    pub fn detect(
        &self,
        kind: PipelineKind,
        prompt: &PromptUnderTest,
        gateway: &Gateway,
    ) -> Result<(Vec<Finding>, Vec<Anomaly>), EngineError> {
        let request = gateway.request(
            self.assets.render(render::detector_system(kind)),
            render::detector_user(prompt),
            EnvelopeSchema::FindingList(kind),
        );
        let findings = match gateway
            .call(&request)
            .map_err(|e| EngineError::gateway(Some(kind), Stage::Detect, e))?
        {
            Envelope::Findings(f) => f,
            other => unreachable!("finding schema produced {other:?}"),
        };
        let haystack = format!("{}\n{}", prompt.trigger, prompt.action).to_lowercase();
        let anomalies = findings
            .iter()
            .filter(|f| !haystack.contains(&f.phrase().to_lowercase()))
            .map(|f| Anomaly::new("phrase_not_quoted", format!("{kind} finding phrase {:?} is not a quote of the prompt", f.phrase())))
            .collect();
        Ok((findings, anomalies))
    }

    pub fn generate(
        &self,
        kind: PipelineKind,
        prompt: &PromptUnderTest,
        finding: &Finding,
        gateway: &Gateway,
    ) -> Result<(Vec<CaseCandidate>, Vec<Anomaly>), EngineError> {
        if finding.kind() != kind {
            return Err(EngineError::KindMismatch);
        }
        let request = gateway.request(
            self.assets.render(render::generator_system(kind)),
            render::generator_user(prompt, finding),
            EnvelopeSchema::CandidateList(Some(kind)),
        );
        let generated = match gateway
            .call(&request)
            .map_err(|e| EngineError::gateway(Some(kind), Stage::Generate, e))?
        {
            Envelope::Candidates(c) => c,
            other => unreachable!("candidate schema produced {other:?}"),
        };
        let mut anomalies = Vec::new();
        if kind == PipelineKind::Consequence && generated.len() > 1 {
            anomalies.push(Anomaly::new(
                "extra_consequence_cases",
                format!("consequence generator returned {} cases", generated.len()),
            ));
        }
        let (candidates, dropped) = self.admit(prompt, Some(finding), generated)?;
        anomalies.extend(dropped);
        Ok((candidates, anomalies))
    }

    /// Channel validation shared by the pipeline and baseline generators.
    fn admit(
        &self,
        prompt: &PromptUnderTest,
        finding: Option<&Finding>,
        generated: Vec<GeneratedCase>,
    ) -> Result<(Vec<CaseCandidate>, Vec<Anomaly>), EngineError> {
        let mut candidates = Vec::new();
        let mut anomalies = Vec::new();
        for case in generated {
            match ChannelName::parse(&case.channel) {
                Ok(channel) if self.assets.has_channel(&channel) => {
                    candidates.push(CaseCandidate::from_generated(prompt, finding, case, channel)?);
                }
                _ => anomalies.push(Anomaly::new(
                    "invalid_channel",
                    format!("dropped generated case in unknown channel {:?}", case.channel),
                )),
            }
        }
        Ok((candidates, anomalies))
    }

    /// Runs the candidate's message through the bot.
    pub fn execute_candidate(
        &self,
        mut candidate: CaseCandidate,
        task_set: &TaskSet,
        gateway: &Gateway,
    ) -> Result<(CaseCandidate, Vec<Anomaly>), EngineError> {
        let outcome = handle_message(task_set, &candidate.message(), gateway)
            .map_err(|e| EngineError::agent(candidate.kind(), e))?;
        candidate.execution = Some(Execution {
            triggered_task: outcome.triggered_name().map(str::to_string),
            bot_response: outcome.reply_text().map(str::to_string),
        });
        Ok((candidate, outcome.anomalies))
    }

    pub fn evaluate(
        &self,
        mut candidate: CaseCandidate,
        gateway: &Gateway,
    ) -> Result<CaseCandidate, EngineError> {
        if candidate.execution.is_none() {
            return Err(EngineError::NotExecuted);
        }
        let kind = candidate.kind().ok_or(EngineError::KindMismatch)?;
        let user = render::evaluator_user(&candidate).ok_or(EngineError::KindMismatch)?;
        let request = gateway.request(
            self.assets.render(render::evaluator_system(kind)),
            user,
            EnvelopeSchema::Evaluation,
        );
        match gateway
            .call(&request)
            .map_err(|e| EngineError::gateway(Some(kind), Stage::Evaluate, e))?
        {
            Envelope::Evaluation(eval) => candidate.evaluation = Some(eval),
            other => unreachable!("evaluation schema produced {other:?}"),
        }
        Ok(candidate)
    }

    /// execute → evaluate for one generated candidate.
    fn judge(&self, candidate: CaseCandidate, task_set: &TaskSet, gateway: &Gateway) -> Outcome {
        let kind = candidate.kind();
        let result = self
            .execute_candidate(candidate, task_set, gateway)
            .and_then(|(c, anomalies)| Ok((self.evaluate(c, gateway)?, anomalies)));
        match result {
            Ok((c, anomalies)) => {
                let mut out = Outcome {
                    anomalies,
                    chains: 1,
                    ..Outcome::default()
                };
                if c.passed() {
                    out.candidates.push(c);
                } else {
                    tracing::debug!(?kind, message = %c.user_message, "candidate rejected by evaluator");
                }
                out
            }
            Err(err) => Outcome::failed(err),
        }
    }

    fn run_finding(
        &self,
        kind: PipelineKind,
        prompt: &PromptUnderTest,
        finding: &Finding,
        task_set: &TaskSet,
        gateway: &Gateway,
    ) -> Outcome {
        let (candidates, anomalies) = match self.generate(kind, prompt, finding, gateway) {
            Ok(v) => v,
            Err(err) => return Outcome::failed(err),
        };
        let judged: Vec<Outcome> = candidates
            .into_par_iter()
            .map(|c| self.judge(c, task_set, gateway))
            .collect();
        let mut out = Outcome {
            anomalies,
            chains: 1,
            ..Outcome::default()
        };
        for o in judged {
            out.candidates.extend(o.candidates);
            out.anomalies.extend(o.anomalies);
            out.errors += o.errors;
        }
        out
    }

    /// Returns the kind's outcome and whether the kind as a whole failed.
    fn run_kind(
        &self,
        kind: PipelineKind,
        prompt: &PromptUnderTest,
        task_set: &TaskSet,
        gateway: &Gateway,
    ) -> (Outcome, bool) {
        let (findings, anomalies) = match self.detect(kind, prompt, gateway) {
            Ok(v) => v,
            Err(err) => return (Outcome::failed(err), true),
        };
        let per_finding: Vec<Outcome> = findings
            .par_iter()
            .map(|f| self.run_finding(kind, prompt, f, task_set, gateway))
            .collect();
        let mut out = Outcome {
            anomalies,
            ..Outcome::default()
        };
        for o in per_finding {
            out.absorb(o);
        }
        let failed = out.chains > 0 && out.errors >= out.chains && out.candidates.is_empty();
        (out, failed)
    }

    /// All three pipelines; returns the merged pool of approved candidates.
    pub fn run_pipelines(
        &self,
        prompt: &PromptUnderTest,
        task_set: &TaskSet,
        gateway: &Gateway,
    ) -> Result<PipelineRun, EngineError> {
        let per_kind: Vec<(PipelineKind, (Outcome, bool))> = self.pool.install(|| {
            PipelineKind::ALL
                .par_iter()
                .map(|&k| (k, self.run_kind(k, prompt, task_set, gateway)))
                .collect()
        });
        let mut run = PipelineRun::default();
        let mut seen = HashSet::new();
        for (kind, (outcome, failed)) in per_kind {
            if failed {
                run.failed_kinds.push(kind);
            }
            run.anomalies.extend(outcome.anomalies);
            for c in outcome.candidates {
                if seen.insert(c.dedupe_key()) {
                    run.pool.push(c);
                } else {
                    run.anomalies.push(Anomaly::new(
                        "duplicate_case",
                        format!("dropped duplicate {} case in {}", kind, c.channel),
                    ));
                }
            }
        }
        if run.failed_kinds.len() == PipelineKind::ALL.len() {
            let detail = run
                .anomalies
                .iter()
                .filter(|a| a.code == "stage_error")
                .map(|a| a.detail.as_str())
                .collect::<Vec<_>>()
                .join("; ");
            return Err(EngineError::AllPipelinesFailed(detail));
        }
        Ok(run)
    }

    /// Picks up to `n` cases. Pools no larger than `n` are returned unchanged
    /// without calling the model.
    pub fn select_cases(
        &self,
        pool: &[CaseCandidate],
        n: usize,
        gateway: &Gateway,
    ) -> Result<Selection, EngineError> {
        if pool.iter().any(|c| !c.passed()) {
            return Err(EngineError::Ungated);
        }
        if pool.len() <= n {
            return Ok(Selection {
                cases: pool.to_vec(),
                anomalies: Vec::new(),
                selector_called: false,
            });
        }
        let request = gateway.request(
            self.assets.render(&render::selector_system(n)),
            render::selector_user(pool),
            EnvelopeSchema::Selection,
        );
        let entries = match gateway
            .call(&request)
            .map_err(|e| EngineError::gateway(None, Stage::Select, e))?
        {
            Envelope::Selection(entries) => entries,
            other => unreachable!("selection schema produced {other:?}"),
        };
        let mut selection = Selection {
            selector_called: true,
            ..Selection::default()
        };
        let mut taken = HashSet::new();
        for entry in entries {
            let index = entry.case_id.parse::<usize>().ok().filter(|i| *i < pool.len());
            let Some(index) = index else {
                selection.anomalies.push(Anomaly::new(
                    "unknown_case_id",
                    format!("selector returned unknown case id {:?}", entry.case_id),
                ));
                continue;
            };
            if !taken.insert(index) {
                selection.anomalies.push(Anomaly::new(
                    "duplicate_case_id",
                    format!("selector repeated case id {index}"),
                ));
                continue;
            }
            if selection.cases.len() == n {
                selection.anomalies.push(Anomaly::new(
                    "excess_selection",
                    format!("selector returned more than {n} cases"),
                ));
                break;
            }
            let mut case = pool[index].clone();
            case.selection_reason = Some(entry.selection_reason);
            selection.cases.push(case);
        }
        Ok(selection)
    }

    /// Baseline: one generation call for five plain cases, each executed.
    pub fn generate_baseline_cases(
        &self,
        prompt: &PromptUnderTest,
        task_set: &TaskSet,
        gateway: &Gateway,
    ) -> Result<(Vec<CaseCandidate>, Vec<Anomaly>), EngineError> {
        let request = gateway.request(
            self.assets.render(prompts::BASELINE_SYSTEM),
            render::detector_user(prompt),
            EnvelopeSchema::CandidateList(None),
        );
        let generated = match gateway
            .call(&request)
            .map_err(|e| EngineError::gateway(None, Stage::Baseline, e))?
        {
            Envelope::Candidates(c) => c,
            other => unreachable!("candidate schema produced {other:?}"),
        };
        let mut anomalies = Vec::new();
        if generated.len() != 5 {
            anomalies.push(Anomaly::new(
                "baseline_count",
                format!("baseline generator returned {} cases instead of 5", generated.len()),
            ));
        }
        let (candidates, dropped) = self.admit(prompt, None, generated)?;
        anomalies.extend(dropped);
        let executed: Vec<Result<(CaseCandidate, Vec<Anomaly>), EngineError>> = self.pool.install(|| {
            candidates
                .into_par_iter()
                .map(|c| self.execute_candidate(c, task_set, gateway))
                .collect()
        });
        let mut cases = Vec::new();
        for result in executed {
            let (case, extra) = result?;
            cases.push(case);
            anomalies.extend(extra);
        }
        Ok((cases, anomalies))
    }

    /// Full provocation run: pipelines then selection.
    pub fn provoke(
        &self,
        prompt: &PromptUnderTest,
        task_set: &TaskSet,
        gateway: &Gateway,
    ) -> Result<(Vec<CaseCandidate>, Vec<Anomaly>), EngineError> {
        let run = self.run_pipelines(prompt, task_set, gateway)?;
        let selection = self.select_cases(&run.pool, self.config.selector_count, gateway)?;
        let mut anomalies = run.anomalies;
        anomalies.extend(selection.anomalies);
        Ok((selection.cases, anomalies))
    }

    /// Report for a provocation run. Errors are recorded in the document.
    pub fn botender_report(
        &self,
        id: Option<&str>,
        prompt: &PromptUnderTest,
        task_set: &TaskSet,
        gateway: &Gateway,
    ) -> EngineReport {
        match self.provoke(prompt, task_set, gateway) {
            Ok((cases, anomalies)) => EngineReport::new(id, prompt, ReportMode::Botender, &cases, anomalies),
            Err(err) => EngineReport::failed(id, prompt, ReportMode::Botender, err.to_string()),
        }
    }

    pub fn baseline_report(
        &self,
        id: Option<&str>,
        prompt: &PromptUnderTest,
        task_set: &TaskSet,
        gateway: &Gateway,
    ) -> EngineReport {
        match self.generate_baseline_cases(prompt, task_set, gateway) {
            Ok((cases, anomalies)) => EngineReport::new(id, prompt, ReportMode::Baseline, &cases, anomalies),
            Err(err) => EngineReport::failed(id, prompt, ReportMode::Baseline, err.to_string()),
        }
    }
}
