//! Proposal governance: versioned edits, saved cases with votes, regression
//! re-runs before each save, and the deployment gate.
//!
//! [`Proposal`] holds all state for one proposal and its methods are pure
//! state transitions. Model calls happen in [`test_and_generate`] and
//! [`Proposal::revert_to`], which re-run saved cases.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{handle_message, Task, TaskSet, UserMessage};
use crate::gateway::Gateway;
use crate::provocation::{CaseCandidate, PromptUnderTest, ProvocationEngine};
use crate::types::{Anomaly, CaseId, ChannelName, PipelineKind, ProposalId, ServerId, TaskId, ThreadId, Timestamp, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkflowConfig {
    #[serde(default = "default_threshold")]
    pub deployment_threshold: u32,
    #[serde(default = "one")]
    pub save_vote_gate: u32,
    #[serde(default = "default_selector")]
    pub selector_count: usize,
}

fn default_threshold() -> u32 {
    3
}

fn one() -> u32 {
    1
}

fn default_selector() -> usize {
    5
}

impl Default for WorkflowConfig {
    fn default() -> Self {
        Self {
            deployment_threshold: 3,
            save_vote_gate: 1,
            selector_count: 5,
        }
    }
}

impl WorkflowConfig {
    pub fn validate(&self) -> Result<(), WorkflowError> {
        if self.deployment_threshold == 0 {
            return Err(WorkflowError::InvalidConfig("deployment_threshold"));
        }
        if self.save_vote_gate == 0 {
            return Err(WorkflowError::InvalidConfig("save_vote_gate"));
        }
        if self.selector_count == 0 {
            return Err(WorkflowError::InvalidConfig("selector_count"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalStatus {
    Open,
    Closed,
    Deployed,
}

impl ProposalStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ProposalStatus::Open => "open",
            ProposalStatus::Closed => "closed",
            ProposalStatus::Deployed => "deployed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TaskChange {
    Add { task: Task },
    Edit { task: Task },
    Remove { task_id: TaskId },
}

impl TaskChange {
    pub fn target(&self) -> &TaskId {
        match self {
            TaskChange::Add { task } | TaskChange::Edit { task } => &task.id,
            TaskChange::Remove { task_id } => task_id,
        }
    }

    /// The (trigger, action) a change puts under test, if any.
    pub fn prompt(&self) -> Option<&Task> {
        match self {
            TaskChange::Add { task } | TaskChange::Edit { task } => Some(task),
            TaskChange::Remove { .. } => None,
        }
    }
}

/// Applies `changes` in order on top of `live`. The result keeps the live
/// version number; deployment bumps it.
pub fn apply_changes(live: &TaskSet, changes: &[TaskChange]) -> Result<TaskSet, WorkflowError> {
    let mut tasks = live.tasks.clone();
    for change in changes {
        let pos = tasks.iter().position(|t| &t.id == change.target());
        match (change, pos) {
            (TaskChange::Add { task }, None) => {
                task.validate().map_err(|e| WorkflowError::InvalidDraft(e.to_string()))?;
                tasks.push(task.clone());
            }
            (TaskChange::Add { task }, Some(_)) => {
                return Err(WorkflowError::InvalidDraft(format!("task id {} already exists", task.id)))
            }
            (TaskChange::Edit { task }, Some(i)) => {
                task.validate().map_err(|e| WorkflowError::InvalidDraft(e.to_string()))?;
                tasks[i] = task.clone();
            }
            (TaskChange::Remove { .. }, Some(i)) => {
                tasks.remove(i);
            }
            (_, None) => {
                return Err(WorkflowError::InvalidDraft(format!("no task with id {}", change.target())))
            }
        }
    }
    TaskSet::new(live.server.clone(), tasks, live.version).map_err(|e| WorkflowError::InvalidDraft(e.to_string()))
}

/// Hex SHA-256 of the draft's canonical JSON.
pub fn draft_hash(changes: &[TaskChange]) -> String {
    let bytes = serde_json::to_vec(changes).expect("draft serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditVersion {
    pub version: usize,
    pub author: UserId,
    /// Complete change set of the proposal at this version.
    pub changes: Vec<TaskChange>,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseOrigin {
    Generated,
    Manual,
    Playground,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vote {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseVote {
    pub direction: Vote,
    /// Proposal-wide vote sequence number when cast.
    pub seq: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct CaseOutcome {
    pub triggered_task: Option<String>,
    pub bot_response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseEntry {
    pub version: usize,
    pub triggered_task: Option<String>,
    pub bot_response: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SavedCase {
    pub id: CaseId,
    pub channel: ChannelName,
    pub user_message: String,
    pub origin: CaseOrigin,
    /// First edit version this case must have a response for.
    pub created_at_version: usize,
    pub response_history: Vec<ResponseEntry>,
    pub votes: BTreeMap<UserId, CaseVote>,
}

impl SavedCase {
    pub fn tally(&self) -> (u32, u32) {
        self.votes.values().fold((0, 0), |(up, down), v| match v.direction {
            Vote::Up => (up + 1, down),
            Vote::Down => (up, down + 1),
        })
    }

    pub fn status(&self) -> CaseStatus {
        let (up, down) = self.tally();
        case_status(up, down)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseStatus {
    Good,
    Bad,
    Tbd,
}

pub fn case_status(ups: u32, downs: u32) -> CaseStatus {
    match ups.cmp(&downs) {
        std::cmp::Ordering::Greater => CaseStatus::Good,
        std::cmp::Ordering::Less => CaseStatus::Bad,
        std::cmp::Ordering::Equal => CaseStatus::Tbd,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counters {
    pub good: usize,
    pub bad: usize,
    pub tbd: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub case_id: CaseId,
    pub channel: ChannelName,
    pub user_message: String,
    #[serde(flatten)]
    pub outcome: CaseOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedRow {
    pub case_id: CaseId,
    /// Changed task whose prompt produced this case.
    pub task_id: TaskId,
    pub kind: Option<PipelineKind>,
    pub channel: ChannelName,
    pub user_message: String,
    pub reasoning: String,
    pub selection_reason: Option<String>,
    #[serde(flatten)]
    pub outcome: CaseOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestReport {
    /// Hash of the draft the report was produced for.
    pub hash: String,
    /// Version index a save of this draft would create.
    pub base_version: usize,
    /// Votes with a higher sequence number were cast after the report.
    pub vote_seq: u64,
    pub draft: Vec<TaskChange>,
    pub regression: Vec<RegressionRow>,
    pub generated: Vec<GeneratedRow>,
    pub errors: Vec<String>,
    pub anomalies: Vec<Anomaly>,
}

impl TestReport {
    pub fn case_ids(&self) -> impl Iterator<Item = &CaseId> {
        self.regression
            .iter()
            .map(|r| &r.case_id)
            .chain(self.generated.iter().map(|g| &g.case_id))
    }

    fn outcome(&self, id: &CaseId) -> Option<&CaseOutcome> {
        self.regression
            .iter()
            .find(|r| &r.case_id == id)
            .map(|r| &r.outcome)
            .or_else(|| self.generated.iter().find(|g| &g.case_id == id).map(|g| &g.outcome))
    }
}

/// A playground result used to seed a new proposal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedCase {
    pub channel: ChannelName,
    pub user_message: String,
    pub triggered_task: Option<String>,
    pub bot_response: Option<String>,
}

/// Platform notifications a transition asks for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Notice {
    Created,
    EditSaved { version: usize },
    Deployed,
    Closed,
    Reopened,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorkflowError {
    #[error("proposal title must not be empty")]
    EmptyTitle,
    #[error("config value {0} must be at least 1")]
    InvalidConfig(&'static str),
    #[error("invalid draft: {0}")]
    InvalidDraft(String),
    #[error("draft has no changes")]
    EmptyDraft,
    #[error("cannot {action} a {status} proposal", status = .status.as_str())]
    Status { status: ProposalStatus, action: &'static str },
    #[error("illegal status transition {from} -> {to}", from = .from.as_str(), to = .to.as_str())]
    IllegalTransition { from: ProposalStatus, to: ProposalStatus },
    #[error("{gate} not met: {actual} of {required}")]
    Gate {
        gate: &'static str,
        required: u32,
        actual: u32,
    },
    #[error("stale test report: {0}")]
    Stale(String),
    #[error("unknown case {0}")]
    UnknownCase(CaseId),
    #[error("version {version} out of range (latest is {latest})")]
    OutOfRange { version: usize, latest: usize },
    #[error("deployment conflict: {0}")]
    Conflict(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposal {
    pub id: ProposalId,
    pub server: ServerId,
    pub title: String,
    pub description: String,
    pub author: UserId,
    pub status: ProposalStatus,
    pub edit_versions: Vec<EditVersion>,
    pub saved_cases: Vec<SavedCase>,
    pub deploy_votes: BTreeMap<UserId, Vote>,
    pub thread_ref: Option<ThreadId>,
    /// Latest Test + Generate result, not yet saved.
    pub pending_report: Option<TestReport>,
    pub vote_seq: u64,
    pub next_case: u64,
    pub created_at: Timestamp,
    /// Task-set version produced by deployment.
    pub deployed_version: Option<u64>,
}

impl Proposal {
    #[allow(clippy::too_many_arguments)]
    pub fn create(
        id: ProposalId,
        server: ServerId,
        title: &str,
        description: &str,
        draft: Vec<TaskChange>,
        seed: Option<SeedCase>,
        author: UserId,
        live: &TaskSet,
        now: Timestamp,
    ) -> Result<(Self, Notice), WorkflowError> {
        if title.trim().is_empty() {
            return Err(WorkflowError::EmptyTitle);
        }
        apply_changes(live, &draft)?;
        let mut proposal = Proposal {
            id,
            server,
            title: title.trim().to_string(),
            description: description.to_string(),
            author: author.clone(),
            status: ProposalStatus::Open,
            edit_versions: vec![EditVersion {
                version: 0,
                author: author.clone(),
                changes: draft,
                created_at: now,
            }],
            saved_cases: Vec::new(),
            deploy_votes: BTreeMap::new(),
            thread_ref: None,
            pending_report: None,
            vote_seq: 0,
            next_case: 1,
            created_at: now,
            deployed_version: None,
        };
        if let Some(seed) = seed {
            let case_id = proposal.allocate_case_id();
            proposal.vote_seq += 1;
            proposal.saved_cases.push(SavedCase {
                id: case_id,
                channel: seed.channel,
                user_message: seed.user_message,
                origin: CaseOrigin::Playground,
                created_at_version: 0,
                response_history: vec![ResponseEntry {
                    version: 0,
                    triggered_task: seed.triggered_task,
                    bot_response: seed.bot_response,
                }],
                votes: BTreeMap::from([(
                    author,
                    CaseVote {
                        direction: Vote::Up,
                        seq: proposal.vote_seq,
                    },
                )]),
            });
        }
        Ok((proposal, Notice::Created))
    }

    fn allocate_case_id(&mut self) -> CaseId {
        let id = CaseId(format!("{}-c{}", self.id, self.next_case));
        self.next_case += 1;
        id
    }

    fn require_open(&self, action: &'static str) -> Result<(), WorkflowError> {
        if self.status == ProposalStatus::Open {
            Ok(())
        } else {
            Err(WorkflowError::Status {
                status: self.status,
                action,
            })
        }
    }

    pub fn latest(&self) -> &EditVersion {
        self.edit_versions.last().expect("proposal has version 0")
    }

    pub fn case(&self, id: &CaseId) -> Option<&SavedCase> {
        self.saved_cases.iter().find(|c| &c.id == id)
    }

    /// Whether `id` names a saved case or a case in the pending report.
    pub fn has_case(&self, id: &CaseId) -> bool {
        self.case(id).is_some()
            || self
                .pending_report
                .as_ref()
                .is_some_and(|r| r.generated.iter().any(|g| &g.case_id == id))
    }

    pub fn counters(&self) -> Counters {
        let mut c = Counters::default();
        for case in &self.saved_cases {
            match case.status() {
                CaseStatus::Good => c.good += 1,
                CaseStatus::Bad => c.bad += 1,
                CaseStatus::Tbd => c.tbd += 1,
            }
        }
        c
    }

    pub fn deploy_upvotes(&self) -> u32 {
        self.deploy_votes.values().filter(|v| **v == Vote::Up).count() as u32
    }

    pub fn has_case_vote(&self, user: &UserId) -> bool {
        self.saved_cases.iter().any(|c| c.votes.contains_key(user))
    }

    /// Builds a report from already computed outcomes and stores it as the
    /// pending report. Generated cases get fresh ids.
    pub fn attach_report(
        &mut self,
        draft: Vec<TaskChange>,
        regression: Vec<(CaseId, CaseOutcome)>,
        generated: Vec<(TaskId, CaseCandidate)>,
        errors: Vec<String>,
        anomalies: Vec<Anomaly>,
    ) -> Result<&TestReport, WorkflowError> {
        self.require_open("test")?;
        if draft.is_empty() {
            return Err(WorkflowError::EmptyDraft);
        }
        let mut rows = Vec::with_capacity(regression.len());
        for (id, outcome) in regression {
            let case = self.case(&id).ok_or_else(|| WorkflowError::UnknownCase(id.clone()))?;
            rows.push(RegressionRow {
                case_id: id,
                channel: case.channel.clone(),
                user_message: case.user_message.clone(),
                outcome,
            });
        }
        let mut generated_rows = Vec::with_capacity(generated.len());
        for (task_id, candidate) in generated {
            let exec = candidate.execution.clone().unwrap_or_default();
            generated_rows.push(GeneratedRow {
                case_id: self.allocate_case_id(),
                task_id,
                kind: candidate.kind(),
                channel: candidate.channel.clone(),
                user_message: candidate.user_message.clone(),
                reasoning: candidate.reasoning.clone(),
                selection_reason: candidate.selection_reason.clone(),
                outcome: CaseOutcome {
                    triggered_task: exec.triggered_task,
                    bot_response: exec.bot_response,
                    error: None,
                },
            });
        }
        self.pending_report = Some(TestReport {
            hash: draft_hash(&draft),
            base_version: self.edit_versions.len(),
            vote_seq: self.vote_seq,
            draft,
            regression: rows,
            generated: generated_rows,
            errors,
            anomalies,
        });
        Ok(self.pending_report.as_ref().expect("just set"))
    }

    /// Records, overwrites or (with `None`) retracts a user's vote. Voting on
    /// a generated case of the pending report saves it. Returns (ups, downs).
    pub fn vote_case(&mut self, user: &UserId, case_id: &CaseId, vote: Option<Vote>) -> Result<(u32, u32), WorkflowError> {
        self.require_open("vote on")?;
        if self.case(case_id).is_none() {
            let row = self
                .pending_report
                .as_ref()
                .and_then(|r| r.generated.iter().find(|g| &g.case_id == case_id).map(|g| (r.base_version, g.clone())))
                .ok_or_else(|| WorkflowError::UnknownCase(case_id.clone()))?;
            if vote.is_none() {
                return Ok((0, 0));
            }
            let (base_version, row) = row;
            self.saved_cases.push(SavedCase {
                id: row.case_id,
                channel: row.channel,
                user_message: row.user_message,
                origin: CaseOrigin::Generated,
                created_at_version: base_version,
                response_history: Vec::new(),
                votes: BTreeMap::new(),
            });
        }
        self.vote_seq += 1;
        let seq = self.vote_seq;
        let case = self
            .saved_cases
            .iter_mut()
            .find(|c| &c.id == case_id)
            .expect("case exists");
        match vote {
            Some(direction) => {
                case.votes.insert(user.clone(), CaseVote { direction, seq });
            }
            None => {
                case.votes.remove(user);
            }
        }
        Ok(case.tally())
    }

    /// Adds a manually entered case. Its first response is recorded by the
    /// next saved edit.
    pub fn add_manual_case(&mut self, channel: ChannelName, user_message: &str) -> Result<CaseId, WorkflowError> {
        self.require_open("add cases to")?;
        if user_message.trim().is_empty() {
            return Err(WorkflowError::InvalidDraft("case message is empty".into()));
        }
        let id = self.allocate_case_id();
        self.saved_cases.push(SavedCase {
            id: id.clone(),
            channel,
            user_message: user_message.to_string(),
            origin: CaseOrigin::Manual,
            created_at_version: self.edit_versions.len(),
            response_history: Vec::new(),
            votes: BTreeMap::new(),
        });
        Ok(id)
    }

    /// Saves `draft` as a new version. Requires the pending report to be for
    /// this exact draft and the author to have voted on enough of its cases
    /// since it was produced.
    pub fn save_edit(
        &mut self,
        draft: Vec<TaskChange>,
        report_hash: &str,
        author: &UserId,
        config: &WorkflowConfig,
        now: Timestamp,
    ) -> Result<Notice, WorkflowError> {
        self.require_open("edit")?;
        let report = self
            .pending_report
            .as_ref()
            .ok_or_else(|| WorkflowError::Stale("no test report for this draft".into()))?;
        let hash = draft_hash(&draft);
        if report.hash != hash || report_hash != hash {
            return Err(WorkflowError::Stale("draft changed since the test report".into()));
        }
        let version = self.edit_versions.len();
        if report.base_version != version {
            return Err(WorkflowError::Stale("a newer edit was saved".into()));
        }
        let report_cases: BTreeSet<&CaseId> = report.case_ids().collect();
        let fresh_votes = self
            .saved_cases
            .iter()
            .filter(|c| report_cases.contains(&c.id))
            .filter(|c| c.votes.get(author).is_some_and(|v| v.seq > report.vote_seq))
            .count() as u32;
        if fresh_votes < config.save_vote_gate {
            return Err(WorkflowError::Gate {
                gate: "save_vote_gate",
                required: config.save_vote_gate,
                actual: fresh_votes,
            });
        }
        let mut entries = Vec::new();
        for case in &self.saved_cases {
            if case.created_at_version > version {
                continue;
            }
            let outcome = report
                .outcome(&case.id)
                .ok_or_else(|| WorkflowError::Stale(format!("case {} was added after the test report", case.id)))?;
            entries.push(ResponseEntry {
                version,
                triggered_task: outcome.triggered_task.clone(),
                bot_response: outcome.bot_response.clone(),
            });
        }
        let mut entries = entries.into_iter();
        for case in self.saved_cases.iter_mut().filter(|c| c.created_at_version <= version) {
            case.response_history.push(entries.next().expect("one entry per case"));
        }
        self.edit_versions.push(EditVersion {
            version,
            author: author.clone(),
            changes: draft,
            created_at: now,
        });
        self.pending_report = None;
        Ok(Notice::EditSaved { version })
    }

    /// Deploy vote; only upvotes count toward the threshold. Returns the
    /// upvote count.
    pub fn vote_deploy(&mut self, user: &UserId, vote: Vote) -> Result<u32, WorkflowError> {
        self.require_open("vote to deploy")?;
        if !self.has_case_vote(user) {
            return Err(WorkflowError::Gate {
                gate: "case_vote_gate",
                required: 1,
                actual: 0,
            });
        }
        self.deploy_votes.insert(user.clone(), vote);
        Ok(self.deploy_upvotes())
    }

    /// Applies the latest version's changes to `live`, returning the new
    /// task set. Nothing changes on error.
    pub fn deploy(&mut self, live: &TaskSet, config: &WorkflowConfig) -> Result<(TaskSet, Notice), WorkflowError> {
        self.require_open("deploy")?;
        let ups = self.deploy_upvotes();
        if ups < config.deployment_threshold {
            return Err(WorkflowError::Gate {
                gate: "deployment_threshold",
                required: config.deployment_threshold,
                actual: ups,
            });
        }
        let changes = &self.latest().changes;
        if changes.is_empty() {
            return Err(WorkflowError::EmptyDraft);
        }
        let mut next = apply_changes(live, changes).map_err(|e| match e {
            WorkflowError::InvalidDraft(m) => WorkflowError::Conflict(m),
            other => other,
        })?;
        next.version = live.version + 1;
        self.status = ProposalStatus::Deployed;
        self.deployed_version = Some(next.version);
        self.pending_report = None;
        Ok((next, Notice::Deployed))
    }

    /// Appends a new version restoring version `k`'s changes, re-running
    /// every saved case against it so the history stays complete.
    pub fn revert_to(
        &mut self,
        k: usize,
        author: &UserId,
        live: &TaskSet,
        gateway: &Gateway,
        now: Timestamp,
    ) -> Result<Notice, WorkflowError> {
        self.require_open("revert")?;
        let latest = self.edit_versions.len() - 1;
        if k >= latest {
            return Err(WorkflowError::OutOfRange { version: k, latest });
        }
        let changes = self.edit_versions[k].changes.clone();
        let hypothetical = apply_changes(live, &changes)?;
        let version = self.edit_versions.len();
        for case in self.saved_cases.iter_mut().filter(|c| c.created_at_version <= version) {
            let outcome = run_case(&hypothetical, &case.channel, &case.user_message, gateway);
            case.response_history.push(ResponseEntry {
                version,
                triggered_task: outcome.triggered_task,
                bot_response: outcome.bot_response,
            });
        }
        self.edit_versions.push(EditVersion {
            version,
            author: author.clone(),
            changes,
            created_at: now,
        });
        self.pending_report = None;
        Ok(Notice::EditSaved { version })
    }

    /// open→closed, closed→open; repeating the current status is accepted
    /// without a notice. Deployed is terminal.
    pub fn set_status(&mut self, to: ProposalStatus) -> Result<Option<Notice>, WorkflowError> {
        let notice = match (self.status, to) {
            (from, to) if from == to && from != ProposalStatus::Deployed => None,
            (ProposalStatus::Open, ProposalStatus::Closed) => Some(Notice::Closed),
            (ProposalStatus::Closed, ProposalStatus::Open) => Some(Notice::Reopened),
            (from, to) => return Err(WorkflowError::IllegalTransition { from, to }),
        };
        self.status = to;
        Ok(notice)
    }
}

/// Runs one message through the bot, folding errors into the outcome.
pub fn run_case(task_set: &TaskSet, channel: &ChannelName, message: &str, gateway: &Gateway) -> CaseOutcome {
    match handle_message(task_set, &UserMessage::new(channel.clone(), message), gateway) {
        Ok(out) => CaseOutcome {
            triggered_task: out.triggered_name().map(str::to_string),
            bot_response: out.reply_text().map(str::to_string),
            error: None,
        },
        Err(e) => CaseOutcome {
            error: Some(e.to_string()),
            ..CaseOutcome::default()
        },
    }
}

/// Test + Generate: re-runs saved cases against the draft's hypothetical
/// task set and provokes each added or edited task. Stores the result as the
/// proposal's pending report.
pub fn test_and_generate<'p>(
    proposal: &'p mut Proposal,
    live: &TaskSet,
    draft: Vec<TaskChange>,
    engine: &ProvocationEngine,
    gateway: &Gateway,
    config: &WorkflowConfig,
) -> Result<&'p TestReport, WorkflowError> {
    proposal.require_open("test")?;
    if draft.is_empty() {
        return Err(WorkflowError::EmptyDraft);
    }
    let hypothetical = apply_changes(live, &draft)?;
    let regression = proposal
        .saved_cases
        .iter()
        .map(|c| (c.id.clone(), run_case(&hypothetical, &c.channel, &c.user_message, gateway)))
        .collect();
    let mut generated = Vec::new();
    let mut errors = Vec::new();
    let mut anomalies = Vec::new();
    for task in draft.iter().filter_map(TaskChange::prompt) {
        let prompt = match PromptUnderTest::new(task.trigger.clone(), task.action.clone()) {
            Ok(p) => p,
            Err(e) => {
                errors.push(format!("{}: {e}", task.id));
                continue;
            }
        };
        let selected = engine
            .run_pipelines(&prompt, &hypothetical, gateway)
            .and_then(|run| {
                anomalies.extend(run.anomalies);
                engine.select_cases(&run.pool, config.selector_count, gateway)
            });
        match selected {
            Ok(sel) => {
                anomalies.extend(sel.anomalies);
                generated.extend(sel.cases.into_iter().map(|c| (task.id.clone(), c)));
            }
            Err(e) => errors.push(format!("{}: {e}", task.id)),
        }
    }
    proposal.attach_report(draft, regression, generated, errors, anomalies)
}

#[cfg(test)]
mod tests;
