//! Request layer used by the HTTP server and the scenario runner.
//!
//! [`Service::handle`] takes a transport-neutral [`ApiRequest`] and returns
//! an [`ApiResponse`]; all state lives in the document store, so replicas
//! over the same store answer alike.

mod config;
mod identity;

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::agent::{AgentError, PromptAssets};
use crate::gateway::{ConfigError, Gateway};
use crate::platform::{Adapter, PlatformError, ServerDoc, SimulatedPlatform, BOTENDER_CHANNEL};
use crate::provocation::{EngineConfig, ProvocationEngine};
use crate::store::{load_doc, next_id, save_doc, Clock, Collection, DocumentStore, FileStore, MemoryStore, StoreError};
use crate::types::{CaseId, ChannelName, ProposalId, ServerId};
use crate::workflow::{
    run_case, test_and_generate, CaseStatus, Counters, Notice, Proposal, ProposalStatus, SeedCase, TaskChange, Vote,
    WorkflowConfig, WorkflowError,
};

pub use config::{EngineSection, IdentitySeed, ServerSeed, ServiceConfig, ServiceConfigError, StoreConfig};
pub use identity::{IdentityProvider, Membership, Role, Session, StaticIdentity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Get,
    Post,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "GET" => Ok(Method::Get),
            "POST" => Ok(Method::Post),
            other => Err(format!("unsupported method {other}")),
        }
    }
}

/// Every route, with `:name` placeholders.
pub const ROUTES: &[(Method, &str)] = &[
    (Method::Get, "/session"),
    (Method::Get, "/servers/:server/tasks"),
    (Method::Get, "/servers/:server/channels"),
    (Method::Get, "/servers/:server/proposals"),
    (Method::Post, "/servers/:server/proposals"),
    (Method::Post, "/servers/:server/playground"),
    (Method::Get, "/proposals/:proposal"),
    (Method::Post, "/proposals/:proposal/test"),
    (Method::Post, "/proposals/:proposal/edits"),
    (Method::Post, "/proposals/:proposal/cases"),
    (Method::Post, "/proposals/:proposal/deploy-votes"),
    (Method::Post, "/proposals/:proposal/deploy"),
    (Method::Post, "/proposals/:proposal/status"),
    (Method::Post, "/proposals/:proposal/revert"),
    (Method::Post, "/cases/:case/votes"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiRequest {
    pub method: Method,
    pub path: String,
    #[serde(default)]
    pub token: Option<String>,
    #[serde(default)]
    pub body: Value,
}

impl ApiRequest {
    pub fn get(path: impl Into<String>) -> Self {
        Self {
            method: Method::Get,
            path: path.into(),
            token: None,
            body: Value::Null,
        }
    }

    pub fn post(path: impl Into<String>, body: Value) -> Self {
        Self {
            method: Method::Post,
            path: path.into(),
            token: None,
            body,
        }
    }

    pub fn with_token(mut self, token: impl Into<String>) -> Self {
        self.token = Some(token.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiResponse {
    pub status: u16,
    pub body: Value,
}

/// Error body: `{code, message}` plus the gate fields for 422 gate errors.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{status} {code}: {message}")]
pub struct ApiError {
    pub status: u16,
    pub code: &'static str,
    pub message: String,
    pub gate: Option<(&'static str, u32, u32)>,
}

impl ApiError {
    fn new(status: u16, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            gate: None,
        }
    }

    fn unauthenticated() -> Self {
        Self::new(401, "unauthenticated", "missing or unknown session token")
    }

    fn forbidden(server: &ServerId) -> Self {
        Self::new(403, "forbidden", format!("not a member of server {server}"))
    }

    fn not_found(what: impl std::fmt::Display) -> Self {
        Self::new(404, "not_found", format!("{what} not found"))
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(422, "invalid_request", message)
    }

    fn to_response(&self) -> ApiResponse {
        let mut body = json!({ "code": self.code, "message": self.message });
        if let Some((gate, required, actual)) = self.gate {
            body["gate"] = json!(gate);
            body["required"] = json!(required);
            body["actual"] = json!(actual);
        }
        ApiResponse {
            status: self.status,
            body,
        }
    }
}

impl From<WorkflowError> for ApiError {
    fn from(e: WorkflowError) -> Self {
        let message = e.to_string();
        match e {
            WorkflowError::Gate { gate, required, actual } => ApiError {
                status: 422,
                code: "gate_not_met",
                message,
                gate: Some((gate, required, actual)),
            },
            WorkflowError::Stale(_) => ApiError::new(409, "stale_report", message),
            WorkflowError::Conflict(_) => ApiError::new(409, "deploy_conflict", message),
            WorkflowError::Status { .. } | WorkflowError::IllegalTransition { .. } => {
                ApiError::new(409, "invalid_state", message)
            }
            WorkflowError::UnknownCase(_) => ApiError::new(404, "not_found", message),
            WorkflowError::InvalidConfig(_) => ApiError::new(500, "internal", message),
            WorkflowError::EmptyTitle
            | WorkflowError::InvalidDraft(_)
            | WorkflowError::EmptyDraft
            | WorkflowError::OutOfRange { .. } => ApiError::invalid(message),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::NotFound { .. } | StoreError::InvalidId(_) => ApiError::new(404, "not_found", message),
            StoreError::Conflict { .. } => ApiError::new(409, "conflict", message),
            StoreError::Io(_) | StoreError::Corrupt(_) => ApiError::new(500, "store_error", message),
        }
    }
}

impl From<PlatformError> for ApiError {
    fn from(e: PlatformError) -> Self {
        match e {
            PlatformError::Store(s) => s.into(),
            PlatformError::NotInstalled(_) | PlatformError::UnknownServer(_) => {
                ApiError::new(404, "not_installed", e.to_string())
            }
            other => ApiError::new(500, "platform_error", other.to_string()),
        }
    }
}

impl From<AgentError> for ApiError {
    fn from(e: AgentError) -> Self {
        ApiError::new(500, "agent_error", e.to_string())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] ServiceConfigError),
    #[error(transparent)]
    Provider(#[from] ConfigError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Platform(#[from] PlatformError),
}

/// Pointer from a case id to its proposal, kept in the `cases` collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseIndex {
    pub case: CaseId,
    pub proposal: ProposalId,
    pub server: ServerId,
}

/// Proposal document plus the values the proposal page shows.
#[derive(Debug, Serialize)]
pub struct ProposalView<'a> {
    #[serde(flatten)]
    pub proposal: &'a Proposal,
    pub revision: u64,
    pub counters: Counters,
    pub case_statuses: BTreeMap<&'a CaseId, CaseStatus>,
    pub deploy_upvotes: u32,
    pub deployment_threshold: u32,
}

#[derive(Debug, Serialize)]
struct ProposalSummary<'a> {
    id: &'a ProposalId,
    title: &'a str,
    author: &'a crate::types::UserId,
    status: ProposalStatus,
    latest_version: usize,
    counters: Counters,
    deploy_upvotes: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    title: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    draft: Vec<TaskChange>,
    #[serde(default)]
    seed: Option<SeedCase>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DraftBody {
    draft: Vec<TaskChange>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SaveBody {
    draft: Vec<TaskChange>,
    report_hash: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MessageBody {
    channel: ChannelName,
    message: String,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CaseDirection {
    Up,
    Down,
    None,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseVoteBody {
    direction: CaseDirection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeployVoteBody {
    direction: Vote,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatusBody {
    status: ProposalStatus,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RevertBody {
    version: usize,
}

fn parse_body<T: DeserializeOwned>(body: &Value) -> Result<T, ApiError> {
    let body = if body.is_null() { json!({}) } else { body.clone() };
    serde_json::from_value(body).map_err(|e| ApiError::new(400, "bad_request", e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("response types serialize")
}

type Locks<K> = Mutex<HashMap<K, Arc<Mutex<()>>>>;

fn lock_for<K: std::hash::Hash + Eq + Clone>(map: &Locks<K>, key: &K) -> Arc<Mutex<()>> {
    map.lock().expect("lock map").entry(key.clone()).or_default().clone()
}

pub struct Service {
    adapter: Arc<Adapter>,
    identity: Arc<dyn IdentityProvider>,
    thresholds: WorkflowConfig,
    engine_config: EngineConfig,
    write_role: Role,
    clock: Arc<dyn Clock>,
    proposal_locks: Locks<ProposalId>,
    engines: Mutex<Vec<(PromptAssets, Arc<ProvocationEngine>)>>,
}

impl std::fmt::Debug for Service {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Service")
            .field("thresholds", &self.thresholds)
            .field("write_role", &self.write_role)
            .finish_non_exhaustive()
    }
}

impl Service {
    pub fn new(
        adapter: Arc<Adapter>,
        identity: Arc<dyn IdentityProvider>,
        thresholds: WorkflowConfig,
        parallelism: usize,
        write_role: Role,
        clock: Arc<dyn Clock>,
    ) -> Self {
        Self {
            adapter,
            identity,
            engine_config: EngineConfig {
                parallelism,
                selector_count: thresholds.selector_count,
            },
            thresholds,
            write_role,
            clock,
            proposal_locks: Mutex::default(),
            engines: Mutex::default(),
        }
    }

    /// Builds a service over a simulated platform seeded from `config`,
    /// installing every configured server that is not installed yet.
    pub fn from_config(
        config: &ServiceConfig,
        gateway: Gateway,
        clock: Arc<dyn Clock>,
    ) -> Result<(Self, Arc<SimulatedPlatform>), ServiceError> {
        let store: Arc<dyn DocumentStore> = match &config.store {
            StoreConfig::Memory => Arc::new(MemoryStore::new()),
            StoreConfig::File { path } => Arc::new(FileStore::open(path)?),
        };
        let sim = Arc::new(SimulatedPlatform::new());
        let adapter = Arc::new(Adapter::new(sim.clone(), store.clone(), gateway));
        let botender = ChannelName::parse(BOTENDER_CHANNEL).expect("valid channel");
        for seed in &config.servers {
            let installed = adapter.is_installed(&seed.id)?;
            let mut channels = seed.channels.clone();
            if installed && !channels.contains(&botender) {
                channels.push(botender.clone());
            }
            sim.add_server(seed.id.clone(), channels, seed.members.clone(), seed.admins.clone());
            if !installed {
                adapter.install(&seed.id)?;
            }
            if let Some(desc) = &seed.community_description {
                let (mut doc, rev) = load_doc::<ServerDoc>(store.as_ref(), Collection::Servers, seed.id.as_str())?;
                doc.community_description = Some(desc.clone());
                save_doc(store.as_ref(), Collection::Servers, seed.id.as_str(), &doc, Some(rev))?;
            }
        }
        let service = Self::new(
            adapter,
            Arc::new(config.identity()),
            config.thresholds,
            config.engine.parallelism,
            config.write_role,
            clock,
        );
        Ok((service, sim))
    }

    pub fn adapter(&self) -> &Arc<Adapter> {
        &self.adapter
    }

    pub fn thresholds(&self) -> WorkflowConfig {
        self.thresholds
    }

    pub fn handle(&self, request: &ApiRequest) -> ApiResponse {
        match self.route(request) {
            Ok((status, body)) => ApiResponse { status, body },
            Err(e) => {
                if e.status >= 500 {
                    tracing::error!(path = %request.path, error = %e, "request failed");
                } else {
                    tracing::debug!(path = %request.path, error = %e, "request rejected");
                }
                e.to_response()
            }
        }
    }

    fn route(&self, req: &ApiRequest) -> Result<(u16, Value), ApiError> {
        let token = req.token.as_deref().ok_or_else(ApiError::unauthenticated)?;
        let session = self.identity.authenticate(token).ok_or_else(ApiError::unauthenticated)?;
        let path = req.path.split('?').next().unwrap_or_default();
        let segs: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
        let ok = |v: Value| Ok((200, v));
        match (req.method, segs.as_slice()) {
            (Method::Get, ["session"]) => ok(to_json(&session)),
            (Method::Get, ["servers", server, "tasks"]) => {
                let server = self.read_server(&session, server)?;
                ok(to_json(&self.adapter.live_tasks(&server)?.0))
            }
            (Method::Get, ["servers", server, "channels"]) => {
                let server = self.read_server(&session, server)?;
                ok(to_json(&self.adapter.list_channels(&server)?))
            }
            (Method::Get, ["servers", server, "proposals"]) => {
                let server = self.read_server(&session, server)?;
                ok(self.list_proposals(&server)?)
            }
            (Method::Post, ["servers", server, "proposals"]) => {
                let server = self.write_server(&session, server)?;
                Ok((201, self.create_proposal(&session, &server, parse_body(&req.body)?)?))
            }
            (Method::Post, ["servers", server, "playground"]) => {
                let server = self.read_server(&session, server)?;
                ok(self.playground(&server, parse_body(&req.body)?)?)
            }
            (Method::Get, ["proposals", id]) => {
                let (proposal, rev) = self.load_proposal(id)?;
                self.authorize(&session, &proposal.server, false)?;
                ok(self.view(&proposal, rev))
            }
            (Method::Post, ["proposals", id, "test"]) => {
                let body: DraftBody = self.authorized_body(&session, id, &req.body)?;
                self.mutate(&session, id, |svc, p| {
                    let live = svc.adapter.live_tasks(&p.server)?.0;
                    let engine = svc.engine_for(&p.server)?;
                    let report = test_and_generate(p, &live, body.draft, &engine, svc.adapter.gateway(), &svc.thresholds)?;
                    Ok((to_json(report), None))
                })
                .and_then(|(report, p, _)| {
                    self.index_cases(&p)?;
                    Ok((200, report))
                })
            }
            (Method::Post, ["proposals", id, "edits"]) => {
                let body: SaveBody = self.authorized_body(&session, id, &req.body)?;
                let now = self.clock.now();
                let (version, p, rev) = self.mutate(&session, id, |svc, p| {
                    let notice = p.save_edit(body.draft, &body.report_hash, &session.user, &svc.thresholds, now)?;
                    let version = p.edit_versions.len() - 1;
                    Ok((version, Some(notice)))
                })?;
                ok(json!({ "version": version, "proposal": self.view(&p, rev) }))
            }
            (Method::Post, ["proposals", id, "cases"]) => {
                let body: MessageBody = self.authorized_body(&session, id, &req.body)?;
                let (case_id, p, _) = self.mutate(&session, id, |svc, p| {
                    svc.require_channel(&p.server, &body.channel)?;
                    Ok((p.add_manual_case(body.channel, &body.message)?, None))
                })?;
                self.index_cases(&p)?;
                Ok((201, json!({ "case_id": case_id })))
            }
            (Method::Post, ["proposals", id, "deploy-votes"]) => {
                let body: DeployVoteBody = self.authorized_body(&session, id, &req.body)?;
                let (ups, _, _) = self.mutate(&session, id, |_, p| Ok((p.vote_deploy(&session.user, body.direction)?, None)))?;
                ok(json!({ "deploy_upvotes": ups, "deployment_threshold": self.thresholds.deployment_threshold }))
            }
            (Method::Post, ["proposals", id, "deploy"]) => ok(self.deploy(&session, id)?),
            (Method::Post, ["proposals", id, "status"]) => {
                let body: StatusBody = self.authorized_body(&session, id, &req.body)?;
                let (_, p, rev) = self.mutate(&session, id, |_, p| Ok(((), p.set_status(body.status)?)))?;
                ok(self.view(&p, rev))
            }
            (Method::Post, ["proposals", id, "revert"]) => {
                let body: RevertBody = self.authorized_body(&session, id, &req.body)?;
                let now = self.clock.now();
                let (_, p, rev) = self.mutate(&session, id, |svc, p| {
                    let live = svc.adapter.live_tasks(&p.server)?.0;
                    let notice = p.revert_to(body.version, &session.user, &live, svc.adapter.gateway(), now)?;
                    Ok(((), Some(notice)))
                })?;
                ok(self.view(&p, rev))
            }
            (Method::Post, ["cases", case, "votes"]) => {
                let index = self.case_index(case)?;
                self.authorize(&session, &index.server, true)?;
                let body: CaseVoteBody = parse_body(&req.body)?;
                let vote = match body.direction {
                    CaseDirection::Up => Some(Vote::Up),
                    CaseDirection::Down => Some(Vote::Down),
                    CaseDirection::None => None,
                };
                let ((ups, downs), p, _) = self.mutate(&session, index.proposal.as_str(), |_, p| {
                    Ok((p.vote_case(&session.user, &index.case, vote)?, None))
                })?;
                ok(json!({
                    "case_id": index.case,
                    "ups": ups,
                    "downs": downs,
                    "status": p.case(&index.case).map(|c| c.status()).unwrap_or(CaseStatus::Tbd),
                    "counters": p.counters(),
                }))
            }
            (method, segs) => {
                let known = ROUTES.iter().any(|(_, pattern)| matches_pattern(pattern, segs));
                if known {
                    Err(ApiError::new(405, "method_not_allowed", format!("{method:?} not allowed on {path}")))
                } else {
                    Err(ApiError::not_found(format!("route {path}")))
                }
            }
        }
    }

    fn authorize(&self, session: &Session, server: &ServerId, write: bool) -> Result<(), ApiError> {
        let role = session.role_in(server).ok_or_else(|| ApiError::forbidden(server))?;
        if write && role < self.write_role {
            return Err(ApiError::new(403, "insufficient_role", format!("changes on {server} need the admin role")));
        }
        Ok(())
    }

    fn read_server(&self, session: &Session, raw: &str) -> Result<ServerId, ApiError> {
        let server = ServerId::from(raw);
        self.authorize(session, &server, false)?;
        Ok(server)
    }

    fn write_server(&self, session: &Session, raw: &str) -> Result<ServerId, ApiError> {
        let server = ServerId::from(raw);
        self.authorize(session, &server, true)?;
        Ok(server)
    }

    /// Checks write access to the proposal before looking at the body, so an
    /// outsider gets 403 whatever they send.
    fn authorized_body<T: DeserializeOwned>(&self, session: &Session, id: &str, body: &Value) -> Result<T, ApiError> {
        let (proposal, _) = self.load_proposal(id)?;
        self.authorize(session, &proposal.server, true)?;
        parse_body(body)
    }

    fn load_proposal(&self, id: &str) -> Result<(Proposal, u64), ApiError> {
        load_doc(self.adapter.store().as_ref(), Collection::Proposals, id).map_err(|e| match e {
            StoreError::NotFound { .. } | StoreError::InvalidId(_) => ApiError::not_found(format!("proposal {id}")),
            other => other.into(),
        })
    }

    fn case_index(&self, id: &str) -> Result<CaseIndex, ApiError> {
        match load_doc(self.adapter.store().as_ref(), Collection::Cases, id) {
            Ok((index, _)) => Ok(index),
            Err(StoreError::NotFound { .. } | StoreError::InvalidId(_)) => Err(ApiError::not_found(format!("case {id}"))),
            Err(e) => Err(e.into()),
        }
    }

    fn index_cases(&self, proposal: &Proposal) -> Result<(), ApiError> {
        let store = self.adapter.store();
        let pending = proposal.pending_report.iter().flat_map(|r| r.generated.iter().map(|g| &g.case_id));
        for case in proposal.saved_cases.iter().map(|c| &c.id).chain(pending) {
            let index = CaseIndex {
                case: case.clone(),
                proposal: proposal.id.clone(),
                server: proposal.server.clone(),
            };
            match save_doc(store.as_ref(), Collection::Cases, case.as_str(), &index, None) {
                Ok(_) | Err(StoreError::Conflict { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(())
    }

    /// Serialized read-modify-write of one proposal. The closure's notice is
    /// posted after the write succeeds.
    fn mutate<R>(
        &self,
        session: &Session,
        id: &str,
        f: impl FnOnce(&Self, &mut Proposal) -> Result<(R, Option<Notice>), ApiError>,
    ) -> Result<(R, Proposal, u64), ApiError> {
        let lock = lock_for(&self.proposal_locks, &ProposalId::from(id));
        let _guard = lock.lock().expect("proposal lock");
        let (mut proposal, rev) = self.load_proposal(id)?;
        self.authorize(session, &proposal.server, true)?;
        let (result, notice) = f(self, &mut proposal)?;
        let store = self.adapter.store();
        let mut rev = save_doc(store.as_ref(), Collection::Proposals, id, &proposal, Some(rev))?;
        if let Some(notice) = notice {
            rev = self.notify(&mut proposal, &notice, rev)?;
        }
        Ok((result, proposal, rev))
    }

    /// Posts a notice; persists the proposal again if the thread changed.
    fn notify(&self, proposal: &mut Proposal, notice: &Notice, rev: u64) -> Result<u64, ApiError> {
        let thread_before = proposal.thread_ref.clone();
        match self.adapter.notify(proposal, notice) {
            Ok(anomalies) => {
                for a in anomalies {
                    tracing::warn!(proposal = %proposal.id, code = %a.code, "{}", a.detail);
                }
            }
            Err(e) => tracing::warn!(proposal = %proposal.id, error = %e, "notification failed"),
        }
        if proposal.thread_ref != thread_before {
            let store = self.adapter.store();
            return Ok(save_doc(store.as_ref(), Collection::Proposals, proposal.id.as_str(), proposal, Some(rev))?);
        }
        Ok(rev)
    }

    fn view(&self, proposal: &Proposal, revision: u64) -> Value {
        to_json(&ProposalView {
            proposal,
            revision,
            counters: proposal.counters(),
            case_statuses: proposal.saved_cases.iter().map(|c| (&c.id, c.status())).collect(),
            deploy_upvotes: proposal.deploy_upvotes(),
            deployment_threshold: self.thresholds.deployment_threshold,
        })
    }

    fn list_proposals(&self, server: &ServerId) -> Result<Value, ApiError> {
        self.adapter.live_tasks(server)?;
        let records = self.adapter.store().list(Collection::Proposals)?;
        let mut out = Vec::new();
        for record in records {
            let p: Proposal = serde_json::from_value(record.body)
                .map_err(|e| ApiError::new(500, "store_error", format!("proposal {}: {e}", record.id)))?;
            if &p.server != server {
                continue;
            }
            out.push(to_json(&ProposalSummary {
                id: &p.id,
                title: &p.title,
                author: &p.author,
                status: p.status,
                latest_version: p.latest().version,
                counters: p.counters(),
                deploy_upvotes: p.deploy_upvotes(),
            }));
        }
        Ok(Value::Array(out))
    }

    fn create_proposal(&self, session: &Session, server: &ServerId, body: CreateBody) -> Result<Value, ApiError> {
        let (live, _) = self.adapter.live_tasks(server)?;
        if let Some(seed) = &body.seed {
            self.require_channel(server, &seed.channel)?;
        }
        let store = self.adapter.store();
        let id = ProposalId(next_id(store.as_ref(), Collection::Proposals, "prop")?);
        let (mut proposal, notice) = Proposal::create(
            id.clone(),
            server.clone(),
            &body.title,
            &body.description,
            body.draft,
            body.seed,
            session.user.clone(),
            &live,
            self.clock.now(),
        )?;
        let lock = lock_for(&self.proposal_locks, &id);
        let _guard = lock.lock().expect("proposal lock");
        let rev = save_doc(store.as_ref(), Collection::Proposals, id.as_str(), &proposal, None)?;
        let rev = self.notify(&mut proposal, &notice, rev)?;
        self.index_cases(&proposal)?;
        tracing::info!(proposal = %id, %server, "proposal created");
        Ok(self.view(&proposal, rev))
    }

    fn deploy(&self, session: &Session, id: &str) -> Result<Value, ApiError> {
        let lock = lock_for(&self.proposal_locks, &ProposalId::from(id));
        let _guard = lock.lock().expect("proposal lock");
        let (mut proposal, rev) = self.load_proposal(id)?;
        self.authorize(session, &proposal.server, true)?;
        let server = proposal.server.clone();
        let store = self.adapter.store();
        let task_lock = self.adapter.task_lock(&server);
        let task_guard = task_lock.lock().expect("task lock");
        let (live, live_rev) = self.adapter.live_tasks(&server)?;
        let (next, notice) = proposal.deploy(&live, &self.thresholds)?;
        let new_live_rev = save_doc(store.as_ref(), Collection::Tasks, server.as_str(), &next, Some(live_rev))?;
        let rev = match save_doc(store.as_ref(), Collection::Proposals, id, &proposal, Some(rev)) {
            Ok(rev) => rev,
            Err(e) => {
                save_doc(store.as_ref(), Collection::Tasks, server.as_str(), &live, Some(new_live_rev))?;
                return Err(e.into());
            }
        };
        drop(task_guard);
        tracing::info!(proposal = %id, %server, version = next.version, "deployed");
        let rev = self.notify(&mut proposal, &notice, rev)?;
        Ok(json!({ "task_set": next, "proposal": self.view(&proposal, rev) }))
    }

    fn playground(&self, server: &ServerId, body: MessageBody) -> Result<Value, ApiError> {
        self.require_channel(server, &body.channel)?;
        if body.message.trim().is_empty() {
            return Err(ApiError::invalid("message is empty"));
        }
        let (live, _) = self.adapter.live_tasks(server)?;
        let outcome = run_case(&live, &body.channel, &body.message, self.adapter.gateway());
        if let Some(error) = outcome.error {
            return Err(ApiError::new(502, "provider_error", error));
        }
        Ok(json!({ "triggered_task": outcome.triggered_task, "bot_response": outcome.bot_response }))
    }

    fn require_channel(&self, server: &ServerId, channel: &ChannelName) -> Result<(), ApiError> {
        if self.adapter.list_channels(server)?.contains(channel) {
            Ok(())
        } else {
            Err(ApiError::invalid(format!("unknown channel {channel}")))
        }
    }

    fn engine_for(&self, server: &ServerId) -> Result<Arc<ProvocationEngine>, ApiError> {
        let channels = self.adapter.list_channels(server)?;
        let store = self.adapter.store();
        let description = load_doc::<ServerDoc>(store.as_ref(), Collection::Servers, server.as_str())?
            .0
            .community_description;
        let assets = match description {
            Some(d) => PromptAssets::with_community(&channels, &d)?,
            None => PromptAssets::for_channels(&channels)?,
        };
        let mut engines = self.engines.lock().expect("engine cache");
        if let Some((_, engine)) = engines.iter().find(|(a, _)| a == &assets) {
            return Ok(engine.clone());
        }
        let engine = Arc::new(ProvocationEngine::new(assets.clone(), self.engine_config));
        engines.push((assets, engine.clone()));
        Ok(engine)
    }
}

fn matches_pattern(pattern: &str, segs: &[&str]) -> bool {
    let parts: Vec<&str> = pattern.split('/').filter(|s| !s.is_empty()).collect();
    parts.len() == segs.len() && parts.iter().zip(segs).all(|(p, s)| p.starts_with(':') || p == s)
}

/// Fills a route pattern's placeholders.
pub fn fill_route(pattern: &str, server: &str, proposal: &str, case: &str) -> String {
    pattern
        .replace(":server", server)
        .replace(":proposal", proposal)
        .replace(":case", case)
}
