//! Bounded exhaustive exploration of the proposal state machine.
//!
//! Every action is tried from every reachable state up to a fixed depth.
//! States are deduplicated modulo user renaming and modulo vote sequence
//! numbers (only whether a vote is newer than the pending report matters).

use std::collections::{BTreeMap, HashSet};

use botender_core::provocation::{CaseCandidate, Execution, PromptUnderTest, Provenance};
use botender_core::workflow::{
    apply_changes, case_status, draft_hash, CaseOutcome, CaseStatus, Proposal, ProposalStatus, TaskChange, Vote,
    WorkflowConfig,
};
use botender_core::{CaseId, ChannelName, ProposalId, ServerId, Task, TaskId, TaskSet, Timestamp, UserId};

pub const USERS: [&str; 3] = ["ana", "ben", "cy"];
pub const MAX_EDITS: usize = 2;
pub const MAX_CASES: usize = 4;

#[derive(Debug, Clone)]
enum Action {
    Test(usize),
    VoteCase(usize, CaseId, Option<Vote>),
    AddManual,
    Save(usize, usize),
    VoteDeploy(usize, Vote),
    Deploy,
    Close,
    Reopen,
}

pub struct Scope {
    pub config: WorkflowConfig,
    /// Named starting point, see [`seed`].
    pub seed: usize,
    pub depth: usize,
}

#[derive(Debug, Default)]
pub struct Stats {
    pub states: usize,
    pub transitions: usize,
    pub saves: usize,
    pub deploys: usize,
    pub gate_rejections: usize,
    pub violations: Vec<String>,
}

fn user(i: usize) -> UserId {
    UserId::from(USERS[i])
}

fn live() -> TaskSet {
    TaskSet::new(
        ServerId::from("srv"),
        vec![Task::new(
            "hello",
            "Hello Botender",
            "When someone greets Botender in the #botender channel.",
            "Reply with a hello and a smiling emoji.",
        )
        .unwrap()],
        1,
    )
    .unwrap()
}

fn drafts() -> [Vec<TaskChange>; 2] {
    let merch = |action: &str| {
        vec![TaskChange::Add {
            task: Task::new("merch", "Merch Link", "When someone asks where to buy merch.", action).unwrap(),
        }]
    };
    [
        merch("Share the link to the official merch store."),
        merch("Share the store link and mention the shipping times."),
    ]
}

fn general() -> ChannelName {
    ChannelName::parse("#general").unwrap()
}

fn candidate(n: u64) -> (TaskId, CaseCandidate) {
    (
        TaskId::from("merch"),
        CaseCandidate {
            prompt: PromptUnderTest::new("t", "a").unwrap(),
            provenance: Provenance::Baseline,
            reasoning: "r".into(),
            channel: general(),
            user_message: format!("generated message {n}"),
            execution: Some(Execution {
                triggered_task: Some("Merch Link".into()),
                bot_response: Some("shop.example".into()),
            }),
            evaluation: None,
            selection_reason: None,
        },
    )
}

fn start() -> Proposal {
    Proposal::create(
        ProposalId::from("prop-0001"),
        ServerId::from("srv"),
        "Merch Link",
        "",
        drafts()[0].clone(),
        None,
        user(0),
        &live(),
        Timestamp(0),
    )
    .unwrap()
    .0
}

fn c(n: u64) -> CaseId {
    CaseId(format!("prop-0001-c{n}"))
}

/// Action prefixes leading deeper into the machine: the fresh proposal, a
/// tested draft with three case votes, a saved edit with two deploy votes,
/// and a second saved edit with a manual case pending.
fn seed(i: usize) -> Vec<Action> {
    use Action::*;
    let voted = vec![
        Test(0),
        VoteCase(0, c(1), Some(Vote::Up)),
        VoteCase(1, c(1), Some(Vote::Up)),
        VoteCase(2, c(1), Some(Vote::Down)),
    ];
    let saved = [voted.clone(), vec![Save(0, 0), VoteDeploy(0, Vote::Up), VoteDeploy(1, Vote::Up)]].concat();
    let second = [saved.clone(), vec![Test(1), VoteCase(1, c(2), Some(Vote::Up)), Save(1, 1), AddManual]].concat();
    match i {
        0 => Vec::new(),
        1 => voted,
        2 => saved,
        _ => second,
    }
}

fn actions(p: &Proposal) -> Vec<Action> {
    let mut out = vec![Action::Test(0), Action::Test(1), Action::Deploy, Action::Close, Action::Reopen];
    if p.saved_cases.len() < MAX_CASES {
        out.push(Action::AddManual);
    }
    let mut cases: Vec<CaseId> = p.saved_cases.iter().map(|c| c.id.clone()).collect();
    if let Some(r) = &p.pending_report {
        cases.extend(r.generated.iter().map(|g| g.case_id.clone()));
    }
    for u in 0..USERS.len() {
        for c in &cases {
            for v in [Some(Vote::Up), Some(Vote::Down), None] {
                out.push(Action::VoteCase(u, c.clone(), v));
            }
        }
        if p.edit_versions.len() <= MAX_EDITS {
            out.push(Action::Save(u, 0));
            out.push(Action::Save(u, 1));
        }
        out.push(Action::VoteDeploy(u, Vote::Up));
        out.push(Action::VoteDeploy(u, Vote::Down));
    }
    out
}

/// Runs the action, returning whether it succeeded.
fn apply(p: &mut Proposal, action: &Action, config: &WorkflowConfig) -> Result<(), String> {
    let drafts = drafts();
    let r = match action {
        Action::Test(d) => {
            let regression = p
                .saved_cases
                .iter()
                .map(|c| {
                    (
                        c.id.clone(),
                        CaseOutcome {
                            triggered_task: Some("Merch Link".into()),
                            bot_response: Some(format!("reply under draft {d}")),
                            error: None,
                        },
                    )
                })
                .collect();
            let generated = if p.saved_cases.len() < MAX_CASES {
                vec![candidate(p.next_case)]
            } else {
                Vec::new()
            };
            p.attach_report(drafts[*d].clone(), regression, generated, Vec::new(), Vec::new())
                .map(|_| ())
        }
        Action::VoteCase(u, c, v) => p.vote_case(&user(*u), c, *v).map(|_| ()),
        Action::AddManual => p.add_manual_case(general(), "manual case").map(|_| ()),
        Action::Save(u, d) => p
            .save_edit(drafts[*d].clone(), &draft_hash(&drafts[*d]), &user(*u), config, Timestamp(0))
            .map(|_| ()),
        Action::VoteDeploy(u, v) => p.vote_deploy(&user(*u), *v).map(|_| ()),
        Action::Deploy => p.deploy(&live(), config).map(|_| ()),
        Action::Close => p.set_status(ProposalStatus::Closed).map(|_| ()),
        Action::Reopen => p.set_status(ProposalStatus::Open).map(|_| ()),
    };
    r.map_err(|e| e.to_string())
}

/// Save oracle written against the rules, not the implementation.
fn save_allowed(p: &Proposal, d: usize, author: &UserId, config: &WorkflowConfig) -> bool {
    let Some(report) = &p.pending_report else {
        return false;
    };
    let draft = &drafts()[d];
    if p.status != ProposalStatus::Open || report.hash != draft_hash(draft) || report.base_version != p.edit_versions.len() {
        return false;
    }
    let report_cases: HashSet<&CaseId> = report
        .regression
        .iter()
        .map(|r| &r.case_id)
        .chain(report.generated.iter().map(|g| &g.case_id))
        .collect();
    // Every case that needs a response at the new version must be in the report.
    let version = p.edit_versions.len();
    if p
        .saved_cases
        .iter()
        .any(|c| c.created_at_version <= version && !report_cases.contains(&c.id))
    {
        return false;
    }
    let fresh = p
        .saved_cases
        .iter()
        .filter(|c| report_cases.contains(&c.id))
        .filter(|c| c.votes.get(author).is_some_and(|v| v.seq > report.vote_seq))
        .count() as u32;
    fresh >= config.save_vote_gate
}

fn has_case_vote(p: &Proposal, u: &UserId) -> bool {
    p.saved_cases.iter().any(|c| c.votes.contains_key(u))
}

fn deploy_allowed(p: &Proposal, config: &WorkflowConfig) -> bool {
    let ups = p.deploy_votes.values().filter(|v| **v == Vote::Up).count() as u32;
    p.status == ProposalStatus::Open && ups >= config.deployment_threshold && apply_changes(&live(), &p.latest().changes).is_ok()
}

fn check_state(p: &Proposal, violations: &mut Vec<String>, trace: &str) {
    // Brute-force tally.
    let (mut good, mut bad, mut tbd) = (0, 0, 0);
    for c in &p.saved_cases {
        let ups = c.votes.values().filter(|v| v.direction == Vote::Up).count();
        let downs = c.votes.len() - ups;
        let expected = if ups > downs {
            good += 1;
            CaseStatus::Good
        } else if downs > ups {
            bad += 1;
            CaseStatus::Bad
        } else {
            tbd += 1;
            CaseStatus::Tbd
        };
        if c.status() != expected || case_status(ups as u32, downs as u32) != expected {
            violations.push(format!("status of {} after {trace}", c.id));
        }
    }
    let counters = p.counters();
    if (counters.good, counters.bad, counters.tbd) != (good, bad, tbd)
        || counters.good + counters.bad + counters.tbd != p.saved_cases.len()
    {
        violations.push(format!("counters {counters:?} after {trace}"));
    }
    // Regression completeness: one response per saved version since the
    // case was created.
    let latest = p.edit_versions.len() - 1;
    for c in &p.saved_cases {
        let got: Vec<usize> = c.response_history.iter().map(|r| r.version).collect();
        let want: Vec<usize> = (c.created_at_version..=latest).collect();
        if got != want {
            violations.push(format!("history of {} is {got:?}, want {want:?} after {trace}", c.id));
        }
    }
    if p.edit_versions.len() > MAX_EDITS + 1 {
        violations.push(format!("edit bound exceeded after {trace}"));
    }
}

/// Canonical key: minimum over user permutations, vote seqs replaced by
/// freshness relative to the pending report.
fn key(p: &Proposal) -> String {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let base = p.pending_report.as_ref().map(|r| r.vote_seq);
    PERMS
        .iter()
        .map(|perm| {
            let rename = |u: &UserId| {
                let i = USERS.iter().position(|n| *n == u.as_str()).expect("known user");
                user(perm[i])
            };
            let mut q = p.clone();
            for c in &mut q.saved_cases {
                c.votes = c
                    .votes
                    .iter()
                    .map(|(u, v)| {
                        let mut v = v.clone();
                        v.seq = u64::from(base.is_some_and(|b| v.seq > b));
                        (rename(u), v)
                    })
                    .collect::<BTreeMap<_, _>>();
            }
            q.deploy_votes = q.deploy_votes.iter().map(|(u, v)| (rename(u), *v)).collect();
            for e in &mut q.edit_versions {
                e.author = rename(&e.author);
            }
            q.author = rename(&q.author);
            q.vote_seq = 0;
            if let Some(r) = &mut q.pending_report {
                r.vote_seq = 0;
            }
            serde_json::to_string(&q).unwrap()
        })
        .min()
        .unwrap()
}

pub fn explore(scope: &Scope) -> Stats {
    let mut stats = Stats::default();
    let mut root = start();
    let config = WorkflowConfig {
        save_vote_gate: 1,
        ..scope.config
    };
    for action in seed(scope.seed) {
        // Prefixes are built under the default gates.
        if let Err(e) = apply(&mut root, &action, &config) {
            stats.violations.push(format!("seed {} step {action:?} failed: {e}", scope.seed));
            return stats;
        }
    }
    let mut seen = HashSet::from([key(&root)]);
    let mut frontier = vec![root];
    check_state(&frontier[0], &mut stats.violations, "create");
    for _ in 0..scope.depth {
        let mut next = Vec::new();
        for p in &frontier {
            for action in actions(p) {
                stats.transitions += 1;
                let mut q = p.clone();
                let result = apply(&mut q, &action, &scope.config);
                let trace = format!("{action:?}");
                match &action {
                    Action::Save(u, d) => {
                        let allowed = save_allowed(p, *d, &user(*u), &scope.config);
                        if allowed != result.is_ok() {
                            stats.violations.push(format!("save allowed={allowed} got {result:?} at {trace}"));
                        }
                        if result.is_ok() {
                            stats.saves += 1;
                        }
                    }
                    Action::VoteDeploy(u, _) => {
                        let allowed = p.status == ProposalStatus::Open && has_case_vote(p, &user(*u));
                        if allowed != result.is_ok() {
                            stats.violations.push(format!("deploy vote allowed={allowed} got {result:?}"));
                        }
                    }
                    Action::Deploy => {
                        let allowed = deploy_allowed(p, &scope.config);
                        if allowed != result.is_ok() {
                            stats.violations.push(format!("deploy allowed={allowed} got {result:?}"));
                        }
                        if result.is_ok() {
                            stats.deploys += 1;
                            if q.status != ProposalStatus::Deployed {
                                stats.violations.push("deploy left status open".into());
                            }
                        }
                    }
                    _ => {}
                }
                match result {
                    Err(e) => {
                        if e.contains("not met") {
                            stats.gate_rejections += 1;
                        }
                        if &q != p {
                            stats.violations.push(format!("failed {trace} changed state"));
                        }
                    }
                    Ok(()) => {
                        check_state(&q, &mut stats.violations, &trace);
                        if seen.insert(key(&q)) {
                            next.push(q);
                        }
                    }
                }
            }
        }
        stats.states += frontier.len();
        frontier = next;
    }
    stats.states += frontier.len();
    stats
}
