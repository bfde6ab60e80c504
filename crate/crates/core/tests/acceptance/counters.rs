use std::collections::HashMap;

use botender_core::workflow::{CaseStatus, Proposal, TaskChange, Vote};
use botender_core::{ChannelName, ProposalId, ServerId, Task, TaskSet, Timestamp, UserId};
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

use crate::{Outcome, COUNTER_MAX_VOTERS, COUNTER_TRIALS};

/// One vote event: (voter, case index, Some(up?) or a retraction).
type Event = (usize, usize, Option<bool>);

fn trial() -> impl Strategy<Value = (usize, Vec<Event>)> {
    (1usize..=4).prop_flat_map(|cases| {
        (
            Just(cases),
            vec((0..COUNTER_MAX_VOTERS, 0..cases, proptest::option::of(any::<bool>())), 0..40),
        )
    })
}

fn fresh(cases: usize) -> Proposal {
    let live = TaskSet::new(ServerId::from("srv"), vec![botender_core::platform::hello_task()], 1).unwrap();
    let draft = vec![TaskChange::Add {
        task: Task::new("merch", "Merch Link", "When someone asks about merch.", "Link the store.").unwrap(),
    }];
    let (mut p, _) = Proposal::create(
        ProposalId::from("prop-0001"),
        ServerId::from("srv"),
        "Merch",
        "",
        draft,
        None,
        UserId::from("u0"),
        &live,
        Timestamp(0),
    )
    .unwrap();
    for i in 0..cases {
        p.add_manual_case(ChannelName::parse("#general").unwrap(), &format!("case {i}"))
            .unwrap();
    }
    p
}

pub fn check() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let strategy = trial();
    let mut mismatches = 0;
    let mut first = None;
    let mut total_votes = 0;
    for t in 0..COUNTER_TRIALS {
        let (cases, events) = strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let mut p = fresh(cases);
        let ids: Vec<_> = p.saved_cases.iter().map(|c| c.id.clone()).collect();
        // Brute force: replay into a plain table, last event per pair wins.
        let mut table: HashMap<(usize, usize), bool> = HashMap::new();
        for &(voter, case, vote) in &events {
            let v = vote.map(|up| if up { Vote::Up } else { Vote::Down });
            p.vote_case(&UserId(format!("u{voter}")), &ids[case], v).map_err(|e| e.to_string())?;
            match vote {
                Some(up) => table.insert((voter, case), up),
                None => table.remove(&(voter, case)),
            };
        }
        total_votes += table.len();
        let (mut good, mut bad, mut tbd) = (0, 0, 0);
        for (i, id) in ids.iter().enumerate() {
            let ups = table.iter().filter(|((_, c), up)| *c == i && **up).count() as u32;
            let downs = table.iter().filter(|((_, c), up)| *c == i && !**up).count() as u32;
            let expected = if ups > downs {
                good += 1;
                CaseStatus::Good
            } else if ups < downs {
                bad += 1;
                CaseStatus::Bad
            } else {
                tbd += 1;
                CaseStatus::Tbd
            };
            let case = p.case(id).unwrap();
            if case.tally() != (ups, downs) || case.status() != expected {
                mismatches += 1;
                first.get_or_insert(format!("trial {t} case {i}: got {:?}, want ({ups}, {downs})", case.tally()));
            }
        }
        let c = p.counters();
        if (c.good, c.bad, c.tbd) != (good, bad, tbd) {
            mismatches += 1;
            first.get_or_insert(format!("trial {t}: counters {c:?}, want ({good}, {bad}, {tbd})"));
        }
    }
    if mismatches > 0 {
        return Err(format!("{mismatches} mismatches, first: {}", first.unwrap()));
    }
    Ok(format!(
        "{COUNTER_TRIALS} random multisets (<= {COUNTER_MAX_VOTERS} voters, {total_votes} standing votes), 0 mismatches"
    ))
}
