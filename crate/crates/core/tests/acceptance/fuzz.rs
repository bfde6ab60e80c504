use std::panic::{catch_unwind, AssertUnwindSafe};

use botender_core::gateway::envelope::{parse_envelope_bytes, EnvelopeSchema};
use botender_core::PipelineKind;
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

use crate::{Outcome, FUZZ_INPUTS};

fn schemas() -> Vec<EnvelopeSchema> {
    let mut v = vec![EnvelopeSchema::TaskId, EnvelopeSchema::TaskResponse, EnvelopeSchema::Evaluation, EnvelopeSchema::Selection];
    for k in PipelineKind::ALL {
        v.push(EnvelopeSchema::FindingList(k));
        v.push(EnvelopeSchema::CandidateList(Some(k)));
    }
    v.push(EnvelopeSchema::CandidateList(None));
    v
}

/// Well-formed outputs to mutate, one or more per schema.
const SEEDS: &[&str] = &[
    r#"{"taskId": "merch-link"}"#,
    r#"{"response": "Here is your reply."}"#,
    r#"{"label": true, "label_explanation": "fits"}"#,
    r#"[{"caseId": "0", "selection_reason": "sharp"}, {"caseId": "3", "selection_reason": "edge"}]"#,
    r#"{"0": {"underspecified_phrase": "events", "description": "which ones"}}"#,
    r#"{"items": [{"broader_goal": "g", "overspecified_phrase": "p", "uncovered_scenarios": "s"}]}"#,
    r#"```json
[{"problematic_phrase": "p", "consequence": "c"}]
```"#,
    r##"Sure! [{"underspecified_phrase": "p", "interpretation": "i", "reasoning": "r", "case": {"channel": "#general", "user_message": "hi"}}]"##,
    r##"{"test_cases": [{"uncovered_scenario": "s", "reasoning": "r", "case": {"channel": "#general", "user_message": "m"}}]}"##,
    r##"[{"reasoning": "r", "case": {"channel": "#intro", "user_message": "hello é 😀"}}]"##,
];

#[derive(Debug, Clone)]
enum Edit {
    Flip(usize, u8),
    Delete(usize, usize),
    Insert(usize, Vec<u8>),
    Truncate(usize),
    Repeat(usize, usize),
}

fn edit() -> impl Strategy<Value = Edit> {
    prop_oneof![
        (any::<usize>(), any::<u8>()).prop_map(|(i, b)| Edit::Flip(i, b)),
        (any::<usize>(), 0usize..16).prop_map(|(i, n)| Edit::Delete(i, n)),
        (
            any::<usize>(),
            vec(prop_oneof![any::<u8>(), Just(b'{'), Just(b'}'), Just(b'['), Just(b'"'), Just(b',')], 1..8)
        )
            .prop_map(|(i, b)| Edit::Insert(i, b)),
        any::<usize>().prop_map(Edit::Truncate),
        (any::<usize>(), 1usize..50).prop_map(|(i, n)| Edit::Repeat(i, n)),
    ]
}

fn mutate(seed: &str, edits: &[Edit]) -> Vec<u8> {
    let mut b = seed.as_bytes().to_vec();
    for e in edits {
        let at = |i: usize, len: usize| if len == 0 { 0 } else { i % (len + 1) };
        match e {
            Edit::Flip(i, x) if !b.is_empty() => {
                let i = i % b.len();
                b[i] ^= x;
            }
            Edit::Delete(i, n) => {
                let i = at(*i, b.len());
                let end = (i + n).min(b.len());
                b.drain(i..end);
            }
            Edit::Insert(i, bytes) => {
                let i = at(*i, b.len());
                b.splice(i..i, bytes.iter().copied());
            }
            Edit::Truncate(i) => b.truncate(at(*i, b.len())),
            Edit::Repeat(i, n) => {
                let i = at(*i, b.len());
                let chunk = b[i..].to_vec();
                for _ in 0..*n {
                    b.extend_from_slice(&chunk);
                }
                b.truncate(1 << 16);
            }
            _ => {}
        }
    }
    b
}

fn input() -> impl Strategy<Value = (usize, Vec<u8>)> {
    let n = schemas().len();
    prop_oneof![
        (0..n, vec(any::<u8>(), 0..512)),
        (0..n, 0..SEEDS.len(), vec(edit(), 1..6)).prop_map(|(s, i, e)| (s, mutate(SEEDS[i], &e))),
        (0..n, "\\PC{0,200}").prop_map(|(s, text)| (s, text.into_bytes())),
        // Deep nesting.
        (0..n, 1usize..4000).prop_map(|(s, depth)| (s, format!("{}{}", "[{\"a\":".repeat(depth), "1").into_bytes())),
    ]
}

pub fn check() -> Outcome {
    let schemas = schemas();
    let mut runner = TestRunner::deterministic();
    let strategy = input();
    let (mut ok, mut err, mut panics) = (0, 0, 0);
    let mut first_panic = None;
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    for _ in 0..FUZZ_INPUTS {
        let (s, bytes) = strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        match catch_unwind(AssertUnwindSafe(|| parse_envelope_bytes(&bytes, schemas[s]))) {
            Ok(Ok(_)) => ok += 1,
            Ok(Err(_)) => err += 1,
            Err(_) => {
                panics += 1;
                first_panic.get_or_insert_with(|| String::from_utf8_lossy(&bytes).chars().take(120).collect::<String>());
            }
        }
    }
    std::panic::set_hook(hook);
    if panics > 0 {
        return Err(format!("{panics} panics, first input {:?}", first_panic.unwrap()));
    }
    Ok(format!("{FUZZ_INPUTS} inputs: {ok} parsed, {err} typed errors, 0 panics"))
}
