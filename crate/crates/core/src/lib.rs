//! Core of a collaboratively governed community bot.
//!
//! Community members propose natural-language tasks (a trigger and an
//! action), test them against generated provocation cases, vote, and deploy.

pub mod agent;
pub mod gateway;
pub mod harness;
pub mod prompts;
pub mod provocation;
pub mod platform;
pub mod script;
pub mod service;
pub mod store;
pub mod workflow;
pub mod types;

pub use agent::{BotReply, PromptAssets, Task, TaskSet, UserMessage};
pub use gateway::{Gateway, ScriptEntry, ScriptedProvider};
pub use provocation::{CaseCandidate, EngineConfig, EngineReport, PromptUnderTest, ProvocationEngine};
pub use types::*;
