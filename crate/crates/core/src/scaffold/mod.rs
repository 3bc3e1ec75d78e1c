//! Inflection-point detection and conversational scaffold delivery.
//!
//! The [`ScaffoldEngine`] watches one student's annotated events as they
//! arrive and matches the previous/current event pair against the nine
//! trigger conditions. Matches become [`Detection`]s; a detection turns into
//! a delivery unless its kind is disabled or another scaffold was delivered
//! too recently. Deliveries are rendered through a [`ConversationTree`].

mod conversation;
mod counts;
mod engine;
mod session;
mod verify;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::AnnotateError;
use crate::causal::{CausalError, CausalLink, ConceptId, PageId};

pub use conversation::{
    bundled_trees, parse_trees, run_conversation, ConversationError, ConversationTree, FirstOption,
    Node, Responder, ResponseOption, Scripted, TranscriptStep, TreeSet,
};
pub use counts::{delivery_counts, KindCounts};
pub use engine::{EngineState, ScaffoldEngine};
pub use session::{LiveSession, PushOutput, SessionRun};
pub use verify::{verify_delivery, verify_spacing};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("event {index} at {timestamp}s arrives before the previous event")]
    OutOfOrderEvent { index: usize, timestamp: f64 },
    #[error("event {index} belongs to `{found}`, not `{expected}`")]
    StudentMismatch {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("event {index} is a quiz but no quiz result was supplied")]
    MissingQuizResult { index: usize },
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error("quiz at event {index}: {source}")]
    Quiz { index: usize, source: CausalError },
    #[error(transparent)]
    Conversation(#[from] ConversationError),
    #[error("invalid engine config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaffoldKind {
    Hint1,
    Hint2,
    Hint3,
    Hint4,
    Hint5,
    Hint6,
    Enc1,
    Enc2,
    Enc3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Agent {
    MrDavis,
    Betty,
}

impl ScaffoldKind {
    pub const ALL: [ScaffoldKind; 9] = [
        ScaffoldKind::Hint1,
        ScaffoldKind::Hint2,
        ScaffoldKind::Hint3,
        ScaffoldKind::Hint4,
        ScaffoldKind::Hint5,
        ScaffoldKind::Hint6,
        ScaffoldKind::Enc1,
        ScaffoldKind::Enc2,
        ScaffoldKind::Enc3,
    ];

    pub fn agent(self) -> Agent {
        match self {
            ScaffoldKind::Hint2 | ScaffoldKind::Enc1 | ScaffoldKind::Enc3 => Agent::Betty,
            _ => Agent::MrDavis,
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ScaffoldKind::Hint1 => "Mark Correct",
            ScaffoldKind::Hint2 => "Assess by Quiz",
            ScaffoldKind::Hint3 => "Mark Wrong",
            ScaffoldKind::Hint4 => "Shortcut Link",
            ScaffoldKind::Hint5 => "Debug from Map",
            ScaffoldKind::Hint6 => "Debug from Read",
            ScaffoldKind::Enc1 => "Praise",
            ScaffoldKind::Enc2 => "Praise & Quiz",
            ScaffoldKind::Enc3 => "Reassure",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScaffoldKind::Hint1 => "hint1",
            ScaffoldKind::Hint2 => "hint2",
            ScaffoldKind::Hint3 => "hint3",
            ScaffoldKind::Hint4 => "hint4",
            ScaffoldKind::Hint5 => "hint5",
            ScaffoldKind::Hint6 => "hint6",
            ScaffoldKind::Enc1 => "enc1",
            ScaffoldKind::Enc2 => "enc2",
            ScaffoldKind::Enc3 => "enc3",
        }
    }
}

impl fmt::Display for ScaffoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ScaffoldKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScaffoldKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown scaffold kind `{s}`"))
    }
}

/// The five inflection-point event pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerRule {
    /// Read-Long -> Edit-Ineff
    LongReadThenIneffEdit,
    /// Edit-Ineff -> Quiz
    IneffEditThenQuiz,
    /// Quiz -> Read-Long
    QuizThenLongRead,
    /// Read-Long -> Edit-Eff
    LongReadThenEffEdit,
    /// Edit-Eff -> Quiz
    EffEditThenQuiz,
}

impl TriggerRule {
    pub fn label(self) -> &'static str {
        match self {
            TriggerRule::LongReadThenIneffEdit => "Read-Long -> Edit-Ineff",
            TriggerRule::IneffEditThenQuiz => "Edit-Ineff -> Quiz",
            TriggerRule::QuizThenLongRead => "Quiz -> Read-Long",
            TriggerRule::LongReadThenEffEdit => "Read-Long -> Edit-Eff",
            TriggerRule::EffEditThenQuiz => "Edit-Eff -> Quiz",
        }
    }
}

/// The event pair (and case) that matched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerContext {
    pub rule: TriggerRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<u8>,
    pub previous_index: usize,
    pub current_index: usize,
    pub previous_timestamp: f64,
    pub current_timestamp: f64,
    /// Deferred Hint1 only: index of the event that closed the follow-up
    /// window, or `None` when the window ran out on the clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_index: Option<usize>,
}

/// Concrete content a scaffold can point at.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TargetHints {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<CausalLink>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concept: Option<ConceptId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page: Option<PageId>,
}

/// A matched trigger: the initiation of a scaffold before any suppression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub kind: ScaffoldKind,
    pub timestamp: f64,
    pub trigger: TriggerContext,
    #[serde(default)]
    pub targets: TargetHints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suppression {
    Disabled,
    TooSoon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub detection: Detection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suppressed: Option<Suppression>,
}

impl Step {
    pub fn delivered(&self) -> bool {
        self.suppressed.is_none()
    }
}

/// One delivered scaffold, as written to delivery logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldDelivery {
    pub student: String,
    pub kind: ScaffoldKind,
    pub agent: Agent,
    pub timestamp: f64,
    pub trigger: TriggerContext,
    #[serde(default)]
    pub targets: TargetHints,
    pub transcript: Vec<TranscriptStep>,
}

/// Engine tuning. Loaded from TOML; every field has a default.
///
/// ```toml
/// min_inter_scaffold_seconds = 60.0
/// hint1_window_events = 5
/// hint1_window_seconds = 120.0
/// long_threshold_seconds = 60.0
/// enc3_every = 3
/// hint3_min_unmarked = 3
///
/// [enabled]
/// hint4 = false
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub min_inter_scaffold_seconds: f64,
    /// Hint1 is delivered unless a link is marked correct within this many
    /// events after the quiz...
    pub hint1_window_events: usize,
    /// ...or this many seconds, whichever runs out first.
    pub hint1_window_seconds: f64,
    /// Reads at least this long count as Read-Long.
    pub long_threshold_seconds: f64,
    /// Among Edit-Ineff -> Quiz occasions not claimed by Hint3/Hint4, every
    /// n-th one reassures (Enc3) and the rest debug (Hint5).
    pub enc3_every: u32,
    /// Hint3 needs at least this many incorrect, unmarked links edited since
    /// the previous quiz.
    pub hint3_min_unmarked: usize,
    /// Per-kind switches; kinds not listed are enabled.
    pub enabled: BTreeMap<ScaffoldKind, bool>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            min_inter_scaffold_seconds: 60.0,
            hint1_window_events: 5,
            hint1_window_seconds: 120.0,
            long_threshold_seconds: 60.0,
            enc3_every: 3,
            hint3_min_unmarked: 3,
            enabled: BTreeMap::new(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let positive = [
            (
                "min_inter_scaffold_seconds",
                self.min_inter_scaffold_seconds,
            ),
            ("hint1_window_seconds", self.hint1_window_seconds),
            ("long_threshold_seconds", self.long_threshold_seconds),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(EngineError::Config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.hint1_window_events == 0 {
            return Err(EngineError::Config(
                "hint1_window_events must be positive".into(),
            ));
        }
        if self.enc3_every == 0 {
            return Err(EngineError::Config("enc3_every must be positive".into()));
        }
        if self.hint3_min_unmarked == 0 {
            return Err(EngineError::Config(
                "hint3_min_unmarked must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn is_enabled(&self, kind: ScaffoldKind) -> bool {
        self.enabled.get(&kind).copied().unwrap_or(true)
    }

    pub fn from_toml(src: &str) -> Result<Self, EngineError> {
        let cfg: EngineConfig =
            toml::from_str(src).map_err(|e| EngineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
