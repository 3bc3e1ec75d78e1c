use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::AffectLevels;
use crate::annotate::{Activity, TimeShares};
use crate::scaffold::ScaffoldKind;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile document: {0}")]
    Document(#[from] toml::de::Error),
    #[error("profile `{name}`: {reason}")]
    Invalid { name: String, reason: String },
    #[error("no profile named `{0}`")]
    Unknown(String),
}

/// Log-normal duration with the given mean (seconds) and log-space SD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationDist {
    pub mean: f64,
    pub spread: f64,
}

/// Normal distribution for test scores and gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreDist {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Durations {
    pub read: DurationDist,
    pub make_notes: DurationDist,
    pub map_edit: DurationDist,
    pub take_quiz: DurationDist,
    pub quiz_expl: DurationDist,
}

impl Durations {
    pub fn get(&self, activity: Activity) -> DurationDist {
        match activity {
            Activity::Read => self.read,
            Activity::MakeNotes => self.make_notes,
            Activity::MapEdit => self.map_edit,
            Activity::TakeQuiz => self.take_quiz,
            Activity::QuizExpl => self.quiz_expl,
        }
    }
}

/// Behavior parameters of one kind of synthetic student.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudentProfile {
    pub name: String,
    /// Target share of session time per activity; sums to 1.
    pub activity_mix: TimeShares,
    /// Probability that an added link is correct.
    pub read_effectiveness: f64,
    /// Probability that a correct or wrong-sign link is taken from a page
    /// the student already read.
    pub coherence: f64,
    /// Pull toward taking a quiz right after a map edit.
    pub quiz_propensity: f64,
    /// Chance of spotting each wrong link behind an incorrect quiz answer.
    pub debug_skill: f64,
    /// Chance of marking quiz-confirmed links correct without being told.
    pub self_marking: f64,
    /// Share of incorrect links that are shortcuts.
    pub shortcut_share: f64,
    /// Probability of acting on each scaffold kind; missing kinds are 0.
    #[serde(default)]
    pub compliance: BTreeMap<ScaffoldKind, f64>,
    pub durations: Durations,
    pub affect_baseline: AffectLevels,
    pub affect_noise: f64,
    pub pre_test: ScoreDist,
    /// Normalized learning gain.
    pub gain: ScoreDist,
    pub test_max: f64,
    #[serde(default)]
    pub seed: u64,
}

impl StudentProfile {
    pub fn compliance(&self, kind: ScaffoldKind) -> f64 {
        self.compliance.get(&kind).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let bad = |reason: String| {
            Err(ProfileError::Invalid {
                name: self.name.clone(),
                reason,
            })
        };
        let mix = self.activity_mix;
        if Activity::ALL
            .iter()
            .any(|&a| !(0.0..=1.0).contains(&mix.get(a)))
        {
            return bad("activity shares must lie in [0, 1]".into());
        }
        if (mix.total() - 1.0).abs() > 1e-9 {
            return bad(format!("activity shares sum to {}, not 1", mix.total()));
        }
        let probs = [
            ("read_effectiveness", self.read_effectiveness),
            ("coherence", self.coherence),
            ("quiz_propensity", self.quiz_propensity),
            ("debug_skill", self.debug_skill),
            ("self_marking", self.self_marking),
            ("shortcut_share", self.shortcut_share),
        ];
        let compliance = self.compliance.iter().map(|(k, &v)| (k.name(), v));
        for (name, p) in probs.into_iter().chain(compliance) {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        for a in Activity::ALL {
            let d = self.durations.get(a);
            if !(d.mean > 0.0 && d.spread >= 0.0 && d.mean.is_finite() && d.spread.is_finite()) {
                return bad(format!("{} duration needs a positive mean", a.name()));
            }
        }
        if self
            .affect_baseline
            .values()
            .iter()
            .any(|v| !(0.0..=1.0).contains(v))
            || !(self.affect_noise >= 0.0)
        {
            return bad("affect baselines must lie in [0, 1]".into());
        }
        if !(self.test_max > 0.0) || !(self.pre_test.sd >= 0.0) || !(self.gain.sd >= 0.0) {
            return bad("test maximum and SDs must be positive".into());
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct ProfileDoc {
    profile: Vec<StudentProfile>,
}

/// Parses a `[[profile]]` document and validates every entry.
pub fn parse_profiles(src: &str) -> Result<Vec<StudentProfile>, ProfileError> {
    let doc: ProfileDoc = toml::from_str(src)?;
    for p in &doc.profile {
        p.validate()?;
    }
    Ok(doc.profile)
}

pub fn find_profile(
    profiles: &[StudentProfile],
    name: &str,
) -> Result<StudentProfile, ProfileError> {
    profiles
        .iter()
        .find(|p| p.name == name)
        .cloned()
        .ok_or_else(|| ProfileError::Unknown(name.into()))
}

pub const BUNDLED_PROFILES: &str = include_str!("../../data/profiles.toml");

/// The bundled `high` and `low` profiles.
pub fn bundled_profiles() -> (StudentProfile, StudentProfile) {
    let all = parse_profiles(BUNDLED_PROFILES).expect("bundled profiles are valid");
    let high = find_profile(&all, "high").expect("bundled high profile");
    let low = find_profile(&all, "low").expect("bundled low profile");
    (high, low)
}
