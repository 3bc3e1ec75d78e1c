//! Action-log annotation.
//!
//! Raw learner actions are replayed against an evolving student map and
//! enriched with the task-model process (IA/SC/SA), an effectiveness tag
//! for map edits (did the map score go up or down), a long-read flag, and
//! read-to-edit coherence. [`collapse`] turns an annotated stream into the
//! token alphabet used for sequence mining.

mod collapse;
mod event;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::causal::{map_score, CausalError, CausalLink, CausalMap, ConceptId, ExpertMap, PageId};

pub use collapse::{collapse, expand, CollapsedToken};
pub use event::{ActionEvent, ActionKind, Activity, MapEdit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnotateError {
    #[error("event {index}: {source}")]
    Replay { index: usize, source: CausalError },
    #[error("event {index}: deleted or modified link {link} does not match the map")]
    LinkMismatch { index: usize, link: String },
    #[error("event {index}: timestamp {timestamp} is earlier than the previous event")]
    OutOfOrder { index: usize, timestamp: f64 },
    #[error("event {index}: invalid duration {duration}")]
    BadDuration { index: usize, duration: f64 },
    #[error("session has no recorded time")]
    EmptySession,
}

impl AnnotateError {
    pub fn index(&self) -> Option<usize> {
        match self {
            AnnotateError::Replay { index, .. }
            | AnnotateError::LinkMismatch { index, .. }
            | AnnotateError::OutOfOrder { index, .. }
            | AnnotateError::BadDuration { index, .. } => Some(*index),
            AnnotateError::EmptySession => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Process {
    /// Information acquisition: reading, notes.
    IA,
    /// Solution construction: map edits.
    SC,
    /// Solution assessment: quizzes and explanations.
    SA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effectiveness {
    Eff,
    Ineff,
    Neutral,
}

impl Effectiveness {
    fn from_delta(delta: i64) -> Self {
        match delta {
            d if d > 0 => Effectiveness::Eff,
            d if d < 0 => Effectiveness::Ineff,
            _ => Effectiveness::Neutral,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Effectiveness::Eff => "-Eff",
            Effectiveness::Ineff => "-Ineff",
            Effectiveness::Neutral => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedEvent {
    #[serde(flatten)]
    pub event: ActionEvent,
    pub process: Process,
    pub effectiveness: Effectiveness,
    pub long: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherent: Option<bool>,
    pub map_score_after: i64,
}

impl AnnotatedEvent {
    pub fn activity(&self) -> Activity {
        self.event.kind.activity()
    }

    pub fn is_long_read(&self) -> bool {
        self.long && matches!(self.event.kind, ActionKind::Read { .. })
    }

    /// Score change produced by this event (zero for non-edits).
    pub fn effect_sign(&self) -> i64 {
        match self.effectiveness {
            Effectiveness::Eff => 1,
            Effectiveness::Ineff => -1,
            Effectiveness::Neutral => 0,
        }
    }

    /// Mining alphabet label, before run collapsing.
    pub fn label(&self) -> String {
        match &self.event.kind {
            ActionKind::Read { .. } => "Read".into(),
            ActionKind::MakeNotes { .. } => "Note".into(),
            ActionKind::TakeQuiz { .. } => "QuizTaken".into(),
            ActionKind::QuizExpl { .. } => "QuizExpl".into(),
            ActionKind::MapEdit { edit } => {
                let base = if edit.is_link_edit() {
                    "LinkEdit"
                } else {
                    "ConceptEdit"
                };
                format!("{base}{}", self.effectiveness.suffix())
            }
        }
    }
}

/// How a read is judged "long".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum LongReadRule {
    /// duration >= seconds
    Absolute { seconds: f64 },
    /// duration >= the session's own nearest-rank percentile of read durations
    Percentile { percentile: f64 },
}

impl Default for LongReadRule {
    fn default() -> Self {
        LongReadRule::Absolute { seconds: 60.0 }
    }
}

impl LongReadRule {
    /// Resolves the rule to an absolute threshold for one session.
    pub fn threshold(&self, events: &[ActionEvent]) -> f64 {
        match *self {
            LongReadRule::Absolute { seconds } => seconds,
            LongReadRule::Percentile { percentile } => {
                let mut reads: Vec<f64> = events
                    .iter()
                    .filter(|e| matches!(e.kind, ActionKind::Read { .. }))
                    .map(|e| e.duration)
                    .collect();
                if reads.is_empty() {
                    return f64::INFINITY;
                }
                reads.sort_by(f64::total_cmp);
                let rank = ((percentile / 100.0) * reads.len() as f64).ceil() as usize;
                reads[rank.clamp(1, reads.len()) - 1]
            }
        }
    }
}

/// Incremental annotator: replays one student's events in order, keeping the
/// student map and its score current.
#[derive(Debug, Clone)]
pub struct SessionAnnotator<'e> {
    expert: &'e ExpertMap,
    long_threshold: f64,
    map: CausalMap,
    score: i64,
    next_index: usize,
    last_timestamp: f64,
}

impl<'e> SessionAnnotator<'e> {
    pub fn new(expert: &'e ExpertMap, long_threshold: f64) -> Self {
        Self {
            expert,
            long_threshold,
            map: CausalMap::new(),
            score: 0,
            next_index: 0,
            last_timestamp: f64::NEG_INFINITY,
        }
    }

    pub fn map(&self) -> &CausalMap {
        &self.map
    }

    pub fn score(&self) -> i64 {
        self.score
    }

    pub fn push(&mut self, event: ActionEvent) -> Result<AnnotatedEvent, AnnotateError> {
        let index = self.next_index;
        if !(event.timestamp >= self.last_timestamp) || !event.timestamp.is_finite() {
            return Err(AnnotateError::OutOfOrder {
                index,
                timestamp: event.timestamp,
            });
        }
        if !(event.duration >= 0.0) || !event.duration.is_finite() {
            return Err(AnnotateError::BadDuration {
                index,
                duration: event.duration,
            });
        }
        let before = self.score;
        if let ActionKind::MapEdit { edit } = &event.kind {
            apply_edit(&mut self.map, edit, index)?;
            self.score = map_score(&self.map, self.expert);
        }
        let effectiveness = if event.kind.activity() == Activity::MapEdit {
            Effectiveness::from_delta(self.score - before)
        } else {
            Effectiveness::Neutral
        };
        let long =
            matches!(event.kind, ActionKind::Read { .. }) && event.duration >= self.long_threshold;
        self.next_index += 1;
        self.last_timestamp = event.timestamp;
        Ok(AnnotatedEvent {
            process: event.kind.activity().process(),
            effectiveness,
            long,
            coherent: None,
            map_score_after: self.score,
            event,
        })
    }
}

fn same_link(map: &CausalMap, link: &CausalLink) -> bool {
    map.link(&link.source, &link.target)
        .is_some_and(|l| l.sign == link.sign)
}

/// Applies one edit to a map, reporting inconsistencies against `index`.
pub fn apply_edit(map: &mut CausalMap, edit: &MapEdit, index: usize) -> Result<(), AnnotateError> {
    let replay = |source| AnnotateError::Replay { index, source };
    match edit {
        MapEdit::AddConcept { concept } => map.add_concept(concept.clone()).map_err(replay),
        MapEdit::DeleteConcept { id } => map.remove_concept(id).map(|_| ()).map_err(replay),
        MapEdit::AddLink { link } => map.add_link(link.clone()).map_err(replay),
        MapEdit::DeleteLink { link } => {
            if !same_link(map, link) {
                return Err(AnnotateError::LinkMismatch {
                    index,
                    link: link.to_string(),
                });
            }
            map.remove_link(&link.source, &link.target)
                .map(|_| ())
                .map_err(replay)
        }
        MapEdit::ModifyLink { old, new } => {
            if !same_link(map, old) {
                return Err(AnnotateError::LinkMismatch {
                    index,
                    link: old.to_string(),
                });
            }
            let removed = map.remove_link(&old.source, &old.target).map_err(replay)?;
            if let Err(e) = map.add_link(new.clone()) {
                map.add_link(removed).expect("re-inserting a removed link");
                return Err(replay(e));
            }
            Ok(())
        }
    }
}

/// Replays a whole session. Read events are flagged long per `rule`;
/// coherence is left unset (see [`tag_coherence`]).
pub fn annotate_session(
    events: &[ActionEvent],
    expert: &ExpertMap,
    rule: LongReadRule,
) -> Result<Vec<AnnotatedEvent>, AnnotateError> {
    let mut annotator = SessionAnnotator::new(expert, rule.threshold(events));
    events.iter().map(|e| annotator.push(e.clone())).collect()
}

/// Replays a session's edits and returns the final student map.
pub fn replay_final_map(events: &[ActionEvent]) -> Result<CausalMap, AnnotateError> {
    let mut map = CausalMap::new();
    for (i, e) in events.iter().enumerate() {
        if let ActionKind::MapEdit { edit } = &e.kind {
            apply_edit(&mut map, edit, i)?;
        }
    }
    Ok(map)
}

/// Endpoints introduced by a link-adding edit, if any.
pub fn added_link(kind: &ActionKind) -> Option<&CausalLink> {
    match kind {
        ActionKind::MapEdit {
            edit: MapEdit::AddLink { link } | MapEdit::ModifyLink { new: link, .. },
        } => Some(link),
        _ => None,
    }
}

/// Marks every AddLink/ModifyLink as coherent when an earlier Read (no older
/// than `lookback` seconds, if given) covered a page stating a link with the
/// same endpoints. Other events keep `coherent = None`.
pub fn tag_coherence(
    annotated: &[AnnotatedEvent],
    expert: &ExpertMap,
    lookback: Option<f64>,
) -> Vec<AnnotatedEvent> {
    let mut reads: Vec<(f64, &PageId)> = Vec::new();
    annotated
        .iter()
        .map(|a| {
            let mut out = a.clone();
            out.coherent = added_link(&a.event.kind).map(|link| {
                reads.iter().any(|(t, page)| {
                    lookback.is_none_or(|w| a.event.timestamp - t <= w)
                        && expert.page_supports(page, &link.source, &link.target)
                })
            });
            if let ActionKind::Read { page } = &a.event.kind {
                reads.push((a.event.timestamp, page));
            }
            out
        })
        .collect()
}

/// Share of total recorded time spent in each activity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeShares {
    pub read: f64,
    pub make_notes: f64,
    pub map_edit: f64,
    pub take_quiz: f64,
    pub quiz_expl: f64,
}

impl TimeShares {
    pub fn get(&self, activity: Activity) -> f64 {
        match activity {
            Activity::Read => self.read,
            Activity::MakeNotes => self.make_notes,
            Activity::MapEdit => self.map_edit,
            Activity::TakeQuiz => self.take_quiz,
            Activity::QuizExpl => self.quiz_expl,
        }
    }

    fn slot(&mut self, activity: Activity) -> &mut f64 {
        match activity {
            Activity::Read => &mut self.read,
            Activity::MakeNotes => &mut self.make_notes,
            Activity::MapEdit => &mut self.map_edit,
            Activity::TakeQuiz => &mut self.take_quiz,
            Activity::QuizExpl => &mut self.quiz_expl,
        }
    }

    pub fn process(&self, process: Process) -> f64 {
        Activity::ALL
            .iter()
            .filter(|a| a.process() == process)
            .map(|a| self.get(*a))
            .sum()
    }

    pub fn total(&self) -> f64 {
        Activity::ALL.iter().map(|a| self.get(*a)).sum()
    }

    /// Accumulates raw seconds per activity.
    pub fn seconds<'a>(events: impl IntoIterator<Item = &'a ActionEvent>) -> Self {
        let mut out = TimeShares::default();
        for e in events {
            *out.slot(e.kind.activity()) += e.duration;
        }
        out
    }

    /// Normalizes raw seconds to fractions.
    pub fn normalized(&self) -> Result<Self, AnnotateError> {
        let total = self.total();
        if !(total > 0.0) {
            return Err(AnnotateError::EmptySession);
        }
        let mut out = *self;
        for a in Activity::ALL {
            *out.slot(a) /= total;
        }
        Ok(out)
    }
}

pub fn time_distribution(annotated: &[AnnotatedEvent]) -> Result<TimeShares, AnnotateError> {
    TimeShares::seconds(annotated.iter().map(|a| &a.event)).normalized()
}

/// Concepts touched by a link, used when a concept must exist before linking.
pub fn link_endpoints(link: &CausalLink) -> [&ConceptId; 2] {
    [&link.source, &link.target]
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::causal::{default_expert, Concept, QuizScope, Sign};

    fn ab_expert() -> ExpertMap {
        let mut m = CausalMap::new();
        for c in ["A", "B", "C", "D"] {
            m.add_concept(Concept::new(c, c, "s")).unwrap();
        }
        m.add_link(CausalLink::new("A", "B", Sign::Increase).with_page("P"))
            .unwrap();
        m.add_link(CausalLink::new("C", "D", Sign::Increase).with_page("Q"))
            .unwrap();
        ExpertMap::new(
            m,
            BTreeMap::from([
                (PageId::new("P"), "P".into()),
                (PageId::new("Q"), "Q".into()),
            ]),
        )
        .unwrap()
    }

    fn ev(t: f64, d: f64, kind: ActionKind) -> ActionEvent {
        ActionEvent {
            student: "s".into(),
            timestamp: t,
            duration: d,
            kind,
        }
    }

    fn add_concepts(t: f64, names: &[&str]) -> Vec<ActionEvent> {
        names
            .iter()
            .map(|n| {
                ev(
                    t,
                    1.0,
                    ActionKind::edit(MapEdit::AddConcept {
                        concept: Concept::new(*n, *n, "s"),
                    }),
                )
            })
            .collect()
    }

    fn add_link(t: f64, s: &str, tgt: &str, sign: Sign) -> ActionEvent {
        ev(
            t,
            5.0,
            ActionKind::edit(MapEdit::AddLink {
                link: CausalLink::new(s, tgt, sign),
            }),
        )
    }

    #[test]
    fn correct_link_is_effective_wrong_sign_is_not() {
        let expert = ab_expert();
        let mut events = add_concepts(0.0, &["A", "B"]);
        events.push(add_link(1.0, "A", "B", Sign::Increase));
        let out = annotate_session(&events, &expert, LongReadRule::default()).unwrap();
        assert_eq!(out[2].effectiveness, Effectiveness::Eff);
        assert_eq!(out[2].map_score_after, 1);
        assert_eq!(out[0].effectiveness, Effectiveness::Neutral);

        let mut events = add_concepts(0.0, &["A", "B"]);
        events.push(add_link(1.0, "A", "B", Sign::Decrease));
        let out = annotate_session(&events, &expert, LongReadRule::default()).unwrap();
        assert_eq!(out[2].effectiveness, Effectiveness::Ineff);
        assert_eq!(out[2].map_score_after, -1);
    }

    #[test]
    fn isolated_concept_delete_is_neutral() {
        let expert = ab_expert();
        let mut events = add_concepts(0.0, &["A"]);
        events.push(ev(
            1.0,
            1.0,
            ActionKind::edit(MapEdit::DeleteConcept { id: "A".into() }),
        ));
        let out = annotate_session(&events, &expert, LongReadRule::default()).unwrap();
        assert_eq!(out[1].effectiveness, Effectiveness::Neutral);
    }

    #[test]
    fn modify_uses_net_delta() {
        let expert = ab_expert();
        let mut events = add_concepts(0.0, &["A", "B"]);
        events.push(add_link(1.0, "A", "B", Sign::Decrease));
        events.push(ev(
            2.0,
            3.0,
            ActionKind::edit(MapEdit::ModifyLink {
                old: CausalLink::new("A", "B", Sign::Decrease),
                new: CausalLink::new("A", "B", Sign::Increase),
            }),
        ));
        let out = annotate_session(&events, &expert, LongReadRule::default()).unwrap();
        assert_eq!(out[3].effectiveness, Effectiveness::Eff);
        assert_eq!(out[3].map_score_after, 1);
    }

    #[test]
    fn inconsistent_edits_report_their_index() {
        let expert = ab_expert();
        let mut events = add_concepts(0.0, &["A", "B"]);
        events.push(ev(
            1.0,
            1.0,
            ActionKind::edit(MapEdit::DeleteLink {
                link: CausalLink::new("A", "B", Sign::Increase),
            }),
        ));
        let err = annotate_session(&events, &expert, LongReadRule::default()).unwrap_err();
        assert_eq!(err.index(), Some(2));

        let events = vec![add_link(0.0, "A", "B", Sign::Increase)];
        let err = annotate_session(&events, &expert, LongReadRule::default()).unwrap_err();
        assert!(matches!(err, AnnotateError::Replay { index: 0, .. }));
    }

    #[test]
    fn out_of_order_is_rejected() {
        let expert = ab_expert();
        let events = vec![
            ev(5.0, 1.0, ActionKind::Read { page: "P".into() }),
            ev(4.0, 1.0, ActionKind::Read { page: "P".into() }),
        ];
        assert!(matches!(
            annotate_session(&events, &expert, LongReadRule::default()),
            Err(AnnotateError::OutOfOrder { index: 1, .. })
        ));
    }

    #[test]
    fn long_reads_use_threshold() {
        let expert = ab_expert();
        let events = vec![
            ev(0.0, 59.0, ActionKind::Read { page: "P".into() }),
            ev(60.0, 60.0, ActionKind::Read { page: "P".into() }),
            ev(120.0, 90.0, ActionKind::Read { page: "P".into() }),
        ];
        let out = annotate_session(&events, &expert, LongReadRule::default()).unwrap();
        assert_eq!(
            out.iter().map(|a| a.long).collect::<Vec<_>>(),
            [false, true, true]
        );
        let out = annotate_session(
            &events,
            &expert,
            LongReadRule::Percentile { percentile: 90.0 },
        )
        .unwrap();
        assert_eq!(
            out.iter().map(|a| a.long).collect::<Vec<_>>(),
            [false, false, true]
        );
    }

    #[test]
    fn every_activity_maps_to_its_process() {
        let kinds = [
            (ActionKind::Read { page: "P".into() }, Process::IA),
            (ActionKind::MakeNotes { note: "n".into() }, Process::IA),
            (
                ActionKind::edit(MapEdit::AddConcept {
                    concept: Concept::new("A", "A", "s"),
                }),
                Process::SC,
            ),
            (
                ActionKind::TakeQuiz {
                    scope: QuizScope::Everything,
                },
                Process::SA,
            ),
            (ActionKind::QuizExpl { question: 0 }, Process::SA),
        ];
        let expert = ab_expert();
        for (i, (kind, process)) in kinds.into_iter().enumerate() {
            let mut a = SessionAnnotator::new(&expert, 60.0);
            let out = a.push(ev(i as f64, 1.0, kind)).unwrap();
            assert_eq!(out.process, process);
            assert_eq!(out.activity().process(), process);
        }
    }

    #[test]
    fn coherence_examples() {
        let expert = ab_expert();
        let mut events = vec![ev(0.0, 30.0, ActionKind::Read { page: "P".into() })];
        events.extend(add_concepts(30.0, &["A", "B", "C", "D"]));
        events.push(add_link(40.0, "A", "B", Sign::Increase));
        events.push(add_link(50.0, "C", "D", Sign::Increase));
        events.push(add_link(60.0, "B", "A", Sign::Increase));
        let annotated = annotate_session(&events, &expert, LongReadRule::default()).unwrap();
        let tagged = tag_coherence(&annotated, &expert, None);
        let flags: Vec<_> = tagged.iter().map(|a| a.coherent).collect();
        assert_eq!(flags[0], None);
        assert_eq!(flags[1], None);
        assert_eq!(&flags[5..], &[Some(true), Some(false), Some(false)]);

        // no read at all
        let mut events = add_concepts(0.0, &["A", "B"]);
        events.push(add_link(1.0, "A", "B", Sign::Increase));
        let annotated = annotate_session(&events, &expert, LongReadRule::default()).unwrap();
        assert_eq!(
            tag_coherence(&annotated, &expert, None)[2].coherent,
            Some(false)
        );
    }

    #[test]
    fn coherence_respects_lookback() {
        let expert = ab_expert();
        let mut events = vec![ev(0.0, 30.0, ActionKind::Read { page: "P".into() })];
        events.extend(add_concepts(30.0, &["A", "B"]));
        events.push(add_link(500.0, "A", "B", Sign::Decrease));
        let annotated = annotate_session(&events, &expert, LongReadRule::default()).unwrap();
        assert_eq!(
            tag_coherence(&annotated, &expert, Some(100.0))[3].coherent,
            Some(false)
        );
        assert_eq!(
            tag_coherence(&annotated, &expert, Some(500.0))[3].coherent,
            Some(true)
        );
        // sign is irrelevant to coherence
        assert_eq!(
            tag_coherence(&annotated, &expert, None)[3].coherent,
            Some(true)
        );
    }

    #[test]
    fn time_distribution_examples() {
        let expert = ab_expert();
        let one = annotate_session(
            &[ev(0.0, 10.0, ActionKind::Read { page: "P".into() })],
            &expert,
            LongReadRule::default(),
        )
        .unwrap();
        let shares = time_distribution(&one).unwrap();
        assert_eq!(shares.read, 1.0);
        assert_eq!(
            shares.map_edit + shares.take_quiz + shares.quiz_expl + shares.make_notes,
            0.0
        );

        let two = annotate_session(
            &[
                ev(0.0, 30.0, ActionKind::Read { page: "P".into() }),
                ev(
                    30.0,
                    30.0,
                    ActionKind::TakeQuiz {
                        scope: QuizScope::Everything,
                    },
                ),
            ],
            &expert,
            LongReadRule::default(),
        )
        .unwrap();
        let shares = time_distribution(&two).unwrap();
        assert_eq!((shares.read, shares.take_quiz), (0.5, 0.5));
        assert_eq!(time_distribution(&[]), Err(AnnotateError::EmptySession));
    }

    #[test]
    fn high_group_table_row_round_trips_through_shares() {
        // Read 26.2, Notes 0.5, Edits 47.0, Quiz 23.13, Expl 3.2
        let expert = ab_expert();
        let rows = [
            ActionKind::Read { page: "P".into() },
            ActionKind::MakeNotes { note: "n".into() },
            ActionKind::edit(MapEdit::AddConcept {
                concept: Concept::new("A", "A", "s"),
            }),
            ActionKind::TakeQuiz {
                scope: QuizScope::Everything,
            },
            ActionKind::QuizExpl { question: 0 },
        ];
        let durations = [26.2, 0.5, 47.0, 23.13, 3.2];
        let mut t = 0.0;
        let events: Vec<_> = rows
            .into_iter()
            .zip(durations)
            .map(|(k, d)| {
                let e = ev(t, d, k);
                t += d;
                e
            })
            .collect();
        let shares = time_distribution(
            &annotate_session(&events, &expert, LongReadRule::default()).unwrap(),
        )
        .unwrap();
        let total: f64 = durations.iter().sum();
        for (a, d) in Activity::ALL.iter().zip(durations) {
            assert!((shares.get(*a) - d / total).abs() < 1e-12);
        }
        assert!((shares.total() - 1.0).abs() < 1e-9);
        assert!((100.0 * shares.process(Process::SA) - 26.33 / total * 100.0).abs() < 1e-9);
    }

    #[test]
    fn default_expert_replays_to_full_score() {
        let expert = default_expert();
        let mut events: Vec<ActionEvent> = expert
            .map()
            .concepts()
            .map(|c| {
                ev(
                    0.0,
                    1.0,
                    ActionKind::edit(MapEdit::AddConcept { concept: c.clone() }),
                )
            })
            .collect();
        for l in expert.map().links() {
            events.push(ev(
                1.0,
                1.0,
                ActionKind::edit(MapEdit::AddLink { link: l.clone() }),
            ));
        }
        let out = annotate_session(&events, &expert, LongReadRule::default()).unwrap();
        assert_eq!(out.last().unwrap().map_score_after, 15);
        let eff = out
            .iter()
            .filter(|a| a.effectiveness == Effectiveness::Eff)
            .count();
        assert_eq!(eff, 15);
    }
}
