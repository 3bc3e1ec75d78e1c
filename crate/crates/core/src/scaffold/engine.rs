use std::collections::BTreeSet;

use super::{
    Detection, EngineConfig, EngineError, ScaffoldKind, Step, Suppression, TargetHints,
    TriggerContext, TriggerRule,
};
use crate::annotate::{added_link, ActionKind, AnnotatedEvent, Effectiveness, MapEdit};
use crate::causal::{
    answer_query, classify_link, is_correct, CausalMap, ExpertMap, LinkClass, LinkKey, Marking,
    PageId, QuizResult,
};

/// Stateless trigger logic shared by every student session.
#[derive(Debug, Clone)]
pub struct ScaffoldEngine {
    config: EngineConfig,
    expert: ExpertMap,
}

#[derive(Debug, Clone)]
struct Previous {
    index: usize,
    timestamp: f64,
    long_read: bool,
    edit: Option<Effectiveness>,
    added: Option<crate::causal::CausalLink>,
    quiz: Option<QuizResult>,
}

#[derive(Debug, Clone)]
struct PendingHint1 {
    detection: Detection,
    expires_at: f64,
    events_seen: usize,
}

/// Per-student engine state. Independent across students.
#[derive(Debug, Clone)]
pub struct EngineState {
    next_index: usize,
    last_timestamp: f64,
    previous: Option<Previous>,
    pending_hint1: Option<PendingHint1>,
    /// Links added or modified since the last quiz.
    recent_edits: BTreeSet<LinkKey>,
    case34_occasions: u32,
    last_hint5_link: Option<LinkKey>,
    last_hint6_page: Option<PageId>,
    last_delivery: Option<(f64, ScaffoldKind, usize)>,
}

impl Default for EngineState {
    fn default() -> Self {
        Self {
            next_index: 0,
            last_timestamp: f64::NEG_INFINITY,
            previous: None,
            pending_hint1: None,
            recent_edits: BTreeSet::new(),
            case34_occasions: 0,
            last_hint5_link: None,
            last_hint6_page: None,
            last_delivery: None,
        }
    }
}

impl EngineState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn has_pending_hint1(&self) -> bool {
        self.pending_hint1.is_some()
    }

    /// Number of events observed so far; also the next event's index.
    pub fn events_seen(&self) -> usize {
        self.next_index
    }

    pub fn last_timestamp(&self) -> Option<f64> {
        (self.next_index > 0).then_some(self.last_timestamp)
    }
}

fn is_quiz(e: &AnnotatedEvent) -> bool {
    matches!(e.event.kind, ActionKind::TakeQuiz { .. })
}

fn is_edit(e: &AnnotatedEvent) -> bool {
    matches!(e.event.kind, ActionKind::MapEdit { .. })
}

fn marks_correct(e: &AnnotatedEvent) -> bool {
    matches!(&e.event.kind, ActionKind::MapEdit { edit: edit @ MapEdit::ModifyLink { new, .. } }
        if edit.is_marking() && new.marking == Marking::MarkedCorrect)
}

impl ScaffoldEngine {
    pub fn new(config: EngineConfig, expert: ExpertMap) -> Result<Self, EngineError> {
        config.validate()?;
        Ok(Self { config, expert })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn expert(&self) -> &ExpertMap {
        &self.expert
    }

    /// Feeds one annotated event. `map` is the student map after the event;
    /// `quiz` must be the graded quiz when the event is a quiz. Returns every
    /// detection made at this point, each marked delivered or suppressed.
    pub fn observe(
        &self,
        state: &mut EngineState,
        event: &AnnotatedEvent,
        map: &CausalMap,
        quiz: Option<&QuizResult>,
    ) -> Result<Vec<Step>, EngineError> {
        let index = state.next_index;
        let t = event.event.timestamp;
        if !(t >= state.last_timestamp) {
            return Err(EngineError::OutOfOrderEvent {
                index,
                timestamp: t,
            });
        }
        if is_quiz(event) && quiz.is_none() {
            return Err(EngineError::MissingQuizResult { index });
        }
        let mut steps = Vec::new();

        if let Some(mut pending) = state.pending_hint1.take() {
            if t > pending.expires_at {
                pending.detection.timestamp = pending.expires_at;
                steps.push(self.gate(state, pending.detection));
            } else if !marks_correct(event) {
                pending.events_seen += 1;
                if pending.events_seen >= self.config.hint1_window_events {
                    pending.detection.timestamp = t;
                    pending.detection.trigger.resolved_index = Some(index);
                    steps.push(self.gate(state, pending.detection));
                } else {
                    state.pending_hint1 = Some(pending);
                }
            }
        }

        if let Some(prev) = state.previous.clone() {
            for detection in self.detect(state, &prev, event, index, map, quiz) {
                if detection.kind == ScaffoldKind::Hint1 {
                    if state.pending_hint1.is_none() {
                        state.pending_hint1 = Some(PendingHint1 {
                            expires_at: t + self.config.hint1_window_seconds,
                            events_seen: 0,
                            detection,
                        });
                    }
                } else {
                    steps.push(self.gate(state, detection));
                }
            }
        }

        if let Some(link) = added_link(&event.event.kind) {
            state.recent_edits.insert(link.key());
        }
        if is_quiz(event) {
            state.recent_edits.clear();
        }
        state.previous = Some(Previous {
            index,
            timestamp: t,
            long_read: event.is_long_read(),
            edit: is_edit(event).then_some(event.effectiveness),
            added: added_link(&event.event.kind).cloned(),
            quiz: quiz.cloned(),
        });
        state.next_index += 1;
        state.last_timestamp = t;
        Ok(steps)
    }

    /// Closes the session: a pending Hint1 whose window has fully elapsed by
    /// `session_end` is delivered at its expiry time, otherwise dropped.
    pub fn finish(&self, state: &mut EngineState, session_end: f64) -> Vec<Step> {
        match state.pending_hint1.take() {
            Some(mut pending) if session_end >= pending.expires_at => {
                pending.detection.timestamp = pending.expires_at;
                vec![self.gate(state, pending.detection)]
            }
            _ => Vec::new(),
        }
    }

    fn gate(&self, state: &mut EngineState, detection: Detection) -> Step {
        let suppressed = if !self.config.is_enabled(detection.kind) {
            Some(Suppression::Disabled)
        } else if let Some((last_t, last_kind, last_index)) = state.last_delivery {
            let chained = detection.kind == ScaffoldKind::Hint6
                && last_kind == ScaffoldKind::Hint5
                && last_index == detection.trigger.previous_index;
            (!chained && detection.timestamp - last_t < self.config.min_inter_scaffold_seconds)
                .then_some(Suppression::TooSoon)
        } else {
            None
        };
        if suppressed.is_none() {
            state.last_delivery = Some((
                detection.timestamp,
                detection.kind,
                detection.trigger.current_index,
            ));
        }
        Step {
            detection,
            suppressed,
        }
    }

    fn detect(
        &self,
        state: &mut EngineState,
        prev: &Previous,
        cur: &AnnotatedEvent,
        index: usize,
        map: &CausalMap,
        quiz: Option<&QuizResult>,
    ) -> Vec<Detection> {
        let context = |rule, case| TriggerContext {
            rule,
            case,
            previous_index: prev.index,
            current_index: index,
            previous_timestamp: prev.timestamp,
            current_timestamp: cur.event.timestamp,
            resolved_index: None,
        };
        let detection = |kind, trigger, targets| Detection {
            kind,
            timestamp: cur.event.timestamp,
            trigger,
            targets,
        };
        let cur_edit = is_edit(cur).then_some(cur.effectiveness);
        let mut out = Vec::new();

        if prev.long_read {
            match cur_edit {
                Some(Effectiveness::Ineff) => out.push(detection(
                    ScaffoldKind::Hint2,
                    context(TriggerRule::LongReadThenIneffEdit, None),
                    TargetHints::default(),
                )),
                Some(Effectiveness::Eff) => out.push(detection(
                    ScaffoldKind::Enc2,
                    context(TriggerRule::LongReadThenEffEdit, None),
                    TargetHints::default(),
                )),
                _ => {}
            }
        }

        if let (Some(quiz), Some(edit)) = (quiz, prev.edit) {
            match edit {
                Effectiveness::Ineff if quiz.incorrect_count() > 0 => {
                    let (kind, case, targets) = self.resolve_ineff_quiz(state, prev, map, quiz);
                    out.push(detection(
                        kind,
                        context(TriggerRule::IneffEditThenQuiz, Some(case)),
                        targets,
                    ));
                }
                Effectiveness::Eff if quiz.correct_count() > 0 => {
                    let unmarked = quiz
                        .correct_items()
                        .flat_map(|i| &i.explanation_links)
                        .any(|l| l.marking != Marking::MarkedCorrect);
                    let (kind, case) = if unmarked {
                        (ScaffoldKind::Hint1, 1)
                    } else {
                        (ScaffoldKind::Enc1, 2)
                    };
                    out.push(detection(
                        kind,
                        context(TriggerRule::EffEditThenQuiz, Some(case)),
                        TargetHints::default(),
                    ));
                }
                _ => {}
            }
        }

        if cur.is_long_read() {
            if let Some(prev_quiz) = prev.quiz.as_ref().filter(|q| q.incorrect_count() > 0) {
                let targets = self.hint6_targets(state, map, prev_quiz);
                out.push(detection(
                    ScaffoldKind::Hint6,
                    context(TriggerRule::QuizThenLongRead, None),
                    targets,
                ));
            }
        }
        out
    }

    /// Case 1 (Hint3), then Case 2 (Hint4), then Hint5/Enc3 alternation.
    fn resolve_ineff_quiz(
        &self,
        state: &mut EngineState,
        prev: &Previous,
        map: &CausalMap,
        quiz: &QuizResult,
    ) -> (ScaffoldKind, u8, TargetHints) {
        let unmarked_wrong: Vec<_> = state
            .recent_edits
            .iter()
            .filter_map(|(s, t)| map.link(s, t))
            .filter(|l| l.marking == Marking::Unmarked && !is_correct(l, &self.expert))
            .collect();
        if unmarked_wrong.len() >= self.config.hint3_min_unmarked {
            let targets = TargetHints {
                link: unmarked_wrong.first().map(|l| (*l).clone()),
                ..TargetHints::default()
            };
            return (ScaffoldKind::Hint3, 1, targets);
        }
        if let Some(link) = &prev.added {
            if classify_link(link, &self.expert) == LinkClass::IncorrectShortcut {
                let targets = TargetHints {
                    link: Some(link.clone()),
                    concept: Some(link.source.clone()),
                    page: None,
                };
                return (ScaffoldKind::Hint4, 2, targets);
            }
        }
        state.case34_occasions += 1;
        if state.case34_occasions.is_multiple_of(self.config.enc3_every) {
            return (ScaffoldKind::Enc3, 4, TargetHints::default());
        }
        (ScaffoldKind::Hint5, 3, self.hint5_targets(state, map, quiz))
    }

    /// An incorrect student link touching a concept from a wrongly answered
    /// question, never the same link twice in a row.
    fn hint5_targets(
        &self,
        state: &mut EngineState,
        map: &CausalMap,
        quiz: &QuizResult,
    ) -> TargetHints {
        let concepts: BTreeSet<_> = quiz
            .incorrect_items()
            .flat_map(|i| [&i.question.source, &i.question.target])
            .collect();
        let candidates: Vec<_> = map
            .links()
            .filter(|l| !is_correct(l, &self.expert))
            .filter(|l| concepts.contains(&l.source) || concepts.contains(&l.target))
            .collect();
        let pick = candidates
            .iter()
            .find(|l| Some(l.key()) != state.last_hint5_link)
            .or(candidates.first())
            .map(|l| (*l).clone());
        state.last_hint5_link = pick.as_ref().map(|l| l.key());
        match pick {
            Some(link) => TargetHints {
                concept: Some(link.source.clone()),
                link: Some(link),
                page: None,
            },
            None => TargetHints {
                concept: quiz
                    .incorrect_items()
                    .next()
                    .map(|i| i.question.source.clone()),
                ..TargetHints::default()
            },
        }
    }

    /// The resource page stating an expert link that a wrongly answered
    /// question depends on, preferring links the student is missing or has
    /// wrong; never the same page twice in a row when avoidable.
    fn hint6_targets(
        &self,
        state: &mut EngineState,
        map: &CausalMap,
        quiz: &QuizResult,
    ) -> TargetHints {
        let mut missing = Vec::new();
        let mut present = Vec::new();
        for item in quiz.incorrect_items() {
            let Ok(ans) = answer_query(
                self.expert.map(),
                &item.question.source,
                &item.question.target,
            ) else {
                continue;
            };
            for link in ans.used_links {
                let held = map
                    .link(&link.source, &link.target)
                    .is_some_and(|l| l.sign == link.sign);
                let bucket = if held { &mut present } else { &mut missing };
                if !bucket.contains(&link) {
                    bucket.push(link);
                }
            }
        }
        let pool = if missing.is_empty() { present } else { missing };
        let pick = pool
            .iter()
            .find(|l| l.source_page != state.last_hint6_page)
            .or(pool.first())
            .cloned();
        state.last_hint6_page = pick.as_ref().and_then(|l| l.source_page.clone());
        match pick {
            Some(link) => TargetHints {
                concept: Some(link.source.clone()),
                page: link.source_page.clone(),
                link: None,
            },
            None => TargetHints::default(),
        }
    }
}
