//! Offline re-checks of delivered scaffolds against the annotated log.
//!
//! These deliberately recompute everything (student maps, quiz grades, link
//! classes) from the raw events instead of trusting engine state.

use std::collections::BTreeMap;

use super::{EngineConfig, ScaffoldDelivery, ScaffoldKind, TriggerRule};
use crate::annotate::{
    added_link, replay_final_map, ActionEvent, ActionKind, AnnotatedEvent, Effectiveness, MapEdit,
};
use crate::causal::{
    classify_link, generate_quiz, grade_quiz, is_correct, ExpertMap, LinkClass, Marking, QuizResult,
};

fn quiz_at(events: &[ActionEvent], index: usize, expert: &ExpertMap) -> Result<QuizResult, String> {
    let ActionKind::TakeQuiz { scope } = &events[index].kind else {
        return Err(format!("event {index} is not a quiz"));
    };
    let map = replay_final_map(&events[..=index]).map_err(|e| e.to_string())?;
    let quiz = generate_quiz(expert, scope).map_err(|e| e.to_string())?;
    grade_quiz(&map, &quiz).map_err(|e| e.to_string())
}

fn edit_eff(a: &AnnotatedEvent) -> Option<Effectiveness> {
    matches!(a.event.kind, ActionKind::MapEdit { .. }).then_some(a.effectiveness)
}

fn is_correct_marking(e: &ActionEvent) -> bool {
    matches!(&e.kind, ActionKind::MapEdit { edit: edit @ MapEdit::ModifyLink { new, .. } }
        if edit.is_marking() && new.marking == Marking::MarkedCorrect)
}

/// Checks that `d` satisfies its trigger condition in `annotated`.
pub fn verify_delivery(
    d: &ScaffoldDelivery,
    annotated: &[AnnotatedEvent],
    expert: &ExpertMap,
    config: &EngineConfig,
) -> Result<(), String> {
    let tr = &d.trigger;
    let (p, c) = (tr.previous_index, tr.current_index);
    if c != p + 1 || c >= annotated.len() {
        return Err(format!("{}: bad event pair ({p}, {c})", d.kind));
    }
    let events: Vec<ActionEvent> = annotated.iter().map(|a| a.event.clone()).collect();
    let (prev, cur) = (&annotated[p], &annotated[c]);
    let long = |a: &AnnotatedEvent| {
        matches!(a.event.kind, ActionKind::Read { .. })
            && a.event.duration >= config.long_threshold_seconds
    };
    let fail = |why: &str| Err(format!("{} at {}: {why}", d.kind, d.timestamp));
    if d.kind.agent() != d.agent {
        return fail("wrong agent");
    }
    if d.kind != ScaffoldKind::Hint1 && d.timestamp != cur.event.timestamp {
        return fail("timestamp differs from the triggering event");
    }
    match (tr.rule, d.kind) {
        (TriggerRule::LongReadThenIneffEdit, ScaffoldKind::Hint2) => {
            if !(long(prev) && edit_eff(cur) == Some(Effectiveness::Ineff)) {
                return fail("needs Read-Long then an ineffective edit");
            }
        }
        (TriggerRule::LongReadThenEffEdit, ScaffoldKind::Enc2) => {
            if !(long(prev) && edit_eff(cur) == Some(Effectiveness::Eff)) {
                return fail("needs Read-Long then an effective edit");
            }
        }
        (TriggerRule::QuizThenLongRead, ScaffoldKind::Hint6) => {
            let quiz = quiz_at(&events, p, expert)?;
            if quiz.incorrect_count() == 0 || !long(cur) {
                return fail("needs a quiz with a wrong answer then Read-Long");
            }
        }
        (TriggerRule::IneffEditThenQuiz, kind) => {
            if edit_eff(prev) != Some(Effectiveness::Ineff) {
                return fail("previous event is not an ineffective edit");
            }
            if quiz_at(&events, c, expert)?.incorrect_count() == 0 {
                return fail("quiz has no wrong answer");
            }
            let shortcut = added_link(&prev.event.kind)
                .is_some_and(|l| classify_link(l, expert) == LinkClass::IncorrectShortcut);
            match kind {
                ScaffoldKind::Hint3 => {
                    let since = events[..c]
                        .iter()
                        .rposition(|e| matches!(e.kind, ActionKind::TakeQuiz { .. }))
                        .map_or(0, |i| i + 1);
                    let map = replay_final_map(&events[..=c]).map_err(|e| e.to_string())?;
                    let mut recent = BTreeMap::new();
                    for e in &events[since..c] {
                        if let Some(l) = added_link(&e.kind) {
                            recent.insert(l.key(), ());
                        }
                    }
                    let n = recent
                        .keys()
                        .filter_map(|(s, t)| map.link(s, t))
                        .filter(|l| l.marking == Marking::Unmarked && !is_correct(l, expert))
                        .count();
                    if n < config.hint3_min_unmarked {
                        return fail("too few incorrect unmarked recent links");
                    }
                }
                ScaffoldKind::Hint4 if !shortcut => return fail("edit is not a shortcut"),
                ScaffoldKind::Hint4 | ScaffoldKind::Hint5 | ScaffoldKind::Enc3 => {}
                _ => return fail("kind does not belong to this trigger"),
            }
        }
        (TriggerRule::EffEditThenQuiz, kind @ (ScaffoldKind::Hint1 | ScaffoldKind::Enc1)) => {
            if edit_eff(prev) != Some(Effectiveness::Eff) {
                return fail("previous event is not an effective edit");
            }
            let quiz = quiz_at(&events, c, expert)?;
            if quiz.correct_count() == 0 {
                return fail("quiz has no correct answer");
            }
            let all_marked = quiz
                .correct_items()
                .flat_map(|i| &i.explanation_links)
                .all(|l| l.marking == Marking::MarkedCorrect);
            if kind == ScaffoldKind::Enc1 {
                return if all_marked {
                    Ok(())
                } else {
                    fail("explanation links are not all marked")
                };
            }
            if all_marked {
                return fail("explanation links are already marked");
            }
            let t0 = cur.event.timestamp;
            let deadline = t0 + config.hint1_window_seconds;
            let window: Vec<&ActionEvent> = events[c + 1..]
                .iter()
                .take(config.hint1_window_events)
                .take_while(|e| e.timestamp <= deadline)
                .collect();
            if window.iter().any(|e| is_correct_marking(e)) {
                return fail("a link was marked correct inside the window");
            }
            let expected = match tr.resolved_index {
                Some(r) => {
                    if r != c + config.hint1_window_events
                        || window.len() != config.hint1_window_events
                    {
                        return fail("window did not close on its event count");
                    }
                    events[r].timestamp
                }
                None => deadline,
            };
            if d.timestamp != expected {
                return fail("delivered at the wrong time");
            }
        }
        _ => return fail("kind does not belong to this trigger"),
    }
    Ok(())
}

/// Checks minimum spacing between one student's deliveries; a Hint6 that
/// directly chains onto a Hint5 is exempt.
pub fn verify_spacing(deliveries: &[ScaffoldDelivery], min_seconds: f64) -> Result<(), String> {
    let mut by_student: BTreeMap<&str, Vec<&ScaffoldDelivery>> = BTreeMap::new();
    for d in deliveries {
        by_student.entry(&d.student).or_default().push(d);
    }
    for (student, mut ds) in by_student {
        ds.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        for w in ds.windows(2) {
            let (a, b) = (w[0], w[1]);
            let chained = a.kind == ScaffoldKind::Hint5
                && b.kind == ScaffoldKind::Hint6
                && b.trigger.previous_index == a.trigger.current_index;
            if !chained && b.timestamp - a.timestamp < min_seconds {
                return Err(format!(
                    "{student}: {} at {} follows {} at {} too closely",
                    b.kind, b.timestamp, a.kind, a.timestamp
                ));
            }
        }
    }
    Ok(())
}
