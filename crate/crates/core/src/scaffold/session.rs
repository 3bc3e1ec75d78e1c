use std::collections::HashMap;

use super::{EngineError, EngineState, Responder, ScaffoldDelivery, ScaffoldEngine, Step, TreeSet};
use crate::annotate::{ActionEvent, ActionKind, AnnotatedEvent, SessionAnnotator};
use crate::causal::{generate_quiz, grade_quiz, CausalMap, Quiz, QuizResult, QuizScope};

/// What one pushed event produced.
#[derive(Debug, Clone)]
pub struct PushOutput {
    pub annotated: AnnotatedEvent,
    pub quiz: Option<QuizResult>,
    /// Every detection at this event, delivered or not.
    pub steps: Vec<Step>,
    pub delivered: Vec<ScaffoldDelivery>,
}

/// One student's online session: annotation, quiz grading, trigger
/// detection and conversation delivery, one event at a time. The simulator
/// and offline replay both drive this type, so they agree exactly.
pub struct LiveSession<'a> {
    student: String,
    engine: &'a ScaffoldEngine,
    trees: &'a TreeSet,
    annotator: SessionAnnotator<'a>,
    state: EngineState,
    quizzes: HashMap<QuizScope, Quiz>,
    last_quiz: Option<QuizResult>,
}

impl<'a> LiveSession<'a> {
    pub fn new(student: impl Into<String>, engine: &'a ScaffoldEngine, trees: &'a TreeSet) -> Self {
        Self {
            student: student.into(),
            annotator: SessionAnnotator::new(
                engine.expert(),
                engine.config().long_threshold_seconds,
            ),
            engine,
            trees,
            state: EngineState::new(),
            quizzes: HashMap::new(),
            last_quiz: None,
        }
    }

    pub fn student(&self) -> &str {
        &self.student
    }

    pub fn map(&self) -> &CausalMap {
        self.annotator.map()
    }

    pub fn score(&self) -> i64 {
        self.annotator.score()
    }

    pub fn last_quiz(&self) -> Option<&QuizResult> {
        self.last_quiz.as_ref()
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    /// Grades `scope` against the current map without logging anything.
    pub fn preview_quiz(&mut self, scope: &QuizScope) -> Result<QuizResult, EngineError> {
        let index = self.state.events_seen();
        self.grade(scope, index)
    }

    fn grade(&mut self, scope: &QuizScope, index: usize) -> Result<QuizResult, EngineError> {
        let expert = self.engine.expert();
        if !self.quizzes.contains_key(scope) {
            let quiz = generate_quiz(expert, scope)
                .map_err(|source| EngineError::Quiz { index, source })?;
            self.quizzes.insert(scope.clone(), quiz);
        }
        grade_quiz(self.annotator.map(), &self.quizzes[scope])
            .map_err(|source| EngineError::Quiz { index, source })
    }

    pub fn push(
        &mut self,
        event: ActionEvent,
        responder: &mut dyn Responder,
    ) -> Result<PushOutput, EngineError> {
        let index = self.state.events_seen();
        if event.student != self.student {
            return Err(EngineError::StudentMismatch {
                index,
                expected: self.student.clone(),
                found: event.student,
            });
        }
        if let Some(last) = self.state.last_timestamp() {
            if !(event.timestamp >= last) {
                return Err(EngineError::OutOfOrderEvent {
                    index,
                    timestamp: event.timestamp,
                });
            }
        }
        let annotated = self.annotator.push(event)?;
        let quiz = match &annotated.event.kind {
            ActionKind::TakeQuiz { scope } => Some(self.grade(scope, index)?),
            _ => None,
        };
        let steps = self.engine.observe(
            &mut self.state,
            &annotated,
            self.annotator.map(),
            quiz.as_ref(),
        )?;
        if quiz.is_some() {
            self.last_quiz.clone_from(&quiz);
        }
        let delivered = self.deliver(&steps, responder)?;
        Ok(PushOutput {
            annotated,
            quiz,
            steps,
            delivered,
        })
    }

    /// Ends the session at `session_end`, resolving a pending Hint1.
    pub fn finish(
        &mut self,
        session_end: f64,
        responder: &mut dyn Responder,
    ) -> Result<(Vec<Step>, Vec<ScaffoldDelivery>), EngineError> {
        let steps = self.engine.finish(&mut self.state, session_end);
        let delivered = self.deliver(&steps, responder)?;
        Ok((steps, delivered))
    }

    fn deliver(
        &self,
        steps: &[Step],
        responder: &mut dyn Responder,
    ) -> Result<Vec<ScaffoldDelivery>, EngineError> {
        steps
            .iter()
            .filter(|s| s.delivered())
            .map(|s| {
                let d = &s.detection;
                let transcript = self.trees.converse(
                    d.kind,
                    &d.targets,
                    &self.student,
                    self.engine.expert(),
                    responder,
                )?;
                Ok(ScaffoldDelivery {
                    student: self.student.clone(),
                    kind: d.kind,
                    agent: d.kind.agent(),
                    timestamp: d.timestamp,
                    trigger: d.trigger.clone(),
                    targets: d.targets.clone(),
                    transcript,
                })
            })
            .collect()
    }
}

/// A fully replayed session log.
#[derive(Debug, Clone, Default)]
pub struct SessionRun {
    pub student: String,
    pub annotated: Vec<AnnotatedEvent>,
    /// Graded quizzes keyed by event index.
    pub quizzes: Vec<(usize, QuizResult)>,
    pub steps: Vec<Step>,
    pub deliveries: Vec<ScaffoldDelivery>,
    pub final_map: CausalMap,
}

impl SessionRun {
    /// Replays one student's events; the session ends when the last event
    /// ends.
    pub fn replay(
        engine: &ScaffoldEngine,
        trees: &TreeSet,
        events: &[ActionEvent],
        responder: &mut dyn Responder,
    ) -> Result<Self, EngineError> {
        let Some(first) = events.first() else {
            return Ok(Self::default());
        };
        let mut session = LiveSession::new(first.student.clone(), engine, trees);
        let mut run = SessionRun {
            student: first.student.clone(),
            ..Self::default()
        };
        let mut end = f64::NEG_INFINITY;
        for (i, e) in events.iter().enumerate() {
            end = end.max(e.end());
            let out = session.push(e.clone(), responder)?;
            if let Some(q) = out.quiz {
                run.quizzes.push((i, q));
            }
            run.annotated.push(out.annotated);
            run.steps.extend(out.steps);
            run.deliveries.extend(out.delivered);
        }
        let (steps, delivered) = session.finish(end, responder)?;
        run.steps.extend(steps);
        run.deliveries.extend(delivered);
        run.final_map = session.map().clone();
        Ok(run)
    }

    pub fn quiz_at(&self, index: usize) -> Option<&QuizResult> {
        self.quizzes
            .iter()
            .find(|(i, _)| *i == index)
            .map(|(_, q)| q)
    }
}
