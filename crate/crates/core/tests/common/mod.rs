#![allow(dead_code)]

use scaffolding_core::annotate::{ActionEvent, ActionKind, MapEdit};
use scaffolding_core::causal::{default_expert, CausalLink, Marking, PageId, QuizScope, Sign};

/// Builds one student's log; each event starts when the previous one ends.
pub struct Log {
    pub student: String,
    pub t: f64,
    pub events: Vec<ActionEvent>,
}

impl Log {
    pub fn new() -> Self {
        Self {
            student: "s1".into(),
            t: 0.0,
            events: Vec::new(),
        }
    }

    /// A log that starts by adding every expert concept, one second each.
    pub fn with_concepts() -> Self {
        let mut log = Self::new();
        for c in default_expert().map().concepts() {
            log.push(
                ActionKind::edit(MapEdit::AddConcept { concept: c.clone() }),
                1.0,
            );
        }
        log
    }

    pub fn push(&mut self, kind: ActionKind, duration: f64) -> usize {
        self.events.push(ActionEvent {
            student: self.student.clone(),
            timestamp: self.t,
            duration,
            kind,
        });
        self.t += duration;
        self.events.len() - 1
    }

    pub fn wait(&mut self, seconds: f64) -> &mut Self {
        self.t += seconds;
        self
    }

    pub fn read(&mut self, page: &str, duration: f64) -> usize {
        self.push(
            ActionKind::Read {
                page: PageId::from(page),
            },
            duration,
        )
    }

    pub fn note(&mut self, duration: f64) -> usize {
        self.push(ActionKind::MakeNotes { note: "n".into() }, duration)
    }

    pub fn add(&mut self, s: &str, t: &str, sign: Sign) -> usize {
        self.push(
            ActionKind::edit(MapEdit::AddLink {
                link: CausalLink::new(s, t, sign),
            }),
            5.0,
        )
    }

    pub fn add_marked(&mut self, s: &str, t: &str, sign: Sign) -> usize {
        let mut link = CausalLink::new(s, t, sign);
        link.marking = Marking::MarkedCorrect;
        self.push(ActionKind::edit(MapEdit::AddLink { link }), 5.0)
    }

    pub fn mark(&mut self, s: &str, t: &str, sign: Sign, marking: Marking) -> usize {
        let old = CausalLink::new(s, t, sign);
        let mut new = old.clone();
        new.marking = marking;
        self.push(ActionKind::edit(MapEdit::ModifyLink { old, new }), 2.0)
    }

    pub fn quiz(&mut self) -> usize {
        self.push(
            ActionKind::TakeQuiz {
                scope: QuizScope::Everything,
            },
            10.0,
        )
    }

    pub fn at(&self, index: usize) -> f64 {
        self.events[index].timestamp
    }
}
