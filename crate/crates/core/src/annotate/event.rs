use serde::{Deserialize, Serialize};

use super::Process;
use crate::causal::{CausalLink, Concept, ConceptId, PageId, QuizScope};

/// One logged learner action. Serialized as a flat JSON object, one per
/// line, e.g.
///
/// ```json
/// {"student":"h001","timestamp":12.0,"duration":41.5,"kind":"read","page":"page_sensing"}
/// {"student":"h001","timestamp":53.5,"duration":9.0,"kind":"map_edit","edit":{"op":"add_link","link":{"source":"a","target":"b","sign":"increase"}}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEvent {
    pub student: String,
    /// Seconds from session start.
    pub timestamp: f64,
    /// Seconds, non-negative.
    pub duration: f64,
    #[serde(flatten)]
    pub kind: ActionKind,
}

impl ActionEvent {
    pub fn end(&self) -> f64 {
        self.timestamp + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionKind {
    Read {
        page: PageId,
    },
    MakeNotes {
        note: String,
    },
    MapEdit {
        edit: MapEdit,
    },
    TakeQuiz {
        scope: QuizScope,
    },
    /// Index of the explained question in the most recent quiz.
    QuizExpl {
        question: usize,
    },
}

impl ActionKind {
    pub fn edit(edit: MapEdit) -> Self {
        ActionKind::MapEdit { edit }
    }

    pub fn activity(&self) -> Activity {
        match self {
            ActionKind::Read { .. } => Activity::Read,
            ActionKind::MakeNotes { .. } => Activity::MakeNotes,
            ActionKind::MapEdit { .. } => Activity::MapEdit,
            ActionKind::TakeQuiz { .. } => Activity::TakeQuiz,
            ActionKind::QuizExpl { .. } => Activity::QuizExpl,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum MapEdit {
    AddConcept {
        concept: Concept,
    },
    DeleteConcept {
        id: ConceptId,
    },
    AddLink {
        link: CausalLink,
    },
    DeleteLink {
        link: CausalLink,
    },
    /// Replaces `old` by `new`; changing only the marking is how links get
    /// marked correct or could-be-wrong.
    ModifyLink {
        old: CausalLink,
        new: CausalLink,
    },
}

impl MapEdit {
    pub fn is_link_edit(&self) -> bool {
        matches!(
            self,
            MapEdit::AddLink { .. } | MapEdit::DeleteLink { .. } | MapEdit::ModifyLink { .. }
        )
    }

    /// True for a modification that only changes the link's marking.
    pub fn is_marking(&self) -> bool {
        matches!(self, MapEdit::ModifyLink { old, new }
            if old.source == new.source && old.target == new.target && old.sign == new.sign && old.marking != new.marking)
    }
}

/// The five logged activities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Read,
    MakeNotes,
    MapEdit,
    TakeQuiz,
    QuizExpl,
}

impl Activity {
    pub const ALL: [Activity; 5] = [
        Activity::Read,
        Activity::MakeNotes,
        Activity::MapEdit,
        Activity::TakeQuiz,
        Activity::QuizExpl,
    ];

    pub fn process(self) -> Process {
        match self {
            Activity::Read | Activity::MakeNotes => Process::IA,
            Activity::MapEdit => Process::SC,
            Activity::TakeQuiz | Activity::QuizExpl => Process::SA,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activity::Read => "Read",
            Activity::MakeNotes => "Make Notes",
            Activity::MapEdit => "Causal Map Edits",
            Activity::TakeQuiz => "Take Quiz",
            Activity::QuizExpl => "Quiz Expl",
        }
    }
}
