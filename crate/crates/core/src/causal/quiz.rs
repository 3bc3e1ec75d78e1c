use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::paths::{answer_query, Effect};
use super::{CausalError, CausalLink, CausalMap, ConceptId, ExpertMap, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuizScope {
    Section(String),
    Everything,
}

impl fmt::Display for QuizScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuizScope::Section(s) => write!(f, "section:{s}"),
            QuizScope::Everything => f.write_str("everything"),
        }
    }
}

impl std::str::FromStr for QuizScope {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.strip_prefix("section:") {
            Some(id) if !id.is_empty() => Ok(QuizScope::Section(id.to_owned())),
            Some(_) => Err("empty section id".into()),
            None if s == "everything" => Ok(QuizScope::Everything),
            None => Err(format!(
                "expected `everything` or `section:<id>`, got `{s}`"
            )),
        }
    }
}

/// "If `source` increases, what happens to `target`?"
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizQuestion {
    pub source: ConceptId,
    pub target: ConceptId,
    pub expert_answer: Effect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quiz {
    pub scope: QuizScope,
    pub questions: Vec<QuizQuestion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Correct,
    Incorrect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizItem {
    pub question: QuizQuestion,
    pub betty_answer: Effect,
    pub grade: Grade,
    /// Links of the student map used to reach `betty_answer`.
    pub explanation_links: Vec<CausalLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizResult {
    pub scope: QuizScope,
    pub items: Vec<QuizItem>,
    /// Percentage of items graded correct, 0 to 100.
    pub score: f64,
}

impl QuizResult {
    pub fn correct_count(&self) -> usize {
        self.items
            .iter()
            .filter(|i| i.grade == Grade::Correct)
            .count()
    }

    pub fn incorrect_count(&self) -> usize {
        self.items.len() - self.correct_count()
    }

    pub fn incorrect_items(&self) -> impl Iterator<Item = &QuizItem> {
        self.items.iter().filter(|i| i.grade == Grade::Incorrect)
    }

    pub fn correct_items(&self) -> impl Iterator<Item = &QuizItem> {
        self.items.iter().filter(|i| i.grade == Grade::Correct)
    }
}

/// One question per ordered concept pair with a determinate expert answer,
/// in lexicographic (source, target) order. A section quiz only considers
/// paths that stay inside the section.
pub fn generate_quiz(expert: &ExpertMap, scope: &QuizScope) -> Result<Quiz> {
    let scoped;
    let map = match scope {
        QuizScope::Everything => expert.map(),
        QuizScope::Section(section) => {
            let members: BTreeSet<ConceptId> = expert
                .map()
                .concepts()
                .filter(|c| &c.section == section)
                .map(|c| c.id.clone())
                .collect();
            if members.is_empty() {
                return Err(CausalError::UnknownSection(section.clone()));
            }
            scoped = expert.map().restrict_to(&members);
            &scoped
        }
    };
    let ids: Vec<&ConceptId> = map.concepts().map(|c| &c.id).collect();
    let mut questions = Vec::new();
    for source in &ids {
        for target in &ids {
            if source == target {
                continue;
            }
            let ans = answer_query(map, source, target)?;
            if ans.effect.is_determinate() {
                questions.push(QuizQuestion {
                    source: (*source).clone(),
                    target: (*target).clone(),
                    expert_answer: ans.effect,
                });
            }
        }
    }
    if questions.is_empty() {
        return Err(CausalError::EmptyQuiz);
    }
    Ok(Quiz {
        scope: scope.clone(),
        questions,
    })
}

/// Grades every question against the student's map. Concepts the student has
/// not added yet make the answer undeterminable, which is graded incorrect.
pub fn grade_quiz(student: &CausalMap, quiz: &Quiz) -> Result<QuizResult> {
    if quiz.questions.is_empty() {
        return Err(CausalError::EmptyQuiz);
    }
    let mut items = Vec::with_capacity(quiz.questions.len());
    for q in &quiz.questions {
        let (betty_answer, explanation_links) =
            if student.contains_concept(&q.source) && student.contains_concept(&q.target) {
                let ans = answer_query(student, &q.source, &q.target)?;
                (ans.effect, ans.used_links)
            } else {
                (Effect::CannotDetermine, Vec::new())
            };
        let grade = if betty_answer == q.expert_answer {
            Grade::Correct
        } else {
            Grade::Incorrect
        };
        items.push(QuizItem {
            question: q.clone(),
            betty_answer,
            grade,
            explanation_links,
        });
    }
    let correct = items.iter().filter(|i| i.grade == Grade::Correct).count();
    let score = 100.0 * correct as f64 / items.len() as f64;
    Ok(QuizResult {
        scope: quiz.scope.clone(),
        items,
        score,
    })
}
