//! Causal maps: the student's artifact and the expert map it is scored against.
//!
//! A map is a directed graph of concepts joined by signed links. The expert
//! map additionally carries resource pages, each supporting a set of expert
//! links. Scoring, shortcut detection and query answering all live here.

mod domain;
mod format;
mod paths;
mod quiz;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use domain::{default_expert, default_expert_source};
pub use format::{
    load_expert, load_map, parse_expert, parse_map, write_expert, write_map, FormatError,
};
pub use paths::{
    answer_query, answer_query_with_limit, classify_link, Effect, QueryAnswer, DEFAULT_PATH_LIMIT,
};
pub use quiz::{
    generate_quiz, grade_quiz, Grade, Quiz, QuizItem, QuizQuestion, QuizResult, QuizScope,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CausalError {
    #[error("unknown concept `{0}`")]
    UnknownConcept(ConceptId),
    #[error("duplicate concept `{0}`")]
    DuplicateConcept(ConceptId),
    #[error("no link {0} -> {1}")]
    UnknownLink(ConceptId, ConceptId),
    #[error("link {0} -> {1} already exists")]
    DuplicateLink(ConceptId, ConceptId),
    #[error("self-loop on `{0}`")]
    SelfLoop(ConceptId),
    #[error("unknown section `{0}`")]
    UnknownSection(String),
    #[error("quiz has no determinate questions")]
    EmptyQuiz,
    #[error("path enumeration exceeded the limit of {0} paths")]
    PathLimitExceeded(usize),
    #[error("invalid expert map: {0}")]
    InvalidExpert(String),
}

pub type Result<T, E = CausalError> = std::result::Result<T, E>;

/// Opaque concept identifier. Ordering is lexicographic and drives every
/// deterministic iteration order in this crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(pub String);

impl ConceptId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ConceptId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PageId(pub String);

impl PageId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PageId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

/// Ordered (source, target) endpoint pair identifying a link within a map.
pub type LinkKey = (ConceptId, ConceptId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Increase,
    Decrease,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Increase => Sign::Decrease,
            Sign::Decrease => Sign::Increase,
        }
    }

    /// Sign of a chain of links (product of signs).
    pub fn compose(self, other: Sign) -> Sign {
        if self == other {
            Sign::Increase
        } else {
            Sign::Decrease
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Increase => '+',
            Sign::Decrease => '-',
        }
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Marking {
    #[default]
    Unmarked,
    MarkedCorrect,
    MarkedCouldBeWrong,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: ConceptId,
    pub name: String,
    pub section: String,
}

impl Concept {
    pub fn new(id: impl Into<String>, name: impl Into<String>, section: impl Into<String>) -> Self {
        Self {
            id: ConceptId::new(id),
            name: name.into(),
            section: section.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalLink {
    pub source: ConceptId,
    pub target: ConceptId,
    pub sign: Sign,
    #[serde(default, skip_serializing_if = "is_unmarked")]
    pub marking: Marking,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_page: Option<PageId>,
}

fn is_unmarked(m: &Marking) -> bool {
    *m == Marking::Unmarked
}

impl CausalLink {
    pub fn new(source: impl Into<String>, target: impl Into<String>, sign: Sign) -> Self {
        Self {
            source: ConceptId::new(source),
            target: ConceptId::new(target),
            sign,
            marking: Marking::Unmarked,
            source_page: None,
        }
    }

    pub fn with_page(mut self, page: impl Into<String>) -> Self {
        self.source_page = Some(PageId::new(page));
        self
    }

    pub fn key(&self) -> LinkKey {
        (self.source.clone(), self.target.clone())
    }
}

impl fmt::Display for CausalLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}-> {}",
            self.source,
            self.sign.symbol(),
            self.target
        )
    }
}

/// A directed signed graph. Concepts and links are kept in ordered maps so
/// that iteration (and therefore every derived output) is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CausalMap {
    concepts: BTreeMap<ConceptId, Concept>,
    links: BTreeMap<LinkKey, CausalLink>,
}

impl CausalMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn links(&self) -> impl Iterator<Item = &CausalLink> {
        self.links.values()
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn concept(&self, id: &ConceptId) -> Option<&Concept> {
        self.concepts.get(id)
    }

    pub fn contains_concept(&self, id: &ConceptId) -> bool {
        self.concepts.contains_key(id)
    }

    pub fn link(&self, source: &ConceptId, target: &ConceptId) -> Option<&CausalLink> {
        self.links.get(&(source.clone(), target.clone()))
    }

    /// Outgoing links of a concept in target order.
    pub fn outgoing<'a>(
        &'a self,
        source: &'a ConceptId,
    ) -> impl Iterator<Item = &'a CausalLink> + 'a {
        let lo = (source.clone(), ConceptId(String::new()));
        self.links
            .range(lo..)
            .take_while(move |((s, _), _)| s == source)
            .map(|(_, l)| l)
    }

    pub fn add_concept(&mut self, concept: Concept) -> Result<()> {
        if self.concepts.contains_key(&concept.id) {
            return Err(CausalError::DuplicateConcept(concept.id));
        }
        self.concepts.insert(concept.id.clone(), concept);
        Ok(())
    }

    /// Removes a concept together with every link incident to it.
    pub fn remove_concept(&mut self, id: &ConceptId) -> Result<(Concept, Vec<CausalLink>)> {
        let concept = self
            .concepts
            .remove(id)
            .ok_or_else(|| CausalError::UnknownConcept(id.clone()))?;
        let incident: Vec<LinkKey> = self
            .links
            .keys()
            .filter(|(s, t)| s == id || t == id)
            .cloned()
            .collect();
        let removed = incident
            .into_iter()
            .filter_map(|k| self.links.remove(&k))
            .collect();
        Ok((concept, removed))
    }

    pub fn add_link(&mut self, link: CausalLink) -> Result<()> {
        if link.source == link.target {
            return Err(CausalError::SelfLoop(link.source));
        }
        for end in [&link.source, &link.target] {
            if !self.concepts.contains_key(end) {
                return Err(CausalError::UnknownConcept(end.clone()));
            }
        }
        let key = link.key();
        if self.links.contains_key(&key) {
            return Err(CausalError::DuplicateLink(key.0, key.1));
        }
        self.links.insert(key, link);
        Ok(())
    }

    pub fn remove_link(&mut self, source: &ConceptId, target: &ConceptId) -> Result<CausalLink> {
        self.links
            .remove(&(source.clone(), target.clone()))
            .ok_or_else(|| CausalError::UnknownLink(source.clone(), target.clone()))
    }

    /// Returns a copy of the map with one link's marking replaced.
    pub fn set_marking(
        &self,
        source: &ConceptId,
        target: &ConceptId,
        marking: Marking,
    ) -> Result<CausalMap> {
        let mut out = self.clone();
        out.mark(source, target, marking)?;
        Ok(out)
    }

    /// In-place variant of [`CausalMap::set_marking`].
    pub fn mark(&mut self, source: &ConceptId, target: &ConceptId, marking: Marking) -> Result<()> {
        let link = self
            .links
            .get_mut(&(source.clone(), target.clone()))
            .ok_or_else(|| CausalError::UnknownLink(source.clone(), target.clone()))?;
        link.marking = marking;
        Ok(())
    }

    /// Sub-map induced by a set of concepts.
    pub fn restrict_to(&self, keep: &BTreeSet<ConceptId>) -> CausalMap {
        CausalMap {
            concepts: self
                .concepts
                .iter()
                .filter(|(id, _)| keep.contains(*id))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            links: self
                .links
                .iter()
                .filter(|((s, t), _)| keep.contains(s) && keep.contains(t))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn sections(&self) -> BTreeSet<&str> {
        self.concepts.values().map(|c| c.section.as_str()).collect()
    }
}

/// Ground-truth map plus the resource pages that state its links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpertMap {
    map: CausalMap,
    pages: BTreeMap<PageId, String>,
}

impl ExpertMap {
    /// Validates that every link names a listed page and every page supports
    /// at least one link.
    pub fn new(map: CausalMap, pages: BTreeMap<PageId, String>) -> Result<Self> {
        for link in map.links() {
            match &link.source_page {
                None => {
                    return Err(CausalError::InvalidExpert(format!(
                        "link {link} has no source page"
                    )));
                }
                Some(p) if !pages.contains_key(p) => {
                    return Err(CausalError::InvalidExpert(format!(
                        "link {link} cites unknown page `{p}`"
                    )));
                }
                Some(_) => {}
            }
        }
        for page in pages.keys() {
            if !map.links().any(|l| l.source_page.as_ref() == Some(page)) {
                return Err(CausalError::InvalidExpert(format!(
                    "page `{page}` supports no link"
                )));
            }
        }
        Ok(Self { map, pages })
    }

    pub fn map(&self) -> &CausalMap {
        &self.map
    }

    /// Page ids with their display titles.
    pub fn pages(&self) -> impl Iterator<Item = (&PageId, &str)> {
        self.pages.iter().map(|(k, v)| (k, v.as_str()))
    }

    pub fn page_title(&self, page: &PageId) -> Option<&str> {
        self.pages.get(page).map(String::as_str)
    }

    /// Expert links stated on a page.
    pub fn page_links<'a>(&'a self, page: &'a PageId) -> impl Iterator<Item = &'a CausalLink> + 'a {
        self.map
            .links()
            .filter(move |l| l.source_page.as_ref() == Some(page))
    }

    pub fn page_supports(&self, page: &PageId, source: &ConceptId, target: &ConceptId) -> bool {
        self.map
            .link(source, target)
            .is_some_and(|l| l.source_page.as_ref() == Some(page))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkClass {
    Correct,
    Incorrect,
    IncorrectShortcut,
}

/// Whether a student link matches an expert link exactly (endpoints and sign).
pub fn is_correct(link: &CausalLink, expert: &ExpertMap) -> bool {
    expert
        .map
        .link(&link.source, &link.target)
        .is_some_and(|e| e.sign == link.sign)
}

/// Correct links minus incorrect links.
pub fn map_score(student: &CausalMap, expert: &ExpertMap) -> i64 {
    student
        .links()
        .map(|l| if is_correct(l, expert) { 1 } else { -1 })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc_expert() -> ExpertMap {
        let mut m = CausalMap::new();
        for c in ["A", "B", "C"] {
            m.add_concept(Concept::new(c, c, "s")).unwrap();
        }
        m.add_link(CausalLink::new("A", "B", Sign::Increase).with_page("p1"))
            .unwrap();
        m.add_link(CausalLink::new("B", "C", Sign::Decrease).with_page("p1"))
            .unwrap();
        ExpertMap::new(m, BTreeMap::from([(PageId::new("p1"), "Page one".into())])).unwrap()
    }

    fn student(links: &[(&str, &str, Sign)]) -> CausalMap {
        let mut m = CausalMap::new();
        for c in ["A", "B", "C"] {
            m.add_concept(Concept::new(c, c, "s")).unwrap();
        }
        for (s, t, sign) in links {
            m.add_link(CausalLink::new(*s, *t, *sign)).unwrap();
        }
        m
    }

    #[test]
    fn empty_student_scores_zero() {
        assert_eq!(map_score(&CausalMap::new(), &abc_expert()), 0);
    }

    #[test]
    fn one_correct_one_incorrect_cancel() {
        let s = student(&[("A", "B", Sign::Increase), ("A", "C", Sign::Decrease)]);
        assert_eq!(map_score(&s, &abc_expert()), 0);
    }

    #[test]
    fn default_pack_scores_fifteen_against_itself() {
        let expert = default_expert();
        assert_eq!(expert.map().link_count(), 15);
        assert_eq!(expert.map().concept_count(), 12);
        assert_eq!(map_score(expert.map(), &expert), 15);
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        let mut m = student(&[("A", "B", Sign::Increase)]);
        assert_eq!(
            m.add_link(CausalLink::new("A", "A", Sign::Increase)),
            Err(CausalError::SelfLoop("A".into()))
        );
        assert!(matches!(
            m.add_link(CausalLink::new("A", "B", Sign::Decrease)),
            Err(CausalError::DuplicateLink(..))
        ));
        assert!(matches!(
            m.add_link(CausalLink::new("A", "Z", Sign::Decrease)),
            Err(CausalError::UnknownConcept(_))
        ));
    }

    #[test]
    fn set_marking_round_trips() {
        let m = student(&[("A", "B", Sign::Increase)]);
        let (a, b) = (ConceptId::from("A"), ConceptId::from("B"));
        let marked = m.set_marking(&a, &b, Marking::MarkedCorrect).unwrap();
        assert_eq!(marked.link(&a, &b).unwrap().marking, Marking::MarkedCorrect);
        let back = marked.set_marking(&a, &b, Marking::Unmarked).unwrap();
        assert_eq!(back, m);
        assert_eq!(
            m.set_marking(&b, &a, Marking::MarkedCorrect),
            Err(CausalError::UnknownLink(b, a))
        );
    }

    #[test]
    fn removing_concept_drops_incident_links() {
        let mut m = student(&[("A", "B", Sign::Increase), ("B", "C", Sign::Increase)]);
        let (_, removed) = m.remove_concept(&"B".into()).unwrap();
        assert_eq!(removed.len(), 2);
        assert_eq!(m.link_count(), 0);
    }

    #[test]
    fn expert_requires_pages() {
        let mut m = CausalMap::new();
        m.add_concept(Concept::new("A", "A", "s")).unwrap();
        m.add_concept(Concept::new("B", "B", "s")).unwrap();
        m.add_link(CausalLink::new("A", "B", Sign::Increase))
            .unwrap();
        assert!(matches!(
            ExpertMap::new(m.clone(), BTreeMap::new()),
            Err(CausalError::InvalidExpert(_))
        ));
        let pages = BTreeMap::from([
            (PageId::new("p"), "P".into()),
            (PageId::new("q"), "Q".into()),
        ]);
        let mut m2 = m.clone();
        m2.remove_link(&"A".into(), &"B".into()).unwrap();
        m2.add_link(CausalLink::new("A", "B", Sign::Increase).with_page("p"))
            .unwrap();
        // page q supports nothing
        assert!(matches!(
            ExpertMap::new(m2, pages),
            Err(CausalError::InvalidExpert(_))
        ));
    }

    #[test]
    fn outgoing_is_scoped_to_source() {
        let m = student(&[
            ("A", "B", Sign::Increase),
            ("A", "C", Sign::Increase),
            ("B", "C", Sign::Increase),
        ]);
        let a = ConceptId::from("A");
        let outs: Vec<_> = m
            .outgoing(&a)
            .map(|l| l.target.as_str().to_owned())
            .collect();
        assert_eq!(outs, ["B", "C"]);
    }
}
