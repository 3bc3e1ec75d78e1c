//! Seeded synthetic student sessions.
//!
//! A semi-Markov generator: each step picks the next activity from weights
//! that combine a transition affinity with the student's deficit against
//! the profile's target time shares, then draws a log-normal duration. The
//! model imitates group-level statistics only; it makes no claim about how
//! real students think.
//!
//! Every random draw comes from one ChaCha8 stream seeded from the
//! profile (or, in a cohort, from a per-student seed taken from the cohort
//! seed), so a session is a pure function of its inputs.

mod profile;

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use thiserror::Error;

use crate::analytics::{AffectLevels, AffectObservation, Group, Span, AFFECT_PERIOD_SECONDS};
use crate::annotate::{
    ActionEvent, ActionKind, Activity, AnnotateError, AnnotatedEvent, Effectiveness, MapEdit,
    SessionAnnotator,
};
use crate::causal::{
    classify_link, generate_quiz, grade_quiz, is_correct, CausalLink, CausalMap, ConceptId,
    ExpertMap, LinkClass, LinkKey, Marking, PageId, Quiz, QuizResult, QuizScope, Sign,
};
use crate::scaffold::{
    EngineError, FirstOption, LiveSession, ScaffoldDelivery, ScaffoldEngine, ScaffoldKind, TreeSet,
};

pub use profile::{
    bundled_profiles, find_profile, parse_profiles, DurationDist, Durations, ProfileError,
    ScoreDist, StudentProfile, BUNDLED_PROFILES,
};

/// Default session length in seconds.
pub const DEFAULT_BUDGET_SECONDS: f64 = 2400.0;
/// Deliveries closer than this to the previous one raise confusion for
/// the interval that follows.
pub const CONSECUTIVE_DELIVERY_SECONDS: f64 = 300.0;
/// Added to confusion likelihood after consecutive deliveries.
pub const CONFUSION_BUMP: f64 = 0.05;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("duration budget must be positive, got {0}")]
    BadBudget(f64),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("the engine was built on a different expert map")]
    ExpertMismatch,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
}

/// Engine and conversation trees to run in the loop.
#[derive(Clone, Copy)]
pub struct EngineHandle<'a> {
    pub engine: &'a ScaffoldEngine,
    pub trees: &'a TreeSet,
}

/// Everything one simulated session produced.
#[derive(Debug, Clone)]
pub struct SessionLog {
    pub student: String,
    pub profile: String,
    pub events: Vec<ActionEvent>,
    pub annotated: Vec<AnnotatedEvent>,
    pub affect: Vec<AffectObservation>,
    /// Empty unless an engine ran in the loop.
    pub deliveries: Vec<ScaffoldDelivery>,
    pub final_map: CausalMap,
    /// End of the last event.
    pub session_end: f64,
    pub pre: f64,
    pub post: f64,
    pub test_max: f64,
}

/// Share of link additions that raised the map score.
pub fn edit_effectiveness(annotated: &[AnnotatedEvent]) -> Option<f64> {
    let adds: Vec<Effectiveness> = annotated
        .iter()
        .filter(|a| {
            matches!(
                a.event.kind,
                ActionKind::MapEdit {
                    edit: MapEdit::AddLink { .. }
                }
            )
        })
        .map(|a| a.effectiveness)
        .collect();
    (!adds.is_empty()).then(|| {
        adds.iter().filter(|&&e| e == Effectiveness::Eff).count() as f64 / adds.len() as f64
    })
}

/// Quiz scopes that yield at least one question.
pub fn valid_scopes(expert: &ExpertMap) -> Vec<QuizScope> {
    let mut out = vec![QuizScope::Everything];
    for s in expert.map().sections() {
        let scope = QuizScope::Section(s.to_string());
        if generate_quiz(expert, &scope).is_ok() {
            out.push(scope);
        }
    }
    out
}

enum Driver<'a> {
    Plain {
        annotator: SessionAnnotator<'a>,
        quizzes: HashMap<QuizScope, Quiz>,
        expert: &'a ExpertMap,
    },
    Live(Box<LiveSession<'a>>),
}

struct Pushed {
    annotated: AnnotatedEvent,
    quiz: Option<QuizResult>,
    delivered: Vec<ScaffoldDelivery>,
}

impl Driver<'_> {
    fn map(&self) -> &CausalMap {
        match self {
            Driver::Plain { annotator, .. } => annotator.map(),
            Driver::Live(s) => s.map(),
        }
    }

    fn push(&mut self, event: ActionEvent) -> Result<Pushed, SimError> {
        match self {
            Driver::Plain {
                annotator,
                quizzes,
                expert,
            } => {
                let annotated = annotator.push(event)?;
                let quiz = match &annotated.event.kind {
                    ActionKind::TakeQuiz { scope } => {
                        let quiz = quizzes.entry(scope.clone()).or_insert_with(|| {
                            generate_quiz(expert, scope).expect("only valid scopes are issued")
                        });
                        Some(grade_quiz(annotator.map(), quiz).expect("quiz has questions"))
                    }
                    _ => None,
                };
                Ok(Pushed {
                    annotated,
                    quiz,
                    delivered: Vec::new(),
                })
            }
            Driver::Live(s) => {
                let out = s.push(event, &mut FirstOption)?;
                Ok(Pushed {
                    annotated: out.annotated,
                    quiz: out.quiz,
                    delivered: out.delivered,
                })
            }
        }
    }

    fn finish(&mut self, end: f64) -> Result<Vec<ScaffoldDelivery>, SimError> {
        match self {
            Driver::Plain { .. } => Ok(Vec::new()),
            Driver::Live(s) => Ok(s.finish(end, &mut FirstOption)?.1),
        }
    }
}

#[derive(Debug, Clone)]
enum Intent {
    Read(Option<PageId>),
    Note,
    Quiz,
    Explain,
    Add(CausalLink),
    Delete(CausalLink),
    Mark(CausalLink, Marking),
}

impl Intent {
    fn activity(&self) -> Activity {
        match self {
            Intent::Read(_) => Activity::Read,
            Intent::Note => Activity::MakeNotes,
            Intent::Quiz => Activity::TakeQuiz,
            Intent::Explain => Activity::QuizExpl,
            Intent::Add(_) | Intent::Delete(_) | Intent::Mark(..) => Activity::MapEdit,
        }
    }
}

/// Transition affinity from the previous activity (rows) to the next
/// (columns), in `Activity::ALL` order.
const AFFINITY: [[f64; 5]; 5] = [
    [1.0, 1.0, 3.0, 0.4, 0.2],
    [1.5, 0.2, 2.0, 0.5, 0.2],
    [1.0, 0.3, 1.5, 1.0, 0.3],
    [2.0, 0.3, 1.5, 0.3, 2.0],
    [1.5, 0.3, 2.0, 0.3, 0.5],
];
/// Extra edit-to-quiz affinity at quiz propensity 1.
const QUIZ_PULL: f64 = 4.0;
/// Seconds of look-ahead when computing time deficits.
const LOOKAHEAD: f64 = 30.0;
/// Weight floor, in seconds of target time, so no allowed activity starves.
const FLOOR: f64 = 3.0;
/// Concept additions take this fraction of a drawn edit duration.
const CONCEPT_EDIT_FRACTION: f64 = 0.3;
/// Chance that an edit step goes after a suspected wrong link first.
const FIX_FIRST: f64 = 0.7;
/// Chance that a quiz covers everything rather than one section.
const WHOLE_MAP_QUIZ: f64 = 0.6;

fn index(a: Activity) -> usize {
    Activity::ALL
        .iter()
        .position(|&b| b == a)
        .expect("listed activity")
}

fn student_link(l: &CausalLink) -> CausalLink {
    CausalLink::new(l.source.as_str(), l.target.as_str(), l.sign)
}

struct Sim<'a> {
    p: &'a StudentProfile,
    expert: &'a ExpertMap,
    student: String,
    rng: ChaCha8Rng,
    driver: Driver<'a>,
    scopes: Vec<QuizScope>,
    pages: Vec<PageId>,
    shortcuts: Vec<CausalLink>,
    t: f64,
    spent: [f64; 5],
    prev: Option<Activity>,
    last_page: Option<PageId>,
    read_pages: BTreeSet<PageId>,
    suspects: BTreeSet<LinkKey>,
    confirmed: BTreeSet<LinkKey>,
    last_quiz_items: usize,
    pending: VecDeque<Intent>,
    events: Vec<ActionEvent>,
    annotated: Vec<AnnotatedEvent>,
    deliveries: Vec<ScaffoldDelivery>,
}

impl<'a> Sim<'a> {
    fn map(&self) -> &CausalMap {
        self.driver.map()
    }

    fn duration(&mut self, a: Activity) -> f64 {
        let d = self.p.durations.get(a);
        let mu = d.mean.ln() - d.spread * d.spread / 2.0;
        let ln = LogNormal::new(mu, d.spread).expect("validated spread");
        ln.sample(&mut self.rng).max(1.0)
    }

    fn allowed(&self, a: Activity) -> bool {
        self.p.activity_mix.get(a) > 0.0
    }

    /// Links on pages the student read, most recent page first.
    fn read_links(&self) -> Vec<&'a CausalLink> {
        let expert: &'a ExpertMap = self.expert;
        let mut out: Vec<&'a CausalLink> = Vec::new();
        if let Some(page) = &self.last_page {
            out.extend(
                expert
                    .map()
                    .links()
                    .filter(|l| l.source_page.as_ref() == Some(page)),
            );
        }
        for page in &self.read_pages {
            if Some(page) != self.last_page.as_ref() {
                out.extend(
                    expert
                        .map()
                        .links()
                        .filter(|l| l.source_page.as_ref() == Some(page)),
                );
            }
        }
        out
    }

    fn free(&self, source: &ConceptId, target: &ConceptId) -> bool {
        source != target && self.map().link(source, target).is_none()
    }

    fn correct_candidate(&mut self) -> Option<CausalLink> {
        let missing: Vec<&CausalLink> = self
            .expert
            .map()
            .links()
            .filter(|l| self.free(&l.source, &l.target))
            .collect();
        if missing.is_empty() {
            return None;
        }
        let from_reading: Vec<&CausalLink> = missing
            .iter()
            .copied()
            .filter(|l| {
                l.source_page
                    .as_ref()
                    .is_some_and(|p| self.read_pages.contains(p))
            })
            .collect();
        let unread: Vec<&CausalLink> = missing
            .iter()
            .copied()
            .filter(|l| !from_reading.contains(l))
            .collect();
        let pool = if !from_reading.is_empty()
            && (unread.is_empty() || self.rng.random_bool(self.p.coherence))
        {
            &from_reading
        } else if !unread.is_empty() {
            &unread
        } else {
            &missing
        };
        pool.choose(&mut self.rng).map(|l| student_link(l))
    }

    fn wrong_sign(&mut self) -> Option<CausalLink> {
        let near: Vec<&CausalLink> = self
            .read_links()
            .into_iter()
            .filter(|l| self.free(&l.source, &l.target))
            .collect();
        let pool: Vec<&CausalLink> = if near.is_empty() || !self.rng.random_bool(self.p.coherence) {
            self.expert
                .map()
                .links()
                .filter(|l| self.free(&l.source, &l.target))
                .collect()
        } else {
            near
        };
        pool.choose(&mut self.rng)
            .map(|l| CausalLink::new(l.source.as_str(), l.target.as_str(), l.sign.flip()))
    }

    fn wrong_endpoint(&mut self) -> Option<CausalLink> {
        let concepts: Vec<&ConceptId> = self.expert.map().concepts().map(|c| &c.id).collect();
        let near: Vec<&ConceptId> = self
            .read_links()
            .iter()
            .flat_map(|l| [&l.source, &l.target])
            .collect();
        let source = *near
            .choose(&mut self.rng)
            .or_else(|| concepts.choose(&mut self.rng))?;
        let mut targets: Vec<CausalLink> = Vec::new();
        for target in &concepts {
            if !self.free(source, target) {
                continue;
            }
            for sign in [Sign::Increase, Sign::Decrease] {
                let link = CausalLink::new(source.as_str(), target.as_str(), sign);
                if classify_link(&link, self.expert) == LinkClass::Incorrect {
                    targets.push(link);
                }
            }
        }
        targets.choose(&mut self.rng).cloned()
    }

    fn shortcut(&mut self) -> Option<CausalLink> {
        let near: BTreeSet<&ConceptId> = self
            .read_links()
            .iter()
            .flat_map(|l| [&l.source, &l.target])
            .collect();
        let free: Vec<&CausalLink> = self
            .shortcuts
            .iter()
            .filter(|l| self.free(&l.source, &l.target))
            .collect();
        let close: Vec<&CausalLink> = free
            .iter()
            .copied()
            .filter(|l| near.contains(&l.source))
            .collect();
        let pool = if close.is_empty() { &free } else { &close };
        pool.choose(&mut self.rng).map(|l| (*l).clone())
    }

    fn incorrect_candidate(&mut self) -> Option<CausalLink> {
        let shortcut_first = self.rng.random_bool(self.p.shortcut_share);
        let pick = if shortcut_first {
            self.shortcut()
        } else if self.rng.random_bool(0.5) {
            self.wrong_sign().or_else(|| self.wrong_endpoint())
        } else {
            self.wrong_endpoint().or_else(|| self.wrong_sign())
        };
        pick.or_else(|| {
            if shortcut_first {
                self.wrong_endpoint()
            } else {
                self.shortcut()
            }
        })
    }

    fn current(&self, key: &LinkKey) -> Option<CausalLink> {
        self.map().link(&key.0, &key.1).cloned()
    }

    /// The next map edit, or `None` when there is nothing left to change.
    fn edit_intent(&mut self) -> Option<Intent> {
        let suspects: Vec<CausalLink> = self
            .suspects
            .iter()
            .filter_map(|k| self.current(k))
            .collect();
        if !suspects.is_empty() && self.rng.random_bool(FIX_FIRST) {
            return suspects.choose(&mut self.rng).cloned().map(Intent::Delete);
        }
        if self.correct_candidate_exists() {
            let link = if self.rng.random_bool(self.p.read_effectiveness) {
                self.correct_candidate()
            } else {
                self.incorrect_candidate()
                    .or_else(|| self.correct_candidate())
            };
            return link.map(Intent::Add);
        }
        let links: Vec<CausalLink> = self.map().links().cloned().collect();
        let wrong: Vec<&CausalLink> = links
            .iter()
            .filter(|l| !is_correct(l, self.expert))
            .collect();
        if let Some(l) = wrong.choose(&mut self.rng) {
            return Some(Intent::Delete((*l).clone()));
        }
        let unmarked: Vec<&CausalLink> = links
            .iter()
            .filter(|l| l.marking != Marking::MarkedCorrect)
            .collect();
        unmarked
            .choose(&mut self.rng)
            .map(|l| Intent::Mark((*l).clone(), Marking::MarkedCorrect))
    }

    fn correct_candidate_exists(&self) -> bool {
        self.expert
            .map()
            .links()
            .any(|l| self.free(&l.source, &l.target))
    }

    fn pick_activity(&mut self) -> Option<(Activity, Option<Intent>)> {
        let elapsed = self.t;
        let mut edit = None;
        let mut weights = [0.0; 5];
        for (i, &a) in Activity::ALL.iter().enumerate() {
            if !self.allowed(a) {
                continue;
            }
            let available = match a {
                Activity::MakeNotes => !self.read_pages.is_empty(),
                Activity::QuizExpl => self.last_quiz_items > 0,
                Activity::MapEdit => {
                    edit = self.edit_intent();
                    edit.is_some()
                }
                _ => true,
            };
            if !available {
                continue;
            }
            let target = self.p.activity_mix.get(a);
            let deficit = target * (elapsed + LOOKAHEAD) - self.spent[i];
            let mut affinity = self.prev.map_or(1.0, |p| AFFINITY[index(p)][i]);
            if self.prev == Some(Activity::MapEdit) && a == Activity::TakeQuiz {
                affinity += QUIZ_PULL * self.p.quiz_propensity;
            }
            weights[i] = (deficit.max(0.0) + FLOOR * target) * affinity;
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        let mut x = self.rng.random_range(0.0..total);
        for (i, w) in weights.iter().enumerate() {
            if x < *w {
                let a = Activity::ALL[i];
                return Some((a, if a == Activity::MapEdit { edit } else { None }));
            }
            x -= w;
        }
        let last = weights.iter().rposition(|w| *w > 0.0)?;
        let a = Activity::ALL[last];
        Some((a, if a == Activity::MapEdit { edit } else { None }))
    }

    fn still_valid(&self, intent: &Intent) -> bool {
        if !self.allowed(intent.activity()) {
            return false;
        }
        match intent {
            Intent::Delete(l) | Intent::Mark(l, _) => {
                self.map().link(&l.source, &l.target) == Some(l)
            }
            Intent::Add(l) => self.free(&l.source, &l.target),
            Intent::Explain => self.last_quiz_items > 0,
            _ => true,
        }
    }

    fn next_intent(&mut self) -> Option<Intent> {
        while let Some(i) = self.pending.pop_front() {
            if self.still_valid(&i) {
                return Some(i);
            }
        }
        let (activity, edit) = self.pick_activity()?;
        Some(match activity {
            Activity::Read => Intent::Read(None),
            Activity::MakeNotes => Intent::Note,
            Activity::MapEdit => edit.expect("edit intent drawn with its activity"),
            Activity::TakeQuiz => Intent::Quiz,
            Activity::QuizExpl => Intent::Explain,
        })
    }

    fn choose_page(&mut self) -> PageId {
        let wanted: Vec<PageId> = self
            .pages
            .iter()
            .filter(|p| {
                self.expert
                    .page_links(p)
                    .any(|l| self.free(&l.source, &l.target))
            })
            .cloned()
            .collect();
        if !wanted.is_empty() && self.rng.random_bool(0.6) {
            return wanted.choose(&mut self.rng).expect("nonempty").clone();
        }
        self.pages
            .choose(&mut self.rng)
            .expect("expert has pages")
            .clone()
    }

    fn kinds_for(&mut self, intent: Intent) -> Vec<(ActionKind, f64)> {
        let activity = intent.activity();
        let d = self.duration(activity);
        match intent {
            Intent::Read(page) => {
                let page = page.unwrap_or_else(|| self.choose_page());
                vec![(ActionKind::Read { page }, d)]
            }
            Intent::Note => {
                let page = self
                    .last_page
                    .clone()
                    .map_or_else(String::new, |p| p.to_string());
                vec![(
                    ActionKind::MakeNotes {
                        note: format!("notes on {page}"),
                    },
                    d,
                )]
            }
            Intent::Quiz => {
                let scope = if self.scopes.len() == 1 || self.rng.random_bool(WHOLE_MAP_QUIZ) {
                    QuizScope::Everything
                } else {
                    self.scopes[1..]
                        .choose(&mut self.rng)
                        .expect("section scopes")
                        .clone()
                };
                vec![(ActionKind::TakeQuiz { scope }, d)]
            }
            Intent::Explain => {
                let question = self.rng.random_range(0..self.last_quiz_items);
                vec![(ActionKind::QuizExpl { question }, d)]
            }
            Intent::Add(link) => {
                let mut out = Vec::new();
                for id in [&link.source, &link.target] {
                    if !self.map().contains_concept(id)
                        && !out.iter().any(|(k, _)| adds_concept(k, id))
                    {
                        let concept = self
                            .expert
                            .map()
                            .concept(id)
                            .expect("expert concept")
                            .clone();
                        out.push((
                            ActionKind::edit(MapEdit::AddConcept { concept }),
                            d * CONCEPT_EDIT_FRACTION,
                        ));
                    }
                }
                out.push((ActionKind::edit(MapEdit::AddLink { link }), d));
                out
            }
            Intent::Delete(link) => vec![(ActionKind::edit(MapEdit::DeleteLink { link }), d)],
            Intent::Mark(old, marking) => {
                let mut new = old.clone();
                new.marking = marking;
                vec![(
                    ActionKind::edit(MapEdit::ModifyLink { old, new }),
                    d * CONCEPT_EDIT_FRACTION,
                )]
            }
        }
    }

    fn emit(&mut self, kind: ActionKind, duration: f64) -> Result<(), SimError> {
        let activity = kind.activity();
        if let ActionKind::Read { page } = &kind {
            self.last_page = Some(page.clone());
            self.read_pages.insert(page.clone());
        }
        let event = ActionEvent {
            student: self.student.clone(),
            timestamp: self.t,
            duration,
            kind,
        };
        self.t += duration;
        self.spent[index(activity)] += duration;
        self.prev = Some(activity);
        self.events.push(event.clone());
        let out = self.driver.push(event)?;
        if let Some(q) = &out.quiz {
            self.learn_from_quiz(q);
        }
        self.annotated.push(out.annotated);
        for d in out.delivered {
            self.comply(&d);
            self.deliveries.push(d);
        }
        Ok(())
    }

    fn learn_from_quiz(&mut self, quiz: &QuizResult) {
        self.last_quiz_items = quiz.items.len();
        for item in quiz.incorrect_items() {
            for l in &item.explanation_links {
                if !is_correct(l, self.expert) && self.rng.random_bool(self.p.debug_skill) {
                    self.suspects.insert(l.key());
                }
            }
        }
        for item in quiz.correct_items() {
            self.confirmed
                .extend(item.explanation_links.iter().map(CausalLink::key));
        }
        if quiz.correct_count() > 0 && self.rng.random_bool(self.p.self_marking) {
            self.queue_marks();
        }
    }

    fn queue_marks(&mut self) {
        let keys: Vec<LinkKey> = self.confirmed.iter().cloned().collect();
        for key in keys {
            if let Some(l) = self
                .current(&key)
                .filter(|l| l.marking == Marking::Unmarked)
            {
                self.pending
                    .push_back(Intent::Mark(l, Marking::MarkedCorrect));
                if self.pending.len() >= 2 {
                    break;
                }
            }
        }
    }

    fn comply(&mut self, d: &ScaffoldDelivery) {
        if !self.rng.random_bool(self.p.compliance(d.kind)) {
            return;
        }
        let target = d.targets.link.as_ref().and_then(|l| self.current(&l.key()));
        match d.kind {
            ScaffoldKind::Hint1 => self.queue_marks(),
            ScaffoldKind::Hint2 | ScaffoldKind::Enc2 => self.pending.push_front(Intent::Quiz),
            ScaffoldKind::Hint3 => {
                if let Some(l) = target.filter(|l| !is_correct(l, self.expert)) {
                    self.suspects.insert(l.key());
                    self.pending
                        .push_front(Intent::Mark(l, Marking::MarkedCouldBeWrong));
                }
            }
            ScaffoldKind::Hint4 | ScaffoldKind::Hint5 => {
                if let Some(l) = target.filter(|l| !is_correct(l, self.expert)) {
                    self.pending.push_front(Intent::Delete(l));
                }
            }
            ScaffoldKind::Hint6 => {
                let page = d.targets.page.clone().or_else(|| Some(self.choose_page()));
                self.pending.push_front(Intent::Read(page));
            }
            ScaffoldKind::Enc1 | ScaffoldKind::Enc3 => {}
        }
    }
}

fn adds_concept(kind: &ActionKind, id: &ConceptId) -> bool {
    matches!(kind, ActionKind::MapEdit { edit: MapEdit::AddConcept { concept } } if &concept.id == id)
}

/// Every expert-path shortcut the simulator may add, in a fixed order.
fn shortcut_links(expert: &ExpertMap) -> Vec<CausalLink> {
    let ids: Vec<&ConceptId> = expert.map().concepts().map(|c| &c.id).collect();
    let mut out = Vec::new();
    for s in &ids {
        for t in &ids {
            for sign in [Sign::Increase, Sign::Decrease] {
                let link = CausalLink::new(s.as_str(), t.as_str(), sign);
                if classify_link(&link, expert) == LinkClass::IncorrectShortcut {
                    out.push(link);
                }
            }
        }
    }
    out
}

/// Affect readings at 0, 20, 40, ... seconds: ⌈end / 20⌉ of them.
fn affect_stream(
    p: &StudentProfile,
    student: &str,
    end: f64,
    deliveries: &[ScaffoldDelivery],
    rng: &mut ChaCha8Rng,
) -> Vec<AffectObservation> {
    let mut bumps: Vec<Span> = Vec::new();
    for (i, pair) in deliveries.windows(2).enumerate() {
        if pair[1].timestamp - pair[0].timestamp <= CONSECUTIVE_DELIVERY_SECONDS {
            let until = deliveries.get(i + 2).map_or(end, |d| d.timestamp);
            bumps.push(Span::new(pair[1].timestamp, until));
        }
    }
    let noise = Normal::new(0.0, p.affect_noise).expect("validated noise");
    let n = (end / AFFECT_PERIOD_SECONDS).ceil() as usize;
    (0..n)
        .map(|k| {
            let t = k as f64 * AFFECT_PERIOD_SECONDS;
            let mut v = p.affect_baseline.values();
            for x in v.iter_mut() {
                *x += noise.sample(rng);
            }
            if bumps.iter().any(|s| s.owns(t)) {
                v[3] += CONFUSION_BUMP;
            }
            AffectObservation {
                student: student.to_string(),
                timestamp: t,
                levels: AffectLevels::from_values(v.map(|x| x.clamp(0.0, 1.0))),
            }
        })
        .collect()
}

fn test_scores(p: &StudentProfile, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let max = p.test_max;
    let pre_draw = Normal::new(p.pre_test.mean, p.pre_test.sd)
        .expect("validated sd")
        .sample(rng);
    let pre = pre_draw.round().clamp(0.0, (max - 1.0).max(0.0));
    let gain = Normal::new(p.gain.mean, p.gain.sd)
        .expect("validated sd")
        .sample(rng)
        .clamp(-1.0, 1.0);
    let post = (pre + gain * (max - pre)).round().clamp(0.0, max);
    (pre, post)
}

/// Simulates one student for `budget` seconds using `profile.seed`. With an
/// engine, scaffolds are delivered as the session unfolds and simulated
/// compliance reacts to them; the engine must use `expert`.
pub fn simulate_session(
    profile: &StudentProfile,
    student: &str,
    expert: &ExpertMap,
    budget: f64,
    engine: Option<EngineHandle<'_>>,
) -> Result<SessionLog, SimError> {
    if !(budget > 0.0) || !budget.is_finite() {
        return Err(SimError::BadBudget(budget));
    }
    profile.validate()?;
    let driver = match engine {
        Some(h) => {
            if h.engine.expert() != expert {
                return Err(SimError::ExpertMismatch);
            }
            Driver::Live(Box::new(LiveSession::new(student, h.engine, h.trees)))
        }
        None => Driver::Plain {
            annotator: SessionAnnotator::new(
                expert,
                crate::scaffold::EngineConfig::default().long_threshold_seconds,
            ),
            quizzes: HashMap::new(),
            expert,
        },
    };
    let mut sim = Sim {
        p: profile,
        expert,
        student: student.to_string(),
        rng: ChaCha8Rng::seed_from_u64(profile.seed),
        driver,
        scopes: valid_scopes(expert),
        pages: expert.pages().map(|(p, _)| p.clone()).collect(),
        shortcuts: shortcut_links(expert),
        t: 0.0,
        spent: [0.0; 5],
        prev: None,
        last_page: None,
        read_pages: BTreeSet::new(),
        suspects: BTreeSet::new(),
        confirmed: BTreeSet::new(),
        last_quiz_items: 0,
        pending: VecDeque::new(),
        events: Vec::new(),
        annotated: Vec::new(),
        deliveries: Vec::new(),
    };
    'session: while sim.t < budget {
        let Some(intent) = sim.next_intent() else {
            break;
        };
        for (kind, duration) in sim.kinds_for(intent) {
            let left = budget - sim.t;
            if left <= 0.0 {
                break 'session;
            }
            sim.emit(kind, duration.min(left))?;
        }
    }
    let end = sim.t;
    let tail = sim.driver.finish(end)?;
    sim.deliveries.extend(tail);
    let final_map = sim.map().clone();
    let mut rng = sim.rng;
    let affect = affect_stream(profile, student, end, &sim.deliveries, &mut rng);
    let (pre, post) = test_scores(profile, &mut rng);
    Ok(SessionLog {
        student: student.to_string(),
        profile: profile.name.clone(),
        events: sim.events,
        annotated: sim.annotated,
        affect,
        deliveries: sim.deliveries,
        final_map,
        session_end: end,
        pre,
        post,
        test_max: profile.test_max,
    })
}

/// One planned cohort member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohortMember {
    pub student: String,
    pub group: Group,
    pub seed: u64,
}

/// Student ids (`h001`..., `l001`...) with seeds drawn in order from a
/// ChaCha8 stream on `seed`.
pub fn cohort_plan(n_high: usize, n_low: usize, seed: u64) -> Vec<CohortMember> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let high = (1..=n_high).map(|i| (format!("h{i:03}"), Group::High));
    let low = (1..=n_low).map(|i| (format!("l{i:03}"), Group::Low));
    high.chain(low)
        .map(|(student, group)| CohortMember {
            student,
            group,
            seed: master.random(),
        })
        .collect()
}

/// Simulates one planned member with its group's profile.
pub fn simulate_member(
    member: &CohortMember,
    profiles: (&StudentProfile, &StudentProfile),
    expert: &ExpertMap,
    budget: f64,
    engine: Option<EngineHandle<'_>>,
) -> Result<SessionLog, SimError> {
    let base = match member.group {
        Group::High => profiles.0,
        Group::Low => profiles.1,
    };
    let profile = StudentProfile {
        seed: member.seed,
        ..base.clone()
    };
    simulate_session(&profile, &member.student, expert, budget, engine)
}

/// A whole cohort, High students first.
pub fn simulate_cohort(
    n_high: usize,
    n_low: usize,
    seed: u64,
    profiles: (&StudentProfile, &StudentProfile),
    expert: &ExpertMap,
    budget: f64,
    engine: Option<EngineHandle<'_>>,
) -> Result<Vec<(Group, SessionLog)>, SimError> {
    cohort_plan(n_high, n_low, seed)
        .iter()
        .map(|m| {
            Ok((
                m.group,
                simulate_member(m, profiles, expert, budget, engine)?,
            ))
        })
        .collect()
}
