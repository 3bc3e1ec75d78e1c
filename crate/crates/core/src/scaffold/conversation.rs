//! Conversation trees.
//!
//! Trees are loaded from TOML, one `[[trees]]` table per scaffold kind:
//!
//! ```toml
//! [[trees]]
//! kind = "hint5"
//! root = "start"
//!
//! [[trees.nodes]]
//! id = "start"
//! prompt = "Betty missed some questions. Want a hint?"
//! responses = [
//!     { text = "Tell me more", next = "detail" },
//!     { text = "No thanks" },          # no `next`: exits the conversation
//! ]
//! ```
//!
//! Prompts may use `{concept}`, `{page}`, `{link}` and `{student}`
//! placeholders, filled from the delivery's target hints.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ScaffoldKind, TargetHints};
use crate::causal::ExpertMap;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConversationError {
    #[error("malformed tree for {kind}: {reason}")]
    MalformedTree { kind: ScaffoldKind, reason: String },
    #[error("response {choice} is not offered at node `{node}`")]
    InvalidResponse { node: String, choice: usize },
    #[error("no conversation tree for {0}")]
    MissingTree(ScaffoldKind),
    #[error("tree document: {0}")]
    Document(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseOption {
    pub text: String,
    /// Child node id; `None` exits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub prompt: String,
    pub responses: Vec<ResponseOption>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversationTree {
    pub kind: ScaffoldKind,
    pub root: String,
    pub nodes: Vec<Node>,
}

impl ConversationTree {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Checks the tree shape: unique ids, known children, every node offers
    /// an exit, no node has two parents (so no walk can revisit a node) and
    /// every node is reachable from the root.
    pub fn validate(&self) -> Result<(), ConversationError> {
        let bad = |reason: String| ConversationError::MalformedTree {
            kind: self.kind,
            reason,
        };
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return Err(bad(format!("duplicate node `{}`", n.id)));
            }
        }
        if !ids.contains(self.root.as_str()) {
            return Err(bad(format!("root `{}` is not a node", self.root)));
        }
        let mut parents: BTreeMap<&str, &str> = BTreeMap::new();
        for n in &self.nodes {
            if !n.responses.iter().any(|r| r.next.is_none()) {
                return Err(bad(format!("node `{}` offers no exit", n.id)));
            }
            for child in n.responses.iter().filter_map(|r| r.next.as_deref()) {
                if !ids.contains(child) {
                    return Err(bad(format!(
                        "node `{}` points at unknown node `{child}`",
                        n.id
                    )));
                }
                if child == self.root {
                    return Err(bad(format!("node `{}` points back at the root", n.id)));
                }
                if let Some(other) = parents.insert(child, &n.id) {
                    if other != n.id {
                        return Err(bad(format!("node `{child}` has two parents")));
                    }
                }
            }
        }
        let mut seen = BTreeSet::from([self.root.as_str()]);
        let mut stack = vec![self.root.as_str()];
        while let Some(id) = stack.pop() {
            let node = self.node(id).expect("ids checked above");
            for child in node.responses.iter().filter_map(|r| r.next.as_deref()) {
                if seen.insert(child) {
                    stack.push(child);
                }
            }
        }
        if let Some(lost) = ids.difference(&seen).next() {
            return Err(bad(format!("node `{lost}` is unreachable from the root")));
        }
        Ok(())
    }
}

/// Chooses a response index at each node.
pub trait Responder {
    fn respond(&mut self, kind: ScaffoldKind, node: &Node) -> usize;
}

/// Always picks the first offered response.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstOption;

impl Responder for FirstOption {
    fn respond(&mut self, _: ScaffoldKind, _: &Node) -> usize {
        0
    }
}

/// Replays a fixed list of choices, then exits.
#[derive(Debug, Clone, Default)]
pub struct Scripted {
    choices: std::collections::VecDeque<usize>,
}

impl Scripted {
    pub fn new(choices: impl IntoIterator<Item = usize>) -> Self {
        Self {
            choices: choices.into_iter().collect(),
        }
    }
}

impl Responder for Scripted {
    fn respond(&mut self, _: ScaffoldKind, node: &Node) -> usize {
        self.choices.pop_front().unwrap_or_else(|| {
            node.responses
                .iter()
                .position(|r| r.next.is_none())
                .unwrap_or(0)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptStep {
    pub node: String,
    pub prompt: String,
    pub response: String,
}

/// Walks a tree from the root until the responder picks an exit.
pub fn run_conversation(
    tree: &ConversationTree,
    responder: &mut dyn Responder,
) -> Result<Vec<TranscriptStep>, ConversationError> {
    walk(tree, responder, &|p| p.to_owned())
}

fn walk(
    tree: &ConversationTree,
    responder: &mut dyn Responder,
    render: &dyn Fn(&str) -> String,
) -> Result<Vec<TranscriptStep>, ConversationError> {
    tree.validate()?;
    let mut transcript = Vec::new();
    let mut at = tree.node(&tree.root).expect("validated");
    loop {
        let choice = responder.respond(tree.kind, at);
        let response =
            at.responses
                .get(choice)
                .ok_or_else(|| ConversationError::InvalidResponse {
                    node: at.id.clone(),
                    choice,
                })?;
        transcript.push(TranscriptStep {
            node: at.id.clone(),
            prompt: render(&at.prompt),
            response: response.text.clone(),
        });
        match &response.next {
            None => return Ok(transcript),
            Some(next) => at = tree.node(next).expect("validated"),
        }
    }
}

/// One validated tree per scaffold kind.
#[derive(Debug, Clone)]
pub struct TreeSet {
    trees: BTreeMap<ScaffoldKind, ConversationTree>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeDoc {
    trees: Vec<ConversationTree>,
}

impl TreeSet {
    pub fn get(&self, kind: ScaffoldKind) -> Option<&ConversationTree> {
        self.trees.get(&kind)
    }

    /// Runs the kind's tree with placeholders filled from `targets`.
    pub fn converse(
        &self,
        kind: ScaffoldKind,
        targets: &TargetHints,
        student: &str,
        expert: &ExpertMap,
        responder: &mut dyn Responder,
    ) -> Result<Vec<TranscriptStep>, ConversationError> {
        let tree = self.get(kind).ok_or(ConversationError::MissingTree(kind))?;
        let concept = targets
            .concept
            .as_ref()
            .map(|c| {
                expert
                    .map()
                    .concept(c)
                    .map_or_else(|| c.to_string(), |c| c.name.clone())
            })
            .unwrap_or_else(|| "one of the concepts".into());
        let page = targets
            .page
            .as_ref()
            .map(|p| {
                expert
                    .page_title(p)
                    .map_or_else(|| p.to_string(), str::to_owned)
            })
            .unwrap_or_else(|| "the science book".into());
        let link = targets
            .link
            .as_ref()
            .map(|l| l.to_string())
            .unwrap_or_else(|| "one of the links".into());
        let render = |p: &str| {
            p.replace("{concept}", &concept)
                .replace("{page}", &page)
                .replace("{link}", &link)
                .replace("{student}", student)
        };
        walk(tree, responder, &render)
    }
}

pub fn parse_trees(src: &str) -> Result<TreeSet, ConversationError> {
    let doc: TreeDoc =
        toml::from_str(src).map_err(|e| ConversationError::Document(e.to_string()))?;
    let mut trees = BTreeMap::new();
    for tree in doc.trees {
        tree.validate()?;
        let kind = tree.kind;
        if trees.insert(kind, tree).is_some() {
            return Err(ConversationError::Document(format!("two trees for {kind}")));
        }
    }
    if let Some(missing) = ScaffoldKind::ALL.iter().find(|k| !trees.contains_key(k)) {
        return Err(ConversationError::MissingTree(*missing));
    }
    Ok(TreeSet { trees })
}

const BUNDLED: &str = include_str!("../../data/conversation_trees.toml");

pub fn bundled_trees() -> TreeSet {
    parse_trees(BUNDLED).expect("bundled conversation trees are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: &str, responses: &[(&str, Option<&str>)]) -> Node {
        Node {
            id: id.into(),
            prompt: format!("prompt {id}"),
            responses: responses
                .iter()
                .map(|(t, n)| ResponseOption {
                    text: (*t).into(),
                    next: n.map(Into::into),
                })
                .collect(),
        }
    }

    fn tree(nodes: Vec<Node>) -> ConversationTree {
        ConversationTree {
            kind: ScaffoldKind::Hint5,
            root: "a".into(),
            nodes,
        }
    }

    #[test]
    fn single_node_exit() {
        let t = tree(vec![node("a", &[("bye", None)])]);
        let out = run_conversation(&t, &mut FirstOption).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].response, "bye");
    }

    #[test]
    fn malformed_trees_are_rejected() {
        let unreachable = tree(vec![node("a", &[("x", None)]), node("b", &[("x", None)])]);
        assert!(matches!(
            run_conversation(&unreachable, &mut FirstOption),
            Err(ConversationError::MalformedTree { .. })
        ));
        let no_exit = tree(vec![
            node("a", &[("go", Some("b"))]),
            node("b", &[("x", None)]),
        ]);
        assert!(no_exit.validate().is_err());
        let dangling = tree(vec![node("a", &[("go", Some("zz")), ("x", None)])]);
        assert!(dangling.validate().is_err());
        let cyclic = tree(vec![
            node("a", &[("go", Some("b")), ("x", None)]),
            node("b", &[("back", Some("a")), ("x", None)]),
        ]);
        assert!(cyclic.validate().is_err());
        let diamond = tree(vec![
            node("a", &[("l", Some("b")), ("r", Some("c")), ("x", None)]),
            node("b", &[("go", Some("d")), ("x", None)]),
            node("c", &[("go", Some("d")), ("x", None)]),
            node("d", &[("x", None)]),
        ]);
        assert!(diamond.validate().is_err());
    }

    #[test]
    fn scripted_walk_and_bad_choice() {
        let t = tree(vec![
            node("a", &[("more", Some("b")), ("x", None)]),
            node("b", &[("x", None)]),
        ]);
        let out = run_conversation(&t, &mut Scripted::new([0])).unwrap();
        assert_eq!(
            out.iter().map(|s| s.node.as_str()).collect::<Vec<_>>(),
            ["a", "b"]
        );
        assert_eq!(
            run_conversation(&t, &mut Scripted::new([7])),
            Err(ConversationError::InvalidResponse {
                node: "a".into(),
                choice: 7
            })
        );
    }

    #[test]
    fn bundled_trees_cover_every_kind() {
        let set = bundled_trees();
        for k in ScaffoldKind::ALL {
            let t = set.get(k).unwrap();
            let a = run_conversation(t, &mut FirstOption).unwrap();
            let b = run_conversation(t, &mut FirstOption).unwrap();
            assert_eq!(a, b);
            assert_eq!(
                a.last()
                    .map(|s| t.node(&s.node).unwrap().responses[0].next.is_none()),
                Some(true)
            );
        }
    }

    #[test]
    fn hint5_progresses_from_general_to_specific() {
        let set = bundled_trees();
        let expert = crate::causal::default_expert();
        let link = expert.map().links().next().unwrap().clone();
        let targets = TargetHints {
            concept: Some(link.source.clone()),
            link: Some(link.clone()),
            page: None,
        };
        let out = set
            .converse(
                ScaffoldKind::Hint5,
                &targets,
                "Sam",
                &expert,
                &mut FirstOption,
            )
            .unwrap();
        assert!(out.len() >= 3);
        let concept_name = &expert.map().concept(&link.source).unwrap().name;
        let first_named = out
            .iter()
            .position(|s| s.prompt.contains(concept_name.as_str()))
            .unwrap();
        assert!(first_named > 0, "the opening prompt stays general");
        assert!(out.last().unwrap().prompt.contains(&link.to_string()));
    }
}
