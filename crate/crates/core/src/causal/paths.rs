use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{
    is_correct, CausalError, CausalLink, CausalMap, ConceptId, ExpertMap, LinkClass, LinkKey,
    Result, Sign,
};

/// Default cap on simple paths enumerated for a single query.
pub const DEFAULT_PATH_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    TargetIncreases,
    TargetDecreases,
    CannotDetermine,
}

impl Effect {
    pub fn flip(self) -> Self {
        match self {
            Effect::TargetIncreases => Effect::TargetDecreases,
            Effect::TargetDecreases => Effect::TargetIncreases,
            Effect::CannotDetermine => Effect::CannotDetermine,
        }
    }

    pub fn is_determinate(self) -> bool {
        self != Effect::CannotDetermine
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryAnswer {
    pub effect: Effect,
    /// Union of the links on every enumerated path, in key order.
    pub used_links: Vec<CausalLink>,
    pub path_count: usize,
}

/// "If `source` increases, what happens to `target`?" answered by signed
/// path counting over all simple paths.
pub fn answer_query(
    map: &CausalMap,
    source: &ConceptId,
    target: &ConceptId,
) -> Result<QueryAnswer> {
    answer_query_with_limit(map, source, target, DEFAULT_PATH_LIMIT)
}

pub fn answer_query_with_limit(
    map: &CausalMap,
    source: &ConceptId,
    target: &ConceptId,
    limit: usize,
) -> Result<QueryAnswer> {
    for c in [source, target] {
        if !map.contains_concept(c) {
            return Err(CausalError::UnknownConcept(c.clone()));
        }
    }
    let mut walk = Walk {
        map,
        target,
        limit,
        visited: HashSet::from([source]),
        stack: Vec::new(),
        balance: 0,
        paths: 0,
        used: BTreeSet::new(),
    };
    if source != target {
        walk.descend(source, Sign::Increase)?;
    }
    let effect = match walk.balance {
        b if b > 0 => Effect::TargetIncreases,
        b if b < 0 => Effect::TargetDecreases,
        _ => Effect::CannotDetermine,
    };
    let used_links = walk
        .used
        .iter()
        .filter_map(|(s, t)| map.link(s, t).cloned())
        .collect();
    Ok(QueryAnswer {
        effect,
        used_links,
        path_count: walk.paths,
    })
}

struct Walk<'a> {
    map: &'a CausalMap,
    target: &'a ConceptId,
    limit: usize,
    visited: HashSet<&'a ConceptId>,
    stack: Vec<&'a CausalLink>,
    balance: i64,
    paths: usize,
    used: BTreeSet<LinkKey>,
}

impl<'a> Walk<'a> {
    fn descend(&mut self, at: &'a ConceptId, sign: Sign) -> Result<()> {
        for link in self.map.outgoing(at) {
            let next = &link.target;
            if self.visited.contains(next) {
                continue;
            }
            let net = sign.compose(link.sign);
            self.stack.push(link);
            if next == self.target {
                self.paths += 1;
                if self.paths > self.limit {
                    return Err(CausalError::PathLimitExceeded(self.limit));
                }
                self.balance += if net == Sign::Increase { 1 } else { -1 };
                self.used.extend(self.stack.iter().map(|l| l.key()));
            } else {
                self.visited.insert(next);
                self.descend(next, net)?;
                self.visited.remove(next);
            }
            self.stack.pop();
        }
        Ok(())
    }
}

/// Correct on an exact expert match; IncorrectShortcut when no direct expert
/// link joins the endpoints but some expert chain of two or more links does,
/// with the same net sign; Incorrect otherwise.
pub fn classify_link(link: &CausalLink, expert: &ExpertMap) -> LinkClass {
    if is_correct(link, expert) {
        return LinkClass::Correct;
    }
    let map = expert.map();
    if !map.contains_concept(&link.source)
        || !map.contains_concept(&link.target)
        || link.source == link.target
        || map.link(&link.source, &link.target).is_some()
    {
        return LinkClass::Incorrect;
    }
    let mut visited = HashSet::from([&link.source]);
    if chain_with_sign(
        map,
        &link.source,
        &link.target,
        Sign::Increase,
        link.sign,
        &mut visited,
    ) {
        LinkClass::IncorrectShortcut
    } else {
        LinkClass::Incorrect
    }
}

fn chain_with_sign<'a>(
    map: &'a CausalMap,
    at: &'a ConceptId,
    target: &ConceptId,
    sign: Sign,
    want: Sign,
    visited: &mut HashSet<&'a ConceptId>,
) -> bool {
    for link in map.outgoing(at) {
        let next = &link.target;
        if visited.contains(next) {
            continue;
        }
        let net = sign.compose(link.sign);
        if next == target {
            if net == want {
                return true;
            }
            continue;
        }
        visited.insert(next);
        let found = chain_with_sign(map, next, target, net, want, visited);
        visited.remove(next);
        if found {
            return true;
        }
    }
    false
}
