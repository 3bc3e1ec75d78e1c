//! Differential sequence mining between two groups of students.
//!
//! Occurrences of a pattern are gap-constrained embeddings: consecutive
//! pattern elements sit at most `max_gap` tokens apart. Counting keeps the
//! largest set of occurrences whose spans do not overlap, found greedily by
//! always taking the occurrence that ends first.

mod report;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats;

pub use report::{write_report, REPORT_FOOTER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MiningError {
    #[error("pattern is empty")]
    EmptyPattern,
    #[error("group {0} has no non-empty sequences")]
    EmptyGroup(char),
    #[error("s-threshold must lie in (0, 1], got {0}")]
    BadThreshold(f64),
    #[error("max_len must be at least 2")]
    BadMaxLen,
}

/// One student's collapsed token labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub student: String,
    pub tokens: Vec<String>,
}

/// Number of span-disjoint occurrences of `pattern` in `tokens`.
pub fn count_occurrences<T: AsRef<str>, P: AsRef<str>>(
    tokens: &[T],
    pattern: &[P],
    max_gap: usize,
) -> Result<usize, MiningError> {
    if pattern.is_empty() {
        return Err(MiningError::EmptyPattern);
    }
    let m = pattern.len();
    // last[k]: latest position where an embedding of pattern[..=k] ends,
    // counting only positions after the previous counted occurrence.
    let mut last: Vec<Option<usize>> = vec![None; m];
    let mut count = 0;
    for (j, tok) in tokens.iter().enumerate() {
        let tok = tok.as_ref();
        for k in (0..m).rev() {
            if tok != pattern[k].as_ref() {
                continue;
            }
            let reachable = k == 0 || last[k - 1].is_some_and(|i| j - i <= max_gap + 1);
            if !reachable {
                continue;
            }
            if k == m - 1 {
                count += 1;
                last.iter_mut().for_each(|l| *l = None);
                break;
            }
            last[k] = Some(j);
        }
    }
    Ok(count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequentIn {
    A,
    B,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSupport {
    /// Share of the group's students with at least one occurrence.
    pub s_support: f64,
    /// Mean occurrences per student, zeros included.
    pub i_support: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsmPattern {
    pub pattern: Vec<String>,
    pub a: GroupSupport,
    pub b: GroupSupport,
    /// Pooled two-sample t on per-student counts, A minus B.
    pub t: f64,
    pub p_value: f64,
    /// Pooled-SD standardized mean difference, A minus B.
    pub effect_size: f64,
    pub frequent_in: FrequentIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MineParams {
    pub max_gap: usize,
    pub s_threshold: f64,
    pub max_len: usize,
}

impl Default for MineParams {
    fn default() -> Self {
        Self {
            max_gap: 1,
            s_threshold: 0.5,
            max_len: 4,
        }
    }
}

struct Evaluated {
    counts_a: Vec<f64>,
    counts_b: Vec<f64>,
    s_a: f64,
    s_b: f64,
}

fn evaluate(a: &[&[String]], b: &[&[String]], pattern: &[String], max_gap: usize) -> Evaluated {
    let counts = |g: &[&[String]]| -> Vec<f64> {
        g.iter()
            .map(|t| count_occurrences(t, pattern, max_gap).expect("pattern is non-empty") as f64)
            .collect()
    };
    let (counts_a, counts_b) = (counts(a), counts(b));
    let share = |c: &[f64]| c.iter().filter(|&&x| x > 0.0).count() as f64 / c.len() as f64;
    Evaluated {
        s_a: share(&counts_a),
        s_b: share(&counts_b),
        counts_a,
        counts_b,
    }
}

fn nonempty(g: &[TokenSequence]) -> Vec<&[String]> {
    g.iter()
        .filter(|s| !s.tokens.is_empty())
        .map(|s| s.tokens.as_slice())
        .collect()
}

/// Pooled t with zero-variance and tiny-sample cases made explicit.
fn compare(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    match stats::pooled_t_test(a, b) {
        Ok(r) => (r.statistic, r.p_value, r.effect_size),
        Err(stats::StatsError::DegenerateVariance) => {
            let diff = stats::mean(a) - stats::mean(b);
            if diff == 0.0 {
                (0.0, 1.0, 0.0)
            } else {
                let inf = f64::INFINITY.copysign(diff);
                (inf, 0.0, inf)
            }
        }
        Err(_) => (f64::NAN, f64::NAN, f64::NAN),
    }
}

/// Mines every pattern of length 2 to `max_len` that is s-frequent in at
/// least one group. Empty sequences are left out of both groups.
pub fn mine(
    a: &[TokenSequence],
    b: &[TokenSequence],
    params: &MineParams,
) -> Result<Vec<DsmPattern>, MiningError> {
    if !(params.s_threshold > 0.0 && params.s_threshold <= 1.0) {
        return Err(MiningError::BadThreshold(params.s_threshold));
    }
    if params.max_len < 2 {
        return Err(MiningError::BadMaxLen);
    }
    let (ga, gb) = (nonempty(a), nonempty(b));
    if ga.is_empty() {
        return Err(MiningError::EmptyGroup('A'));
    }
    if gb.is_empty() {
        return Err(MiningError::EmptyGroup('B'));
    }
    let alphabet: BTreeSet<&String> = ga.iter().chain(&gb).flat_map(|t| t.iter()).collect();
    let frequent = |e: &Evaluated| e.s_a >= params.s_threshold || e.s_b >= params.s_threshold;

    let mut out = Vec::new();
    let mut level: BTreeSet<Vec<String>> = BTreeSet::new();
    for label in &alphabet {
        let p = vec![(*label).clone()];
        if frequent(&evaluate(&ga, &gb, &p, params.max_gap)) {
            level.insert(p);
        }
    }
    let items: Vec<String> = level.iter().map(|p| p[0].clone()).collect();
    for _len in 2..=params.max_len {
        let mut next = BTreeSet::new();
        for prefix in &level {
            for x in &items {
                let mut cand = prefix.clone();
                cand.push(x.clone());
                // Any sub-pattern of a frequent pattern is frequent.
                if cand.len() > 2 && !level.contains(&cand[1..]) {
                    continue;
                }
                let e = evaluate(&ga, &gb, &cand, params.max_gap);
                if !frequent(&e) {
                    continue;
                }
                let (t, p_value, effect_size) = compare(&e.counts_a, &e.counts_b);
                let frequent_in = match (e.s_a >= params.s_threshold, e.s_b >= params.s_threshold) {
                    (true, true) => FrequentIn::Both,
                    (true, false) => FrequentIn::A,
                    _ => FrequentIn::B,
                };
                out.push(DsmPattern {
                    pattern: cand.clone(),
                    a: GroupSupport {
                        s_support: e.s_a,
                        i_support: stats::mean(&e.counts_a),
                    },
                    b: GroupSupport {
                        s_support: e.s_b,
                        i_support: stats::mean(&e.counts_b),
                    },
                    t,
                    p_value,
                    effect_size,
                    frequent_in,
                });
                next.insert(cand);
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    sort_patterns(&mut out);
    Ok(out)
}

/// Descending |t| (undefined t last), then lexicographic pattern.
pub fn sort_patterns(patterns: &mut [DsmPattern]) {
    let key = |p: &DsmPattern| if p.t.is_nan() { -1.0 } else { p.t.abs() };
    patterns.sort_by(|x, y| {
        key(y)
            .total_cmp(&key(x))
            .then_with(|| x.pattern.cmp(&y.pattern))
    });
}
