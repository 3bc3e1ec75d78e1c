use serde::{Deserialize, Serialize};

use super::AnnotatedEvent;

const MULT: &str = "-Mult";

/// A run of adjacent events sharing one label. Runs of two or more carry
/// the `-Mult` suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapsedToken {
    pub label: String,
    pub count: usize,
    pub span: (f64, f64),
}

impl CollapsedToken {
    /// Label without the `-Mult` suffix.
    pub fn base_label(&self) -> &str {
        self.label.strip_suffix(MULT).unwrap_or(&self.label)
    }
}

pub fn collapse(annotated: &[AnnotatedEvent]) -> Vec<CollapsedToken> {
    collapse_labeled(
        annotated
            .iter()
            .map(|a| (a.label(), a.event.timestamp, a.event.end())),
    )
}

/// Collapses `(label, start, end)` triples.
pub fn collapse_labeled(
    items: impl IntoIterator<Item = (String, f64, f64)>,
) -> Vec<CollapsedToken> {
    let mut out: Vec<CollapsedToken> = Vec::new();
    for (label, start, end) in items {
        match out.last_mut() {
            Some(last) if last.base_label() == label => {
                last.count += 1;
                last.span.1 = end;
                if last.count == 2 {
                    last.label.push_str(MULT);
                }
            }
            _ => out.push(CollapsedToken {
                label,
                count: 1,
                span: (start, end),
            }),
        }
    }
    out
}

/// Expands tokens back into singleton `(label, start, end)` items; the
/// original per-event times are not recoverable, so each copy spans the
/// whole token.
pub fn expand(tokens: &[CollapsedToken]) -> Vec<(String, f64, f64)> {
    tokens
        .iter()
        .flat_map(|t| std::iter::repeat_n((t.base_label().to_owned(), t.span.0, t.span.1), t.count))
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn labels(items: &[&str]) -> Vec<CollapsedToken> {
        collapse_labeled(
            items
                .iter()
                .enumerate()
                .map(|(i, l)| (l.to_string(), i as f64, i as f64 + 1.0)),
        )
    }

    #[test]
    fn reads_collapse_to_mult() {
        let out = labels(&["Read", "Read", "Read", "LinkEdit-Eff"]);
        assert_eq!(out.len(), 2);
        assert_eq!((out[0].label.as_str(), out[0].count), ("Read-Mult", 3));
        assert_eq!(out[0].span, (0.0, 3.0));
        assert_eq!((out[1].label.as_str(), out[1].count), ("LinkEdit-Eff", 1));
    }

    #[test]
    fn ineffective_run() {
        let out = labels(&["LinkEdit-Ineff", "LinkEdit-Ineff"]);
        assert_eq!(out[0].label, "LinkEdit-Ineff-Mult");
        assert_eq!(out[0].count, 2);
    }

    #[test]
    fn empty_is_empty() {
        assert!(labels(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn collapse_is_idempotent(seq in prop::collection::vec(prop::sample::select(vec!["Read", "Note", "LinkEdit-Eff", "QuizTaken"]), 0..40)) {
            let once = labels(&seq);
            for t in &once {
                prop_assert_eq!(t.count >= 2, t.label.ends_with(MULT));
            }
            let twice = collapse_labeled(expand(&once));
            let a: Vec<_> = once.iter().map(|t| (&t.label, t.count)).collect();
            let b: Vec<_> = twice.iter().map(|t| (&t.label, t.count)).collect();
            prop_assert_eq!(a, b);
            prop_assert_eq!(once.iter().map(|t| t.count).sum::<usize>(), seq.len());
        }
    }
}
