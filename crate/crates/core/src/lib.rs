//! Adaptive scaffolding toolkit for learning-by-teaching environments.
//!
//! * [`causal`]: causal maps, scoring, signed-path queries and quizzes.
//! * [`annotate`]: action-log annotation (process, effectiveness, coherence, collapsing).
//! * [`scaffold`]: inflection-point detection and conversation-tree delivery.
//! * [`mining`]: differential sequence mining between two student groups.
//! * [`stats`]: t/F distributions and the two-group tests used in reports.
//! * [`analytics`]: learning gain, median split, before/after intervals, slopes, affect.
//! * [`sim`]: seeded synthetic student sessions.

// Negated float comparisons are how validation rejects NaN along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod annotate;
pub mod causal;
pub mod mining;
pub mod scaffold;
pub mod sim;
pub mod stats;
