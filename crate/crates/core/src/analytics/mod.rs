//! Outcome measures and before/after scaffold-impact analysis.

mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{ActionKind, AnnotatedEvent};
use crate::scaffold::{ScaffoldDelivery, ScaffoldKind};
use crate::stats;

pub use report::{
    before_after_rows, before_after_table, delivery_count_table, group_comparison_table,
    outcome_table, time_share_table, ImpactRow, ImpactStudent, Ordinal,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("pre-test score {pre} is not below the maximum {max}")]
    DegenerateDenominator { pre: f64, max: f64 },
    #[error("need at least two map edits in the interval, found {0}")]
    InsufficientEdits(usize),
    #[error("no affect observations in [{start}, {end}]")]
    NoObservationsInSpan { start: f64, end: f64 },
    #[error("span [{start}, {end}] is empty")]
    EmptySpan { start: f64, end: f64 },
    #[error("need at least two students")]
    TooFewStudents,
}

/// Normalized learning gain.
pub fn nlg(pre: f64, post: f64, max: f64) -> Result<f64, AnalyticsError> {
    if !(pre < max) {
        return Err(AnalyticsError::DegenerateDenominator { pre, max });
    }
    Ok((post - pre) / (max - pre))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub student: String,
    pub pre: f64,
    pub post: f64,
    pub max: f64,
    pub nlg: f64,
    pub final_map_score: i64,
}

impl OutcomeRecord {
    pub fn new(
        student: impl Into<String>,
        pre: f64,
        post: f64,
        max: f64,
        final_map_score: i64,
    ) -> Result<Self, AnalyticsError> {
        Ok(Self {
            student: student.into(),
            nlg: nlg(pre, post, max)?,
            pre,
            post,
            max,
            final_map_score,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    High,
    Low,
}

impl Group {
    pub fn short(self) -> &'static str {
        match self {
            Group::High => "Hi",
            Group::Low => "Lo",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::High => "High",
            Group::Low => "Low",
        })
    }
}

impl std::str::FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "high" | "hi" => Ok(Group::High),
            "low" | "lo" => Ok(Group::Low),
            _ => Err(format!("unknown group `{s}`")),
        }
    }
}

/// Middle value; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianSplit {
    pub median: f64,
    pub high: BTreeSet<String>,
    pub low: BTreeSet<String>,
    pub excluded: BTreeSet<String>,
}

impl MedianSplit {
    pub fn group_of(&self, student: &str) -> Option<Group> {
        if self.high.contains(student) {
            Some(Group::High)
        } else if self.low.contains(student) {
            Some(Group::Low)
        } else {
            None
        }
    }
}

/// Students within `band` of the median (computed over everyone) are
/// excluded; the rest split into above and below.
pub fn median_split(
    scores: &BTreeMap<String, i64>,
    band: f64,
) -> Result<MedianSplit, AnalyticsError> {
    if scores.len() < 2 {
        return Err(AnalyticsError::TooFewStudents);
    }
    let values: Vec<f64> = scores.values().map(|&s| s as f64).collect();
    let m = median(&values);
    let mut split = MedianSplit {
        median: m,
        high: BTreeSet::new(),
        low: BTreeSet::new(),
        excluded: BTreeSet::new(),
    };
    for (student, &s) in scores {
        let s = s as f64;
        let bucket = if (s - m).abs() <= band {
            &mut split.excluded
        } else if s > m {
            &mut split.high
        } else {
            &mut split.low
        };
        bucket.insert(student.clone());
    }
    Ok(split)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    Before,
    After,
}

/// A closed time span `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub start: f64,
    pub end: f64,
}

impl Span {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    /// Membership used when assigning events to intervals: `(start, end]`,
    /// except that a span starting at the session start also owns time 0.
    /// Events logged at a delivery's timestamp caused it, so they count as
    /// "before".
    pub fn owns(&self, t: f64) -> bool {
        (self.start < t && t <= self.end) || (self.start == 0.0 && t == 0.0)
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldInterval {
    pub student: String,
    pub anchor: ScaffoldKind,
    pub phase: Phase,
    pub span: Span,
    /// 1 for the student's first delivery of `anchor`, 2 for the second...
    pub ordinal: usize,
}

/// Before/after intervals around each of one student's deliveries. Before
/// runs from the previous delivery (or 0), After to the next delivery of
/// any kind (or `session_end`).
pub fn segment_intervals(
    deliveries: &[ScaffoldDelivery],
    session_end: f64,
) -> Vec<ScaffoldInterval> {
    let mut ds: Vec<&ScaffoldDelivery> = deliveries.iter().collect();
    ds.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    let mut ordinals: BTreeMap<ScaffoldKind, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(ds.len() * 2);
    for (i, d) in ds.iter().enumerate() {
        let ordinal = {
            let o = ordinals.entry(d.kind).or_default();
            *o += 1;
            *o
        };
        let start = if i == 0 { 0.0 } else { ds[i - 1].timestamp };
        let end = ds.get(i + 1).map_or(session_end, |n| n.timestamp);
        for (phase, span) in [
            (Phase::Before, Span::new(start, d.timestamp)),
            (Phase::After, Span::new(d.timestamp, end)),
        ] {
            out.push(ScaffoldInterval {
                student: d.student.clone(),
                anchor: d.kind,
                phase,
                span,
                ordinal,
            });
        }
    }
    out
}

/// OLS slope of map score against edit ordinal 0, 1, 2, ...
pub fn map_score_slope(scores: &[f64]) -> Result<f64, AnalyticsError> {
    if scores.len() < 2 {
        return Err(AnalyticsError::InsufficientEdits(scores.len()));
    }
    let xs: Vec<f64> = (0..scores.len()).map(|i| i as f64).collect();
    Ok(stats::ols_slope(&xs, scores).expect("ordinals are distinct"))
}

/// OLS slope of map score against edit time in seconds.
pub fn map_score_slope_wallclock(points: &[(f64, f64)]) -> Result<f64, AnalyticsError> {
    if points.len() < 2 {
        return Err(AnalyticsError::InsufficientEdits(points.len()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    stats::ols_slope(&xs, &ys).ok_or(AnalyticsError::InsufficientEdits(1))
}

/// `(timestamp, score after)` of every map edit in `span`.
pub fn edits_in(annotated: &[AnnotatedEvent], span: Span) -> Vec<(f64, f64)> {
    annotated
        .iter()
        .filter(|a| {
            matches!(a.event.kind, ActionKind::MapEdit { .. }) && span.owns(a.event.timestamp)
        })
        .map(|a| (a.event.timestamp, a.map_score_after as f64))
        .collect()
}

/// Unweighted mean over the series that have a slope; `None` when none do.
pub fn mean_slope<'a>(series: impl IntoIterator<Item = &'a [f64]>) -> Option<(f64, usize)> {
    let slopes: Vec<f64> = series
        .into_iter()
        .filter_map(|s| map_score_slope(s).ok())
        .collect();
    (!slopes.is_empty()).then(|| (stats::mean(&slopes), slopes.len()))
}

/// The five tracked achievement emotions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AffectLevels {
    pub engaged_concentration: f64,
    pub boredom: f64,
    pub delight: f64,
    pub confusion: f64,
    pub frustration: f64,
}

impl AffectLevels {
    pub const NAMES: [&'static str; 5] = [
        "engaged_concentration",
        "boredom",
        "delight",
        "confusion",
        "frustration",
    ];

    pub fn values(&self) -> [f64; 5] {
        [
            self.engaged_concentration,
            self.boredom,
            self.delight,
            self.confusion,
            self.frustration,
        ]
    }

    pub fn from_values(v: [f64; 5]) -> Self {
        Self {
            engaged_concentration: v[0],
            boredom: v[1],
            delight: v[2],
            confusion: v[3],
            frustration: v[4],
        }
    }
}

/// One affect detector reading; readings come every 20 seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffectObservation {
    pub student: String,
    pub timestamp: f64,
    #[serde(flatten)]
    pub levels: AffectLevels,
}

pub const AFFECT_PERIOD_SECONDS: f64 = 20.0;

/// Per-emotion mean over observations owned by `span`.
pub fn affect_aggregate(
    observations: &[AffectObservation],
    span: Span,
) -> Result<AffectLevels, AnalyticsError> {
    if !(span.end > span.start) {
        return Err(AnalyticsError::EmptySpan {
            start: span.start,
            end: span.end,
        });
    }
    let inside: Vec<[f64; 5]> = observations
        .iter()
        .filter(|o| span.owns(o.timestamp))
        .map(|o| o.levels.values())
        .collect();
    if inside.is_empty() {
        return Err(AnalyticsError::NoObservationsInSpan {
            start: span.start,
            end: span.end,
        });
    }
    let n = inside.len() as f64;
    let mut sum = [0.0; 5];
    for v in &inside {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    Ok(AffectLevels::from_values(sum.map(|s| s / n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nlg_examples() {
        assert!((nlg(3.59, 7.52, 23.0).unwrap() - 0.2025).abs() < 1e-4);
        assert_eq!(nlg(4.0, 4.0, 23.0).unwrap(), 0.0);
        assert_eq!(nlg(4.0, 23.0, 23.0).unwrap(), 1.0);
        assert!(matches!(
            nlg(23.0, 23.0, 23.0),
            Err(AnalyticsError::DegenerateDenominator { .. })
        ));
    }

    fn scores(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
        pairs.iter().map(|(s, v)| (s.to_string(), *v)).collect()
    }

    #[test]
    fn median_split_examples() {
        let s = median_split(&scores(&[("a", 0), ("b", 10)]), 1.0).unwrap();
        assert_eq!(s.median, 5.0);
        assert_eq!(s.high, BTreeSet::from(["b".to_string()]));
        assert_eq!(s.low, BTreeSet::from(["a".to_string()]));
        assert!(s.excluded.is_empty());
        let same = median_split(&scores(&[("a", 3), ("b", 3), ("c", 3)]), 1.0).unwrap();
        assert_eq!(same.excluded.len(), 3);
        let integer_median = median_split(
            &scores(&[("a", 2), ("b", 5), ("c", 6), ("d", 7), ("e", 11)]),
            1.0,
        )
        .unwrap();
        assert_eq!(integer_median.median, 6.0);
        assert_eq!(integer_median.excluded.len(), 3);
    }

    #[test]
    fn slopes() {
        assert_eq!(map_score_slope(&[2.0, 3.0, 4.0, 5.0]).unwrap(), 1.0);
        assert_eq!(map_score_slope(&[3.0, 3.0, 3.0]).unwrap(), 0.0);
        assert!((map_score_slope(&[0.0, 1.0, 1.0, 2.0]).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(
            map_score_slope(&[1.0]),
            Err(AnalyticsError::InsufficientEdits(1))
        );
        assert_eq!(
            map_score_slope_wallclock(&[(0.0, 1.0), (10.0, 3.0)]).unwrap(),
            0.2
        );
    }

    fn obs(t: f64, confusion: f64) -> AffectObservation {
        AffectObservation {
            student: "s".into(),
            timestamp: t,
            levels: AffectLevels {
                confusion,
                ..AffectLevels::default()
            },
        }
    }

    #[test]
    fn affect_means() {
        let o = [obs(20.0, 0.08), obs(40.0, 0.18), obs(60.0, 0.9)];
        let one = affect_aggregate(&o[..1], Span::new(0.0, 30.0)).unwrap();
        assert_eq!(one, o[0].levels);
        let two = affect_aggregate(&o, Span::new(0.0, 40.0)).unwrap();
        assert!((two.confusion - 0.13).abs() < 1e-12);
        assert!(matches!(
            affect_aggregate(&o, Span::new(61.0, 70.0)),
            Err(AnalyticsError::NoObservationsInSpan { .. })
        ));
        assert!(matches!(
            affect_aggregate(&o, Span::new(5.0, 5.0)),
            Err(AnalyticsError::EmptySpan { .. })
        ));
    }
}
