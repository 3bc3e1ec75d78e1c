//! Tab-separated report tables. Means, SDs and percentages print with two
//! decimals, test statistics with two, p-values and slopes with four.
//! Undefined cells print `NA`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    affect_aggregate, edits_in, map_score_slope, map_score_slope_wallclock, segment_intervals,
    OutcomeRecord, Phase, Span,
};
use crate::analytics::AffectObservation;
use crate::annotate::{Activity, AnnotatedEvent, Process, TimeShares};
use crate::scaffold::{KindCounts, ScaffoldDelivery, ScaffoldKind};
use crate::stats::{self, TestResult};

fn f2(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.2}")
    } else {
        "NA".into()
    }
}

fn f4(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.4}")
    } else {
        "NA".into()
    }
}

fn opt2(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), f2)
}

fn opt4(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), f4)
}

fn mean_sd(xs: &[f64]) -> String {
    match xs.len() {
        0 => "NA".into(),
        1 => format!("{} (NA)", f2(xs[0])),
        _ => format!("{} ({})", f2(stats::mean(xs)), f2(stats::sd(xs))),
    }
}

fn test_cells<E>(r: Result<TestResult, E>) -> String {
    match r {
        Ok(r) => format!(
            "{} ({})\t{}",
            f2(r.statistic),
            f4(r.p_value),
            f2(r.effect_size)
        ),
        Err(_) => "NA\tNA".into(),
    }
}

/// Pre/post outcomes per category: one row per `(label, records)`. The
/// pre-vs-post ANOVA effect is post minus pre.
pub fn outcome_table(rows: &[(&str, &[OutcomeRecord])]) -> String {
    let mut out =
        String::from("category\tpre\tpost\tnlg\tpre_post_anova_F (p)\tcohens_d\tfinal_map_score\n");
    for (label, recs) in rows {
        let col = |f: fn(&OutcomeRecord) -> f64| recs.iter().map(f).collect::<Vec<f64>>();
        let (pre, post, nlg, fcms) = (
            col(|r| r.pre),
            col(|r| r.post),
            col(|r| r.nlg),
            col(|r| r.final_map_score as f64),
        );
        let max = recs.first().map_or("NA".into(), |r| format!("{}", r.max));
        let _ = writeln!(
            out,
            "{label} (n={}, max={max})\t{}\t{}\t{}\t{}\t{}",
            recs.len(),
            mean_sd(&pre),
            mean_sd(&post),
            mean_sd(&nlg),
            test_cells(stats::one_way_anova(&post, &pre)),
            mean_sd(&fcms),
        );
    }
    out
}

/// Group differences: ANOVA on NLG, ANOVA on pre-test, ANCOVA on NLG with
/// pre-test as covariate. Effects are `high` minus `low`.
pub fn group_comparison_table(high: &[OutcomeRecord], low: &[OutcomeRecord]) -> String {
    let col =
        |g: &[OutcomeRecord], f: fn(&OutcomeRecord) -> f64| g.iter().map(f).collect::<Vec<f64>>();
    let pairs = |g: &[OutcomeRecord]| g.iter().map(|r| (r.pre, r.nlg)).collect::<Vec<_>>();
    let ancova = stats::one_way_ancova(&pairs(high), &pairs(low)).map(|a| a.test);
    format!(
        "nlg_anova_F (p)\tnlg_anova_d\tpre_anova_F (p)\tpre_anova_d\tnlg_ancova_F (p)\tnlg_ancova_d\n{}\t{}\t{}\n",
        test_cells(stats::one_way_anova(&col(high, |r| r.nlg), &col(low, |r| r.nlg))),
        test_cells(stats::one_way_anova(&col(high, |r| r.pre), &col(low, |r| r.pre))),
        test_cells(ancova),
    )
}

/// Mean per-student percentage of time in each activity, then per process.
pub fn time_share_table(rows: &[(&str, &[TimeShares])]) -> String {
    let mut out = String::from("category");
    for a in Activity::ALL {
        out.push('\t');
        out.push_str(a.name());
    }
    out.push_str("\tIA\tSC\tSA\n");
    for (label, shares) in rows {
        let _ = write!(out, "{label} (n={})", shares.len());
        let pct = |f: &dyn Fn(&TimeShares) -> f64| {
            if shares.is_empty() {
                "NA".into()
            } else {
                f2(100.0 * shares.iter().map(f).sum::<f64>() / shares.len() as f64)
            }
        };
        for a in Activity::ALL {
            let _ = write!(out, "\t{}", pct(&|s| s.get(a)));
        }
        for p in [Process::IA, Process::SC, Process::SA] {
            let _ = write!(out, "\t{}", pct(&|s| s.process(p)));
        }
        out.push('\n');
    }
    out
}

/// Per-kind, per-group counts: range over all students, mean (SD) over
/// receivers, and the never/1/2/3/4+ histogram with group percentages.
pub fn delivery_count_table(
    counts: &BTreeMap<String, BTreeMap<ScaffoldKind, KindCounts>>,
) -> String {
    let mut out = String::from("scaffold\tcategory\trange\tmean (sd)");
    for b in KindCounts::BUCKETS {
        let _ = write!(out, "\t{b}");
    }
    out.push('\n');
    for kind in ScaffoldKind::ALL {
        for (group, per_kind) in counts {
            let Some(c) = per_kind.get(&kind) else {
                continue;
            };
            let range = c.range.map_or("NA".into(), |(lo, hi)| format!("{lo}-{hi}"));
            let _ = write!(
                out,
                "{kind} {}\t{group}\t{range}\t{} ({})",
                kind.title(),
                opt2(c.mean),
                opt2(c.sd)
            );
            for h in c.histogram {
                if c.students == 0 {
                    out.push_str("\tNA");
                } else {
                    let _ = write!(out, "\t{h} ({}%)", f2(100.0 * h as f64 / c.students as f64));
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Which deliveries of a kind a before/after row aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Ordinal {
    First,
    Second,
    ThirdPlus,
    Pooled,
}

impl Ordinal {
    pub const ALL: [Ordinal; 4] = [
        Ordinal::First,
        Ordinal::Second,
        Ordinal::ThirdPlus,
        Ordinal::Pooled,
    ];

    fn admits(self, ordinal: usize) -> bool {
        match self {
            Ordinal::First => ordinal == 1,
            Ordinal::Second => ordinal == 2,
            Ordinal::ThirdPlus => ordinal >= 3,
            Ordinal::Pooled => true,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Ordinal::First => "1",
            Ordinal::Second => "2",
            Ordinal::ThirdPlus => "3+",
            Ordinal::Pooled => "all",
        }
    }
}

/// One student's inputs to the before/after analysis.
#[derive(Debug, Clone, Copy)]
pub struct ImpactStudent<'a> {
    pub group: &'a str,
    pub annotated: &'a [AnnotatedEvent],
    pub deliveries: &'a [ScaffoldDelivery],
    pub affect: &'a [AffectObservation],
    pub session_end: f64,
}

/// Cross-student means for one (group, kind, ordinal, phase) cell. Each
/// student's intervals in the cell are averaged first, so every student
/// weighs the same; students without a defined value are left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactRow {
    pub group: String,
    pub kind: ScaffoldKind,
    pub ordinal: Ordinal,
    pub phase: Phase,
    pub intervals: usize,
    pub slope_students: usize,
    pub mean_slope: Option<f64>,
    /// Percent of activity time spent reading.
    pub read_pct: Option<f64>,
    /// Mean confusion likelihood times 100.
    pub confusion_pct: Option<f64>,
}

/// Read seconds over all activity seconds, clipped to `span`.
fn read_share(annotated: &[AnnotatedEvent], span: Span) -> Option<f64> {
    let (mut read, mut total) = (0.0, 0.0);
    for a in annotated {
        let (s, e) = (
            a.event.timestamp.max(span.start),
            a.event.end().min(span.end),
        );
        if e > s {
            total += e - s;
            if a.activity() == Activity::Read {
                read += e - s;
            }
        }
    }
    (total > 0.0).then(|| read / total)
}

#[derive(Default)]
struct Cell {
    intervals: usize,
    slope: BTreeMap<usize, Vec<f64>>,
    read: BTreeMap<usize, Vec<f64>>,
    confusion: BTreeMap<usize, Vec<f64>>,
}

fn student_mean(per_student: &BTreeMap<usize, Vec<f64>>) -> (usize, Option<f64>) {
    let means: Vec<f64> = per_student.values().map(|v| stats::mean(v)).collect();
    (
        means.len(),
        (!means.is_empty()).then(|| stats::mean(&means)),
    )
}

/// Aggregates slopes, read shares and confusion around every delivery.
/// `wallclock` regresses scores on edit time instead of edit ordinal.
pub fn before_after_rows(students: &[ImpactStudent<'_>], wallclock: bool) -> Vec<ImpactRow> {
    let mut cells: BTreeMap<(String, ScaffoldKind, Ordinal, Phase), Cell> = BTreeMap::new();
    for (idx, st) in students.iter().enumerate() {
        for iv in segment_intervals(st.deliveries, st.session_end) {
            let edits = edits_in(st.annotated, iv.span);
            let slope = if wallclock {
                map_score_slope_wallclock(&edits).ok()
            } else {
                let scores: Vec<f64> = edits.iter().map(|e| e.1).collect();
                map_score_slope(&scores).ok()
            };
            let read = read_share(st.annotated, iv.span);
            let confusion = (iv.span.length() > 0.0)
                .then(|| affect_aggregate(st.affect, iv.span).ok())
                .flatten()
                .map(|l| l.confusion);
            for ord in Ordinal::ALL.into_iter().filter(|o| o.admits(iv.ordinal)) {
                let cell = cells
                    .entry((st.group.to_string(), iv.anchor, ord, iv.phase))
                    .or_default();
                cell.intervals += 1;
                for (slot, v) in [
                    (&mut cell.slope, slope),
                    (&mut cell.read, read),
                    (&mut cell.confusion, confusion),
                ] {
                    if let Some(v) = v {
                        slot.entry(idx).or_default().push(v);
                    }
                }
            }
        }
    }
    cells
        .into_iter()
        .map(|((group, kind, ordinal, phase), c)| {
            let (slope_students, mean_slope) = student_mean(&c.slope);
            ImpactRow {
                group,
                kind,
                ordinal,
                phase,
                intervals: c.intervals,
                slope_students,
                mean_slope,
                read_pct: student_mean(&c.read).1.map(|x| 100.0 * x),
                confusion_pct: student_mean(&c.confusion).1.map(|x| 100.0 * x),
            }
        })
        .collect()
}

/// One line per (kind, group, ordinal) with before and after side by side
/// and the after-minus-before slope change.
pub fn before_after_table(rows: &[ImpactRow]) -> String {
    let mut out = String::from(
        "scaffold\tcategory\tordinal\tintervals\tslope_n_before\tslope_before\tslope_n_after\tslope_after\tslope_change\tread_pct_before\tread_pct_after\tconfusion_pct_before\tconfusion_pct_after\n",
    );
    let mut by_key: BTreeMap<(ScaffoldKind, &str, Ordinal), [Option<&ImpactRow>; 2]> =
        BTreeMap::new();
    for r in rows {
        let slot = &mut by_key
            .entry((r.kind, r.group.as_str(), r.ordinal))
            .or_default()[r.phase as usize];
        *slot = Some(r);
    }
    for ((kind, group, ord), [before, after]) in by_key {
        let get = |r: Option<&ImpactRow>, f: fn(&ImpactRow) -> Option<f64>| r.and_then(f);
        let (sb, sa) = (get(before, |r| r.mean_slope), get(after, |r| r.mean_slope));
        let change = sb.zip(sa).map(|(b, a)| a - b);
        let _ = writeln!(
            out,
            "{kind}\t{group}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            ord.label(),
            before.map_or(0, |r| r.intervals),
            before.map_or(0, |r| r.slope_students),
            opt4(sb),
            after.map_or(0, |r| r.slope_students),
            opt4(sa),
            opt4(change),
            opt2(get(before, |r| r.read_pct)),
            opt2(get(after, |r| r.read_pct)),
            opt2(get(before, |r| r.confusion_pct)),
            opt2(get(after, |r| r.confusion_pct)),
        );
    }
    out
}
