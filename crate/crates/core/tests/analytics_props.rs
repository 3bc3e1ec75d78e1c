mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use scaffolding_core::analytics::{
    before_after_rows, before_after_table, map_score_slope, median_split, nlg, segment_intervals,
    AffectLevels, AffectObservation, ImpactRow, ImpactStudent, Ordinal, Phase, Span,
};
use scaffolding_core::annotate::{annotate_session, LongReadRule};
use scaffolding_core::causal::{default_expert, Sign};
use scaffolding_core::scaffold::{
    ScaffoldDelivery, ScaffoldKind, TargetHints, TriggerContext, TriggerRule,
};

use common::Log;

fn delivery(kind: ScaffoldKind, t: f64) -> ScaffoldDelivery {
    ScaffoldDelivery {
        student: "s1".into(),
        kind,
        agent: kind.agent(),
        timestamp: t,
        trigger: TriggerContext {
            rule: TriggerRule::IneffEditThenQuiz,
            case: None,
            previous_index: 0,
            current_index: 0,
            previous_timestamp: t,
            current_timestamp: t,
            resolved_index: None,
        },
        targets: TargetHints::default(),
        transcript: Vec::new(),
    }
}

#[test]
fn worked_example_two_deliveries() {
    let (ti, tj, end) = (100.0, 250.0, 400.0);
    let iv = segment_intervals(
        &[
            delivery(ScaffoldKind::Hint2, ti),
            delivery(ScaffoldKind::Hint5, tj),
        ],
        end,
    );
    assert_eq!(iv.len(), 4);
    assert_eq!(
        (iv[0].anchor, iv[0].phase, iv[0].span),
        (ScaffoldKind::Hint2, Phase::Before, Span::new(0.0, ti))
    );
    assert_eq!(
        (iv[1].anchor, iv[1].phase, iv[1].span),
        (ScaffoldKind::Hint2, Phase::After, Span::new(ti, tj))
    );
    assert_eq!(
        (iv[2].anchor, iv[2].phase, iv[2].span),
        (ScaffoldKind::Hint5, Phase::Before, Span::new(ti, tj))
    );
    assert_eq!(
        (iv[3].anchor, iv[3].phase, iv[3].span),
        (ScaffoldKind::Hint5, Phase::After, Span::new(tj, end))
    );
    assert!(segment_intervals(&[], end).is_empty());
}

#[test]
fn ordinals_count_per_kind() {
    let ds = [
        delivery(ScaffoldKind::Hint5, 10.0),
        delivery(ScaffoldKind::Hint6, 20.0),
        delivery(ScaffoldKind::Hint5, 90.0),
        delivery(ScaffoldKind::Hint5, 200.0),
    ];
    let ords: Vec<usize> = segment_intervals(&ds, 300.0)
        .iter()
        .step_by(2)
        .map(|i| i.ordinal)
        .collect();
    assert_eq!(ords, [1, 1, 2, 3]);
}

fn obs(t: f64, confusion: f64) -> AffectObservation {
    AffectObservation {
        student: "s1".into(),
        timestamp: t,
        levels: AffectLevels {
            confusion,
            ..AffectLevels::default()
        },
    }
}

#[test]
fn before_after_by_hand() {
    use Sign::*;
    let mut log = Log::with_concepts();
    log.add("heat_generation", "body_temperature", Increase);
    log.add("heat_loss", "body_temperature", Decrease);
    log.add("sweating", "evaporation", Increase);
    assert_eq!(log.t, 27.0);
    log.add("external_temperature", "heat_loss", Increase);
    log.add("metabolic_rate", "heat_generation", Increase);
    log.read("p1", 8.0);
    let annotated =
        annotate_session(&log.events, &default_expert(), LongReadRule::default()).unwrap();
    let deliveries = [delivery(ScaffoldKind::Hint2, 26.0)];
    let affect = [obs(20.0, 0.1), obs(40.0, 0.3)];
    let student = ImpactStudent {
        group: "High",
        annotated: &annotated,
        deliveries: &deliveries,
        affect: &affect,
        session_end: log.t,
    };
    let rows = before_after_rows(&[student], false);
    assert_eq!(rows.len(), 4);
    let cell = |ord, phase| {
        rows.iter()
            .find(|r| r.ordinal == ord && r.phase == phase)
            .unwrap()
    };
    let before = cell(Ordinal::First, Phase::Before);
    // 12 concept adds at score 0, then scores 1, 2, 3 at ordinals 12..14:
    // Sxy = 5 + 12 + 21 = 38, Sxx = 280.
    assert!((before.mean_slope.unwrap() - 38.0 / 280.0).abs() < 1e-12);
    assert_eq!(before.read_pct, Some(0.0));
    assert!((before.confusion_pct.unwrap() - 10.0).abs() < 1e-12);
    // After owns the edits at 27 and 32 (scores 2, 3); activity time in
    // [26, 45] is 1 s of the third add, two adds and the 8 s read.
    let after = cell(Ordinal::First, Phase::After);
    assert_eq!(after.mean_slope, Some(1.0));
    assert!((after.read_pct.unwrap() - 800.0 / 19.0).abs() < 1e-9);
    assert!((after.confusion_pct.unwrap() - 30.0).abs() < 1e-12);
    assert_eq!(
        cell(Ordinal::Pooled, Phase::After),
        &ImpactRow {
            ordinal: Ordinal::Pooled,
            ..after.clone()
        }
    );

    let table = before_after_table(&rows);
    let line = table
        .lines()
        .find(|l| l.starts_with("hint2\tHigh\t1\t"))
        .unwrap();
    assert_eq!(
        line,
        "hint2\tHigh\t1\t1\t1\t0.1357\t1\t1.0000\t0.8643\t0.00\t42.11\t10.00\t30.00"
    );
}

fn sorted_times() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (prop::collection::vec(1u32..10_000, 0..25), 0u32..500).prop_map(|(mut ts, extra)| {
        ts.sort_unstable();
        let end = ts.last().copied().unwrap_or(0) as f64 + extra as f64;
        (ts.into_iter().map(f64::from).collect(), end)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn intervals_tile_the_session((ts, end) in sorted_times(), kinds in prop::collection::vec(0usize..9, 25)) {
        let ds: Vec<_> = ts.iter().zip(&kinds).map(|(&t, &k)| delivery(ScaffoldKind::ALL[k], t)).collect();
        let iv = segment_intervals(&ds, end);
        prop_assert_eq!(iv.len(), 2 * ds.len());
        let mut cursor = 0.0;
        for (i, pair) in iv.chunks(2).enumerate() {
            let (b, a) = (&pair[0], &pair[1]);
            prop_assert_eq!(b.phase, Phase::Before);
            prop_assert_eq!(a.phase, Phase::After);
            prop_assert_eq!(b.span.start, cursor);
            prop_assert_eq!(b.span.end, ts[i]);
            prop_assert_eq!(a.span.start, ts[i]);
            let next = ts.get(i + 1).copied().unwrap_or(end);
            prop_assert_eq!(a.span.end, next);
            cursor = ts[i];
        }
        if let Some(last) = iv.last() {
            prop_assert_eq!(last.span.end, end);
        }
    }

    #[test]
    fn slope_translation_and_scale(ys in prop::collection::vec(-50.0f64..50.0, 2..30), shift in -100.0f64..100.0, c in -10.0f64..10.0) {
        let base = map_score_slope(&ys).unwrap();
        let shifted: Vec<f64> = ys.iter().map(|y| y + shift).collect();
        let scaled: Vec<f64> = ys.iter().map(|y| y * c).collect();
        prop_assert!((map_score_slope(&shifted).unwrap() - base).abs() < 1e-9);
        prop_assert!((map_score_slope(&scaled).unwrap() - c * base).abs() < 1e-9);
    }

    #[test]
    fn nlg_monotone(pre in 0.0f64..22.0, post in 0.0f64..23.0, d in 0.01f64..1.0) {
        let max = 23.0;
        prop_assert!(nlg(pre, post + d, max).unwrap() > nlg(pre, post, max).unwrap());
        let pre2 = (pre + d).min(22.99);
        if pre2 > pre && post < max {
            prop_assert!(nlg(pre2, post, max).unwrap() < nlg(pre, post, max).unwrap());
        }
    }

    #[test]
    fn median_split_partition(scores in prop::collection::btree_map("[a-z]{1,4}", -5i64..20, 2..40), band in 0u8..4) {
        let split = median_split(&scores, band as f64).unwrap();
        prop_assert!(split.high.is_disjoint(&split.low));
        prop_assert_eq!(split.high.len() + split.low.len() + split.excluded.len(), scores.len());
        for s in &split.high {
            prop_assert!(scores[s] as f64 > split.median + band as f64);
        }
        for s in &split.low {
            prop_assert!((scores[s] as f64) < split.median - band as f64);
        }
        if band > 0 {
            let narrower = median_split(&scores, band as f64 - 1.0).unwrap();
            prop_assert!(split.high.is_subset(&narrower.high));
            prop_assert!(split.low.is_subset(&narrower.low));
        }
    }
}

#[test]
fn median_split_integer_median_band() {
    // With an integer median of 6 and band 1, exactly the scores 5..=7 drop out.
    let scores: BTreeMap<String, i64> = (0..13).map(|i| (format!("s{i:02}"), i)).collect();
    let split = median_split(&scores, 1.0).unwrap();
    assert_eq!(split.median, 6.0);
    let excluded: Vec<i64> = split.excluded.iter().map(|s| scores[s]).collect();
    assert_eq!(excluded, [5, 6, 7]);
}
