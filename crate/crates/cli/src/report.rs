use std::collections::BTreeMap;

use anyhow::{Context, Result};
use log::warn;
use scaffolding_core::analytics::{
    before_after_rows, before_after_table, delivery_count_table, group_comparison_table,
    outcome_table, time_share_table, AffectObservation, Group, ImpactStudent, OutcomeRecord,
};
use scaffolding_core::annotate::{time_distribution, AnnotatedEvent, TimeShares};
use scaffolding_core::scaffold::{delivery_counts, ScaffoldDelivery};

use crate::args::ReportArgs;
use crate::files::{
    create_dir, read_groups, read_log_dir, read_outcomes, write_text, ANNOTATED_DIR, DELIVERIES_DIR,
};
use crate::manifest::{dir_manifest, ManifestBuilder};

/// Tables for `All` and then each group.
fn by_category<T>(
    per_student: &BTreeMap<String, T>,
    groups: &BTreeMap<String, Group>,
) -> Vec<(String, Vec<T>)>
where
    T: Clone,
{
    let pick = |keep: &dyn Fn(Group) -> bool| -> Vec<T> {
        per_student
            .iter()
            .filter(|(s, _)| groups.get(*s).is_some_and(|&g| keep(g)))
            .map(|(_, v)| v.clone())
            .collect()
    };
    vec![
        ("All".into(), pick(&|_| true)),
        (Group::High.to_string(), pick(&|g| g == Group::High)),
        (Group::Low.to_string(), pick(&|g| g == Group::Low)),
    ]
}

pub fn run(args: &ReportArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("report");
    manifest
        .input("replay", Some(&args.replay))
        .input("groups", Some(&args.groups))
        .config("wallclock_slope", args.wallclock_slope);
    if let Some(p) = &args.affect {
        manifest.input("affect", Some(p));
    }
    if let Some(p) = &args.outcomes {
        manifest.input("outcomes", Some(p));
    }
    let groups = read_groups(&args.groups)?;
    let annotated: BTreeMap<String, Vec<AnnotatedEvent>> =
        read_log_dir(&args.replay.join(ANNOTATED_DIR))?;
    let mut deliveries: BTreeMap<String, Vec<ScaffoldDelivery>> =
        read_log_dir(&args.replay.join(DELIVERIES_DIR))?;
    let affect: BTreeMap<String, Vec<AffectObservation>> = match &args.affect {
        Some(dir) => read_log_dir(dir)?,
        None => BTreeMap::new(),
    };
    let annotated: BTreeMap<String, Vec<AnnotatedEvent>> = annotated
        .into_iter()
        .filter(|(s, _)| groups.contains_key(s))
        .collect();
    for s in groups.keys().filter(|s| !annotated.contains_key(*s)) {
        warn!("student `{s}` is grouped but has no annotated log");
    }
    create_dir(&args.out)?;
    let mut emit = |name: &str, text: &str| -> Result<()> {
        let path = args.out.join(name);
        write_text(&path, text)?;
        manifest.output(&path);
        Ok(())
    };

    let mut shares = BTreeMap::new();
    for (s, events) in &annotated {
        match time_distribution(events) {
            Ok(t) => {
                shares.insert(s.clone(), t);
            }
            Err(e) => warn!("student `{s}`: {e}; left out of time shares"),
        }
    }
    let cats: Vec<(String, Vec<TimeShares>)> = by_category(&shares, &groups);
    let rows: Vec<(&str, &[TimeShares])> = cats
        .iter()
        .map(|(l, v)| (l.as_str(), v.as_slice()))
        .collect();
    emit("time_shares.tsv", &time_share_table(&rows))?;

    let members: BTreeMap<String, String> = annotated
        .keys()
        .map(|s| (s.clone(), groups[s].to_string()))
        .collect();
    let all: Vec<ScaffoldDelivery> = members
        .keys()
        .flat_map(|s| deliveries.remove(s).unwrap_or_default())
        .collect();
    emit(
        "delivery_counts.tsv",
        &delivery_count_table(&delivery_counts(&all, &members)),
    )?;

    let mut per_student: BTreeMap<&str, Vec<ScaffoldDelivery>> = BTreeMap::new();
    for d in &all {
        per_student
            .entry(d.student.as_str())
            .or_default()
            .push(d.clone());
    }
    let names: BTreeMap<&str, String> = members
        .iter()
        .map(|(s, g)| (s.as_str(), g.clone()))
        .collect();
    let students: Vec<ImpactStudent<'_>> = annotated
        .iter()
        .map(|(s, events)| ImpactStudent {
            group: &names[s.as_str()],
            annotated: events,
            deliveries: per_student.get(s.as_str()).map_or(&[], Vec::as_slice),
            affect: affect.get(s).map_or(&[], Vec::as_slice),
            session_end: events.iter().map(|e| e.event.end()).fold(0.0, f64::max),
        })
        .collect();
    emit(
        "before_after.tsv",
        &before_after_table(&before_after_rows(&students, args.wallclock_slope)),
    )?;

    if let Some(path) = &args.outcomes {
        let mut records = BTreeMap::new();
        for row in read_outcomes(path)? {
            if groups.contains_key(&row.student) {
                let rec = OutcomeRecord::new(
                    &row.student,
                    row.pre,
                    row.post,
                    row.max,
                    row.final_map_score,
                )
                .with_context(|| format!("{}: student `{}`", path.display(), row.student))?;
                records.insert(row.student, rec);
            }
        }
        let cats = by_category(&records, &groups);
        let rows: Vec<(&str, &[OutcomeRecord])> = cats
            .iter()
            .map(|(l, v)| (l.as_str(), v.as_slice()))
            .collect();
        emit("outcomes.tsv", &outcome_table(&rows))?;
        emit(
            "group_comparison.tsv",
            &group_comparison_table(&cats[1].1, &cats[2].1),
        )?;
    }
    manifest.finish(&dir_manifest(&args.out))?;
    Ok(())
}
