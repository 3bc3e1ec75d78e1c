use std::fs;

use anyhow::{Context, Result};
use log::info;
use rayon::prelude::*;
use scaffolding_core::causal::{map_score, write_map};
use scaffolding_core::scaffold::{bundled_trees, ScaffoldEngine};
use scaffolding_core::sim::{
    cohort_plan, find_profile, parse_profiles, simulate_member, EngineHandle, BUNDLED_PROFILES,
};

use crate::args::SimulateArgs;
use crate::engine::engine_config;
use crate::files::{
    create_dir, load_expert_or_default, student_file, write_groups, write_jsonl, write_outcomes,
    write_text, GroupRow, OutcomeRow, AFFECT_DIR, DELIVERIES_DIR, EVENTS_DIR, MAPS_DIR,
};
use crate::manifest::{dir_manifest, ManifestBuilder};

pub fn run(args: &SimulateArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("simulate");
    manifest
        .input("profiles", args.profiles.as_deref())
        .input("expert", args.expert.as_deref());
    manifest.seed(args.seed);
    manifest
        .config("n_high", args.n_high)
        .config("n_low", args.n_low)
        .config("high_profile", &args.high_profile)
        .config("low_profile", &args.low_profile)
        .config("budget_seconds", args.budget)
        .config("engine_in_loop", !args.no_engine);

    let src = match &args.profiles {
        Some(p) => fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?,
        None => BUNDLED_PROFILES.to_string(),
    };
    let profiles =
        parse_profiles(&src).with_context(|| format!("profiles {}", shown(&args.profiles)))?;
    let high = find_profile(&profiles, &args.high_profile)?;
    let low = find_profile(&profiles, &args.low_profile)?;
    let expert = load_expert_or_default(args.expert.as_deref())?;
    let config = engine_config(&args.engine, &mut manifest)?;
    let engine = ScaffoldEngine::new(config, expert.clone())?;
    let trees = bundled_trees();
    let handle = (!args.no_engine).then_some(EngineHandle {
        engine: &engine,
        trees: &trees,
    });

    let plan = cohort_plan(args.n_high, args.n_low, args.seed);
    info!("simulating {} students", plan.len());
    let logs = plan
        .par_iter()
        .map(|m| {
            simulate_member(m, (&high, &low), &expert, args.budget, handle)
                .with_context(|| m.student.clone())
        })
        .collect::<Result<Vec<_>>>()?;

    let dirs = [EVENTS_DIR, AFFECT_DIR, DELIVERIES_DIR, MAPS_DIR].map(|d| args.out.join(d));
    for d in &dirs {
        create_dir(d)?;
    }
    let [events_dir, affect_dir, deliveries_dir, maps_dir] = &dirs;
    let (mut groups, mut outcomes) = (Vec::new(), Vec::new());
    for (member, log) in plan.iter().zip(&logs) {
        let id = &member.student;
        let events = student_file(events_dir, id, "jsonl")?;
        write_jsonl(&events, &log.events)?;
        let affect = student_file(affect_dir, id, "jsonl")?;
        write_jsonl(&affect, &log.affect)?;
        let deliveries = student_file(deliveries_dir, id, "jsonl")?;
        write_jsonl(&deliveries, &log.deliveries)?;
        manifest.output(&events).output(&affect).output(&deliveries);
        let map_path = student_file(maps_dir, id, "toml")?;
        write_text(&map_path, &write_map(&log.final_map))?;
        manifest.output(&map_path);
        groups.push(GroupRow {
            student: id.clone(),
            group: member.group.to_string(),
        });
        outcomes.push(OutcomeRow {
            student: id.clone(),
            pre: log.pre,
            post: log.post,
            max: log.test_max,
            final_map_score: map_score(&log.final_map, &expert),
        });
    }
    let groups_path = args.out.join("groups.tsv");
    write_groups(&groups_path, &groups)?;
    let outcomes_path = args.out.join("outcomes.tsv");
    write_outcomes(&outcomes_path, &outcomes)?;
    manifest.output(&groups_path).output(&outcomes_path);
    let deliveries: usize = logs.iter().map(|l| l.deliveries.len()).sum();
    info!("wrote {} sessions, {deliveries} deliveries", logs.len());
    manifest.finish(&dir_manifest(&args.out))?;
    Ok(())
}

fn shown(path: &Option<std::path::PathBuf>) -> String {
    path.as_ref()
        .map_or_else(|| "<bundled>".into(), |p| p.display().to_string())
}
