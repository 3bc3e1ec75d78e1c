use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use rayon::prelude::*;
use scaffolding_core::analytics::median_split;
use scaffolding_core::annotate::{collapse, tag_coherence, ActionEvent};
use scaffolding_core::causal::{map_score, write_map};
use scaffolding_core::mining::TokenSequence;
use scaffolding_core::scaffold::{bundled_trees, FirstOption, ScaffoldEngine, SessionRun};

use crate::args::ReplayArgs;
use crate::files::{
    create_dir, jsonl_files, load_expert_or_default, read_jsonl, student_file, write_final_scores,
    write_jsonl, write_text, FinalScoreRow, ANNOTATED_DIR, DELIVERIES_DIR, MAPS_DIR,
};
use crate::manifest::{dir_manifest, ManifestBuilder};

pub fn run(args: &ReplayArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("replay");
    manifest
        .input("events", Some(&args.events))
        .input("expert", args.expert.as_deref());
    manifest
        .config("coherence_lookback_seconds", args.coherence_lookback)
        .config("median_band", args.band)
        .config("responder", "first_option");
    let expert = load_expert_or_default(args.expert.as_deref())?;
    let config = crate::engine::engine_config(&args.engine, &mut manifest)?;
    let engine = ScaffoldEngine::new(config, expert.clone())?;
    let trees = bundled_trees();

    let files = jsonl_files(&args.events)?;
    create_dir(&args.out)?;
    if files.is_empty() {
        warn!(
            "no event logs in {}; nothing to replay",
            args.events.display()
        );
        manifest.finish(&dir_manifest(&args.out))?;
        return Ok(());
    }
    let runs = files
        .par_iter()
        .map(|path| -> Result<Option<(&PathBuf, SessionRun)>> {
            let events: Vec<ActionEvent> = read_jsonl(path)?;
            let Some(first) = events.first() else {
                warn!("{} holds no events; skipped", path.display());
                return Ok(None);
            };
            let student = first.student.clone();
            let mut responder = FirstOption;
            let run = SessionRun::replay(&engine, &trees, &events, &mut responder)
                .with_context(|| format!("{}: student `{student}`", path.display()))?;
            Ok(Some((path, run)))
        })
        .collect::<Result<Vec<_>>>()?;
    let runs: Vec<(&PathBuf, SessionRun)> = runs.into_iter().flatten().collect();
    let mut seen = BTreeMap::new();
    for (path, run) in &runs {
        if let Some(other) = seen.insert(run.student.clone(), path) {
            bail!(
                "student `{}` appears in both {} and {}",
                run.student,
                other.display(),
                path.display()
            );
        }
    }

    let dirs = [ANNOTATED_DIR, DELIVERIES_DIR, MAPS_DIR].map(|d| args.out.join(d));
    for d in &dirs {
        create_dir(d)?;
    }
    let [annotated_dir, deliveries_dir, maps_dir] = &dirs;
    let mut tokens = Vec::new();
    let mut scores = BTreeMap::new();
    for (_, run) in &runs {
        let id = &run.student;
        let annotated = tag_coherence(&run.annotated, &expert, args.coherence_lookback);
        let path = student_file(annotated_dir, id, "jsonl")?;
        write_jsonl(&path, &annotated)?;
        manifest.output(&path);
        let path = student_file(deliveries_dir, id, "jsonl")?;
        write_jsonl(&path, &run.deliveries)?;
        manifest.output(&path);
        let path = student_file(maps_dir, id, "toml")?;
        write_text(&path, &write_map(&run.final_map))?;
        manifest.output(&path);
        tokens.push(TokenSequence {
            student: id.clone(),
            tokens: collapse(&annotated).into_iter().map(|t| t.label).collect(),
        });
        scores.insert(id.clone(), map_score(&run.final_map, &expert));
    }
    let tokens_path = args.out.join("tokens.jsonl");
    write_jsonl(&tokens_path, &tokens)?;
    manifest.output(&tokens_path);

    let split = match median_split(&scores, args.band) {
        Ok(s) => Some(s),
        Err(e) => {
            warn!("median split skipped: {e}");
            None
        }
    };
    let rows: Vec<FinalScoreRow> = scores
        .iter()
        .map(|(student, &score)| FinalScoreRow {
            student: student.clone(),
            final_map_score: score,
            group: split
                .as_ref()
                .and_then(|s| s.group_of(student))
                .map_or_else(|| "excluded".into(), |g| g.to_string()),
        })
        .collect();
    let scores_path = args.out.join("final_scores.tsv");
    write_final_scores(&scores_path, &rows)?;
    manifest.output(&scores_path);
    if let Some(s) = &split {
        manifest.config("median_final_map_score", s.median);
    }
    let deliveries: usize = runs.iter().map(|(_, r)| r.deliveries.len()).sum();
    info!("replayed {} sessions, {deliveries} deliveries", runs.len());
    manifest.finish(&dir_manifest(&args.out))?;
    Ok(())
}
