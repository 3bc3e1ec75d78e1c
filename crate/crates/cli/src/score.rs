use std::io::Write;

use anyhow::{anyhow, Result};
use scaffolding_core::causal::{
    generate_quiz, grade_quiz, is_correct, load_map, map_score, QuizResult, QuizScope,
};
use serde::Serialize;

use crate::args::ScoreArgs;
use crate::files::{load_expert_or_default, write_text};
use crate::manifest::{file_manifest, ManifestBuilder};

#[derive(Debug, Serialize)]
pub struct ScoreReport {
    pub map_score: i64,
    pub correct_links: usize,
    pub incorrect_links: usize,
    pub quizzes: Vec<QuizResult>,
}

pub fn run(args: &ScoreArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("score");
    manifest
        .input("map", Some(&args.map))
        .input("expert", args.expert.as_deref());
    let expert = load_expert_or_default(args.expert.as_deref())?;
    let map = load_map(&args.map)?;
    let scopes: Vec<QuizScope> = if args.quiz.is_empty() {
        vec![QuizScope::Everything]
    } else {
        args.quiz
            .iter()
            .map(|s| s.parse().map_err(|e| anyhow!("--quiz: {e}")))
            .collect::<Result<_>>()?
    };
    manifest.config(
        "quiz_scopes",
        scopes.iter().map(ToString::to_string).collect::<Vec<_>>(),
    );
    let correct = map.links().filter(|l| is_correct(l, &expert)).count();
    let quizzes = scopes
        .iter()
        .map(|scope| Ok(grade_quiz(&map, &generate_quiz(&expert, scope)?)?))
        .collect::<Result<Vec<_>>>()?;
    let report = ScoreReport {
        map_score: map_score(&map, &expert),
        correct_links: correct,
        incorrect_links: map.link_count() - correct,
        quizzes,
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(path) => {
            write_text(path, &text)?;
            manifest.output(path);
            manifest.finish(&file_manifest(path))?;
        }
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
            _ => {}
        },
    }
    Ok(())
}
