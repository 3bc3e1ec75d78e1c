//! On-disk formats.
//!
//! Machine-readable records are JSON lines, one file per student under a
//! kind directory (`events/`, `affect/`, `deliveries/`, `annotated/`).
//! Human-readable tables are tab-separated with a header row. Every record
//! layout is versioned by [`SCHEMA_VERSION`], recorded in each manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use scaffolding_core::analytics::Group;
use scaffolding_core::causal::{default_expert, load_expert, ExpertMap};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

pub const EVENTS_DIR: &str = "events";
pub const AFFECT_DIR: &str = "affect";
pub const DELIVERIES_DIR: &str = "deliveries";
pub const ANNOTATED_DIR: &str = "annotated";
pub const MAPS_DIR: &str = "maps";

/// Reads a JSON-lines file; blank lines are skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("{}: read failed", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: malformed record", path.display(), i + 1))?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file =
        fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
        .with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("cannot create directory {}", path.display()))
}

/// `*.jsonl` files directly inside `dir`, sorted by name.
pub fn jsonl_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries =
        fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "jsonl") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Student ids become file names, so they are restricted to a safe set.
pub fn student_file(dir: &Path, student: &str, ext: &str) -> Result<PathBuf> {
    let safe = !student.is_empty()
        && !student.starts_with('.')
        && student
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if !safe {
        bail!("student id `{student}` cannot be used as a file name");
    }
    Ok(dir.join(format!("{student}.{ext}")))
}

/// Reads every per-student log in `dir`, keyed by file stem.
pub fn read_log_dir<T: DeserializeOwned>(dir: &Path) -> Result<BTreeMap<String, Vec<T>>> {
    jsonl_files(dir)?
        .into_iter()
        .map(|path| {
            let stem = path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            Ok((stem, read_jsonl(&path)?))
        })
        .collect()
}

pub fn load_expert_or_default(path: Option<&Path>) -> Result<ExpertMap> {
    match path {
        Some(p) => Ok(load_expert(p)?),
        None => Ok(default_expert()),
    }
}

fn tsv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))
}

fn tsv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::WriterBuilder::new()
        .delimiter(b'\t')
        .from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub student: String,
    pub group: String,
}

/// Reads a `student<TAB>group` table. Rows whose group is neither High nor
/// Low (e.g. `excluded`) are skipped.
pub fn read_groups(path: &Path) -> Result<BTreeMap<String, Group>> {
    let mut out = BTreeMap::new();
    for (i, row) in tsv_reader(path)?.deserialize::<GroupRow>().enumerate() {
        let row = row.with_context(|| format!("{}: row {}", path.display(), i + 1))?;
        if let Ok(g) = row.group.parse::<Group>() {
            if out.insert(row.student.clone(), g).is_some() {
                bail!("{}: student `{}` listed twice", path.display(), row.student);
            }
        }
    }
    Ok(out)
}

pub fn write_groups(path: &Path, rows: &[GroupRow]) -> Result<()> {
    let mut w = tsv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.flush()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub student: String,
    pub pre: f64,
    pub post: f64,
    pub max: f64,
    pub final_map_score: i64,
}

pub fn read_outcomes(path: &Path) -> Result<Vec<OutcomeRow>> {
    tsv_reader(path)?
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.with_context(|| format!("{}: row {}", path.display(), i + 1)))
        .collect()
}

pub fn write_outcomes(path: &Path, rows: &[OutcomeRow]) -> Result<()> {
    let mut w = tsv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.flush()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalScoreRow {
    pub student: String,
    pub final_map_score: i64,
    /// `High`, `Low` or `excluded`.
    pub group: String,
}

pub fn write_final_scores(path: &Path, rows: &[FinalScoreRow]) -> Result<()> {
    let mut w = tsv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.flush()?)
}
