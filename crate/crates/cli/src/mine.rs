use std::fs;
use std::io::{BufWriter, Write};

use anyhow::{anyhow, bail, Context, Result};
use log::{info, warn};
use scaffolding_core::analytics::Group;
use scaffolding_core::mining::{mine, write_report, MineParams, TokenSequence};

use crate::args::MineArgs;
use crate::files::{read_groups, read_jsonl};
use crate::manifest::{file_manifest, ManifestBuilder};

pub fn run(args: &MineArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("mine");
    manifest
        .input("tokens", Some(&args.tokens))
        .input("groups", Some(&args.groups));
    let params = MineParams {
        max_gap: args.max_gap,
        s_threshold: args.s_threshold,
        max_len: args.max_len,
    };
    manifest.config("params", params);
    let parse = |s: &str| s.parse::<Group>().map_err(|e| anyhow!(e));
    let (ga, gb) = (parse(&args.group_a)?, parse(&args.group_b)?);
    if ga == gb {
        bail!("--group-a and --group-b must differ");
    }
    manifest.config("group_a", ga).config("group_b", gb);

    let groups = read_groups(&args.groups)?;
    let sequences: Vec<TokenSequence> = read_jsonl(&args.tokens)?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for s in sequences {
        match groups.get(&s.student) {
            Some(&g) if g == ga => a.push(s),
            Some(&g) if g == gb => b.push(s),
            _ => info!("student `{}` has no group; left out", s.student),
        }
    }
    if a.is_empty() || b.is_empty() {
        warn!("group sizes {} and {}", a.len(), b.len());
    }
    let patterns = mine(&a, &b, &params)?;
    info!(
        "{} patterns from {} + {} students",
        patterns.len(),
        a.len(),
        b.len()
    );
    let file = fs::File::create(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut w = BufWriter::new(file);
    write_report(&mut w, &patterns, (&ga.to_string(), &gb.to_string()))?;
    w.flush()
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    manifest.output(&args.out);
    manifest.finish(&file_manifest(&args.out))?;
    Ok(())
}
