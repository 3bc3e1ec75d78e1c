//! The `scaffold` command-line pipeline: simulate cohorts, replay recorded
//! logs through the annotator and scaffold engine, mine behavior patterns
//! and emit analysis tables. Every command writes a `RunManifest` beside
//! its outputs.

pub mod args;
mod engine;
pub mod files;
pub mod manifest;
mod mine;
mod replay;
mod report;
mod score;
mod simulate;

use anyhow::Result;

pub use args::{Cli, Command};
pub use manifest::RunManifest;

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Replay(a) => replay::run(a),
        Command::Mine(a) => mine::run(a),
        Command::Report(a) => report::run(a),
        Command::Score(a) => score::run(a),
    }
}
