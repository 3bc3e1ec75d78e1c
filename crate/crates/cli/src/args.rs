use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Simulate, replay, mine and report on learning-by-teaching sessions.
///
/// Log verbosity follows `RUST_LOG` (default `warn`).
#[derive(Debug, Parser)]
#[command(name = "scaffold", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a cohort and write per-student event, affect and delivery logs.
    Simulate(SimulateArgs),
    /// Annotate recorded event logs and run the scaffold engine over them.
    Replay(ReplayArgs),
    /// Differential sequence mining between two groups.
    Mine(MineArgs),
    /// Time-share, delivery-count, before/after and outcome tables.
    Report(ReportArgs),
    /// Score one student map and grade its quizzes.
    Score(ScoreArgs),
}

/// Scaffold engine thresholds. Flags override the config file, which
/// overrides the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct EngineArgs {
    /// Engine config TOML.
    #[arg(long, value_name = "FILE")]
    pub engine_config: Option<PathBuf>,
    /// Minimum seconds between two deliveries [default: 60].
    #[arg(long, value_name = "SECONDS")]
    pub min_inter_scaffold: Option<f64>,
    /// Reads at least this long count as long reads [default: 60].
    #[arg(long, value_name = "SECONDS")]
    pub long_read_seconds: Option<f64>,
    /// Events a student gets to mark a link correct before Hint1 [default: 5].
    #[arg(long, value_name = "N")]
    pub hint1_window_events: Option<usize>,
    /// Seconds a student gets to mark a link correct before Hint1 [default: 120].
    #[arg(long, value_name = "SECONDS")]
    pub hint1_window_seconds: Option<f64>,
    /// Every n-th debugging occasion gets Enc3 instead of Hint5 [default: 3].
    #[arg(long, value_name = "N")]
    pub enc3_every: Option<u32>,
    /// Unmarked incorrect links needed for Hint3 [default: 3].
    #[arg(long, value_name = "N")]
    pub hint3_min_unmarked: Option<usize>,
    /// Turn off one scaffold kind (repeatable), e.g. `--disable hint4`.
    #[arg(long, value_name = "KIND")]
    pub disable: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 40)]
    pub n_high: usize,
    #[arg(long, default_value_t = 40)]
    pub n_low: usize,
    /// Profile TOML with `[[profile]]` entries [default: bundled].
    #[arg(long, value_name = "FILE")]
    pub profiles: Option<PathBuf>,
    #[arg(long, default_value = "high", value_name = "NAME")]
    pub high_profile: String,
    #[arg(long, default_value = "low", value_name = "NAME")]
    pub low_profile: String,
    /// Expert map TOML [default: bundled].
    #[arg(long, value_name = "FILE")]
    pub expert: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Session length in seconds.
    #[arg(long, default_value_t = 2400.0, value_name = "SECONDS")]
    pub budget: f64,
    /// Simulate without scaffolds in the loop.
    #[arg(long)]
    pub no_engine: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Directory of per-student `*.jsonl` event logs.
    #[arg(long, value_name = "DIR")]
    pub events: PathBuf,
    /// Expert map TOML [default: bundled].
    #[arg(long, value_name = "FILE")]
    pub expert: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Only reads this recent count toward coherence [default: whole session].
    #[arg(long, value_name = "SECONDS")]
    pub coherence_lookback: Option<f64>,
    /// Final map scores within this distance of the median are excluded
    /// from the median split.
    #[arg(long, default_value_t = 1.0)]
    pub band: f64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    /// Token sequences, one JSON record per student.
    #[arg(long, value_name = "FILE")]
    pub tokens: PathBuf,
    /// Tab-separated `student<TAB>group` file.
    #[arg(long, value_name = "FILE")]
    pub groups: PathBuf,
    #[arg(long, default_value = "High", value_name = "GROUP")]
    pub group_a: String,
    #[arg(long, default_value = "Low", value_name = "GROUP")]
    pub group_b: String,
    /// Tokens allowed between consecutive pattern elements.
    #[arg(long, default_value_t = 1)]
    pub max_gap: usize,
    /// Share of a group's students that must show a pattern.
    #[arg(long, default_value_t = 0.5)]
    pub s_threshold: f64,
    /// Longest pattern mined.
    #[arg(long, default_value_t = 4)]
    pub max_len: usize,
    /// Output table.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Output directory of `replay` (annotated/ and deliveries/).
    #[arg(long, value_name = "DIR")]
    pub replay: PathBuf,
    /// Tab-separated `student<TAB>group` file.
    #[arg(long, value_name = "FILE")]
    pub groups: PathBuf,
    /// Directory of per-student affect logs.
    #[arg(long, value_name = "DIR")]
    pub affect: Option<PathBuf>,
    /// Tab-separated test outcomes (student, pre, post, max, final_map_score).
    #[arg(long, value_name = "FILE")]
    pub outcomes: Option<PathBuf>,
    /// Regress map score on edit time instead of edit ordinal.
    #[arg(long)]
    pub wallclock_slope: bool,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Student map TOML.
    #[arg(long, value_name = "FILE")]
    pub map: PathBuf,
    /// Expert map TOML [default: bundled].
    #[arg(long, value_name = "FILE")]
    pub expert: Option<PathBuf>,
    /// Quiz scope to grade, `everything` or `section:<id>` (repeatable)
    /// [default: everything].
    #[arg(long, value_name = "SCOPE")]
    pub quiz: Vec<String>,
    /// Write the result here instead of stdout, with a manifest beside it.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
