//! `eamt`: validate data, build lexicons, render prompts, translate, score
//! and report.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
pub mod config;
pub mod manifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "eamt", version, about = "Entity-aware machine translation toolkit")]
pub struct Cli {
    /// Settings file (TOML key = value pairs, optionally per subcommand table).
    #[arg(long, global = true, env = "EAMT_CONFIG", value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// More logging (repeatable). `EAMT_LOG` overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check dataset files and count their instances.
    ValidateData(ValidateArgs),
    /// Split-size and entity-type tables.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Fetch entity labels and aliases from Wikidata into a lexicon file.
    Harvest(HarvestArgs),
    /// Render translation prompts as JSONL `{id, prompt}`.
    RenderPrompts(RenderArgs),
    /// Translate rendered prompts with a backend.
    Translate(TranslateArgs),
    /// Score predictions against references: M-ETA, quality, overall.
    Score(ScoreArgs),
    /// Tabulate score records.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Dataset JSONL files.
    #[arg(required_unless_present = "data_dir")]
    pub files: Vec<PathBuf>,
    /// Validate every `<split>/<locale>.jsonl` under this directory.
    #[arg(long, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
    /// Split kind for the listed files; inferred from the path when omitted.
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// Instances per locale and split.
    Splits(SplitStatsArgs),
    /// Unique entities per type, overall and with a name in each language.
    Entities(EntityStatsArgs),
}

#[derive(Debug, Args)]
pub struct SplitStatsArgs {
    /// Directory laid out as `<split>/<locale>.jsonl`.
    #[arg(long, value_name = "DIR")]
    pub data_dir: PathBuf,
    #[arg(long, default_value = "markdown")]
    pub format: String,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EntityStatsArgs {
    /// TSV of `QID<TAB>TYPE` rows.
    #[arg(long, value_name = "TSV")]
    pub mentions: PathBuf,
    #[arg(long)]
    pub lexicon: PathBuf,
    /// Comma-separated language columns (default: the ten target locales).
    #[arg(long, value_delimiter = ',')]
    pub languages: Vec<String>,
    #[arg(long, default_value = "markdown")]
    pub format: String,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HarvestArgs {
    /// Dataset files whose entity ids are harvested.
    #[arg(long = "data", value_name = "FILE")]
    pub data: Vec<PathBuf>,
    /// Plain-text list of QIDs, one per line.
    #[arg(long, value_name = "FILE")]
    pub qids: Option<PathBuf>,
    /// Comma-separated languages (default: en plus the ten target locales).
    #[arg(long, value_delimiter = ',')]
    pub languages: Vec<String>,
    #[arg(long, short)]
    pub out: PathBuf,
    /// `wbgetentities` endpoint.
    #[arg(long, env = "EAMT_WIKIDATA_ENDPOINT")]
    pub endpoint: Option<String>,
    /// Requests per second.
    #[arg(long)]
    pub rate_limit: Option<f64>,
    /// Ids per request (at most 50).
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Requests in flight.
    #[arg(long)]
    pub concurrency: Option<usize>,
    #[arg(long)]
    pub retries: Option<u32>,
    /// Request timeout in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    /// Answer from canned `wbgetentities` responses in this directory instead of the network.
    #[arg(long, value_name = "DIR")]
    pub offline_fixtures: Option<PathBuf>,
    /// Keep labels only, dropping aliases.
    #[arg(long)]
    pub labels_only: bool,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Instances to render prompts for.
    #[arg(long = "data", value_name = "FILE", required = true)]
    pub data: Vec<PathBuf>,
    /// `t1` (few-shot with entity hints) or `t2` (zero-shot).
    #[arg(long, default_value = "t1")]
    pub template: String,
    /// Training split to draw examples from (t1 only).
    #[arg(long, value_name = "FILE")]
    pub train: Vec<PathBuf>,
    /// Lexicon for entity hints (t1 only).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Hint targets: `qid` or `name` (the entity's name in the target language).
    #[arg(long, default_value = "qid")]
    pub hint_mode: String,
    /// Omit entity hints.
    #[arg(long)]
    pub no_hints: bool,
    /// Examples per prompt.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Take the first k training pairs instead of a seeded sample.
    #[arg(long)]
    pub first_k: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    /// Prompts JSONL from `render-prompts`.
    #[arg(long, value_name = "FILE")]
    pub prompts: PathBuf,
    /// `http-chat`, `replay`, `echo` or `fixed`.
    #[arg(long, env = "EAMT_BACKEND")]
    pub backend: Option<String>,
    #[arg(long, env = "EAMT_ENDPOINT")]
    pub endpoint: Option<String>,
    #[arg(long, env = "EAMT_MODEL")]
    pub model: Option<String>,
    /// Name of the environment variable that holds the API token.
    #[arg(long, env = "EAMT_TOKEN_ENV")]
    pub token_env: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Requests in flight.
    #[arg(long, env = "EAMT_CONCURRENCY")]
    pub concurrency: Option<usize>,
    #[arg(long)]
    pub retries: Option<u32>,
    /// Request timeout in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    /// Recorded predictions for the replay backend.
    #[arg(long, value_name = "FILE")]
    pub replay: Option<PathBuf>,
    /// Output text for the fixed backend.
    #[arg(long)]
    pub fixed_text: Option<String>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, value_name = "FILE")]
    pub predictions: PathBuf,
    /// Labelled dataset files.
    #[arg(long = "data", value_name = "FILE", required = true)]
    pub data: Vec<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Method name recorded in the scores.
    #[arg(long)]
    pub method: String,
    /// Comma-separated match-policy settings: `aliases=on|off`,
    /// `untranslated=on|off`, `denominator=entities|instances`.
    #[arg(long)]
    pub policy: Option<String>,
    /// `chrf`, `subprocess:<command line>` or `tcp:<host:port>`.
    #[arg(long, env = "EAMT_SCORER")]
    pub scorer: Option<String>,
    /// Write the per-entity match log (TSV) here.
    #[arg(long, value_name = "FILE")]
    pub match_log: Option<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Score-record JSONL files.
    #[arg(required = true)]
    pub scores: Vec<PathBuf>,
    /// `markdown`, `csv` or `json`.
    #[arg(long)]
    pub format: Option<String>,
    /// Comma-separated method order; unlisted methods follow alphabetically.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn init_tracing(verbose: u8, quiet: bool) {
    use tracing_subscriber::EnvFilter;
    let level = match (quiet, verbose) {
        (true, _) => "error",
        (false, 0) => "warn",
        (false, 1) => "info",
        (false, 2) => "debug",
        _ => "trace",
    };
    let filter = EnvFilter::try_from_env("EAMT_LOG").unwrap_or_else(|_| EnvFilter::new(level));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_target(false)
        .try_init();
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 on success, 1 on operational errors, 2 on usage errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_tracing(cli.verbose, cli.quiet);
    match commands::run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if let Some(usage) = e.downcast_ref::<commands::UsageError>() {
                eprintln!("error: {usage}");
                return EXIT_USAGE;
            }
            eprintln!("error: {e:#}");
            EXIT_FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["eamt", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["eamt"]), EXIT_USAGE);
        assert_eq!(run(["eamt", "score", "--method", "x"]), EXIT_USAGE);
        let help = Cli::try_parse_from(["eamt", "--help"]).unwrap_err();
        assert_eq!(help.kind(), clap::error::ErrorKind::DisplayHelp);
        assert!(!help.use_stderr());
    }
}
