mod data;
mod inspect;
mod learn;
mod serve;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use lode_core::level::{load_corpus, load_split, CharMap, CorpusLevel, DatasetSplit, Level};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lode-encoder",
    version,
    about = "Lode Runner level VAEs and the constrained editor"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// Directory of VGLC-style level files.
    #[arg(long, global = true, default_value = "data/corpus")]
    corpus: PathBuf,
    /// Theme split (TOML with gold/platform/ladder name lists).
    #[arg(long, global = true, default_value = "data/split.toml")]
    split: PathBuf,
    /// Directory holding vae-<theme>.levae files.
    #[arg(long, global = true, default_value = "models")]
    models: PathBuf,
    /// Service journal and snapshot directory.
    #[arg(long, global = true, default_value = "var")]
    data_dir: PathBuf,
    /// Character map overriding the VGLC defaults.
    #[arg(long, global = true)]
    charmap: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Preset::Desk)]
    preset: Preset,
    #[arg(long, global = true, default_value_t = 0x10DE)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Full,
    Desk,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Write a procedurally generated corpus of VGLC-format levels.
    SynthCorpus(data::SynthArgs),
    /// Derive a theme split from the corpus, or validate an existing one.
    Split(data::SplitArgs),
    /// Report how many training grids augmentation produces.
    Augment,
    /// Train the gold, platform, ladder and whole-corpus models.
    Train(learn::TrainArgs),
    /// Reconstruction accuracy and iterated-reconstruction convergence.
    Eval(learn::EvalArgs),
    /// Print the six suggestions for a level.
    Suggest(inspect::SuggestArgs),
    /// Originality score of a level against the whole-corpus model.
    Score(inspect::LevelArg),
    /// Static reachability report for a level.
    Check(inspect::LevelArg),
    /// Print levels as text and write PPM images.
    Render(inspect::RenderArgs),
    /// Run the HTTP editor service.
    Serve(serve::ServeArgs),
}

/// Invalid input (exit 2) versus failure while doing the work (exit 3).
#[derive(Debug)]
pub enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

pub type CmdResult<T = ()> = Result<T, Failure>;

pub trait Classify<T> {
    fn invalid(self, context: impl std::fmt::Display + Send + Sync + 'static) -> CmdResult<T>;
    fn runtime(self, context: impl std::fmt::Display + Send + Sync + 'static) -> CmdResult<T>;
}

impl<T, E> Classify<T> for Result<T, E>
where
    E: std::error::Error + Send + Sync + 'static,
{
    fn invalid(self, context: impl std::fmt::Display + Send + Sync + 'static) -> CmdResult<T> {
        self.context(context).map_err(Failure::Invalid)
    }

    fn runtime(self, context: impl std::fmt::Display + Send + Sync + 'static) -> CmdResult<T> {
        self.context(context).map_err(Failure::Runtime)
    }
}

pub fn invalid(message: impl std::fmt::Display) -> Failure {
    Failure::Invalid(anyhow::anyhow!("{message}"))
}

impl Global {
    pub fn charmap(&self) -> CmdResult<CharMap> {
        match &self.charmap {
            Some(p) => CharMap::load(p).invalid(format!("loading charmap {}", p.display())),
            None => Ok(CharMap::default()),
        }
    }

    pub fn corpus(&self) -> CmdResult<Vec<CorpusLevel>> {
        let map = self.charmap()?;
        load_corpus(&self.corpus, &map).invalid("loading corpus")
    }

    pub fn split(&self, corpus: &[CorpusLevel]) -> CmdResult<DatasetSplit> {
        let text = std::fs::read_to_string(&self.split).invalid(format!("reading split {}", self.split.display()))?;
        let ids: Vec<String> = corpus.iter().map(|c| c.name.clone()).collect();
        load_split(&text, &ids).invalid(format!("validating split {}", self.split.display()))
    }

    pub fn level(&self, path: &Path) -> CmdResult<Level> {
        let text = std::fs::read_to_string(path).invalid(format!("reading level {}", path.display()))?;
        self.charmap()?
            .parse_level(&text)
            .invalid(format!("parsing level {}", path.display()))
    }

    pub fn print_json(&self, value: &impl serde::Serialize) {
        println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match &cli.command {
        Command::SynthCorpus(a) => data::synth_corpus(g, a),
        Command::Split(a) => data::split(g, a),
        Command::Augment => data::augment(g),
        Command::Train(a) => learn::train(g, a),
        Command::Eval(a) => learn::eval(g, a),
        Command::Suggest(a) => inspect::suggest(g, a),
        Command::Score(a) => inspect::score(g, a),
        Command::Check(a) => inspect::check(g, a),
        Command::Render(a) => inspect::render(g, a),
        Command::Serve(a) => serve::serve(g, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {}", chain(&e));
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {}", chain(&e));
            ExitCode::from(3)
        }
    }
}

/// Error chain joined with ": ", skipping causes already spelled out by the
/// message above them.
fn chain(e: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for link in e.chain() {
        let text = link.to_string();
        if parts.last().is_some_and(|prev| prev.contains(&text)) {
            continue;
        }
        parts.push(text);
    }
    parts.join(": ")
}
