mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use stage_core::grammar::{shipped, Grammar};
use stage_core::ilp::ConstraintMode;
use stage_core::{CalendarDateTime, Rational};

#[derive(Parser, Debug)]
#[command(name = "stage", version, about = "Temporal cue extraction, timeline constraints and event ordering")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Grammar file to use instead of the bundled grammar.
    #[arg(long, global = true, env = "STAGE_GRAMMAR")]
    grammar: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Write run metadata (timings, versions, counts) as JSON to this file.
    #[arg(long, global = true)]
    metadata: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse cues and print their trees.
    Parse {
        /// Cue file: one cue per line, plain text or JSON.
        input: PathBuf,
        /// Print every complete tree in bracketed form, one per line, with a
        /// blank line between cues.
        #[arg(long)]
        trees: bool,
    },
    /// Interpret and normalize cues, or find cues in a corpus.
    Extract {
        input: PathBuf,
        /// Document creation time used when a cue carries none.
        #[arg(long)]
        dct: Option<CalendarDateTime>,
        /// Treat the input as a document corpus and search running text.
        #[arg(long)]
        corpus: bool,
        /// Include the selected tree in each record.
        #[arg(long)]
        trees: bool,
    },
    /// Boolean features for every event with a readable cue.
    Features { corpus: PathBuf },
    /// Certain relations derived from event cues.
    Constraints {
        corpus: PathBuf,
        /// Emit relations of the dummy time-expression nodes instead, as
        /// consumed by `order --stage`.
        #[arg(long)]
        dummies: bool,
        /// Emit both orientations of every event pair.
        #[arg(long)]
        both: bool,
    },
    /// Decode a globally consistent labelling from pairwise probabilities.
    Order(OrderArgs),
    /// Score system output against gold annotations.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Args, Debug)]
struct OrderArgs {
    /// Probability records `{doc_id, source, target, probs}`.
    #[arg(long)]
    probs: PathBuf,
    /// Parser relations for dummy nodes, as written by `constraints --dummies`.
    #[arg(long)]
    stage: Option<PathBuf>,
    #[arg(long, default_value = "none")]
    mode: ConstraintMode,
    /// Weight of the parser relation in soft mode.
    #[arg(long, default_value = "0.9")]
    alpha: Rational,
    /// Largest node count always solved to proven optimality.
    #[arg(long, default_value_t = 12)]
    exact_limit: usize,
    /// Search nodes allowed above the exact limit.
    #[arg(long, default_value_t = 2_000_000)]
    node_budget: u64,
    /// Transitivity table replacing the default one.
    #[arg(long)]
    tc_table: Option<PathBuf>,
    /// Comma-separated relation set.
    #[arg(long, default_value = "a,b,s,i,ii,v", value_delimiter = ',')]
    relations: Vec<stage_core::RelationLabel>,
    /// Node ids with this prefix are dummy time-expression nodes.
    #[arg(long, default_value = "t:")]
    dummy_prefix: String,
    /// Require probabilities for pairs touching a dummy node instead of
    /// treating them as uniform.
    #[arg(long)]
    require_dummy_probs: bool,
}

#[derive(Subcommand, Debug)]
enum EvalCommand {
    /// Relaxed span matching of extracted cues.
    Extraction {
        #[arg(long)]
        corpus: PathBuf,
        /// Records written by `extract --corpus`.
        #[arg(long)]
        system: PathBuf,
        /// Words allowed to extend a gold span, one per line.
        #[arg(long)]
        whitelist: Option<PathBuf>,
    },
    /// Precision, recall and F1 of predicted relations.
    Ordering {
        /// Records written by `order`.
        #[arg(long)]
        pred: PathBuf,
        /// Document corpus holding the gold relations.
        #[arg(long)]
        gold: PathBuf,
    },
}

fn load_grammar(path: Option<&PathBuf>) -> Result<Grammar> {
    match path {
        None => Ok(shipped().clone()),
        Some(p) => {
            let text = io::read_input(p)?;
            Grammar::load(&text).with_context(|| format!("grammar {}", p.display()))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let grammar = load_grammar(cli.common.grammar.as_ref())?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("starting worker pool")?;
    let sink = io::Sink(cli.common.output.clone());
    let (name, records) = pool.install(|| -> Result<(&str, usize)> {
        let out = match &cli.command {
            Command::Parse { input, trees } => ("parse", commands::parse(input, *trees, &grammar)?),
            Command::Extract { input, dct, corpus, trees } => {
                let out = if *corpus {
                    commands::extract_corpus(input, *trees, &grammar)?
                } else {
                    commands::extract_cues(input, *dct, *trees, &grammar)?
                };
                ("extract", out)
            }
            Command::Features { corpus } => ("features", commands::features(corpus, &grammar)?),
            Command::Constraints { corpus, dummies, both } => {
                ("constraints", commands::constraints(corpus, *dummies, *both, &grammar)?)
            }
            Command::Order(args) => ("order", commands::order(args)?),
            Command::Eval(EvalCommand::Extraction { corpus, system, whitelist }) => {
                ("eval extraction", commands::eval_extraction(corpus, system, whitelist.as_deref(), &grammar)?)
            }
            Command::Eval(EvalCommand::Ordering { pred, gold }) => ("eval ordering", commands::eval_ordering(pred, gold)?),
        };
        let (command, output) = out;
        sink.write(&output.payload)?;
        if !output.summary.is_empty() {
            eprint!("{}", output.summary);
        }
        Ok((command, output.records))
    })?;
    if let Some(path) = &cli.common.metadata {
        let meta = serde_json::json!({
            "command": name,
            "version": env!("CARGO_PKG_VERSION"),
            "grammar_version": grammar.version(),
            "jobs": pool.current_num_threads(),
            "records": records,
            "elapsed_ms": started.elapsed().as_millis() as u64,
        });
        io::Sink(Some(path.clone())).write(&io::json_line(&meta)?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stage: {e:#}");
            ExitCode::FAILURE
        }
    }
}
