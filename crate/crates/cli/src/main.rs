mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dialign::diachrone::TrainingMode;
use dialign::embed::Architecture;
use dialign::sampling::Plan;

use crate::commands::Ctx;
use crate::config::{
    FeatureSetName, FeaturizerKind, GazetteerEntry, GroupBy, Label, RunConfig, VectorFormat,
};
use crate::error::CliError;
use crate::output::Outputs;

#[derive(Parser, Debug)]
#[command(name = "dialign", version, about = "Corpus dialectology pipeline for community text dumps")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_delimiter = ',')]
    communities: Option<Vec<String>>,
    #[arg(long, global = true, value_delimiter = ',')]
    text_types: Option<Vec<String>>,
    /// Raw record dump; repeatable.
    #[arg(long = "input", global = true)]
    inputs: Vec<PathBuf>,
    /// Text units written by `ingest`.
    #[arg(long, global = true)]
    units: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    utc_offset: Option<i32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Incremental,
    Sequential,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read dumps, clean them and write text units.
    Ingest,
    /// Per-community observation, word and type-token statistics.
    Stats,
    /// Variant counts and distribution patterns.
    Variables {
        #[arg(long)]
        variables: Option<PathBuf>,
    },
    /// Train and evaluate a community classifier.
    Classify {
        #[arg(long)]
        plan: Option<Plan>,
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long, value_enum)]
        featurizer: Option<FeaturizerKind>,
        #[arg(long)]
        vectors: Option<PathBuf>,
        /// Replace gazetteer names with entity placeholders.
        #[arg(long)]
        mask: bool,
        /// GPE gazetteer file; repeatable.
        #[arg(long = "gazetteer")]
        gazetteers: Vec<PathBuf>,
    },
    /// Train word vectors.
    EmbedTrain {
        #[arg(long)]
        architecture: Option<Architecture>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        min_count: Option<u64>,
        #[arg(long, value_enum)]
        format: Option<VectorFormat>,
    },
    /// Mean cosine over a word pair list.
    EmbedEval {
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Cosine series across equal-volume periods.
    Drift {
        #[arg(long)]
        periods: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        source: Option<String>,
        #[arg(long, value_delimiter = ',')]
        targets: Vec<String>,
    },
    /// Construction counts per group.
    CxgParse {
        #[arg(long)]
        constructicon: Option<PathBuf>,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long, value_enum)]
        group_by: Option<GroupBy>,
    },
    /// Mine a constructicon from the corpus.
    CxgMine {
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long, value_enum)]
        feature_set: Option<FeatureSetName>,
        #[arg(long)]
        min_freq: Option<u64>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// User-overlap graph between communities with Louvain partition.
    Network {
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Per-user lifespan and engagement profiles with deciles.
    Cohorts,
    /// Linear regression over columns of a CSV file.
    Ols {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        response: Option<String>,
        #[arg(long, value_delimiter = ',')]
        predictors: Vec<String>,
    },
    /// Run the analyses end to end into subdirectories.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Stats => "stats",
            Command::Variables { .. } => "variables",
            Command::Classify { .. } => "classify",
            Command::EmbedTrain { .. } => "embed-train",
            Command::EmbedEval { .. } => "embed-eval",
            Command::Drift { .. } => "drift",
            Command::CxgParse { .. } => "cxg-parse",
            Command::CxgMine { .. } => "cxg-mine",
            Command::Network { .. } => "network",
            Command::Cohorts => "cohorts",
            Command::Ols { .. } => "ols",
            Command::Report => "report",
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

/// Loads the config file and lays the flags over it.
fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    set_opt(&mut cfg.seed, cli.seed);
    set_opt(&mut cfg.out, cli.out.clone());
    set(&mut cfg.communities, cli.communities.clone());
    set(&mut cfg.text_types, cli.text_types.clone());
    if !cli.inputs.is_empty() {
        cfg.inputs = cli.inputs.clone();
    }
    set_opt(&mut cfg.units, cli.units.clone());
    set(&mut cfg.utc_offset, cli.utc_offset);
    match &cli.command {
        Command::Variables { variables } => set_opt(&mut cfg.variables, variables.clone()),
        Command::Classify {
            plan,
            fraction,
            featurizer,
            vectors,
            mask,
            gazetteers,
        } => {
            set(&mut cfg.sampling.plan, *plan);
            set_opt(&mut cfg.sampling.fraction, *fraction);
            set(&mut cfg.classifier.featurizer, *featurizer);
            set_opt(&mut cfg.classifier.vectors, vectors.clone());
            cfg.classifier.mask_entities |= *mask;
            cfg.gazetteers.extend(gazetteers.iter().map(|p| GazetteerEntry {
                path: p.clone(),
                label: Label::Gpe,
            }));
        }
        Command::EmbedTrain {
            architecture,
            dim,
            epochs,
            window,
            min_count,
            format,
        } => {
            let e = &mut cfg.embedding;
            set(&mut e.architecture, *architecture);
            set(&mut e.dim, *dim);
            set(&mut e.epochs, *epochs);
            set(&mut e.window, *window);
            set(&mut e.min_count, *min_count);
            set(&mut e.format, *format);
        }
        Command::EmbedEval { vectors, pairs } => {
            set_opt(&mut cfg.pairs.vectors, vectors.clone());
            set_opt(&mut cfg.pairs.list, pairs.clone());
        }
        Command::Drift {
            periods,
            mode,
            source,
            targets,
        } => {
            set(&mut cfg.drift.periods, *periods);
            set(
                &mut cfg.drift.mode,
                mode.map(|m| match m {
                    ModeArg::Incremental => TrainingMode::Incremental,
                    ModeArg::Sequential => TrainingMode::Sequential,
                }),
            );
            match (source, targets.is_empty()) {
                (Some(s), false) => {
                    cfg.drift.queries = vec![config::DriftQuery {
                        source: s.to_lowercase(),
                        targets: targets.iter().map(|t| t.to_lowercase()).collect(),
                    }]
                }
                (None, true) => {}
                _ => return Err(CliError::config("drift.queries", "--source and --targets go together")),
            }
        }
        Command::CxgParse {
            constructicon,
            vectors,
            group_by,
        } => {
            set_opt(&mut cfg.cxg.constructicon, constructicon.clone());
            set_opt(&mut cfg.cxg.vectors, vectors.clone());
            set(&mut cfg.cxg.group_by, *group_by);
        }
        Command::CxgMine {
            vectors,
            feature_set,
            min_freq,
            threshold,
        } => {
            set_opt(&mut cfg.cxg.vectors, vectors.clone());
            set(&mut cfg.cxg.feature_set, *feature_set);
            set(&mut cfg.cxg.min_freq, *min_freq);
            set(&mut cfg.cxg.association_threshold, *threshold);
        }
        Command::Network { threshold } => set(&mut cfg.network.threshold, *threshold),
        Command::Ols {
            data,
            response,
            predictors,
        } => {
            set_opt(&mut cfg.ols.data, data.clone());
            set_opt(&mut cfg.ols.response, response.clone());
            if !predictors.is_empty() {
                cfg.ols.predictors = predictors.clone();
            }
        }
        Command::Ingest | Command::Stats | Command::Cohorts | Command::Report => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(command: &Command, ctx: &mut Ctx, out: &mut Outputs) -> Result<(), CliError> {
    match command {
        Command::Ingest => commands::ingest(ctx, out, ""),
        Command::Stats => commands::stats(ctx, out, ""),
        Command::Variables { .. } => commands::variables(ctx, out, ""),
        Command::Classify { .. } => commands::classify(ctx, out, ""),
        Command::EmbedTrain { .. } => commands::embed_train(ctx, out, "").map(drop),
        Command::EmbedEval { .. } => commands::embed_eval(ctx, out, ""),
        Command::Drift { .. } => commands::drift(ctx, out, ""),
        Command::CxgParse { .. } => commands::cxg_parse(ctx, out, ""),
        Command::CxgMine { .. } => commands::cxg_mine(ctx, out, "").map(drop),
        Command::Network { .. } => commands::network(ctx, out, ""),
        Command::Cohorts => commands::cohorts(ctx, out, ""),
        Command::Ols { .. } => commands::ols(ctx, out, ""),
        Command::Report => commands::report(ctx, out),
    }
}

fn run(cli: &Cli) -> Result<PathBuf, CliError> {
    let cfg = resolve(cli)?;
    let root = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut ctx = Ctx::new(cfg.clone())?;
    let mut out = Outputs::new(&root)?;
    match dispatch(&cli.command, &mut ctx, &mut out) {
        Ok(()) => {
            out.finish(cli.command.name(), &cfg)?;
            Ok(root)
        }
        Err(e) => {
            out.abort();
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(root) => {
            println!("{}: outputs in {}", cli.command.name(), root.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
