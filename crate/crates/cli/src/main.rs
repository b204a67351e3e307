//! Command-line pipeline for targeted-abuse analysis of short-text corpora:
//! ingest -> sample -> kappa -> train -> evaluate -> classify ->
//! heterogeneity -> deterrence -> report.

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod errors;
mod figures;
mod manifest;

use config::RunConfig;
use errors::CliResult;

#[derive(Parser, Debug)]
#[command(
    name = "abuselens",
    version,
    about = "Detect targeted misogynistic abuse in a post corpus, explain which targets attract it, and quantify its silencing effect"
)]
struct Cli {
    /// Flat key = value configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    posts: Option<PathBuf>,
    #[arg(long, global = true)]
    roster: Option<PathBuf>,
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    window_start: Option<NaiveDate>,
    #[arg(long, global = true)]
    window_end: Option<NaiveDate>,
    #[arg(long, global = true)]
    min_mentions: Option<usize>,
    #[arg(long, global = true)]
    keyness_p: Option<f64>,
    #[arg(long, global = true)]
    test_fraction: Option<f64>,
    #[arg(long, global = true)]
    min_weekly_miso: Option<u32>,
    #[arg(long, global = true)]
    cluster_k: Option<usize>,
    #[arg(long, global = true)]
    sample_n: Option<usize>,
    #[arg(long, global = true)]
    sample_min_chars: Option<usize>,
    #[arg(long, global = true)]
    sample_cap_factor: Option<f64>,
    #[arg(long, global = true)]
    binary_features: bool,
    #[arg(long, global = true)]
    fold_accents: bool,
    /// anchored (7-day blocks from the window start) or iso.
    #[arg(long, global = true)]
    week_rule: Option<String>,
    /// any_week, every_week or mean.
    #[arg(long, global = true)]
    selection_mode: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results are identical at any setting.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Suppress timestamps in figures so reruns are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,

    #[arg(long, global = true)]
    nb_alpha: Option<f64>,
    #[arg(long, global = true)]
    nbg_var_floor: Option<f64>,
    #[arg(long, global = true)]
    lr_l2: Option<f64>,
    #[arg(long, global = true)]
    lr_tol: Option<f64>,
    #[arg(long, global = true)]
    lr_max_iter: Option<usize>,
    #[arg(long, global = true)]
    svm_c: Option<f64>,
    #[arg(long, global = true)]
    svm_tol: Option<f64>,
    #[arg(long, global = true)]
    svm_max_passes: Option<usize>,
    #[arg(long, global = true)]
    rf_trees: Option<usize>,
    #[arg(long, global = true)]
    knn_k: Option<usize>,
    #[arg(long, global = true)]
    stack_folds: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate, deduplicate and window-restrict the corpus; mention-filter
    /// the roster.
    Ingest,
    /// Draw the stratified annotation subsample.
    Sample,
    /// Inter-coder agreement (Cohen's kappa).
    Kappa {
        /// First label file (optional; defaults to the configured labels
        /// file with two coders).
        file_a: Option<PathBuf>,
        /// Second label file.
        file_b: Option<PathBuf>,
    },
    /// Train all classifier kinds and persist the stacking model.
    Train,
    /// Re-score the saved model on the stratified test split.
    Evaluate,
    /// Flag every ingested post with the saved model.
    Classify,
    /// Fit the Poisson GLM on per-target misogynistic mention counts.
    Heterogeneity,
    /// Weekly lag pairs, outlier detection, and the pooled silencing
    /// regression.
    Deterrence,
    /// Monthly series table and SVG figures.
    Report,
}

fn build_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        config::apply_config_file(&mut config, path)?;
    }
    macro_rules! take {
        ($($field:ident),+ $(,)?) => {
            $(if let Some(v) = &cli.$field { config.$field = Some(v.clone()); })+
        };
    }
    take!(posts, roster, labels);
    if let Some(v) = &cli.out_dir {
        config.out_dir = v.clone();
    }
    macro_rules! set {
        ($($field:ident),+ $(,)?) => {
            $(if let Some(v) = cli.$field { config.$field = v; })+
        };
    }
    set!(
        window_start,
        window_end,
        min_mentions,
        keyness_p,
        test_fraction,
        min_weekly_miso,
        cluster_k,
        sample_n,
        sample_min_chars,
        sample_cap_factor,
    );
    if cli.binary_features {
        config.binary_features = true;
    }
    if cli.fold_accents {
        config.fold_accents = true;
    }
    if let Some(rule) = &cli.week_rule {
        config.week_rule = config::parse_week_rule(rule)?;
    }
    if let Some(mode) = &cli.selection_mode {
        config.selection_mode = config::parse_selection_mode(mode)?;
    }
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = Some(jobs);
    }
    if cli.deterministic {
        config.deterministic = true;
    }
    macro_rules! hyper {
        ($($field:ident),+ $(,)?) => {
            $(if let Some(v) = cli.$field { config.hyper.$field = v; })+
        };
    }
    hyper!(
        nb_alpha,
        nbg_var_floor,
        lr_l2,
        lr_tol,
        lr_max_iter,
        svm_c,
        svm_tol,
        svm_max_passes,
        rf_trees,
        knn_k,
        stack_folds,
    );
    config.validate()?;
    Ok(config)
}

fn dispatch(command: &Command, config: &RunConfig) -> CliResult<()> {
    // one subcommand at a time per output directory
    let _lock = manifest::DirLock::acquire(&config.out_dir)?;
    match command {
        Command::Ingest => commands::ingest::run(config),
        Command::Sample => commands::sample::run(config),
        Command::Kappa { file_a, file_b } => {
            commands::kappa::run(config, file_a.as_deref(), file_b.as_deref())
        }
        Command::Train => commands::train::run(config),
        Command::Evaluate => commands::evaluate::run(config),
        Command::Classify => commands::classify::run(config),
        Command::Heterogeneity => commands::heterogeneity::run(config),
        Command::Deterrence => commands::deterrence::run(config),
        Command::Report => commands::report::run(config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(jobs) = config.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match dispatch(&cli.command, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
