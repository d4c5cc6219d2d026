//! Command-line interface.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use cascadekit_core::classify::{run_trials, ForestConfig, TrialConfig};
use cascadekit_core::event::{BotFilter, EventKind, DEFAULT_BOT};
use cascadekit_core::network::{build_comment_network, degree_distribution, parse_grid, percolate};
use cascadekit_core::sources::{classify_source, subgroup_report, DomainMap};
use cascadekit_core::stats::{ccdf, ks_two_sample};
use cascadekit_core::topics::LdaConfig;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ops;
use crate::parallel::{init_threads, ParallelTrainer, THREADS_ENV};
use crate::pipeline::{parse_combinations, run_pipeline, PipelineConfig, Stage};
use crate::tables;

#[derive(Debug, Parser)]
#[command(name = "cascadekit", version, about = "Discussion-cascade analytics over post/comment dumps")]
pub struct Cli {
    /// Worker threads; 1 gives the reference single-threaded path.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse post and comment dumps into a normalized event file.
    Ingest(IngestArgs),
    /// Per-cascade indicators.
    Metrics(MetricsArgs),
    /// CCDF of one numeric column.
    Ccdf(CcdfArgs),
    /// Two-sample Kolmogorov-Smirnov test on one column of two tables.
    Kstest(KsArgs),
    /// Mean growth curves per community.
    Growth(GrowthArgs),
    /// Lexicon sentiment and emotion scores per post and comment.
    Affect(AffectArgs),
    /// Topic modeling.
    #[command(subcommand)]
    Lda(LdaCommand),
    /// Comment networks.
    #[command(subcommand)]
    Network(NetworkCommand),
    /// Targeted-attack percolation (same as `network percolate`).
    Percolate(PercolateArgs),
    /// Join metrics, affect and topic proportions into a feature table.
    Features(FeaturesArgs),
    /// Random-forest AUC over repeated random splits.
    Classify(ClassifyArgs),
    /// Source subgroups of posts and their cascade statistics.
    Sources(SourcesArgs),
    /// Per-community summary table with K-S tests.
    Report(ReportArgs),
    /// Run the configured stages end to end.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub posts: Vec<PathBuf>,
    #[arg(long, num_args = 1..)]
    pub comments: Vec<PathBuf>,
    /// Accounts whose comments are dropped.
    #[arg(long, value_delimiter = ',', default_value = DEFAULT_BOT)]
    pub bots: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the line accounting as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write line-delimited JSON (with the community) here.
    #[arg(long)]
    pub jsonl: Option<PathBuf>,
    #[arg(long)]
    pub community: Option<String>,
}

#[derive(Debug, Args)]
pub struct CcdfArgs {
    #[arg(long)]
    pub column: String,
    pub table: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KsArgs {
    #[arg(long)]
    pub column: String,
    pub first: PathBuf,
    pub second: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = cascadekit_core::cascade::DEFAULT_GROWTH_CAP)]
    pub cap: usize,
    #[arg(long)]
    pub community: Option<String>,
}

#[derive(Debug, Args)]
pub struct AffectArgs {
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Post,
    Comment,
}

impl From<Kind> for EventKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Post => EventKind::Post,
            Kind::Comment => EventKind::Comment,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum LdaCommand {
    /// Write stop-word-filtered token lists for posts or comments.
    Tokenize {
        #[arg(long)]
        events: PathBuf,
        #[arg(long, value_enum, default_value = "post")]
        kind: Kind,
        /// One stop word per line; the packaged English list otherwise.
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select the vocabulary and fit a model.
    Fit {
        #[arg(long, default_value_t = 20)]
        k: usize,
        #[arg(long, default_value_t = 10_000)]
        vocab: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        theta: PathBuf,
        /// Defaults to 50 / k.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        beta: f64,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the per-sweep log-likelihood as CSV.
        #[arg(long)]
        likelihood: Option<PathBuf>,
    },
    /// Topic proportions for new documents under a fitted model.
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        theta: PathBuf,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum NetworkCommand {
    /// Build the user comment network.
    Build {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        community: Option<String>,
    },
    Percolate(PercolateArgs),
    /// Node, edge and degree counts.
    Stats {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degree CCDF.
    Degrees {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct PercolateArgs {
    #[arg(long)]
    pub net: PathBuf,
    /// Removal fractions as start:stop:step.
    #[arg(long, default_value = "0:0.15:0.001")]
    pub grid: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Recompute degrees after every removal.
    #[arg(long)]
    pub adaptive: bool,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long)]
    pub metrics: PathBuf,
    #[arg(long)]
    pub affect: Option<PathBuf>,
    #[arg(long)]
    pub theta: Option<PathBuf>,
    /// Community of the positive class.
    #[arg(long, default_value = "conspiracy")]
    pub positive: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// `all` for the seven block combinations, or a comma-separated list
    /// such as `topic,dynamic+emotion`.
    #[arg(long, default_value = "all")]
    pub combination: String,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.8)]
    pub split: f64,
    #[arg(long, default_value_t = 200)]
    pub trees: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct SourcesArgs {
    /// `domain,subgroup` CSV; the packaged map otherwise.
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long)]
    pub metrics: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub community: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write cascade counts per community and month.
    #[arg(long)]
    pub monthly: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Comma-separated stages, overriding the configuration.
    #[arg(long, value_delimiter = ',')]
    pub stages: Option<Vec<Stage>>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn run(cli: Cli) -> Result<()> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Ingest(a) => {
            let report = ops::ingest(&a.posts, &a.comments, &BotFilter::new(&a.bots), &a.out)?;
            let json = serde_json::to_string_pretty(&report)?;
            match a.report {
                Some(p) => fs::write(&p, json + "\n").with_context(|| format!("writing {}", p.display()))?,
                None => eprintln!("{json}"),
            }
        }
        Command::Metrics(a) => {
            let (_, metrics) = ops::cascades_and_metrics(&a.events, a.community.as_deref())?;
            tables::write_metrics_csv(&a.out, &metrics)?;
            if let Some(p) = a.jsonl {
                tables::write_metrics_jsonl(&p, &metrics)?;
            }
        }
        Command::Ccdf(a) => {
            let values = tables::read_column(&a.table, &a.column)?;
            tables::write_ccdf(&a.out, &ccdf(&values)?)?;
        }
        Command::Kstest(a) => {
            let x = tables::read_column(&a.first, &a.column)?;
            let y = tables::read_column(&a.second, &a.column)?;
            let r = ks_two_sample(&x, &y)?;
            let text = format!(
                "column,n,m,d,p\n{},{},{},{},{}\n",
                a.column,
                r.n,
                r.m,
                tables::num(r.d_statistic),
                tables::num(r.p_value)
            );
            match a.out {
                Some(p) => fs::write(&p, text)?,
                None => io::stdout().write_all(text.as_bytes())?,
            }
        }
        Command::Growth(a) => {
            let (assembly, _) = ops::cascades_and_metrics(&a.events, a.community.as_deref())?;
            ops::growth(&assembly.trees, a.cap).write_csv(&a.out)?;
        }
        Command::Affect(a) => {
            let lexicon = ops::load_lexicon(&a.lexicon)?;
            ops::affect(&a.events, &lexicon, &a.out)?;
        }
        Command::Lda(cmd) => run_lda(cmd)?,
        Command::Network(cmd) => run_network(cmd)?,
        Command::Percolate(a) => run_percolate(&a)?,
        Command::Features(a) => {
            let metrics = tables::read_metrics_csv(&a.metrics)?;
            let affect = match &a.affect {
                Some(p) => tables::read_post_affect(p)?,
                None => BTreeMap::new(),
            };
            let (k, theta) = match &a.theta {
                Some(p) => {
                    let (k, rows) = tables::read_theta(p)?;
                    (k, rows.into_iter().collect())
                }
                None => (0, BTreeMap::new()),
            };
            let table = ops::build_features(&a.events, &metrics, &affect, &theta, k, &a.positive)?;
            tables::write_features(&a.out, &table)?;
        }
        Command::Classify(a) => {
            let table = tables::read_features(&a.features)?;
            let combinations = parse_combinations(&a.combination)?;
            let cfg = TrialConfig {
                trials: a.trials,
                split: a.split,
                seed: a.seed,
                forest: ForestConfig { trees: a.trees, ..ForestConfig::default() },
            };
            let reports = run_trials(&table, &combinations, &cfg, &ParallelTrainer)?;
            tables::write_auc_report(&a.report, &reports)?;
            for r in &reports {
                eprintln!("{:<24} mean AUC {:.4} ± {:.4}", r.combination.to_string(), r.mean, r.std_error);
            }
        }
        Command::Sources(a) => {
            let map = match &a.map {
                Some(p) => DomainMap::parse_csv(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
                None => DomainMap::seeded(),
            };
            let metrics = tables::read_metrics_csv(&a.metrics)?;
            let assignments: Vec<_> = ops::posts(&a.events)?
                .iter()
                .filter(|p| a.community.as_deref().is_none_or(|c| p.community == c))
                .map(|p| classify_source(p, &map))
                .collect();
            let roots: std::collections::BTreeSet<&str> = assignments.iter().map(|s| s.root_id.as_str()).collect();
            let metrics: Vec<_> = metrics.into_iter().filter(|m| roots.contains(m.root_id.as_str())).collect();
            tables::write_subgroups(&a.out, &subgroup_report(&assignments, &metrics))?;
        }
        Command::Report(a) => {
            let (_, metrics) = ops::cascades_and_metrics(&a.events, None)?;
            tables::write_report(&a.out, &tables::indicator_report(&metrics)?)?;
            if let Some(p) = a.monthly {
                let mut w = tables::csv_writer(&p)?;
                w.write_record(["community", "month", "cascades"])?;
                let mut by: BTreeMap<&str, Vec<_>> = BTreeMap::new();
                for m in &metrics {
                    by.entry(m.community.as_str()).or_default().push(m);
                }
                for (c, ms) in by {
                    for (month, n) in cascadekit_core::cascade::monthly_counts(ms) {
                        w.write_record([c.to_string(), month.to_string(), n.to_string()])?;
                    }
                }
                w.flush()?;
            }
        }
        Command::Pipeline(a) => {
            let mut cfg = PipelineConfig::load(&a.config)?;
            if let Some(d) = a.out_dir {
                cfg.out_dir = d;
            }
            if let Some(s) = a.stages {
                cfg.stages = s;
            }
            if let Some(l) = a.lexicon {
                cfg.lexicon = Some(l);
            }
            if let Some(k) = a.k {
                cfg.topics.k = k;
            }
            if let Some(i) = a.iterations {
                cfg.topics.iterations = i;
            }
            if let Some(t) = a.trees {
                cfg.classify.trees = t;
            }
            if let Some(t) = a.trials {
                cfg.classify.trials = t;
            }
            if let Some(s) = a.seed {
                cfg.topics.seed = s;
                cfg.classify.seed = s;
            }
            let summary = run_pipeline(&cfg)?;
            for p in &summary.outputs {
                eprintln!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn run_lda(cmd: LdaCommand) -> Result<()> {
    match cmd {
        LdaCommand::Tokenize { events, kind, stopwords, out } => {
            let stop = ops::load_stopwords(stopwords.as_deref())?;
            let docs = ops::token_docs(&events, kind.into(), &stop)?;
            ops::write_token_docs(&out, &docs)?;
        }
        LdaCommand::Fit { k, vocab, input, model, theta, alpha, beta, iterations, seed, likelihood } => {
            let docs = ops::read_token_docs(&input)?;
            let cfg = LdaConfig { k, alpha, beta, iterations, seed, track_likelihood: likelihood.is_some() };
            let (fit, rows) = ops::fit_topics(&docs, vocab, &cfg)?;
            ops::save_model(&model, &fit.model)?;
            tables::write_theta(&theta, k, &rows)?;
            if let Some(p) = likelihood {
                let mut w = tables::csv_writer(&p)?;
                w.write_record(["iteration", "log_likelihood"])?;
                for (i, ll) in fit.log_likelihood.iter().enumerate() {
                    w.write_record([(i + 1).to_string(), tables::num(*ll)])?;
                }
                w.flush()?;
            }
        }
        LdaCommand::Infer { model, input, theta, iterations, seed } => {
            let model = ops::load_model(&model)?;
            let docs = ops::read_token_docs(&input)?;
            let rows = ops::infer_docs(&model, &docs, iterations, seed);
            tables::write_theta(&theta, model.k, &rows)?;
        }
    }
    Ok(())
}

fn run_network(cmd: NetworkCommand) -> Result<()> {
    match cmd {
        NetworkCommand::Build { events, out, community } => {
            let (assembly, _) = ops::cascades_and_metrics(&events, community.as_deref())?;
            ops::save_network(&out, &build_comment_network(&assembly.trees))?;
        }
        NetworkCommand::Percolate(a) => run_percolate(&a)?,
        NetworkCommand::Stats { net, out } => {
            let network = ops::load_network(&net)?;
            let mut buf = Vec::new();
            {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
                w.write_record(ops::NET_STATS_HEADER)?;
                let name = net.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                w.write_record(ops::net_stats_record(&name, &network))?;
                w.flush()?;
            }
            match out {
                Some(p) => fs::write(&p, buf)?,
                None => io::stdout().write_all(&buf)?,
            }
        }
        NetworkCommand::Degrees { net, out } => {
            let network = ops::load_network(&net)?;
            tables::write_ccdf(&out, &degree_distribution(&network)?)?;
        }
    }
    Ok(())
}

fn run_percolate(a: &PercolateArgs) -> Result<()> {
    let net = ops::load_network(&a.net)?;
    let grid = parse_grid(&a.grid)?;
    if net.node_count() == 0 {
        bail!("{}: network has no nodes", a.net.display());
    }
    let trace = percolate(&net, &grid, a.adaptive)?;
    let mut w = tables::csv_writer(&a.out)?;
    w.write_record(["q", "g"])?;
    for (q, g) in trace.points {
        w.write_record([tables::num(q), tables::num(g)])?;
    }
    w.flush()?;
    Ok(())
}
