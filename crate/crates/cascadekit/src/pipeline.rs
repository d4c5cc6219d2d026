//! End-to-end batch runs driven by a TOML configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use cascadekit_core::cascade::{monthly_counts, Assembly, CascadeMetrics, DEFAULT_GROWTH_CAP};
use cascadekit_core::classify::{Combination, ForestConfig, TrialConfig};
use cascadekit_core::event::{BotFilter, EventKind, IngestReport, DEFAULT_BOT};
use cascadekit_core::network::parse_grid;
use cascadekit_core::sources::{classify_source, subgroup_report, DomainMap};
use cascadekit_core::stats::ccdf;
use cascadekit_core::topics::LdaConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ops;
use crate::parallel::ParallelTrainer;
use crate::tables;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Metrics,
    Ccdf,
    Growth,
    Affect,
    Topics,
    Network,
    Sources,
    Classify,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Metrics,
        Stage::Ccdf,
        Stage::Growth,
        Stage::Affect,
        Stage::Topics,
        Stage::Network,
        Stage::Sources,
        Stage::Classify,
        Stage::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Metrics => "metrics",
            Stage::Ccdf => "ccdf",
            Stage::Growth => "growth",
            Stage::Affect => "affect",
            Stage::Topics => "topics",
            Stage::Network => "network",
            Stage::Sources => "sources",
            Stage::Classify => "classify",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL.into_iter().find(|st| st.as_str() == s.trim()).ok_or_else(|| anyhow!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicSettings {
    pub k: usize,
    pub vocab: usize,
    pub iterations: usize,
    pub alpha: Option<f64>,
    pub beta: f64,
    pub seed: u64,
}

impl Default for TopicSettings {
    fn default() -> Self {
        TopicSettings { k: 20, vocab: 10_000, iterations: 1000, alpha: None, beta: 0.01, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySettings {
    pub trees: usize,
    pub trials: usize,
    pub split: f64,
    pub seed: u64,
    pub combinations: String,
}

impl Default for ClassifySettings {
    fn default() -> Self {
        ClassifySettings { trees: 200, trials: 10, split: 0.8, seed: 7, combinations: "all".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSettings {
    pub grid: String,
    pub adaptive: bool,
}

impl Default for NetworkSettings {
    fn default() -> Self {
        NetworkSettings { grid: "0:0.15:0.001".into(), adaptive: false }
    }
}

/// Everything a run needs. Relative paths are resolved against the
/// directory of the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub posts: Vec<PathBuf>,
    pub comments: Vec<PathBuf>,
    pub bots: Vec<String>,
    pub lexicon: Option<PathBuf>,
    pub domain_map: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub stages: Vec<Stage>,
    pub positive_community: String,
    pub growth_cap: usize,
    pub topics: TopicSettings,
    pub classify: ClassifySettings,
    pub network: NetworkSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            posts: Vec::new(),
            comments: Vec::new(),
            bots: vec![DEFAULT_BOT.to_string()],
            lexicon: None,
            domain_map: None,
            stopwords: None,
            out_dir: PathBuf::from("out"),
            stages: Stage::ALL.to_vec(),
            positive_community: "conspiracy".into(),
            growth_cap: DEFAULT_GROWTH_CAP,
            topics: TopicSettings::default(),
            classify: ClassifySettings::default(),
            network: NetworkSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).context("configuration")?;
        cfg.resolve(base);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.posts.iter_mut().for_each(fix);
        self.comments.iter_mut().for_each(fix);
        [&mut self.lexicon, &mut self.domain_map, &mut self.stopwords].into_iter().flatten().for_each(fix);
        fix(&mut self.out_dir);
    }

    pub fn enabled(&self, stage: Stage) -> bool {
        self.stages.contains(&stage)
    }

    /// Checks everything that can be checked before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.posts.is_empty() {
            bail!("no post dumps configured");
        }
        for p in self.posts.iter().chain(&self.comments) {
            if !p.is_file() {
                bail!("input {} does not exist", p.display());
            }
        }
        if self.enabled(Stage::Affect) || self.enabled(Stage::Classify) {
            match &self.lexicon {
                None => bail!("the affect and classify stages need a lexicon path"),
                Some(p) if !p.is_file() => bail!("lexicon {} does not exist", p.display()),
                _ => {}
            }
        }
        if self.enabled(Stage::Classify) && !(self.enabled(Stage::Affect) && self.enabled(Stage::Topics)) {
            bail!("the classify stage needs the affect and topics stages");
        }
        for p in [&self.domain_map, &self.stopwords].into_iter().flatten() {
            if !p.is_file() {
                bail!("{} does not exist", p.display());
            }
        }
        if self.topics.k == 0 || self.topics.vocab == 0 {
            bail!("topics.k and topics.vocab must be positive");
        }
        parse_grid(&self.network.grid)?;
        self.combinations()?;
        if !(self.classify.split > 0.0 && self.classify.split < 1.0) {
            bail!("classify.split must be inside (0, 1)");
        }
        if self.classify.trials == 0 || self.classify.trees == 0 {
            bail!("classify.trials and classify.trees must be positive");
        }
        Ok(())
    }

    /// `all` means all seven combinations; otherwise a comma-separated
    /// list such as `topic,dynamic+emotion`.
    pub fn combinations(&self) -> Result<Vec<Combination>> {
        parse_combinations(&self.classify.combinations)
    }
}

pub fn parse_combinations(spec: &str) -> Result<Vec<Combination>> {
    if spec.trim() == "all" {
        return Ok(Combination::all().to_vec());
    }
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<Combination>().map_err(anyhow::Error::from))
        .collect()
}

#[derive(Debug, Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    format_version: u32,
    seeds: BTreeMap<&'static str, u64>,
    config: &'a PipelineConfig,
    inputs: Vec<FileDigest>,
    ingest: IngestReport,
    outputs: Vec<FileDigest>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path).with_context(|| format!("hashing {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// A stage failure, carrying the stage name.
#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub source: anyhow::Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage `{}` failed: {:#}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {}

/// Outputs written so far, in order.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub outputs: Vec<PathBuf>,
    pub ingest: IngestReport,
}

struct Run<'a> {
    cfg: &'a PipelineConfig,
    dir: PathBuf,
    summary: RunSummary,
}

impl Run<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Runs one stage; on failure its files are removed before returning.
    fn stage<T>(&mut self, stage: Stage, files: &[&str], body: impl FnOnce(&Self) -> Result<T>) -> Result<T> {
        match body(self) {
            Ok(v) => {
                self.summary.outputs.extend(files.iter().map(|f| self.dir.join(f)));
                Ok(v)
            }
            Err(source) => {
                for f in files {
                    let _ = fs::remove_file(self.dir.join(f));
                }
                Err(StageError { stage, source }.into())
            }
        }
    }
}

/// Runs every enabled stage in dependency order and writes
/// `manifest.json` last.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunSummary> {
    cfg.validate().context("configuration error")?;
    // Parse everything user-supplied before starting work.
    let lexicon = match &cfg.lexicon {
        Some(p) if cfg.enabled(Stage::Affect) => Some(ops::load_lexicon(p).context("configuration error")?),
        _ => None,
    };
    let domain_map = match &cfg.domain_map {
        Some(p) => DomainMap::parse_csv(&fs::read_to_string(p)?).context("configuration error")?,
        None => DomainMap::seeded(),
    };
    let stopwords = ops::load_stopwords(cfg.stopwords.as_deref()).context("configuration error")?;
    let grid = parse_grid(&cfg.network.grid)?;
    let combinations = cfg.combinations()?;

    fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let scratch = tempfile_in(&cfg.out_dir)?;
    let events = scratch.path().join("events.jsonl");
    let bots = BotFilter::new(&cfg.bots);
    let ingest = ops::ingest(&cfg.posts, &cfg.comments, &bots, &events)
        .map_err(|source| anyhow::Error::from(IngestError(source)))?;

    let mut run = Run { cfg, dir: cfg.out_dir.clone(), summary: RunSummary { ingest, ..RunSummary::default() } };
    let (assembly, metrics): (Assembly, Vec<CascadeMetrics>) =
        run.stage(Stage::Metrics, &[], |_| ops::cascades_and_metrics(&events, None))?;
    run.summary.ingest.orphan_comments_dropped = assembly.orphans + assembly.duplicates;

    if cfg.enabled(Stage::Metrics) {
        run.stage(Stage::Metrics, &["metrics.csv"], |r| tables::write_metrics_csv(&r.path("metrics.csv"), &metrics))?;
    }
    if cfg.enabled(Stage::Ccdf) {
        run.stage(Stage::Ccdf, &["ccdf.csv"], |r| write_ccdfs(&r.path("ccdf.csv"), &metrics))?;
    }
    if cfg.enabled(Stage::Growth) {
        run.stage(Stage::Growth, &["growth.csv"], |r| {
            ops::growth(&assembly.trees, r.cfg.growth_cap).write_csv(&r.path("growth.csv"))
        })?;
    }
    let post_affect = match &lexicon {
        Some(lex) if cfg.enabled(Stage::Affect) => {
            Some(run.stage(Stage::Affect, &["affect.csv"], |r| ops::affect(&events, lex, &r.path("affect.csv")))?)
        }
        _ => None,
    };
    let post_theta = if cfg.enabled(Stage::Topics) {
        let files = ["lda_posts.bin", "theta_posts.csv", "lda_comments.bin", "theta_comments.csv"];
        Some(run.stage(Stage::Topics, &files, |r| topics_stage(r, &events, &stopwords))?)
    } else {
        None
    };
    if cfg.enabled(Stage::Network) {
        let files = ["net_stats.csv", "degrees.csv", "percolation.csv"];
        run.stage(Stage::Network, &files, |r| {
            let nets = ops::networks_by_community(&assembly.trees);
            ops::write_net_stats(&r.path("net_stats.csv"), &nets)?;
            ops::write_degrees(&r.path("degrees.csv"), &nets)?;
            ops::write_percolation(&r.path("percolation.csv"), &nets, &grid, r.cfg.network.adaptive)
        })?;
    }
    if cfg.enabled(Stage::Sources) {
        run.stage(Stage::Sources, &["subgroups.csv"], |r| {
            let assignments: Vec<_> = assembly
                .trees
                .iter()
                .map(|t| classify_source(&tree_post(t), &domain_map))
                .collect();
            tables::write_subgroups(&r.path("subgroups.csv"), &subgroup_report(&assignments, &metrics))
        })?;
    }
    if cfg.enabled(Stage::Classify) {
        let (affect, theta) = (post_affect.as_ref().expect("validated"), post_theta.as_ref().expect("validated"));
        run.stage(Stage::Classify, &["features.csv", "auc.csv"], |r| {
            let table = ops::build_features(&events, &metrics, affect, theta, r.cfg.topics.k, &r.cfg.positive_community)?;
            tables::write_features(&r.path("features.csv"), &table)?;
            let trial = TrialConfig {
                trials: r.cfg.classify.trials,
                split: r.cfg.classify.split,
                seed: r.cfg.classify.seed,
                forest: ForestConfig { trees: r.cfg.classify.trees, ..ForestConfig::default() },
            };
            let reports = cascadekit_core::classify::run_trials(&table, &combinations, &trial, &ParallelTrainer)?;
            tables::write_auc_report(&r.path("auc.csv"), &reports)
        })?;
    }
    if cfg.enabled(Stage::Report) {
        run.stage(Stage::Report, &["report.csv", "monthly.csv"], |r| {
            tables::write_report(&r.path("report.csv"), &tables::indicator_report(&metrics)?)?;
            write_monthly(&r.path("monthly.csv"), &metrics)
        })?;
    }

    write_manifest(&run)?;
    let mut summary = run.summary;
    summary.outputs.push(cfg.out_dir.join("manifest.json"));
    Ok(summary)
}

#[derive(Debug)]
struct IngestError(anyhow::Error);

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage `ingest` failed: {:#}", self.0)
    }
}

impl std::error::Error for IngestError {}

/// A hidden scratch directory inside the output directory, removed on drop.
fn tempfile_in(dir: &Path) -> Result<ScratchDir> {
    let path = dir.join(".cascadekit-scratch");
    let _ = fs::remove_dir_all(&path);
    fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(ScratchDir(path))
}

struct ScratchDir(PathBuf);

impl ScratchDir {
    fn path(&self) -> &Path {
        &self.0
    }
}

impl Drop for ScratchDir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

/// The root post of a tree, as far as source classification needs it.
fn tree_post(tree: &cascadekit_core::cascade::CascadeTree) -> cascadekit_core::event::ThreadEvent {
    let root = tree.root();
    cascadekit_core::event::ThreadEvent::post(
        &root.id,
        root.author.as_deref(),
        root.created_utc,
        "",
        tree.url.as_deref(),
        &tree.community,
    )
}

fn topics_stage(
    run: &Run<'_>,
    events: &Path,
    stopwords: &cascadekit_core::text::StopWords,
) -> Result<BTreeMap<String, Vec<f64>>> {
    let t = &run.cfg.topics;
    let lda = LdaConfig {
        k: t.k,
        alpha: t.alpha,
        beta: t.beta,
        iterations: t.iterations,
        seed: t.seed,
        track_likelihood: false,
    };
    let mut post_theta = BTreeMap::new();
    for (kind, name) in [(EventKind::Post, "posts"), (EventKind::Comment, "comments")] {
        let docs = ops::token_docs(events, kind, stopwords)?;
        if docs.iter().all(|d| d.tokens.is_empty()) {
            continue;
        }
        let (fit, rows) = ops::fit_topics(&docs, t.vocab, &lda).with_context(|| format!("{name} model"))?;
        ops::save_model(&run.path(&format!("lda_{name}.bin")), &fit.model)?;
        tables::write_theta(&run.path(&format!("theta_{name}.csv")), t.k, &rows)?;
        if kind == EventKind::Post {
            post_theta = rows.into_iter().collect();
        }
    }
    Ok(post_theta)
}

/// CCDF of every indicator per community: `community,indicator,value,ccdf`.
fn write_ccdfs(path: &Path, metrics: &[CascadeMetrics]) -> Result<()> {
    let mut groups: BTreeMap<&str, Vec<&CascadeMetrics>> = BTreeMap::new();
    for m in metrics {
        groups.entry(m.community.as_str()).or_default().push(m);
    }
    let mut w = tables::csv_writer(path)?;
    w.write_record(["community", "indicator", "value", "ccdf"])?;
    for (community, ms) in &groups {
        let columns: [(&str, Vec<f64>); 6] = [
            ("size", ms.iter().map(|m| m.size as f64).collect()),
            ("unique_users", ms.iter().map(|m| m.unique_users as f64).collect()),
            ("depth", ms.iter().map(|m| m.depth as f64).collect()),
            ("virality", ms.iter().map(|m| m.virality).collect()),
            ("lifetime_minutes", ms.iter().map(|m| m.lifetime_minutes).collect()),
            ("burstiness", ms.iter().filter_map(|m| m.burstiness).collect()),
        ];
        for (name, values) in columns {
            if values.is_empty() {
                continue;
            }
            for (v, p) in ccdf(&values)?.points {
                w.write_record([community.to_string(), name.to_string(), tables::num(v), tables::num(p)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_monthly(path: &Path, metrics: &[CascadeMetrics]) -> Result<()> {
    let mut groups: BTreeMap<&str, Vec<&CascadeMetrics>> = BTreeMap::new();
    for m in metrics {
        groups.entry(m.community.as_str()).or_default().push(m);
    }
    let mut w = tables::csv_writer(path)?;
    w.write_record(["community", "month", "cascades"])?;
    for (community, ms) in groups {
        for (month, n) in monthly_counts(ms) {
            w.write_record([community.to_string(), month.to_string(), n.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_manifest(run: &Run<'_>) -> Result<()> {
    let cfg = run.cfg;
    let digest = |p: &PathBuf| -> Result<FileDigest> { Ok(FileDigest { path: p.display().to_string(), sha256: sha256_file(p)? }) };
    let mut inputs: Vec<&PathBuf> = cfg.posts.iter().chain(&cfg.comments).collect();
    inputs.extend([&cfg.lexicon, &cfg.domain_map, &cfg.stopwords].into_iter().flatten());
    let outputs = run
        .summary
        .outputs
        .iter()
        .map(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(FileDigest { path: name, sha256: sha256_file(p)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        format_version: crate::formats::FORMAT_VERSION,
        seeds: BTreeMap::from([("topics", cfg.topics.seed), ("classify", cfg.classify.seed)]),
        config: cfg,
        inputs: inputs.into_iter().map(digest).collect::<Result<_>>()?,
        ingest: run.summary.ingest,
        outputs,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(run.path("manifest.json"), text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_documented_parameters() {
        let cfg = PipelineConfig::from_toml("posts = [\"p.jsonl\"]", Path::new("/base")).unwrap();
        assert_eq!(cfg.topics.vocab, 10_000);
        assert_eq!(cfg.topics.k, 20);
        assert_eq!(cfg.classify.trees, 200);
        assert_eq!(cfg.classify.trials, 10);
        assert_eq!(cfg.classify.split, 0.8);
        assert_eq!(cfg.bots, vec!["AutoModerator"]);
        assert_eq!(cfg.posts, vec![PathBuf::from("/base/p.jsonl")]);
        assert_eq!(cfg.combinations().unwrap().len(), 7);
    }

    #[test]
    fn unknown_keys_and_stages_are_rejected() {
        assert!(PipelineConfig::from_toml("postz = []", Path::new(".")).is_err());
        assert!(PipelineConfig::from_toml("stages = [\"plot\"]", Path::new(".")).is_err());
    }

    #[test]
    fn missing_lexicon_is_a_configuration_error() {
        let dir = tempfile::tempdir().unwrap();
        let posts = dir.path().join("p.jsonl");
        fs::write(&posts, "").unwrap();
        let cfg = PipelineConfig {
            posts: vec![posts],
            out_dir: dir.path().join("out"),
            stages: vec![Stage::Metrics, Stage::Affect],
            ..PipelineConfig::default()
        };
        let err = run_pipeline(&cfg).unwrap_err();
        assert!(format!("{err:#}").contains("lexicon"), "{err:#}");
        assert!(!dir.path().join("out").exists(), "no work before the check");
    }
}
