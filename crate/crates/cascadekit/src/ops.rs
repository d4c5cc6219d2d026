//! File-level operations shared by the subcommands and the pipeline.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cascadekit_core::cascade::{growth_curves, Assembly, CascadeBuilder, CascadeMetrics, CascadeTree};
use cascadekit_core::classify::{dynamic_features, FeatureRow, FeatureTable};
use cascadekit_core::event::{BotFilter, EventKind, IngestReport, ThreadEvent};
use cascadekit_core::network::{build_comment_network, degree_distribution, percolate, CommentNetwork};
use cascadekit_core::rng::mix_seed;
use cascadekit_core::text::{build_vocabulary, score_affect, tokenize, tokenize_filtered, Lexicon, StopWords, Vocabulary};
use cascadekit_core::topics::{fit_lda, infer_topics, LdaConfig, LdaFit, TopicModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dump::{open_input, parse_dump_stream};
use crate::events::{for_each_event, load_cascades, EventWriter};
use crate::formats;
use crate::parallel::metrics_par;
use crate::tables::{self, AffectRow, DocTheta, GrowthAggregate};

/// Parses post and comment dumps, drops bot comments and writes the
/// normalized event file. Orphans stay in the file (assembly drops them)
/// but are counted in the report.
pub fn ingest(posts: &[PathBuf], comments: &[PathBuf], bots: &BotFilter, out: &Path) -> Result<IngestReport> {
    let mut writer = EventWriter::create(out)?;
    let mut report = IngestReport::default();
    let mut builder = CascadeBuilder::new();
    let inputs = posts.iter().map(|p| (p, EventKind::Post)).chain(comments.iter().map(|p| (p, EventKind::Comment)));
    for (path, kind) in inputs {
        let input = open_input(path).with_context(|| format!("opening {}", path.display()))?;
        let mut stream = parse_dump_stream(input, kind);
        let mut dropped = 0u64;
        for event in stream.by_ref() {
            let event = event.with_context(|| format!("reading {}", path.display()))?;
            if bots.drops(&event) {
                dropped += 1;
                continue;
            }
            builder.push(&event);
            writer.write(&event)?;
        }
        let mut part = stream.report();
        part.bot_comments_dropped = dropped;
        report.merge(&part);
    }
    writer.finish()?;
    let assembly = builder.finish();
    report.orphan_comments_dropped = assembly.orphans + assembly.duplicates;
    Ok(report)
}

/// Builds cascades from an event file and computes their metrics, in post
/// order. With `community`, other communities are skipped.
pub fn cascades_and_metrics(events: &Path, community: Option<&str>) -> Result<(Assembly, Vec<CascadeMetrics>)> {
    let mut assembly = load_cascades(events)?;
    if let Some(c) = community {
        assembly.trees.retain(|t| t.community == c);
    }
    let metrics = metrics_par(&assembly.trees);
    Ok((assembly, metrics))
}

pub fn growth(trees: &[CascadeTree], cap: usize) -> GrowthAggregate {
    let curves: Vec<_> = trees.par_iter().map(|t| growth_curves(t, cap)).collect();
    let mut agg = GrowthAggregate::default();
    for (tree, c) in trees.iter().zip(&curves) {
        agg.add(&tree.community, c);
    }
    agg
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    let reader = open_input(path).with_context(|| format!("opening lexicon {}", path.display()))?;
    let mut lex = Lexicon::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        lex.add_line(i + 1, &line).with_context(|| format!("lexicon {}", path.display()))?;
    }
    Ok(lex)
}

pub fn load_stopwords(path: Option<&Path>) -> Result<StopWords> {
    match path {
        None => Ok(StopWords::default()),
        Some(p) => Ok(StopWords::parse(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)),
    }
}

/// Writes one affect row per event and returns the post emotion vectors.
pub fn affect(events: &Path, lexicon: &Lexicon, out: &Path) -> Result<BTreeMap<String, [f64; 10]>> {
    let mut w = tables::csv_writer(out)?;
    w.write_record(tables::affect_header())?;
    let mut posts = BTreeMap::new();
    let mut result = Ok(());
    for_each_event(events, |e| {
        if result.is_err() {
            return;
        }
        let scores = score_affect(&tokenize(&e.text), lexicon);
        if e.is_post() {
            posts.insert(e.id.clone(), scores.scores);
        }
        let row = AffectRow {
            id: e.id,
            kind: e.kind.as_str().to_string(),
            root_id: e.root_id,
            community: e.community,
            scores,
        };
        result = tables::write_affect_row(&mut w, &row);
    })?;
    result?;
    w.flush()?;
    Ok(posts)
}

/// One tokenized document of the topic-model corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenDoc {
    pub id: String,
    pub tokens: Vec<String>,
}

/// Stop-word-filtered token lists for the events of one kind.
pub fn token_docs(events: &Path, kind: EventKind, stop: &StopWords) -> Result<Vec<TokenDoc>> {
    let mut docs = Vec::new();
    for_each_event(events, |e| {
        if e.kind == kind {
            docs.push(TokenDoc { tokens: tokenize_filtered(&e.text, stop), id: e.id });
        }
    })?;
    Ok(docs)
}

pub fn write_token_docs(path: &Path, docs: &[TokenDoc]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for d in docs {
        serde_json::to_writer(&mut out, d)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_token_docs(path: &Path) -> Result<Vec<TokenDoc>> {
    let reader = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        docs.push(serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), i + 1))?);
    }
    Ok(docs)
}

/// Selects the vocabulary and fits the model. Returns the fit and the
/// `(doc id, theta)` rows in corpus order.
pub fn fit_topics(docs: &[TokenDoc], vocab_cap: usize, config: &LdaConfig) -> Result<(LdaFit, Vec<DocTheta>)> {
    if docs.is_empty() {
        bail!("no documents to fit");
    }
    let vocab: Vocabulary = build_vocabulary(docs.iter().map(|d| &d.tokens[..]), vocab_cap)?;
    let encoded: Vec<Vec<u32>> = docs.iter().map(|d| vocab.encode(&d.tokens)).collect();
    let fit = fit_lda(&encoded, &vocab, config)?;
    let rows = docs.iter().zip(&fit.doc_topics).map(|(d, t)| (d.id.clone(), t.theta.clone())).collect();
    Ok((fit, rows))
}

/// Infers theta for each document; document `i` samples with
/// `mix_seed(seed, i)`.
pub fn infer_docs(model: &TopicModel, docs: &[TokenDoc], iterations: usize, seed: u64) -> Vec<DocTheta> {
    let index: BTreeMap<&str, u32> = model.words.iter().enumerate().map(|(i, w)| (w.as_str(), i as u32)).collect();
    docs.par_iter()
        .enumerate()
        .map(|(i, d)| {
            let ids: Vec<u32> = d.tokens.iter().filter_map(|t| index.get(t.as_str()).copied()).collect();
            (d.id.clone(), infer_topics(model, &ids, iterations, mix_seed(seed, i as u64)).theta)
        })
        .collect()
}

pub fn save_model(path: &Path, model: &TopicModel) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    formats::write_topic_model(&mut out, model)?;
    out.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<TopicModel> {
    let mut input = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    formats::read_topic_model(&mut input).with_context(|| format!("reading model {}", path.display()))
}

pub fn save_network(path: &Path, net: &CommentNetwork) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    formats::write_network(&mut out, net)?;
    out.flush()?;
    Ok(())
}

pub fn load_network(path: &Path) -> Result<CommentNetwork> {
    let mut input = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    formats::read_network(&mut input).with_context(|| format!("reading network {}", path.display()))
}

/// One network per community, keyed by community name.
pub fn networks_by_community(trees: &[CascadeTree]) -> BTreeMap<String, CommentNetwork> {
    let mut by: BTreeMap<&str, Vec<&CascadeTree>> = BTreeMap::new();
    for t in trees {
        by.entry(t.community.as_str()).or_default().push(t);
    }
    by.into_iter().map(|(c, ts)| (c.to_string(), build_comment_network(ts))).collect()
}

pub const NET_STATS_HEADER: [&str; 6] = ["community", "nodes", "edges", "total_weight", "mean_degree", "max_degree"];

pub fn net_stats_record(community: &str, net: &CommentNetwork) -> Vec<String> {
    vec![
        community.to_string(),
        net.node_count().to_string(),
        net.edge_count().to_string(),
        net.total_weight().to_string(),
        tables::num(net.mean_degree()),
        net.degrees().into_iter().max().unwrap_or(0).to_string(),
    ]
}

pub fn write_net_stats(path: &Path, nets: &BTreeMap<String, CommentNetwork>) -> Result<()> {
    let mut w = tables::csv_writer(path)?;
    w.write_record(NET_STATS_HEADER)?;
    for (c, net) in nets {
        w.write_record(net_stats_record(c, net))?;
    }
    w.flush()?;
    Ok(())
}

/// Degree CCDF rows `community,degree,ccdf`; empty networks are skipped.
pub fn write_degrees(path: &Path, nets: &BTreeMap<String, CommentNetwork>) -> Result<()> {
    let mut w = tables::csv_writer(path)?;
    w.write_record(["community", "degree", "ccdf"])?;
    for (c, net) in nets {
        if net.node_count() == 0 {
            continue;
        }
        for (d, p) in degree_distribution(net)?.points {
            w.write_record([c.clone(), tables::num(d), tables::num(p)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Percolation rows `community,q,g`; empty networks are skipped.
pub fn write_percolation(
    path: &Path,
    nets: &BTreeMap<String, CommentNetwork>,
    grid: &[f64],
    adaptive: bool,
) -> Result<()> {
    let mut w = tables::csv_writer(path)?;
    w.write_record(["community", "q", "g"])?;
    for (c, net) in nets {
        if net.node_count() == 0 {
            continue;
        }
        for (q, g) in percolate(net, grid, adaptive)?.points {
            w.write_record([c.clone(), tables::num(q), tables::num(g)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Joins metrics, post emotion vectors and post theta rows by post id.
/// Posts in `positive` are labelled positive, all others negative.
pub fn build_features(
    events: &Path,
    metrics: &[CascadeMetrics],
    affect: &BTreeMap<String, [f64; 10]>,
    theta: &BTreeMap<String, Vec<f64>>,
    topic_dim: usize,
    positive: &str,
) -> Result<FeatureTable> {
    let by_root: BTreeMap<&str, &CascadeMetrics> = metrics.iter().map(|m| (m.root_id.as_str(), m)).collect();
    let mut posts: Vec<(String, bool)> = Vec::new();
    for_each_event(events, |e| {
        if e.is_post() {
            posts.push((e.id, e.community == positive));
        }
    })?;
    let mut table = FeatureTable::new(topic_dim);
    let mut seen = std::collections::BTreeSet::new();
    for (id, label) in posts {
        if !seen.insert(id.clone()) {
            continue;
        }
        table.push(FeatureRow {
            dynamic: by_root.get(id.as_str()).map(|m| dynamic_features(m)),
            emotion: affect.get(&id).copied(),
            topic: theta.get(&id).cloned(),
            label,
            id,
        })?;
    }
    Ok(table)
}

/// Event posts, for source classification.
pub fn posts(events: &Path) -> Result<Vec<ThreadEvent>> {
    let mut out = Vec::new();
    for_each_event(events, |mut e| {
        if e.is_post() {
            e.text.clear();
            out.push(e);
        }
    })?;
    Ok(out)
}
