//! CSV and JSONL tables read and written by the subcommands.
//!
//! Floats are written with Rust's shortest round-trip formatting, which is
//! platform independent, so identical inputs give byte-identical files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use cascadekit_core::cascade::{CascadeMetrics, GrowthCurves};
use cascadekit_core::classify::{FeatureRow, FeatureTable, TrialReport, DYNAMIC_DIM, EMOTION_DIM};
use cascadekit_core::sources::SubgroupRow;
use cascadekit_core::stats::{ks_two_sample, mean_std, summary_stats, Ccdf, SummaryStats};
use cascadekit_core::text::{Affect, AffectScores};
use cascadekit_core::time::Month;
use serde::{Deserialize, Serialize};

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(file)))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))
}

fn column_index(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| anyhow!("{}: no column `{name}`", path.display()))
}

fn parse_f64(cell: &str, what: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| anyhow!("{what}: `{cell}` is not a number"))
}

// ---------------------------------------------------------------- metrics

pub const METRICS_HEADER: [&str; 8] =
    ["root_id", "size", "unique_users", "depth", "virality", "lifetime_minutes", "burstiness", "created_month"];

pub fn write_metrics_csv(path: &Path, metrics: &[CascadeMetrics]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(METRICS_HEADER)?;
    for m in metrics {
        w.write_record([
            m.root_id.clone(),
            m.size.to_string(),
            m.unique_users.to_string(),
            m.depth.to_string(),
            num(m.virality),
            num(m.lifetime_minutes),
            m.burstiness.map(num).unwrap_or_default(),
            m.created_month.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct MetricsRecord<'a> {
    root_id: &'a str,
    community: &'a str,
    size: usize,
    unique_users: usize,
    depth: usize,
    virality: f64,
    lifetime_minutes: f64,
    burstiness: Option<f64>,
    created_month: String,
}

pub fn write_metrics_jsonl(path: &Path, metrics: &[CascadeMetrics]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for m in metrics {
        let rec = MetricsRecord {
            root_id: &m.root_id,
            community: &m.community,
            size: m.size,
            unique_users: m.unique_users,
            depth: m.depth,
            virality: m.virality,
            lifetime_minutes: m.lifetime_minutes,
            burstiness: m.burstiness,
            created_month: m.created_month.to_string(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a metrics CSV back. The file carries no community column, so
/// `community` is left empty.
pub fn read_metrics_csv(path: &Path) -> Result<Vec<CascadeMetrics>> {
    let mut r = csv_reader(path)?;
    let headers = r.headers()?.clone();
    let idx: Vec<usize> =
        METRICS_HEADER.iter().map(|c| column_index(&headers, c, path)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let at = |k: usize| rec.get(idx[k]).unwrap_or("");
        let ctx = || format!("{} row {}", path.display(), i + 2);
        let int = |k: usize| at(k).trim().parse::<usize>().with_context(ctx);
        let burst = at(6).trim();
        out.push(CascadeMetrics {
            root_id: at(0).to_string(),
            community: String::new(),
            size: int(1)?,
            unique_users: int(2)?,
            depth: int(3)?,
            virality: parse_f64(at(4), &ctx())?,
            lifetime_minutes: parse_f64(at(5), &ctx())?,
            burstiness: if burst.is_empty() { None } else { Some(parse_f64(burst, &ctx())?) },
            created_month: Month::parse(at(7)).ok_or_else(|| anyhow!("{}: bad month `{}`", ctx(), at(7)))?,
            lifetime_clamped: false,
        });
    }
    Ok(out)
}

/// Numeric values of one CSV column; empty cells are skipped.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut r = csv_reader(path)?;
    let c = column_index(&r.headers()?.clone(), column, path)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let cell = rec.get(c).unwrap_or("").trim();
        if !cell.is_empty() {
            out.push(parse_f64(cell, &format!("{} row {}", path.display(), i + 2))?);
        }
    }
    Ok(out)
}

pub fn write_ccdf(path: &Path, ccdf: &Ccdf) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["value", "ccdf"])?;
    for &(v, p) in &ccdf.points {
        w.write_record([num(v), num(p)])?;
    }
    w.flush()?;
    Ok(())
}

// ----------------------------------------------------------------- growth

pub const GROWTH_CURVES: [&str; 4] = ["users_at_depth", "time_to_depth", "time_to_size", "virality_at_size"];

/// Per-community mean growth curves with 95% normal-approximation bands.
#[derive(Debug, Default)]
pub struct GrowthAggregate {
    cells: BTreeMap<(String, usize, usize), Vec<f64>>,
}

impl GrowthAggregate {
    pub fn add(&mut self, community: &str, curves: &GrowthCurves) {
        let mut put = |curve: usize, index: usize, v: f64| {
            self.cells.entry((community.to_string(), curve, index)).or_default().push(v);
        };
        for (i, v) in curves.users_at_depth.iter() {
            put(0, i, v as f64);
        }
        for (i, v) in curves.time_to_depth.iter() {
            put(1, i, v);
        }
        for (i, v) in curves.time_to_size.iter() {
            put(2, i, v);
        }
        for (i, v) in curves.virality_at_size.iter() {
            put(3, i, v);
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        w.write_record(["community", "curve", "index", "cascades", "mean", "ci95"])?;
        for ((community, curve, index), values) in &self.cells {
            let (mean, sd) = mean_std(values);
            let ci = 1.96 * sd / (values.len() as f64).sqrt();
            w.write_record([
                community.clone(),
                GROWTH_CURVES[*curve].to_string(),
                index.to_string(),
                values.len().to_string(),
                num(mean),
                num(ci),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

// ----------------------------------------------------------------- affect

#[derive(Debug, Clone, PartialEq)]
pub struct AffectRow {
    pub id: String,
    pub kind: String,
    pub root_id: String,
    pub community: String,
    pub scores: AffectScores,
}

pub fn affect_header() -> Vec<String> {
    let mut h: Vec<String> = ["id", "kind", "root_id", "community", "tokens"].map(String::from).to_vec();
    h.extend(Affect::ALL.iter().map(|a| a.as_str().to_string()));
    h
}

pub fn write_affect_row<W: Write>(w: &mut csv::Writer<W>, row: &AffectRow) -> Result<()> {
    let mut rec = vec![
        row.id.clone(),
        row.kind.clone(),
        row.root_id.clone(),
        row.community.clone(),
        row.scores.token_count.to_string(),
    ];
    rec.extend(row.scores.scores.iter().map(|&s| num(s)));
    w.write_record(&rec)?;
    Ok(())
}

/// Emotion vectors of the post rows, keyed by post id.
pub fn read_post_affect(path: &Path) -> Result<BTreeMap<String, [f64; EMOTION_DIM]>> {
    let mut r = csv_reader(path)?;
    let headers = r.headers()?.clone();
    let id = column_index(&headers, "id", path)?;
    let kind = column_index(&headers, "kind", path)?;
    let cols: Vec<usize> =
        Affect::ALL.iter().map(|a| column_index(&headers, a.as_str(), path)).collect::<Result<_>>()?;
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.get(kind) != Some("post") {
            continue;
        }
        let mut v = [0.0; EMOTION_DIM];
        for (slot, &c) in v.iter_mut().zip(&cols) {
            *slot = parse_f64(rec.get(c).unwrap_or(""), "affect score")?;
        }
        out.insert(rec.get(id).unwrap_or("").to_string(), v);
    }
    Ok(out)
}

// ------------------------------------------------------------------ theta

pub fn write_theta(path: &Path, k: usize, rows: &[(String, Vec<f64>)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["doc_id".to_string()];
    header.extend((0..k).map(|t| format!("topic_{t}")));
    w.write_record(&header)?;
    for (id, theta) in rows {
        let mut rec = vec![id.clone()];
        rec.extend(theta.iter().map(|&p| num(p)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// A document id with its topic proportions.
pub type DocTheta = (String, Vec<f64>);

pub fn read_theta(path: &Path) -> Result<(usize, Vec<DocTheta>)> {
    let mut r = csv_reader(path)?;
    let headers = r.headers()?.clone();
    if headers.get(0) != Some("doc_id") {
        bail!("{}: first column must be doc_id", path.display());
    }
    let k = headers.len() - 1;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let theta = rec.iter().skip(1).map(|c| parse_f64(c, "theta")).collect::<Result<Vec<_>>>()?;
        if theta.len() != k {
            bail!("{}: row with {} topic values, expected {k}", path.display(), theta.len());
        }
        rows.push((rec.get(0).unwrap_or("").to_string(), theta));
    }
    Ok((k, rows))
}

// --------------------------------------------------------------- features

pub const DYNAMIC_COLUMNS: [&str; DYNAMIC_DIM] = ["size", "depth", "virality", "lifetime", "unique_users"];

pub fn write_features(path: &Path, table: &FeatureTable) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header: Vec<String> = vec!["id".into(), "label".into()];
    header.extend(DYNAMIC_COLUMNS.iter().map(|c| c.to_string()));
    header.extend(Affect::ALL.iter().map(|a| a.as_str().to_string()));
    header.extend((0..table.topic_dim).map(|t| format!("topic_{t}")));
    w.write_record(&header)?;
    for row in &table.rows {
        let mut rec = vec![row.id.clone(), if row.label { "1" } else { "0" }.to_string()];
        let block = |rec: &mut Vec<String>, vals: Option<&[f64]>, n: usize| match vals {
            Some(v) => rec.extend(v.iter().map(|&x| num(x))),
            None => rec.extend(std::iter::repeat_n(String::new(), n)),
        };
        block(&mut rec, row.dynamic.as_ref().map(|d| &d[..]), DYNAMIC_DIM);
        block(&mut rec, row.emotion.as_ref().map(|e| &e[..]), EMOTION_DIM);
        block(&mut rec, row.topic.as_deref(), table.topic_dim);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features(path: &Path) -> Result<FeatureTable> {
    let mut r = csv_reader(path)?;
    let headers = r.headers()?.clone();
    let fixed = 2 + DYNAMIC_DIM + EMOTION_DIM;
    if headers.len() < fixed || headers.get(0) != Some("id") || headers.get(1) != Some("label") {
        bail!("{}: not a features table", path.display());
    }
    let topic_dim = headers.len() - fixed;
    let mut table = FeatureTable::new(topic_dim);
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let ctx = format!("{} row {}", path.display(), i + 2);
        let cells: Vec<&str> = rec.iter().map(str::trim).collect();
        let block = |range: std::ops::Range<usize>| -> Result<Option<Vec<f64>>> {
            let cells = &cells[range];
            if cells.iter().all(|c| c.is_empty()) {
                return Ok(None);
            }
            cells.iter().map(|c| parse_f64(c, &ctx)).collect::<Result<Vec<_>>>().map(Some)
        };
        let label = match cells[1] {
            "1" | "true" => true,
            "0" | "false" => false,
            other => bail!("{ctx}: label `{other}` is not 0/1"),
        };
        let dynamic = block(2..2 + DYNAMIC_DIM)?.map(|v| v.try_into().expect("block width"));
        let emotion = block(2 + DYNAMIC_DIM..fixed)?.map(|v| v.try_into().expect("block width"));
        let topic = if topic_dim == 0 { None } else { block(fixed..fixed + topic_dim)? };
        table.push(FeatureRow { id: cells[0].to_string(), label, dynamic, emotion, topic })?;
    }
    Ok(table)
}

pub fn write_auc_report(path: &Path, reports: &[TrialReport]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["combination", "trial", "auc"])?;
    for r in reports {
        for (t, &auc) in r.aucs.iter().enumerate() {
            w.write_record([r.combination.to_string(), t.to_string(), num(auc)])?;
        }
    }
    for r in reports {
        w.write_record([r.combination.to_string(), "mean".into(), num(r.mean)])?;
        w.write_record([r.combination.to_string(), "stderr".into(), num(r.std_error)])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- sources

pub fn write_subgroups(path: &Path, rows: &[SubgroupRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["subgroup", "cascades", "metric", "n", "min", "q1", "median", "q3", "max", "mean", "tukey_outliers"])?;
    for row in rows {
        for (metric, stats) in [("size", &row.size), ("depth", &row.depth), ("virality", &row.virality)] {
            let mut rec = vec![row.label.clone(), row.count.to_string(), metric.to_string()];
            match stats {
                Some(s) => rec.extend([
                    s.count.to_string(),
                    num(s.min),
                    num(s.q1),
                    num(s.median),
                    num(s.q3),
                    num(s.max),
                    num(s.mean),
                    s.tukey_outliers.to_string(),
                ]),
                None => {
                    rec.push("0".into());
                    rec.extend(std::iter::repeat_n(String::new(), 7));
                }
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

// ----------------------------------------------------------------- report

/// The six indicators, with whether their means are taken in log space.
pub const INDICATORS: [(&str, bool); 6] = [
    ("size", true),
    ("unique_users", true),
    ("depth", true),
    ("virality", true),
    ("lifetime_minutes", true),
    ("burstiness", false),
];

fn indicator(m: &CascadeMetrics, name: &str) -> Option<f64> {
    Some(match name {
        "size" => m.size as f64,
        "unique_users" => m.unique_users as f64,
        "depth" => m.depth as f64,
        "virality" => m.virality,
        "lifetime_minutes" => m.lifetime_minutes,
        "burstiness" => return m.burstiness,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub indicator: &'static str,
    pub group: String,
    pub stats: SummaryStats,
    /// K-S statistic and p-value against the other groups pooled.
    pub ks: Option<(f64, f64)>,
}

/// Per-community summaries of every indicator. With two communities the
/// K-S columns hold the pairwise test; with more, each group is tested
/// against the rest pooled.
pub fn indicator_report(metrics: &[CascadeMetrics]) -> Result<Vec<ReportRow>> {
    let mut groups: BTreeMap<&str, Vec<&CascadeMetrics>> = BTreeMap::new();
    for m in metrics {
        groups.entry(m.community.as_str()).or_default().push(m);
    }
    let mut rows = Vec::new();
    for (name, log) in INDICATORS {
        let values: Vec<(&str, Vec<f64>)> = groups
            .iter()
            .map(|(g, ms)| (*g, ms.iter().filter_map(|m| indicator(m, name)).collect()))
            .collect();
        for (i, (group, sample)) in values.iter().enumerate() {
            let Ok(stats) = summary_stats(sample, log) else { continue };
            let rest: Vec<f64> =
                values.iter().enumerate().filter(|(j, _)| *j != i).flat_map(|(_, (_, v))| v.iter().copied()).collect();
            let ks = ks_two_sample(sample, &rest).ok().map(|k| (k.d_statistic, k.p_value));
            rows.push(ReportRow { indicator: name, group: group.to_string(), stats, ks });
        }
    }
    Ok(rows)
}

pub fn write_report(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["indicator", "group", "count", "mean", "std", "log_transformed", "min", "median", "max", "ks_d", "ks_p"])?;
    for r in rows {
        let (d, p) = r.ks.map_or((String::new(), String::new()), |(d, p)| (num(d), num(p)));
        w.write_record([
            r.indicator.to_string(),
            r.group.clone(),
            r.stats.count.to_string(),
            num(r.stats.mean),
            num(r.stats.std),
            r.stats.log_transformed.to_string(),
            num(r.stats.min),
            num(r.stats.median),
            num(r.stats.max),
            d,
            p,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Two-column `key,value` table.
pub fn write_key_values(path: &Path, rows: &[(&str, String)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["key", "value"])?;
    for (k, v) in rows {
        w.write_record([*k, v.as_str()])?;
    }
    w.flush()?;
    Ok(())
}
