//! Feature assembly, random-forest classification and AUC evaluation over
//! repeated random splits.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::cascade::CascadeMetrics;
use crate::rng::{mix_seed, Rng};
use crate::stats::mean_std;
use crate::text::AffectScores;
use crate::{Error, Result};

pub const DYNAMIC_DIM: usize = 5;
pub const EMOTION_DIM: usize = 10;
pub const DEFAULT_TOPIC_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureBlock {
    Dynamic,
    Emotion,
    Topic,
}

impl FeatureBlock {
    pub const ALL: [FeatureBlock; 3] = [FeatureBlock::Dynamic, FeatureBlock::Emotion, FeatureBlock::Topic];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureBlock::Dynamic => "dynamic",
            FeatureBlock::Emotion => "emotion",
            FeatureBlock::Topic => "topic",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// A nonempty subset of the three feature blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Combination(u8);

impl Combination {
    pub fn from_blocks(blocks: &[FeatureBlock]) -> Result<Self> {
        let bits = blocks.iter().fold(0u8, |acc, b| acc | b.bit());
        if bits == 0 {
            return Err(Error::EmptyCombination);
        }
        Ok(Combination(bits))
    }

    /// All seven nonempty subsets, singletons first.
    pub fn all() -> [Combination; 7] {
        [1, 2, 4, 3, 5, 6, 7].map(Combination)
    }

    pub fn contains(self, block: FeatureBlock) -> bool {
        self.0 & block.bit() != 0
    }

    pub fn blocks(self) -> impl Iterator<Item = FeatureBlock> {
        FeatureBlock::ALL.into_iter().filter(move |b| self.contains(*b))
    }

    pub fn dim(self, topic_dim: usize) -> usize {
        self.blocks()
            .map(|b| match b {
                FeatureBlock::Dynamic => DYNAMIC_DIM,
                FeatureBlock::Emotion => EMOTION_DIM,
                FeatureBlock::Topic => topic_dim,
            })
            .sum()
    }
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for b in self.blocks() {
            if !first {
                f.write_str("+")?;
            }
            f.write_str(b.as_str())?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Combination {
    type Err = Error;

    /// `dynamic+topic`, `emotion`, `all`, ...
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "all" {
            return Ok(Combination(7));
        }
        let mut blocks = Vec::new();
        for part in s.split(['+', ',']).map(str::trim).filter(|p| !p.is_empty()) {
            let b = FeatureBlock::ALL
                .into_iter()
                .find(|b| b.as_str() == part)
                .ok_or_else(|| Error::InvalidParameter(alloc::format!("unknown feature block `{part}`")))?;
            blocks.push(b);
        }
        Combination::from_blocks(&blocks)
    }
}

/// The five dynamic features in fixed order: size, depth, virality,
/// lifetime, unique users.
pub fn dynamic_features(m: &CascadeMetrics) -> [f64; DYNAMIC_DIM] {
    [m.size as f64, m.depth as f64, m.virality, m.lifetime_minutes, m.unique_users as f64]
}

pub fn emotion_features(a: &AffectScores) -> [f64; EMOTION_DIM] {
    a.scores
}

/// All feature blocks available for one post.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    /// `true` for the positive class.
    pub label: bool,
    pub dynamic: Option<[f64; DYNAMIC_DIM]>,
    pub emotion: Option<[f64; EMOTION_DIM]>,
    pub topic: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub topic_dim: usize,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn new(topic_dim: usize) -> Self {
        FeatureTable { topic_dim, rows: Vec::new() }
    }

    pub fn push(&mut self, row: FeatureRow) -> Result<()> {
        if let Some(t) = &row.topic {
            if t.len() != self.topic_dim {
                return Err(Error::Dimension { expected: self.topic_dim, got: t.len() });
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Projects the chosen rows onto a block combination. Rows missing a
    /// selected block are skipped; the second value counts them.
    pub fn project(&self, combination: Combination, rows: &[usize]) -> (Dataset, usize) {
        let dim = combination.dim(self.topic_dim);
        let mut data = Dataset::new(dim);
        let mut dropped = 0;
        let mut buf = Vec::with_capacity(dim);
        for &r in rows {
            let row = &self.rows[r];
            buf.clear();
            let mut complete = true;
            for block in combination.blocks() {
                match block {
                    FeatureBlock::Dynamic => match &row.dynamic {
                        Some(d) => buf.extend_from_slice(d),
                        None => complete = false,
                    },
                    FeatureBlock::Emotion => match &row.emotion {
                        Some(e) => buf.extend_from_slice(e),
                        None => complete = false,
                    },
                    FeatureBlock::Topic => match &row.topic {
                        Some(t) => buf.extend_from_slice(t),
                        None => complete = false,
                    },
                }
            }
            if complete {
                data.push(&buf, row.label);
            } else {
                dropped += 1;
            }
        }
        (data, dropped)
    }
}

/// Concatenates the selected blocks (dynamic, emotion, topic order) for
/// every row; returns the dataset and the number of incomplete rows.
pub fn assemble_features(table: &FeatureTable, combination: &[FeatureBlock]) -> Result<(Dataset, usize)> {
    let combination = Combination::from_blocks(combination)?;
    let all: Vec<usize> = (0..table.len()).collect();
    Ok(table.project(combination, &all))
}

/// Dense row-major feature matrix with binary labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub dim: usize,
    pub x: Vec<f64>,
    pub y: Vec<bool>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Dataset { dim, x: Vec::new(), y: Vec::new() }
    }

    pub fn push(&mut self, features: &[f64], label: bool) {
        debug_assert_eq!(features.len(), self.dim);
        self.x.extend_from_slice(features);
        self.y.push(label);
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn positives(&self) -> usize {
        self.y.iter().filter(|&&y| y).count()
    }

    fn require_both_classes(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyDataset);
        }
        match self.positives() {
            0 => Err(Error::SingleClass("negative")),
            p if p == self.len() => Err(Error::SingleClass("positive")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub trees: usize,
    /// Candidate features per split; `None` means `⌊√F⌋` (at least 1).
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { trees: 200, max_features: None, min_samples_split: 2, seed: 0 }
    }
}

impl ForestConfig {
    pub fn features_per_split(&self, dim: usize) -> usize {
        self.max_features.unwrap_or_else(|| libm::floor(libm::sqrt(dim as f64)) as usize).clamp(1, dim.max(1))
    }

    /// Seed of the `index`-th tree; independent of training order.
    pub fn tree_seed(&self, index: usize) -> u64 {
        mix_seed(self.seed, index as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TreeNode {
    Leaf { positive: f64 },
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
}

impl DecisionTree {
    /// Positive-class fraction of the leaf reached by `row`.
    pub fn leaf_fraction(&self, row: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { positive } => return positive,
                TreeNode::Split { feature, threshold, left, right } => {
                    i = if row[feature as usize] <= threshold { left as usize } else { right as usize };
                }
            }
        }
    }

    pub fn votes_positive(&self, row: &[f64]) -> bool {
        self.leaf_fraction(row) > 0.5
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_fractions(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Leaf { positive } => Some(*positive),
            TreeNode::Split { .. } => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub seed: u64,
    pub features_per_split: usize,
    pub dim: usize,
}

impl ForestModel {
    /// Fraction of trees voting for the positive class.
    pub fn score(&self, row: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.votes_positive(row)).count();
        votes as f64 / self.trees.len() as f64
    }

    pub fn scores(&self, data: &Dataset) -> Vec<f64> {
        (0..data.len()).map(|i| self.score(data.row(i))).collect()
    }
}

/// Grows one tree on a bootstrap resample of `data`.
///
/// Splits minimize weighted Gini impurity over a random subset of features;
/// if none of the sampled features admits a split, further features are
/// tried before the node becomes a leaf. Nodes are split until pure or
/// smaller than `min_samples_split`.
pub fn train_tree(data: &Dataset, config: &ForestConfig, seed: u64) -> DecisionTree {
    let n = data.len();
    let dim = data.dim;
    let mtry = config.features_per_split(dim);
    let mut rng = Rng::new(seed);
    let mut sample: Vec<u32> = (0..n).map(|_| rng.below(n) as u32).collect();

    let mut nodes = vec![TreeNode::Leaf { positive: 0.0 }];
    let mut stack = vec![(0usize, 0usize, n)];
    let mut features: Vec<usize> = (0..dim).collect();
    let mut pairs: Vec<(f64, bool)> = Vec::with_capacity(n);

    while let Some((node, start, end)) = stack.pop() {
        let idx = &mut sample[start..end];
        let count = idx.len();
        let pos = idx.iter().filter(|&&i| data.y[i as usize]).count();
        let fraction = pos as f64 / count as f64;
        if pos == 0 || pos == count || count < config.min_samples_split.max(2) {
            nodes[node] = TreeNode::Leaf { positive: fraction };
            continue;
        }

        let mut best: Option<(f64, usize, f64)> = None;
        for k in 0..dim {
            if k >= mtry && best.is_some() {
                break;
            }
            let j = k + rng.below(dim - k);
            features.swap(k, j);
            let f = features[k];

            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (data.x[i as usize * dim + f], data.y[i as usize])));
            pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0usize;
            for s in 0..count - 1 {
                left_pos += usize::from(pairs[s].1);
                if pairs[s].0 == pairs[s + 1].0 {
                    continue;
                }
                let nl = (s + 1) as f64;
                let nr = (count - s - 1) as f64;
                let pl = left_pos as f64 / nl;
                let pr = (pos - left_pos) as f64 / nr;
                let impurity = nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr);
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    let (lo, hi) = (pairs[s].0, pairs[s + 1].0);
                    let mut thr = lo + (hi - lo) / 2.0;
                    if thr >= hi {
                        thr = lo;
                    }
                    best = Some((impurity, f, thr));
                }
            }
        }

        let Some((_, feature, threshold)) = best else {
            nodes[node] = TreeNode::Leaf { positive: fraction };
            continue;
        };
        // partition: left side holds x <= threshold
        let mut split = 0;
        for i in 0..count {
            if data.x[idx[i] as usize * dim + feature] <= threshold {
                idx.swap(i, split);
                split += 1;
            }
        }
        let left = nodes.len();
        nodes.push(TreeNode::Leaf { positive: 0.0 });
        nodes.push(TreeNode::Leaf { positive: 0.0 });
        nodes[node] = TreeNode::Split { feature: feature as u32, threshold, left: left as u32, right: left as u32 + 1 };
        stack.push((left + 1, start + split, end));
        stack.push((left, start, start + split));
    }
    DecisionTree { nodes }
}

/// Something that trains a forest; lets callers parallelize tree growth
/// while keeping per-tree seeds fixed.
pub trait ForestTrainer {
    fn train(&self, data: &Dataset, config: &ForestConfig) -> Result<ForestModel>;
}

/// Trains trees one after another.
#[derive(Debug, Clone, Copy, Default)]
pub struct SequentialTrainer;

impl ForestTrainer for SequentialTrainer {
    fn train(&self, data: &Dataset, config: &ForestConfig) -> Result<ForestModel> {
        check_training_set(data, config)?;
        let trees = (0..config.trees).map(|i| train_tree(data, config, config.tree_seed(i))).collect();
        Ok(assemble_forest(trees, data, config))
    }
}

pub fn check_training_set(data: &Dataset, config: &ForestConfig) -> Result<()> {
    if config.trees == 0 {
        return Err(Error::InvalidParameter("forest needs at least one tree".into()));
    }
    data.require_both_classes()
}

pub fn assemble_forest(trees: Vec<DecisionTree>, data: &Dataset, config: &ForestConfig) -> ForestModel {
    ForestModel { trees, seed: config.seed, features_per_split: config.features_per_split(data.dim), dim: data.dim }
}

pub fn train_forest(data: &Dataset, config: &ForestConfig) -> Result<ForestModel> {
    SequentialTrainer.train(data, config)
}

/// Area under the ROC curve by rank summation, ties receiving mid-ranks.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension { expected: labels.len(), got: scores.len() });
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if pos == 0 {
        return Err(Error::SingleClass("negative"));
    }
    if neg == 0 {
        return Err(Error::SingleClass("positive"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // rank sums are kept doubled so mid-ranks stay integral
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let twice_mid = (i + 1 + j + 1) as u128;
        let tied_pos = order[i..=j].iter().filter(|&&k| labels[k]).count() as u128;
        twice_rank_sum += twice_mid * tied_pos;
        i = j + 1;
    }
    let (p, n) = (pos as u128, neg as u128);
    let twice_u = twice_rank_sum - p * (p + 1);
    Ok(twice_u as f64 / (2 * p * n) as f64)
}

pub fn evaluate_auc(model: &ForestModel, test: &Dataset) -> Result<f64> {
    test.require_both_classes()?;
    roc_auc(&model.scores(test), &test.y)
}

/// AUCs of one feature combination across trials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub combination: Combination,
    pub aucs: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over √trials.
    pub std_error: f64,
}

impl TrialReport {
    fn from_aucs(combination: Combination, aucs: Vec<f64>) -> Self {
        let (mean, sd) = mean_std(&aucs);
        let std_error = sd / libm::sqrt(aucs.len() as f64);
        TrialReport { combination, aucs, mean, std_error }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub trials: usize,
    /// Training fraction.
    pub split: f64,
    pub seed: u64,
    pub forest: ForestConfig,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig { trials: 10, split: 0.8, seed: 0, forest: ForestConfig::default() }
    }
}

/// Repeated random train/test evaluation. Each trial draws one shuffle that
/// every combination shares, so per-trial AUCs are paired across
/// combinations.
pub fn run_trials(
    table: &FeatureTable,
    combinations: &[Combination],
    config: &TrialConfig,
    trainer: &dyn ForestTrainer,
) -> Result<Vec<TrialReport>> {
    if !(config.split > 0.0 && config.split < 1.0) {
        return Err(Error::InvalidParameter("split must be inside (0, 1)".into()));
    }
    if config.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let n = table.len();
    let n_train = libm::round(config.split * n as f64) as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::EmptyDataset);
    }
    let mut aucs: Vec<Vec<f64>> = vec![Vec::with_capacity(config.trials); combinations.len()];
    for trial in 0..config.trials {
        let mut order: Vec<usize> = (0..n).collect();
        Rng::derived(config.seed, trial as u64).shuffle(&mut order);
        let (train_rows, test_rows) = order.split_at(n_train);
        let forest_cfg = ForestConfig { seed: mix_seed(config.seed, trial as u64), ..config.forest.clone() };
        for (c, &combination) in combinations.iter().enumerate() {
            let (train, _) = table.project(combination, train_rows);
            let (test, _) = table.project(combination, test_rows);
            let model = trainer.train(&train, &forest_cfg)?;
            aucs[c].push(evaluate_auc(&model, &test)?);
        }
    }
    Ok(combinations.iter().zip(aucs).map(|(&c, a)| TrialReport::from_aucs(c, a)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;
    use crate::rng::Rng;

    fn brute_auc(scores: &[f64], labels: &[bool]) -> f64 {
        let mut num = 0.0;
        let (mut p, mut n) = (0, 0);
        for (i, &li) in labels.iter().enumerate() {
            if !li {
                n += 1;
                continue;
            }
            p += 1;
            for (j, &lj) in labels.iter().enumerate() {
                if !lj {
                    if scores[i] > scores[j] {
                        num += 1.0;
                    } else if scores[i] == scores[j] {
                        num += 0.5;
                    }
                }
            }
        }
        num / (p * n) as f64
    }

    fn row(id: usize, label: bool, dynamic: [f64; 5], topic: Option<Vec<f64>>) -> FeatureRow {
        FeatureRow { id: id.to_string(), label, dynamic: Some(dynamic), emotion: Some([0.0; 10]), topic }
    }

    #[test]
    fn seven_combinations() {
        let all = Combination::all();
        assert_eq!(all.len(), 7);
        let mut sorted = all.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 7);
        assert_eq!(Combination(7).dim(20), 35);
        assert_eq!("topic".parse::<Combination>().unwrap().dim(20), 20);
        assert_eq!("all".parse::<Combination>().unwrap().to_string(), "dynamic+emotion+topic");
        assert_eq!(Combination::from_blocks(&[]), Err(Error::EmptyCombination));
        assert!("mood".parse::<Combination>().is_err());
    }

    #[test]
    fn assemble_drops_incomplete_rows() {
        let mut t = FeatureTable::new(2);
        t.push(row(0, true, [1.0; 5], Some(vec![0.5, 0.5]))).unwrap();
        t.push(row(1, false, [2.0; 5], None)).unwrap();
        assert!(t.push(row(2, false, [2.0; 5], Some(vec![1.0]))).is_err());
        let (d, dropped) = assemble_features(&t, &FeatureBlock::ALL).unwrap();
        assert_eq!((d.len(), d.dim, dropped), (1, 17, 1));
        let (d, dropped) = assemble_features(&t, &[FeatureBlock::Dynamic]).unwrap();
        assert_eq!((d.len(), d.dim, dropped), (2, 5, 0));
        assert_eq!(d.row(1), [2.0; 5]);
        assert!(assemble_features(&t, &[]).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(roc_auc(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.9, 0.4, 0.5, 0.1], &[true, true, false, false]).unwrap(), 0.75);
        assert_eq!(roc_auc(&[0.5, 0.5], &[true, false]).unwrap(), 0.5);
        assert_eq!(roc_auc(&[0.5, 0.4], &[true, true]), Err(Error::SingleClass("positive")));
    }

    fn separable(n: usize, seed: u64) -> Dataset {
        let mut rng = Rng::new(seed);
        let mut d = Dataset::new(3);
        for i in 0..n {
            let label = i % 2 == 0;
            let x0 = if label { 1.0 + rng.uniform() } else { -1.0 - rng.uniform() };
            d.push(&[x0, rng.uniform(), rng.uniform()], label);
        }
        d
    }

    #[test]
    fn perfect_split_fits_training_data() {
        let d = separable(60, 1);
        let cfg = ForestConfig { trees: 25, seed: 4, ..ForestConfig::default() };
        let model = train_forest(&d, &cfg).unwrap();
        let correct = (0..d.len()).filter(|&i| (model.score(d.row(i)) > 0.5) == d.y[i]).count();
        assert_eq!(correct, d.len());
        assert_eq!(model.trees.len(), 25);
        assert!(model.trees.iter().flat_map(|t| t.leaf_fractions()).all(|f| (0.0..=1.0).contains(&f)));
        assert_eq!(model, train_forest(&d, &cfg).unwrap());
    }

    #[test]
    fn single_class_rejected() {
        let mut d = Dataset::new(1);
        d.push(&[1.0], true);
        d.push(&[2.0], true);
        assert_eq!(train_forest(&d, &ForestConfig::default()), Err(Error::SingleClass("positive")));
    }

    #[test]
    fn held_out_auc_on_separable_data() {
        let train = separable(200, 2);
        let test = separable(100, 3);
        let model = train_forest(&train, &ForestConfig { trees: 30, ..ForestConfig::default() }).unwrap();
        assert!(evaluate_auc(&model, &test).unwrap() >= 0.95);
    }

    #[test]
    fn constant_features_give_chance_auc() {
        let mut t = FeatureTable::new(2);
        for i in 0..80 {
            t.push(row(i, i % 2 == 0, [1.0; 5], Some(vec![0.5, 0.5]))).unwrap();
        }
        let cfg = TrialConfig { trials: 3, forest: ForestConfig { trees: 10, ..Default::default() }, ..Default::default() };
        let reports = run_trials(&t, &Combination::all(), &cfg, &SequentialTrainer).unwrap();
        assert_eq!(reports.len(), 7);
        for r in reports {
            assert_eq!(r.aucs.len(), 3);
            assert!((r.mean - 0.5).abs() <= 0.05, "{} {}", r.combination, r.mean);
        }
    }

    #[test]
    fn topic_signal_ranks_topic_combinations_first() {
        let mut rng = Rng::new(8);
        let mut t = FeatureTable::new(2);
        for i in 0..300 {
            let label = i % 2 == 0;
            let noise: [f64; 5] = core::array::from_fn(|_| rng.uniform());
            let p = if label { 0.7 } else { 0.3 } + 0.3 * (rng.uniform() - 0.5);
            t.push(row(i, label, noise, Some(vec![p, 1.0 - p]))).unwrap();
        }
        let cfg = TrialConfig { trials: 3, forest: ForestConfig { trees: 20, ..Default::default() }, ..Default::default() };
        let reports = run_trials(&t, &Combination::all(), &cfg, &SequentialTrainer).unwrap();
        let de = reports.iter().find(|r| r.combination.to_string() == "dynamic+emotion").unwrap().mean;
        for r in reports.iter().filter(|r| r.combination.contains(FeatureBlock::Topic)) {
            assert!(r.mean > de, "{} {} vs {}", r.combination, r.mean, de);
        }
    }

    proptest! {
        #[test]
        fn rank_sum_equals_pair_count(
            data in proptest::collection::vec((0u8..20, any::<bool>()), 2..200),
        ) {
            let scores: Vec<f64> = data.iter().map(|d| f64::from(d.0) / 4.0).collect();
            let labels: Vec<bool> = data.iter().map(|d| d.1).collect();
            prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
            prop_assert_eq!(roc_auc(&scores, &labels).unwrap(), brute_auc(&scores, &labels));
        }

        #[test]
        fn auc_invariant_under_monotone_transform(
            data in proptest::collection::vec((-50i32..50, any::<bool>()), 2..100),
        ) {
            let scores: Vec<f64> = data.iter().map(|d| f64::from(d.0)).collect();
            let labels: Vec<bool> = data.iter().map(|d| d.1).collect();
            prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
            let moved: Vec<f64> = scores.iter().map(|s| libm::exp(s / 10.0) * 3.0 + 1.0).collect();
            prop_assert_eq!(roc_auc(&scores, &labels).unwrap(), roc_auc(&moved, &labels).unwrap());
        }

        #[test]
        fn forest_score_independent_of_tree_order(seed in any::<u64>()) {
            let d = separable(40, seed);
            let mut model = train_forest(&d, &ForestConfig { trees: 8, seed, ..Default::default() }).unwrap();
            let before = model.scores(&d);
            model.trees.reverse();
            prop_assert_eq!(before, model.scores(&d));
        }
    }
}
