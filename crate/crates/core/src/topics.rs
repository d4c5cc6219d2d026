//! Latent Dirichlet Allocation fitted by collapsed Gibbs sampling.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::rng::Rng;
use crate::text::Vocabulary;
use crate::{Error, Result};

/// Sampler settings. `alpha` defaults to `50 / k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaConfig {
    pub k: usize,
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Record the corpus log-likelihood after every sweep.
    pub track_likelihood: bool,
}

impl LdaConfig {
    pub fn new(k: usize) -> Self {
        LdaConfig { k, alpha: None, beta: 0.01, iterations: 1000, seed: 0, track_likelihood: false }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k.max(1) as f64)
    }
}

/// Fitted topic-word distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Vocabulary words, indexed by word id.
    pub words: Vec<String>,
    /// Row-major `k × V`.
    pub phi: Vec<f64>,
}

impl TopicModel {
    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    pub fn phi_row(&self, topic: usize) -> &[f64] {
        let v = self.vocab_size();
        &self.phi[topic * v..(topic + 1) * v]
    }

    /// Highest-probability words of a topic.
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<(&str, f64)> {
        let mut ids: Vec<usize> = (0..self.vocab_size()).collect();
        let row = self.phi_row(topic);
        ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        ids.into_iter().take(n).map(|i| (self.words[i].as_str(), row[i])).collect()
    }
}

/// Topic proportions of one document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTopics {
    pub theta: Vec<f64>,
}

impl DocTopics {
    fn uniform(k: usize) -> Self {
        DocTopics { theta: vec![1.0 / k as f64; k] }
    }
}

#[derive(Debug, Clone)]
pub struct LdaFit {
    pub model: TopicModel,
    pub doc_topics: Vec<DocTopics>,
    /// Per-sweep log-likelihood when tracking is enabled.
    pub log_likelihood: Vec<f64>,
}

/// Fits LDA to documents of vocabulary ids.
///
/// Empty documents are skipped by the sampler and receive uniform
/// proportions. Estimates come from the final sampler state:
/// `phi[t][w] = (n_tw + β) / (n_t + Vβ)`, `theta[d][t] = (n_dt + α) / (n_d + kα)`.
pub fn fit_lda(docs: &[Vec<u32>], vocab: &Vocabulary, config: &LdaConfig) -> Result<LdaFit> {
    let k = config.k;
    let v = vocab.len();
    if k == 0 {
        return Err(Error::TopicConfig("k must be at least 1".into()));
    }
    if docs.is_empty() || v == 0 {
        return Err(Error::TopicConfig("empty corpus".into()));
    }
    let alpha = config.alpha();
    let beta = config.beta;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::TopicConfig("alpha and beta must be positive".into()));
    }
    if let Some(&bad) = docs.iter().flatten().find(|&&w| w as usize >= v) {
        return Err(Error::TopicConfig(alloc::format!("word id {bad} outside vocabulary of {v}")));
    }

    let mut rng = Rng::new(config.seed);
    let mut n_dt = vec![0u32; docs.len() * k];
    let mut n_wt = vec![0u32; v * k];
    let mut n_t = vec![0u32; k];
    let mut z: Vec<Vec<u16>> = Vec::with_capacity(docs.len());
    for (d, doc) in docs.iter().enumerate() {
        let mut zd = Vec::with_capacity(doc.len());
        for &w in doc {
            let t = rng.below(k);
            zd.push(t as u16);
            n_dt[d * k + t] += 1;
            n_wt[w as usize * k + t] += 1;
            n_t[t] += 1;
        }
        z.push(zd);
    }

    let v_beta = v as f64 * beta;
    let mut weights = vec![0.0f64; k];
    let mut log_likelihood = Vec::new();
    for _ in 0..config.iterations {
        for (d, doc) in docs.iter().enumerate() {
            let dt = &mut n_dt[d * k..(d + 1) * k];
            for (i, &w) in doc.iter().enumerate() {
                let w = w as usize;
                let old = z[d][i] as usize;
                dt[old] -= 1;
                n_wt[w * k + old] -= 1;
                n_t[old] -= 1;

                let wt = &n_wt[w * k..(w + 1) * k];
                let mut total = 0.0;
                for t in 0..k {
                    total += (f64::from(dt[t]) + alpha) * (f64::from(wt[t]) + beta) / (f64::from(n_t[t]) + v_beta);
                    weights[t] = total;
                }
                let new = pick(&weights, rng.uniform() * total);

                z[d][i] = new as u16;
                dt[new] += 1;
                n_wt[w * k + new] += 1;
                n_t[new] += 1;
            }
        }
        if config.track_likelihood {
            log_likelihood.push(word_log_likelihood(&n_wt, &n_t, k, v, beta));
        }
    }

    let mut phi = vec![0.0; k * v];
    for t in 0..k {
        let denom = f64::from(n_t[t]) + v_beta;
        for w in 0..v {
            phi[t * v + w] = (f64::from(n_wt[w * k + t]) + beta) / denom;
        }
    }
    let doc_topics = docs
        .iter()
        .enumerate()
        .map(|(d, doc)| {
            if doc.is_empty() {
                return DocTopics::uniform(k);
            }
            let denom = doc.len() as f64 + k as f64 * alpha;
            DocTopics { theta: n_dt[d * k..(d + 1) * k].iter().map(|&c| (f64::from(c) + alpha) / denom).collect() }
        })
        .collect();

    Ok(LdaFit {
        model: TopicModel {
            k,
            alpha,
            beta,
            iterations: config.iterations,
            seed: config.seed,
            words: vocab.entries().iter().map(|(w, _)| w.clone()).collect(),
            phi,
        },
        doc_topics,
        log_likelihood,
    })
}

fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
}

/// `log p(w | z)` with topic-word distributions integrated out.
fn word_log_likelihood(n_wt: &[u32], n_t: &[u32], k: usize, v: usize, beta: f64) -> f64 {
    let lg = libm::lgamma;
    let v_beta = v as f64 * beta;
    let mut ll = k as f64 * (lg(v_beta) - v as f64 * lg(beta));
    for &c in &n_t[..k] {
        ll -= lg(f64::from(c) + v_beta);
    }
    for &c in n_wt {
        ll += lg(f64::from(c) + beta);
    }
    ll
}

/// Topic proportions for a new document with `phi` held fixed.
pub fn infer_topics(model: &TopicModel, doc: &[u32], iterations: usize, seed: u64) -> DocTopics {
    let k = model.k;
    let v = model.vocab_size();
    let doc: Vec<usize> = doc.iter().map(|&w| w as usize).filter(|&w| w < v).collect();
    if doc.is_empty() {
        return DocTopics::uniform(k);
    }
    let mut rng = Rng::new(seed);
    let mut n_dt = vec![0u32; k];
    let mut z: Vec<usize> = doc
        .iter()
        .map(|_| {
            let t = rng.below(k);
            n_dt[t] += 1;
            t
        })
        .collect();
    let mut weights = vec![0.0; k];
    for _ in 0..iterations {
        for (i, &w) in doc.iter().enumerate() {
            n_dt[z[i]] -= 1;
            let mut total = 0.0;
            for t in 0..k {
                total += (f64::from(n_dt[t]) + model.alpha) * model.phi[t * v + w];
                weights[t] = total;
            }
            let new = pick(&weights, rng.uniform() * total);
            z[i] = new;
            n_dt[new] += 1;
        }
    }
    let denom = doc.len() as f64 + k as f64 * model.alpha;
    DocTopics { theta: n_dt.iter().map(|&c| (f64::from(c) + model.alpha) / denom).collect() }
}
