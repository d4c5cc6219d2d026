//! Tokenization, word-emotion lexicon scoring and tf-idf vocabulary
//! selection.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

/// The two sentiments followed by the eight emotions, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Affect {
    Positive,
    Negative,
    Anger,
    Anticipation,
    Disgust,
    Fear,
    Joy,
    Sadness,
    Surprise,
    Trust,
}

impl Affect {
    pub const ALL: [Affect; 10] = [
        Affect::Positive,
        Affect::Negative,
        Affect::Anger,
        Affect::Anticipation,
        Affect::Disgust,
        Affect::Fear,
        Affect::Joy,
        Affect::Sadness,
        Affect::Surprise,
        Affect::Trust,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Affect::Positive => "positive",
            Affect::Negative => "negative",
            Affect::Anger => "anger",
            Affect::Anticipation => "anticipation",
            Affect::Disgust => "disgust",
            Affect::Fear => "fear",
            Affect::Joy => "joy",
            Affect::Sadness => "sadness",
            Affect::Surprise => "surprise",
            Affect::Trust => "trust",
        }
    }

    pub fn is_sentiment(self) -> bool {
        matches!(self, Affect::Positive | Affect::Negative)
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

impl fmt::Display for Affect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Affect {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        Affect::ALL.iter().copied().find(|a| a.as_str() == s).ok_or(())
    }
}

fn is_url_start(word: &str) -> bool {
    let lower = word.trim_start_matches(|c: char| !c.is_alphanumeric());
    let starts = |p: &str| lower.get(..p.len()).is_some_and(|h| h.eq_ignore_ascii_case(p));
    starts("http://") || starts("https://") || starts("www.")
}

/// Lowercased alphanumeric tokens with URLs removed first.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace().filter(|w| !is_url_start(w)) {
        for tok in word.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            out.push(tok.to_lowercase());
        }
    }
    out
}

/// [`tokenize`] followed by stop-word removal.
pub fn tokenize_filtered(text: &str, stop: &StopWords) -> Vec<String> {
    let mut toks = tokenize(text);
    toks.retain(|t| !stop.contains(t));
    toks
}

/// A set of words removed before topic modeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWords(BTreeSet<String>);

impl Default for StopWords {
    fn default() -> Self {
        StopWords::from_words(ENGLISH_STOP_WORDS.iter().copied())
    }
}

impl StopWords {
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopWords(
            words.into_iter().map(|w| w.as_ref().trim().to_lowercase()).filter(|w| !w.is_empty()).collect(),
        )
    }

    /// One word per line; `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        Self::from_words(text.lines().map(|l| l.split('#').next().unwrap_or("")))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Word to affect-label associations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, u16>,
}

impl Lexicon {
    /// Parses the flat `word<TAB>label<TAB>flag` association format.
    /// Blank lines are skipped; only `flag = 1` rows create associations.
    pub fn parse(text: &str) -> Result<Lexicon> {
        let mut lex = Lexicon::default();
        for (i, line) in text.lines().enumerate() {
            lex.add_line(i + 1, line)?;
        }
        Ok(lex)
    }

    /// Adds one association line; `line_no` is only used in errors.
    pub fn add_line(&mut self, line_no: usize, line: &str) -> Result<()> {
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            return Ok(());
        }
        let err = |reason: &str| Error::Lexicon { line: line_no, reason: reason.to_string() };
        let mut fields = line.split('\t');
        let (Some(word), Some(label), Some(flag), None) = (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(err("expected word<TAB>label<TAB>flag"));
        };
        let word = word.trim();
        if word.is_empty() {
            return Err(err("empty word"));
        }
        let label: Affect = label.trim().parse().map_err(|_| err("unknown label"))?;
        match flag.trim() {
            "1" => *self.entries.entry(word.to_lowercase()).or_insert(0) |= label.bit(),
            "0" => {}
            _ => return Err(err("flag must be 0 or 1")),
        }
        Ok(())
    }

    pub fn insert(&mut self, word: &str, label: Affect) {
        *self.entries.entry(word.to_lowercase()).or_insert(0) |= label.bit();
    }

    pub fn labels(&self, word: &str) -> impl Iterator<Item = Affect> + '_ {
        let bits = self.entries.get(word).copied().unwrap_or(0);
        Affect::ALL.into_iter().filter(move |a| bits & a.bit() != 0)
    }

    pub fn has(&self, word: &str, label: Affect) -> bool {
        self.entries.get(word).is_some_and(|b| b & label.bit() != 0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Length-normalized affect distribution of one text.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AffectScores {
    /// Indexed in [`Affect::ALL`] order.
    pub scores: [f64; 10],
    pub token_count: usize,
}

impl AffectScores {
    pub fn get(&self, label: Affect) -> f64 {
        self.scores[label as usize]
    }

    pub fn sentiment(&self) -> impl Iterator<Item = (Affect, f64)> + '_ {
        Affect::ALL.into_iter().filter(|a| a.is_sentiment()).map(|a| (a, self.get(a)))
    }

    pub fn emotion(&self) -> impl Iterator<Item = (Affect, f64)> + '_ {
        Affect::ALL.into_iter().filter(|a| !a.is_sentiment()).map(|a| (a, self.get(a)))
    }
}

/// Fraction of tokens carrying each label. A token with several labels
/// counts toward each of them.
pub fn score_affect<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> AffectScores {
    let mut counts = [0usize; 10];
    for tok in tokens {
        for label in lexicon.labels(tok.as_ref()) {
            counts[label as usize] += 1;
        }
    }
    let n = tokens.len();
    let mut scores = [0.0; 10];
    if n > 0 {
        for (s, c) in scores.iter_mut().zip(counts) {
            *s = c as f64 / n as f64;
        }
    }
    AffectScores { scores, token_count: n }
}

/// Top words by corpus-summed tf-idf weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    entries: Vec<(String, f64)>,
    index: BTreeMap<String, u32>,
}

impl Vocabulary {
    /// Builds from an explicit ranked word list (weights unknown → 0).
    pub fn from_words<I: IntoIterator<Item = String>>(words: I) -> Self {
        Self::from_ranked(words.into_iter().map(|w| (w, 0.0)).collect())
    }

    fn from_ranked(entries: Vec<(String, f64)>) -> Self {
        let index = entries.iter().enumerate().map(|(i, (w, _))| (w.clone(), i as u32)).collect();
        Vocabulary { entries, index }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn word(&self, id: u32) -> &str {
        &self.entries[id as usize].0
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    /// Maps tokens to ids, dropping out-of-vocabulary words.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens.iter().filter_map(|t| self.id(t.as_ref())).collect()
    }
}

/// Ranks words by `Σ_d tf(w, d) · ln(N / df(w))` and keeps the top `cap`;
/// ties go to the lexicographically smaller word.
pub fn build_vocabulary<I, D, S>(corpus: I, cap: usize) -> Result<Vocabulary>
where
    I: IntoIterator<Item = D>,
    D: AsRef<[S]>,
    S: AsRef<str>,
{
    let mut tf: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    let mut docs = 0u64;
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for doc in corpus {
        docs += 1;
        let doc = doc.as_ref();
        seen.clear();
        for tok in doc {
            let tok = tok.as_ref();
            match tf.get_mut(tok) {
                Some(e) => e.0 += 1,
                None => {
                    tf.insert(tok.to_string(), (1, 0));
                }
            }
        }
        let mut distinct: Vec<&str> = doc.iter().map(|t| t.as_ref()).collect();
        distinct.sort_unstable();
        distinct.dedup();
        for tok in distinct {
            tf.get_mut(tok).expect("counted above").1 += 1;
        }
    }
    if docs == 0 {
        return Err(Error::EmptySample);
    }
    let mut ranked: Vec<(String, f64)> = tf
        .into_iter()
        .map(|(w, (count, df))| {
            let idf = libm::log(docs as f64 / df as f64);
            (w, count as f64 * idf)
        })
        .collect();
    // BTreeMap iteration is already lexicographic, so a stable sort by
    // weight keeps the tie-break.
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked.truncate(cap);
    Ok(Vocabulary::from_ranked(ranked))
}

/// Default English stop-word list.
pub const ENGLISH_STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any", "are", "aren",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can",
    "couldn", "d", "did", "didn", "do", "does", "doesn", "doing", "don", "down", "during", "each", "few", "for",
    "from", "further", "had", "hadn", "has", "hasn", "have", "haven", "having", "he", "her", "here", "hers",
    "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "isn", "it", "its", "itself",
    "just", "ll", "m", "ma", "me", "mightn", "more", "most", "mustn", "my", "myself", "needn", "no", "nor",
    "not", "now", "o", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out",
    "over", "own", "re", "s", "same", "shan", "she", "should", "shouldn", "so", "some", "such", "t", "than",
    "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those",
    "through", "to", "too", "under", "until", "up", "ve", "very", "was", "wasn", "we", "were", "weren", "what",
    "when", "where", "which", "while", "who", "whom", "why", "will", "with", "won", "wouldn", "y", "you",
    "your", "yours", "yourself", "yourselves",
];
