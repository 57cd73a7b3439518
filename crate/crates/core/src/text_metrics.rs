//! Tokenization and pairwise text scorers used as matching edge weights.
//!
//! All scorers return values in `[0, 1]`. Any ×100 presentation belongs
//! to the reporting layer.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zero n-gram precisions are floored to this value before the geometric mean.
pub const BLEU_EPSILON: f64 = 1e-9;

/// Lowercased tokens with no embedded whitespace. May be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenSequence(iter.into_iter().map(Into::into).collect())
    }
}

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Lowercase, split on whitespace, and split each maximal run of
/// punctuation (any non-alphanumeric, non-whitespace character) into its
/// own token.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let lower = word.to_lowercase();
        let mut start = 0;
        let mut prev: Option<bool> = None;
        for (i, c) in lower.char_indices() {
            let p = is_punct(c);
            if prev.is_some_and(|q| q != p) {
                tokens.push(lower[start..i].to_string());
                start = i;
            }
            prev = Some(p);
        }
        if start < lower.len() {
            tokens.push(lower[start..].to_string());
        }
    }
    TokenSequence(tokens)
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Sentence-level BLEU over n-gram orders `1..=min(4, |candidate|)`.
///
/// Clipped precisions are combined with uniform weights; a zero precision
/// is floored to [`BLEU_EPSILON`]. The brevity penalty is
/// `exp(1 - |ref| / |cand|)` for short candidates.
pub fn bleu4(candidate: &TokenSequence, reference: &TokenSequence) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::invalid("BLEU reference is empty"));
    }
    if candidate.is_empty() {
        return Ok(0.0);
    }
    let max_order = candidate.len().min(4);
    let mut log_sum = 0.0;
    for n in 1..=max_order {
        let cand = ngram_counts(&candidate.0, n);
        let refs = ngram_counts(&reference.0, n);
        let clipped: usize = cand
            .iter()
            .map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0)))
            .sum();
        let total = candidate.len() + 1 - n;
        let p = (clipped as f64 / total as f64).max(BLEU_EPSILON);
        log_sum += p.ln();
    }
    let geo = (log_sum / max_order as f64).exp();
    let (c, r) = (candidate.len() as f64, reference.len() as f64);
    let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    Ok((bp * geo).clamp(0.0, 1.0))
}

/// Length of the longest common subsequence, `O(|a|·|b|)` time, `O(|b|)` space.
pub fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// ROUGE-L F1: harmonic mean of LCS precision and recall.
pub fn rouge_l_f1(candidate: &TokenSequence, reference: &TokenSequence) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::invalid("ROUGE-L reference is empty"));
    }
    if candidate.is_empty() {
        return Ok(0.0);
    }
    let l = lcs_len(&candidate.0, &reference.0);
    if l == 0 {
        return Ok(0.0);
    }
    let p = l as f64 / candidate.len() as f64;
    let r = l as f64 / reference.len() as f64;
    Ok(2.0 * p * r / (p + r))
}

pub fn exact_match(candidate: &TokenSequence, reference: &TokenSequence) -> f64 {
    if candidate == reference {
        1.0
    } else {
        0.0
    }
}

/// A pairwise similarity between a candidate and a single reference.
pub trait PairwiseScorer: Sync {
    fn name(&self) -> &str;
    fn score(&self, candidate: &TokenSequence, reference: &TokenSequence) -> Result<f64>;
}

/// The built-in scorers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scorer {
    #[serde(rename = "bleu4")]
    Bleu4,
    #[serde(rename = "rougeL")]
    RougeL,
    #[serde(rename = "exact")]
    Exact,
}

impl Scorer {
    pub const ALL: [Scorer; 3] = [Scorer::Bleu4, Scorer::RougeL, Scorer::Exact];

    pub fn as_str(self) -> &'static str {
        match self {
            Scorer::Bleu4 => "bleu4",
            Scorer::RougeL => "rougeL",
            Scorer::Exact => "exact",
        }
    }
}

impl PairwiseScorer for Scorer {
    fn name(&self) -> &str {
        self.as_str()
    }

    fn score(&self, candidate: &TokenSequence, reference: &TokenSequence) -> Result<f64> {
        match self {
            Scorer::Bleu4 => bleu4(candidate, reference),
            Scorer::RougeL => rouge_l_f1(candidate, reference),
            Scorer::Exact => Ok(exact_match(candidate, reference)),
        }
    }
}

impl fmt::Display for Scorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scorer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scorer::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown scorer '{s}' (expected bleu4, rougeL or exact)"
                ))
            })
    }
}
