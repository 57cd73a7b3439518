//! Embedding-centroid retrieval baselines.
//!
//! Contexts are embedded as the mean word vector of all in-vocabulary
//! tokens, and queries are answered by an exact linear scan for the
//! stored context with the highest cosine similarity, optionally
//! restricted to responses carrying a given emotion.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dialog_tree::{enumerate_paths, Anonymizer, DialogTree};
use crate::emotion_analysis::{Emotion, Labels, TransitionMatrix};
use crate::error::{Error, Result};
use crate::text_metrics::tokenize;

pub const INDEX_FORMAT_VERSION: u32 = 1;

/// Word vectors of a single fixed dimension, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    lookup: HashMap<String, usize>,
    data: Vec<f32>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.lookup
            .get(word)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    /// Text form: one `word v1 v2 ...` line per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for v in &self.data[i * self.dim..(i + 1) * self.dim] {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Parse whitespace-separated `word v1 ... vd` lines (GloVe text format).
/// Blank lines are skipped; repeated words keep their first vector.
pub fn load_embeddings(document: &[u8]) -> Result<EmbeddingTable> {
    let text = std::str::from_utf8(document).map_err(|e| Error::Parse {
        location: format!("byte {}", e.valid_up_to()),
        message: "embedding file is not valid UTF-8".into(),
    })?;
    let mut dim = None;
    let mut words = Vec::new();
    let mut lookup = HashMap::new();
    let mut data = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let values = fields
            .map(|f| {
                f.parse::<f32>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        location: format!("line {line_no}"),
                        message: format!("invalid vector component '{f}'"),
                    })
            })
            .collect::<Result<Vec<f32>>>()?;
        let expected = *dim.get_or_insert(values.len());
        if values.is_empty() || values.len() != expected {
            return Err(Error::Parse {
                location: format!("line {line_no}"),
                message: format!("expected {expected} components, found {}", values.len()),
            });
        }
        if lookup.contains_key(word) {
            continue;
        }
        lookup.insert(word.to_string(), words.len());
        words.push(word.to_string());
        data.extend(values);
    }
    Ok(EmbeddingTable {
        dim: dim.unwrap_or(0),
        words,
        lookup,
        data,
    })
}

/// Mean vector of all in-vocabulary tokens across the utterances; the
/// zero vector when nothing is in vocabulary.
pub fn embed_context<S: AsRef<str>>(history: &[S], table: &EmbeddingTable) -> Vec<f32> {
    let mut sum = vec![0.0f64; table.dim];
    let mut n = 0usize;
    for utterance in history {
        for tok in tokenize(utterance.as_ref()).iter() {
            if let Some(v) = table.get(tok) {
                sum.iter_mut().zip(v).for_each(|(s, &x)| *s += x as f64);
                n += 1;
            }
        }
    }
    if n == 0 {
        return vec![0.0; table.dim];
    }
    sum.into_iter().map(|s| (s / n as f64) as f32).collect()
}

/// Cosine similarity accumulated in `f64`; zero when either vector is zero.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "vector lengths differ: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let (mut dot, mut nu, mut nv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a as f64, b as f64);
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (nu.sqrt() * nv.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexItem {
    pub item_id: String,
    pub centroid: Vec<f32>,
    pub response_text: String,
    pub response_emotion: Option<Emotion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextIndex {
    pub format_version: u32,
    pub dim: usize,
    pub items: Vec<IndexItem>,
}

/// Which text is embedded for a stored context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContextText {
    /// Character names replaced by speaker tokens.
    #[default]
    Anonymized,
    Raw,
}

impl ContextIndex {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let index: ContextIndex =
            serde_json::from_slice(bytes).map_err(|e| crate::dialog_tree::json_error(bytes, &e))?;
        if index.format_version != INDEX_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported index format version {} (expected {INDEX_FORMAT_VERSION})",
                index.format_version
            )));
        }
        if let Some(item) = index.items.iter().find(|i| i.centroid.len() != index.dim) {
            return Err(Error::invalid(format!(
                "item '{}' has dimension {}, expected {}",
                item.item_id,
                item.centroid.len(),
                index.dim
            )));
        }
        Ok(index)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("index serializes");
        s.push('\n');
        s
    }
}

/// One item per response node: the centroid of everything said before it
/// (prompt included), and the response with its emotion if labeled.
/// Item ids are `<prompt_id>/<node_id>`.
pub fn build_index(
    trees: &[DialogTree],
    labels: &Labels,
    table: &EmbeddingTable,
    text: ContextText,
) -> Result<ContextIndex> {
    let mut items = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for tree in trees {
        let anon = Anonymizer::new(&tree.scenario);
        let render = |s: &str| match text {
            ContextText::Anonymized => anon.replace_names(s),
            ContextText::Raw => s.to_string(),
        };
        let tree_labels = Labels::from_tree(tree).overlay(labels.clone());
        for path in enumerate_paths(tree) {
            let last = path.last();
            let mut history = vec![render(&tree.scenario.prompt_text)];
            history.extend(path.history().iter().map(|n| render(&n.text)));
            let item_id = format!("{}/{}", tree.scenario.prompt_id, last.id);
            if !seen.insert(item_id.clone()) {
                return Err(Error::invalid(format!("duplicate index item '{item_id}'")));
            }
            items.push(IndexItem {
                item_id,
                centroid: embed_context(&history, table),
                response_text: last.text.clone(),
                response_emotion: tree_labels.get(&last.id).map(|d| d.argmax()),
            });
        }
    }
    Ok(ContextIndex {
        format_version: INDEX_FORMAT_VERSION,
        dim: table.dim(),
        items,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum RetrievalMode<'a> {
    MostLikely,
    WithEmotion(Emotion),
    /// Responses labeled with the emotion most likely to lead to the target.
    WithTransition(Emotion, &'a TransitionMatrix),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Retrieved {
    pub item_id: String,
    pub response_text: String,
    pub response_emotion: Option<Emotion>,
    pub similarity: f64,
}

/// Embed `query_history` and retrieve; see [`retrieve_by_vector`].
pub fn retrieve<S: AsRef<str>>(
    index: &ContextIndex,
    table: &EmbeddingTable,
    query_history: &[S],
    mode: RetrievalMode<'_>,
) -> Result<Retrieved> {
    retrieve_by_vector(index, &embed_context(query_history, table), mode)
}

/// Highest-cosine item among those admitted by `mode`; ties go to the
/// smallest item id.
pub fn retrieve_by_vector(
    index: &ContextIndex,
    query: &[f32],
    mode: RetrievalMode<'_>,
) -> Result<Retrieved> {
    if index.items.is_empty() {
        return Err(Error::invalid("retrieval index is empty"));
    }
    let required = match mode {
        RetrievalMode::MostLikely => None,
        RetrievalMode::WithEmotion(e) => Some(e),
        RetrievalMode::WithTransition(e, t) => Some(t.leads_to(e)),
    };
    if required.is_some() {
        if let Some(item) = index.items.iter().find(|i| i.response_emotion.is_none()) {
            return Err(Error::invalid(format!(
                "item '{}' has no emotion label; constrained retrieval needs a fully labeled index",
                item.item_id
            )));
        }
    }
    let mut best: Option<(f64, &IndexItem)> = None;
    for item in &index.items {
        if required.is_some_and(|e| item.response_emotion != Some(e)) {
            continue;
        }
        let sim = cosine(query, &item.centroid)?;
        let better = match best {
            None => true,
            Some((b, cur)) => sim > b || (sim == b && item.item_id < cur.item_id),
        };
        if better {
            best = Some((sim, item));
        }
    }
    let (similarity, item) = best.ok_or_else(|| {
        Error::NotFound(format!(
            "no indexed response labeled '{}'",
            required.map_or("", Emotion::as_str)
        ))
    })?;
    Ok(Retrieved {
        item_id: item.item_id.clone(),
        response_text: item.response_text.clone(),
        response_emotion: item.response_emotion,
        similarity,
    })
}
