//! Record formats for the command-line tool, JSONL helpers and atomic
//! file output.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dialog_tree::{references_for_context, resolve_path, DialogTree};
use crate::emotion_analysis::{Emotion, EmotionDistribution};
use crate::error::{Error, Result};
use crate::matching_eval::EvalContext;

/// `{"context_id": ..., "generations": [...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationRecord {
    pub context_id: String,
    pub generations: Vec<String>,
}

/// A reference set, given directly or as an address into a tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReferenceRecord {
    Direct {
        context_id: String,
        references: Vec<String>,
        #[serde(default)]
        history: Vec<String>,
    },
    Address {
        context_id: String,
        path_ids: Vec<String>,
        /// Disambiguates when several trees are loaded.
        #[serde(default)]
        prompt_id: Option<String>,
    },
}

impl ReferenceRecord {
    pub fn context_id(&self) -> &str {
        match self {
            ReferenceRecord::Direct { context_id, .. }
            | ReferenceRecord::Address { context_id, .. } => context_id,
        }
    }
}

/// `{"node_id": ..., "lookahead_emotion": ..., "d_vector": [...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookaheadRecord {
    pub node_id: String,
    pub lookahead_emotion: Emotion,
    pub d_vector: EmotionDistribution,
}

/// A labeled utterance, used for targets, predictions and oversampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    #[serde(alias = "node_id")]
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub emotion: Emotion,
}

/// Parse one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(bytes: &[u8]) -> Result<Vec<T>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        location: format!("byte {}", e.valid_up_to()),
        message: "not valid UTF-8".into(),
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                location: format!("line {}", i + 1),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("value serializes");
    out.push('\n');
    out
}

/// Write through a temporary file in the destination directory, then
/// rename over the target.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn resolve_reference(
    record: &ReferenceRecord,
    trees: &[DialogTree],
) -> Result<(Vec<String>, Vec<String>)> {
    match record {
        ReferenceRecord::Direct {
            references,
            history,
            ..
        } => Ok((references.clone(), history.clone())),
        ReferenceRecord::Address {
            path_ids,
            prompt_id,
            ..
        } => {
            let candidates: Vec<&DialogTree> = trees
                .iter()
                .filter(|t| {
                    prompt_id
                        .as_ref()
                        .is_none_or(|p| &t.scenario.prompt_id == p)
                })
                .filter(|t| resolve_path(t, path_ids).is_ok())
                .collect();
            let tree = match candidates.as_slice() {
                [one] => *one,
                [] => {
                    return Err(Error::NotFound(format!(
                        "path {path_ids:?} does not resolve in any loaded tree"
                    )))
                }
                _ => {
                    return Err(Error::invalid(format!(
                        "path {path_ids:?} resolves in several trees; add a prompt_id"
                    )))
                }
            };
            let refs = references_for_context(tree, path_ids)?;
            let mut history = vec![tree.scenario.prompt_text.clone()];
            history.extend(resolve_path(tree, path_ids)?.iter().map(|n| n.text.clone()));
            Ok((refs, history))
        }
    }
}

/// Join generation records with their reference sets, in generation-file
/// order. An unresolvable `context_id` is a [`Error::NotFound`] naming it.
pub fn assemble_contexts(
    generations: &[GenerationRecord],
    references: &[ReferenceRecord],
    trees: &[DialogTree],
) -> Result<Vec<EvalContext>> {
    let mut by_id: HashMap<&str, &ReferenceRecord> = HashMap::new();
    for r in references {
        if by_id.insert(r.context_id(), r).is_some() {
            return Err(Error::invalid(format!(
                "duplicate reference context_id '{}'",
                r.context_id()
            )));
        }
    }
    generations
        .iter()
        .map(|g| {
            let rec = by_id
                .get(g.context_id.as_str())
                .ok_or_else(|| Error::NotFound(format!("context_id '{}'", g.context_id)))?;
            let (refs, history) =
                resolve_reference(rec, trees).map_err(|e| e.in_context(&g.context_id))?;
            Ok(EvalContext {
                context_id: g.context_id.clone(),
                history,
                references: refs,
                generations: g.generations.clone(),
            })
        })
        .collect()
}
