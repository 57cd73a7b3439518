//! Branching conversation trees: file format, validation, path
//! enumeration, corpus statistics and training-example export.
//!
//! A tree starts from a scenario (the prompt, `u_0`) followed by depth-1
//! responses. Every response node may have up to `b` alternative replies
//! by the other speaker, of which at most `c` are continued deeper, down
//! to a maximum depth of `d`.

use std::collections::{HashMap, HashSet};

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::emotion_analysis::{lookahead_label, Emotion, Labels};
use crate::error::{Error, Result};
use crate::text_metrics::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Character {
    pub name: String,
    pub pronoun: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub prompt_id: String,
    pub prompt_text: String,
    pub characters: [Character; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Speaker {
    One,
    Two,
}

impl Speaker {
    pub fn other(self) -> Speaker {
        match self {
            Speaker::One => Speaker::Two,
            Speaker::Two => Speaker::One,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Speaker::One => "[speaker1]",
            Speaker::Two => "[speaker2]",
        }
    }
}

impl TryFrom<u8> for Speaker {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Speaker::One),
            2 => Ok(Speaker::Two),
            other => Err(format!("speaker must be 1 or 2, got {other}")),
        }
    }
}

impl From<Speaker> for u8 {
    fn from(s: Speaker) -> u8 {
        match s {
            Speaker::One => 1,
            Speaker::Two => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogNode {
    pub id: String,
    pub speaker: Speaker,
    pub text: String,
    pub continued: bool,
    #[serde(default)]
    pub emotion: Option<Emotion>,
    #[serde(default)]
    pub children: Vec<DialogNode>,
}

impl DialogNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of nodes in this subtree, including `self`.
    pub fn subtree_size(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(DialogNode::subtree_size)
            .sum::<usize>()
    }

    /// Pre-order traversal of the subtree rooted here.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a DialogNode, usize), depth: usize) {
        f(self, depth);
        for child in &self.children {
            child.walk(f, depth + 1);
        }
    }
}

/// Branching factor `b`, continuation factor `c`, maximum depth `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { b: 10, c: 3, d: 6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DialogTree {
    pub scenario: Scenario,
    pub parameters: TreeParams,
    pub turns: Vec<DialogNode>,
}

/// On-disk layout of a tree file.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeFile {
    prompt_id: String,
    prompt_text: String,
    characters: Vec<Character>,
    #[serde(default)]
    parameters: TreeParams,
    turns: Vec<DialogNode>,
}

/// Maps alternative key spellings in tree files onto canonical keys,
/// e.g. `{"utterance": "text", "replies": "children"}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(transparent)]
pub struct KeyMap(pub HashMap<String, String>);

impl KeyMap {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| json_error(bytes, &e))
    }

    fn apply(&self, value: &mut Value) {
        match value {
            Value::Object(map) => {
                let entries = std::mem::take(map);
                for (k, mut v) in entries {
                    self.apply(&mut v);
                    let key = self.0.get(&k).cloned().unwrap_or(k);
                    map.insert(key, v);
                }
            }
            Value::Array(items) => items.iter_mut().for_each(|v| self.apply(v)),
            _ => {}
        }
    }
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let line_start: usize = bytes
        .split_inclusive(|&b| b == b'\n')
        .take(line.saturating_sub(1))
        .map(<[u8]>::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

pub(crate) fn json_error(bytes: &[u8], e: &serde_json::Error) -> Error {
    Error::Parse {
        location: format!("byte {}", byte_offset(bytes, e.line(), e.column())),
        message: e.to_string(),
    }
}

/// Parse and validate a tree document in the canonical format.
pub fn parse_tree(document: &[u8]) -> Result<DialogTree> {
    let file: TreeFile = serde_json::from_slice(document).map_err(|e| json_error(document, &e))?;
    DialogTree::from_file(file)
}

/// Parse a tree whose keys may use alternative spellings.
pub fn parse_tree_with_key_map(document: &[u8], keys: &KeyMap) -> Result<DialogTree> {
    let mut value: Value =
        serde_json::from_slice(document).map_err(|e| json_error(document, &e))?;
    keys.apply(&mut value);
    let file: TreeFile = serde_json::from_value(value).map_err(|e| Error::Parse {
        location: "document".into(),
        message: e.to_string(),
    })?;
    DialogTree::from_file(file)
}

pub fn serialize_tree(tree: &DialogTree) -> String {
    let [c1, c2] = tree.scenario.characters.clone();
    let file = TreeFile {
        prompt_id: tree.scenario.prompt_id.clone(),
        prompt_text: tree.scenario.prompt_text.clone(),
        characters: vec![c1, c2],
        parameters: tree.parameters,
        turns: tree.turns.clone(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("tree serializes");
    out.push('\n');
    out
}

fn violation(node_id: &str, rule: impl Into<String>) -> Error {
    Error::Validation {
        node_id: node_id.to_string(),
        rule: rule.into(),
    }
}

impl DialogTree {
    fn from_file(file: TreeFile) -> Result<Self> {
        let prompt_id = file.prompt_id;
        let characters: [Character; 2] = file.characters.try_into().map_err(|v: Vec<_>| {
            violation(
                &prompt_id,
                format!("expected 2 characters, found {}", v.len()),
            )
        })?;
        let tree = DialogTree {
            scenario: Scenario {
                prompt_id,
                prompt_text: file.prompt_text,
                characters,
            },
            parameters: file.parameters,
            turns: file.turns,
        };
        tree.validate()?;
        Ok(tree)
    }

    /// Check every structural invariant, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        let sc = &self.scenario;
        let root = sc.prompt_id.as_str();
        if sc.prompt_text.trim().is_empty() {
            return Err(violation(root, "prompt_text must be non-empty"));
        }
        let [a, b] = &sc.characters;
        if a.name.trim().is_empty() || b.name.trim().is_empty() {
            return Err(violation(root, "character names must be non-empty"));
        }
        if a.name.to_lowercase() == b.name.to_lowercase() {
            return Err(violation(root, "character names must be distinct"));
        }
        let p = self.parameters;
        if p.b == 0 || p.d == 0 || p.c > p.b {
            return Err(violation(
                root,
                format!(
                    "parameters need b >= 1, d >= 1, c <= b (got b={}, c={}, d={})",
                    p.b, p.c, p.d
                ),
            ));
        }
        check_siblings(root, &self.turns, p)?;
        let mut ids = HashSet::new();
        for turn in &self.turns {
            check_node(turn, 1, p, &mut ids)?;
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.turns.iter().map(DialogNode::subtree_size).sum()
    }

    /// Pre-order traversal of all response nodes with their depth (turns are depth 1).
    pub fn walk<'a>(&'a self, mut f: impl FnMut(&'a DialogNode, usize)) {
        for turn in &self.turns {
            turn.walk(&mut f, 1);
        }
    }

    pub fn find(&self, node_id: &str) -> Option<&DialogNode> {
        let mut found = None;
        self.walk(|n, _| {
            if found.is_none() && n.id == node_id {
                found = Some(n);
            }
        });
        found
    }

    /// Copy of the tree with node emotions set from `labels` (argmax of
    /// each distribution). Nodes absent from `labels` keep their label.
    pub fn with_labels(&self, labels: &Labels) -> DialogTree {
        fn relabel(node: &mut DialogNode, labels: &Labels) {
            if let Some(d) = labels.get(&node.id) {
                node.emotion = Some(d.argmax());
            }
            node.children.iter_mut().for_each(|c| relabel(c, labels));
        }
        let mut tree = self.clone();
        tree.turns.iter_mut().for_each(|t| relabel(t, labels));
        tree
    }
}

fn check_siblings(parent_id: &str, children: &[DialogNode], p: TreeParams) -> Result<()> {
    if children.len() > p.b {
        return Err(violation(
            parent_id,
            format!(
                "{} children exceed branching factor b={}",
                children.len(),
                p.b
            ),
        ));
    }
    let continued = children.iter().filter(|c| c.continued).count();
    if continued > p.c {
        return Err(violation(
            parent_id,
            format!(
                "{continued} continued children exceed continuation factor c={}",
                p.c
            ),
        ));
    }
    Ok(())
}

fn check_node<'a>(
    node: &'a DialogNode,
    depth: usize,
    p: TreeParams,
    ids: &mut HashSet<&'a str>,
) -> Result<()> {
    if node.id.is_empty() {
        return Err(violation("", "node id must be non-empty"));
    }
    if !ids.insert(node.id.as_str()) {
        return Err(violation(&node.id, "duplicate node id"));
    }
    if depth > p.d {
        return Err(violation(
            &node.id,
            format!("depth {depth} exceeds maximum depth d={}", p.d),
        ));
    }
    if !node.children.is_empty() && !node.continued {
        return Err(violation(
            &node.id,
            "node has children but continued = false",
        ));
    }
    check_siblings(&node.id, &node.children, p)?;
    for child in &node.children {
        if child.speaker == node.speaker {
            return Err(violation(
                &child.id,
                format!("speaker must alternate with parent '{}'", node.id),
            ));
        }
        check_node(child, depth + 1, p, ids)?;
    }
    Ok(())
}

/// Root-to-node sequence of responses (the prompt is implicit).
#[derive(Debug, Clone, PartialEq)]
pub struct Path<'a> {
    pub nodes: Vec<&'a DialogNode>,
}

impl<'a> Path<'a> {
    pub fn ids(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.id.clone()).collect()
    }

    pub fn last(&self) -> &'a DialogNode {
        self.nodes.last().expect("paths are non-empty")
    }

    /// Everything before the final node.
    pub fn history(&self) -> &[&'a DialogNode] {
        &self.nodes[..self.nodes.len() - 1]
    }
}

/// One path per node, in depth-first child order.
pub fn enumerate_paths(tree: &DialogTree) -> Vec<Path<'_>> {
    fn go<'a>(node: &'a DialogNode, stack: &mut Vec<&'a DialogNode>, out: &mut Vec<Path<'a>>) {
        stack.push(node);
        out.push(Path {
            nodes: stack.clone(),
        });
        for child in &node.children {
            go(child, stack, out);
        }
        stack.pop();
    }
    let mut out = Vec::with_capacity(tree.node_count());
    let mut stack = Vec::new();
    for turn in &tree.turns {
        go(turn, &mut stack, &mut out);
    }
    out
}

/// Resolve a root-to-node id chain. An empty chain addresses the prompt.
pub fn resolve_path<'a>(tree: &'a DialogTree, path_ids: &[String]) -> Result<Vec<&'a DialogNode>> {
    let mut level: &[DialogNode] = &tree.turns;
    let mut nodes = Vec::with_capacity(path_ids.len());
    for id in path_ids {
        let node = level.iter().find(|n| &n.id == id).ok_or_else(|| {
            let parent = nodes
                .last()
                .map_or(tree.scenario.prompt_id.as_str(), |n: &&DialogNode| {
                    n.id.as_str()
                });
            Error::NotFound(format!("node '{id}' under '{parent}'"))
        })?;
        nodes.push(node);
        level = &node.children;
    }
    Ok(nodes)
}

/// The gold reference set for the next utterance after `path_ids`: the
/// texts of all children of the addressed node (or of the prompt).
pub fn references_for_context(tree: &DialogTree, path_ids: &[String]) -> Result<Vec<String>> {
    let nodes = resolve_path(tree, path_ids)?;
    let children = match nodes.last() {
        None => &tree.turns,
        Some(node) if !node.continued => {
            return Err(Error::invalid(format!(
                "node '{}' is not continued and has no replies",
                node.id
            )))
        }
        Some(node) => &node.children,
    };
    Ok(children.iter().map(|c| c.text.clone()).collect())
}

/// Replaces character names with speaker tokens.
#[derive(Debug, Clone)]
pub struct Anonymizer {
    pattern: Regex,
    names: [String; 2],
}

impl Anonymizer {
    pub fn new(scenario: &Scenario) -> Self {
        let names = scenario.characters.clone().map(|c| c.name);
        let mut alts: Vec<&String> = names.iter().collect();
        // Longer names first so that one name being a prefix of the other
        // cannot shadow it.
        alts.sort_by_key(|n| std::cmp::Reverse(n.len()));
        let body = alts
            .iter()
            .map(|n| regex::escape(n.trim()))
            .collect::<Vec<_>>()
            .join("|");
        let pattern = RegexBuilder::new(&format!(r"\b(?:{body})\b"))
            .case_insensitive(true)
            .build()
            .expect("escaped names form a valid pattern");
        Self { pattern, names }
    }

    /// Whole-word, case-insensitive replacement of either name.
    pub fn replace_names(&self, text: &str) -> String {
        self.pattern
            .replace_all(text, |caps: &regex::Captures<'_>| {
                let hit = caps[0].to_lowercase();
                if hit == self.names[0].trim().to_lowercase() {
                    Speaker::One.token()
                } else {
                    Speaker::Two.token()
                }
            })
            .into_owned()
    }

    pub fn line(&self, node: &DialogNode) -> String {
        format!(
            "{}: {}",
            node.speaker.token(),
            self.replace_names(&node.text)
        )
    }
}

/// Render a path as `[speakerN]: text` lines with names replaced.
pub fn anonymize_speakers(path: &[&DialogNode], scenario: &Scenario) -> String {
    let anon = Anonymizer::new(scenario);
    path.iter()
        .map(|n| anon.line(n))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total_prompts: usize,
    pub total_sentences: usize,
    pub total_tokens: usize,
    pub avg_sentences_per_prompt: f64,
    pub avg_sentence_length_tokens: f64,
    pub observed_max_branching: usize,
    pub observed_max_depth: usize,
    /// Node counts at depth 1, 2, ...
    pub per_depth_counts: Vec<usize>,
}

/// `num / den` rounded half-to-even at one decimal place.
fn round_ratio_1dp(num: usize, den: usize) -> f64 {
    if den == 0 {
        return 0.0;
    }
    let scaled = num as u128 * 10;
    let den = den as u128;
    let (q, rem) = (scaled / den, scaled % den);
    let q = match (2 * rem).cmp(&den) {
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal if q % 2 == 1 => q + 1,
        _ => q,
    };
    q as f64 / 10.0
}

impl DatasetStats {
    fn from_counts(
        total_prompts: usize,
        total_tokens: usize,
        observed_max_branching: usize,
        per_depth_counts: Vec<usize>,
    ) -> Self {
        let total_sentences = per_depth_counts.iter().sum();
        DatasetStats {
            total_prompts,
            total_sentences,
            total_tokens,
            avg_sentences_per_prompt: round_ratio_1dp(total_sentences, total_prompts),
            avg_sentence_length_tokens: round_ratio_1dp(total_tokens, total_sentences),
            observed_max_branching,
            observed_max_depth: per_depth_counts.len(),
            per_depth_counts,
        }
    }

    /// Statistics of the union of two disjoint tree collections.
    pub fn merge(&self, other: &DatasetStats) -> DatasetStats {
        let len = self
            .per_depth_counts
            .len()
            .max(other.per_depth_counts.len());
        let per_depth = (0..len)
            .map(|i| {
                self.per_depth_counts.get(i).unwrap_or(&0)
                    + other.per_depth_counts.get(i).unwrap_or(&0)
            })
            .collect();
        DatasetStats::from_counts(
            self.total_prompts + other.total_prompts,
            self.total_tokens + other.total_tokens,
            self.observed_max_branching
                .max(other.observed_max_branching),
            per_depth,
        )
    }
}

/// Corpus statistics; one sentence is one response node.
pub fn compute_stats(trees: &[DialogTree]) -> Result<DatasetStats> {
    if trees.is_empty() {
        return Err(Error::invalid("no trees to summarize"));
    }
    let mut tokens = 0;
    let mut branching = 0;
    let mut per_depth: Vec<usize> = Vec::new();
    for tree in trees {
        branching = branching.max(tree.turns.len());
        tree.walk(|node, depth| {
            if per_depth.len() < depth {
                per_depth.resize(depth, 0);
            }
            per_depth[depth - 1] += 1;
            tokens += tokenize(&node.text).len();
            branching = branching.max(node.children.len());
        });
    }
    Ok(DatasetStats::from_counts(
        trees.len(),
        tokens,
        branching,
        per_depth,
    ))
}

/// What, if anything, a training example is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conditioning {
    None,
    /// The emotion of the final utterance itself.
    Emotion,
    /// The lookahead label of the final utterance's replies, with discount `gamma`.
    Lookahead {
        gamma: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub path_ids: Vec<String>,
    pub text: String,
    /// Token span (tokenizer of [`tokenize`], half-open) of the final utterance.
    pub loss_token_start: usize,
    pub loss_token_end: usize,
    /// `emotion=<label>` or `lookahead=<label>`; absent when unconditioned.
    pub conditioning: Option<String>,
}

/// One example per node (per non-leaf node under lookahead conditioning).
///
/// `text` is the conditioning prefix, the anonymized prompt, and the
/// anonymized path as `[speakerN]: ...` lines. The loss span covers only
/// the final utterance's tokens.
pub fn export_training_examples(
    tree: &DialogTree,
    conditioning: Conditioning,
    labels: &Labels,
) -> Result<Vec<TrainingExample>> {
    let anon = Anonymizer::new(&tree.scenario);
    let prompt = anon.replace_names(&tree.scenario.prompt_text);
    let mut out = Vec::new();
    for path in enumerate_paths(tree) {
        let last = path.last();
        let tag = match conditioning {
            Conditioning::None => None,
            Conditioning::Emotion => {
                let d = labels.get(&last.id).ok_or_else(|| {
                    Error::invalid(format!("node '{}' has no emotion label", last.id))
                })?;
                Some(format!("emotion={}", d.argmax()))
            }
            Conditioning::Lookahead { gamma } => {
                if last.is_leaf() {
                    continue;
                }
                Some(format!(
                    "lookahead={}",
                    lookahead_label(last, labels, gamma)?
                ))
            }
        };

        let mut head = String::new();
        if let Some(t) = &tag {
            let label = t.split_once('=').map_or(t.as_str(), |(_, l)| l);
            head.push_str(&format!("[emotion={label}] "));
        }
        head.push_str(&prompt);
        for node in path.history() {
            head.push('\n');
            head.push_str(&anon.line(node));
        }
        head.push('\n');
        head.push_str(last.speaker.token());
        head.push(':');
        let final_text = anon.replace_names(&last.text);
        let start = tokenize(&head).len();
        let end = start + tokenize(&final_text).len();
        out.push(TrainingExample {
            path_ids: path.ids(),
            text: format!("{head} {final_text}"),
            loss_token_start: start,
            loss_token_end: end,
            conditioning: tag,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion_analysis::EmotionDistribution;

    pub(crate) fn node(id: &str, speaker: u8, text: &str, children: Vec<DialogNode>) -> DialogNode {
        DialogNode {
            id: id.into(),
            speaker: Speaker::try_from(speaker).unwrap(),
            text: text.into(),
            continued: !children.is_empty(),
            emotion: None,
            children,
        }
    }

    fn scenario() -> Scenario {
        Scenario {
            prompt_id: "p1".into(),
            prompt_text: "Mildred asks Keith about the weekend.".into(),
            characters: [
                Character {
                    name: "Mildred".into(),
                    pronoun: "she".into(),
                },
                Character {
                    name: "Keith".into(),
                    pronoun: "he".into(),
                },
            ],
        }
    }

    fn tree(turns: Vec<DialogNode>) -> DialogTree {
        DialogTree {
            scenario: scenario(),
            parameters: TreeParams::default(),
            turns,
        }
    }

    const MINIMAL: &str = r#"{
        "prompt_id": "p1",
        "prompt_text": "Two friends meet.",
        "characters": [{"name": "Ann", "pronoun": "she"}, {"name": "Bo", "pronoun": "he"}],
        "parameters": {"b": 10, "c": 3, "d": 6},
        "turns": [{"id": "n1", "speaker": 1, "text": "Hello Bo", "continued": false, "emotion": null, "children": []}]
    }"#;

    #[test]
    fn minimal_document() {
        let t = parse_tree(MINIMAL.as_bytes()).unwrap();
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.scenario.characters[1].name, "Bo");
        assert_eq!(parse_tree(serialize_tree(&t).as_bytes()).unwrap(), t);
    }

    #[test]
    fn malformed_json_reports_byte_offset() {
        let doc = b"{\n  \"prompt_id\": \"p\",\n  oops\n}";
        match parse_tree(doc) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "byte 24"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn children_without_continuation_rejected() {
        let doc = MINIMAL.replace(
            r#""children": []}"#,
            r#""children": [{"id": "n2", "speaker": 2, "text": "Hi", "continued": false}]}"#,
        );
        match parse_tree(doc.as_bytes()) {
            Err(Error::Validation { node_id, rule }) => {
                assert_eq!(node_id, "n1");
                assert!(rule.contains("continued"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structural_rules() {
        let same_speaker = tree(vec![node("a", 1, "x", vec![node("b", 1, "y", vec![])])]);
        assert!(
            matches!(same_speaker.validate(), Err(Error::Validation { node_id, .. }) if node_id == "b")
        );

        let dup = tree(vec![node("a", 1, "x", vec![]), node("a", 1, "y", vec![])]);
        assert!(dup.validate().is_err());

        let mut wide = tree(
            (0..11)
                .map(|i| node(&format!("n{i}"), 1, "x", vec![]))
                .collect(),
        );
        assert!(wide.validate().is_err());
        wide.turns.pop();
        assert!(wide.validate().is_ok());

        let many_continued = tree(
            (0..4)
                .map(|i| {
                    node(
                        &format!("n{i}"),
                        1,
                        "x",
                        vec![node(&format!("c{i}"), 2, "y", vec![])],
                    )
                })
                .collect(),
        );
        assert!(many_continued.validate().is_err());

        let mut deep = node("d7", if 7 % 2 == 1 { 1 } else { 2 }, "x", vec![]);
        for depth in (1..7).rev() {
            deep = node(
                &format!("d{depth}"),
                if depth % 2 == 1 { 1 } else { 2 },
                "x",
                vec![deep],
            );
        }
        assert!(tree(vec![deep.clone()]).validate().is_err());
        assert!(tree(vec![deep.children[0].clone()]).validate().is_ok());

        let mut same_names = tree(vec![]);
        same_names.scenario.characters[1].name = "mildred".into();
        assert!(same_names.validate().is_err());
    }

    #[test]
    fn key_map_renames_keys() {
        let doc = MINIMAL
            .replace("\"text\"", "\"utterance\"")
            .replace("\"children\"", "\"replies\"");
        assert!(parse_tree(doc.as_bytes()).is_err());
        let keys = KeyMap::from_json(br#"{"utterance": "text", "replies": "children"}"#).unwrap();
        let t = parse_tree_with_key_map(doc.as_bytes(), &keys).unwrap();
        assert_eq!(t.turns[0].text, "Hello Bo");
    }

    #[test]
    fn paths_follow_depth_first_order() {
        let t = tree(vec![
            node(
                "a",
                1,
                "x",
                vec![node("a1", 2, "y", vec![]), node("a2", 2, "z", vec![])],
            ),
            node("b", 1, "w", vec![]),
        ]);
        let ids: Vec<Vec<String>> = enumerate_paths(&t).iter().map(Path::ids).collect();
        assert_eq!(
            ids,
            vec![
                vec!["a".to_string()],
                vec!["a".into(), "a1".into()],
                vec!["a".into(), "a2".into()],
                vec!["b".into()]
            ]
        );
        let leaves = tree(vec![
            node("a", 1, "x", vec![]),
            node("b", 1, "y", vec![]),
            node("c", 1, "z", vec![]),
        ]);
        assert!(enumerate_paths(&leaves).iter().all(|p| p.nodes.len() == 1));
    }

    #[test]
    fn reference_lookup() {
        let t = tree(vec![
            node(
                "a",
                1,
                "x",
                vec![node("a1", 2, "y", vec![]), node("a2", 2, "z", vec![])],
            ),
            node("b", 1, "w", vec![]),
        ]);
        assert_eq!(references_for_context(&t, &[]).unwrap(), vec!["x", "w"]);
        assert_eq!(
            references_for_context(&t, &["a".into()]).unwrap(),
            vec!["y", "z"]
        );
        assert!(matches!(
            references_for_context(&t, &["b".into()]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            references_for_context(&t, &["q".into()]),
            Err(Error::NotFound(_))
        ));
        assert!(matches!(
            references_for_context(&t, &["b".into(), "a1".into()]),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn anonymization() {
        let sc = scenario();
        let a = node("a", 1, "Hi Keith!", vec![]);
        let b = node("b", 2, "Oh, MILDRED. keith's here? Keithy no.", vec![]);
        assert_eq!(
            anonymize_speakers(&[&a, &b], &sc),
            "[speaker1]: Hi [speaker2]!\n[speaker2]: Oh, [speaker1]. [speaker2]'s here? Keithy no."
        );
    }

    #[test]
    fn stats_arithmetic() {
        let one = tree(vec![node("a", 1, "one two three four", vec![])]);
        let s = compute_stats(&[one]).unwrap();
        assert_eq!((s.total_sentences, s.avg_sentence_length_tokens), (1, 4.0));

        let two = tree(vec![node("a", 1, "x", vec![node("b", 2, "y", vec![])])]);
        let four = tree(vec![
            node(
                "a",
                1,
                "x",
                vec![node("b", 2, "y", vec![node("c", 1, "z", vec![])])],
            ),
            node("d", 1, "w", vec![]),
        ]);
        let s = compute_stats(&[two, four]).unwrap();
        assert_eq!(s.avg_sentences_per_prompt, 3.0);
        assert_eq!(s.per_depth_counts, vec![3, 2, 1]);
        assert_eq!(s.observed_max_depth, 3);
        assert!(compute_stats(&[]).is_err());
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(round_ratio_1dp(1, 4), 0.2); // 0.25 -> 0.2
        assert_eq!(round_ratio_1dp(3, 4), 0.8); // 0.75 -> 0.8
        assert_eq!(round_ratio_1dp(320_804, 120), 2673.4);
        assert_eq!(round_ratio_1dp(17, 2), 8.5);
    }

    #[test]
    fn export_unconditioned_single_node() {
        let t = tree(vec![node("a", 1, "Hello Keith, how are you?", vec![])]);
        let ex = export_training_examples(&t, Conditioning::None, &Labels::default()).unwrap();
        assert_eq!(ex.len(), 1);
        let e = &ex[0];
        assert_eq!(e.text, "[speaker1] asks [speaker2] about the weekend.\n[speaker1]: Hello [speaker2], how are you?");
        let toks = tokenize(&e.text);
        assert_eq!(
            &toks.tokens()[e.loss_token_start..e.loss_token_end],
            tokenize("Hello [speaker2], how are you?").tokens()
        );
        assert_eq!(e.loss_token_end, toks.len());
        assert_eq!(e.conditioning, None);
    }

    #[test]
    fn export_emotion_and_lookahead() {
        let mut parent = node(
            "p",
            1,
            "What now?",
            vec![
                node("c1", 2, "yay", vec![]),
                node("c2", 2, "great", vec![]),
                node("c3", 2, "sad", vec![]),
            ],
        );
        parent.emotion = Some(Emotion::Joy);
        for (c, e) in parent
            .children
            .iter_mut()
            .zip([Emotion::Joy, Emotion::Joy, Emotion::Sadness])
        {
            c.emotion = Some(e);
        }
        let t = tree(vec![parent]);
        let labels = Labels::from_tree(&t);

        let ex = export_training_examples(&t, Conditioning::Emotion, &labels).unwrap();
        assert_eq!(ex.len(), 4);
        assert!(ex[0].text.starts_with("[emotion=joy] "));
        assert!(ex[3].text.starts_with("[emotion=sadness] "));

        let ex =
            export_training_examples(&t, Conditioning::Lookahead { gamma: 0.0 }, &labels).unwrap();
        assert_eq!(ex.len(), 1);
        assert!(ex[0].text.starts_with("[emotion=joy] "));
        assert_eq!(ex[0].conditioning.as_deref(), Some("lookahead=joy"));

        let mut partial = Labels::from_tree(&t);
        partial.insert("c3".into(), EmotionDistribution::one_hot(Emotion::Fear));
        let t2 = t.with_labels(&partial);
        assert_eq!(t2.turns[0].children[2].emotion, Some(Emotion::Fear));

        let err =
            export_training_examples(&t, Conditioning::Emotion, &Labels::default()).unwrap_err();
        assert!(err.to_string().contains("'p'"));
    }
}
