//! Emotion label algebra over labeled dialog trees.
//!
//! Labels come from an external classifier, either as a hard label or as
//! a probability vector over the seven emotions. Everything here is a
//! pure function of the labeled tree plus an explicit seed.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dialog_tree::{DialogNode, DialogTree};
use crate::error::{Error, Result};
use crate::seeding::rng;

/// The seven emotion classes, in canonical order. The order is used for
/// vector indexing and for breaking every argmax tie.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Joy,
    Sadness,
    Fear,
    Anger,
    Surprise,
    Disgust,
    Neutral,
}

pub const NUM_EMOTIONS: usize = 7;

impl Emotion {
    pub const ALL: [Emotion; NUM_EMOTIONS] = [
        Emotion::Joy,
        Emotion::Sadness,
        Emotion::Fear,
        Emotion::Anger,
        Emotion::Surprise,
        Emotion::Disgust,
        Emotion::Neutral,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Emotion> {
        Emotion::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
            Emotion::Fear => "fear",
            Emotion::Anger => "anger",
            Emotion::Surprise => "surprise",
            Emotion::Disgust => "disgust",
            Emotion::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_lowercase();
        Emotion::ALL
            .into_iter()
            .find(|e| e.as_str() == lower)
            .ok_or_else(|| Error::invalid(format!("unknown emotion '{s}'")))
    }
}

/// Non-negative score vector over [`Emotion::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmotionDistribution(pub [f64; NUM_EMOTIONS]);

impl EmotionDistribution {
    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn one_hot(e: Emotion) -> Self {
        let mut v = [0.0; NUM_EMOTIONS];
        v[e.index()] = 1.0;
        Self(v)
    }

    /// A classifier distribution: non-negative, finite, summing to 1 within 1e-6.
    pub fn from_probs(values: [f64; NUM_EMOTIONS]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(format!(
                "distribution entries must be finite and non-negative: {values:?}"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "distribution sums to {sum}, expected 1"
            )));
        }
        Ok(Self(values))
    }

    pub fn get(&self, e: Emotion) -> f64 {
        self.0[e.index()]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Largest entry; ties go to the earliest emotion in canonical order.
    pub fn argmax(&self) -> Emotion {
        let mut best = 0;
        for i in 1..NUM_EMOTIONS {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        Emotion::ALL[best]
    }

    fn add_scaled(&mut self, other: &EmotionDistribution, k: f64) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += k * b;
        }
    }

    fn divide(&mut self, n: f64) {
        self.0.iter_mut().for_each(|a| *a /= n);
    }
}

/// Per-node emotion estimates `e(x)`, keyed by node id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labels(HashMap<String, EmotionDistribution>);

/// One line of a label file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub node_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotion: Option<Emotion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<[f64; NUM_EMOTIONS]>,
}

impl Labels {
    /// Hard labels already attached to tree nodes.
    pub fn from_tree(tree: &DialogTree) -> Self {
        let mut labels = Labels::default();
        tree.walk(|n, _| {
            if let Some(e) = n.emotion {
                labels.insert(n.id.clone(), EmotionDistribution::one_hot(e));
            }
        });
        labels
    }

    pub fn from_records(records: impl IntoIterator<Item = LabelRecord>) -> Result<Self> {
        let mut labels = Labels::default();
        for rec in records {
            let dist = match (rec.emotion, rec.distribution) {
                (Some(e), None) => EmotionDistribution::one_hot(e),
                (None, Some(d)) => EmotionDistribution::from_probs(d)
                    .map_err(|e| Error::invalid(format!("label for '{}': {e}", rec.node_id)))?,
                _ => {
                    return Err(Error::invalid(format!(
                        "label for '{}' needs exactly one of emotion or distribution",
                        rec.node_id
                    )))
                }
            };
            labels.insert(rec.node_id, dist);
        }
        Ok(labels)
    }

    pub fn insert(&mut self, node_id: String, dist: EmotionDistribution) {
        self.0.insert(node_id, dist);
    }

    pub fn get(&self, node_id: &str) -> Option<&EmotionDistribution> {
        self.0.get(node_id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Layer `other` over `self`; `other` wins on conflicts.
    pub fn overlay(mut self, other: Labels) -> Labels {
        self.0.extend(other.0);
        self
    }

    fn require(&self, node: &DialogNode) -> Result<&EmotionDistribution> {
        self.get(&node.id)
            .ok_or_else(|| Error::invalid(format!("node '{}' has no emotion label", node.id)))
    }
}

/// Depth-weighted estimate of the emotions in the subtree below `node`:
/// `d(u) = mean over children v of [ e(v) + gamma * d(v) ]`, with
/// `d(leaf) = 0`.
pub fn depth_weighted_estimate(
    node: &DialogNode,
    labels: &Labels,
    gamma: f64,
) -> Result<EmotionDistribution> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!(
            "gamma must lie in [0, 1], got {gamma}"
        )));
    }
    if node.is_leaf() {
        return Err(Error::invalid(format!(
            "node '{}' has no replies to estimate from",
            node.id
        )));
    }
    estimate(node, labels, gamma)
}

fn estimate(node: &DialogNode, labels: &Labels, gamma: f64) -> Result<EmotionDistribution> {
    let mut d = EmotionDistribution::zeros();
    if node.is_leaf() {
        return Ok(d);
    }
    for child in &node.children {
        d.add_scaled(labels.require(child)?, 1.0);
        if gamma != 0.0 && !child.is_leaf() {
            d.add_scaled(&estimate(child, labels, gamma)?, gamma);
        }
    }
    d.divide(node.children.len() as f64);
    Ok(d)
}

/// The emotion with the highest depth-weighted score below `node`.
pub fn lookahead_label(node: &DialogNode, labels: &Labels, gamma: f64) -> Result<Emotion> {
    Ok(depth_weighted_estimate(node, labels, gamma)?.argmax())
}

/// Reply-emotion conditionals estimated from parent/child label pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    /// `counts[from][to]`: parent labeled `from` with a child labeled `to`.
    pub counts: [[u64; NUM_EMOTIONS]; NUM_EMOTIONS],
    pub alpha: f64,
    /// `probs[from][to] = P(to | from)` after adding `alpha` to every cell.
    /// Rows with no mass (only possible with `alpha = 0`) are all zero.
    pub probs: [[f64; NUM_EMOTIONS]; NUM_EMOTIONS],
}

/// On-disk form of a [`TransitionMatrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionFile {
    pub order: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub alpha: f64,
    pub probs: Vec<Vec<f64>>,
}

/// How [`TransitionMatrix::leads_to`] ranks source emotions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LeadsToRule {
    /// Highest `P(target | source)`.
    #[default]
    Conditional,
    /// Highest raw count `source -> target`.
    Joint,
}

impl TransitionMatrix {
    pub fn from_counts(counts: [[u64; NUM_EMOTIONS]; NUM_EMOTIONS], alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        let mut probs = [[0.0; NUM_EMOTIONS]; NUM_EMOTIONS];
        for (row, p) in counts.iter().zip(probs.iter_mut()) {
            let total: f64 = row.iter().map(|&c| c as f64 + alpha).sum();
            if total > 0.0 {
                for (c, q) in row.iter().zip(p.iter_mut()) {
                    *q = (*c as f64 + alpha) / total;
                }
            }
        }
        Ok(Self {
            counts,
            alpha,
            probs,
        })
    }

    pub fn prob(&self, from: Emotion, to: Emotion) -> f64 {
        self.probs[from.index()][to.index()]
    }

    /// Source emotions whose row has no mass.
    pub fn undefined_rows(&self) -> Vec<Emotion> {
        Emotion::ALL
            .into_iter()
            .filter(|e| self.probs[e.index()].iter().all(|&p| p == 0.0))
            .collect()
    }

    /// The source emotion most likely to lead to `target` (`T[-> target]`).
    pub fn leads_to(&self, target: Emotion) -> Emotion {
        self.leads_to_by(target, LeadsToRule::Conditional)
    }

    pub fn leads_to_by(&self, target: Emotion, rule: LeadsToRule) -> Emotion {
        let score = |from: Emotion| match rule {
            LeadsToRule::Conditional => self.prob(from, target),
            LeadsToRule::Joint => self.counts[from.index()][target.index()] as f64,
        };
        let mut best = Emotion::ALL[0];
        for e in Emotion::ALL.into_iter().skip(1) {
            if score(e) > score(best) {
                best = e;
            }
        }
        best
    }

    pub fn to_file(&self) -> TransitionFile {
        TransitionFile {
            order: Emotion::ALL.iter().map(|e| e.to_string()).collect(),
            counts: self.counts.iter().map(|r| r.to_vec()).collect(),
            alpha: self.alpha,
            probs: self.probs.iter().map(|r| r.to_vec()).collect(),
        }
    }

    /// Rebuild from a file, recomputing probabilities from the counts.
    pub fn from_file(file: &TransitionFile) -> Result<Self> {
        let order: Vec<Emotion> = file
            .order
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?;
        if order != Emotion::ALL {
            return Err(Error::invalid(format!(
                "transition file order must be {:?}",
                Emotion::ALL.map(Emotion::as_str)
            )));
        }
        if file.counts.len() != NUM_EMOTIONS || file.counts.iter().any(|r| r.len() != NUM_EMOTIONS)
        {
            return Err(Error::invalid("transition counts must be 7x7"));
        }
        let mut counts = [[0u64; NUM_EMOTIONS]; NUM_EMOTIONS];
        for (dst, src) in counts.iter_mut().zip(&file.counts) {
            dst.copy_from_slice(src);
        }
        Self::from_counts(counts, file.alpha)
    }
}

/// Count labeled parent -> child pairs over all trees. Prompt -> depth-1
/// pairs are excluded since prompts carry no emotion.
pub fn build_transition_matrix(
    trees: &[DialogTree],
    labels: &Labels,
    alpha: f64,
) -> Result<TransitionMatrix> {
    let mut counts = [[0u64; NUM_EMOTIONS]; NUM_EMOTIONS];
    for tree in trees {
        let mut missing = None;
        tree.walk(|node, _| {
            if missing.is_some() {
                return;
            }
            let Some(parent) = labels.get(&node.id) else {
                missing = Some(node.id.clone());
                return;
            };
            for child in &node.children {
                match labels.get(&child.id) {
                    Some(c) => counts[parent.argmax().index()][c.argmax().index()] += 1,
                    None => {
                        missing = Some(child.id.clone());
                        return;
                    }
                }
            }
        });
        if let Some(id) = missing {
            return Err(Error::invalid(format!("node '{id}' has no emotion label")));
        }
    }
    TransitionMatrix::from_counts(counts, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    /// Accuracy per target emotion; `None` when the emotion never appears as a target.
    pub per_emotion: BTreeMap<Emotion, Option<f64>>,
    pub counts: BTreeMap<Emotion, usize>,
    pub correct: BTreeMap<Emotion, usize>,
    /// Unweighted mean over the emotions present as targets.
    pub average: f64,
    /// Unweighted mean over the present emotions other than neutral.
    pub no_neutral_average: f64,
}

/// Per-emotion and macro-averaged accuracy of `(target, predicted)` pairs.
pub fn emotion_accuracy(records: &[(Emotion, Emotion)]) -> Result<AccuracyReport> {
    if records.is_empty() {
        return Err(Error::invalid("no accuracy records"));
    }
    let mut counts = BTreeMap::new();
    let mut correct = BTreeMap::new();
    for e in Emotion::ALL {
        counts.insert(e, 0usize);
        correct.insert(e, 0usize);
    }
    for &(target, predicted) in records {
        *counts.get_mut(&target).unwrap() += 1;
        if target == predicted {
            *correct.get_mut(&target).unwrap() += 1;
        }
    }
    let per_emotion: BTreeMap<Emotion, Option<f64>> = Emotion::ALL
        .into_iter()
        .map(|e| {
            let n = counts[&e];
            (e, (n > 0).then(|| correct[&e] as f64 / n as f64))
        })
        .collect();
    let mean = |keep: &dyn Fn(Emotion) -> bool| {
        let vals: Vec<f64> = per_emotion
            .iter()
            .filter(|(e, _)| keep(**e))
            .filter_map(|(_, v)| *v)
            .collect();
        if vals.is_empty() {
            0.0
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    };
    Ok(AccuracyReport {
        average: mean(&|_| true),
        no_neutral_average: mean(&|e| e != Emotion::Neutral),
        per_emotion,
        counts,
        correct,
    })
}

/// Equalize class sizes: every class is brought up to the majority count.
/// Majority-size classes are kept whole; smaller classes keep all their
/// items and are padded by seeded sampling with replacement. Output is
/// grouped by class in canonical order, original order within a class.
pub fn balanced_oversample<T: Clone>(
    items: &[(T, Emotion)],
    seed: u64,
) -> Result<Vec<(T, Emotion)>> {
    let mut classes: Vec<Vec<&T>> = vec![Vec::new(); NUM_EMOTIONS];
    for (item, e) in items {
        classes[e.index()].push(item);
    }
    let missing: Vec<&str> = Emotion::ALL
        .into_iter()
        .filter(|e| classes[e.index()].is_empty())
        .map(Emotion::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(Error::invalid(format!(
            "emotion classes with no utterances: {}",
            missing.join(", ")
        )));
    }
    let target = classes.iter().map(Vec::len).max().unwrap_or(0);
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(target * NUM_EMOTIONS);
    for (e, class) in Emotion::ALL.into_iter().zip(&classes) {
        out.extend(class.iter().map(|&t| (t.clone(), e)));
        for _ in class.len()..target {
            let pick = class[rng.gen_range(0..class.len())];
            out.push((pick.clone(), e));
        }
    }
    Ok(out)
}

/// Children of `context` that have at least one reply labeled `target`,
/// ranked by the fraction of their replies labeled `target` (descending,
/// ties by child order).
pub fn oracle_select(
    context: &DialogNode,
    labels: &Labels,
    target: Emotion,
) -> Result<Vec<String>> {
    if !context.continued {
        return Err(Error::invalid(format!(
            "node '{}' is not continued",
            context.id
        )));
    }
    let mut ranked: Vec<(usize, f64)> = Vec::new();
    for (i, child) in context.children.iter().enumerate() {
        if child.children.is_empty() {
            continue;
        }
        let mut hits = 0usize;
        for g in &child.children {
            if labels.require(g)?.argmax() == target {
                hits += 1;
            }
        }
        if hits > 0 {
            ranked.push((i, hits as f64 / child.children.len() as f64));
        }
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked
        .into_iter()
        .map(|(i, _)| context.children[i].id.clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialog_tree::Speaker;

    fn leaf(id: &str) -> DialogNode {
        DialogNode {
            id: id.into(),
            speaker: Speaker::Two,
            text: id.into(),
            continued: false,
            emotion: None,
            children: vec![],
        }
    }

    fn parent(id: &str, children: Vec<DialogNode>) -> DialogNode {
        DialogNode {
            continued: true,
            children,
            ..leaf(id)
        }
    }

    fn labels(pairs: &[(&str, Emotion)]) -> Labels {
        let mut l = Labels::default();
        for (id, e) in pairs {
            l.insert(id.to_string(), EmotionDistribution::one_hot(*e));
        }
        l
    }

    use Emotion::*;

    #[test]
    fn children_mean_at_zero_gamma() {
        let n = parent("p", vec![leaf("a"), leaf("b"), leaf("c")]);
        let l = labels(&[("a", Joy), ("b", Joy), ("c", Sadness)]);
        let d = depth_weighted_estimate(&n, &l, 0.0).unwrap();
        assert_eq!(d.0, [2.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(lookahead_label(&n, &l, 0.0).unwrap(), Joy);

        let single = parent("p", vec![leaf("a")]);
        let d = depth_weighted_estimate(&single, &labels(&[("a", Fear)]), 0.0).unwrap();
        assert_eq!(d, EmotionDistribution::one_hot(Fear));
    }

    #[test]
    fn exact_tie_goes_to_canonical_order() {
        let n = parent("p", vec![leaf("a"), leaf("b")]);
        let l = labels(&[("a", Sadness), ("b", Joy)]);
        assert_eq!(lookahead_label(&n, &l, 0.0).unwrap(), Joy);
    }

    #[test]
    fn two_level_discounted() {
        let n = parent(
            "root",
            vec![parent("A", vec![leaf("g1"), leaf("g2")]), leaf("B")],
        );
        let l = labels(&[("A", Joy), ("g1", Sadness), ("g2", Sadness), ("B", Anger)]);
        let d = depth_weighted_estimate(&n, &l, 0.5).unwrap();
        assert_eq!(d.0, [0.5, 0.25, 0.0, 0.5, 0.0, 0.0, 0.0]);
        assert_eq!(lookahead_label(&n, &l, 0.5).unwrap(), Joy);
    }

    #[test]
    fn estimate_errors() {
        let l = labels(&[("a", Joy)]);
        assert!(depth_weighted_estimate(&leaf("x"), &l, 0.0).is_err());
        let n = parent("p", vec![leaf("a"), leaf("missing")]);
        let err = depth_weighted_estimate(&n, &l, 0.0).unwrap_err();
        assert!(err.to_string().contains("missing"));
        assert!(depth_weighted_estimate(&n, &l, 1.5).is_err());
    }

    #[test]
    fn accuracy_examples() {
        let all: Vec<_> = Emotion::ALL.iter().map(|&e| (e, e)).collect();
        let r = emotion_accuracy(&all).unwrap();
        assert_eq!((r.average, r.no_neutral_average), (1.0, 1.0));

        let neutral: Vec<_> = Emotion::ALL.iter().map(|&e| (e, Neutral)).collect();
        let r = emotion_accuracy(&neutral).unwrap();
        assert_eq!(r.per_emotion[&Neutral], Some(1.0));
        assert_eq!(r.per_emotion[&Joy], Some(0.0));
        assert!((r.average - 1.0 / 7.0).abs() < 1e-15);
        assert_eq!(r.no_neutral_average, 0.0);

        let r = emotion_accuracy(&[(Joy, Joy), (Joy, Anger)]).unwrap();
        assert_eq!(r.per_emotion[&Joy], Some(0.5));
        assert_eq!(r.per_emotion[&Fear], None);
        assert!(emotion_accuracy(&[]).is_err());
    }

    #[test]
    fn transition_from_planted_counts() {
        let mut counts = [[0u64; 7]; 7];
        counts[Joy.index()][Joy.index()] = 3;
        counts[Joy.index()][Anger.index()] = 1;
        let t = TransitionMatrix::from_counts(counts, 0.0).unwrap();
        assert_eq!(t.prob(Joy, Joy), 0.75);
        assert_eq!(t.prob(Joy, Anger), 0.25);
        assert_eq!(t.undefined_rows().len(), 6);

        let t = TransitionMatrix::from_counts(counts, 1.0).unwrap();
        for row in t.probs {
            assert!(row.iter().all(|&p| p > 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(TransitionMatrix::from_counts(counts, -1.0).is_err());
        let back = TransitionMatrix::from_file(&t.to_file()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn leads_to_rules() {
        let mut ident = [[0u64; 7]; 7];
        (0..7).for_each(|i| ident[i][i] = 5);
        let t = TransitionMatrix::from_counts(ident, 0.0).unwrap();
        for e in Emotion::ALL {
            assert_eq!(t.leads_to(e), e);
        }
        let uniform = TransitionMatrix::from_counts([[1; 7]; 7], 0.0).unwrap();
        assert!(Emotion::ALL.iter().all(|&e| uniform.leads_to(e) == Joy));

        // Sadness column: P(sad | joy) = 2/3 beats P(sad | fear) = 4/10,
        // though fear has more raw sadness replies.
        let mut c = [[0u64; 7]; 7];
        c[Joy.index()][Sadness.index()] = 2;
        c[Joy.index()][Joy.index()] = 1;
        c[Fear.index()][Sadness.index()] = 4;
        c[Fear.index()][Fear.index()] = 6;
        let t = TransitionMatrix::from_counts(c, 0.0).unwrap();
        assert_eq!(t.leads_to(Sadness), Joy);
        assert_eq!(t.leads_to_by(Sadness, LeadsToRule::Joint), Fear);
    }

    #[test]
    fn oversample_definition() {
        let items = vec![
            ("j1", Joy),
            ("j2", Joy),
            ("j3", Joy),
            ("j4", Joy),
            ("f1", Fear),
            ("s", Sadness),
            ("a", Anger),
            ("u", Surprise),
            ("d", Disgust),
            ("n", Neutral),
        ];
        let out = balanced_oversample(&items, 7).unwrap();
        assert_eq!(out.len(), 28);
        let fear: Vec<_> = out.iter().filter(|(_, e)| *e == Fear).collect();
        assert_eq!(fear.len(), 4);
        assert!(fear.iter().all(|(t, _)| *t == "f1"));
        assert_eq!(out, balanced_oversample(&items, 7).unwrap());

        let missing = balanced_oversample(&items[..5], 0).unwrap_err().to_string();
        assert!(missing.contains("sadness") && missing.contains("neutral"));
    }

    #[test]
    fn oracle_ranking() {
        let ctx = parent(
            "ctx",
            vec![
                parent("first", vec![leaf("f1"), leaf("f2")]),
                parent("second", vec![leaf("s1"), leaf("s2")]),
                parent("third", vec![leaf("t1")]),
                leaf("fourth"),
            ],
        );
        let l = labels(&[
            ("f1", Joy),
            ("f2", Anger),
            ("s1", Joy),
            ("s2", Joy),
            ("t1", Fear),
        ]);
        assert_eq!(
            oracle_select(&ctx, &l, Joy).unwrap(),
            vec!["second", "first"]
        );
        assert!(oracle_select(&ctx, &l, Disgust).unwrap().is_empty());
        assert!(oracle_select(&leaf("x"), &l, Joy).is_err());
    }

    #[test]
    fn label_records() {
        let recs = vec![
            LabelRecord {
                node_id: "a".into(),
                emotion: Some(Fear),
                distribution: None,
            },
            LabelRecord {
                node_id: "b".into(),
                emotion: None,
                distribution: Some([0.1, 0.6, 0.1, 0.1, 0.05, 0.05, 0.0]),
            },
        ];
        let l = Labels::from_records(recs).unwrap();
        assert_eq!(l.get("a").unwrap().argmax(), Fear);
        assert_eq!(l.get("b").unwrap().argmax(), Sadness);
        let bad = LabelRecord {
            node_id: "c".into(),
            emotion: None,
            distribution: Some([0.5, 0.6, 0.0, 0.0, 0.0, 0.0, 0.0]),
        };
        assert!(Labels::from_records(vec![bad]).is_err());
        assert_eq!("Anger".parse::<Emotion>().unwrap(), Anger);
        assert!("happy".parse::<Emotion>().is_err());
    }
}
