//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use branchmatch::dialog_tree::{Character, DialogNode, DialogTree, Scenario, Speaker, TreeParams};
use branchmatch::emotion_analysis::Emotion;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const WORDS: &[&str] = &[
    "hey", "what", "are", "you", "doing", "tonight", "nothing", "much", "want", "to", "get",
    "food", "sure", "no", "thanks", "i", "am", "tired", "really", "why", "not", "okay", "fine",
    "great", "idea", "maybe", "later", "the", "movie", "was", "awful", "!", "?", ".",
];

pub fn sentence(rng: &mut impl Rng, min: usize, max: usize) -> String {
    let n = rng.gen_range(min..=max);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn scenario(id: &str) -> Scenario {
    Scenario {
        prompt_id: id.to_string(),
        prompt_text: "Mildred and Keith talk about dinner plans.".into(),
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

/// Random valid tree respecting `params`, with every node labeled.
/// `branch` caps the children per continued node (<= params.b).
pub fn random_tree(rng: &mut impl Rng, id: &str, params: TreeParams, branch: usize) -> DialogTree {
    let mut counter = 0usize;
    let turns = children(rng, id, &mut counter, params, branch, 1, Speaker::One);
    DialogTree {
        scenario: scenario(id),
        parameters: params,
        turns,
    }
}

fn children(
    rng: &mut impl Rng,
    prefix: &str,
    counter: &mut usize,
    p: TreeParams,
    branch: usize,
    depth: usize,
    speaker: Speaker,
) -> Vec<DialogNode> {
    let n = rng.gen_range(1..=branch.min(p.b));
    let mut continued_budget = if depth < p.d { p.c } else { 0 };
    (0..n)
        .map(|_| {
            *counter += 1;
            let id = format!("{prefix}-n{counter}");
            let continued = continued_budget > 0 && rng.gen_bool(0.6);
            if continued {
                continued_budget -= 1;
            }
            let kids = if continued {
                children(rng, prefix, counter, p, branch, depth + 1, speaker.other())
            } else {
                Vec::new()
            };
            let mut text = sentence(rng, 1, 10);
            if rng.gen_bool(0.2) {
                text = format!(
                    "{} {text}",
                    ["keith", "Mildred", "KEITH's", "mildred,"][rng.gen_range(0..4)]
                );
            }
            DialogNode {
                id,
                speaker,
                text,
                continued,
                emotion: Some(Emotion::ALL[rng.gen_range(0..7)]),
                children: kids,
            }
        })
        .collect()
}

/// Exhaustive maximum over injective assignments of size min(rows, cols).
pub fn brute_force_max(w: &[Vec<f64>]) -> f64 {
    let rows = w.len();
    let cols = w[0].len();
    if rows > cols {
        let t: Vec<Vec<f64>> = (0..cols)
            .map(|c| (0..rows).map(|r| w[r][c]).collect())
            .collect();
        return brute_force_max(&t);
    }
    fn go(w: &[Vec<f64>], r: usize, used: &mut [bool]) -> f64 {
        if r == w.len() {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                best = best.max(w[r][c] + go(w, r + 1, used));
                used[c] = false;
            }
        }
        best
    }
    go(w, 0, &mut vec![false; cols])
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen::<f64>()).collect())
        .collect()
}

/// Random soft labels for every node of `tree`.
pub fn soft_labels(rng: &mut impl Rng, tree: &DialogTree) -> branchmatch::emotion_analysis::Labels {
    use branchmatch::emotion_analysis::{EmotionDistribution, Labels};
    let mut labels = Labels::default();
    tree.walk(|n, _| {
        let raw: [f64; 7] = std::array::from_fn(|_| rng.gen::<f64>());
        let s: f64 = raw.iter().sum();
        labels.insert(n.id.clone(), EmotionDistribution(raw.map(|x| x / s)));
    });
    labels
}

/// Closed form of the depth-weighted estimate: every descendant `v` at
/// relative depth `k` contributes `gamma^(k-1) * e(v)` times the product of
/// `1 / |children(a)|` over the ancestors `a` from `node` down to `v`'s parent.
pub fn depth_weighted_oracle(
    node: &DialogNode,
    labels: &branchmatch::emotion_analysis::Labels,
    gamma: f64,
) -> [f64; 7] {
    let mut out = [0.0; 7];
    let mut stack: Vec<(&DialogNode, i32, f64)> = node
        .children
        .iter()
        .map(|c| (c, 1, 1.0 / node.children.len() as f64))
        .collect();
    while let Some((v, k, weight)) = stack.pop() {
        let e = labels.get(&v.id).unwrap();
        let w = gamma.powi(k - 1) * weight;
        for (o, x) in out.iter_mut().zip(e.0) {
            *o += w * x;
        }
        for c in &v.children {
            stack.push((c, k + 1, weight / v.children.len() as f64));
        }
    }
    out
}

/// Random embedding table over the sentence vocabulary plus `[speaker1]`-style pieces.
pub fn embedding_text(rng: &mut impl Rng, dim: usize) -> String {
    let mut out = String::new();
    for w in WORDS.iter().chain(&[
        "speaker1", "speaker2", "dinner", "plans", "talk", "about", "and",
    ]) {
        out.push_str(w);
        for _ in 0..dim {
            out.push_str(&format!(" {:.4}", rng.gen_range(-1.0f32..1.0)));
        }
        out.push('\n');
    }
    out
}

/// Synthetic index with random centroids and random response emotions.
pub fn random_index(
    rng: &mut impl Rng,
    n: usize,
    dim: usize,
) -> branchmatch::retrieval_baseline::ContextIndex {
    use branchmatch::retrieval_baseline::{ContextIndex, IndexItem, INDEX_FORMAT_VERSION};
    let items = (0..n)
        .map(|i| IndexItem {
            item_id: format!("p/n{i:04}"),
            centroid: (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect(),
            response_text: sentence(rng, 1, 6),
            response_emotion: Some(Emotion::ALL[rng.gen_range(0..7)]),
        })
        .collect();
    ContextIndex {
        format_version: INDEX_FORMAT_VERSION,
        dim,
        items,
    }
}

/// Input files for every CLI command, written into `dir`.
pub struct CliFixture {
    pub tree: std::path::PathBuf,
    pub tree2: std::path::PathBuf,
    pub generations: std::path::PathBuf,
    pub references: std::path::PathBuf,
    pub embeddings: std::path::PathBuf,
    pub targets: std::path::PathBuf,
    pub predictions: std::path::PathBuf,
}

pub fn write_cli_fixture(dir: &std::path::Path) -> CliFixture {
    use branchmatch::dialog_tree::{enumerate_paths, serialize_tree};
    let mut rng = rng(101);
    // Generated until every emotion occurs, so oversampling has all classes.
    let t1 = (0..)
        .map(|i| {
            random_tree(
                &mut rng,
                &format!("prompt{i}"),
                TreeParams { b: 5, c: 2, d: 4 },
                5,
            )
        })
        .find(|t| {
            let mut seen = std::collections::HashSet::new();
            t.walk(|n, _| {
                seen.insert(n.emotion);
            });
            seen.len() == 7
        })
        .unwrap();
    let t2 = random_tree(&mut rng, "second", TreeParams { b: 3, c: 2, d: 3 }, 3);
    let w = |name: &str, body: String| {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let tree = w("tree.json", serialize_tree(&t1));
    let tree2 = w("tree2.json", serialize_tree(&t2));

    let mut gens = String::new();
    let mut refs = String::new();
    let mut k = 0;
    for path in enumerate_paths(&t1)
        .iter()
        .filter(|p| p.last().children.len() >= 2)
    {
        k += 1;
        let ids: Vec<String> = path.ids();
        refs.push_str(&format!(
            "{}\n",
            serde_json::json!({"context_id": format!("ctx{k}"), "path_ids": ids, "prompt_id": t1.scenario.prompt_id})
        ));
        let g: Vec<String> = (0..4).map(|_| sentence(&mut rng, 1, 8)).collect();
        gens.push_str(&format!(
            "{}\n",
            serde_json::json!({"context_id": format!("ctx{k}"), "generations": g})
        ));
    }
    refs.push_str(&format!(
        "{}\n",
        serde_json::json!({"context_id": "direct", "references": ["sure thing", "no way", "maybe later"]})
    ));
    gens.push_str(&format!(
        "{}\n",
        serde_json::json!({"context_id": "direct", "generations": ["no way", "sure", "maybe later", "fine"]})
    ));
    let generations = w("gens.jsonl", gens);
    let references = w("refs.jsonl", refs);
    let embeddings = w("vectors.txt", embedding_text(&mut rng, 6));

    let mut targets = String::new();
    let mut predictions = String::new();
    for i in 0..70 {
        let e = Emotion::ALL[i % 7];
        let p = if rng.gen_bool(0.5) {
            e
        } else {
            Emotion::ALL[rng.gen_range(0..7)]
        };
        targets.push_str(&format!(
            "{}\n",
            serde_json::json!({"id": format!("u{i}"), "emotion": e})
        ));
        predictions.push_str(&format!(
            "{}\n",
            serde_json::json!({"id": format!("u{i}"), "emotion": p})
        ));
    }
    let targets = w("targets.jsonl", targets);
    let predictions = w("predictions.jsonl", predictions);
    CliFixture {
        tree,
        tree2,
        generations,
        references,
        embeddings,
        targets,
        predictions,
    }
}

/// Argument lists covering every subcommand, all reading from `f`.
pub fn cli_invocations(f: &CliFixture, dir: &std::path::Path) -> Vec<(&'static str, Vec<String>)> {
    let s = |p: &std::path::Path| p.to_string_lossy().into_owned();
    let eval = |extra: &[&str]| {
        let mut v = vec![
            "--generations".to_string(),
            s(&f.generations),
            "--references".into(),
            s(&f.references),
            "--trees".into(),
            s(&f.tree),
        ];
        v.extend(extra.iter().map(|x| x.to_string()));
        v
    };
    let transition = dir.join("transition.json");
    let mut out = vec![
        (
            "score",
            [vec!["score".to_string()], eval(&["--scorer", "bleu4"])].concat(),
        ),
        (
            "score-rouge",
            [
                vec!["score".to_string()],
                eval(&["--scorer", "rougeL", "--scale", "100"]),
            ]
            .concat(),
        ),
        ("stats", vec!["stats".into(), s(&f.tree), s(&f.tree2)]),
        (
            "sweep-refs",
            [
                vec!["sweep-refs".to_string()],
                eval(&["--counts", "1,2", "--seed", "7"]),
            ]
            .concat(),
        ),
        (
            "sweep-gens",
            [
                vec!["sweep-gens".to_string()],
                eval(&["--counts", "1,2,3,4"]),
            ]
            .concat(),
        ),
        (
            "lookahead-label",
            vec![
                "lookahead-label".into(),
                "--tree".into(),
                s(&f.tree),
                "--gamma".into(),
                "0.5".into(),
            ],
        ),
        (
            "transition",
            vec![
                "transition".into(),
                "--trees".into(),
                s(&f.tree),
                s(&f.tree2),
            ],
        ),
        (
            "leads-to",
            vec![
                "transition".into(),
                "--trees".into(),
                s(&f.tree),
                "--leads-to".into(),
                "joy".into(),
            ],
        ),
        (
            "accuracy",
            vec![
                "accuracy".into(),
                "--targets".into(),
                s(&f.targets),
                "--predictions".into(),
                s(&f.predictions),
            ],
        ),
        (
            "oversample",
            vec![
                "oversample".into(),
                "--trees".into(),
                s(&f.tree),
                "--seed".into(),
                "3".into(),
            ],
        ),
        (
            "export-training",
            vec![
                "export-training".into(),
                "--tree".into(),
                s(&f.tree),
                "--conditioning".into(),
                "lookahead".into(),
                "--gamma".into(),
                "0.5".into(),
            ],
        ),
        (
            "retrieve",
            vec![
                "retrieve".into(),
                "--trees".into(),
                s(&f.tree),
                s(&f.tree2),
                "--embeddings".into(),
                s(&f.embeddings),
                "--query".into(),
                "what are you doing tonight".into(),
                "--mode".into(),
                "emotion".into(),
                "--emotion".into(),
                "joy".into(),
            ],
        ),
    ];
    out.push((
        "retrieve-transition",
        vec![
            "retrieve".into(),
            "--trees".into(),
            s(&f.tree),
            "--embeddings".into(),
            s(&f.embeddings),
            "--query".into(),
            "no thanks".into(),
            "--mode".into(),
            "transition".into(),
            "--emotion".into(),
            "anger".into(),
            "--transition".into(),
            s(&transition),
        ],
    ));
    out
}

/// A tree whose parent/child label pairs are exactly `planted`.
pub fn planted_tree(planted: &[[u64; 7]; 7]) -> DialogTree {
    let mut turns = Vec::new();
    let mut next = 0;
    for from in Emotion::ALL {
        let mut children = Vec::new();
        for to in Emotion::ALL {
            for _ in 0..planted[from.index()][to.index()] {
                next += 1;
                children.push(DialogNode {
                    id: format!("c{next}"),
                    speaker: Speaker::Two,
                    text: "reply".into(),
                    continued: false,
                    emotion: Some(to),
                    children: vec![],
                });
            }
        }
        next += 1;
        turns.push(DialogNode {
            id: format!("p{next}"),
            speaker: Speaker::One,
            text: "opener".into(),
            continued: !children.is_empty(),
            emotion: Some(from),
            children,
        });
    }
    DialogTree {
        scenario: Scenario {
            prompt_id: "planted".into(),
            prompt_text: "A and B meet.".into(),
            characters: [
                Character {
                    name: "A".into(),
                    pronoun: "she".into(),
                },
                Character {
                    name: "B".into(),
                    pronoun: "he".into(),
                },
            ],
        },
        parameters: TreeParams {
            b: 1000,
            c: 1000,
            d: 2,
        },
        turns,
    }
}
