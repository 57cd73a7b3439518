//! Command-line front end. Every command computes its full output in
//! memory and only then writes it (atomically when `--output` is given).
//!
//! Exit codes: 0 success, 2 input or validation error, 1 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};

use branchmatch::dialog_tree::{
    compute_stats, export_training_examples, parse_tree, parse_tree_with_key_map, Conditioning,
    DialogNode, DialogTree, KeyMap,
};
use branchmatch::emotion_analysis::{
    balanced_oversample, build_transition_matrix, depth_weighted_estimate, emotion_accuracy,
    Emotion, LabelRecord, Labels, LeadsToRule, TransitionFile, TransitionMatrix,
};
use branchmatch::io::{
    assemble_contexts, read_jsonl, to_json_pretty, to_jsonl, write_atomic, GenerationRecord,
    LookaheadRecord, ReferenceRecord, UtteranceRecord,
};
use branchmatch::matching_eval::{curve_to_csv, CorpusReport};
use branchmatch::retrieval_baseline::{
    build_index, load_embeddings, retrieve, ContextIndex, ContextText, RetrievalMode,
};
use branchmatch::{
    score_corpus, sweep_generations, sweep_references, EvalContext, RefSampling, Scorer,
};

#[derive(Parser)]
#[command(
    name = "branchmatch",
    version,
    about = "Matching-metric evaluation and analytics for branching dialog trees"
)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for per-context scoring (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Multiply reported metric values (1 or 100).
    #[arg(long, global = true, default_value = "1", value_parser = parse_scale)]
    scale: f64,
    /// JSON file mapping alternative tree keys onto canonical ones.
    #[arg(long, global = true)]
    key_map: Option<PathBuf>,
    /// Write output here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn parse_scale(s: &str) -> Result<f64, String> {
    match s {
        "1" => Ok(1.0),
        "100" => Ok(100.0),
        _ => Err(format!("scale must be 1 or 100, got '{s}'")),
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScorerArg {
    Bleu4,
    #[value(name = "rougeL")]
    RougeL,
    Exact,
}

impl From<ScorerArg> for Scorer {
    fn from(s: ScorerArg) -> Scorer {
        match s {
            ScorerArg::Bleu4 => Scorer::Bleu4,
            ScorerArg::RougeL => Scorer::RougeL,
            ScorerArg::Exact => Scorer::Exact,
        }
    }
}

#[derive(Args)]
struct EvalInputs {
    /// JSONL of {"context_id", "generations"}.
    #[arg(long)]
    generations: PathBuf,
    /// JSONL of {"context_id", "references"} or {"context_id", "path_ids"[, "prompt_id"]}.
    #[arg(long)]
    references: PathBuf,
    /// Tree files that path-addressed references resolve against.
    #[arg(long, num_args = 1..)]
    trees: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "bleu4")]
    scorer: ScorerArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplingArg {
    Random,
    Prefix,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditioningArg {
    None,
    Emotion,
    Lookahead,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    MostLikely,
    Emotion,
    Transition,
}

#[derive(Subcommand)]
enum Command {
    /// Score generations against reference sets with the matching metric.
    Score(EvalInputs),
    /// Corpus statistics over tree files.
    Stats {
        #[arg(required = false)]
        trees: Vec<PathBuf>,
    },
    /// Matching metric as a function of the number of references (CSV).
    SweepRefs {
        #[command(flatten)]
        inputs: EvalInputs,
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
        #[arg(long, value_enum, default_value = "random")]
        sampling: SamplingArg,
    },
    /// Matching metric as a function of the number of generations (CSV).
    SweepGens {
        #[command(flatten)]
        inputs: EvalInputs,
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
    },
    /// Depth-weighted lookahead emotion for every node with replies (JSONL).
    LookaheadLabel {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
    },
    /// Emotion transition matrix over labeled trees (JSON).
    Transition {
        #[arg(long, num_args = 1.., required = true)]
        trees: Vec<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Print the source emotion most likely to lead to this one instead.
        #[arg(long)]
        leads_to: Option<String>,
        /// Rank sources by raw count rather than conditional probability.
        #[arg(long)]
        joint: bool,
    },
    /// Per-emotion accuracy of predictions against targets (JSON).
    Accuracy {
        /// JSONL of {"id", "emotion"}.
        #[arg(long)]
        targets: PathBuf,
        /// JSONL of {"id", "emotion"}.
        #[arg(long)]
        predictions: PathBuf,
    },
    /// Embedding-centroid response retrieval (JSON).
    Retrieve {
        /// Prebuilt index cache.
        #[arg(long, conflicts_with_all = ["trees", "save_index"])]
        index: Option<PathBuf>,
        /// Tree files to index when no cache is given.
        #[arg(long, num_args = 1..)]
        trees: Vec<PathBuf>,
        /// JSONL of {"node_id", "emotion"} or {"node_id", "distribution"}.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Word vectors in text format (`word v1 ... vd` per line).
        #[arg(long)]
        embeddings: PathBuf,
        /// Also write the built index to this cache file.
        #[arg(long)]
        save_index: Option<PathBuf>,
        /// Embed raw texts instead of speaker-anonymized ones when building.
        #[arg(long)]
        raw_context: bool,
        /// Query history, one utterance per flag.
        #[arg(long, required = true)]
        query: Vec<String>,
        #[arg(long, value_enum, default_value = "most-likely")]
        mode: ModeArg,
        /// Target emotion for the emotion and transition modes.
        #[arg(long)]
        emotion: Option<String>,
        /// Transition matrix file (required for `--mode transition`).
        #[arg(long)]
        transition: Option<PathBuf>,
    },
    /// Emotion-balanced sample of labeled utterances (JSONL).
    Oversample {
        /// JSONL of {"id", "text", "emotion"}.
        #[arg(long, conflicts_with = "trees")]
        utterances: Option<PathBuf>,
        #[arg(long, num_args = 1..)]
        trees: Vec<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Loss-masked training examples from a tree (JSONL).
    ExportTraining {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "none")]
        conditioning: ConditioningArg,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure {
        code: 2,
        error: e.into(),
    }
}

fn internal<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure {
        code: 1,
        error: e.into(),
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input)
}

fn lib<T>(r: branchmatch::Result<T>, what: impl FnOnce() -> String) -> CliResult<T> {
    r.map_err(|e| match e {
        branchmatch::Error::Io(_) => internal(anyhow::Error::new(e).context(what())),
        _ => input(anyhow::Error::new(e).context(what())),
    })
}

struct Ctx {
    seed: u64,
    scale: f64,
    key_map: Option<KeyMap>,
}

impl Ctx {
    fn tree(&self, path: &Path) -> CliResult<DialogTree> {
        let bytes = read(path)?;
        let parsed = match &self.key_map {
            Some(k) => parse_tree_with_key_map(&bytes, k),
            None => parse_tree(&bytes),
        };
        lib(parsed, || format!("loading tree {}", path.display()))
    }

    fn trees(&self, paths: &[PathBuf]) -> CliResult<Vec<DialogTree>> {
        paths.iter().map(|p| self.tree(p)).collect()
    }
}

fn load_labels(path: Option<&Path>) -> CliResult<Labels> {
    let Some(path) = path else {
        return Ok(Labels::default());
    };
    let bytes = read(path)?;
    let records: Vec<LabelRecord> = lib(read_jsonl(&bytes), || {
        format!("reading labels {}", path.display())
    })?;
    lib(Labels::from_records(records), || {
        format!("labels {}", path.display())
    })
}

/// Tree-embedded labels overlaid with an optional label file.
fn labels_for(trees: &[DialogTree], path: Option<&Path>) -> CliResult<Labels> {
    let file = load_labels(path)?;
    let mut merged = Labels::default();
    for t in trees {
        merged = merged.overlay(Labels::from_tree(t));
    }
    Ok(merged.overlay(file))
}

fn emotion_arg(s: &str) -> CliResult<Emotion> {
    lib(s.parse(), || "parsing emotion".into())
}

fn eval_contexts(ctx: &Ctx, inputs: &EvalInputs) -> CliResult<Vec<EvalContext>> {
    let gens: Vec<GenerationRecord> = lib(read_jsonl(&read(&inputs.generations)?), || {
        format!("reading {}", inputs.generations.display())
    })?;
    let refs: Vec<ReferenceRecord> = lib(read_jsonl(&read(&inputs.references)?), || {
        format!("reading {}", inputs.references.display())
    })?;
    let trees = ctx.trees(&inputs.trees)?;
    lib(assemble_contexts(&gens, &refs, &trees), || {
        "resolving references".into()
    })
}

fn scaled(mut report: CorpusReport, k: f64) -> CorpusReport {
    if k != 1.0 {
        report.macro_mean *= k;
        for r in &mut report.per_context {
            r.total *= k;
            r.mean_per_reference *= k;
            r.assignments.iter_mut().for_each(|a| a.score *= k);
        }
    }
    report
}

fn lookahead_records(
    tree: &DialogTree,
    labels: &Labels,
    gamma: f64,
) -> CliResult<Vec<LookaheadRecord>> {
    let mut nodes: Vec<&DialogNode> = Vec::new();
    tree.walk(|n, _| {
        if !n.is_leaf() {
            nodes.push(n);
        }
    });
    nodes
        .into_iter()
        .map(|n| {
            let d = lib(depth_weighted_estimate(n, labels, gamma), || {
                format!("node '{}'", n.id)
            })?;
            Ok(LookaheadRecord {
                node_id: n.id.clone(),
                lookahead_emotion: d.argmax(),
                d_vector: d,
            })
        })
        .collect()
}

fn run(cli: Cli) -> CliResult<String> {
    let key_map = match &cli.key_map {
        Some(p) => Some(lib(KeyMap::from_json(&read(p)?), || {
            format!("key map {}", p.display())
        })?),
        None => None,
    };
    let ctx = Ctx {
        seed: cli.seed,
        scale: cli.scale,
        key_map,
    };

    match cli.command {
        Command::Score(inputs) => {
            let contexts = eval_contexts(&ctx, &inputs)?;
            let scorer = Scorer::from(inputs.scorer);
            let report = lib(score_corpus(&contexts, &scorer), || "scoring".into())?;
            Ok(to_json_pretty(&scaled(report, ctx.scale)))
        }
        Command::Stats { trees } => {
            if trees.is_empty() {
                return Err(input(anyhow::anyhow!("stats needs at least one tree file")));
            }
            let trees = ctx.trees(&trees)?;
            let stats = lib(compute_stats(&trees), || "computing statistics".into())?;
            Ok(to_json_pretty(&stats))
        }
        Command::SweepRefs {
            inputs,
            counts,
            sampling,
        } => {
            let contexts = eval_contexts(&ctx, &inputs)?;
            let mode = match sampling {
                SamplingArg::Random => RefSampling::Random,
                SamplingArg::Prefix => RefSampling::Prefix,
            };
            let scorer = Scorer::from(inputs.scorer);
            let curve = lib(
                sweep_references(&contexts, &scorer, &counts, ctx.seed, mode),
                || "reference sweep".into(),
            )?;
            Ok(curve_to_csv(&curve, ctx.scale))
        }
        Command::SweepGens { inputs, counts } => {
            let contexts = eval_contexts(&ctx, &inputs)?;
            let scorer = Scorer::from(inputs.scorer);
            let curve = lib(sweep_generations(&contexts, &scorer, &counts), || {
                "generation sweep".into()
            })?;
            Ok(curve_to_csv(&curve, ctx.scale))
        }
        Command::LookaheadLabel {
            tree,
            labels,
            gamma,
        } => {
            let tree = ctx.tree(&tree)?;
            let labels = labels_for(std::slice::from_ref(&tree), labels.as_deref())?;
            Ok(to_jsonl(&lookahead_records(&tree, &labels, gamma)?))
        }
        Command::Transition {
            trees,
            labels,
            alpha,
            leads_to,
            joint,
        } => {
            let trees = ctx.trees(&trees)?;
            let labels = labels_for(&trees, labels.as_deref())?;
            let t = lib(build_transition_matrix(&trees, &labels, alpha), || {
                "transition matrix".into()
            })?;
            match leads_to {
                Some(e) => {
                    let rule = if joint {
                        LeadsToRule::Joint
                    } else {
                        LeadsToRule::Conditional
                    };
                    Ok(format!("{}\n", t.leads_to_by(emotion_arg(&e)?, rule)))
                }
                None => Ok(to_json_pretty(&t.to_file())),
            }
        }
        Command::Accuracy {
            targets,
            predictions,
        } => {
            let t: Vec<UtteranceRecord> = lib(read_jsonl(&read(&targets)?), || {
                format!("reading {}", targets.display())
            })?;
            let p: Vec<UtteranceRecord> = lib(read_jsonl(&read(&predictions)?), || {
                format!("reading {}", predictions.display())
            })?;
            let predicted: std::collections::HashMap<&str, Emotion> =
                p.iter().map(|r| (r.id.as_str(), r.emotion)).collect();
            let pairs = t
                .iter()
                .map(|r| {
                    predicted
                        .get(r.id.as_str())
                        .map(|&e| (r.emotion, e))
                        .ok_or_else(|| input(anyhow::anyhow!("no prediction for id '{}'", r.id)))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let report = lib(emotion_accuracy(&pairs), || "accuracy".into())?;
            Ok(to_json_pretty(&report))
        }
        Command::Retrieve {
            index,
            trees,
            labels,
            embeddings,
            save_index,
            raw_context,
            query,
            mode,
            emotion,
            transition,
        } => {
            let table = lib(load_embeddings(&read(&embeddings)?), || {
                format!("embeddings {}", embeddings.display())
            })?;
            let index = match index {
                Some(p) => lib(ContextIndex::from_json(&read(&p)?), || {
                    format!("index {}", p.display())
                })?,
                None => {
                    if trees.is_empty() {
                        return Err(input(anyhow::anyhow!("retrieve needs --index or --trees")));
                    }
                    let trees = ctx.trees(&trees)?;
                    let labels = load_labels(labels.as_deref())?;
                    let text = if raw_context {
                        ContextText::Raw
                    } else {
                        ContextText::Anonymized
                    };
                    lib(build_index(&trees, &labels, &table, text), || {
                        "building index".into()
                    })?
                }
            };
            let matrix;
            let target = emotion.as_deref().map(emotion_arg).transpose()?;
            let mode = match (mode, target) {
                (ModeArg::MostLikely, _) => RetrievalMode::MostLikely,
                (ModeArg::Emotion, Some(e)) => RetrievalMode::WithEmotion(e),
                (ModeArg::Transition, Some(e)) => {
                    let path = transition.ok_or_else(|| {
                        input(anyhow::anyhow!("--mode transition needs --transition"))
                    })?;
                    let file: TransitionFile = serde_json::from_slice(&read(&path)?)
                        .with_context(|| format!("transition file {}", path.display()))
                        .map_err(input)?;
                    matrix = lib(TransitionMatrix::from_file(&file), || {
                        format!("transition file {}", path.display())
                    })?;
                    RetrievalMode::WithTransition(e, &matrix)
                }
                (_, None) => return Err(input(anyhow::anyhow!("this mode needs --emotion"))),
            };
            let result = lib(retrieve(&index, &table, &query, mode), || {
                "retrieval".into()
            })?;
            if let Some(p) = save_index {
                write_atomic(&p, index.to_json().as_bytes())
                    .with_context(|| format!("writing {}", p.display()))
                    .map_err(internal)?;
            }
            Ok(to_json_pretty(&result))
        }
        Command::Oversample {
            utterances,
            trees,
            labels,
        } => {
            let items: Vec<(UtteranceRecord, Emotion)> = match utterances {
                Some(p) => {
                    let recs: Vec<UtteranceRecord> = lib(read_jsonl(&read(&p)?), || {
                        format!("reading {}", p.display())
                    })?;
                    recs.into_iter()
                        .map(|r| {
                            let e = r.emotion;
                            (r, e)
                        })
                        .collect()
                }
                None => {
                    if trees.is_empty() {
                        return Err(input(anyhow::anyhow!(
                            "oversample needs --utterances or --trees"
                        )));
                    }
                    let trees = ctx.trees(&trees)?;
                    let labels = labels_for(&trees, labels.as_deref())?;
                    let mut items = Vec::new();
                    for t in &trees {
                        let mut missing = None;
                        t.walk(|n, _| match labels.get(&n.id) {
                            Some(d) => {
                                let e = d.argmax();
                                items.push((
                                    UtteranceRecord {
                                        id: n.id.clone(),
                                        text: Some(n.text.clone()),
                                        emotion: e,
                                    },
                                    e,
                                ));
                            }
                            None => {
                                missing.get_or_insert_with(|| n.id.clone());
                            }
                        });
                        if let Some(id) = missing {
                            return Err(input(anyhow::anyhow!("node '{id}' has no emotion label")));
                        }
                    }
                    items
                }
            };
            let sample = lib(balanced_oversample(&items, ctx.seed), || {
                "oversampling".into()
            })?;
            let records: Vec<UtteranceRecord> = sample.into_iter().map(|(r, _)| r).collect();
            Ok(to_jsonl(&records))
        }
        Command::ExportTraining {
            tree,
            labels,
            conditioning,
            gamma,
        } => {
            let tree = ctx.tree(&tree)?;
            let labels = labels_for(std::slice::from_ref(&tree), labels.as_deref())?;
            let cond = match conditioning {
                ConditioningArg::None => Conditioning::None,
                ConditioningArg::Emotion => Conditioning::Emotion,
                ConditioningArg::Lookahead => Conditioning::Lookahead { gamma },
            };
            let examples = lib(export_training_examples(&tree, cond, &labels), || {
                "exporting".into()
            })?;
            Ok(to_jsonl(&examples))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let output = cli.output.clone();
    let result = run(cli).and_then(|text| match &output {
        Some(p) => write_atomic(p, text.as_bytes())
            .with_context(|| format!("writing {}", p.display()))
            .map_err(internal),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
