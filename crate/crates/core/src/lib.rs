//! Evaluation and analysis toolkit for highly-branching dialog trees.
//!
//! - [`assignment`]: rectangular maximum-weight assignment (Hungarian).
//! - [`text_metrics`]: tokenizer plus BLEU-4, ROUGE-L F1 and exact-match scorers.
//! - [`matching_eval`]: the multi-reference matching metric and its sweeps.
//! - [`dialog_tree`]: tree model, parsing, statistics and training export.
//! - [`emotion_analysis`]: lookahead estimates, transitions, accuracy, oversampling.
//! - [`retrieval_baseline`]: embedding-centroid response retrieval.
//! - [`io`]: JSON/JSONL record formats shared by the command-line tool.

pub mod assignment;
pub mod dialog_tree;
pub mod emotion_analysis;
pub mod error;
pub mod io;
pub mod matching_eval;
pub mod retrieval_baseline;
pub mod seeding;
pub mod text_metrics;

pub use assignment::{solve_max_assignment, Matching, WeightMatrix};
pub use error::{Error, Result};
pub use matching_eval::{
    score_context, score_corpus, sweep_generations, sweep_references, CorpusReport, CurvePoint,
    EvalContext, MatchReport, RefSampling,
};
pub use text_metrics::{
    bleu4, exact_match, rouge_l_f1, tokenize, PairwiseScorer, Scorer, TokenSequence,
};
