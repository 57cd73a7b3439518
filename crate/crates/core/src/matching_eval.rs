//! The matching metric: each reference is matched to at most one
//! generation and each generation to at most one reference, maximizing
//! the summed pairwise scores. Duplicated generations therefore cannot
//! claim several references, and extra generations can only help.

use std::collections::HashSet;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::{solve_max_assignment, WeightMatrix};
use crate::error::{Error, Result};
use crate::seeding::sub_rng;
use crate::text_metrics::{tokenize, PairwiseScorer, TokenSequence};

/// One evaluation item: a history, its gold reference set, and model outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalContext {
    pub context_id: String,
    #[serde(default)]
    pub history: Vec<String>,
    pub references: Vec<String>,
    pub generations: Vec<String>,
}

impl EvalContext {
    pub fn new(
        context_id: impl Into<String>,
        references: Vec<String>,
        generations: Vec<String>,
    ) -> Self {
        Self {
            context_id: context_id.into(),
            history: Vec::new(),
            references,
            generations,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.references.is_empty() {
            return Err(Error::invalid("context has no references"));
        }
        if self.generations.is_empty() {
            return Err(Error::invalid("context has no generations"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub reference_index: usize,
    pub generation_index: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub context_id: String,
    pub scorer_name: String,
    pub assignments: Vec<Assignment>,
    pub total: f64,
    /// `total / n_references`; unmatched references count as zero.
    pub mean_per_reference: f64,
    pub n_references: usize,
    pub n_generations: usize,
    /// Set when there were fewer generations than references.
    pub under_generated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub scorer_name: String,
    pub per_context: Vec<MatchReport>,
    /// Unweighted mean of `mean_per_reference` over contexts.
    pub macro_mean: f64,
}

impl CorpusReport {
    pub fn total_sum(&self) -> f64 {
        self.per_context.iter().map(|r| r.total).sum()
    }
}

/// A point on a reference-count or generation-count sweep curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub count: usize,
    pub macro_mean: f64,
}

/// How a reference sweep picks `k` references from each context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefSampling {
    /// Seeded sample without replacement, drawn independently per
    /// `(seed, context_id, k)`; input order is kept within the sample.
    #[default]
    Random,
    /// The first `k` references in input order (nested subsets).
    Prefix,
}

fn tokenize_all(texts: &[String]) -> Vec<TokenSequence> {
    texts.iter().map(|t| tokenize(t)).collect()
}

/// Score one context with the optimal injective assignment.
pub fn score_context(ctx: &EvalContext, scorer: &dyn PairwiseScorer) -> Result<MatchReport> {
    ctx.validate()?;
    let refs = tokenize_all(&ctx.references);
    let gens = tokenize_all(&ctx.generations);

    let mut weights = Vec::with_capacity(refs.len() * gens.len());
    for r in &refs {
        for g in &gens {
            weights.push(scorer.score(g, r)?);
        }
    }
    let matrix = WeightMatrix::new(refs.len(), gens.len(), weights)?;
    let matching = solve_max_assignment(&matrix);

    let assignments: Vec<Assignment> = matching
        .pairs
        .iter()
        .map(|&(r, g)| Assignment {
            reference_index: r,
            generation_index: g,
            score: matrix.get(r, g),
        })
        .collect();
    Ok(MatchReport {
        context_id: ctx.context_id.clone(),
        scorer_name: scorer.name().to_string(),
        assignments,
        total: matching.total,
        mean_per_reference: matching.total / refs.len() as f64,
        n_references: refs.len(),
        n_generations: gens.len(),
        under_generated: gens.len() < refs.len(),
    })
}

/// Score every context (in parallel on the current rayon pool) and
/// macro-average. Reports keep input order.
pub fn score_corpus(contexts: &[EvalContext], scorer: &dyn PairwiseScorer) -> Result<CorpusReport> {
    if contexts.is_empty() {
        return Err(Error::invalid("corpus has no contexts"));
    }
    let mut seen = HashSet::new();
    for ctx in contexts {
        if !seen.insert(ctx.context_id.as_str()) {
            return Err(Error::invalid(format!(
                "duplicate context_id '{}'",
                ctx.context_id
            )));
        }
    }
    let per_context = contexts
        .par_iter()
        .map(|ctx| score_context(ctx, scorer).map_err(|e| e.in_context(&ctx.context_id)))
        .collect::<Result<Vec<_>>>()?;
    let macro_mean = per_context
        .iter()
        .map(|r| r.mean_per_reference)
        .sum::<f64>()
        / per_context.len() as f64;
    Ok(CorpusReport {
        scorer_name: scorer.name().to_string(),
        per_context,
        macro_mean,
    })
}

fn subsample_references(ctx: &EvalContext, k: usize, seed: u64, mode: RefSampling) -> EvalContext {
    let picked: Vec<String> = match mode {
        RefSampling::Prefix => ctx.references[..k].to_vec(),
        RefSampling::Random => {
            let mut rng = sub_rng(seed, &ctx.context_id, k as u64);
            let mut idx = sample(&mut rng, ctx.references.len(), k).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| ctx.references[i].clone()).collect()
        }
    };
    EvalContext {
        references: picked,
        ..ctx.clone()
    }
}

/// Macro mean as a function of the number of references per context.
pub fn sweep_references(
    contexts: &[EvalContext],
    scorer: &dyn PairwiseScorer,
    ref_counts: &[usize],
    seed: u64,
    mode: RefSampling,
) -> Result<Vec<CurvePoint>> {
    let available = contexts
        .iter()
        .map(|c| c.references.len())
        .min()
        .unwrap_or(0);
    ref_counts
        .iter()
        .map(|&k| {
            if k == 0 || k > available {
                return Err(Error::invalid(format!(
                    "reference count {k} outside 1..={available}"
                )));
            }
            let sub: Vec<EvalContext> = contexts
                .iter()
                .map(|c| subsample_references(c, k, seed, mode))
                .collect();
            let report = score_corpus(&sub, scorer)?;
            Ok(CurvePoint {
                count: k,
                macro_mean: report.macro_mean,
            })
        })
        .collect()
}

/// Macro mean using only the first `k` generations of every context.
pub fn sweep_generations(
    contexts: &[EvalContext],
    scorer: &dyn PairwiseScorer,
    gen_counts: &[usize],
) -> Result<Vec<CurvePoint>> {
    let available = contexts
        .iter()
        .map(|c| c.generations.len())
        .min()
        .unwrap_or(0);
    gen_counts
        .iter()
        .map(|&k| {
            if k == 0 || k > available {
                return Err(Error::invalid(format!(
                    "generation count {k} outside 1..={available}"
                )));
            }
            let sub: Vec<EvalContext> = contexts
                .iter()
                .map(|c| EvalContext {
                    generations: c.generations[..k].to_vec(),
                    ..c.clone()
                })
                .collect();
            let report = score_corpus(&sub, scorer)?;
            Ok(CurvePoint {
                count: k,
                macro_mean: report.macro_mean,
            })
        })
        .collect()
}

/// Render a sweep curve as CSV with header `count,macro_mean`.
pub fn curve_to_csv(curve: &[CurvePoint], scale: f64) -> String {
    let mut out = String::from("count,macro_mean\n");
    for p in curve {
        out.push_str(&format!("{},{}\n", p.count, p.macro_mean * scale));
    }
    out
}
