//! Score one context's generations against its reference set with each
//! built-in scorer, and show why diversity matters.
//!
//!     cargo run --example matching_metric

use branchmatch::text_metrics::Scorer;
use branchmatch::{score_context, EvalContext};

fn main() -> branchmatch::Result<()> {
    let references: Vec<String> = [
        "Sure, I'd love to!",
        "I'm too tired, Mildred.",
        "Why is it always me?",
    ]
    .map(String::from)
    .to_vec();

    let diverse = EvalContext::new(
        "diverse",
        references.clone(),
        vec![
            "Sure, I'd love to!".into(),
            "Why me?".into(),
            "I'm too tired, Mildred.".into(),
            "Pizza?".into(),
        ],
    );
    let repetitive = EvalContext::new(
        "repetitive",
        references,
        vec!["Sure, I'd love to!".into(); 4],
    );

    for scorer in Scorer::ALL {
        for ctx in [&diverse, &repetitive] {
            let report = score_context(ctx, &scorer)?;
            println!(
                "{:<7} {:<10} total {:.3}  mean/ref {:.3}",
                scorer.as_str(),
                ctx.context_id,
                report.total,
                report.mean_per_reference
            );
        }
    }

    let report = score_context(&diverse, &Scorer::RougeL)?;
    println!("\nrougeL assignment for the diverse set:");
    for a in &report.assignments {
        println!(
            "  ref {:?} <- gen {:?} ({:.3})",
            diverse.references[a.reference_index], diverse.generations[a.generation_index], a.score
        );
    }
    Ok(())
}
