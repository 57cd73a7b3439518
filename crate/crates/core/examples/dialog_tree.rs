//! Parse a branching conversation, walk its paths, summarize it, and
//! export loss-masked training examples.
//!
//!     cargo run --example dialog_tree

use branchmatch::dialog_tree::{
    anonymize_speakers, compute_stats, enumerate_paths, export_training_examples, parse_tree,
    references_for_context, Conditioning,
};
use branchmatch::emotion_analysis::Labels;

fn main() -> branchmatch::Result<()> {
    let tree = parse_tree(include_bytes!("data/tree.json"))?;
    let stats = compute_stats(std::slice::from_ref(&tree))?;
    println!(
        "{} sentences, avg length {} tokens, depth counts {:?}",
        stats.total_sentences, stats.avg_sentence_length_tokens, stats.per_depth_counts
    );

    for path in enumerate_paths(&tree).iter().filter(|p| p.nodes.len() == 2) {
        println!("\npath {:?}", path.ids());
        println!("{}", anonymize_speakers(&path.nodes, &tree.scenario));
    }

    let after_a = references_for_context(&tree, &["a".to_string()])?;
    println!("\nreferences after 'a': {after_a:?}");

    let labels = Labels::from_tree(&tree);
    let examples =
        export_training_examples(&tree, Conditioning::Lookahead { gamma: 0.5 }, &labels)?;
    let ex = &examples[1];
    println!("\nexample for {:?} ({:?}):", ex.path_ids, ex.conditioning);
    println!("{}", ex.text);
    println!(
        "loss on tokens {}..{}",
        ex.loss_token_start, ex.loss_token_end
    );
    Ok(())
}
