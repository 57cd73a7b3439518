//! Embedding-centroid retrieval, unconstrained and emotion-constrained.
//!
//!     cargo run --example retrieval

use branchmatch::dialog_tree::parse_tree;
use branchmatch::emotion_analysis::{build_transition_matrix, Emotion, Labels};
use branchmatch::retrieval_baseline::{
    build_index, load_embeddings, retrieve, ContextText, RetrievalMode,
};

fn main() -> branchmatch::Result<()> {
    let tree = parse_tree(include_bytes!("data/tree.json"))?;
    let table = load_embeddings(include_bytes!("data/vectors.txt"))?;
    let labels = Labels::from_tree(&tree);
    let index = build_index(
        std::slice::from_ref(&tree),
        &labels,
        &table,
        ContextText::Anonymized,
    )?;
    let transitions = build_transition_matrix(std::slice::from_ref(&tree), &labels, 1.0)?;
    println!("{} indexed responses, dim {}", index.items.len(), index.dim);

    let query = ["Two friends talk about dinner.", "Could you cook tonight?"];
    let modes = [
        ("most likely", RetrievalMode::MostLikely),
        ("w/ anger", RetrievalMode::WithEmotion(Emotion::Anger)),
        (
            "w/ T[-> joy]",
            RetrievalMode::WithTransition(Emotion::Joy, &transitions),
        ),
    ];
    for (name, mode) in modes {
        let r = retrieve(&index, &table, &query, mode)?;
        println!(
            "{name:<13} {:<8} {:.3} {:?}",
            r.response_emotion.map_or("-", Emotion::as_str),
            r.similarity,
            r.response_text
        );
    }
    Ok(())
}
