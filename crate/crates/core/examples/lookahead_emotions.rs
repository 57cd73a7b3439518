//! Depth-weighted emotion estimates of what follows each utterance.
//!
//!     cargo run --example lookahead_emotions

use branchmatch::dialog_tree::parse_tree;
use branchmatch::emotion_analysis::{depth_weighted_estimate, Emotion, Labels};

fn main() -> branchmatch::Result<()> {
    let tree = parse_tree(include_bytes!("data/tree.json"))?;
    let labels = Labels::from_tree(&tree);
    let node = tree.find("a").expect("node a exists");

    for gamma in [0.0, 0.5, 1.0] {
        let d = depth_weighted_estimate(node, &labels, gamma)?;
        let shown: Vec<String> = Emotion::ALL
            .iter()
            .filter(|e| d.get(**e) > 0.0)
            .map(|e| format!("{e}={:.3}", d.get(*e)))
            .collect();
        println!(
            "gamma {gamma}: lookahead {:<8} [{}]",
            d.argmax().as_str(),
            shown.join(" ")
        );
    }
    Ok(())
}
