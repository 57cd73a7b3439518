//! Reply-emotion transitions, the emotion most likely to elicit a target,
//! and the accuracy of an always-neutral predictor.
//!
//!     cargo run --example transition_matrix

use branchmatch::dialog_tree::parse_tree;
use branchmatch::emotion_analysis::{build_transition_matrix, emotion_accuracy, Emotion, Labels};

fn main() -> branchmatch::Result<()> {
    let tree = parse_tree(include_bytes!("data/tree.json"))?;
    let labels = Labels::from_tree(&tree);
    let t = build_transition_matrix(std::slice::from_ref(&tree), &labels, 1.0)?;

    print!("{:>9}", "");
    for to in Emotion::ALL {
        print!("{:>9}", to.as_str());
    }
    println!();
    for from in Emotion::ALL {
        print!("{:>9}", from.as_str());
        for to in Emotion::ALL {
            print!("{:>9.3}", t.prob(from, to));
        }
        println!();
    }
    for target in [Emotion::Joy, Emotion::Anger] {
        println!("to elicit {target}, express {}", t.leads_to(target));
    }

    let always_neutral: Vec<(Emotion, Emotion)> = Emotion::ALL
        .iter()
        .map(|&e| (e, Emotion::Neutral))
        .collect();
    let report = emotion_accuracy(&always_neutral)?;
    println!("always-neutral average accuracy {:.3}", report.average);
    Ok(())
}
