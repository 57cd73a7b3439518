//! Balance emotion classes by sampling minority classes with replacement.
//!
//!     cargo run --example oversampling

use std::collections::BTreeMap;

use branchmatch::emotion_analysis::{balanced_oversample, Emotion};

fn main() -> branchmatch::Result<()> {
    let mut items = Vec::new();
    for (e, n) in Emotion::ALL.into_iter().zip([4, 2, 1, 3, 1, 1, 12]) {
        for i in 0..n {
            items.push((format!("{e}-{i}"), e));
        }
    }
    let balanced = balanced_oversample(&items, 7)?;

    let mut hist: BTreeMap<Emotion, usize> = BTreeMap::new();
    for (_, e) in &balanced {
        *hist.entry(*e).or_default() += 1;
    }
    println!("{} items in, {} out", items.len(), balanced.len());
    for (e, n) in hist {
        println!("{:<8} {n}", e.as_str());
    }
    let fear: Vec<&str> = balanced
        .iter()
        .filter(|(_, e)| *e == Emotion::Fear)
        .map(|(s, _)| s.as_str())
        .collect();
    println!("fear: {fear:?}");
    Ok(())
}
