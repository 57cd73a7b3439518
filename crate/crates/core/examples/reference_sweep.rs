//! Macro mean as the reference count grows, for a generator that
//! repeats one good answer and one that covers every reference.
//!
//!     cargo run --example reference_sweep

use branchmatch::matching_eval::curve_to_csv;
use branchmatch::text_metrics::Scorer;
use branchmatch::{sweep_generations, sweep_references, EvalContext, RefSampling};

fn main() -> branchmatch::Result<()> {
    let refs: Vec<String> = (0..10)
        .map(|i| format!("possible reply number {i}"))
        .collect();
    let contexts = |gens: &dyn Fn() -> Vec<String>| -> Vec<EvalContext> {
        (0..5)
            .map(|c| EvalContext::new(format!("ctx{c}"), refs.clone(), gens()))
            .collect()
    };
    let diverse = contexts(&|| refs.clone());
    let duplicated = contexts(&|| vec![refs[0].clone(); 10]);
    let counts: Vec<usize> = (1..=10).collect();

    for (name, ctxs) in [("diverse", &diverse), ("duplicated", &duplicated)] {
        let curve = sweep_references(ctxs, &Scorer::Exact, &counts, 0, RefSampling::Prefix)?;
        println!("# {name}, nested reference prefixes");
        print!("{}", curve_to_csv(&curve, 1.0));
    }

    let random = sweep_references(
        &duplicated,
        &Scorer::Exact,
        &counts,
        42,
        RefSampling::Random,
    )?;
    println!("# duplicated, seeded random reference samples");
    print!("{}", curve_to_csv(&random, 1.0));

    let gens = sweep_generations(&diverse, &Scorer::Exact, &[1, 2, 5, 10])?;
    println!("# diverse, first k generations");
    print!("{}", curve_to_csv(&gens, 100.0));
    Ok(())
}
