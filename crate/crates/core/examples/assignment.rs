//! Maximum-weight assignment on rectangular matrices, including ties.
//!
//!     cargo run --example assignment

use branchmatch::{solve_max_assignment, WeightMatrix};

fn main() -> branchmatch::Result<()> {
    // 2 references x 3 generations.
    let w = WeightMatrix::from_rows(&[[0.9, 0.8, 0.1], [0.85, 0.2, 0.0]])?;
    let m = solve_max_assignment(&w);
    println!("pairs {:?}, total {:.2}", m.pairs, m.total);

    // More rows than columns: only min(rows, cols) pairs are made.
    let m = solve_max_assignment(&w.transpose());
    println!("transposed pairs {:?}, total {:.2}", m.pairs, m.total);

    // Every permutation ties; the lexicographically smallest pair list wins.
    let ties = WeightMatrix::from_fn(3, 3, |_, _| 1.0)?;
    println!("all-ties pairs {:?}", solve_max_assignment(&ties).pairs);
    Ok(())
}
