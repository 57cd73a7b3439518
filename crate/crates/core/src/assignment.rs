//! Rectangular maximum-weight assignment.
//!
//! The solver negates the weights and runs a shortest-augmenting-path
//! Hungarian algorithm (Kuhn-Munkres with potentials) over the smaller
//! dimension, which costs `O(k² · max(n, m))` with `k = min(n, m)`.
//!
//! Among equally optimal assignments the lexicographically smallest pair
//! list (pairs sorted by row) is returned. The final dual potentials
//! identify every edge that can appear in *some* optimal assignment (the
//! tight edges); a greedy pass over rows then fixes the smallest feasible
//! column for each row, repairing the matching with alternating paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense `n_rows × n_cols` matrix of finite edge weights, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightMatrix {
    n_rows: usize,
    n_cols: usize,
    weights: Vec<f64>,
}

impl WeightMatrix {
    pub fn new(n_rows: usize, n_cols: usize, weights: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::invalid(format!(
                "weight matrix must be non-empty, got {n_rows}x{n_cols}"
            )));
        }
        if weights.len() != n_rows * n_cols {
            return Err(Error::invalid(format!(
                "expected {} weights for a {n_rows}x{n_cols} matrix, got {}",
                n_rows * n_cols,
                weights.len()
            )));
        }
        if let Some(pos) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite weight {} at ({}, {})",
                weights[pos],
                pos / n_cols,
                pos % n_cols
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            weights,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        if let Some(i) = rows.iter().position(|r| r.as_ref().len() != n_cols) {
            return Err(Error::invalid(format!(
                "ragged weight matrix: row {i} has {} entries, expected {n_cols}",
                rows[i].as_ref().len()
            )));
        }
        let weights = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::new(n_rows, n_cols, weights)
    }

    /// Build from a generator function evaluated at every `(row, col)`.
    pub fn from_fn(
        n_rows: usize,
        n_cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut weights = Vec::with_capacity(n_rows * n_cols);
        for r in 0..n_rows {
            for c in 0..n_cols {
                weights.push(f(r, c));
            }
        }
        Self::new(n_rows, n_cols, weights)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.n_cols + col]
    }

    pub fn transpose(&self) -> Self {
        let mut weights = Vec::with_capacity(self.weights.len());
        for c in 0..self.n_cols {
            for r in 0..self.n_rows {
                weights.push(self.get(r, c));
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            weights,
        }
    }

    fn max_abs(&self) -> f64 {
        self.weights.iter().fold(0.0f64, |m, w| m.max(w.abs()))
    }
}

/// An injective assignment of rows to columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    /// `(row, col)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    /// Sum of the matched weights.
    pub total: f64,
}

const NONE: usize = usize::MAX;

/// Solve the maximum-weight assignment of cardinality `min(n_rows, n_cols)`.
pub fn solve_max_assignment(w: &WeightMatrix) -> Matching {
    let (rows, cols) = (w.n_rows, w.n_cols);
    let n = rows.max(cols);
    // Dual rounding noise grows with the number of augmentations.
    let tol = 64.0 * n as f64 * f64::EPSILON * w.max_abs().max(1.0);

    // Solve min-cost on the orientation with rows <= cols, then map the
    // potentials back into the original orientation padded to n x n.
    let transposed = rows > cols;
    let (k, m) = if transposed {
        (cols, rows)
    } else {
        (rows, cols)
    };
    let cost = |i: usize, j: usize| {
        if transposed {
            -w.get(j, i)
        } else {
            -w.get(i, j)
        }
    };
    let Potentials {
        row_u,
        col_v,
        col_owner,
    } = hungarian_min(k, m, cost);

    // Reduced cost of the original edge (r, c), expressed in solver indices.
    let reduced = |r: usize, c: usize| {
        if transposed {
            cost(c, r) - row_u[c] - col_v[r]
        } else {
            cost(r, c) - row_u[r] - col_v[c]
        }
    };

    // Tight adjacency in the padded square problem. Padding vertices
    // (dummy rows when rows < cols, dummy columns otherwise) carry zero
    // cost; they are tight exactly against solver columns with v = 0.
    let mut tight: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, adj) in tight.iter_mut().enumerate() {
        for c in 0..n {
            let is_tight = if r < rows && c < cols {
                reduced(r, c) <= tol
            } else if r >= rows {
                col_v[c] >= -tol
            } else {
                col_v[r] >= -tol
            };
            if is_tight {
                adj.push(c);
            }
        }
    }

    let mut row_match = vec![NONE; n];
    let mut col_match = vec![NONE; n];
    for (sj, &si) in col_owner.iter().enumerate() {
        if si != NONE {
            let (r, c) = if transposed { (sj, si) } else { (si, sj) };
            row_match[r] = c;
            col_match[c] = r;
        }
    }
    // Pair leftover vertices with padding.
    let free: Vec<usize> = (0..n).filter(|&c| col_match[c] == NONE).collect();
    let mut free_cols = free.into_iter();
    for (r, slot) in row_match.iter_mut().enumerate() {
        if *slot == NONE {
            let c = free_cols.next().expect("padded problem is square");
            *slot = c;
            col_match[c] = r;
        }
    }

    let solver_pairs: Vec<(usize, usize)> = (0..rows)
        .filter(|&r| row_match[r] < cols)
        .map(|r| (r, row_match[r]))
        .collect();

    let mut locked = vec![false; n];
    for r in 0..rows {
        for &c in &tight[r] {
            if row_match[r] == c {
                break;
            }
            if col_match[c] != NONE && locked[col_match[c]] {
                continue;
            }
            if try_force(r, c, &tight, &locked, &mut row_match, &mut col_match) {
                break;
            }
        }
        locked[r] = true;
    }

    let pairs: Vec<(usize, usize)> = (0..rows)
        .filter(|&r| row_match[r] < cols)
        .map(|r| (r, row_match[r]))
        .collect();
    let total = exact_sum(pairs.iter().map(|&(r, c)| w.get(r, c)));
    // A near-tie inside the tolerance must never cost weight.
    let solver_total = exact_sum(solver_pairs.iter().map(|&(r, c)| w.get(r, c)));
    if total < solver_total {
        return Matching {
            pairs: solver_pairs,
            total: solver_total,
        };
    }
    Matching { pairs, total }
}

/// Correctly rounded sum (Shewchuk's non-overlapping partials), so equal
/// weight multisets give equal totals whatever the pair order.
fn exact_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    // Round the partials to nearest, handling the half-way case.
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

struct Potentials {
    row_u: Vec<f64>,
    col_v: Vec<f64>,
    /// Row assigned to each column, `NONE` when unassigned.
    col_owner: Vec<usize>,
}

/// Shortest augmenting path Hungarian algorithm for `k <= m`.
///
/// On return the potentials are dual feasible (`cost(i, j) - u[i] - v[j] >= 0`),
/// tight on matched edges, and `v[j] = 0` for every unmatched column.
fn hungarian_min(k: usize, m: usize, cost: impl Fn(usize, usize) -> f64) -> Potentials {
    debug_assert!(k <= m);
    // 1-based internally; index 0 is the virtual root column.
    let mut u = vec![0.0f64; k + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut min_v = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=k {
        owner[0] = i;
        let mut j0 = 0usize;
        min_v.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < min_v[j] {
                    min_v[j] = cur;
                    way[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    Potentials {
        row_u: u[1..].to_vec(),
        col_v: v[1..].to_vec(),
        col_owner: owner[1..]
            .iter()
            .map(|&i| if i == 0 { NONE } else { i - 1 })
            .collect(),
    }
}

/// Reassign row `r` to column `c` and repair the perfect matching over
/// unlocked vertices with an alternating path. Leaves the matching
/// untouched and returns false when no repair exists.
fn try_force(
    r: usize,
    c: usize,
    tight: &[Vec<usize>],
    locked: &[bool],
    row_match: &mut [usize],
    col_match: &mut [usize],
) -> bool {
    let old_c = row_match[r];
    let displaced = col_match[c];
    row_match[r] = c;
    col_match[c] = r;
    row_match[displaced] = NONE;
    col_match[old_c] = NONE;

    let mut visited = vec![false; tight.len()];
    visited[c] = true;
    if augment(
        displaced,
        tight,
        locked,
        r,
        &mut visited,
        row_match,
        col_match,
    ) {
        return true;
    }
    row_match[r] = old_c;
    col_match[old_c] = r;
    row_match[displaced] = c;
    col_match[c] = displaced;
    false
}

fn augment(
    row: usize,
    tight: &[Vec<usize>],
    locked: &[bool],
    pinned: usize,
    visited: &mut [bool],
    row_match: &mut [usize],
    col_match: &mut [usize],
) -> bool {
    for &c in &tight[row] {
        if visited[c] {
            continue;
        }
        let holder = col_match[c];
        if holder != NONE && (locked[holder] || holder == pinned) {
            continue;
        }
        visited[c] = true;
        if holder == NONE || augment(holder, tight, locked, pinned, visited, row_match, col_match) {
            row_match[row] = c;
            col_match[c] = row;
            return true;
        }
    }
    false
}
