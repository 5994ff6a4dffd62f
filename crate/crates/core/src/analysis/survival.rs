//! Running-sum criterion for 3-color CCA particles.
//!
//! In the 3-color automaton every R moves one edge right per step and every
//! L one edge left, and opposing particles annihilate when they cross or land
//! on the same edge. An R sits on edge `x` at time `t` iff an R sat on edge
//! `x - t` at time 0 and, reading the initial edges `x - t, ..., x + t`
//! with R as +1 and L as −1, every partial sum stays at least 1.

use crate::error::{CpsError, Result};
use crate::lattice::{embed, Coloring, EdgeKind};

fn step(e: EdgeKind) -> i64 {
    match e {
        EdgeKind::R => 1,
        EdgeKind::L => -1,
        _ => 0,
    }
}

fn check_window(n: usize, t: usize) -> Result<()> {
    let needed = 2 * t + 2;
    if n <= needed {
        return Err(CpsError::WindowWraps { needed, n });
    }
    Ok(())
}

fn three_colors(y0: &Coloring) -> Result<Vec<EdgeKind>> {
    if y0.kappa() != 3 {
        return Err(CpsError::UnsupportedKappa(y0.kappa()));
    }
    Ok(embed(y0)?.edges().to_vec())
}

/// Whether the criterion predicts an R on edge `x` after `t` steps.
pub fn cca_survival_criterion(y0: &Coloring, x: usize, t: usize) -> Result<bool> {
    let edges = three_colors(y0)?;
    let n = edges.len();
    check_window(n, t)?;
    let start = (x % n + n - t % n) % n;
    if edges[start] != EdgeKind::R {
        return Ok(false);
    }
    let mut sum = 0;
    for k in 0..=2 * t {
        sum += step(edges[(start + k) % n]);
        if sum < 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Precomputed criterion for all edges and times on one initial coloring.
///
/// For each start edge, stores how many consecutive edges the running sum
/// stays at least 1, so each query is O(1).
pub struct SurvivalTable {
    n: usize,
    is_r: Vec<bool>,
    /// `run[a]`: the partial sums from edge `a` stay ≥ 1 for offsets
    /// `0..run[a]`.
    run: Vec<usize>,
}

impl SurvivalTable {
    pub fn new(y0: &Coloring) -> Result<Self> {
        let edges = three_colors(y0)?;
        let n = edges.len();
        // prefix sums over two laps so every window is contiguous
        let mut prefix = Vec::with_capacity(2 * n + 1);
        prefix.push(0i64);
        for i in 0..2 * n {
            prefix.push(prefix[i] + step(edges[i % n]));
        }
        // next index j > i with prefix[j] <= prefix[i]
        let len = prefix.len();
        let mut next_le = vec![len; len];
        let mut stack: Vec<usize> = Vec::new();
        for i in (0..len).rev() {
            while let Some(&j) = stack.last() {
                if prefix[j] > prefix[i] {
                    stack.pop();
                } else {
                    break;
                }
            }
            if let Some(&j) = stack.last() {
                next_le[i] = j;
            }
            stack.push(i);
        }
        let is_r: Vec<bool> = edges.iter().map(|&e| e == EdgeKind::R).collect();
        // offsets 0..k keep the sum ≥ 1 until prefix returns to its start level
        let run = (0..n).map(|a| if is_r[a] { next_le[a] - a - 1 } else { 0 }).collect();
        Ok(Self { n, is_r, run })
    }

    pub fn query(&self, x: usize, t: usize) -> Result<bool> {
        check_window(self.n, t)?;
        let a = (x % self.n + self.n - t % self.n) % self.n;
        Ok(self.is_r[a] && self.run[a] > 2 * t)
    }
}
