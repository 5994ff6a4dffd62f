use serde::{Deserialize, Serialize};

use crate::lattice::EdgeKind;

/// Prefix counts of a cut-open edge sequence of length `n`. All vectors have
/// length `n + 1` and start at 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunningSumProfile {
    /// Number of R particles on edges `0..x`.
    pub r: Vec<i64>,
    /// Number of L particles on edges `0..x`.
    pub l: Vec<i64>,
    /// `r - l`
    pub s: Vec<i64>,
    /// `r + l`
    pub c: Vec<i64>,
    /// Minimum of `s(y)` over `0 <= y < n` (0 for an empty sequence).
    pub m: i64,
    /// Minimum of `s(y)` over `0 <= y <= n`. This is the depth that enters
    /// the matching-size identity.
    pub m_closed: i64,
}

impl RunningSumProfile {
    pub fn len(&self) -> usize {
        self.s.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total_count(&self) -> i64 {
        *self.c.last().expect("non-empty prefix vector")
    }

    pub fn final_sum(&self) -> i64 {
        *self.s.last().expect("non-empty prefix vector")
    }

    /// Particles matched by the water-filling matching:
    /// `C(n) - (2|m| + S(n))`, with `|m| = -m_closed`.
    pub fn matched_particles(&self) -> i64 {
        self.total_count() - (2 * -self.m_closed + self.final_sum())
    }
}

pub fn running_sums(xi: &[EdgeKind]) -> RunningSumProfile {
    let n = xi.len();
    let mut r = Vec::with_capacity(n + 1);
    let mut l = Vec::with_capacity(n + 1);
    r.push(0);
    l.push(0);
    for e in xi {
        r.push(r.last().unwrap() + (*e == EdgeKind::R) as i64);
        l.push(l.last().unwrap() + (*e == EdgeKind::L) as i64);
    }
    let s: Vec<i64> = r.iter().zip(&l).map(|(a, b)| a - b).collect();
    let c: Vec<i64> = r.iter().zip(&l).map(|(a, b)| a + b).collect();
    let m = s[..n.max(1)].iter().copied().min().unwrap_or(0);
    let m_closed = s.iter().copied().min().unwrap_or(0);
    RunningSumProfile { r, l, s, c, m, m_closed }
}
