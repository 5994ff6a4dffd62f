//! Matchings of R particles with L particles to their right.
//!
//! The water-filling matching pairs each up-step of the running sum with the
//! first later down-step that returns to the same level. Reading R as an
//! opening bracket and L as a closing one, that is ordinary bracket
//! matching, which is how it is computed here.

use serde::{Deserialize, Serialize};

use crate::error::{CpsError, Result};
use crate::lattice::EdgeKind;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs must be `(R, L)` with the R strictly left, and no edge may be
    /// used twice.
    pub fn is_valid_for(&self, xi: &[EdgeKind]) -> bool {
        let mut used = vec![false; xi.len()];
        for &(a, b) in &self.pairs {
            if a >= b || b >= xi.len() || xi[a] != EdgeKind::R || xi[b] != EdgeKind::L {
                return false;
            }
            if used[a] || used[b] {
                return false;
            }
            used[a] = true;
            used[b] = true;
        }
        true
    }

    /// Shifts every edge index by `offset`, e.g. to express an interval
    /// matching in ring coordinates.
    pub fn offset(&self, offset: usize) -> Matching {
        Matching { pairs: self.pairs.iter().map(|&(a, b)| (a + offset, b + offset)).collect() }
    }
}

pub fn water_fill_matching(xi: &[EdgeKind]) -> Matching {
    let mut open = Vec::new();
    let mut pairs = Vec::new();
    for (i, e) in xi.iter().enumerate() {
        match e {
            EdgeKind::R => open.push(i),
            EdgeKind::L => {
                if let Some(j) = open.pop() {
                    pairs.push((j, i));
                }
            }
            _ => {}
        }
    }
    pairs.sort_unstable();
    Matching { pairs }
}

/// Water-filling matching of the ring interval of `len` edges starting at
/// edge `start`, reported in ring edge indices. Pairs that would span the cut
/// are not considered.
pub fn interval_matching(edges: &[EdgeKind], start: usize, len: usize) -> Matching {
    let n = edges.len();
    let window: Vec<EdgeKind> = (0..len).map(|k| edges[(start + k) % n]).collect();
    let local = water_fill_matching(&window);
    Matching { pairs: local.pairs.iter().map(|&(a, b)| ((start + a) % n, (start + b) % n)).collect() }
}

pub const DEFAULT_BRUTE_FORCE_BOUND: usize = 16;

/// Size of a maximum matching by exhaustive search over all assignments of
/// R particles to later L particles.
pub fn brute_force_max_matching(xi: &[EdgeKind]) -> Result<usize> {
    brute_force_max_matching_bounded(xi, DEFAULT_BRUTE_FORCE_BOUND)
}

pub fn brute_force_max_matching_bounded(xi: &[EdgeKind], bound: usize) -> Result<usize> {
    if xi.len() > bound || xi.len() > 64 {
        return Err(CpsError::TooLongForBruteForce { len: xi.len(), bound });
    }
    let rs: Vec<usize> = (0..xi.len()).filter(|&i| xi[i] == EdgeKind::R).collect();
    let ls: Vec<usize> = (0..xi.len()).filter(|&i| xi[i] == EdgeKind::L).collect();
    let mut best = 0;
    search(&rs, &ls, 0, 0u64, 0, &mut best);
    Ok(best)
}

fn search(rs: &[usize], ls: &[usize], k: usize, used: u64, size: usize, best: &mut usize) {
    *best = (*best).max(size);
    if k == rs.len() || size + (rs.len() - k).min(ls.len()) <= *best {
        return;
    }
    for (j, &l) in ls.iter().enumerate() {
        if l > rs[k] && used & (1 << j) == 0 {
            search(rs, ls, k + 1, used | (1 << j), size + 1, best);
        }
    }
    search(rs, ls, k + 1, used, size, best);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::running_sum::running_sums;
    use crate::lattice::parse_edges;

    fn xi(s: &str) -> Vec<EdgeKind> {
        parse_edges(s).unwrap()
    }

    #[test]
    fn examples() {
        let m = water_fill_matching(&xi("RRLL"));
        assert_eq!(m.pairs, vec![(0, 3), (1, 2)]);
        assert_eq!(2 * m.len() as i64, running_sums(&xi("RRLL")).matched_particles());
        assert!(water_fill_matching(&xi("LR")).is_empty());
        assert_eq!(running_sums(&xi("LR")).matched_particles(), 0);
        assert_eq!(water_fill_matching(&xi("RL")).pairs, vec![(0, 1)]);
        assert_eq!(running_sums(&xi("RL")).matched_particles(), 2);
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_max_matching(&xi("RRLL")).unwrap(), 2);
        assert_eq!(brute_force_max_matching(&xi("LR")).unwrap(), 0);
        assert_eq!(brute_force_max_matching(&xi("........")).unwrap(), 0);
        assert_eq!(brute_force_max_matching(&xi("R.L.RBLLRR")).unwrap(), 2);
    }

    #[test]
    fn brute_force_rejects_long_input() {
        let long = vec![EdgeKind::R; 17];
        assert!(matches!(brute_force_max_matching(&long), Err(CpsError::TooLongForBruteForce { len: 17, bound: 16 })));
        assert!(brute_force_max_matching_bounded(&long, 20).is_ok());
    }

    #[test]
    fn validity_checks() {
        let x = xi("RRLL");
        assert!(Matching { pairs: vec![(0, 2), (1, 3)] }.is_valid_for(&x));
        assert!(!Matching { pairs: vec![(0, 2), (0, 3)] }.is_valid_for(&x));
        assert!(!Matching { pairs: vec![(2, 3)] }.is_valid_for(&x));
        assert!(!Matching { pairs: vec![(3, 0)] }.is_valid_for(&x));
    }

    #[test]
    fn interval_wraps_ring() {
        let ring = xi("L..RR");
        let m = interval_matching(&ring, 3, 3);
        assert_eq!(m.pairs, vec![(4, 0)]);
    }
}
