use serde::{Deserialize, Serialize};

use crate::error::{CpsError, Result};
use crate::lattice::Coloring;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringEstimate {
    /// Frequency of `X(x) == X(y)`.
    pub estimate: f64,
    /// Binomial standard error of `estimate`.
    pub se: f64,
    pub samples: usize,
    /// `r̂ · |y − x|`, an upper bound on `P(X(x) != X(y))`.
    pub union_bound: f64,
}

/// Across-replica probability that sites `x` and `y` agree, from one
/// coloring per replica at a common time.
pub fn clustering_probe(snapshots: &[Coloring], x: usize, y: usize) -> Result<ClusteringEstimate> {
    let Some(first) = snapshots.first() else {
        return Err(CpsError::Spec("clustering probe needs at least one snapshot".into()));
    };
    let n = first.len();
    for (index, s) in snapshots.iter().enumerate() {
        if s.len() != n {
            return Err(CpsError::WidthMismatch { index, expected: n, got: s.len() });
        }
    }
    if x >= n || y >= n {
        return Err(CpsError::EdgeOutOfRange { index: x.max(y), n });
    }
    let k = snapshots.len();
    let agree = snapshots.iter().filter(|s| s.sites()[x] == s.sites()[y]).count();
    let estimate = agree as f64 / k as f64;
    let r_hat = snapshots.iter().map(Coloring::discordance).sum::<f64>() / k as f64;
    Ok(ClusteringEstimate {
        estimate,
        se: (estimate * (1.0 - estimate) / k as f64).sqrt(),
        samples: k,
        union_bound: r_hat * x.abs_diff(y) as f64,
    })
}

/// Same quantity estimated by translation averaging: the fraction of sites
/// `v` with `X(v) == X(v + lag)` over every coloring given. The standard
/// error treats sites as independent, which understates it.
pub fn spatial_agreement(snapshots: &[Coloring], lag: usize) -> ClusteringEstimate {
    let mut agree = 0usize;
    let mut total = 0usize;
    let mut r_sum = 0.0;
    for s in snapshots {
        let sites = s.sites();
        let n = sites.len();
        agree += (0..n).filter(|&v| sites[v] == sites[(v + lag) % n]).count();
        total += n;
        r_sum += s.discordance();
    }
    let estimate = agree as f64 / total as f64;
    ClusteringEstimate {
        estimate,
        se: (estimate * (1.0 - estimate) / total as f64).sqrt(),
        samples: total,
        union_bound: r_sum / snapshots.len() as f64 * lag as f64,
    }
}
