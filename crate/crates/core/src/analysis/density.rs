//! Particle densities and their aggregation across replicas.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::dynamics::Snapshot;
use crate::error::Result;
use crate::lattice::{Coloring, EdgeConfig};

/// Spatial averages over one configuration: `p` directed particles, `q`
/// blockades, `r = p + q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Densities {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

pub fn density_estimate(e: &EdgeConfig) -> Densities {
    let n = e.len() as f64;
    let p = e.directed_count() as f64 / n;
    let q = e.count(crate::lattice::EdgeKind::B) as f64 / n;
    Densities { p, q, r: p + q }
}

/// For κ ≥ 5 there is no edge embedding; all unequal adjacent pairs count
/// toward `p` and `r`.
pub fn coloring_densities(x: &Coloring) -> Densities {
    let r = x.discordance();
    Densities { p: r, q: 0.0, r }
}

pub fn snapshot_densities(s: &Snapshot) -> Densities {
    match &s.edges {
        Some(e) => density_estimate(e),
        None => coloring_densities(&s.coloring),
    }
}

/// Plug-in binomial standard error of a density measured on `n` edges,
/// treating edges as independent.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Running mean and variance accumulator. `merge` is associative and
/// commutative up to floating-point rounding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum / self.count as f64
        }
    }

    /// Unbiased sample variance; 0 with fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub t: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub n_edges: usize,
    pub n_replicas: usize,
    /// Across-replica standard error of `r`.
    pub se_r: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DensityTrace {
    pub rows: Vec<DensityRow>,
}

impl DensityTrace {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn row_at(&self, t: f64) -> Option<&DensityRow> {
        self.rows.iter().find(|r| r.t == t)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let rows = rd.deserialize().collect::<std::result::Result<Vec<DensityRow>, _>>()?;
        Ok(Self { rows })
    }
}

/// Per-time moments of (p, q, r) across replicas.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DensityAccumulator {
    pub times: Vec<f64>,
    pub n_edges: usize,
    pub p: Vec<Moments>,
    pub q: Vec<Moments>,
    pub r: Vec<Moments>,
}

impl DensityAccumulator {
    pub fn new(times: Vec<f64>, n_edges: usize) -> Self {
        let k = times.len();
        Self {
            times,
            n_edges,
            p: vec![Moments::default(); k],
            q: vec![Moments::default(); k],
            r: vec![Moments::default(); k],
        }
    }

    /// Adds one replica; `densities[i]` belongs to `times[i]`.
    pub fn push(&mut self, densities: &[Densities]) {
        assert_eq!(densities.len(), self.times.len(), "one density per sampled time");
        for (i, d) in densities.iter().enumerate() {
            self.p[i].push(d.p);
            self.q[i].push(d.q);
            self.r[i].push(d.r);
        }
    }

    pub fn push_trajectory(&mut self, snapshots: &[Snapshot]) {
        let d: Vec<Densities> = snapshots.iter().map(snapshot_densities).collect();
        self.push(&d);
    }

    pub fn merge(&mut self, other: &DensityAccumulator) {
        assert_eq!(self.times, other.times, "merging traces over different time grids");
        for i in 0..self.times.len() {
            self.p[i].merge(&other.p[i]);
            self.q[i].merge(&other.q[i]);
            self.r[i].merge(&other.r[i]);
        }
    }

    pub fn replicas(&self) -> usize {
        self.r.first().map_or(0, |m| m.count as usize)
    }

    /// Across-replica standard error of `p - q` computed from the separate
    /// moments, i.e. `sqrt(se_p^2 + se_q^2)`.
    pub fn combined_se_pq(&self, i: usize) -> f64 {
        (self.p[i].se().powi(2) + self.q[i].se().powi(2)).sqrt()
    }

    pub fn trace(&self) -> DensityTrace {
        let rows = self
            .times
            .iter()
            .enumerate()
            .map(|(i, &t)| DensityRow {
                t,
                p: self.p[i].mean(),
                q: self.q[i].mean(),
                r: self.r[i].mean(),
                n_edges: self.n_edges,
                n_replicas: self.r[i].count as usize,
                se_r: self.r[i].se(),
            })
            .collect();
        DensityTrace { rows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::embed;
    use crate::rng::RngStream;

    #[test]
    fn uniform_three_colors() {
        let n = 100_000;
        let x = Coloring::uniform(n, 3, &mut RngStream::new(99)).unwrap();
        let d = density_estimate(&embed(&x).unwrap());
        let target = 2.0 / 3.0;
        assert!((d.p - target).abs() <= 3.0 * binomial_se(target, n), "{d:?}");
        assert_eq!(d.q, 0.0);
        assert_eq!(d.r, d.p);
    }

    #[test]
    fn uniform_four_colors() {
        let n = 100_000;
        let x = Coloring::uniform(n, 4, &mut RngStream::new(100)).unwrap();
        let d = density_estimate(&embed(&x).unwrap());
        assert!((d.q - 0.25).abs() <= 3.0 * binomial_se(0.25, n), "{d:?}");
        assert!((d.p - 0.5).abs() <= 3.0 * binomial_se(0.5, n), "{d:?}");
    }

    #[test]
    fn vacant_is_zero() {
        let e = embed(&Coloring::constant(10, 4, 1).unwrap()).unwrap();
        assert_eq!(density_estimate(&e), Densities { p: 0.0, q: 0.0, r: 0.0 });
    }

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-12);
        let mut a = Moments::default();
        let mut b = Moments::default();
        a.push(1.0);
        a.push(2.0);
        b.push(3.0);
        b.push(4.0);
        a.merge(&b);
        assert_eq!(a, m);
    }

    #[test]
    fn accumulator_merge_matches_sequential() {
        let times = vec![0.0, 1.0];
        let reps: Vec<[Densities; 2]> = (0..6)
            .map(|i| {
                let v = i as f64 / 10.0;
                [Densities { p: v, q: v / 2.0, r: 1.5 * v }, Densities { p: v / 3.0, q: 0.0, r: v / 3.0 }]
            })
            .collect();
        let mut all = DensityAccumulator::new(times.clone(), 8);
        let mut left = DensityAccumulator::new(times.clone(), 8);
        let mut right = DensityAccumulator::new(times, 8);
        for (i, r) in reps.iter().enumerate() {
            all.push(r);
            if i < 3 {
                left.push(r)
            } else {
                right.push(r)
            }
        }
        right.merge(&left);
        let (a, b) = (all.trace(), right.trace());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!((x.r - y.r).abs() < 1e-12 && (x.se_r - y.se_r).abs() < 1e-12);
            assert_eq!(x.n_replicas, 6);
        }
    }

    #[test]
    fn csv_round_trip() {
        let trace = DensityTrace {
            rows: vec![
                DensityRow { t: 0.0, p: 0.5, q: 0.25, r: 0.75, n_edges: 100, n_replicas: 3, se_r: 0.01 },
                DensityRow { t: 2.0, p: 0.125, q: 0.0625, r: 0.1875, n_edges: 100, n_replicas: 3, se_r: 1e-3 },
            ],
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,p,q,r,n_edges,n_replicas,se_r\n"));
        assert_eq!(DensityTrace::read_csv(&buf[..]).unwrap(), trace);
    }
}
