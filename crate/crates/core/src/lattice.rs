//! Colorings of a ring and their edge-particle embedding.
//!
//! Sites are `0..n` with `n - 1` adjacent to `0`. Edge `i` sits between
//! sites `i` and `(i + 1) % n`; it plays the role of the half-integer edge
//! `i + 1/2` on the line.

use serde::{Deserialize, Serialize};

use crate::error::{CpsError, Result};
use crate::rng::RngStream;

/// A κ-coloring of the ring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawColoring")]
pub struct Coloring {
    kappa: u8,
    sites: Vec<u8>,
}

#[derive(Deserialize)]
struct RawColoring {
    kappa: u8,
    sites: Vec<u8>,
}

impl TryFrom<RawColoring> for Coloring {
    type Error = CpsError;
    fn try_from(raw: RawColoring) -> Result<Self> {
        Coloring::new(raw.kappa, raw.sites)
    }
}

impl Coloring {
    pub fn new(kappa: u8, sites: Vec<u8>) -> Result<Self> {
        if kappa < 2 {
            return Err(CpsError::TooFewColors(kappa));
        }
        if sites.len() < 2 {
            return Err(CpsError::TooFewSites(sites.len()));
        }
        if let Some((index, &color)) = sites.iter().enumerate().find(|(_, &c)| c >= kappa) {
            return Err(CpsError::ColorOutOfRange { index, color, kappa });
        }
        Ok(Self { kappa, sites })
    }

    /// Every site i.i.d. uniform on `[0, kappa)`; consumes exactly `n` draws.
    pub fn uniform(n: usize, kappa: u8, rng: &mut RngStream) -> Result<Self> {
        if kappa < 2 {
            return Err(CpsError::TooFewColors(kappa));
        }
        if n < 2 {
            return Err(CpsError::TooFewSites(n));
        }
        let sites = (0..n).map(|_| rng.below(kappa as u64) as u8).collect();
        Ok(Self { kappa, sites })
    }

    pub fn constant(n: usize, kappa: u8, color: u8) -> Result<Self> {
        Self::new(kappa, vec![color; n])
    }

    pub fn kappa(&self) -> u8 {
        self.kappa
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[u8] {
        &self.sites
    }

    pub fn into_sites(self) -> Vec<u8> {
        self.sites
    }

    pub(crate) fn sites_mut(&mut self) -> &mut [u8] {
        &mut self.sites
    }

    /// Adds `c` to every site, mod κ.
    pub fn shifted(&self, c: u8) -> Self {
        let k = self.kappa;
        Self { kappa: k, sites: self.sites.iter().map(|&s| ((s as u16 + c as u16) % k as u16) as u8).collect() }
    }

    pub fn reversed(&self) -> Self {
        let mut sites = self.sites.clone();
        sites.reverse();
        Self { kappa: self.kappa, sites }
    }

    /// Fraction of edges whose endpoint colors differ.
    pub fn discordance(&self) -> f64 {
        let n = self.sites.len();
        let unequal = (0..n).filter(|&i| self.sites[i] != self.sites[(i + 1) % n]).count();
        unequal as f64 / n as f64
    }
}

/// Kind of edge particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    /// Right-moving particle, color difference −1.
    #[serde(rename = "R")]
    R,
    #[serde(rename = ".")]
    Vacant,
    /// Left-moving particle, color difference +1.
    #[serde(rename = "L")]
    L,
    /// Blockade, color difference 2 (four colors only).
    #[serde(rename = "B")]
    B,
}

impl EdgeKind {
    /// Value in the telescoping sum: R ↦ −1, Vacant ↦ 0, L ↦ +1, B ↦ 2.
    pub fn signed(self) -> i64 {
        match self {
            EdgeKind::R => -1,
            EdgeKind::Vacant => 0,
            EdgeKind::L => 1,
            EdgeKind::B => 2,
        }
    }

    /// Color difference as a residue in `[0, kappa)`.
    pub fn residue(self, kappa: u8) -> u8 {
        match self {
            EdgeKind::R => kappa - 1,
            EdgeKind::Vacant => 0,
            EdgeKind::L => 1,
            EdgeKind::B => 2,
        }
    }

    /// Classifies a color difference `(right - left) mod kappa`, for κ ∈ {3, 4}.
    pub fn from_residue(d: u8, kappa: u8) -> Self {
        match (d, kappa) {
            (0, _) => EdgeKind::Vacant,
            (1, _) => EdgeKind::L,
            (2, 3) => EdgeKind::R,
            (2, _) => EdgeKind::B,
            _ => EdgeKind::R,
        }
    }

    pub fn is_directed(self) -> bool {
        matches!(self, EdgeKind::R | EdgeKind::L)
    }

    /// R ↔ L, blockade and vacancy fixed.
    pub fn mirrored(self) -> Self {
        match self {
            EdgeKind::R => EdgeKind::L,
            EdgeKind::L => EdgeKind::R,
            other => other,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            EdgeKind::R => 'R',
            EdgeKind::Vacant => '.',
            EdgeKind::L => 'L',
            EdgeKind::B => 'B',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'R' => Some(EdgeKind::R),
            '.' => Some(EdgeKind::Vacant),
            'L' => Some(EdgeKind::L),
            'B' => Some(EdgeKind::B),
            _ => None,
        }
    }
}

/// Parses a compact edge string such as `"RR.L"`.
pub fn parse_edges(s: &str) -> Option<Vec<EdgeKind>> {
    s.chars().map(EdgeKind::from_symbol).collect()
}

pub fn edges_to_string(edges: &[EdgeKind]) -> String {
    edges.iter().map(|e| e.symbol()).collect()
}

/// Edge-particle configuration on the ring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawEdges")]
pub struct EdgeConfig {
    kappa: u8,
    edges: Vec<EdgeKind>,
}

#[derive(Deserialize)]
struct RawEdges {
    kappa: u8,
    edges: Vec<EdgeKind>,
}

impl TryFrom<RawEdges> for EdgeConfig {
    type Error = CpsError;
    fn try_from(raw: RawEdges) -> Result<Self> {
        EdgeConfig::new(raw.kappa, raw.edges)
    }
}

impl EdgeConfig {
    pub fn new(kappa: u8, edges: Vec<EdgeKind>) -> Result<Self> {
        if kappa != 3 && kappa != 4 {
            return Err(CpsError::UnsupportedKappa(kappa));
        }
        if edges.len() < 2 {
            return Err(CpsError::TooFewSites(edges.len()));
        }
        if kappa == 3 {
            if let Some(i) = edges.iter().position(|&e| e == EdgeKind::B) {
                return Err(CpsError::BlockadeWithoutFourColors(i));
            }
        }
        let sum = signed_sum(&edges);
        if sum.rem_euclid(kappa as i64) != 0 {
            return Err(CpsError::NotRealizable { sum, kappa });
        }
        Ok(Self { kappa, edges })
    }

    #[cfg(test)]
    pub(crate) fn from_parts_unchecked(kappa: u8, edges: Vec<EdgeKind>) -> Self {
        Self { kappa, edges }
    }

    pub fn kappa(&self) -> u8 {
        self.kappa
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[EdgeKind] {
        &self.edges
    }

    pub(crate) fn edges_mut(&mut self) -> &mut [EdgeKind] {
        &mut self.edges
    }

    pub fn signed_sum(&self) -> i64 {
        signed_sum(&self.edges)
    }

    pub fn count(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|&&e| e == kind).count()
    }

    pub fn directed_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_directed()).count()
    }

    /// Total particle count (directed plus blockades).
    pub fn particle_count(&self) -> usize {
        self.edges.iter().filter(|&&e| e != EdgeKind::Vacant).count()
    }

    /// Configuration of the site-reversed coloring.
    ///
    /// Reversing sites sends edge `i` to edge `(n - 2 - i) mod n` and flips
    /// the sign of every difference.
    pub fn mirrored(&self) -> Self {
        let n = self.edges.len();
        let edges = (0..n).map(|i| self.edges[(2 * n - 2 - i) % n].mirrored()).collect();
        Self { kappa: self.kappa, edges }
    }
}

pub fn signed_sum(edges: &[EdgeKind]) -> i64 {
    edges.iter().map(|e| e.signed()).sum()
}

/// Edge-particle configuration induced by a coloring.
pub fn embed(x: &Coloring) -> Result<EdgeConfig> {
    let k = x.kappa;
    if k != 3 && k != 4 {
        return Err(CpsError::UnsupportedKappa(k));
    }
    let s = &x.sites;
    let n = s.len();
    let edges = (0..n).map(|i| EdgeKind::from_residue((s[(i + 1) % n] + k - s[i]) % k, k)).collect();
    Ok(EdgeConfig { kappa: k, edges })
}

/// Inverse of [`embed`], fixing the color of site 0.
pub fn reconstruct(base_color: u8, e: &EdgeConfig) -> Result<Coloring> {
    let k = e.kappa;
    if base_color >= k {
        return Err(CpsError::ColorOutOfRange { index: 0, color: base_color, kappa: k });
    }
    let sum = e.signed_sum();
    if sum.rem_euclid(k as i64) != 0 {
        return Err(CpsError::NotRealizable { sum, kappa: k });
    }
    let n = e.edges.len();
    let mut sites = Vec::with_capacity(n);
    let mut c = base_color;
    for edge in &e.edges[..n - 1] {
        sites.push(c);
        c = (c + edge.residue(k)) % k;
    }
    sites.push(c);
    Ok(Coloring { kappa: k, sites })
}

#[cfg(test)]
mod tests {
    use super::*;
    use EdgeKind::*;

    fn col(k: u8, s: &[u8]) -> Coloring {
        Coloring::new(k, s.to_vec()).unwrap()
    }

    /// All colorings of `n` sites, as base-κ odometer.
    fn all_colorings(n: usize, k: u8) -> impl Iterator<Item = Coloring> {
        let total = (k as usize).pow(n as u32);
        (0..total).map(move |mut code| {
            let sites = (0..n)
                .map(|_| {
                    let c = (code % k as usize) as u8;
                    code /= k as usize;
                    c
                })
                .collect();
            Coloring { kappa: k, sites }
        })
    }

    #[test]
    fn uniform_coloring_is_deterministic() {
        let a = Coloring::uniform(4, 3, &mut RngStream::new(11)).unwrap();
        let b = Coloring::uniform(4, 3, &mut RngStream::new(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_coloring_consumes_n_draws() {
        let mut rng = RngStream::new(5);
        Coloring::uniform(37, 4, &mut rng).unwrap();
        assert_eq!(rng.draws(), 37);
    }

    #[test]
    fn uniform_coloring_two_colors() {
        let x = Coloring::uniform(2, 2, &mut RngStream::new(0)).unwrap();
        assert!(x.sites().iter().all(|&c| c < 2));
    }

    #[test]
    fn uniform_coloring_frequencies() {
        let n = 100_000usize;
        let x = Coloring::uniform(n, 3, &mut RngStream::new(2024)).unwrap();
        let p = 1.0 / 3.0;
        let tol = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
        for c in 0..3u8 {
            let f = x.sites().iter().filter(|&&s| s == c).count() as f64 / n as f64;
            assert!((f - p).abs() <= tol, "color {c}: {f}");
        }
    }

    #[test]
    fn uniform_coloring_rejects_bad_sizes() {
        let mut rng = RngStream::new(0);
        assert!(matches!(Coloring::uniform(1, 3, &mut rng), Err(CpsError::TooFewSites(1))));
        assert!(matches!(Coloring::uniform(5, 1, &mut rng), Err(CpsError::TooFewColors(1))));
    }

    #[test]
    fn coloring_rejects_out_of_range() {
        assert!(Coloring::new(3, vec![0, 3]).is_err());
    }

    #[test]
    fn embed_examples() {
        assert_eq!(embed(&col(3, &[0, 1, 2, 0])).unwrap().edges(), &[L, L, L, Vacant]);
        assert_eq!(embed(&col(3, &[2, 2, 2])).unwrap().edges(), &[Vacant; 3]);
        assert_eq!(embed(&col(4, &[0, 2])).unwrap().edges(), &[B, B]);
    }

    #[test]
    fn embed_rejects_other_kappa() {
        assert!(matches!(embed(&col(5, &[0, 1])), Err(CpsError::UnsupportedKappa(5))));
        assert!(matches!(embed(&col(2, &[0, 1])), Err(CpsError::UnsupportedKappa(2))));
    }

    #[test]
    fn reconstruct_examples() {
        let e = EdgeConfig::new(3, vec![L, L, L, Vacant]).unwrap();
        assert_eq!(reconstruct(0, &e).unwrap().sites(), &[0, 1, 2, 0]);
        let v = EdgeConfig::new(4, vec![Vacant; 5]).unwrap();
        assert_eq!(reconstruct(3, &v).unwrap(), Coloring::constant(5, 4, 3).unwrap());
    }

    #[test]
    fn unrealizable_configs_rejected() {
        assert!(matches!(EdgeConfig::new(3, vec![R, Vacant]), Err(CpsError::NotRealizable { sum: -1, kappa: 3 })));
        let bogus = EdgeConfig::from_parts_unchecked(3, vec![R, Vacant]);
        assert!(reconstruct(0, &bogus).is_err());
        assert!(EdgeConfig::new(3, vec![B, B]).is_err());
    }

    #[test]
    fn exhaustive_round_trip_and_signed_sum() {
        for k in [3u8, 4] {
            for n in 2..=8usize {
                for x in all_colorings(n, k) {
                    let e = embed(&x).unwrap();
                    assert_eq!(e.signed_sum().rem_euclid(k as i64), 0);
                    assert_eq!(reconstruct(x.sites()[0], &e).unwrap(), x);
                }
            }
        }
    }

    #[test]
    fn exhaustive_shift_and_reflection() {
        for k in [3u8, 4] {
            for n in 2..=7usize {
                for x in all_colorings(n, k) {
                    let e = embed(&x).unwrap();
                    for c in 1..k {
                        assert_eq!(embed(&x.shifted(c)).unwrap(), e);
                    }
                    assert_eq!(embed(&x.reversed()).unwrap(), e.mirrored());
                }
            }
        }
    }

    #[test]
    fn json_shapes() {
        let x = col(3, &[0, 1, 2, 0]);
        let e = embed(&x).unwrap();
        assert_eq!(serde_json::to_string(&x).unwrap(), r#"{"kappa":3,"sites":[0,1,2,0]}"#);
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"kappa":3,"edges":["L","L","L","."]}"#);
        let back: EdgeConfig = serde_json::from_str(r#"{"kappa":4,"edges":["B","B"]}"#).unwrap();
        assert_eq!(back.edges(), &[B, B]);
        assert!(serde_json::from_str::<EdgeConfig>(r#"{"kappa":3,"edges":["R","."]}"#).is_err());
        assert!(serde_json::from_str::<Coloring>(r#"{"kappa":3,"sites":[0,5]}"#).is_err());
    }
}
