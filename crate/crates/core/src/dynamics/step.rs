//! Single-clock updates, at vertex level and at edge level.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{CpsError, Result};
use crate::lattice::{Coloring, EdgeConfig, EdgeKind};

/// Orientation of a clock on edge `i`.
///
/// `Plus` pushes the color of site `i` onto site `i + 1`; `Minus` pushes the
/// color of site `i + 1` onto site `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Direction {
    pub fn symbol(self) -> char {
        match self {
            Direction::Plus => '+',
            Direction::Minus => '-',
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for Direction {
    type Err = CpsError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" => Ok(Direction::Plus),
            "-" => Ok(Direction::Minus),
            _ => Err(CpsError::Spec(format!("unknown direction {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Move,
    Annihilate,
    Flip,
    BlockadeCreate,
    Reflect,
    NoOp,
}

impl EventKind {
    pub const ALL: [EventKind; 6] = [
        EventKind::Move,
        EventKind::Annihilate,
        EventKind::Flip,
        EventKind::BlockadeCreate,
        EventKind::Reflect,
        EventKind::NoOp,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_collision(self) -> bool {
        matches!(self, EventKind::Annihilate | EventKind::Flip | EventKind::BlockadeCreate | EventKind::Reflect)
    }

    pub fn name(self) -> &'static str {
        match self {
            EventKind::Move => "Move",
            EventKind::Annihilate => "Annihilate",
            EventKind::Flip => "Flip",
            EventKind::BlockadeCreate => "BlockadeCreate",
            EventKind::Reflect => "Reflect",
            EventKind::NoOp => "NoOp",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EventKind {
    type Err = CpsError;
    fn from_str(s: &str) -> Result<Self> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CpsError::Spec(format!("unknown event kind {s:?}")))
    }
}

/// Source and target sites of a clock.
#[inline]
pub(crate) fn clock_sites(edge: usize, dir: Direction, n: usize) -> (usize, usize) {
    let right = if edge + 1 == n { 0 } else { edge + 1 };
    match dir {
        Direction::Plus => (edge, right),
        Direction::Minus => (right, edge),
    }
}

/// Edge in front of the particle that the clock on `edge` would push.
#[inline]
pub(crate) fn target_edge(edge: usize, dir: Direction, n: usize) -> usize {
    match dir {
        Direction::Plus => {
            if edge + 1 == n {
                0
            } else {
                edge + 1
            }
        }
        Direction::Minus => {
            if edge == 0 {
                n - 1
            } else {
                edge - 1
            }
        }
    }
}

fn check_edge(edge: usize, n: usize) -> Result<()> {
    if edge >= n {
        Err(CpsError::EdgeOutOfRange { index: edge, n })
    } else {
        Ok(())
    }
}

/// Applies one clock to a site array in place; returns whether it changed.
#[inline]
pub(crate) fn apply_vertex(sites: &mut [u8], kappa: u8, edge: usize, dir: Direction) -> bool {
    let (src, dst) = clock_sites(edge, dir, sites.len());
    let s = sites[src];
    if (sites[dst] + 1) % kappa == s {
        sites[dst] = s;
        true
    } else {
        false
    }
}

/// Fires the clock on `edge` in direction `dir`: the target site adopts the
/// source color iff it is exactly one less (mod κ). Any κ ≥ 2.
pub fn vertex_step(x: &Coloring, edge: usize, dir: Direction) -> Result<Coloring> {
    check_edge(edge, x.len())?;
    let mut y = x.clone();
    let k = y.kappa();
    apply_vertex(y.sites_mut(), k, edge, dir);
    Ok(y)
}

/// Collision table for κ ∈ {3, 4}, from the kinds on the acting edge and the
/// edge in front of its particle.
#[inline]
pub(crate) fn classify_kinds(here: EdgeKind, ahead: EdgeKind, dir: Direction, kappa: u8) -> EventKind {
    let (mover, opposite) = match dir {
        Direction::Plus => (EdgeKind::R, EdgeKind::L),
        Direction::Minus => (EdgeKind::L, EdgeKind::R),
    };
    if here != mover {
        return EventKind::NoOp;
    }
    match ahead {
        EdgeKind::Vacant => EventKind::Move,
        EdgeKind::B => EventKind::Reflect,
        k if k == opposite => EventKind::Annihilate,
        _ if kappa == 3 => EventKind::Flip,
        _ => EventKind::BlockadeCreate,
    }
}

/// What firing the given clock would do to `e`.
pub fn classify_event(e: &EdgeConfig, edge: usize, dir: Direction) -> Result<EventKind> {
    let n = e.len();
    check_edge(edge, n)?;
    let edges = e.edges();
    Ok(classify_kinds(edges[edge], edges[target_edge(edge, dir, n)], dir, e.kappa()))
}

/// Applies one clock at edge level in place; returns the event kind.
#[inline]
pub(crate) fn apply_edge(edges: &mut [EdgeKind], kappa: u8, edge: usize, dir: Direction) -> EventKind {
    let n = edges.len();
    let ahead = target_edge(edge, dir, n);
    let kind = classify_kinds(edges[edge], edges[ahead], dir, kappa);
    if kind != EventKind::NoOp {
        // The target site moves up by one color: the acting edge empties and
        // the difference across the other edge at the target site absorbs it.
        let moved = edges[edge].residue(kappa);
        let d = (edges[ahead].residue(kappa) + moved) % kappa;
        edges[edge] = EdgeKind::Vacant;
        edges[ahead] = EdgeKind::from_residue(d, kappa);
    }
    kind
}

/// Edge-level counterpart of [`vertex_step`].
pub fn edge_step(e: &EdgeConfig, edge: usize, dir: Direction) -> Result<EdgeConfig> {
    check_edge(edge, e.len())?;
    let mut out = e.clone();
    let k = out.kappa();
    apply_edge(out.edges_mut(), k, edge, dir);
    Ok(out)
}
