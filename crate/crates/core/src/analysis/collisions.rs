//! Collision bookkeeping over an event log: particle identities, collision
//! indicators, the blockade mass-transport audit and conservation ledgers.
//!
//! Identities are assigned to every particle present at the start of the
//! window. A Move carries the identity along; Flip and Reflect keep the
//! moving particle's identity under its new type; Annihilate retires both;
//! BlockadeCreate retires both directed identities and mints a new blockade.

use serde::{Deserialize, Serialize};

use crate::dynamics::step::{apply_edge, classify_kinds, target_edge};
use crate::dynamics::{EventKind, EventLog, EventRecord};
use crate::error::{CpsError, Result};
use crate::lattice::{EdgeConfig, EdgeKind};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Default)]
struct Identity {
    original: bool,
    blockade: bool,
    alive: bool,
    first_collision: Option<EventKind>,
    reflects: u32,
    original_blockades_hit: u32,
}

/// Replays a log window from a known configuration, tracking identities.
struct Tracker {
    kappa: u8,
    edges: Vec<EdgeKind>,
    at: Vec<u32>,
    ids: Vec<Identity>,
    reflect_events: u64,
}

impl Tracker {
    fn new(e: &EdgeConfig) -> Self {
        let mut at = vec![NONE; e.len()];
        let mut ids = Vec::new();
        for (i, kind) in e.edges().iter().enumerate() {
            if *kind != EdgeKind::Vacant {
                at[i] = ids.len() as u32;
                ids.push(Identity {
                    original: true,
                    blockade: *kind == EdgeKind::B,
                    alive: true,
                    ..Identity::default()
                });
            }
        }
        Self { kappa: e.kappa(), edges: e.edges().to_vec(), at, ids, reflect_events: 0 }
    }

    fn collide(&mut self, id: u32, kind: EventKind) {
        let p = &mut self.ids[id as usize];
        p.first_collision.get_or_insert(kind);
    }

    fn retire(&mut self, id: u32) {
        self.ids[id as usize].alive = false;
    }

    fn apply(&mut self, rec: &EventRecord) -> Result<()> {
        let n = self.edges.len();
        if rec.edge >= n {
            return Err(CpsError::EdgeOutOfRange { index: rec.edge, n });
        }
        let here = rec.edge;
        let ahead = target_edge(here, rec.direction, n);
        let kind = classify_kinds(self.edges[here], self.edges[ahead], rec.direction, self.kappa);
        if kind != rec.kind {
            return Err(CpsError::InconsistentLog(format!(
                "event at t = {} on edge {} logged as {}, configuration gives {}",
                rec.time, rec.edge, rec.kind, kind
            )));
        }
        let (mover, other) = (self.at[here], self.at[ahead]);
        match kind {
            EventKind::NoOp => return Ok(()),
            EventKind::Move => {
                self.at[ahead] = mover;
            }
            EventKind::Annihilate => {
                self.collide(mover, kind);
                self.collide(other, kind);
                self.retire(mover);
                self.retire(other);
                self.at[ahead] = NONE;
            }
            EventKind::Flip => {
                self.collide(mover, kind);
                self.collide(other, kind);
                self.retire(other);
                self.at[ahead] = mover;
            }
            EventKind::BlockadeCreate => {
                self.collide(mover, kind);
                self.collide(other, kind);
                self.retire(mover);
                self.retire(other);
                self.at[ahead] = self.ids.len() as u32;
                self.ids.push(Identity { blockade: true, alive: true, ..Identity::default() });
            }
            EventKind::Reflect => {
                self.reflect_events += 1;
                self.collide(mover, kind);
                self.collide(other, kind);
                let hit_original = self.ids[other as usize].original;
                let m = &mut self.ids[mover as usize];
                m.reflects += 1;
                m.original_blockades_hit += hit_original as u32;
                self.retire(other);
                self.at[ahead] = mover;
            }
        }
        self.at[here] = NONE;
        apply_edge(&mut self.edges, self.kappa, here, rec.direction);
        Ok(())
    }
}

fn replay(e_t: &EdgeConfig, log: &EventLog, t: f64, s: f64) -> Result<Tracker> {
    if !log.covers(t, s) {
        return Err(CpsError::WindowOutsideLog { t, s, start: log.start, end: log.end });
    }
    let mut tr = Tracker::new(e_t);
    for rec in log.window(t, s) {
        tr.apply(rec)?;
    }
    Ok(tr)
}

/// For each edge, whether it holds a directed particle at time `t` that
/// takes part in a collision during `(t, s]`. `e_t` must be the
/// configuration at time `t`.
pub fn collision_indicators(e_t: &EdgeConfig, log: &EventLog, t: f64, s: f64) -> Result<Vec<bool>> {
    let tr = replay(e_t, log, t, s)?;
    let mut id_at_start = vec![NONE; e_t.len()];
    let mut next = 0u32;
    for (i, kind) in e_t.edges().iter().enumerate() {
        if *kind != EdgeKind::Vacant {
            id_at_start[i] = next;
            next += 1;
        }
    }
    Ok(e_t
        .edges()
        .iter()
        .zip(&id_at_start)
        .map(|(kind, &id)| kind.is_directed() && tr.ids[id as usize].first_collision.is_some())
        .collect())
}

pub fn collision_indicator_count(e_t: &EdgeConfig, log: &EventLog, t: f64, s: f64) -> Result<usize> {
    Ok(collision_indicators(e_t, log, t, s)?.into_iter().filter(|&c| c).count())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportAudit {
    pub blockades_at_start: u64,
    /// Blockades present at the start that are removed within the window.
    pub start_blockades_removed: u64,
    pub directed_at_start: u64,
    /// Directed particles present at the start whose first collision is a
    /// reflection off a blockade.
    pub directed_first_collision_reflect: u64,
    /// Collisions of start-time directed particles with start-time blockades.
    pub directed_hits_on_start_blockades: u64,
    pub blockades_created: u64,
    pub created_blockades_removed: u64,
    pub reflect_events: u64,
    /// Removals counted from the identities that disappeared.
    pub blockade_removals: u64,
    /// Every reflection removes exactly one blockade and moves exactly one
    /// directed particle, and each start-time blockade removal is matched by
    /// exactly one hit from a start-time directed particle.
    pub pairing_exact: bool,
    /// `start_blockades_removed <= directed_first_collision_reflect +
    /// created_blockades_removed`; informational, not an identity.
    pub first_reflect_bound: bool,
}

/// Blockade bookkeeping for a 4-color log replayed from `e_t` over `(t, s]`.
pub fn mass_transport_audit(e_t: &EdgeConfig, log: &EventLog, t: f64, s: f64) -> Result<TransportAudit> {
    if e_t.kappa() != 4 {
        return Err(CpsError::AuditNeedsFourColors);
    }
    let tr = replay(e_t, log, t, s)?;
    let mut a = TransportAudit { reflect_events: tr.reflect_events, ..Default::default() };
    let mut movers = 0u64;
    for p in &tr.ids {
        match (p.original, p.blockade) {
            (true, true) => {
                a.blockades_at_start += 1;
                a.start_blockades_removed += !p.alive as u64;
            }
            (true, false) => {
                a.directed_at_start += 1;
                a.directed_first_collision_reflect += (p.first_collision == Some(EventKind::Reflect)) as u64;
                a.directed_hits_on_start_blockades += p.original_blockades_hit as u64;
                movers += p.reflects as u64;
            }
            (false, _) => {
                a.blockades_created += 1;
                a.created_blockades_removed += !p.alive as u64;
            }
        }
    }
    a.blockade_removals = a.start_blockades_removed + a.created_blockades_removed;
    a.pairing_exact = a.blockade_removals == a.reflect_events
        && movers == a.reflect_events
        && a.start_blockades_removed == a.directed_hits_on_start_blockades;
    a.first_reflect_bound =
        a.start_blockades_removed <= a.directed_first_collision_reflect + a.created_blockades_removed;
    Ok(a)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub delta_directed: i64,
    pub delta_blockades: i64,
    pub annihilate: i64,
    pub flip: i64,
    pub blockade_create: i64,
    pub reflect: i64,
    pub balanced: bool,
}

/// Checks particle-count changes between two configurations against the
/// event kinds logged in between:
///
/// * κ = 3: Δdirected = −2·Annihilate − Flip
/// * κ = 4: Δdirected = −2·Annihilate − 2·BlockadeCreate and
///   Δblockades = BlockadeCreate − Reflect
pub fn conservation_ledger(before: &EdgeConfig, after: &EdgeConfig, events: &[EventRecord]) -> LedgerReport {
    let count = |k| events.iter().filter(|r| r.kind == k).count() as i64;
    let mut rep = LedgerReport {
        delta_directed: after.directed_count() as i64 - before.directed_count() as i64,
        delta_blockades: after.count(EdgeKind::B) as i64 - before.count(EdgeKind::B) as i64,
        annihilate: count(EventKind::Annihilate),
        flip: count(EventKind::Flip),
        blockade_create: count(EventKind::BlockadeCreate),
        reflect: count(EventKind::Reflect),
        balanced: false,
    };
    rep.balanced = if before.kappa() == 3 {
        rep.delta_directed == -2 * rep.annihilate - rep.flip
            && rep.delta_blockades == 0
            && rep.blockade_create == 0
            && rep.reflect == 0
    } else {
        rep.delta_directed == -2 * rep.annihilate - 2 * rep.blockade_create
            && rep.delta_blockades == rep.blockade_create - rep.reflect
            && rep.flip == 0
    };
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Direction::*;
    use crate::dynamics::{run_cps, Scheduler, SimConfig};
    use crate::lattice::{embed, parse_edges, Coloring};
    use EventKind::*;

    fn cfg(k: u8, s: &str) -> EdgeConfig {
        EdgeConfig::new(k, parse_edges(s).unwrap()).unwrap()
    }

    fn log(records: Vec<EventRecord>, end: f64) -> EventLog {
        EventLog { start: 0.0, end, records }
    }

    #[test]
    fn empty_window_counts_nothing() {
        let e = cfg(3, "RL.");
        let l = log(vec![EventRecord::new(1.0, 0, Plus, Annihilate)], 2.0);
        assert_eq!(collision_indicator_count(&e, &l, 0.5, 0.5).unwrap(), 0);
    }

    #[test]
    fn annihilation_fires_both() {
        let e = cfg(3, "RL.");
        let l = log(vec![EventRecord::new(1.0, 0, Plus, Annihilate)], 2.0);
        assert_eq!(collision_indicators(&e, &l, 0.0, 2.0).unwrap(), vec![true, true, false]);
    }

    #[test]
    fn identities_follow_moves() {
        // R moves twice, then meets the L that has walked toward it
        let e = cfg(3, "R...L.");
        let l = log(
            vec![
                EventRecord::new(1.0, 0, Plus, Move),
                EventRecord::new(2.0, 4, Minus, Move),
                EventRecord::new(3.0, 1, Plus, Move),
                EventRecord::new(4.0, 2, Plus, Annihilate),
            ],
            5.0,
        );
        assert_eq!(collision_indicators(&e, &l, 0.0, 5.0).unwrap(), vec![true, false, false, false, true, false]);
        assert_eq!(collision_indicator_count(&e, &l, 0.0, 3.5).unwrap(), 0);
    }

    #[test]
    fn rejects_uncovered_window_and_bad_logs() {
        let e = cfg(3, "RL.");
        let l = log(vec![], 2.0);
        assert!(matches!(collision_indicator_count(&e, &l, 0.0, 3.0), Err(CpsError::WindowOutsideLog { .. })));
        let bad = log(vec![EventRecord::new(1.0, 0, Plus, Move)], 2.0);
        assert!(matches!(collision_indicator_count(&e, &bad, 0.0, 2.0), Err(CpsError::InconsistentLog(_))));
    }

    #[test]
    fn audit_without_reflections() {
        let e = cfg(4, "RRB");
        let l = log(vec![EventRecord::new(1.0, 0, Plus, BlockadeCreate)], 2.0);
        let a = mass_transport_audit(&e, &l, 0.0, 2.0).unwrap();
        assert_eq!(a.blockade_removals, 0);
        assert_eq!(a.start_blockades_removed, 0);
        assert_eq!(a.blockades_created, 1);
        assert!(a.pairing_exact);
    }

    #[test]
    fn audit_single_reflection() {
        let e = cfg(4, "RB.R");
        let l = log(vec![EventRecord::new(1.0, 0, Plus, Reflect)], 2.0);
        let a = mass_transport_audit(&e, &l, 0.0, 2.0).unwrap();
        assert_eq!(a.start_blockades_removed, 1);
        assert_eq!(a.directed_first_collision_reflect, 1);
        assert_eq!(a.reflect_events, 1);
        assert!(a.pairing_exact && a.first_reflect_bound);
    }

    #[test]
    fn double_reflection_breaks_first_collision_bound() {
        // one R bounces off both blockades
        let e = cfg(4, "BRBL");
        let l = log(
            vec![
                EventRecord::new(1.0, 1, Plus, Reflect),
                EventRecord::new(2.0, 2, Minus, Move),
                EventRecord::new(3.0, 1, Minus, Reflect),
            ],
            3.0,
        );
        let a = mass_transport_audit(&e, &l, 0.0, 3.0).unwrap();
        assert_eq!(a.start_blockades_removed, 2);
        assert_eq!(a.directed_first_collision_reflect, 1);
        assert!(a.pairing_exact);
        assert!(!a.first_reflect_bound);
    }

    #[test]
    fn audit_rejects_three_colors() {
        let e = cfg(3, "RL.");
        assert!(matches!(mass_transport_audit(&e, &log(vec![], 1.0), 0.0, 1.0), Err(CpsError::AuditNeedsFourColors)));
    }

    #[test]
    fn long_run_audit_and_ledger() {
        let c = SimConfig::new(4, 2_000, 12, 30.0).with_log(true);
        let x0 = c.uniform_start().unwrap();
        let tr = run_cps(&c, &x0).unwrap();
        let log = tr.events.as_ref().unwrap();
        let e0 = embed(&x0).unwrap();
        let a = mass_transport_audit(&e0, log, 0.0, 30.0).unwrap();
        assert!(a.pairing_exact, "{a:?}");
        assert!(a.reflect_events > 0);
        let e1 = tr.last().unwrap().edges.clone().unwrap();
        assert!(conservation_ledger(&e0, &e1, &log.records).balanced);
    }

    #[test]
    fn ledger_detects_dropped_reflections() {
        let c = SimConfig::new(4, 500, 4, 20.0).with_log(true).with_scheduler(Scheduler::Naive);
        let x0 = Coloring::uniform(500, 4, &mut crate::rng::RngStream::new(1)).unwrap();
        let tr = run_cps(&c, &x0).unwrap();
        let mut records = tr.events.unwrap().records;
        let e0 = embed(&x0).unwrap();
        let e1 = tr.snapshots.last().unwrap().edges.clone().unwrap();
        assert!(conservation_ledger(&e0, &e1, &records).balanced);
        let mut dropped = false;
        for r in records.iter_mut().filter(|r| r.kind == Reflect) {
            r.kind = NoOp;
            dropped = true;
        }
        assert!(dropped);
        assert!(!conservation_ledger(&e0, &e1, &records).balanced);
    }
}
