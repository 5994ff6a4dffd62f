//! Ballistic annihilation on the line with velocities in {-1, 0, +1}.
//!
//! Particles move at constant velocity from time 0 and annihilate in pairs on
//! contact, stationary particles included. Collisions are found between
//! currently adjacent survivors and processed in time order from a heap;
//! simultaneous collisions are processed leftmost pair first.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{CpsError, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: f64,
    pub velocity: i8,
    pub alive: bool,
}

impl Particle {
    pub fn new(position: f64, velocity: i8) -> Self {
        Self { position, velocity, alive: true }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BallisticState {
    pub particles: Vec<Particle>,
}

impl BallisticState {
    pub fn new(particles: Vec<Particle>) -> Self {
        Self { particles }
    }

    /// `n` particles at the points of a rate-1 Poisson process on `[0, ∞)`,
    /// velocities uniform over `velocities`. Two draws per particle.
    pub fn poisson(n: usize, velocities: &[i8], rng: &mut RngStream) -> Self {
        assert!(!velocities.is_empty());
        let mut x = 0.0;
        let particles = (0..n)
            .map(|_| {
                x += rng.exponential(1.0);
                let v = velocities[rng.below(velocities.len() as u64) as usize];
                Particle::new(x, v)
            })
            .collect();
        Self { particles }
    }

    pub fn alive_count(&self) -> usize {
        self.particles.iter().filter(|p| p.alive).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Collision {
    pub time: f64,
    pub position: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallisticOutcome {
    /// Survivors advanced to `t_max`; removed particles sit where they died.
    pub state: BallisticState,
    pub collisions: Vec<Collision>,
}

impl BallisticOutcome {
    /// Particles alive at time `t`, given the initial alive count.
    pub fn alive_at(&self, initial_alive: usize, t: f64) -> usize {
        let dead = self.collisions.partition_point(|c| c.time <= t);
        initial_alive - 2 * dead
    }
}

#[derive(PartialEq)]
struct Pending {
    time: f64,
    left: usize,
    right: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.left.cmp(&self.left))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn meeting_time(a: &Particle, b: &Particle) -> Option<f64> {
    let closing = (a.velocity - b.velocity) as f64;
    (closing > 0.0).then(|| (b.position - a.position) / closing)
}

pub fn run_ba(init: &BallisticState, t_max: f64) -> Result<BallisticOutcome> {
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(CpsError::InvalidHorizon(t_max));
    }
    let ps = &init.particles;
    let alive: Vec<usize> = (0..ps.len()).filter(|&i| ps[i].alive).collect();
    for w in alive.windows(2) {
        if ps[w[1]].position <= ps[w[0]].position {
            return Err(CpsError::UnsortedParticles(w[1]));
        }
    }

    const NONE: usize = usize::MAX;
    let mut prev = vec![NONE; ps.len()];
    let mut next = vec![NONE; ps.len()];
    for w in alive.windows(2) {
        next[w[0]] = w[1];
        prev[w[1]] = w[0];
    }
    let mut live: Vec<bool> = ps.iter().map(|p| p.alive).collect();
    let mut heap = BinaryHeap::new();
    let schedule = |heap: &mut BinaryHeap<Pending>, l: usize, r: usize| {
        if let Some(time) = meeting_time(&ps[l], &ps[r]) {
            if time <= t_max {
                heap.push(Pending { time, left: l, right: r });
            }
        }
    };
    for w in alive.windows(2) {
        schedule(&mut heap, w[0], w[1]);
    }

    let mut out = init.clone();
    let mut collisions = Vec::new();
    while let Some(Pending { time, left, right }) = heap.pop() {
        if !live[left] || !live[right] || next[left] != right {
            continue;
        }
        let position = ps[left].position + ps[left].velocity as f64 * time;
        collisions.push(Collision { time, position, left, right });
        for i in [left, right] {
            live[i] = false;
            out.particles[i].alive = false;
            out.particles[i].position = position;
        }
        let (p, q) = (prev[left], next[right]);
        if p != NONE {
            next[p] = q;
        }
        if q != NONE {
            prev[q] = p;
        }
        if p != NONE && q != NONE {
            schedule(&mut heap, p, q);
        }
    }
    for (i, p) in out.particles.iter_mut().enumerate() {
        if live[i] {
            p.position += p.velocity as f64 * t_max;
        }
    }
    Ok(BallisticOutcome { state: out, collisions })
}
