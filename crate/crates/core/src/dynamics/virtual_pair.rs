//! Virtual r/l tracers: they move on their own rate-1 clocks and ignore
//! every other particle.

use super::cps::EventLog;
use super::step::Direction;
use crate::rng::RngStream;

/// Time until a virtual r and a virtual l that are `gap` unit steps apart
/// meet, each moving toward the other on an independent rate-1 clock.
///
/// Draws: none for `gap == 0`, otherwise `gap + 1`.
pub fn simulate_virtual_pair(gap: u64, rng: &mut RngStream) -> f64 {
    if gap == 0 {
        return 0.0;
    }
    let mut r_next = rng.exponential(1.0);
    let mut l_next = rng.exponential(1.0);
    let mut remaining = gap;
    loop {
        let now = r_next.min(l_next);
        remaining -= 1;
        if remaining == 0 {
            return now;
        }
        if r_next <= l_next {
            r_next = now + rng.exponential(1.0);
        } else {
            l_next = now + rng.exponential(1.0);
        }
    }
}

/// Meeting time of a virtual r started on edge `r_edge` and a virtual l
/// started on edge `l_edge` at time `t`, both driven by the clock firings in
/// `log`. The log must contain every firing, so it has to come from the
/// naive scheduler.
///
/// Returns `None` if they have not met by the end of the log.
pub fn virtual_pair_from_log(log: &EventLog, n: usize, r_edge: usize, l_edge: usize, t: f64) -> Option<f64> {
    // unwrapped positions, l at or to the right of r
    let mut r = r_edge as i64;
    let mut l = if l_edge >= r_edge { l_edge as i64 } else { (l_edge + n) as i64 };
    if r == l {
        return Some(t);
    }
    let wrap = |p: i64| p.rem_euclid(n as i64) as usize;
    for rec in log.window(t, log.end) {
        match rec.direction {
            Direction::Plus if rec.edge == wrap(r) => r += 1,
            Direction::Minus if rec.edge == wrap(l) => l -= 1,
            _ => continue,
        }
        if r == l {
            return Some(rec.time);
        }
    }
    None
}
