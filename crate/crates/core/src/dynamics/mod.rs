//! Simulation engines: the continuous-time cyclic particle system, the
//! synchronous cyclic cellular automaton, ballistic annihilation and virtual
//! tracer pairs.

pub mod active_set;
pub mod ballistic;
pub mod cca;
pub mod cps;
pub mod step;
pub mod virtual_pair;

pub use active_set::IndexedSet;
pub use ballistic::{run_ba, BallisticOutcome, BallisticState, Collision, Particle};
pub use cca::{cca_step, run_cca, run_cca_with};
pub use cps::{
    run_cps, run_lockstep, Engine, EventLog, EventRecord, LockstepReport, RunStats, Scheduler, SimConfig, Snapshot,
    Trajectory,
};
pub use step::{classify_event, edge_step, vertex_step, Direction, EventKind};
pub use virtual_pair::{simulate_virtual_pair, virtual_pair_from_log};
