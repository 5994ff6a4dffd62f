//! Continuous-time cyclic particle system on a ring.
//!
//! Every directed edge carries an independent rate-1 Poisson clock. Two
//! schedulers realize this exactly:
//!
//! * `Naive` superposes all `2n` clocks: exponential(2n) waiting times and a
//!   uniformly chosen directed edge per event, most of which are no-ops.
//! * `RejectionFree` only runs the clocks that can change the state. A clock
//!   `(e, +)` matters iff `e` carries an R, `(e, -)` iff it carries an L
//!   (for κ = 2 both clocks of an unequal edge matter). Waiting times are
//!   exponential(k) with `k` the number of live clocks, kept in an
//!   [`IndexedSet`].
//!
//! Two engines apply the chosen clock: `Vertex` updates colors, `Edge`
//! updates the embedded particle configuration directly. Given the same seed
//! they consume identical draws and produce identical trajectories.

use serde::{Deserialize, Serialize};

use super::active_set::IndexedSet;
use super::step::{apply_edge, apply_vertex, classify_kinds, clock_sites, target_edge, Direction, EventKind};
use crate::error::{CpsError, Result};
use crate::lattice::{embed, reconstruct, Coloring, EdgeConfig, EdgeKind};
use crate::rng::{replica_seed, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    Vertex,
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheduler {
    Naive,
    RejectionFree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub kappa: u8,
    pub n_sites: usize,
    pub seed: u64,
    pub t_max: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_engine")]
    pub engine: Engine,
    #[serde(default = "default_scheduler")]
    pub scheduler: Scheduler,
    #[serde(default)]
    pub log_events: bool,
}

fn default_engine() -> Engine {
    Engine::Edge
}

fn default_scheduler() -> Scheduler {
    Scheduler::RejectionFree
}

impl SimConfig {
    pub fn new(kappa: u8, n_sites: usize, seed: u64, t_max: f64) -> Self {
        Self {
            kappa,
            n_sites,
            seed,
            t_max,
            snapshot_times: vec![0.0, t_max],
            engine: default_engine(),
            scheduler: default_scheduler(),
            log_events: false,
        }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_scheduler(mut self, scheduler: Scheduler) -> Self {
        self.scheduler = scheduler;
        self
    }

    pub fn with_log(mut self, log_events: bool) -> Self {
        self.log_events = log_events;
        self
    }

    /// Seed of the stream the initial coloring is drawn from.
    pub fn initial_seed(&self) -> u64 {
        replica_seed(self.seed, INITIAL_STREAM)
    }

    /// Seed of the stream driving the clocks.
    pub fn dynamics_seed(&self) -> u64 {
        replica_seed(self.seed, DYNAMICS_STREAM)
    }

    /// Uniform product-measure start drawn from [`Self::initial_seed`].
    pub fn uniform_start(&self) -> Result<Coloring> {
        Coloring::uniform(self.n_sites, self.kappa, &mut RngStream::new(self.initial_seed()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(CpsError::TooFewSites(self.n_sites));
        }
        if self.kappa < 2 {
            return Err(CpsError::TooFewColors(self.kappa));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(CpsError::InvalidHorizon(self.t_max));
        }
        for w in self.snapshot_times.windows(2) {
            if w[1] < w[0] {
                return Err(CpsError::UnsortedSnapshots);
            }
        }
        if let Some(&t) = self.snapshot_times.iter().find(|&&t| !(0.0..=self.t_max).contains(&t)) {
            return Err(CpsError::SnapshotOutOfRange(t));
        }
        let edge_level = self.engine == Engine::Edge || self.log_events;
        if edge_level && self.kappa != 3 && self.kappa != 4 {
            let engine = if self.engine == Engine::Edge { "Edge" } else { "event log" };
            return Err(CpsError::EngineKappa { engine, kappa: self.kappa });
        }
        Ok(())
    }
}

const INITIAL_STREAM: u64 = u64::MAX;
const DYNAMICS_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time: f64,
    pub edge: usize,
    pub direction: Direction,
    pub kind: EventKind,
}

impl EventRecord {
    pub fn new(time: f64, edge: usize, direction: Direction, kind: EventKind) -> Self {
        Self { time, edge, direction, kind }
    }
}

/// Event records together with the time window they cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub start: f64,
    pub end: f64,
    pub records: Vec<EventRecord>,
}

impl EventLog {
    pub fn covers(&self, t: f64, s: f64) -> bool {
        self.start <= t && t <= s && s <= self.end
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.records.iter().filter(|r| r.kind == kind).count()
    }

    /// Records with `t < time <= s`.
    pub fn window(&self, t: f64, s: f64) -> &[EventRecord] {
        let lo = self.records.partition_point(|r| r.time <= t);
        let hi = self.records.partition_point(|r| r.time <= s);
        &self.records[lo..hi]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub coloring: Coloring,
    /// `embed(coloring)`; absent for κ ≥ 5.
    pub edges: Option<EdgeConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    /// Clock firings processed, including no-ops.
    pub firings: u64,
    /// Firings that changed the state.
    pub state_changes: u64,
    /// Per [`EventKind::index`]; only filled for κ ∈ {3, 4}.
    pub kind_counts: [u64; 6],
    /// Set if any firing increased the number of unequal adjacent pairs.
    pub particle_count_increased: bool,
}

impl RunStats {
    pub fn count(&self, kind: EventKind) -> u64 {
        self.kind_counts[kind.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub events: Option<EventLog>,
    pub final_time: f64,
    pub stats: RunStats,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }
}

fn nonzero(d: u8) -> i64 {
    (d != 0) as i64
}

trait State {
    fn n(&self) -> usize;
    fn kappa(&self) -> u8;
    /// Applies a clock; returns (changed, kind, particle delta).
    fn fire(&mut self, edge: usize, dir: Direction) -> (bool, EventKind, i64);
    fn clock_live(&self, edge: usize, dir: Direction) -> bool;
    fn snapshot(&self, time: f64) -> Snapshot;
}

struct VertexState {
    x: Coloring,
}

impl VertexState {
    #[inline]
    fn diff(&self, edge: usize) -> u8 {
        let s = self.x.sites();
        let n = s.len();
        let k = self.x.kappa();
        let right = if edge + 1 == n { 0 } else { edge + 1 };
        (s[right] + k - s[edge]) % k
    }
}

impl State for VertexState {
    fn n(&self) -> usize {
        self.x.len()
    }

    fn kappa(&self) -> u8 {
        self.x.kappa()
    }

    #[inline]
    fn fire(&mut self, edge: usize, dir: Direction) -> (bool, EventKind, i64) {
        let n = self.n();
        let k = self.kappa();
        let ahead = target_edge(edge, dir, n);
        let (d_here, d_ahead) = (self.diff(edge), self.diff(ahead));
        let kind = if k == 3 || k == 4 {
            classify_kinds(EdgeKind::from_residue(d_here, k), EdgeKind::from_residue(d_ahead, k), dir, k)
        } else {
            EventKind::NoOp
        };
        let changed = apply_vertex(self.x.sites_mut(), k, edge, dir);
        let delta = if changed {
            nonzero(self.diff(edge)) + nonzero(self.diff(ahead)) - nonzero(d_here) - nonzero(d_ahead)
        } else {
            0
        };
        (changed, kind, delta)
    }

    #[inline]
    fn clock_live(&self, edge: usize, dir: Direction) -> bool {
        let (src, dst) = clock_sites(edge, dir, self.n());
        let s = self.x.sites();
        (s[dst] + 1) % self.kappa() == s[src]
    }

    fn snapshot(&self, time: f64) -> Snapshot {
        let edges = embed(&self.x).ok();
        Snapshot { time, coloring: self.x.clone(), edges }
    }
}

struct EdgeState {
    e: EdgeConfig,
    /// Color of site 0, tracked so colorings can be reconstructed.
    base: u8,
}

impl State for EdgeState {
    fn n(&self) -> usize {
        self.e.len()
    }

    fn kappa(&self) -> u8 {
        self.e.kappa()
    }

    #[inline]
    fn fire(&mut self, edge: usize, dir: Direction) -> (bool, EventKind, i64) {
        let n = self.n();
        let k = self.kappa();
        let ahead = target_edge(edge, dir, n);
        let before =
            (self.e.edges()[edge] != EdgeKind::Vacant) as i64 + (self.e.edges()[ahead] != EdgeKind::Vacant) as i64;
        let kind = apply_edge(self.e.edges_mut(), k, edge, dir);
        if kind == EventKind::NoOp {
            return (false, kind, 0);
        }
        let (_, dst) = clock_sites(edge, dir, n);
        if dst == 0 {
            // every successful update raises the target color by one
            self.base = (self.base + 1) % k;
        }
        let after =
            (self.e.edges()[edge] != EdgeKind::Vacant) as i64 + (self.e.edges()[ahead] != EdgeKind::Vacant) as i64;
        (true, kind, after - before)
    }

    #[inline]
    fn clock_live(&self, edge: usize, dir: Direction) -> bool {
        let want = match dir {
            Direction::Plus => EdgeKind::R,
            Direction::Minus => EdgeKind::L,
        };
        self.e.edges()[edge] == want
    }

    fn snapshot(&self, time: f64) -> Snapshot {
        let coloring = reconstruct(self.base, &self.e).expect("edge state stays realizable");
        Snapshot { time, coloring, edges: Some(self.e.clone()) }
    }
}

#[inline]
fn clock_id(edge: usize, dir: Direction) -> usize {
    2 * edge + (dir == Direction::Minus) as usize
}

#[inline]
fn clock_of(id: usize) -> (usize, Direction) {
    let dir = if id & 1 == 0 { Direction::Plus } else { Direction::Minus };
    (id >> 1, dir)
}

/// Draws the next clock to fire, or `None` when the horizon is passed or
/// nothing can change any more.
struct Clocks {
    scheduler: Scheduler,
    live: IndexedSet,
    n: usize,
}

impl Clocks {
    fn new<S: State>(scheduler: Scheduler, state: &S) -> Self {
        let n = state.n();
        let mut live = IndexedSet::new(if scheduler == Scheduler::RejectionFree { 2 * n } else { 0 });
        if scheduler == Scheduler::RejectionFree {
            for edge in 0..n {
                for dir in [Direction::Plus, Direction::Minus] {
                    if state.clock_live(edge, dir) {
                        live.insert(clock_id(edge, dir));
                    }
                }
            }
        }
        Self { scheduler, live, n }
    }

    #[inline]
    fn next(&self, rng: &mut RngStream, now: f64) -> Option<(f64, usize, Direction)> {
        match self.scheduler {
            Scheduler::Naive => {
                let total = 2 * self.n;
                let t = now + rng.exponential(total as f64);
                let (edge, dir) = clock_of(rng.below(total as u64) as usize);
                Some((t, edge, dir))
            }
            Scheduler::RejectionFree => {
                let k = self.live.len();
                if k == 0 {
                    return None;
                }
                let t = now + rng.exponential(k as f64);
                let (edge, dir) = clock_of(self.live.sample(rng)?);
                Some((t, edge, dir))
            }
        }
    }

    #[inline]
    fn refresh<S: State>(&mut self, state: &S, edge: usize, dir: Direction) {
        if self.scheduler == Scheduler::RejectionFree {
            for e in [edge, target_edge(edge, dir, self.n)] {
                for d in [Direction::Plus, Direction::Minus] {
                    self.live.set(clock_id(e, d), state.clock_live(e, d));
                }
            }
        }
    }
}

fn run_state<S: State>(cfg: &SimConfig, mut state: S) -> Result<Trajectory> {
    let mut rng = RngStream::new(cfg.dynamics_seed());
    let mut clocks = Clocks::new(cfg.scheduler, &state);
    let mut snapshots = Vec::with_capacity(cfg.snapshot_times.len());
    let mut pending = cfg.snapshot_times.iter().copied().peekable();
    let mut records = Vec::new();
    let mut stats = RunStats::default();
    let mut now = 0.0f64;

    while let Some((t, edge, dir)) = clocks.next(&mut rng, now) {
        if t > cfg.t_max {
            break;
        }
        if t <= now {
            return Err(CpsError::SimultaneousEvents(t));
        }
        while let Some(&s) = pending.peek() {
            if s >= t {
                break;
            }
            snapshots.push(state.snapshot(s));
            pending.next();
        }
        now = t;
        let (changed, kind, delta) = state.fire(edge, dir);
        stats.firings += 1;
        if changed {
            stats.state_changes += 1;
            clocks.refresh(&state, edge, dir);
        }
        if delta > 0 {
            stats.particle_count_increased = true;
        }
        let k = state.kappa();
        if k == 3 || k == 4 {
            stats.kind_counts[kind.index()] += 1;
        }
        if cfg.log_events {
            records.push(EventRecord { time: t, edge, direction: dir, kind });
        }
    }
    snapshots.extend(pending.map(|s| state.snapshot(s)));

    let events = cfg.log_events.then_some(EventLog { start: 0.0, end: cfg.t_max, records });
    Ok(Trajectory { snapshots, events, final_time: cfg.t_max, stats })
}

/// Runs the cyclic particle system from `x0` up to `cfg.t_max`.
pub fn run_cps(cfg: &SimConfig, x0: &Coloring) -> Result<Trajectory> {
    cfg.validate()?;
    check_start(cfg, x0)?;
    match cfg.engine {
        Engine::Vertex => run_state(cfg, VertexState { x: x0.clone() }),
        Engine::Edge => run_state(cfg, EdgeState { e: embed(x0)?, base: x0.sites()[0] }),
    }
}

fn check_start(cfg: &SimConfig, x0: &Coloring) -> Result<()> {
    if x0.kappa() != cfg.kappa || x0.len() != cfg.n_sites {
        return Err(CpsError::Spec(format!(
            "initial coloring has {} sites and {} colors, config expects {} and {}",
            x0.len(),
            x0.kappa(),
            cfg.n_sites,
            cfg.kappa
        )));
    }
    Ok(())
}

/// Outcome of running both engines on one shared event stream.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LockstepReport {
    pub firings: u64,
    /// Events after which `embed(vertex state) != edge state`, or the two
    /// engines disagreed on the event kind or on which clocks are live.
    pub mismatches: u64,
    pub first_mismatch_time: Option<f64>,
}

/// Drives a vertex engine and an edge engine with the same clock firings
/// (scheduled from the edge engine) and compares them after every event.
pub fn run_lockstep(cfg: &SimConfig, x0: &Coloring) -> Result<LockstepReport> {
    cfg.validate()?;
    check_start(cfg, x0)?;
    let mut vertex = VertexState { x: x0.clone() };
    let mut edge_state = EdgeState { e: embed(x0)?, base: x0.sites()[0] };
    let mut rng = RngStream::new(cfg.dynamics_seed());
    let mut clocks = Clocks::new(cfg.scheduler, &edge_state);
    let mut report = LockstepReport::default();
    let mut now = 0.0;
    let n = cfg.n_sites;

    while let Some((t, edge, dir)) = clocks.next(&mut rng, now) {
        if t > cfg.t_max {
            break;
        }
        if t <= now {
            return Err(CpsError::SimultaneousEvents(t));
        }
        now = t;
        let (cv, kv, _) = vertex.fire(edge, dir);
        let (ce, ke, _) = edge_state.fire(edge, dir);
        if ce {
            clocks.refresh(&edge_state, edge, dir);
        }
        report.firings += 1;
        let ahead = target_edge(edge, dir, n);
        let live_agree = [edge, ahead].iter().all(|&e| {
            [Direction::Plus, Direction::Minus].iter().all(|&d| vertex.clock_live(e, d) == edge_state.clock_live(e, d))
        });
        let states_agree = embed(&vertex.x)? == edge_state.e && vertex.x.sites()[0] == edge_state.base;
        if cv != ce || kv != ke || !live_agree || !states_agree {
            report.mismatches += 1;
            report.first_mismatch_time.get_or_insert(t);
        }
    }
    Ok(report)
}
