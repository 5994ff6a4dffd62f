//! Experiment specifications, replica orchestration and on-disk artifacts.
//!
//! A spec is a JSON object. Required keys are `model`, `n_sites`, `seed`,
//! `t_max`, plus `kappa` for CPS and CCA. For BA, `n_sites` is the number of
//! particles. Replica `k` runs with seed `replica_seed(seed, k)`; replicas
//! may run on several threads (capped by `CPSLAB_THREADS`) but their results
//! are merged in replica order, so every artifact is byte-identical for a
//! given spec.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{
    clustering_probe, conservation_ledger, default_snapshot_grid, fit_power_law, interval_matching,
    mass_transport_audit, running_sums, snapshot_densities, spatial_agreement, ClusteringEstimate, Densities,
    DensityAccumulator, DensityTrace, LedgerReport, RateFit, SurvivalTable, TransportAudit,
};
use crate::dynamics::{
    run_ba, run_cca_with, run_cps, BallisticState, Collision, Engine, EventLog, EventRecord, Scheduler, SimConfig,
    Snapshot,
};
use crate::error::{CpsError, Result};
use crate::lattice::{embed, Coloring, EdgeKind};
use crate::raster::render_spacetime;
use crate::rng::{replica_seed, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    CPS,
    CCA,
    BA,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Densities,
    /// Water-filling matching of the `len` edges from `start`, at every
    /// snapshot.
    Matching {
        start: usize,
        len: usize,
    },
    /// Blockade audit and conservation ledger over `(t, s]`.
    Audit {
        t: f64,
        s: f64,
    },
    RateFit {
        t_min: f64,
        t_max: f64,
    },
    /// Running-sum criterion against the automaton at step `t`.
    Survival {
        t: usize,
    },
    /// Agreement of sites `x` and `y` at the final time.
    Clustering {
        x: usize,
        y: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub model: Model,
    /// Unused (0) for BA.
    pub kappa: u8,
    pub n_sites: usize,
    pub seed: u64,
    pub t_max: f64,
    pub snapshot_times: Vec<f64>,
    pub engine: Engine,
    pub scheduler: Scheduler,
    pub log_events: bool,
    pub replicas: usize,
    pub output_dir: PathBuf,
    pub raster: bool,
    pub write_snapshots: bool,
    /// Empty unless the model is BA.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub velocities: Vec<i8>,
    pub analyses: Vec<Analysis>,
}

pub const DEFAULT_OUTPUT_DIR: &str = "cpslab-out";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    model: Model,
    kappa: Option<u8>,
    n_sites: Option<usize>,
    seed: Option<u64>,
    t_max: Option<f64>,
    snapshot_times: Option<Vec<f64>>,
    engine: Option<Engine>,
    scheduler: Option<Scheduler>,
    log_events: Option<bool>,
    replicas: Option<usize>,
    output_dir: Option<PathBuf>,
    raster: Option<bool>,
    write_snapshots: Option<bool>,
    velocities: Option<Vec<i8>>,
    #[serde(default)]
    analyses: Vec<Value>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct MatchingParams {
    start: Option<usize>,
    len: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct WindowParams {
    t: Option<f64>,
    s: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FitParams {
    t_min: Option<f64>,
    t_max: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SurvivalParams {
    t: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ClusteringParams {
    x: Option<usize>,
    y: Option<usize>,
}

enum RawAnalysis {
    Densities,
    Matching(MatchingParams),
    Audit(WindowParams),
    RateFit(FitParams),
    Survival(SurvivalParams),
    Clustering(ClusteringParams),
}

fn spec_err(msg: impl Into<String>) -> CpsError {
    CpsError::Spec(msg.into())
}

fn params<T: for<'de> Deserialize<'de>>(name: &str, p: Value) -> Result<T> {
    serde_json::from_value(p).map_err(|e| spec_err(format!("invalid parameters for analysis `{name}`: {e}")))
}

fn parse_analysis(v: Value) -> Result<RawAnalysis> {
    let (name, p) = match v {
        Value::String(name) => (name, Value::Object(Default::default())),
        Value::Object(map) if map.len() == 1 => map.into_iter().next().expect("one entry"),
        other => return Err(spec_err(format!("analysis entries must be a name or a single-key object, got {other}"))),
    };
    Ok(match name.as_str() {
        "densities" => {
            params::<NoParams>(&name, p)?;
            RawAnalysis::Densities
        }
        "matching" => RawAnalysis::Matching(params(&name, p)?),
        "audit" => RawAnalysis::Audit(params(&name, p)?),
        "rate_fit" => RawAnalysis::RateFit(params(&name, p)?),
        "survival" => RawAnalysis::Survival(params(&name, p)?),
        "clustering" => RawAnalysis::Clustering(params(&name, p)?),
        _ => return Err(spec_err(format!("unknown analysis `{name}`"))),
    })
}

fn required<T>(v: Option<T>, key: &str, model: Model) -> Result<T> {
    v.ok_or_else(|| spec_err(format!("missing required field `{key}` for model {model}")))
}

/// Parses and validates a JSON experiment spec, filling in defaults.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let value: Value = serde_json::from_str(text).map_err(|e| spec_err(format!("malformed spec JSON: {e}")))?;
    let raw: RawSpec = serde_json::from_value(value).map_err(|e| spec_err(format!("invalid spec: {e}")))?;
    let model = raw.model;
    let analyses = raw.analyses.into_iter().map(parse_analysis).collect::<Result<Vec<_>>>()?;

    // model/analysis consistency, checked before required fields so the
    // reported error names the real conflict
    let inconsistent =
        |what: &str, why: &str| spec_err(format!("analysis `{what}` is inconsistent with the spec: {why}"));
    for a in &analyses {
        match a {
            RawAnalysis::Audit(_) => {
                if model != Model::CPS || raw.kappa.is_some_and(|k| k != 4) || raw.log_events == Some(false) {
                    return Err(inconsistent("audit", "audit requires model CPS with kappa 4 and event logging"));
                }
            }
            RawAnalysis::Matching(_) => {
                if model == Model::BA || raw.kappa.is_some_and(|k| k != 3 && k != 4) {
                    return Err(inconsistent("matching", "matching requires CPS or CCA with kappa 3 or 4"));
                }
            }
            RawAnalysis::Survival(_) => {
                if model != Model::CCA || raw.kappa.is_some_and(|k| k != 3) {
                    return Err(inconsistent("survival", "survival requires model CCA with kappa 3"));
                }
            }
            RawAnalysis::Clustering(_) => {
                if model == Model::BA {
                    return Err(inconsistent("clustering", "clustering requires a coloring model (CPS or CCA)"));
                }
            }
            RawAnalysis::Densities | RawAnalysis::RateFit(_) => {}
        }
    }
    if model != Model::CPS && (raw.engine.is_some() || raw.scheduler.is_some() || raw.log_events.is_some()) {
        return Err(spec_err(format!("engine, scheduler and log_events only apply to model CPS, not {model}")));
    }
    if model == Model::BA {
        if raw.kappa.is_some() {
            return Err(spec_err("kappa does not apply to model BA"));
        }
        if raw.raster == Some(true) || raw.write_snapshots == Some(true) {
            return Err(spec_err("raster and write_snapshots require a coloring model (CPS or CCA)"));
        }
    } else if raw.velocities.is_some() {
        return Err(spec_err(format!("velocities only apply to model BA, not {model}")));
    }

    let n_sites = required(raw.n_sites, "n_sites", model)?;
    let seed = required(raw.seed, "seed", model)?;
    let t_max = required(raw.t_max, "t_max", model)?;
    let kappa = if model == Model::BA { 0 } else { required(raw.kappa, "kappa", model)? };

    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(CpsError::InvalidHorizon(t_max));
    }
    if model == Model::CCA && t_max.fract() != 0.0 {
        return Err(spec_err(format!("CCA t_max must be a whole number of steps, got {t_max}")));
    }
    let replicas = raw.replicas.unwrap_or(1);
    if replicas == 0 {
        return Err(spec_err("replicas must be at least 1"));
    }
    let velocities = match model {
        Model::BA => raw.velocities.unwrap_or_else(|| vec![-1, 1]),
        _ => Vec::new(),
    };
    if model == Model::BA && velocities.is_empty() || velocities.iter().any(|v| !(-1..=1).contains(v)) {
        return Err(spec_err("velocities must be a nonempty list drawn from -1, 0, 1"));
    }
    let mut snapshot_times = raw.snapshot_times.unwrap_or_else(|| default_snapshot_grid(t_max));

    let mut resolved = Vec::with_capacity(analyses.len());
    let mut wants_audit = false;
    for a in analyses {
        resolved.push(match a {
            RawAnalysis::Densities => Analysis::Densities,
            RawAnalysis::Matching(p) => {
                let start = p.start.unwrap_or(0);
                let len = p.len.unwrap_or(n_sites.min(64));
                if start >= n_sites || len == 0 || len > n_sites {
                    return Err(spec_err(format!(
                        "matching interval start {start}, len {len} does not fit a ring of {n_sites} edges"
                    )));
                }
                Analysis::Matching { start, len }
            }
            RawAnalysis::Audit(p) => {
                let (t, s) = (p.t.unwrap_or(0.0), p.s.unwrap_or(t_max));
                if !(0.0 <= t && t <= s && s <= t_max) {
                    return Err(spec_err(format!("audit window [{t}, {s}] must lie in [0, {t_max}]")));
                }
                wants_audit = true;
                snapshot_times.extend([t, s]);
                Analysis::Audit { t, s }
            }
            RawAnalysis::RateFit(p) => {
                let (lo, hi) = (p.t_min.unwrap_or(1.0), p.t_max.unwrap_or(t_max));
                if !(lo > 0.0 && lo < hi) {
                    return Err(spec_err(format!("rate_fit window [{lo}, {hi}] must satisfy 0 < t_min < t_max")));
                }
                Analysis::RateFit { t_min: lo, t_max: hi }
            }
            RawAnalysis::Survival(p) => {
                let t = p.t.unwrap_or_else(|| (t_max as usize).min(n_sites.saturating_sub(3) / 2));
                if t as f64 > t_max || n_sites <= 2 * t + 2 {
                    return Err(spec_err(format!(
                        "survival step {t} needs t <= t_max and more than {} sites",
                        2 * t + 2
                    )));
                }
                snapshot_times.push(t as f64);
                Analysis::Survival { t }
            }
            RawAnalysis::Clustering(p) => {
                let (x, y) = (p.x.unwrap_or(0), p.y.unwrap_or(1));
                if x >= n_sites || y >= n_sites {
                    return Err(CpsError::EdgeOutOfRange { index: x.max(y), n: n_sites });
                }
                Analysis::Clustering { x, y }
            }
        });
    }
    if resolved.is_empty() {
        resolved.push(Analysis::Densities);
    }
    if snapshot_times.iter().any(|t| !t.is_finite()) {
        return Err(spec_err("snapshot times must be finite"));
    }
    snapshot_times.sort_by(f64::total_cmp);
    snapshot_times.dedup();
    if let Some(&t) = snapshot_times.iter().find(|&&t| !(0.0..=t_max).contains(&t)) {
        return Err(CpsError::SnapshotOutOfRange(t));
    }
    if model == Model::CCA && snapshot_times.iter().any(|t| t.fract() != 0.0) {
        return Err(spec_err("CCA snapshot times must be whole steps"));
    }

    let edge_capable = kappa == 3 || kappa == 4;
    let spec = ExperimentSpec {
        model,
        kappa,
        n_sites,
        seed,
        t_max,
        snapshot_times,
        engine: raw.engine.unwrap_or(if edge_capable { Engine::Edge } else { Engine::Vertex }),
        scheduler: raw.scheduler.unwrap_or(Scheduler::RejectionFree),
        log_events: raw.log_events.unwrap_or(wants_audit),
        replicas,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        raster: raw.raster.unwrap_or(false),
        write_snapshots: raw.write_snapshots.unwrap_or(false),
        velocities,
        analyses: resolved,
    };
    match model {
        Model::CPS => spec.sim_config(0).validate()?,
        Model::CCA => {
            if n_sites < 2 {
                return Err(CpsError::TooFewSites(n_sites));
            }
            if kappa < 2 {
                return Err(CpsError::TooFewColors(kappa));
            }
        }
        Model::BA => {
            if n_sites == 0 {
                return Err(spec_err("BA needs at least one particle"));
            }
        }
    }
    Ok(spec)
}

pub fn read_spec(path: &Path) -> Result<ExperimentSpec> {
    parse_spec(&fs::read_to_string(path)?)
}

impl ExperimentSpec {
    /// Simulation config of replica `k` (CPS and CCA initial colorings).
    pub fn sim_config(&self, k: usize) -> SimConfig {
        SimConfig::new(self.kappa, self.n_sites, replica_seed(self.seed, k as u64), self.t_max)
            .with_snapshots(self.snapshot_times.clone())
            .with_engine(self.engine)
            .with_scheduler(self.scheduler)
            .with_log(self.log_events)
    }

    fn snapshot_index(&self, t: f64) -> usize {
        self.snapshot_times.iter().position(|&s| s == t).expect("analysis times are on the grid")
    }
}

/// Number of worker threads requested through `CPSLAB_THREADS`, if set.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var("CPSLAB_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(spec_err(format!("CPSLAB_THREADS must be a positive integer, got `{v}`"))),
        },
    }
}

/// Runs `f(0), ..., f(replicas - 1)` in parallel and returns the results in
/// replica order. Errors carry the failing replica index.
pub fn map_replicas<T, F>(replicas: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let run = || {
        (0..replicas)
            .into_par_iter()
            .map(|k| f(k).map_err(|e| CpsError::Replica { replica: k, source: Box::new(e) }))
            .collect::<Result<Vec<T>>>()
    };
    match thread_limit()? {
        None => run(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CpsError::Threads(e.to_string()))?
            .install(run),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub replica: usize,
    pub audit: TransportAudit,
    pub ledger: LedgerReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingRow {
    pub t: f64,
    pub start: usize,
    pub len: usize,
    pub mean_size: f64,
    /// Replicas where `2|M|` differs from the running-sum formula.
    pub formula_mismatches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub replica: usize,
    pub t: usize,
    pub edges_checked: usize,
    pub r_present: usize,
    pub mismatches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringRow {
    pub t: f64,
    pub x: usize,
    pub y: usize,
    pub across_replicas: ClusteringEstimate,
    pub spatial: ClusteringEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub t_min: f64,
    pub t_max: f64,
    pub fit: Option<RateFit>,
    pub error: Option<String>,
}

/// Key/value table printed after a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<(String, String)>,
}

impl Summary {
    fn add(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.rows.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.rows.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.rows {
            writeln!(f, "{k:<width$}  {v}")?;
        }
        Ok(())
    }
}

/// Everything an experiment produced, before it is written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub trace: DensityTrace,
    pub fits: Vec<FitRow>,
    /// Snapshots of replica 0 (CPS and CCA).
    pub snapshots: Vec<Snapshot>,
    /// Event log of replica 0 when logging is on.
    pub events: Option<EventLog>,
    /// Collisions of replica 0 (BA).
    pub collisions: Option<Vec<Collision>>,
    pub audits: Vec<AuditRow>,
    pub matching: Vec<MatchingRow>,
    pub survival: Vec<SurvivalRow>,
    pub clustering: Vec<ClusteringRow>,
    pub summary: Summary,
}

#[derive(Default)]
struct ReplicaOutput {
    densities: Vec<Densities>,
    snapshots: Vec<Snapshot>,
    events: Option<EventLog>,
    collisions: Option<Vec<Collision>>,
    final_coloring: Option<Coloring>,
    audits: Vec<(TransportAudit, LedgerReport)>,
    /// Per matching analysis, per snapshot: (size, formula holds).
    matchings: Vec<Vec<(usize, bool)>>,
    survival: Vec<SurvivalRow>,
    firings: u64,
    count_increased: bool,
}

fn matchings_for(spec: &ExperimentSpec, snapshots: &[Snapshot]) -> Vec<Vec<(usize, bool)>> {
    spec.analyses
        .iter()
        .filter_map(|a| match *a {
            Analysis::Matching { start, len } => Some(
                snapshots
                    .iter()
                    .map(|s| {
                        let edges = s.edges.as_ref().expect("matching needs 3 or 4 colors");
                        let m = interval_matching(edges.edges(), start, len);
                        let window: Vec<EdgeKind> =
                            (0..len).map(|k| edges.edges()[(start + k) % edges.len()]).collect();
                        (m.len(), running_sums(&window).matched_particles() == 2 * m.len() as i64)
                    })
                    .collect(),
            ),
            _ => None,
        })
        .collect()
}

fn cps_replica(spec: &ExperimentSpec, k: usize) -> Result<ReplicaOutput> {
    let cfg = spec.sim_config(k);
    let x0 = cfg.uniform_start()?;
    let traj = run_cps(&cfg, &x0)?;
    let mut out = ReplicaOutput {
        densities: traj.snapshots.iter().map(snapshot_densities).collect(),
        matchings: matchings_for(spec, &traj.snapshots),
        firings: traj.stats.firings,
        count_increased: traj.stats.particle_count_increased,
        final_coloring: traj.last().map(|s| s.coloring.clone()),
        ..Default::default()
    };
    for a in &spec.analyses {
        if let Analysis::Audit { t, s } = *a {
            let log = traj.events.as_ref().expect("audit specs log events");
            let before = traj.snapshots[spec.snapshot_index(t)].edges.as_ref().expect("4 colors embed");
            let after = traj.snapshots[spec.snapshot_index(s)].edges.as_ref().expect("4 colors embed");
            out.audits
                .push((mass_transport_audit(before, log, t, s)?, conservation_ledger(before, after, log.window(t, s))));
        }
    }
    if k == 0 {
        out.snapshots = traj.snapshots;
        out.events = traj.events;
    }
    Ok(out)
}

fn cca_replica(spec: &ExperimentSpec, k: usize) -> Result<ReplicaOutput> {
    let y0 = spec.sim_config(k).uniform_start()?;
    let survival_t: Vec<usize> = spec
        .analyses
        .iter()
        .filter_map(|a| match a {
            Analysis::Survival { t } => Some(*t),
            _ => None,
        })
        .collect();
    let steps = spec.t_max as usize;
    let mut rows: BTreeMap<usize, Vec<u8>> = BTreeMap::new();
    run_cca_with(&y0, steps, |t, row| {
        if spec.snapshot_times.contains(&(t as f64)) {
            rows.insert(t, row.to_vec());
        }
    });
    let mut snapshots = Vec::with_capacity(rows.len());
    for (t, sites) in rows {
        let coloring = Coloring::new(spec.kappa, sites)?;
        let edges = embed(&coloring).ok();
        snapshots.push(Snapshot { time: t as f64, coloring, edges });
    }
    let mut out = ReplicaOutput {
        densities: snapshots.iter().map(snapshot_densities).collect(),
        matchings: matchings_for(spec, &snapshots),
        final_coloring: snapshots.last().map(|s| s.coloring.clone()),
        ..Default::default()
    };
    if !survival_t.is_empty() {
        let table = SurvivalTable::new(&y0)?;
        for t in survival_t {
            let edges = snapshots[spec.snapshot_index(t as f64)].edges.as_ref().expect("3 colors embed");
            let mut row = SurvivalRow { replica: k, t, edges_checked: edges.len(), r_present: 0, mismatches: 0 };
            for (x, e) in edges.edges().iter().enumerate() {
                let present = *e == EdgeKind::R;
                row.r_present += present as usize;
                row.mismatches += (table.query(x, t)? != present) as usize;
            }
            out.survival.push(row);
        }
    }
    if k == 0 {
        out.snapshots = snapshots;
    }
    Ok(out)
}

fn ba_replica(spec: &ExperimentSpec, k: usize) -> Result<ReplicaOutput> {
    let mut rng = RngStream::new(replica_seed(spec.seed, k as u64));
    let init = BallisticState::poisson(spec.n_sites, &spec.velocities, &mut rng);
    let outcome = run_ba(&init, spec.t_max)?;
    let n = spec.n_sites as f64;
    let densities = spec
        .snapshot_times
        .iter()
        .map(|&t| {
            let r = outcome.alive_at(spec.n_sites, t) as f64 / n;
            Densities { p: r, q: 0.0, r }
        })
        .collect();
    Ok(ReplicaOutput { densities, collisions: (k == 0).then_some(outcome.collisions), ..Default::default() })
}

/// Runs every replica and aggregates the results in memory.
pub fn execute(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let outputs = map_replicas(spec.replicas, |k| match spec.model {
        Model::CPS => cps_replica(spec, k),
        Model::CCA => cca_replica(spec, k),
        Model::BA => ba_replica(spec, k),
    })?;

    let mut acc = DensityAccumulator::new(spec.snapshot_times.clone(), spec.n_sites);
    for o in &outputs {
        acc.push(&o.densities);
    }
    let trace = acc.trace();

    let fits = spec
        .analyses
        .iter()
        .filter_map(|a| match *a {
            Analysis::RateFit { t_min, t_max } => Some(match fit_power_law(&trace, (t_min, t_max)) {
                Ok(fit) => FitRow { t_min, t_max, fit: Some(fit), error: None },
                Err(e) => FitRow { t_min, t_max, fit: None, error: Some(e.to_string()) },
            }),
            _ => None,
        })
        .collect::<Vec<_>>();

    let mut audits = Vec::new();
    for (replica, o) in outputs.iter().enumerate() {
        for (audit, ledger) in &o.audits {
            audits.push(AuditRow { replica, audit: audit.clone(), ledger: ledger.clone() });
        }
    }

    let mut matching = Vec::new();
    let matching_specs = spec.analyses.iter().filter_map(|a| match *a {
        Analysis::Matching { start, len } => Some((start, len)),
        _ => None,
    });
    for (j, (start, len)) in matching_specs.enumerate() {
        for (i, &t) in spec.snapshot_times.iter().enumerate() {
            let sizes = outputs.iter().map(|o| o.matchings[j][i]);
            let total: usize = sizes.clone().map(|(m, _)| m).sum();
            let formula_mismatches = sizes.filter(|&(_, ok)| !ok).count();
            matching.push(MatchingRow {
                t,
                start,
                len,
                mean_size: total as f64 / outputs.len() as f64,
                formula_mismatches,
            });
        }
    }

    let survival: Vec<SurvivalRow> = outputs.iter().flat_map(|o| o.survival.iter().cloned()).collect();

    let mut clustering = Vec::new();
    let finals: Vec<Coloring> = outputs.iter().filter_map(|o| o.final_coloring.clone()).collect();
    for a in &spec.analyses {
        if let Analysis::Clustering { x, y } = *a {
            clustering.push(ClusteringRow {
                t: *spec.snapshot_times.last().unwrap_or(&0.0),
                x,
                y,
                across_replicas: clustering_probe(&finals, x, y)?,
                spatial: spatial_agreement(&finals, x.abs_diff(y)),
            });
        }
    }

    let mut outputs = outputs;
    let first = outputs.swap_remove(0);
    let mut outcome = ExperimentOutcome {
        trace,
        fits,
        snapshots: first.snapshots,
        events: first.events,
        collisions: first.collisions,
        audits,
        matching,
        survival,
        clustering,
        summary: Summary::default(),
    };
    let firings: u64 = first.firings + outputs.iter().map(|o| o.firings).sum::<u64>();
    let increased = first.count_increased || outputs.iter().any(|o| o.count_increased);
    outcome.summary = summarize(spec, &outcome, firings, increased);
    Ok(outcome)
}

fn summarize(spec: &ExperimentSpec, o: &ExperimentOutcome, firings: u64, increased: bool) -> Summary {
    let mut s = Summary::default();
    s.add("model", spec.model);
    if spec.model != Model::BA {
        s.add("kappa", spec.kappa);
    }
    s.add(if spec.model == Model::BA { "particles" } else { "n_sites" }, spec.n_sites);
    s.add("seed", spec.seed);
    s.add("replicas", spec.replicas);
    s.add("t_max", spec.t_max);
    if let (Some(a), Some(b)) = (o.trace.rows.first(), o.trace.rows.last()) {
        s.add(format!("r({})", a.t), format!("{:.6} ± {:.6}", a.r, a.se_r));
        s.add(format!("r({})", b.t), format!("{:.6} ± {:.6}", b.r, b.se_r));
    }
    if spec.model == Model::CPS {
        s.add("clock firings", firings);
        s.add("particle count increased", increased);
    }
    if let Some(c) = &o.collisions {
        s.add("collisions (replica 0)", c.len());
    }
    for f in &o.fits {
        let key = format!("alpha on [{}, {}]", f.t_min, f.t_max);
        match (&f.fit, &f.error) {
            (Some(fit), _) => s.add(key, format!("{:.4} (c = {:.4})", fit.alpha, fit.c)),
            (None, Some(e)) => s.add(key, format!("failed: {e}")),
            _ => {}
        }
    }
    if !o.audits.is_empty() {
        s.add("audit pairing exact", o.audits.iter().all(|a| a.audit.pairing_exact));
        s.add("ledger balanced", o.audits.iter().all(|a| a.ledger.balanced));
    }
    if !o.matching.is_empty() {
        s.add("matching formula mismatches", o.matching.iter().map(|m| m.formula_mismatches).sum::<usize>());
    }
    if !o.survival.is_empty() {
        s.add("survival mismatches", o.survival.iter().map(|r| r.mismatches).sum::<usize>());
    }
    for c in &o.clustering {
        s.add(
            format!("P(X({}) = X({}))", c.x, c.y),
            format!("{:.4} ± {:.4}", c.across_replicas.estimate, c.across_replicas.se),
        );
    }
    s
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn write_events_csv<W: Write>(records: &[EventRecord], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(["time", "edge", "direction", "kind"])?;
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_events_csv<R: Read>(r: R) -> Result<Vec<EventRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    Ok(rd.deserialize().collect::<std::result::Result<Vec<EventRecord>, _>>()?)
}

/// The header is written even when there are no collisions.
pub fn write_collisions_csv<W: Write>(collisions: &[Collision], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(["time", "position", "left", "right"])?;
    for c in collisions {
        out.serialize(c)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_collisions_csv<R: Read>(r: R) -> Result<Vec<Collision>> {
    let mut rd = csv::Reader::from_reader(r);
    Ok(rd.deserialize().collect::<std::result::Result<Vec<Collision>, _>>()?)
}

/// One snapshot per line.
pub fn write_snapshots_jsonl<W: Write>(snapshots: &[Snapshot], mut w: W) -> Result<()> {
    for s in snapshots {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshots_jsonl<R: Read>(r: R) -> Result<Vec<Snapshot>> {
    let mut out = Vec::new();
    for line in BufReader::new(r).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

impl ExperimentOutcome {
    /// Writes all artifacts into `dir`, creating it if needed. Returns the
    /// file names written, in order.
    pub fn write(&self, spec: &ExperimentSpec, dir: &Path) -> Result<Vec<String>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut note = |name: &str| written.push(name.to_string());

        let mut w = create(dir, "densities.csv")?;
        self.trace.write_csv(&mut w)?;
        note("densities.csv");
        write_json(dir, "fits.json", &self.fits)?;
        note("fits.json");
        if let Some(log) = &self.events {
            write_events_csv(&log.records, create(dir, "events.csv")?)?;
            note("events.csv");
        }
        if let Some(c) = &self.collisions {
            write_collisions_csv(c, create(dir, "events.csv")?)?;
            note("events.csv");
        }
        if spec.raster {
            let rows: Vec<Coloring> = self.snapshots.iter().map(|s| s.coloring.clone()).collect();
            render_spacetime(&rows, create(dir, "raster.ppm")?)?;
            note("raster.ppm");
        }
        if spec.write_snapshots {
            write_snapshots_jsonl(&self.snapshots, create(dir, "snapshots.jsonl")?)?;
            note("snapshots.jsonl");
        }
        if !self.audits.is_empty() {
            write_json(dir, "audit.json", &self.audits)?;
            note("audit.json");
        }
        if !self.matching.is_empty() {
            let mut out = csv::Writer::from_writer(create(dir, "matching.csv")?);
            for row in &self.matching {
                out.serialize(row)?;
            }
            out.flush()?;
            note("matching.csv");
        }
        if !self.survival.is_empty() {
            write_json(dir, "survival.json", &self.survival)?;
            note("survival.json");
        }
        if !self.clustering.is_empty() {
            write_json(dir, "clustering.json", &self.clustering)?;
            note("clustering.json");
        }
        write_json(dir, "summary.json", &SummaryFile { spec, summary: &self.summary })?;
        note("summary.json");
        Ok(written)
    }
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    spec: &'a ExperimentSpec,
    summary: &'a Summary,
}

/// Runs a spec and writes its artifacts to `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let outcome = execute(spec)?;
    outcome.write(spec, &spec.output_dir)?;
    Ok(outcome)
}
