//! Verification checks with pinned sizes and tolerances.
//!
//! Each check returns the values it measured together with a verdict. The
//! fast suite runs the exhaustive and per-realization checks; the full suite
//! adds the statistical experiments and a few report-only measurements.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    brute_force_max_matching, collision_indicators, conservation_ledger, density_estimate, fit_points, fit_power_law,
    interval_matching, running_sums, scan_density_drop, snapshot_densities, water_fill_matching, DensityAccumulator,
    DensityTrace, Moments, SurvivalTable,
};
use crate::dynamics::{
    run_ba, run_cca_with, run_cps, run_lockstep, simulate_virtual_pair, virtual_pair_from_log, BallisticState, Engine,
    Scheduler, SimConfig,
};
use crate::error::Result;
use crate::experiment::map_replicas;
use crate::lattice::{embed, EdgeKind};
use crate::rng::{replica_seed, RngStream};

/// `√(2/(3π))`, the 3-color automaton's discordance constant.
pub fn cca_rate_constant() -> f64 {
    (2.0 / (3.0 * PI)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Gating checks decide the verdict; the rest are reported only.
    pub gate: bool,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    pub detail: String,
}

impl Check {
    fn new(name: &str) -> Self {
        Self { name: name.into(), gate: true, passed: true, measured: BTreeMap::new(), detail: String::new() }
    }

    fn report_only(name: &str) -> Self {
        Self { gate: false, ..Self::new(name) }
    }

    fn put(&mut self, key: impl Into<String>, value: f64) {
        self.measured.insert(key.into(), value);
    }

    fn require(&mut self, ok: bool, why: impl FnOnce() -> String) {
        if !ok {
            self.passed = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(&why());
        }
    }

    /// One line for terminal output.
    pub fn line(&self) -> String {
        let verdict = match (self.gate, self.passed) {
            (false, _) => "INFO",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        let values: Vec<String> = self.measured.iter().map(|(k, v)| format!("{k}={v:.6}")).collect();
        let mut s = format!("{verdict} {}: {}", self.name, values.join(" "));
        if !self.detail.is_empty() {
            s.push_str(&format!(" ({})", self.detail));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn mean_se(values: impl IntoIterator<Item = f64>) -> Moments {
    let mut m = Moments::default();
    for v in values {
        m.push(v);
    }
    m
}

/// Product-measure densities at time 0: `r = 2/3` for κ = 3, `p = 1/2` and
/// `q = 1/4` for κ = 4, each within 3 across-replica standard errors.
pub fn check_initial_densities(n: usize, replicas: usize, seed: u64) -> Result<Check> {
    let mut c = Check::new("initial densities");
    for (kappa, targets) in [(3u8, vec![("r", 2.0 / 3.0)]), (4, vec![("p", 0.5), ("q", 0.25)])] {
        let d = map_replicas(replicas, |k| {
            let x0 = SimConfig::new(kappa, n, replica_seed(seed, k as u64), 0.0).uniform_start()?;
            Ok(density_estimate(&embed(&x0)?))
        })?;
        for (name, target) in targets {
            let m = mean_se(d.iter().map(|d| match name {
                "p" => d.p,
                "q" => d.q,
                _ => d.r,
            }));
            let key = format!("k{kappa}_{name}0");
            c.put(key.clone(), m.mean());
            c.put(format!("{key}_se"), m.se());
            c.require((m.mean() - target).abs() <= 3.0 * m.se(), || {
                format!("{key} = {} is more than 3 SE from {target}", m.mean())
            });
        }
    }
    Ok(c)
}

/// 3-color automaton: `r̂(t)·√t` within 10% of `√(2/(3π))`.
pub fn check_cca_rate(n: usize, t: usize, replicas: usize, seed: u64) -> Result<Check> {
    let mut c = Check::new("3-color CCA clustering rate");
    let r = map_replicas(replicas, |k| {
        let y0 = SimConfig::new(3, n, replica_seed(seed, k as u64), t as f64).uniform_start()?;
        let mut r = 0.0;
        run_cca_with(&y0, t, |step, row| {
            if step == t {
                let unequal = (0..row.len()).filter(|&x| row[x] != row[(x + 1) % row.len()]).count();
                r = unequal as f64 / row.len() as f64;
            }
        });
        Ok(r)
    })?;
    let m = mean_se(r);
    let scaled = m.mean() * (t as f64).sqrt();
    let target = cca_rate_constant();
    c.put("r_hat", m.mean());
    c.put("r_hat_se", m.se());
    c.put("r_hat_sqrt_t", scaled);
    c.put("target", target);
    c.put("relative_error", (scaled - target).abs() / target);
    c.require((scaled - target).abs() <= 0.10 * target, || format!("r̂·√t = {scaled} is not within 10% of {target}"));
    Ok(c)
}

/// Times sampled by the decay runs.
pub const DECAY_TIMES: [f64; 11] = [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];

/// Density traces of many CPS replicas from product-measure starts.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRuns {
    pub kappa: u8,
    pub acc: DensityAccumulator,
    /// Whether any replica's particle count ever went up.
    pub count_increased: bool,
}

impl DecayRuns {
    pub fn trace(&self) -> DensityTrace {
        self.acc.trace()
    }
}

pub fn decay_runs(kappa: u8, n: usize, replicas: usize, times: &[f64], seed: u64) -> Result<DecayRuns> {
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let engine = if kappa == 3 || kappa == 4 { Engine::Edge } else { Engine::Vertex };
    let runs = map_replicas(replicas, |k| {
        let cfg = SimConfig::new(kappa, n, replica_seed(seed, k as u64), t_max)
            .with_snapshots(times.to_vec())
            .with_engine(engine);
        let traj = run_cps(&cfg, &cfg.uniform_start()?)?;
        let d: Vec<_> = traj.snapshots.iter().map(snapshot_densities).collect();
        Ok((d, traj.stats.particle_count_increased))
    })?;
    let mut acc = DensityAccumulator::new(times.to_vec(), n);
    let mut count_increased = false;
    for (d, inc) in &runs {
        acc.push(d);
        count_increased |= inc;
    }
    Ok(DecayRuns { kappa, acc, count_increased })
}

fn time_index(acc: &DensityAccumulator, t: f64) -> usize {
    acc.times.iter().position(|&s| s == t).expect("time sampled by the decay runs")
}

/// `p̂(t) + 3σ ≥ q̂(t)` for the 4-color runs at every listed time.
pub fn check_p_dominates_q(runs: &DecayRuns, times: &[f64]) -> Check {
    let mut c = Check::new("directed density dominates blockade density");
    let mut worst = f64::INFINITY;
    for &t in times {
        let i = time_index(&runs.acc, t);
        let (p, q) = (runs.acc.p[i].mean(), runs.acc.q[i].mean());
        let sigma = runs.acc.combined_se_pq(i);
        worst = worst.min((p + 3.0 * sigma - q) / sigma.max(f64::MIN_POSITIVE));
        c.put(format!("p({t})"), p);
        c.put(format!("q({t})"), q);
        c.require(p + 3.0 * sigma >= q, || format!("p̂({t}) + 3σ < q̂({t})"));
    }
    c.put("min_margin_in_sigma", worst);
    c
}

/// Particle counts never increase; `r̂` drops by more than 3 combined SE
/// between consecutive `times`; the 5-color ratio `r̂(late)/r̂(early)` lies in
/// `[0.9, 1.0]` while the 3-color one is below 0.9.
pub fn check_decay_and_fixation(
    three: &DecayRuns,
    four: &DecayRuns,
    five: &DecayRuns,
    times: &[f64],
    ratio_times: (f64, f64),
) -> Check {
    let mut c = Check::new("monotone particle count, density decay and fixation contrast");
    for runs in [three, four] {
        let k = runs.kappa;
        c.require(!runs.count_increased, || format!("κ={k}: a particle count increased"));
        for w in times.windows(2) {
            let (i, j) = (time_index(&runs.acc, w[0]), time_index(&runs.acc, w[1]));
            let (a, b) = (&runs.acc.r[i], &runs.acc.r[j]);
            let drop = a.mean() - b.mean();
            let sigma = (a.se().powi(2) + b.se().powi(2)).sqrt();
            c.put(format!("k{k}_r({})", w[0]), a.mean());
            c.put(format!("k{k}_drop_sigma({}->{})", w[0], w[1]), drop / sigma.max(f64::MIN_POSITIVE));
            c.require(drop > 3.0 * sigma, || format!("κ={k}: r̂ not decreasing beyond 3σ from {} to {}", w[0], w[1]));
        }
        let last = *times.last().expect("times");
        c.put(format!("k{k}_r({last})"), runs.acc.r[time_index(&runs.acc, last)].mean());
    }
    let ratio = |runs: &DecayRuns| {
        let (e, l) = ratio_times;
        runs.acc.r[time_index(&runs.acc, l)].mean() / runs.acc.r[time_index(&runs.acc, e)].mean()
    };
    let (r3, r5) = (ratio(three), ratio(five));
    c.put("k3_ratio", r3);
    c.put("k5_ratio", r5);
    c.require((0.9..=1.0).contains(&r5), || format!("κ=5 ratio {r5} outside [0.9, 1.0]"));
    c.require(r3 < 0.9, || format!("κ=3 ratio {r3} not below 0.9"));
    c
}

/// Report-only: fitted decay exponent of the CPS runs, and the first sampled
/// `s` with `r̂(s) ≤ r̂(t) − p̂(t)/4`.
pub fn report_cps_decay(runs: &DecayRuns, window: (f64, f64), scan_from: &[f64]) -> Check {
    let mut c = Check::report_only(&format!("{}-color CPS decay exponent and density-drop scan", runs.kappa));
    let trace = runs.trace();
    match fit_power_law(&trace, window) {
        Ok(f) => {
            c.put("alpha", f.alpha);
            c.put("c", f.c);
            c.put("residual", f.residual);
        }
        Err(e) => c.detail = format!("fit failed: {e}"),
    }
    for &t in scan_from {
        c.put(format!("drop_time_from({t})"), scan_density_drop(&trace, t).unwrap_or(f64::NAN));
    }
    c
}

/// Report-only: 4-color densities shortly after a product-measure start,
/// next to the first-order prediction `p ≈ 1/2 − t/2`, `q ≈ 1/4`. At time 0
/// each directed particle fires at rate 1 and finds its target edge vacant,
/// L, R or B with probability 1/4 each; annihilation and blockade creation
/// each remove two directed particles, so `p` falls at rate 1/2 while
/// blockade creation and reflection cancel in `q`.
pub fn report_early_four_color(n: usize, replicas: usize, t: f64, seed: u64) -> Result<Check> {
    let mut c = Check::report_only("4-color densities at short times");
    let runs = decay_runs(4, n, replicas, &[0.0, t], seed)?;
    let (p, q) = (&runs.acc.p[1], &runs.acc.q[1]);
    c.put("t", t);
    c.put("p", p.mean());
    c.put("p_se", p.se());
    c.put("p_first_order", 0.5 - 0.5 * t);
    c.put("q", q.mean());
    c.put("q_se", q.se());
    c.put("q_first_order", 0.25);
    Ok(c)
}

/// Every edge sequence over {R, ., L} of length `len`: water-filling
/// matching is valid, its size agrees with the running-sum formula and with
/// a brute-force maximum.
pub fn check_matching_exhaustive(len: u32) -> Result<Check> {
    let mut c = Check::new("water-filling matching, exhaustive");
    let total = 3u64.pow(len);
    let letters = [EdgeKind::R, EdgeKind::Vacant, EdgeKind::L];
    let bad = (0..total)
        .into_par_iter()
        .map(|mut code| -> Result<[u64; 3]> {
            let xi: Vec<EdgeKind> = (0..len)
                .map(|_| {
                    let e = letters[(code % 3) as usize];
                    code /= 3;
                    e
                })
                .collect();
            let m = water_fill_matching(&xi);
            let formula = running_sums(&xi).matched_particles() == 2 * m.len() as i64;
            let max = brute_force_max_matching(&xi)?;
            Ok([!m.is_valid_for(&xi) as u64, !formula as u64, (max != m.len()) as u64])
        })
        .try_reduce(|| [0; 3], |a, b| Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2]]))?;
    c.put("sequences", total as f64);
    c.put("invalid", bad[0] as f64);
    c.put("formula_mismatches", bad[1] as f64);
    c.put("not_maximum", bad[2] as f64);
    c.require(bad == [0; 3], || format!("{bad:?} failures (invalid, formula, maximum)"));
    Ok(c)
}

/// Per realization: inside every interval, the directed particles present at
/// `t0` that collide by the virtual-pair time `τ` number at least `|M|`.
pub fn check_collision_lower_bound(runs: usize, n: usize, len: usize, t0s: &[f64], seed: u64) -> Result<Check> {
    let mut c = Check::new("collision count bounds interval matching");
    let horizon = len as f64 * 1.5 + 20.0;
    let t_max = t0s.iter().copied().fold(0.0, f64::max) + horizon;
    let jobs: Vec<(u8, usize)> = [3u8, 4].iter().flat_map(|&k| (0..runs).map(move |r| (k, r))).collect();
    let per_run = map_replicas(jobs.len(), |j| {
        let (kappa, r) = jobs[j];
        let cfg = SimConfig::new(kappa, n, replica_seed(seed ^ kappa as u64, r as u64), t_max)
            .with_snapshots(t0s.to_vec())
            .with_scheduler(Scheduler::Naive)
            .with_log(true);
        let traj = run_cps(&cfg, &cfg.uniform_start()?)?;
        let log = traj.events.as_ref().expect("logging on");
        let (mut intervals, mut violations, mut unresolved, mut matched) = (0u64, 0u64, 0u64, 0u64);
        for snap in &traj.snapshots {
            let e_t = snap.edges.as_ref().expect("3 or 4 colors");
            for a in (0..n).step_by(len) {
                let b = (a + len - 1) % n;
                let m = interval_matching(e_t.edges(), a, len);
                let Some(tau) = virtual_pair_from_log(log, n, a, b, snap.time) else {
                    unresolved += 1;
                    continue;
                };
                let hit = collision_indicators(e_t, log, snap.time, tau)?;
                let count = (0..len).filter(|&k| hit[(a + k) % n]).count();
                intervals += 1;
                matched += m.len() as u64;
                violations += (count < m.len()) as u64;
            }
        }
        Ok([intervals, violations, unresolved, matched])
    })?;
    let sum = per_run.iter().fold([0u64; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
    c.put("intervals", sum[0] as f64);
    c.put("violations", sum[1] as f64);
    c.put("unresolved", sum[2] as f64);
    c.put("mean_matching_size", sum[3] as f64 / sum[0].max(1) as f64);
    c.require(sum[1] == 0, || format!("{} intervals violate the bound", sum[1]));
    c.require(sum[2] == 0, || format!("{} virtual pairs did not meet before the log ended", sum[2]));
    Ok(c)
}

/// Virtual-pair meeting time for gap `L`: mean within 3σ of `L/2`, variance
/// within 10% of `L/4`.
pub fn check_virtual_pair(gap: u64, samples: usize, seed: u64) -> Check {
    let mut c = Check::new("virtual-pair collision time");
    let mut rng = RngStream::new(seed);
    let m = mean_se((0..samples).map(|_| simulate_virtual_pair(gap, &mut rng)));
    let (mean_target, var_target) = (gap as f64 / 2.0, gap as f64 / 4.0);
    let sigma = var_target.sqrt() / (samples as f64).sqrt();
    c.put("mean", m.mean());
    c.put("variance", m.variance());
    c.put("mean_target", mean_target);
    c.put("variance_target", var_target);
    c.require((m.mean() - mean_target).abs() <= 3.0 * sigma, || "mean outside 3σ".into());
    c.require((m.variance() - var_target).abs() <= 0.1 * var_target, || "variance off by more than 10%".into());
    c
}

/// Per seed and κ ∈ {3, 4}: both engines agree event by event, logged
/// trajectories coincide, ledgers balance between consecutive snapshots, and
/// every snapshot has signed sum ≡ 0 (mod κ).
pub fn check_dual_representation(seeds: usize, n: usize, t_max: usize, seed: u64) -> Result<Check> {
    let mut c = Check::new("vertex/edge duality, ledgers and signed sum");
    let times: Vec<f64> = (0..=t_max).map(|t| t as f64).collect();
    let jobs: Vec<(u8, usize)> = [3u8, 4].iter().flat_map(|&k| (0..seeds).map(move |s| (k, s))).collect();
    let per_run = map_replicas(jobs.len(), |j| {
        let (kappa, s) = jobs[j];
        let scheduler = if s % 2 == 0 { Scheduler::RejectionFree } else { Scheduler::Naive };
        let cfg = SimConfig::new(kappa, n, replica_seed(seed, s as u64), t_max as f64)
            .with_snapshots(times.clone())
            .with_scheduler(scheduler)
            .with_log(true);
        let x0 = cfg.uniform_start()?;
        let lock = run_lockstep(&cfg, &x0)?;
        let edge = run_cps(&cfg, &x0)?;
        let vertex = run_cps(&cfg.clone().with_engine(Engine::Vertex), &x0)?;
        let same = (edge.snapshots == vertex.snapshots && edge.events == vertex.events) as u64;
        let log = edge.events.as_ref().expect("logging on");
        let mut unbalanced = 0u64;
        let mut bad_sum = 0u64;
        for w in edge.snapshots.windows(2) {
            let (a, b) = (w[0].edges.as_ref().expect("embedded"), w[1].edges.as_ref().expect("embedded"));
            unbalanced += !conservation_ledger(a, b, log.window(w[0].time, w[1].time)).balanced as u64;
        }
        for s in &edge.snapshots {
            let e = s.edges.as_ref().expect("embedded");
            bad_sum += (e.signed_sum().rem_euclid(kappa as i64) != 0) as u64;
            bad_sum += (embed(&s.coloring)? != *e) as u64;
        }
        Ok([lock.firings, lock.mismatches, 1 - same, unbalanced, bad_sum])
    })?;
    let sum = per_run.iter().fold([0u64; 5], |a, b| std::array::from_fn(|i| a[i] + b[i]));
    c.put("runs", jobs.len() as f64);
    c.put("firings", sum[0] as f64);
    c.put("lockstep_mismatches", sum[1] as f64);
    c.put("trajectory_mismatches", sum[2] as f64);
    c.put("unbalanced_ledgers", sum[3] as f64);
    c.put("bad_snapshots", sum[4] as f64);
    c.require(sum[1..] == [0; 4], || format!("failures {:?}", &sum[1..]));
    Ok(c)
}

/// Mean `r̂(t)` from the two schedulers differs by less than 3 combined SE.
pub fn check_scheduler_equivalence(n: usize, replicas: usize, t: f64, seed: u64) -> Result<Check> {
    let mut c = Check::new("naive and rejection-free schedulers agree");
    let mut stats = Vec::new();
    for (i, scheduler) in [Scheduler::Naive, Scheduler::RejectionFree].into_iter().enumerate() {
        let base = replica_seed(seed, i as u64);
        let r = map_replicas(replicas, |k| {
            let cfg =
                SimConfig::new(3, n, replica_seed(base, k as u64), t).with_snapshots(vec![t]).with_scheduler(scheduler);
            let traj = run_cps(&cfg, &cfg.uniform_start()?)?;
            Ok(snapshot_densities(&traj.snapshots[0]).r)
        })?;
        stats.push(mean_se(r));
    }
    let diff = stats[0].mean() - stats[1].mean();
    let sigma = (stats[0].se().powi(2) + stats[1].se().powi(2)).sqrt();
    c.put("naive_r", stats[0].mean());
    c.put("rejection_free_r", stats[1].mean());
    c.put("combined_se", sigma);
    c.put("difference_in_se", diff.abs() / sigma);
    c.require(diff.abs() < 3.0 * sigma, || "difference exceeds 3 combined SE".into());
    Ok(c)
}

/// Running-sum criterion equals R presence in the simulated automaton for
/// every edge and every step `1..=t_max`.
pub fn check_cca_survival(n: usize, seeds: usize, t_max: usize, seed: u64) -> Result<Check> {
    let mut c = Check::new("running-sum survival criterion");
    let per_seed = map_replicas(seeds, |k| {
        let y0 = SimConfig::new(3, n, replica_seed(seed, k as u64), t_max as f64).uniform_start()?;
        let table = SurvivalTable::new(&y0)?;
        let mut checked = 0u64;
        let mut mismatches = 0u64;
        let mut query_error = None;
        run_cca_with(&y0, t_max, |t, row| {
            if t == 0 || query_error.is_some() {
                return;
            }
            for x in 0..n {
                // R on edge x: X(x+1) − X(x) ≡ −1
                let present = (row[(x + 1) % n] + 3 - row[x]) % 3 == 2;
                match table.query(x, t) {
                    Ok(predicted) => mismatches += (predicted != present) as u64,
                    Err(e) => query_error = Some(e),
                }
                checked += 1;
            }
        });
        if let Some(e) = query_error {
            return Err(e);
        }
        Ok([checked, mismatches])
    })?;
    let checked: u64 = per_seed.iter().map(|p| p[0]).sum();
    let mismatches: u64 = per_seed.iter().map(|p| p[1]).sum();
    c.put("checked", checked as f64);
    c.put("mismatches", mismatches as f64);
    c.require(mismatches == 0, || format!("{mismatches} mismatches"));
    Ok(c)
}

/// Ballistic annihilation with velocities ±1: fitted density exponent on
/// `window` lies in `[0.4, 0.6]`.
pub fn check_ba_exponent(particles: usize, window: (f64, f64), points: usize, seed: u64) -> Result<Check> {
    let mut c = Check::new("ballistic annihilation decay exponent");
    let mut rng = RngStream::new(seed);
    let init = BallisticState::poisson(particles, &[-1, 1], &mut rng);
    let out = run_ba(&init, window.1)?;
    let grid = crate::analysis::geometric_grid(window.0, window.1, points);
    let pts: Vec<(f64, f64)> =
        grid.iter().map(|&t| (t, out.alive_at(particles, t) as f64 / particles as f64)).collect();
    let fit = fit_points(&pts, window)?;
    c.put("alpha", fit.alpha);
    c.put("c", fit.c);
    c.put("residual", fit.residual);
    c.require((0.4..=0.6).contains(&fit.alpha), || format!("alpha {} outside [0.4, 0.6]", fit.alpha));
    Ok(c)
}

/// Base seed of the verification runs.
pub const VERIFY_SEED: u64 = 20_240_601;

/// Runs a suite at the pinned sizes.
pub fn run_suite(suite: Suite) -> Result<VerifyReport> {
    let s = VERIFY_SEED;
    let mut checks = vec![
        check_initial_densities(100_000, 20, s)?,
        check_matching_exhaustive(12)?,
        check_collision_lower_bound(100, 512, 64, &[0.0, 10.0], s + 6)?,
        check_virtual_pair(100, 10_000, s + 7),
        check_dual_representation(1000, 64, 20, s + 8)?,
        check_cca_survival(2000, 100, 500, s + 10)?,
    ];
    if suite == Suite::Full {
        checks.push(check_cca_rate(1_000_000, 400, 5, s + 2)?);
        let three = decay_runs(3, 100_000, 20, &DECAY_TIMES, s + 3)?;
        let four = decay_runs(4, 100_000, 20, &DECAY_TIMES, s + 4)?;
        let five = decay_runs(5, 100_000, 20, &DECAY_TIMES, s + 5)?;
        checks.push(check_p_dominates_q(&four, &DECAY_TIMES[..10]));
        checks.push(check_decay_and_fixation(&three, &four, &five, &[1.0, 10.0, 100.0, 1000.0], (200.0, 1000.0)));
        checks.push(check_scheduler_equivalence(10_000, 200, 50.0, s + 9)?);
        checks.push(check_ba_exponent(100_000, (10.0, 300.0), 20, s + 11)?);
        for runs in [&three, &four] {
            checks.push(report_cps_decay(runs, (10.0, 1000.0), &[1.0, 10.0, 100.0]));
        }
    }
    let passed = checks.iter().all(|c| c.passed || !c.gate);
    Ok(VerifyReport { suite, passed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_checks_pass() {
        assert!(check_matching_exhaustive(6).unwrap().passed);
        assert!(check_virtual_pair(20, 4000, 3).passed);
        assert!(check_dual_representation(10, 16, 5, 4).unwrap().passed);
        assert!(check_cca_survival(60, 3, 25, 5).unwrap().passed);
        assert!(check_collision_lower_bound(3, 64, 16, &[0.0, 2.0], 6).unwrap().passed);
    }

    #[test]
    fn failing_requirement_is_reported() {
        let mut c = Check::new("x");
        c.put("v", 1.0);
        c.require(false, || "broken".into());
        assert!(!c.passed);
        assert!(c.line().starts_with("FAIL x: v=1.000000 (broken)"));
        let info = Check::report_only("y");
        assert!(info.line().starts_with("INFO y"));
    }

    #[test]
    fn rate_constant() {
        assert!((cca_rate_constant() - 0.4607).abs() < 1e-4);
    }
}
