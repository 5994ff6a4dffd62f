//! Artifact formats survive a write/read cycle unchanged.

use cpslab::analysis::{fit_power_law, DensityAccumulator, DensityTrace, RateFit};
use cpslab::dynamics::{run_ba, run_cps, BallisticState, SimConfig};
use cpslab::experiment::{
    read_collisions_csv, read_events_csv, read_snapshots_jsonl, write_collisions_csv, write_events_csv,
    write_snapshots_jsonl,
};
use cpslab::RngStream;

fn trajectory() -> cpslab::dynamics::Trajectory {
    let cfg = SimConfig::new(4, 120, 17, 5.0).with_snapshots(vec![0.0, 0.5, 1.0, 5.0]).with_log(true);
    run_cps(&cfg, &cfg.uniform_start().unwrap()).unwrap()
}

#[test]
fn events_csv() {
    let log = trajectory().events.unwrap();
    assert!(!log.records.is_empty());
    let mut buf = Vec::new();
    write_events_csv(&log.records, &mut buf).unwrap();
    assert!(buf.starts_with(b"time,edge,direction,kind\n"));
    assert_eq!(read_events_csv(&buf[..]).unwrap(), log.records);
}

#[test]
fn empty_csvs_keep_their_header() {
    let mut buf = Vec::new();
    write_events_csv(&[], &mut buf).unwrap();
    assert!(read_events_csv(&buf[..]).unwrap().is_empty());
    buf.clear();
    write_collisions_csv(&[], &mut buf).unwrap();
    assert_eq!(buf, b"time,position,left,right\n");
}

#[test]
fn collisions_csv() {
    let init = BallisticState::poisson(300, &[-1, 1], &mut RngStream::new(8));
    let out = run_ba(&init, 40.0).unwrap();
    assert!(!out.collisions.is_empty());
    let mut buf = Vec::new();
    write_collisions_csv(&out.collisions, &mut buf).unwrap();
    assert_eq!(read_collisions_csv(&buf[..]).unwrap(), out.collisions);
}

#[test]
fn snapshots_jsonl() {
    let snaps = trajectory().snapshots;
    let mut buf = Vec::new();
    write_snapshots_jsonl(&snaps, &mut buf).unwrap();
    assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), snaps.len());
    assert_eq!(read_snapshots_jsonl(&buf[..]).unwrap(), snaps);
}

#[test]
fn densities_and_fits_csv() {
    let traj = trajectory();
    let mut acc = DensityAccumulator::new(traj.snapshots.iter().map(|s| s.time).collect(), 120);
    acc.push_trajectory(&traj.snapshots);
    acc.push_trajectory(&traj.snapshots);
    let trace = acc.trace();
    assert_eq!(trace.rows[0].n_replicas, 2);
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let back = DensityTrace::read_csv(&buf[..]).unwrap();
    assert_eq!(back, trace);

    let fit = fit_power_law(&trace, (0.5, 5.0)).unwrap();
    let mut buf = Vec::new();
    RateFit::write_csv(std::slice::from_ref(&fit), &mut buf).unwrap();
    assert_eq!(RateFit::read_csv(&buf[..]).unwrap(), vec![fit]);
}
