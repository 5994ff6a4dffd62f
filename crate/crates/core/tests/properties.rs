use proptest::prelude::*;

use cpslab::analysis::{brute_force_max_matching, conservation_ledger, running_sums, water_fill_matching};
use cpslab::dynamics::{run_cps, IndexedSet, Scheduler, SimConfig};
use cpslab::lattice::{edges_to_string, parse_edges};
use cpslab::{embed, reconstruct, Coloring, EdgeKind, RngStream};

fn coloring() -> impl Strategy<Value = Coloring> {
    (3u8..=4)
        .prop_flat_map(|k| prop::collection::vec(0..k, 2..40).prop_map(move |sites| Coloring::new(k, sites).unwrap()))
}

fn edge_string(max: usize) -> impl Strategy<Value = Vec<EdgeKind>> {
    prop::collection::vec(
        prop_oneof![Just(EdgeKind::Vacant), Just(EdgeKind::R), Just(EdgeKind::L), Just(EdgeKind::B)],
        0..max,
    )
}

proptest! {
    #[test]
    fn embed_then_reconstruct_is_identity(x in coloring()) {
        let e = embed(&x).unwrap();
        prop_assert_eq!(e.signed_sum().rem_euclid(x.kappa() as i64), 0);
        prop_assert_eq!(reconstruct(x.sites()[0], &e).unwrap(), x);
    }

    #[test]
    fn embedding_ignores_a_global_color_shift(x in coloring(), c in 0u8..4) {
        let c = c % x.kappa();
        prop_assert_eq!(embed(&x.shifted(c)).unwrap(), embed(&x).unwrap());
    }

    #[test]
    fn edge_strings_round_trip(xi in edge_string(30)) {
        prop_assert_eq!(parse_edges(&edges_to_string(&xi)).unwrap(), xi);
    }

    #[test]
    fn water_fill_is_a_valid_matching_of_formula_size(xi in edge_string(60)) {
        let m = water_fill_matching(&xi);
        prop_assert!(m.is_valid_for(&xi));
        prop_assert_eq!(running_sums(&xi).matched_particles(), 2 * m.len() as i64);
    }

    #[test]
    fn water_fill_is_maximum(xi in edge_string(11)) {
        prop_assert_eq!(water_fill_matching(&xi).len(), brute_force_max_matching(&xi).unwrap());
    }

    #[test]
    fn indexed_set_tracks_a_reference_set(ops in prop::collection::vec((0usize..32, any::<bool>()), 0..200)) {
        let mut set = IndexedSet::new(32);
        let mut reference = std::collections::BTreeSet::new();
        for (key, present) in ops {
            set.set(key, present);
            if present { reference.insert(key); } else { reference.remove(&key); }
            prop_assert_eq!(set.len(), reference.len());
            prop_assert!(reference.iter().all(|&k| set.contains(k)));
        }
        let mut items: Vec<usize> = set.iter().collect();
        items.sort_unstable();
        prop_assert_eq!(items, reference.into_iter().collect::<Vec<_>>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn short_runs_never_create_particles(kappa in 3u8..=4, seed in any::<u64>(), naive in any::<bool>()) {
        let scheduler = if naive { Scheduler::Naive } else { Scheduler::RejectionFree };
        let cfg = SimConfig::new(kappa, 60, seed, 6.0)
            .with_snapshots(vec![0.0, 2.0, 4.0, 6.0])
            .with_scheduler(scheduler)
            .with_log(true);
        let x0 = cfg.uniform_start().unwrap();
        let traj = run_cps(&cfg, &x0).unwrap();
        prop_assert!(!traj.stats.particle_count_increased);
        let log = traj.events.as_ref().unwrap();
        for w in traj.snapshots.windows(2) {
            let (a, b) = (w[0].edges.as_ref().unwrap(), w[1].edges.as_ref().unwrap());
            prop_assert!(b.particle_count() <= a.particle_count());
            let ledger = conservation_ledger(a, b, log.window(w[0].time, w[1].time));
            prop_assert!(ledger.balanced, "{:?}", ledger);
        }
    }
}

#[test]
fn tampered_log_unbalances_the_ledger() {
    let cfg = SimConfig::new(4, 200, 5, 3.0).with_snapshots(vec![0.0, 3.0]).with_log(true);
    let traj = run_cps(&cfg, &cfg.uniform_start().unwrap()).unwrap();
    let (a, b) = (traj.snapshots[0].edges.as_ref().unwrap(), traj.snapshots[1].edges.as_ref().unwrap());
    let mut records = traj.events.unwrap().records;
    assert!(conservation_ledger(a, b, &records).balanced);

    let i = records.iter().position(|r| r.kind.is_collision()).expect("some collision in 3 time units");
    records.remove(i);
    assert!(!conservation_ledger(a, b, &records).balanced);
}

#[test]
fn uniform_sampling_is_seed_stable() {
    let a = Coloring::uniform(50, 4, &mut RngStream::new(3)).unwrap();
    let b = Coloring::uniform(50, 4, &mut RngStream::new(3)).unwrap();
    let c = Coloring::uniform(50, 4, &mut RngStream::new(4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
