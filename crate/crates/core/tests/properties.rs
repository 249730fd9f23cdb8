use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use relaynet::gaussian::{self, check_psd};
use relaynet::optimize::{self, Budget};
use relaynet::protocol::{PresetName, ProtocolPreset};
use relaynet::verify::random_instance;
use relaynet::{Channel, Ordering, Owner, Param, PowerAllocation, Topology};

fn quick() -> Budget {
    Budget { restarts: 4, max_evaluations: 4_000 }
}

fn sorted_distances(t: &Topology) -> Vec<f64> {
    let mut d: Vec<f64> = t.distances().iter().flatten().copied().collect();
    d.sort_by(f64::total_cmp);
    d
}

fn one_relay(x: f64, y: f64, coherent: bool) -> Topology {
    Topology::from_positions(&[[0.0, 0.0], [x, y], [1.0, 0.0]], 3.0, vec![10.0; 2], vec![1.0; 2], coherent).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_orders_round_trip(n in 0usize..=3, pick in any::<prop::sample::Index>()) {
        let all = Ordering::all(n);
        let o = &all[pick.index(all.len())];
        for l in 1..=n {
            for i in 1..=n - l + 1 {
                prop_assert_eq!(o.inverse(l, o.refinement_target(l, i)), Some(i));
            }
            for level in l + 1..=n + 1 {
                let pos = o.inverse(l, level).unwrap();
                prop_assert_eq!(o.refinement_target(l, pos), level);
            }
        }
    }

    #[test]
    fn projected_allocations_respect_power(n in 1usize..=3, coherent: bool, raw in prop::collection::vec(0.0f64..=1.0, 40)) {
        let p = ProtocolPreset::new(PresetName::FullMixed, n, coherent).unwrap();
        let a = p.project(&raw[..p.free().len()]).unwrap();
        prop_assert!(a.check_power(coherent).is_ok());
    }

    #[test]
    fn over_budget_allocations_are_rejected(n in 1usize..=3, pick in any::<prop::sample::Index>(), excess in 2e-9f64..0.5) {
        let params = PowerAllocation::params(n);
        let p = params[pick.index(params.len())];
        let mut a = PowerAllocation::zeros(n);
        prop_assert!(a.check_power(true).is_ok());
        let peers: Vec<Param> = params.iter().copied().filter(|q| q.owner() == p.owner()).collect();
        let share = (1.0 + excess) / peers.len() as f64;
        if share > 1.0 {
            return Ok(());
        }
        for q in &peers {
            a.set(*q, share).unwrap();
        }
        prop_assert!(a.node_total(p.owner()) > 1.0 + 1e-9);
        prop_assert!(a.check_power(true).is_err());
    }

    #[test]
    fn covariance_matrices_are_psd(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 2).unwrap();
        let ch = inst.channel().unwrap();
        for l in 1..=ch.n() + 1 {
            for j in 1..=l {
                for known in [j - 1, j] {
                    let k = gaussian::covariance_matrix(&ch, &inst.allocation, l, j, known).unwrap();
                    prop_assert!(check_psd(&k).is_ok());
                    prop_assert!((k.clone() - k.transpose()).abs().max() < 1e-9 * k.abs().max().max(1.0));
                }
            }
        }
    }

    #[test]
    fn relay_labels_do_not_change_the_geometry(r in -0.49f64..0.49) {
        prop_assume!(r.abs() > 1e-3);
        let line = Topology::two_relay_line(r, 10.0, 4.0, true).unwrap();
        let swapped = Topology::from_positions(
            &[[0.0, 0.0], [1.0 - r, 0.0], [r, 0.0], [1.0, 0.0]], 4.0, vec![10.0; 3], vec![1.0; 3], true,
        ).unwrap();
        let (a, b) = (sorted_distances(&line), sorted_distances(&swapped));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn noncoherent_allocations_rate_the_same_in_both_modes(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 2).unwrap();
        let a = inst.allocation.clone();
        prop_assume!(a.check_power(false).is_ok());
        let coh = Channel::new(&inst.topology.clone().with_coherent(true), &inst.ordering).unwrap();
        let non = Channel::new(&inst.topology.clone().with_coherent(false), &inst.ordering).unwrap();
        let (x, y) = (gaussian::evaluate(&coh, &a).unwrap().total, gaussian::evaluate(&non, &a).unwrap().total);
        prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
    }

    #[test]
    fn one_hop_rate_grows_with_snr(db in -10.0f64..30.0, step in 0.1f64..5.0) {
        let rate = |db: f64| {
            let snr = relaynet::network::db_to_linear(db);
            let t = Topology::two_relay_line(0.25, snr, 4.0, true).unwrap();
            let ch = Channel::new(&t, &Ordering::identity(2)).unwrap();
            gaussian::optimal_total(&ch, &PowerAllocation::direct(2)).unwrap()
        };
        prop_assert!(rate(db + step) > rate(db));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn full_mixed_dominates_every_preset(x in -0.5f64..1.5, y in -0.5f64..0.5, coherent: bool) {
        prop_assume!((x * x + y * y).sqrt() > 0.05 && ((x - 1.0).powi(2) + y * y).sqrt() > 0.05);
        let t = one_relay(x, y, coherent);
        let full = optimize::optimize_preset(&t, PresetName::FullMixed, quick(), 1).unwrap();
        for p in [PresetName::OneHop, PresetName::Df, PresetName::Cf, PresetName::Pdf] {
            let r = optimize::optimize_preset(&t, p, quick(), 1).unwrap();
            prop_assert!(full.rate >= r.rate - 1e-6, "{p}: {} > {}", r.rate, full.rate);
        }
    }

    #[test]
    fn optimizer_is_deterministic_and_consistent(x in -0.5f64..1.5, y in -0.5f64..0.5, seed: u64) {
        prop_assume!((x * x + y * y).sqrt() > 0.05 && ((x - 1.0).powi(2) + y * y).sqrt() > 0.05);
        let t = one_relay(x, y, true);
        let a = optimize::optimize_preset(&t, PresetName::FullMixed, quick(), seed).unwrap();
        let b = optimize::optimize_preset(&t, PresetName::FullMixed, quick(), seed).unwrap();
        prop_assert_eq!(&a, &b);
        let ch = Channel::new(&t, &a.ordering).unwrap();
        let again = gaussian::evaluate(&ch, &a.allocation).unwrap();
        prop_assert!((again.total - a.rate).abs() <= 1e-9);
        prop_assert!(a.allocation.check_power(true).is_ok());
        prop_assert!(a.allocation.node_total(Owner::Source) <= 1.0 + 1e-9);
    }
}
