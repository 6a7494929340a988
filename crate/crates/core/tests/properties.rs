use geomax::analysis::{is_ame, is_k_uniform};
use geomax::ascent::{ascend_step, check_norm_bound, run_ascent, update_direction, AscentConfig, DirectionMode, Variant};
use geomax::canon::{jarlskog_decompose, jarlskog_unitary, JarlskogParams};
use geomax::graph::Graph;
use geomax::io::{state_from_json, state_to_json};
use geomax::linalg::singular_values;
use geomax::seesaw::{best_product_approximation, seesaw_sweep_in_place, SeesawConfig};
use geomax::state::{matricization, random_pure_state, reduced_density_matrix, seeded_rng};
use geomax::subspace::SubspaceProjector;
use geomax::{zoo, ProductState, PureState, SystemShape, C64};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 2..=4)
}

fn state() -> impl Strategy<Value = PureState> {
    (dims(), any::<u64>()).prop_map(|(d, seed)| random_pure_state(&SystemShape::new(d).unwrap(), seed))
}

fn quick() -> SeesawConfig {
    SeesawConfig { restarts: 4, ..SeesawConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn measure_and_overlap_are_consistent(psi in state(), seed in any::<u64>()) {
        let r = best_product_approximation(&psi, &quick().with_seed(seed)).unwrap();
        prop_assert!(r.lambda > 0.0 && r.lambda <= 1.0 + 1e-12);
        prop_assert_eq!(r.g, 1.0 - r.lambda * r.lambda);
        let ov = r.pi.inner(&psi).unwrap();
        prop_assert!((ov.norm() - r.lambda).abs() < 1e-12);
        prop_assert!(ov.im.abs() < 1e-12 && ov.re >= 0.0);
    }

    #[test]
    fn old_overlap_shrinks(psi in state(), seed in any::<u64>(), e in -6.0f64..0.0) {
        let theta = 10f64.powf(e);
        let pi = ProductState::random(psi.shape(), &mut seeded_rng(seed));
        let before = pi.inner(&psi).unwrap().norm();
        prop_assume!(before < 1.0 - 1e-9);
        let next = ascend_step(&psi, &pi, theta, DirectionMode::Normalized).unwrap();
        prop_assert!(pi.inner(&next).unwrap().norm() <= before * (1.0 - 1e-15));
        prop_assert!((next.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn direction_is_orthogonal_with_known_overlap(psi in state(), seed in any::<u64>()) {
        let pi = ProductState::random(psi.shape(), &mut seeded_rng(seed));
        let lam = pi.inner(&psi).unwrap().norm();
        let (eta, m) = update_direction(&psi, &pi, DirectionMode::Normalized).unwrap();
        let eta = PureState::from_normalized(psi.shape().clone(), eta, 1e-10).unwrap();
        prop_assert!(pi.inner(&eta).unwrap().norm() < 1e-12);
        prop_assert!((m - (1.0 - lam * lam).sqrt()).abs() < 1e-12);
        prop_assert!((psi.inner(&eta).unwrap().re - m).abs() < 1e-12);
    }

    #[test]
    fn sweeps_never_lower_overlap(psi in state(), seed in any::<u64>()) {
        let mut it = ProductState::random(psi.shape(), &mut seeded_rng(seed));
        let mut prev = it.inner(&psi).unwrap().norm();
        for _ in 0..10 {
            let v = seesaw_sweep_in_place(&psi, &mut it).unwrap();
            prop_assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn bipartite_matches_top_singular_value(a in 2usize..=5, b in 2usize..=5, seed in any::<u64>()) {
        let psi = random_pure_state(&SystemShape::new(vec![a, b]).unwrap(), seed);
        let lam = best_product_approximation(&psi, &quick()).unwrap().lambda;
        let top = singular_values(&matricization(&psi, &[0]).unwrap())[0];
        prop_assert!((lam - top).abs() < 1e-8);
    }

    #[test]
    fn local_unitaries_keep_measure(psi in state(), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let us: Vec<_> = psi.shape().dims().iter().map(|&d| jarlskog_unitary(&JarlskogParams::random(d, &mut rng))).collect();
        let cfg = SeesawConfig { restarts: 40, ..SeesawConfig::for_shape(psi.shape()) };
        let a = best_product_approximation(&psi, &cfg).unwrap().g;
        let b = best_product_approximation(&psi.apply_locals(&us).unwrap(), &cfg).unwrap().g;
        prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
    }

    #[test]
    fn party_permutation_keeps_measure(psi in state(), seed in any::<u64>()) {
        let n = psi.shape().parties();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut seeded_rng(seed));
        let cfg = SeesawConfig { restarts: 40, ..SeesawConfig::for_shape(psi.shape()) };
        let a = best_product_approximation(&psi, &cfg).unwrap().g;
        let b = best_product_approximation(&psi.permute_parties(&perm).unwrap(), &cfg).unwrap().g;
        prop_assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn complementary_marginals_share_spectra(psi in state(), mask in 1usize..15) {
        let n = psi.shape().parties();
        let keep: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let rest: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
        prop_assume!(!keep.is_empty() && !rest.is_empty());
        let a = reduced_density_matrix(&psi, &keep).unwrap().eigenvalues();
        let b = reduced_density_matrix(&psi, &rest).unwrap().eigenvalues();
        for k in 0..a.len().max(b.len()) {
            let x = a.get(k).copied().unwrap_or(0.0);
            let y = b.get(k).copied().unwrap_or(0.0);
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn schmidt_weights_sum_to_one(psi in state(), mask in 1usize..15) {
        let n = psi.shape().parties();
        let left: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        prop_assume!(!left.is_empty() && left.len() < n);
        let s: f64 = singular_values(&matricization(&psi, &left).unwrap()).iter().map(|x| x * x).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn graph_state_ignores_edge_order(n in 2usize..=6, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rand::Rng::gen_bool(&mut rng, 0.5) {
                    edges.push(if rand::Rng::gen(&mut rng) { (a, b) } else { (b, a) });
                }
            }
        }
        let base = zoo::graph_state(&Graph::new(n, edges.clone()).unwrap()).unwrap();
        edges.shuffle(&mut rng);
        let other = zoo::graph_state(&Graph::new(n, edges).unwrap()).unwrap();
        prop_assert_eq!(base, other);
    }

    #[test]
    fn jarlskog_unitary_and_roundtrip(d in 1usize..=6, seed in any::<u64>()) {
        let p = JarlskogParams::random(d, &mut seeded_rng(seed));
        let u = jarlskog_unitary(&p);
        let gram = u.adjoint() * &u;
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                prop_assert!((gram[(i, j)] - want).norm() < 1e-12);
            }
        }
        let back = jarlskog_unitary(&jarlskog_decompose(&u).unwrap());
        prop_assert!((back - &u).camax() < 1e-10);
        prop_assert_eq!(p.to_reals().len(), JarlskogParams::real_count(d));
    }

    #[test]
    fn json_roundtrip_is_exact(psi in state()) {
        let text = state_to_json(&psi);
        let back = state_from_json(&text, false).unwrap();
        prop_assert_eq!(&back, &psi);
        prop_assert_eq!(state_to_json(&back), text);
    }

    #[test]
    fn norm_bound_holds_with_three(q in 0.0f64..=1.0, e in -4.0f64..2.0) {
        prop_assert!(check_norm_bound(q, 10f64.powf(e), 3.0));
    }

    #[test]
    fn random_subspaces_are_orthonormal(d in dims(), k in 1usize..4, seed in any::<u64>()) {
        let shape = SystemShape::new(d).unwrap();
        let p = SubspaceProjector::random(&shape, k, seed).unwrap();
        for (i, a) in p.basis().iter().enumerate() {
            for (j, b) in p.basis().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((a.inner(b).unwrap() - C64::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn zero_momentum_equals_plain(seed in any::<u64>()) {
        let shape = SystemShape::uniform(3, 2).unwrap();
        let base = AscentConfig { iters_max: 30, seesaw: quick(), seed, ..AscentConfig::default() };
        let init = random_pure_state(&shape, seed);
        let a = run_ascent(&init, &AscentConfig { variant: Variant::Plain, ..base.clone() }).unwrap();
        let b = run_ascent(&init, &AscentConfig { variant: Variant::Momentum, gamma: 0.0, ..base }).unwrap();
        prop_assert_eq!(a.final_state, b.final_state);
        let ga: Vec<f64> = a.records.iter().map(|r| r.g).collect();
        let gb: Vec<f64> = b.records.iter().map(|r| r.g).collect();
        prop_assert_eq!(ga, gb);
    }

    #[test]
    fn ascent_records_are_bounded(seed in any::<u64>(), iters in 1usize..40) {
        let shape = SystemShape::uniform(3, 2).unwrap();
        let cfg = AscentConfig { iters_max: iters, seesaw: quick(), seed, ..AscentConfig::default() };
        let tr = run_ascent(&random_pure_state(&shape, seed), &cfg).unwrap();
        prop_assert!(tr.records.len() <= iters + 1);
        let best = tr.records.iter().map(|r| r.g).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(best, tr.best_g);
    }
}

#[test]
fn zoo_ame_states_are_uniform_below_half() {
    for name in ["ame33", "ame34", "ame43", "ame53", "graph:ring5", "graph:g6", "bell", "ame44_pairs"] {
        let s = zoo::by_name(name).unwrap();
        assert!(is_ame(&s).unwrap(), "{name}");
        for k in 1..=s.shape().parties() / 2 {
            assert!(is_k_uniform(&s, k, 1e-8).unwrap(), "{name} k={k}");
        }
    }
}
