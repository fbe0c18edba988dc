mod common;

use std::collections::BTreeMap;

use graphbandit::environments::{gen_hard_instance, HardInstanceSpec};
use graphbandit::graph::{gen_edgeless, gen_random, gen_star, FeedbackGraph, VertexSet};
use graphbandit::policies::{
    exp3ex_distribution, exp3ex_update, level_counts, loss_estimates, partition_actions,
    EtcHub, Exp3ExState, Feedback, Policy, PolicyKind,
};
use graphbandit::rng::{Stream, StreamRng};
use graphbandit::ActionDistribution;
use proptest::prelude::*;

/// Bucket of every arm, derived without logarithms: `k` is the first level
/// whose lower bound `2^-k` is below `q_i`, `l` the first class whose lower
/// bound `N2^-l` is below the in-level degree (last class absorbs the rest).
fn rederive(q: &[f64], g: &FeedbackGraph) -> BTreeMap<usize, Option<(usize, usize)>> {
    let n = q.len();
    let (kk, ll) = level_counts(n);
    let level: Vec<Option<usize>> = q
        .iter()
        .map(|&x| (1..=kk).find(|&k| x > 2f64.powi(-(k as i32))))
        .collect();
    (0..n)
        .map(|i| {
            let bucket = level[i].map(|k| {
                let deg = (0..n).filter(|&j| level[j] == Some(k) && g.has_edge(i, j)).count();
                let l = (1..=ll)
                    .find(|&l| deg as f64 > n as f64 / 2f64.powi(l as i32))
                    .unwrap_or(ll);
                (k, l)
            });
            (i, bucket)
        })
        .collect()
}

fn random_q(rng: &mut StreamRng, n: usize) -> ActionDistribution {
    // Log-uniform weights over a wide range so that several levels and the
    // tail get populated.
    let w: Vec<f64> = (0..n).map(|_| 2f64.powf(-40.0 * rng.next_f64())).collect();
    let total: f64 = w.iter().sum();
    let mut probs: Vec<f64> = w.iter().map(|x| x / total).collect();
    if n > 1 && rng.next_f64() < 0.2 {
        // Exact dyadic values exercise the closed interval ends.
        probs = vec![1.0 / n as f64; n];
    }
    ActionDistribution::full(probs).unwrap()
}

#[test]
fn partition_matches_rederivation() {
    let mut rng = StreamRng::new(Stream::new(2024));
    for case in 0..1000u64 {
        let n = 1 + rng.below(40);
        let g = gen_random(n, rng.next_f64() * 0.5, case).unwrap();
        let q = random_q(&mut rng, n);
        let p = partition_actions(&q, &g).unwrap();
        let expected = rederive(q.probs(), &g);
        let mut covered = VertexSet::empty(n);
        for ((k, l), set) in p.buckets() {
            assert!(!set.is_empty());
            for i in set {
                assert_eq!(expected[&i], Some((k, l)), "case {case}, arm {i}");
                assert!(!covered.contains(i));
                covered.insert(i);
            }
        }
        for i in p.tail() {
            assert_eq!(expected[&i], None);
            assert!(q[i] <= 2f64.powi(-(p.k_levels() as i32)));
            covered.insert(i);
        }
        assert_eq!(covered, g.vertices());
    }
}

#[test]
fn estimator_is_unbiased() {
    let g = FeedbackGraph::build(5, [(0, 1), (1, 2), (2, 3), (4, 0), (4, 3)]).unwrap();
    let p = ActionDistribution::full(vec![0.3, 0.1, 0.25, 0.15, 0.2]).unwrap();
    let losses = [0.9, 0.2, 0.55, 1.0, 0.35];
    let stream = Stream::new(77);
    let draws = 100_000u64;
    let mut sum = [0.0f64; 5];
    let mut sum_sq = [0.0f64; 5];
    for d in 0..draws {
        let i = p.sample(stream.uniform_at(d));
        let est = loss_estimates(&g, &Feedback::from_losses(&g, i, &losses), p.probs()).unwrap();
        for a in 0..5 {
            sum[a] += est[a];
            sum_sq[a] += est[a] * est[a];
        }
    }
    for a in 0..5 {
        let m = sum[a] / draws as f64;
        let var = sum_sq[a] / draws as f64 - m * m;
        let se = (var / draws as f64).sqrt();
        assert!((m - losses[a]).abs() <= 4.0 * se, "arm {a}: {m} vs {}", losses[a]);
    }
}

fn run_exp3ex(g: &FeedbackGraph, horizon: u64, cache: bool, seed: u64) -> Vec<Vec<f64>> {
    let spec = HardInstanceSpec {
        near_optimal: VertexSet::from_indices(g.n(), 0..g.n().div_ceil(2)).unwrap(),
        j_star: 0,
        gap: 0.2,
        seed,
    };
    let losses = gen_hard_instance(g, &spec, horizon).unwrap();
    let sampling = Stream::new(seed).split(1);
    let mut state = Exp3ExState::new(g, horizon, cache).unwrap();
    let mut trajectory = Vec::new();
    for t in 0..horizon {
        let (p, _) = exp3ex_distribution(&mut state).unwrap();
        let i = p.sample(sampling.uniform_at(t));
        exp3ex_update(&mut state, &Feedback::from_losses(g, i, &losses.row(t)), &p).unwrap();
        trajectory.push(p.into_probs());
    }
    trajectory
}

#[test]
fn proxy_cache_is_transparent() {
    for seed in 0..4 {
        let g = gen_random(12, 0.25, seed).unwrap();
        assert_eq!(run_exp3ex(&g, 60, true, seed), run_exp3ex(&g, 60, false, seed));
    }
    let star = gen_star(9).unwrap();
    assert_eq!(run_exp3ex(&star, 80, true, 5), run_exp3ex(&star, 80, false, 5));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exp3ex_round_invariants(n in 1usize..20, p in 0.0f64..0.5, seed in any::<u64>(), horizon in 1u64..60) {
        let g = gen_random(n, p, seed).unwrap();
        let losses = gen_hard_instance(&g, &HardInstanceSpec {
            near_optimal: g.vertices(),
            j_star: n - 1,
            gap: 0.3,
            seed,
        }, horizon).unwrap();
        let mut state = Exp3ExState::new(&g, horizon, true).unwrap();
        let sampling = Stream::new(seed);
        let mut last_eta = f64::INFINITY;
        for t in 0..horizon {
            let (pt, d) = exp3ex_distribution(&mut state).unwrap();
            let (k, l) = level_counts(n);
            prop_assert!((pt.total() - 1.0).abs() <= 1e-9);
            prop_assert!(pt.min() >= d.gamma / ((k * l + 1) as f64 * n as f64) - 1e-12);
            prop_assert!(d.gamma > 0.0 && d.gamma <= 0.5);
            prop_assert!((d.gamma - (1.0 / (d.eta * horizon as f64)).min(0.5)).abs() <= 1e-15);
            prop_assert!(d.eta <= last_eta);
            prop_assert!((d.u.total() - 1.0).abs() <= 1e-9);
            last_eta = d.eta;
            let i = pt.sample(sampling.uniform_at(t));
            exp3ex_update(&mut state, &Feedback::from_losses(&g, i, &losses.row(t)), &pt).unwrap();
            prop_assert!(state.cum_loss_est().iter().all(|x| x.is_finite() && *x >= 0.0));
        }
    }
}

#[test]
fn identical_arms_keep_q_uniform() {
    // On the complete graph every P_i = 1, so equal losses give equal
    // estimates and q stays exactly uniform.
    let n = 6;
    let edges = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)));
    let g = FeedbackGraph::build(n, edges).unwrap();
    let mut state = Exp3ExState::new(&g, 40, true).unwrap();
    let sampling = Stream::new(3);
    for t in 0..40 {
        let (p, d) = exp3ex_distribution(&mut state).unwrap();
        for i in 0..n {
            assert_eq!(d.q[i], d.q[0]);
        }
        let i = p.sample(sampling.uniform_at(t));
        let row = vec![0.1 * (t % 7) as f64; n];
        exp3ex_update(&mut state, &Feedback::from_losses(&g, i, &row), &p).unwrap();
    }
}

#[test]
fn constant_shift_keeps_the_weight_order() {
    let g = gen_edgeless(3).unwrap();
    let mut a = Exp3ExState::new(&g, 10, false).unwrap();
    let mut b = Exp3ExState::new(&g, 10, false).unwrap();
    let (pa, _) = exp3ex_distribution(&mut a).unwrap();
    let (pb, _) = exp3ex_distribution(&mut b).unwrap();
    exp3ex_update(&mut a, &Feedback::from_losses(&g, 1, &[0.2, 0.2, 0.2]), &pa).unwrap();
    exp3ex_update(&mut b, &Feedback::from_losses(&g, 1, &[0.7, 0.7, 0.7]), &pb).unwrap();
    let order = |s: &Exp3ExState| {
        let l = s.cum_loss_est();
        (l[0] == l[2], l[1] > l[0])
    };
    assert_eq!(order(&a), order(&b));
}

#[test]
fn etc_finds_the_best_arm_on_the_star() {
    let n = 10;
    let g = gen_star(n).unwrap();
    let horizon = 1000;
    let mut hits = 0;
    for seed in 0..100u64 {
        let spec = HardInstanceSpec {
            near_optimal: VertexSet::from_indices(n, 0..n - 1).unwrap(),
            j_star: (seed % 9) as usize,
            gap: 0.3,
            seed,
        };
        let losses = gen_hard_instance(&g, &spec, horizon).unwrap();
        let mut etc = EtcHub::new(&g, horizon, n - 1).unwrap();
        for t in 0..horizon {
            let p = etc.distribution().unwrap();
            let i = p.sample(0.5);
            etc.update(&Feedback::from_losses(&g, i, &losses.row(t)), &p).unwrap();
        }
        if etc.committed() == Some(spec.j_star) {
            hits += 1;
        }
    }
    assert!(hits >= 80, "{hits}/100");
}

#[test]
fn exp3set_matches_its_policy_id() {
    let g = gen_star(4).unwrap();
    for kind in PolicyKind::ALL {
        assert_eq!(kind.build(&g, 10, true).unwrap().kind(), kind);
    }
    let no_hub = gen_edgeless(3).unwrap();
    assert!(PolicyKind::EtcHub.build(&no_hub, 10, true).is_err());
}
