//! Property tests for the numeric primitives and the loss family, plus
//! brute-force and bisection oracles for the sparse mappings.

use proptest::prelude::*;

use as_softmax::losses::{
    as_multilabel, as_softmax, as_variant, entmax15_loss, label_smoothing_ce, multilabel_softmax,
    softmax_ce, sparse_topk_ce, sparsemax_loss, t_softmax_ce, MultiLabelTarget,
};
use as_softmax::masking::mask_multiclass;
use as_softmax::numerics::{entmax15, simplex_project, stable_softmax};

fn logits_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-6.0..6.0f64, n)
}

/// Brute force over all support sets: the simplex projection is the
/// feasible sort-free candidate, unique by strict convexity.
fn simplex_project_bruteforce(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sum: f64 = support.iter().map(|&i| v[i]).sum();
        let tau = (sum - 1.0) / support.len() as f64;
        let mut p = vec![0.0; n];
        let mut feasible = true;
        for &i in &support {
            p[i] = v[i] - tau;
            if p[i] < -1e-12 {
                feasible = false;
                break;
            }
        }
        if !feasible {
            continue;
        }
        let dist: f64 = p.iter().zip(v).map(|(pi, vi)| (pi - vi) * (pi - vi)).sum();
        if best.as_ref().map_or(true, |(d, _)| dist < *d) {
            best = Some((dist, p));
        }
    }
    best.expect("full support is always feasible").1
}

/// Bisection on the 1.5-entmax threshold: find τ with Σ (s_i − τ)₊² = 1
/// where s = (v − max)/2.
fn entmax15_bisection(v: &[f64]) -> Vec<f64> {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: Vec<f64> = v.iter().map(|x| (x - max) / 2.0).collect();
    let s_max = 0.0;
    let mut lo = s_max - 1.0;
    let mut hi = s_max;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let sum: f64 = s
            .iter()
            .map(|&x| {
                let d = x - mid;
                if d > 0.0 {
                    d * d
                } else {
                    0.0
                }
            })
            .sum();
        if sum < 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    s.iter()
        .map(|&x| {
            let d = x - tau;
            if d > 0.0 {
                d * d
            } else {
                0.0
            }
        })
        .collect()
}

#[test]
fn entmax15_matches_bisection_on_reference_input() {
    let v = [1.0, 0.0, -1.0];
    let got = entmax15(&v).unwrap();
    let oracle = entmax15_bisection(&v);
    for (g, o) in got.values().iter().zip(&oracle) {
        assert!((g - o).abs() < 1e-8, "{g} vs {o}");
    }
}

#[test]
fn simplex_project_matches_bruteforce_on_grid() {
    // Dense sweep on n ≤ 4 vectors.
    let grid = [-1.5, -0.4, 0.0, 0.3, 1.1, 2.0];
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                let v = [a, b, c];
                let got = simplex_project(&v).unwrap();
                let oracle = simplex_project_bruteforce(&v);
                for (g, o) in got.values().iter().zip(&oracle) {
                    assert!((g - o).abs() < 1e-6, "{v:?}: {g} vs {o}");
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn softmax_shift_invariance(v in logits_strategy(5), c in -1e3..1e3f64) {
        let base = stable_softmax(&v).unwrap();
        let shifted_input: Vec<f64> = v.iter().map(|x| x + c).collect();
        let shifted = stable_softmax(&shifted_input).unwrap();
        for (a, b) in base.values().iter().zip(shifted.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_project_matches_bruteforce(v in prop::collection::vec(-3.0..3.0f64, 2..=4)) {
        let got = simplex_project(&v).unwrap();
        let oracle = simplex_project_bruteforce(&v);
        for (g, o) in got.values().iter().zip(&oracle) {
            prop_assert!((g - o).abs() < 1e-6);
        }
    }

    #[test]
    fn entmax15_matches_bisection(v in prop::collection::vec(-6.0..6.0f64, 2..=10)) {
        let got = entmax15(&v).unwrap();
        let oracle = entmax15_bisection(&v);
        for (g, o) in got.values().iter().zip(&oracle) {
            prop_assert!((g - o).abs() < 1e-6);
        }
    }

    #[test]
    fn entmax15_support_respects_threshold(v in prop::collection::vec(-6.0..6.0f64, 2..=8)) {
        let p = entmax15(&v).unwrap();
        let sum: f64 = p.values().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        // No dropped class may out-score a kept one.
        let max_out = v.iter().zip(p.values()).filter(|(_, &pi)| pi == 0.0)
            .map(|(&vi, _)| vi).fold(f64::NEG_INFINITY, f64::max);
        let min_in = v.iter().zip(p.values()).filter(|(_, &pi)| pi > 0.0)
            .map(|(&vi, _)| vi).fold(f64::INFINITY, f64::min);
        prop_assert!(max_out <= min_in + 1e-12);
    }

    #[test]
    fn mappings_preserve_unique_argmax(v in prop::collection::vec(-4.0..4.0f64, 3..=6)) {
        let arg = as_softmax::numerics::argmax(&v);
        let unique = v.iter().enumerate().all(|(i, &x)| i == arg || x < v[arg] - 1e-9);
        prop_assume!(unique);
        prop_assert_eq!(as_softmax::numerics::argmax(stable_softmax(&v).unwrap().values()), arg);
        prop_assert_eq!(as_softmax::numerics::argmax(simplex_project(&v).unwrap().values()), arg);
        prop_assert_eq!(as_softmax::numerics::argmax(entmax15(&v).unwrap().values()), arg);
    }

    #[test]
    fn renormalising_losses_have_zero_sum_gradients(
        v in logits_strategy(6),
        t in 0usize..6,
        delta in 0.05..1.0f64,
        tau in 0.25..4.0f64,
        k in 1usize..=6,
    ) {
        for lr in [
            softmax_ce(&v, t).unwrap(),
            t_softmax_ce(&v, t, tau).unwrap(),
            sparse_topk_ce(&v, t, k).unwrap(),
            as_softmax(&v, t, delta).unwrap(),
            as_variant(&v, t, delta * 4.0).unwrap(),
            sparsemax_loss(&v, t).unwrap(),
            entmax15_loss(&v, t).unwrap(),
        ] {
            if !lr.sample_masked {
                let sum: f64 = lr.grad.iter().sum();
                prop_assert!(sum.abs() < 1e-9, "gradient sum {sum}");
            }
            prop_assert!(lr.loss >= 0.0);
            prop_assert!(lr.grad.iter().all(|g| g.is_finite()));
        }
    }

    #[test]
    fn as_softmax_loss_zero_iff_masked(v in logits_strategy(5), t in 0usize..5, delta in 0.05..0.9f64) {
        let lr = as_softmax(&v, t, delta).unwrap();
        prop_assert_eq!(lr.sample_masked, lr.loss == 0.0);
        let p = stable_softmax(&v).unwrap();
        let decision = mask_multiclass(&p, t, delta).unwrap();
        prop_assert_eq!(decision.sample_masked, lr.sample_masked);
        prop_assert_eq!(&decision.retained, &lr.retained);
    }

    #[test]
    fn as_softmax_masking_is_monotone_in_delta(
        v in logits_strategy(5),
        t in 0usize..5,
        lo in 0.05..0.5f64,
        hi in 0.5..0.95f64,
    ) {
        // Any class masked at the larger margin is masked at the smaller one.
        let at_hi = as_softmax(&v, t, hi).unwrap();
        let at_lo = as_softmax(&v, t, lo).unwrap();
        for (a, b) in at_hi.retained.iter().zip(&at_lo.retained) {
            prop_assert!(*a || !*b, "class dropped at hi but kept at lo");
        }
    }

    #[test]
    fn masked_samples_satisfy_margin_bound(v in prop::collection::vec(-8.0..8.0f64, 5), delta in 0.05..0.9f64) {
        let t = as_softmax::numerics::argmax(&v);
        let lr = as_softmax(&v, t, delta).unwrap();
        if lr.sample_masked {
            let o_min = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let bound = (v.len() as f64 * delta + 1.0).ln();
            prop_assert!(v[t] - o_min >= bound - 1e-12);
        }
    }

    #[test]
    fn mask_multiclass_is_permutation_invariant(
        v in logits_strategy(5),
        delta in 0.05..0.9f64,
        rot in 1usize..4,
    ) {
        // Rotate the non-target entries; the retained flags rotate with them.
        let t = 0usize;
        let p = stable_softmax(&v).unwrap();
        let d = mask_multiclass(&p, t, delta).unwrap();
        let mut order: Vec<usize> = (1..5).collect();
        order.rotate_left(rot);
        let mut permuted = vec![v[0]];
        permuted.extend(order.iter().map(|&i| v[i]));
        let dp = mask_multiclass(&stable_softmax(&permuted).unwrap(), t, delta).unwrap();
        prop_assert_eq!(dp.sample_masked, d.sample_masked);
        for (slot, &src) in order.iter().enumerate() {
            prop_assert_eq!(dp.retained[slot + 1], d.retained[src]);
        }
    }

    #[test]
    fn degeneracies_match_softmax(v in logits_strategy(5), t in 0usize..5) {
        let base = softmax_ce(&v, t).unwrap();
        for other in [
            as_softmax(&v, t, 1.0).unwrap(),
            t_softmax_ce(&v, t, 1.0).unwrap(),
            label_smoothing_ce(&v, t, 0.0).unwrap(),
            sparse_topk_ce(&v, t, 5).unwrap(),
            as_softmax::losses::am_softmax(&v, t, 1.0, 0.0).unwrap(),
        ] {
            prop_assert!((other.loss - base.loss).abs() < 1e-12);
            for (a, b) in other.grad.iter().zip(&base.grad) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn multilabel_losses_agree_at_delta_one(
        v in logits_strategy(6),
        pos_mask in prop::collection::vec(prop::bool::ANY, 6),
    ) {
        let positives: Vec<usize> = (0..6).filter(|&i| pos_mask[i]).collect();
        prop_assume!(!positives.is_empty());
        let targets = MultiLabelTarget::new(positives, 6).unwrap();
        let plain = multilabel_softmax(&v, &targets).unwrap();
        let adaptive = as_multilabel(&v, &targets, 1.0).unwrap();
        prop_assert_eq!(plain.loss, adaptive.loss);
        prop_assert_eq!(&plain.grad, &adaptive.grad);
        prop_assert!(plain.loss >= 0.0);
    }
}
