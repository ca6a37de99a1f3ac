//! Entropy and complexity against hand-written evaluations.

use ordpat_core::stats::{js_complexity, js_divergence, permutation_entropy, PatternHistogram};
use proptest::prelude::*;

/// Direct evaluation with natural logs: normalized entropy times the
/// Jensen-Shannon bracket (raw nats) over its maximum.
fn oracle(p: &[f64; 24]) -> (f64, f64) {
    let h = |q: &[f64]| -> f64 {
        let mut s = 0.0;
        for &x in q {
            if x > 0.0 {
                s -= x * x.ln();
            }
        }
        s
    };
    let mut mid = [0.0; 24];
    for k in 0..24 {
        mid[k] = (p[k] + 1.0 / 24.0) / 2.0;
    }
    let s = h(p) / 24f64.ln();
    let q_max = 0.5 * (96f64.ln() - 25.0 / 24.0 * 25f64.ln());
    let q = (h(&mid) - h(p) / 2.0 - 24f64.ln() / 2.0) / q_max;
    (s, s * q)
}

#[test]
fn block_uniform() {
    for block in 0..3 {
        let mut p = [0.0; 24];
        p[block * 8..block * 8 + 8].fill(1.0 / 8.0);
        let h = PatternHistogram::from_frequencies(p, 8).unwrap();
        let (s, c) = oracle(&p);
        assert!((permutation_entropy(&h) - 8f64.ln() / 24f64.ln()).abs() < 1e-12);
        assert!((permutation_entropy(&h) - 0.6543).abs() < 5e-5);
        assert!((permutation_entropy(&h) - s).abs() < 1e-12);
        assert!((js_complexity(&h) - c).abs() < 1e-12);
    }
}

#[test]
fn q_max_is_attained_by_point_mass() {
    let mut p = [0.0; 24];
    p[17] = 1.0;
    let h = PatternHistogram::from_frequencies(p, 1).unwrap();
    assert!((js_divergence(&h) - 1.0).abs() < 1e-12);
}

fn distribution() -> impl Strategy<Value = [f64; 24]> {
    prop::array::uniform24(0u32..1000).prop_filter_map("all zero", |w| {
        let total: u32 = w.iter().sum();
        (total > 0).then(|| w.map(|x| x as f64 / total as f64))
    })
}

proptest! {
    #[test]
    fn matches_oracle(p in distribution()) {
        let h = PatternHistogram::from_frequencies(p, 1).unwrap();
        let (s, c) = oracle(&p);
        prop_assert!((permutation_entropy(&h) - s).abs() < 1e-12);
        prop_assert!((js_complexity(&h) - c).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&permutation_entropy(&h)));
        prop_assert!(js_complexity(&h) >= 0.0);
    }

    #[test]
    fn invariant_under_within_block_relabeling(p in distribution(), shifts in prop::array::uniform3(0usize..8)) {
        let mut q = [0.0; 24];
        for k in 0..24 {
            let block = k / 8;
            q[block * 8 + (k % 8 + shifts[block]) % 8] = p[k];
        }
        let a = PatternHistogram::from_frequencies(p, 1).unwrap();
        let b = PatternHistogram::from_frequencies(q, 1).unwrap();
        prop_assert!((permutation_entropy(&a) - permutation_entropy(&b)).abs() < 1e-12);
        prop_assert!((js_complexity(&a) - js_complexity(&b)).abs() < 1e-12);
        prop_assert_eq!(a.block_sums().map(|x| (x * 1e12).round()), b.block_sums().map(|x| (x * 1e12).round()));
    }
}
