mod common;

use imwa_core::data::{class_counts, LongTailSpec};
use imwa_core::imwa::{average_weights, l2_distance, pairwise_l2};
use imwa_core::metrics::evaluate;
use imwa_core::nn::{LayerLayout, WeightVector};
use proptest::prelude::*;

fn layout() -> LayerLayout {
    LayerLayout::from_widths(&[2, 3, 2]).unwrap()
}

fn models(max: usize) -> impl Strategy<Value = Vec<WeightVector>> {
    let n = layout().param_count();
    prop::collection::vec(prop::collection::vec(-10.0..10.0f64, n), 1..=max).prop_map(|vs| {
        vs.into_iter()
            .map(|v| WeightVector::new(layout(), v).unwrap())
            .collect()
    })
}

proptest! {
    #[test]
    fn average_ignores_model_order(ms in models(5), seed in any::<u64>()) {
        let mut shuffled = ms.clone();
        let k = shuffled.len();
        shuffled.rotate_left((seed as usize) % k);
        if seed % 2 == 0 {
            shuffled.reverse();
        }
        prop_assert_eq!(average_weights(&ms, None).unwrap(), average_weights(&shuffled, None).unwrap());
    }

    #[test]
    fn average_stays_inside_the_entrywise_hull(ms in models(5)) {
        let avg = average_weights(&ms, None).unwrap();
        for (k, &a) in avg.values().iter().enumerate() {
            let lo = ms.iter().map(|m| m.values()[k]).fold(f64::INFINITY, f64::min);
            let hi = ms.iter().map(|m| m.values()[k]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= a && a <= hi);
        }
    }

    #[test]
    fn averaging_copies_returns_the_copy(ms in models(1), m in 1usize..6) {
        let copies = vec![ms[0].clone(); m];
        prop_assert_eq!(average_weights(&copies, None).unwrap(), ms[0].clone());
    }

    #[test]
    fn weighted_average_with_a_unit_coefficient_selects(ms in models(4), pick in any::<prop::sample::Index>()) {
        let i = pick.index(ms.len());
        let mut c = vec![0.0; ms.len()];
        c[i] = 1.0;
        prop_assert_eq!(average_weights(&ms, Some(&c)).unwrap(), ms[i].clone());
    }

    #[test]
    fn distances_are_metric_like(ms in models(4)) {
        prop_assume!(ms.len() >= 2);
        let d = pairwise_l2(&ms).unwrap();
        prop_assert_eq!(d.len(), ms.len() * (ms.len() - 1) / 2);
        prop_assert!(d.iter().all(|x| *x >= 0.0 && x.is_finite()));
        let (a, b) = (ms[0].values(), ms[1].values());
        prop_assert_eq!(l2_distance(a, b), l2_distance(b, a));
        prop_assert_eq!(l2_distance(a, a), 0.0);
    }

    #[test]
    fn class_counts_follow_the_power_law(c in 2usize..30, n1 in 1usize..2000, gamma in 1.0..100.0f64) {
        prop_assume!(n1 as f64 / gamma >= 0.5);
        let counts = class_counts(&LongTailSpec::new(c, n1, gamma).unwrap()).unwrap();
        prop_assert_eq!(counts.len(), c);
        prop_assert_eq!(counts[0], n1);
        prop_assert!(counts.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((counts[c - 1] as f64 - n1 as f64 / gamma).abs() <= 0.5 + 1e-9);
        prop_assert!(counts.iter().all(|&n| n >= 1));
    }

    #[test]
    fn evaluation_ignores_sample_order(seed in 0u64..50, shift in 1usize..40) {
        let data = common::tiny_data(seed);
        let w = common::tiny_init(seed);
        let n = data.test.len();
        let order: Vec<usize> = (0..n).map(|i| (i * 7 + shift) % n).collect();
        prop_assume!({
            let mut o = order.clone();
            o.sort_unstable();
            o.dedup();
            o.len() == n
        });
        let permuted = data.test.permuted(&order).unwrap();
        let counts = data.train.class_counts();
        prop_assert_eq!(evaluate(&w, &data.test, counts).unwrap(), evaluate(&w, &permuted, counts).unwrap());
    }
}
