use nalgebra::DVector;
use proptest::prelude::*;
use seqzap_core::{penalty_gradient, penalty_value, PenaltyParams};

fn entry_away_from_kinks(alpha: f64) -> impl Strategy<Value = f64> {
    let band = 1.0 / alpha;
    let margin = 1e-3 / alpha;
    (prop::bool::ANY, prop::bool::ANY, 0.0f64..1.0).prop_map(move |(neg, inside, t)| {
        let mag = if inside {
            margin + t * (band - 2.0 * margin)
        } else {
            band + margin + t * 3.0 * band
        };
        if neg {
            -mag
        } else {
            mag
        }
    })
}

proptest! {
    #[test]
    fn gradient_is_odd(xs in prop::collection::vec(-5.0f64..5.0, 1..40), alpha in 0.1f64..10.0) {
        let p = PenaltyParams::new(alpha).unwrap();
        let x = DVector::from_vec(xs);
        let g = penalty_gradient(&x, p).unwrap();
        let gn = penalty_gradient(&-&x, p).unwrap();
        prop_assert_eq!(g, -gn);
    }

    #[test]
    fn dead_zone_outside_band(xs in prop::collection::vec(-5.0f64..5.0, 1..40), alpha in 0.1f64..10.0) {
        let p = PenaltyParams::new(alpha).unwrap();
        let x = DVector::from_vec(xs);
        let g = penalty_gradient(&x, p).unwrap();
        for (xi, gi) in x.iter().zip(g.iter()) {
            if xi.abs() > 1.0 / alpha {
                prop_assert_eq!(*gi, 0.0);
            }
        }
    }

    #[test]
    fn value_is_bounded_and_zero_only_at_origin(xs in prop::collection::vec(-5.0f64..5.0, 1..40), alpha in 0.1f64..10.0) {
        let p = PenaltyParams::new(alpha).unwrap();
        let x = DVector::from_vec(xs);
        let v = penalty_value(&x, p).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!(v <= x.len() as f64 / 2.0 + 1e-12);
        prop_assert_eq!(v == 0.0, x.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn finite_differences_match_gradient(
        (alpha, xs) in (0.2f64..5.0).prop_flat_map(|a| (Just(a), prop::collection::vec(entry_away_from_kinks(a), 1..12)))
    ) {
        let p = PenaltyParams::new(alpha).unwrap();
        let x = DVector::from_vec(xs);
        let g = penalty_gradient(&x, p).unwrap();
        let h = 1e-6;
        for i in 0..x.len() {
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (penalty_value(&up, p).unwrap() - penalty_value(&down, p).unwrap()) / (2.0 * h);
            let scale = g[i].abs().max(1e-8);
            if g[i] == 0.0 {
                prop_assert!(fd.abs() <= 1e-6);
            } else {
                prop_assert!((fd - g[i]).abs() / scale <= 1e-4, "i={} fd={} g={}", i, fd, g[i]);
            }
        }
    }
}
