use irtfa::diagnostics::mse_compare;
use irtfa::probability::{marginal_pattern_prob_fa_enum, marginal_pattern_prob_irt, z_posterior_prob};
use irtfa::simulate::simulate;
use irtfa::{FaItem, IrtItem, Link, QuadratureRule, Rescale, ResponsePattern};
use proptest::prelude::*;

fn link() -> impl Strategy<Value = Link> {
    prop_oneof![Just(Link::Logistic), Just(Link::NormalOgive)]
}

prop_compose! {
    fn fa_item()(alpha in 0.02f64..0.98, tau in -3.0f64..3.0, c in 0.0f64..0.5, gap in 0.01f64..0.5) -> FaItem {
        FaItem::new(alpha, tau, c, (c + gap).min(1.0)).unwrap()
    }
}

prop_compose! {
    fn irt_item()(a in 0.2f64..3.0, b in -2.0f64..2.0, c in 0.0f64..0.4, gap in 0.05f64..0.6) -> IrtItem {
        IrtItem::new(a, b, c, (c + gap).min(1.0)).unwrap()
    }
}

proptest! {
    #[test]
    fn irt_curve_strictly_increasing(item in irt_item(), link in link(), t in -4.0f64..3.9, step in 0.01f64..2.0) {
        let t2 = (t + step).min(4.0);
        // past |a (theta - b)| of about 8 the normal CDF rounds to 0 or 1
        prop_assume!(item.a() * (t - item.b()).abs().max((t2 - item.b()).abs()) < 7.0);
        prop_assert!(item.response_prob(t, link) < item.response_prob(t2, link));
    }

    #[test]
    fn fa_and_irt_curves_coincide(item in fa_item(), link in link()) {
        let irt = item.to_irt().unwrap();
        for k in 0..=48 {
            let theta = -6.0 + 0.25 * k as f64;
            let gap = (item.response_prob(theta, link) - irt.response_prob(theta, link)).abs();
            prop_assert!(gap <= 1e-12, "theta {theta}: {gap}");
        }
    }

    #[test]
    fn conversions_are_mutual_inverses(item in fa_item(), other in irt_item()) {
        let back = item.to_irt().unwrap().to_fa().unwrap();
        prop_assert!((back.alpha() - item.alpha()).abs() <= 1e-12);
        prop_assert!((back.tau() - item.tau()).abs() <= 1e-12 * item.tau().abs().max(1.0));
        prop_assert_eq!((back.c(), back.d()), (item.c(), item.d()));
        let again = other.to_fa().unwrap().to_irt().unwrap();
        prop_assert!((again.a() - other.a()).abs() <= 1e-12 * other.a().max(1.0));
        prop_assert!((again.b() - other.b()).abs() <= 1e-12 * other.b().abs().max(1.0));
        let there = other.rescale(Rescale::LogisticToNormal).rescale(Rescale::NormalToLogistic);
        prop_assert!((there.a() - other.a()).abs() <= 1e-12 * other.a().max(1.0));
    }

    #[test]
    fn two_param_items_pin_asymptotes(alpha in 0.05f64..0.95, tau in -2.0f64..2.0, theta in -5.0f64..5.0, link in link()) {
        let item = FaItem::two_param(alpha, tau).unwrap();
        prop_assert_eq!((item.c(), item.d()), (0.0, 1.0));
        prop_assert_eq!(item.response_prob(theta, link), item.latent_prob(theta, link));
    }

    #[test]
    fn z_posterior_monotone(f in 0.01f64..0.98, df in 0.001f64..0.01, c in 0.0f64..0.45, gap in 0.05f64..0.5) {
        let d = (c + gap).min(1.0);
        let f2 = f + df;
        prop_assert!(z_posterior_prob(1, f, c, d).unwrap() <= z_posterior_prob(1, f2, c, d).unwrap());
        prop_assert!(z_posterior_prob(0, f, c, d).unwrap() <= z_posterior_prob(0, f2, c, d).unwrap());
    }

    #[test]
    fn marginals_agree_and_sum_to_one(items in prop::collection::vec(fa_item(), 1..=3), link in link()) {
        let rule = QuadratureRule::default();
        let irt: Vec<IrtItem> = items.iter().map(|i| i.to_irt().unwrap()).collect();
        let mut total = 0.0;
        for pattern in ResponsePattern::all(items.len()) {
            let fa = marginal_pattern_prob_fa_enum(&pattern, &items, link, &rule).unwrap();
            let ir = marginal_pattern_prob_irt(&pattern, &irt, link, &rule).unwrap();
            prop_assert!((fa - ir).abs() <= 1e-8);
            total += ir;
        }
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn mse_symmetric_and_nonnegative(xs in prop::collection::vec(-10.0f64..10.0, 1..30), shift in -1.0f64..1.0) {
        let ys: Vec<f64> = xs.iter().enumerate().map(|(k, x)| if k % 2 == 0 { x + shift } else { *x }).collect();
        let ab = mse_compare(&xs, &ys).unwrap();
        prop_assert_eq!(ab, mse_compare(&ys, &xs).unwrap());
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab == 0.0, shift == 0.0);
        prop_assert_eq!(mse_compare(&xs, &xs).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn simulated_datasets_are_internally_consistent(
        items in prop::collection::vec(fa_item(), 1..6),
        n in 1usize..200,
        link in link(),
        seed in any::<u64>(),
    ) {
        let sim = simulate(&items, n, link, seed).unwrap();
        let again = simulate(&items, n, link, seed).unwrap();
        prop_assert_eq!(sim.responses.values(), again.responses.values());
        prop_assert_eq!(&sim.true_theta, &again.true_theta);
        for p in 0..n {
            for (i, item) in items.iter().enumerate() {
                let z = (sim.ystar(p, i) >= item.tau()) as u8;
                prop_assert_eq!(sim.z(p, i), z);
                let y = sim.responses.get(p, i);
                // a guess needs c > 0, a slip needs d < 1
                if item.c() == 0.0 && z == 0 {
                    prop_assert_eq!(y, 0);
                }
                if item.d() == 1.0 && z == 1 {
                    prop_assert_eq!(y, 1);
                }
            }
        }
    }
}
