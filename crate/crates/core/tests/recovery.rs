//! Statistical checks on full fits. These take a few minutes on one core.

use irtfa::scores::{restricted_scores, Restricted};
use irtfa::simulate::{prior_items, simulate};
use irtfa::{fit, FaItem, Link, ModelSpec, SamplerConfig, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn moderate_items(m: usize, seed: u64) -> Vec<FaItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            FaItem::new(
                rng.random_range(0.4..0.85),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.05..0.25),
                rng.random_range(0.85..0.97),
            )
            .unwrap()
        })
        .collect()
}

fn four_pl(seed: u64) -> SamplerConfig {
    SamplerConfig {
        seed,
        model: ModelSpec::new(Link::Logistic, Variant::FourP),
        ..SamplerConfig::default()
    }
}

#[test]
fn rhat_below_threshold_at_default_settings() {
    let truth = prior_items(10, Variant::FourP, 7).unwrap();
    let sim = simulate(&truth, 1000, Link::Logistic, 8).unwrap();
    let result = fit(&sim.responses, &four_pl(9)).unwrap();
    let max = result.diagnostics.max_rhat().unwrap();
    println!("max rhat {max:.4}, flagged {:?}", result.diagnostics.flagged);
    assert!(max < 1.05, "max rhat {max}");
}

// Known red: at n = 2000 the posterior medians themselves sit away from the
// truth (c and alpha high, d low, the pull of the asymptote priors), and the
// Monte Carlo error at 1k draws is already smaller than that gap. Measured
// RMSE 0.270 at 1k against 0.306 at 8k. Run with --ignored to reproduce.
#[test]
#[ignore = "known red: posterior bias dominates Monte Carlo error at n = 2000"]
fn longer_runs_move_medians_toward_truth() {
    let truth = moderate_items(10, 41);
    let sim = simulate(&truth, 2000, Link::Logistic, 42).unwrap();
    let rmse = |retained_per_chain: usize| {
        let config = SamplerConfig {
            samples: retained_per_chain,
            ..four_pl(43)
        };
        let result = fit(&sim.responses, &config).unwrap();
        let sq: f64 = truth
            .iter()
            .zip(&result.items)
            .map(|(t, e)| {
                (t.alpha() - e.fa.alpha()).powi(2)
                    + (t.tau() - e.fa.tau()).powi(2)
                    + (t.c() - e.fa.c()).powi(2)
                    + (t.d() - e.fa.d()).powi(2)
            })
            .sum();
        (sq / (4 * truth.len()) as f64).sqrt()
    };
    // 1k and 8k retained draws pooled over two chains
    let (short, long) = (rmse(500), rmse(4000));
    println!("rmse 1k {short:.4}, 8k {long:.4}");
    assert!(long < short, "{long} >= {short}");
}

#[test]
fn restricted_scores_bracket_observed_totals() {
    let truth = moderate_items(10, 51);
    let sim = simulate(&truth, 1000, Link::Logistic, 52).unwrap();
    let data = &sim.responses;
    let config = SamplerConfig {
        burnin: 1000,
        samples: 1000,
        ..four_pl(53)
    };
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let ng = mean(&restricted_scores(data, &config, Restricted::Ng).unwrap());
    let ni = mean(&restricted_scores(data, &config, Restricted::Ni).unwrap());
    let observed = mean(&data.totals().iter().map(|&t| t as f64).collect::<Vec<_>>());
    println!("mean NG {ng:.3}, observed {observed:.3}, NI {ni:.3}");
    assert!(ng <= observed && observed <= ni);
}
