//! Simulate a 4PL dataset from prior-drawn items, fit it, and report how well
//! the sampler recovers the truth.
//!
//! cargo run --release --example parameter_recovery -- [n] [m] [seed] [prior|moderate]
//!
//! `prior` draws items from the model priors; `moderate` keeps loadings in
//! (0.4, 0.85), guessing below 0.25 and inattention above 0.85.

use irtfa::simulate::{prior_items, simulate};
use irtfa::{fit, FaItem, Link, ModelSpec, SamplerConfig, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn moderate_items(m: usize, seed: u64) -> irtfa::Result<Vec<FaItem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            FaItem::new(
                rng.random_range(0.4..0.85),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..0.25),
                rng.random_range(0.85..1.0),
            )
        })
        .collect()
}

fn rmse(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (sum, k) = pairs.fold((0.0, 0usize), |(s, k), (a, b)| (s + (a - b).powi(2), k + 1));
    (sum / k as f64).sqrt()
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn main() -> irtfa::Result<()> {
    let raw: Vec<String> = std::env::args().skip(1).collect();
    let moderate = raw.iter().any(|a| a == "moderate");
    let args: Vec<u64> = raw.iter().filter_map(|a| a.parse().ok()).collect();
    let n = *args.first().unwrap_or(&2000) as usize;
    let m = *args.get(1).unwrap_or(&20) as usize;
    let seed = *args.get(2).unwrap_or(&2024);

    let truth = if moderate {
        moderate_items(m, seed)?
    } else {
        prior_items(m, Variant::FourP, seed)?
    };
    let sim = simulate(&truth, n, Link::Logistic, seed + 1)?;
    let config = SamplerConfig {
        seed: seed + 2,
        model: ModelSpec::new(Link::Logistic, Variant::FourP),
        ..SamplerConfig::default()
    };
    let start = std::time::Instant::now();
    let result = fit(&sim.responses, &config)?;
    println!("fit {n} x {m} in {:.1?}", start.elapsed());

    println!("{:>5} {:>8} {:>8} {:>8} {:>8} {:>7} {:>7} {:>7} {:>7}", "item", "a", "a_hat", "b", "b_hat", "c", "c_hat", "d", "d_hat");
    for (i, (t, est)) in truth.iter().zip(&result.items).enumerate() {
        let t = t.to_irt()?;
        println!(
            "{:>5} {:8.3} {:8.3} {:8.3} {:8.3} {:7.3} {:7.3} {:7.3} {:7.3}",
            i + 1, t.a(), est.irt.a(), t.b(), est.irt.b(), t.c(), est.irt.c(), t.d(), est.irt.d()
        );
    }
    let pairs = |f: fn(&irtfa::IrtItem) -> f64| -> Vec<(f64, f64)> {
        truth.iter().zip(&result.items).map(|(t, e)| (f(&t.to_irt().unwrap()), f(&e.irt))).collect()
    };
    println!("rmse a {:.4}", rmse(pairs(|x| x.a()).into_iter()));
    println!("rmse b {:.4}", rmse(pairs(|x| x.b()).into_iter()));
    println!("rmse c {:.4}", rmse(pairs(|x| x.c()).into_iter()));
    println!("rmse d {:.4}", rmse(pairs(|x| x.d()).into_iter()));
    println!("cor(theta_hat, theta) {:.4}", pearson(&result.theta, &sim.true_theta));
    println!("max rhat {:.4}", result.diagnostics.max_rhat().unwrap_or(f64::NAN));
    for s in result.diagnostics.parameters.iter().filter(|s| s.rhat.is_some_and(|r| r > 1.05)) {
        println!("  {} rhat {:.3} ess {:.0}", s.name, s.rhat.unwrap(), s.ess.unwrap_or(f64::NAN));
    }
    Ok(())
}
