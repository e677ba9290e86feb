//! The sampler's posterior means against importance sampling from the prior,
//! with theta integrated out on a Simpson grid. Two items and few persons
//! keep the posterior wide enough for prior proposals to work.

use irtfa::sampler::ItemParam;
use irtfa::simulate::simulate;
use irtfa::{fit, FaItem, Link, ModelSpec, SamplerConfig, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const GRID: usize = 140;

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// log of prod_p P(y_p) with the 2^m pattern probabilities from Simpson's rule.
fn log_marginal(params: &[[f64; 4]], counts: &[u64], nodes: &[(f64, f64)]) -> f64 {
    let m = params.len();
    let mut total = 0.0;
    for (pattern, &k) in counts.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let prob: f64 = nodes
            .iter()
            .map(|&(t, w)| {
                let mut like = w;
                for (i, [alpha, tau, c, d]) in params.iter().enumerate() {
                    let u = (1.0 - alpha * alpha).sqrt();
                    let p = c + (d - c) * logistic((alpha * t - tau) / u);
                    like *= if pattern >> (m - 1 - i) & 1 == 1 { p } else { 1.0 - p };
                }
                like
            })
            .sum();
        total += k as f64 * prob.ln();
    }
    total
}

fn prior_draw(rng: &mut ChaCha8Rng) -> [f64; 4] {
    let alpha = loop {
        let a: f64 = 0.25 + rng.sample::<f64, _>(StandardNormal);
        if a > 0.0 && a < 1.0 {
            break a;
        }
    };
    let tau: f64 = rng.sample(StandardNormal);
    let c: f64 = rng.random();
    let d = c + (1.0 - c) * rng.random::<f64>();
    [alpha, tau, c, d]
}

fn batch_se(chains: &[Vec<f64>]) -> f64 {
    let mut means = Vec::new();
    for chain in chains {
        for batch in chain.chunks_exact(chain.len() / 25) {
            means.push(batch.iter().sum::<f64>() / batch.len() as f64);
        }
    }
    let k = means.len() as f64;
    let mean = means.iter().sum::<f64>() / k;
    (means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
}

#[test]
fn sampler_matches_importance_sampling_oracle() {
    let truth = [FaItem::new(0.7, -0.3, 0.15, 0.9).unwrap(), FaItem::new(0.6, 0.4, 0.1, 0.95).unwrap()];
    let sim = simulate(&truth, 60, Link::Logistic, 77).unwrap();
    let data = &sim.responses;
    let mut counts = vec![0u64; 4];
    for p in 0..data.n_persons() {
        counts[(data.get(p, 0) as usize) << 1 | data.get(p, 1) as usize] += 1;
    }

    let h = 16.0 / GRID as f64;
    let nodes: Vec<(f64, f64)> = (0..=GRID)
        .map(|j| {
            let t = -8.0 + j as f64 * h;
            let simpson = if j == 0 || j == GRID { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
            (t, simpson * h / 3.0 * (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt())
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let draws: Vec<[[f64; 4]; 2]> = (0..300_000).map(|_| [prior_draw(&mut rng), prior_draw(&mut rng)]).collect();
    let logw: Vec<f64> = draws.iter().map(|d| log_marginal(d, &counts, &nodes)).collect();
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let sw: f64 = w.iter().sum();
    let ess = sw * sw / w.iter().map(|x| x * x).sum::<f64>();
    assert!(ess > 2000.0, "importance sampling ESS {ess}");

    let config = SamplerConfig {
        chains: 4,
        burnin: 5000,
        samples: 25_000,
        seed: 79,
        model: ModelSpec::new(Link::Logistic, Variant::FourP),
        ..SamplerConfig::default()
    };
    let result = fit(data, &config).unwrap();

    let mut report = Vec::new();
    let mut worst: f64 = 0.0;
    for item in 0..2 {
        for (k, param) in ItemParam::ALL.iter().enumerate() {
            let is_mean = draws.iter().zip(&w).map(|(d, w)| w * d[item][k]).sum::<f64>() / sw;
            let is_var = draws.iter().zip(&w).map(|(d, w)| w * (d[item][k] - is_mean).powi(2)).sum::<f64>() / sw;
            let chains: Vec<Vec<f64>> =
                result.draws.chains.iter().map(|c| c.trace(*param, item).to_vec()).collect();
            let pooled: Vec<f64> = chains.concat();
            let mc_mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
            let se = (batch_se(&chains).powi(2) + is_var / ess).sqrt();
            let z = (mc_mean - is_mean) / se;
            worst = worst.max(z.abs());
            report.push(format!("{}[{item}] sampler {mc_mean:.4} oracle {is_mean:.4} z {z:+.2}", param.name()));
        }
    }
    println!("importance ESS {ess:.0}\n{}", report.join("\n"));
    assert!(worst <= 4.0, "{}", report.join("\n"));
}
