//! Fit a 4PL to simulated data and print item estimates with convergence
//! diagnostics.
//!
//! cargo run --release --example fit_4pl

use irtfa::sampler::Scan;
use irtfa::simulate::simulate;
use irtfa::{fit, FaItem, Link, ModelSpec, SamplerConfig, Variant};

fn main() -> irtfa::Result<()> {
    let truth = vec![
        FaItem::new(0.7, -0.4, 0.2, 0.95)?,
        FaItem::new(0.5, 0.3, 0.1, 0.9)?,
        FaItem::new(0.8, 0.6, 0.25, 0.97)?,
        FaItem::new(0.6, 0.0, 0.15, 0.92)?,
        FaItem::new(0.65, -1.0, 0.05, 0.88)?,
        FaItem::new(0.55, 1.0, 0.2, 0.96)?,
    ];
    let sim = simulate(&truth, 1000, Link::Logistic, 3)?;
    let config = SamplerConfig {
        burnin: 2000,
        samples: 2000,
        seed: 4,
        scan: Scan::Collapsed,
        model: ModelSpec::new(Link::Logistic, Variant::FourP),
        ..SamplerConfig::default()
    };
    let result = fit(&sim.responses, &config)?;

    println!("{:<4} {:>14} {:>14} {:>14} {:>14} {:>7}", "item", "alpha", "tau", "c", "d", "rhat");
    for (i, (est, t)) in result.items.iter().zip(&truth).enumerate() {
        let id = &result.item_ids[i];
        let worst = ["alpha", "tau", "c", "d"]
            .iter()
            .filter_map(|p| result.diagnostics.get(&format!("{p}[{id}]")).and_then(|s| s.rhat))
            .fold(0.0, f64::max);
        println!(
            "{id:<4} {:>6.3} ({:.3}) {:>6.3} ({:.3}) {:>6.3} ({:.3}) {:>6.3} ({:.3}) {worst:>7.3}",
            est.fa.alpha(),
            t.alpha(),
            est.fa.tau(),
            t.tau(),
            est.fa.c(),
            t.c(),
            est.fa.d(),
            t.d()
        );
    }
    println!("truth in parentheses; IRT form of item 1: a={:.3} b={:.3}", result.items[0].irt.a(), result.items[0].irt.b());
    for chain in &result.draws.chains {
        println!(
            "chain {}: theta acceptance {:.2}, alpha {:.2}, tau {:.2}",
            chain.chain,
            chain.acceptance.theta.rate(),
            chain.acceptance.alpha.rate(),
            chain.acceptance.tau.rate()
        );
    }
    Ok(())
}
