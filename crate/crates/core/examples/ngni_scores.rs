//! NGNI, NG and NI scores on simulated data, with pattern averaging.
//!
//! cargo run --release --example ngni_scores

use irtfa::scores::{ngni_scores, pattern_average, restricted_scores, Restricted};
use irtfa::simulate::simulate;
use irtfa::{fit, FaItem, Link, ModelSpec, SamplerConfig, Variant};

fn main() -> irtfa::Result<()> {
    let truth = vec![
        FaItem::new(0.7, -0.8, 0.3, 0.93)?,
        FaItem::new(0.6, -0.2, 0.25, 0.9)?,
        FaItem::new(0.8, 0.2, 0.2, 0.95)?,
        FaItem::new(0.5, 0.6, 0.3, 0.92)?,
        FaItem::new(0.65, 1.0, 0.15, 0.97)?,
    ];
    let sim = simulate(&truth, 800, Link::Logistic, 11)?;
    let data = &sim.responses;
    let config = SamplerConfig {
        burnin: 1000,
        samples: 1000,
        seed: 12,
        model: ModelSpec::new(Link::Logistic, Variant::FourP),
        ..SamplerConfig::default()
    };
    let result = fit(data, &config)?;
    let scores = ngni_scores(&result, data)?
        .with_restricted(Restricted::Ng, &restricted_scores(data, &config, Restricted::Ng)?)?
        .with_restricted(Restricted::Ni, &restricted_scores(data, &config, Restricted::Ni)?)?;
    let averaged = pattern_average(&scores, data)?;

    // one line per observed total: how the adjusted scores spread around it
    println!("{:>8} {:>6} {:>8} {:>8} {:>8}", "observed", "count", "ngni", "ng", "ni");
    for total in 0..=data.n_items() {
        let group: Vec<_> = averaged.persons.iter().filter(|p| p.observed_total == total).collect();
        if group.is_empty() {
            continue;
        }
        let k = group.len() as f64;
        let mean = |f: &dyn Fn(&irtfa::scores::PersonScore) -> f64| group.iter().map(|p| f(p)).sum::<f64>() / k;
        println!(
            "{total:>8} {:>6} {:>8.3} {:>8.3} {:>8.3}",
            group.len(),
            mean(&|p| p.ngni_total),
            mean(&|p| p.ng_total.unwrap_or(f64::NAN)),
            mean(&|p| p.ni_total.unwrap_or(f64::NAN)),
        );
    }
    let p = &scores.persons[0];
    println!("person {}: pattern {:?}, item scores {:.3?}", p.person_id, data.row(0), p.ngni_items);
    Ok(())
}
