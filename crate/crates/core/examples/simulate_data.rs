//! Simulate a 4PL dataset and compare observed pattern frequencies with the
//! model's marginal pattern probabilities.
//!
//! cargo run --release --example simulate_data

use irtfa::probability::marginal_pattern_prob_fa_enum;
use irtfa::simulate::{empirical_pattern_freq, simulate};
use irtfa::{FaItem, Link, QuadratureRule};

fn main() -> irtfa::Result<()> {
    let items = vec![FaItem::new(0.6, 0.0, 0.2, 0.9)?, FaItem::new(0.75, 0.5, 0.1, 0.95)?];
    let n = 200_000;
    let sim = simulate(&items, n, Link::Logistic, 17)?;

    let guessed = (0..n).filter(|&p| sim.z(p, 0) == 0 && sim.responses.get(p, 0) == 1).count();
    let slipped = (0..n).filter(|&p| sim.z(p, 0) == 1 && sim.responses.get(p, 0) == 0).count();
    println!("item 1: {guessed} lucky guesses, {slipped} slips out of {n} persons");

    let counts = empirical_pattern_freq(&sim)?;
    let rule = QuadratureRule::default();
    for (pattern, freq) in counts.observed() {
        let p = marginal_pattern_prob_fa_enum(&pattern, &items, Link::Logistic, &rule)?;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        println!("{pattern}: observed {freq:.5}, model {p:.5}, z {:+.2}", (freq - p) / se);
    }
    Ok(())
}
