//! Pattern probabilities from the FA latent-pattern enumeration and from the
//! IRT curve under Gauss-Hermite quadrature.
//!
//! cargo run --example marginal_equivalence

use irtfa::probability::{marginal_pattern_prob_fa_enum, marginal_pattern_prob_irt};
use irtfa::{FaItem, IrtItem, Link, QuadratureRule, ResponsePattern};

fn main() -> irtfa::Result<()> {
    let items = vec![
        FaItem::new(0.7, -0.4, 0.2, 0.95)?,
        FaItem::new(0.5, 0.3, 0.1, 0.9)?,
        FaItem::new(0.8, 0.6, 0.25, 0.97)?,
    ];
    let irt: Vec<IrtItem> = items.iter().map(FaItem::to_irt).collect::<irtfa::Result<_>>()?;
    let rule = QuadratureRule::default();

    let mut total = 0.0;
    let mut worst: f64 = 0.0;
    println!("pattern          fa          irt");
    for pattern in ResponsePattern::all(items.len()) {
        let fa = marginal_pattern_prob_fa_enum(&pattern, &items, Link::Logistic, &rule)?;
        let ir = marginal_pattern_prob_irt(&pattern, &irt, Link::Logistic, &rule)?;
        println!("{pattern}  {fa:.10}  {ir:.10}");
        total += ir;
        worst = worst.max((fa - ir).abs());
    }
    println!("sum {total:.12}, largest gap {worst:.2e} ({} nodes)", rule.len());

    let fine = QuadratureRule::gauss_hermite(201)?;
    let pattern = ResponsePattern::new(vec![1, 0, 1])?;
    let coarse = marginal_pattern_prob_irt(&pattern, &irt, Link::Logistic, &rule)?;
    let refined = marginal_pattern_prob_irt(&pattern, &irt, Link::Logistic, &fine)?;
    println!("pattern {pattern}: 61 nodes {coarse:.12}, 201 nodes {refined:.12}");
    Ok(())
}
