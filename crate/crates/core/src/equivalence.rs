//! Numerical checks that the factor-analytic and IRT forms describe the same
//! model, plus Monte Carlo checks of the latent-variable construction.
//!
//! Every check returns an [`EquivalenceReport`]; `passed` is exactly
//! `discrepancy <= tolerance`. Monte Carlo checks use a band of four
//! standard errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FaItem, IrtItem, Link, Rescale};
use crate::probability::{
    latent_product_of_sums, latent_sum_of_products, marginal_pattern_prob_fa_enum, marginal_pattern_prob_irt,
    QuadratureRule, ResponsePattern,
};
use crate::sampler::standard_normal;

pub const CONDITIONAL_TOLERANCE: f64 = 1e-12;
pub const MARGINAL_TOLERANCE: f64 = 1e-8;
pub const SUM_PRODUCT_TOLERANCE: f64 = 1e-12;
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-12;
pub const MC_STANDARD_ERRORS: f64 = 4.0;
pub const MAX_MARGINAL_ITEMS: usize = 3;
pub const MIN_LEMMA_SAMPLES: usize = 10_000;
pub const MIN_INDEPENDENCE_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub name: String,
    pub discrepancy: f64,
    pub tolerance: f64,
    #[serde(rename = "pass")]
    pub passed: bool,
    pub sample: String,
}

impl EquivalenceReport {
    pub fn new(name: impl Into<String>, discrepancy: f64, tolerance: f64, sample: impl Into<String>) -> Self {
        EquivalenceReport {
            name: name.into(),
            discrepancy,
            tolerance,
            passed: discrepancy <= tolerance,
            sample: sample.into(),
        }
    }

    /// Worst of several reports of the same check.
    pub fn merge(name: impl Into<String>, reports: &[EquivalenceReport], sample: impl Into<String>) -> Self {
        let worst = reports
            .iter()
            .max_by(|a, b| (a.discrepancy - a.tolerance).total_cmp(&(b.discrepancy - b.tolerance)));
        let mut out = EquivalenceReport::new(
            name,
            worst.map_or(0.0, |r| r.discrepancy),
            worst.map_or(0.0, |r| r.tolerance),
            sample,
        );
        out.passed = reports.iter().all(|r| r.passed);
        out
    }
}

/// `theta` from -6 to 6 in steps of 0.25.
pub fn default_theta_grid() -> Vec<f64> {
    (0..=48).map(|k| -6.0 + 0.25 * k as f64).collect()
}

/// Largest `|P_fa(theta) - P_irt(theta)|` over items and grid, with the IRT
/// curve built from the converted parameters.
pub fn check_conditional_equivalence(items: &[FaItem], link: Link, grid: &[f64]) -> Result<EquivalenceReport> {
    if let Some(t) = grid.iter().find(|t| !t.is_finite()) {
        return Err(Error::Domain(format!("theta grid contains {t}")));
    }
    let mut worst = 0.0f64;
    for item in items {
        let irt = item.to_irt()?;
        for &theta in grid {
            let diff = (item.response_prob(theta, link) - irt.response_prob(theta, link)).abs();
            worst = worst.max(diff);
        }
    }
    Ok(EquivalenceReport::new(
        "conditional_equivalence",
        worst,
        CONDITIONAL_TOLERANCE,
        format!("{} items x {} theta values, {link} link", items.len(), grid.len()),
    ))
}

/// Largest difference over all `2^m` patterns between the latent-enumeration
/// marginal and the IRT quadrature marginal; also checks both sum to one.
pub fn check_marginal_equivalence(items: &[FaItem], link: Link, rule: &QuadratureRule) -> Result<EquivalenceReport> {
    let m = items.len();
    if m > MAX_MARGINAL_ITEMS {
        return Err(Error::EnumerationLimit {
            items: m,
            limit: MAX_MARGINAL_ITEMS,
        });
    }
    let irt = items.iter().map(FaItem::to_irt).collect::<Result<Vec<IrtItem>>>()?;
    let mut worst = 0.0f64;
    let (mut sum_fa, mut sum_irt) = (0.0, 0.0);
    for pattern in ResponsePattern::all(m) {
        let fa = marginal_pattern_prob_fa_enum(&pattern, items, link, rule)?;
        let ir = marginal_pattern_prob_irt(&pattern, &irt, link, rule)?;
        worst = worst.max((fa - ir).abs());
        sum_fa += fa;
        sum_irt += ir;
    }
    let sum_err = (sum_fa - 1.0).abs().max((sum_irt - 1.0).abs());
    let mut report = EquivalenceReport::new(
        "marginal_equivalence",
        worst,
        MARGINAL_TOLERANCE,
        format!("{m} items, {} patterns, {}-node rule, {link} link", 1 << m, rule.len()),
    );
    report.passed &= sum_err <= 1e-10;
    Ok(report)
}

fn standard_error(rng: &mut ChaCha8Rng, link: Link) -> f64 {
    match link {
        Link::NormalOgive => standard_normal(rng),
        Link::Logistic => {
            let p = loop {
                let p: f64 = rng.random();
                if p > 0.0 {
                    break p;
                }
            };
            (p / (1.0 - p)).ln()
        }
    }
}

fn check_mc_size(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParameter(format!("need at least {min} Monte Carlo samples, got {n}")));
    }
    Ok(())
}

/// Binomial band of four standard errors, never narrower than one count.
fn binomial_band(p: f64, n: usize) -> f64 {
    (MC_STANDARD_ERRORS * (p * (1.0 - p) / n as f64).sqrt()).max(1.0 / n as f64)
}

/// Simulate `Y* = alpha theta + u eps` and compare the frequency of
/// `Y* >= tau` with `F((alpha theta - tau) / u)`.
pub fn check_lemma_a1(item: &FaItem, link: Link, theta: f64, n_samples: usize, seed: u64) -> Result<EquivalenceReport> {
    check_mc_size(n_samples, MIN_LEMMA_SAMPLES)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (alpha, tau, u) = (item.alpha(), item.tau(), item.uniqueness());
    let hits = (0..n_samples)
        .filter(|_| alpha * theta + u * standard_error(&mut rng, link) >= tau)
        .count();
    let freq = hits as f64 / n_samples as f64;
    let p = item.latent_prob(theta, link);
    Ok(EquivalenceReport::new(
        "latent_threshold_probability",
        (freq - p).abs(),
        binomial_band(p, n_samples),
        format!("alpha={alpha}, tau={tau}, theta={theta}, n={n_samples}, {link} link"),
    ))
}

/// Sum over all `2^m` latent patterns against the product of per-item sums.
pub fn check_sum_product(
    items: &[FaItem],
    pattern: &ResponsePattern,
    theta: f64,
    link: Link,
) -> Result<EquivalenceReport> {
    let lhs = latent_sum_of_products(pattern, items, theta, link)?;
    let rhs = latent_product_of_sums(pattern, items, theta, link)?;
    Ok(EquivalenceReport::new(
        "sum_product_exchange",
        (lhs - rhs).abs(),
        SUM_PRODUCT_TOLERANCE,
        format!("{} items, pattern {pattern}, theta={theta}, {link} link", items.len()),
    ))
}

fn independence_statistic(
    items: &[FaItem],
    link: Link,
    mut theta: impl FnMut(&mut ChaCha8Rng) -> f64,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if items.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "independence check takes exactly 2 items, got {}",
            items.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut k1, mut k2, mut k12) = (0usize, 0usize, 0usize);
    for _ in 0..n_samples {
        let t = theta(&mut rng);
        let mut above = [false; 2];
        for (flag, it) in above.iter_mut().zip(items) {
            *flag = it.alpha() * t + it.uniqueness() * standard_error(&mut rng, link) >= it.tau();
        }
        k1 += above[0] as usize;
        k2 += above[1] as usize;
        k12 += (above[0] && above[1]) as usize;
    }
    let n = n_samples as f64;
    let (p1, p2, p12) = (k1 as f64 / n, k2 as f64 / n, k12 as f64 / n);
    // variance of p12 - p1 p2 under independence
    let se = (p1 * (1.0 - p1) * p2 * (1.0 - p2) / n).sqrt();
    Ok(((p12 - p1 * p2).abs(), (MC_STANDARD_ERRORS * se).max(1.0 / n)))
}

/// At fixed `theta`, the joint exceedance frequency of two items matches the
/// product of their marginal frequencies.
pub fn check_conditional_independence(
    items: &[FaItem],
    link: Link,
    theta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    check_mc_size(n_samples, MIN_INDEPENDENCE_SAMPLES)?;
    let (disc, tol) = independence_statistic(items, link, |_| theta, n_samples, seed)?;
    Ok(EquivalenceReport::new(
        "conditional_independence",
        disc,
        tol,
        format!("theta={theta}, n={n_samples}, {link} link"),
    ))
}

/// Negative control for [`check_conditional_independence`]: with `theta`
/// drawn per sample the items are dependent, so this should fail whenever
/// both loadings are appreciable.
pub fn check_unconditional_dependence(
    items: &[FaItem],
    link: Link,
    n_samples: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    check_mc_size(n_samples, MIN_INDEPENDENCE_SAMPLES)?;
    let (disc, tol) = independence_statistic(items, link, standard_normal, n_samples, seed)?;
    Ok(EquivalenceReport::new(
        "unconditional_independence_control",
        disc,
        tol,
        format!("theta ~ N(0, 1), n={n_samples}, {link} link"),
    ))
}

fn relative_gap(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(1.0)
}

/// FA -> IRT -> FA, and the metric rescale there and back. Errors are
/// relative to `max(1, |x|)`.
pub fn check_transform_round_trip(items: &[FaItem]) -> Result<EquivalenceReport> {
    let mut worst = 0.0f64;
    for item in items {
        let irt = item.to_irt()?;
        let back = irt.to_fa()?;
        worst = worst
            .max(relative_gap(item.alpha(), back.alpha()))
            .max(relative_gap(item.tau(), back.tau()));
        let there = irt.rescale(Rescale::LogisticToNormal).rescale(Rescale::NormalToLogistic);
        worst = worst
            .max(relative_gap(irt.a(), there.a()))
            .max(relative_gap(irt.b(), there.b()));
    }
    Ok(EquivalenceReport::new(
        "transform_round_trip",
        worst,
        ROUND_TRIP_TOLERANCE,
        format!("{} items", items.len()),
    ))
}

/// Random valid item for fuzzing. Loadings cover (0.01, 0.99); a quarter of
/// items are two-parameter and some sit near the asymptote bounds.
pub fn fuzz_item<R: Rng + ?Sized>(rng: &mut R) -> FaItem {
    let alpha = rng.random_range(0.01..0.99);
    let tau = rng.random_range(-2.5..2.5);
    let (c, d) = match rng.random_range(0..4) {
        0 => (0.0, 1.0),
        1 => (rng.random_range(0.5..0.75), rng.random_range(0.98..1.0)),
        _ => {
            let c = rng.random_range(0.0..0.4);
            (c, rng.random_range(c + 0.2..=1.0))
        }
    };
    FaItem::new(alpha, tau, c, d).expect("fuzz ranges are valid")
}

pub fn fuzz_items<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<FaItem> {
    (0..m).map(|_| fuzz_item(rng)).collect()
}

/// Check families run by [`verify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Conditional,
    Marginal,
    /// Latent threshold probability by simulation.
    LemmaA1,
    /// Exchange of the latent-pattern sum and the item product.
    LemmaA2,
    /// Conditional independence by simulation, plus its negative control.
    LemmaA3,
    RoundTrip,
}

impl CheckKind {
    pub const ALL: [CheckKind; 6] = [
        CheckKind::Conditional,
        CheckKind::Marginal,
        CheckKind::LemmaA1,
        CheckKind::LemmaA2,
        CheckKind::LemmaA3,
        CheckKind::RoundTrip,
    ];
}

impl std::str::FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "conditional" => CheckKind::Conditional,
            "marginal" => CheckKind::Marginal,
            "lemma-a1" => CheckKind::LemmaA1,
            "lemma-a2" => CheckKind::LemmaA2,
            "lemma-a3" => CheckKind::LemmaA3,
            "round-trip" => CheckKind::RoundTrip,
            other => return Err(Error::Config(format!("unknown check '{other}'"))),
        })
    }
}

/// Instance counts derived from one fuzz size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzPlan {
    pub conditional_items: usize,
    pub marginal_instances: usize,
    pub sum_product_instances: usize,
    pub monte_carlo_instances: usize,
    pub monte_carlo_samples: usize,
    pub round_trip_items: usize,
}

impl FuzzPlan {
    /// `n` items for the conditional check, `n / 5` marginal instances,
    /// `n / 2` sum-product instances, `min(n / 20, 50)` Monte Carlo instances
    /// of 10^6 draws and `100 n` round-trip items; at least one of each.
    pub fn scaled(n: usize) -> Self {
        FuzzPlan {
            conditional_items: n.max(1),
            marginal_instances: (n / 5).max(1),
            sum_product_instances: (n / 2).max(1),
            monte_carlo_instances: (n / 20).clamp(1, 50),
            monte_carlo_samples: 1_000_000,
            round_trip_items: (100 * n).max(1),
        }
    }
}

/// Run the selected checks over a fuzzed corpus drawn from `seed`, for both
/// links. Each check family yields one merged report per link.
pub fn verify(checks: &[CheckKind], plan: FuzzPlan, seed: u64) -> Result<Vec<EquivalenceReport>> {
    let rule = QuadratureRule::default();
    let grid = default_theta_grid();
    let mut out = Vec::new();
    for (li, link) in [Link::Logistic, Link::NormalOgive].into_iter().enumerate() {
        for &check in checks {
            // every (link, check) pair gets its own stream so selections do
            // not shift each other's corpus
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let kind = CheckKind::ALL.iter().position(|&c| c == check).expect("every kind is listed");
            rng.set_stream((li * CheckKind::ALL.len() + kind) as u64);
            match check {
                CheckKind::Conditional => {
                    let items = fuzz_items(&mut rng, plan.conditional_items);
                    out.push(check_conditional_equivalence(&items, link, &grid)?);
                }
                CheckKind::Marginal => {
                    let reports = (0..plan.marginal_instances)
                        .map(|k| check_marginal_equivalence(&fuzz_items(&mut rng, 1 + k % MAX_MARGINAL_ITEMS), link, &rule))
                        .collect::<Result<Vec<_>>>()?;
                    out.push(EquivalenceReport::merge(
                        "marginal_equivalence",
                        &reports,
                        format!("{} instances, m in 1..=3, {}-node rule, {link} link", reports.len(), rule.len()),
                    ));
                }
                CheckKind::LemmaA2 => {
                    let mut reports = Vec::with_capacity(plan.sum_product_instances);
                    for _ in 0..plan.sum_product_instances {
                        let m = rng.random_range(1..=8);
                        let items = fuzz_items(&mut rng, m);
                        let pattern = ResponsePattern::from_index(rng.random_range(0..1usize << m), m);
                        reports.push(check_sum_product(&items, &pattern, rng.random_range(-4.0..4.0), link)?);
                    }
                    out.push(EquivalenceReport::merge(
                        "sum_product_exchange",
                        &reports,
                        format!("{} instances, m in 1..=8, {link} link", reports.len()),
                    ));
                }
                CheckKind::LemmaA1 => {
                    let mut reports = Vec::with_capacity(plan.monte_carlo_instances);
                    for _ in 0..plan.monte_carlo_instances {
                        let item = fuzz_item(&mut rng);
                        let theta = rng.random_range(-3.0..3.0);
                        reports.push(check_lemma_a1(&item, link, theta, plan.monte_carlo_samples, rng.random())?);
                    }
                    out.push(EquivalenceReport::merge(
                        "latent_threshold_probability",
                        &reports,
                        format!("{} instances, n={}, {link} link", reports.len(), plan.monte_carlo_samples),
                    ));
                }
                CheckKind::LemmaA3 => {
                    let mut reports = Vec::with_capacity(plan.monte_carlo_instances);
                    for _ in 0..plan.monte_carlo_instances {
                        let items = fuzz_items(&mut rng, 2);
                        let theta = rng.random_range(-2.0..2.0);
                        reports.push(check_conditional_independence(&items, link, theta, plan.monte_carlo_samples, rng.random())?);
                    }
                    out.push(EquivalenceReport::merge(
                        "conditional_independence",
                        &reports,
                        format!("{} instances, n={}, {link} link", reports.len(), plan.monte_carlo_samples),
                    ));
                    let strong = [FaItem::two_param(0.8, 0.0)?, FaItem::two_param(0.7, 0.3)?];
                    let control = check_unconditional_dependence(&strong, link, plan.monte_carlo_samples, rng.random())?;
                    out.push(negative_control(&control));
                }
                CheckKind::RoundTrip => {
                    let items = fuzz_items(&mut rng, plan.round_trip_items);
                    let mut report = check_transform_round_trip(&items)?;
                    report.sample = format!("{}, {link} corpus", report.sample);
                    out.push(report);
                }
            }
        }
    }
    Ok(out)
}

/// Turn a dependence check that is expected to fail into a report that
/// passes when it does: the band is the discrepancy and the observed
/// dependence is the tolerance.
pub fn negative_control(report: &EquivalenceReport) -> EquivalenceReport {
    EquivalenceReport::new(
        "independence_negative_control",
        report.tolerance,
        report.discrepancy,
        format!("{}; passes when the observed dependence exceeds the band", report.sample),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_item_conditional() {
        let item = FaItem::new(0.7, 0.3, 0.2, 0.9).unwrap();
        for link in [Link::Logistic, Link::NormalOgive] {
            let r = check_conditional_equivalence(&[item], link, &default_theta_grid()).unwrap();
            assert!(r.passed, "{r:?}");
        }
        assert!(check_conditional_equivalence(&[item], Link::Logistic, &[f64::NAN]).is_err());
    }

    #[test]
    fn symmetric_single_item_marginal_is_half() {
        let item = FaItem::two_param(0.5, 0.0).unwrap();
        let rule = QuadratureRule::default();
        let one = ResponsePattern::new(vec![1]).unwrap();
        for link in [Link::Logistic, Link::NormalOgive] {
            let p = marginal_pattern_prob_fa_enum(&one, &[item], link, &rule).unwrap();
            assert!((p - 0.5).abs() < 1e-14);
            assert!(check_marginal_equivalence(&[item], link, &rule).unwrap().passed);
        }
    }

    #[test]
    fn boundary_ish_marginal() {
        let items = vec![
            FaItem::new(0.95, 0.0, 0.7, 0.99).unwrap(),
            FaItem::new(0.6, -0.4, 0.7, 0.99).unwrap(),
            FaItem::new(0.3, 1.0, 0.1, 0.9).unwrap(),
        ];
        for link in [Link::Logistic, Link::NormalOgive] {
            let r = check_marginal_equivalence(&items, link, &QuadratureRule::default()).unwrap();
            assert!(r.passed, "{r:?}");
        }
        let four = vec![items[0]; 4];
        assert!(check_marginal_equivalence(&four, Link::Logistic, &QuadratureRule::default()).is_err());
    }

    #[test]
    fn lemma_at_zero_argument_is_half() {
        let item = FaItem::two_param(0.6, 0.3).unwrap();
        let theta = 0.3 / 0.6;
        for link in [Link::Logistic, Link::NormalOgive] {
            assert!((item.latent_prob(theta, link) - 0.5).abs() < 1e-15);
            let r = check_lemma_a1(&item, link, theta, 200_000, 1).unwrap();
            assert!(r.passed, "{r:?}");
        }
        assert!(check_lemma_a1(&item, Link::Logistic, 0.0, 100, 1).is_err());
    }

    #[test]
    fn sum_product_two_items_by_hand() {
        let items = [FaItem::new(0.5, 0.2, 0.1, 1.0).unwrap(), FaItem::new(0.3, -0.1, 0.25, 1.0).unwrap()];
        let zeros = ResponsePattern::new(vec![0, 0]).unwrap();
        let theta = 0.4;
        let link = Link::NormalOgive;
        // with d = 1, Y = 0 forces Z = 0
        let want: f64 = items
            .iter()
            .map(|it| (1.0 - it.c()) * (1.0 - it.latent_prob(theta, link)))
            .product();
        let lhs = latent_sum_of_products(&zeros, &items, theta, link).unwrap();
        assert!((lhs - want).abs() < 1e-15);
        assert!(check_sum_product(&items, &zeros, theta, link).unwrap().passed);
    }

    #[test]
    fn independence_holds_conditionally_and_fails_unconditionally() {
        let items = [FaItem::two_param(0.8, 0.2).unwrap(), FaItem::two_param(0.7, -0.3).unwrap()];
        for link in [Link::Logistic, Link::NormalOgive] {
            assert!(check_conditional_independence(&items, link, 0.0, 200_000, 3).unwrap().passed);
            assert!(!check_unconditional_dependence(&items, link, 200_000, 4).unwrap().passed);
        }
        let flat = [FaItem::two_param(1e-9, 0.0).unwrap(); 2];
        assert!(check_conditional_independence(&flat, Link::Logistic, 1.5, 100_000, 5).unwrap().passed);
        assert!(check_conditional_independence(&items[..1], Link::Logistic, 0.0, 100_000, 5).is_err());
    }

    #[test]
    fn round_trip_on_fuzzed_items() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let items = fuzz_items(&mut rng, 10_000);
        let r = check_transform_round_trip(&items).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn report_pass_flag_tracks_tolerance() {
        assert!(EquivalenceReport::new("x", 1e-13, 1e-12, "").passed);
        assert!(!EquivalenceReport::new("x", 2e-12, 1e-12, "").passed);
        let merged = EquivalenceReport::merge(
            "m",
            &[EquivalenceReport::new("a", 0.0, 1.0, ""), EquivalenceReport::new("b", 3.0, 1.0, "")],
            "",
        );
        assert!(!merged.passed);
        assert_eq!(merged.discrepancy, 3.0);
    }
}
