//! Generative sampling from the four-parameter factor-analytic model with
//! every latent quantity kept.
//!
//! Random streams: the master seed fixes a ChaCha8 key and each
//! `(person, slot)` pair gets its own stream `person * (m + 1) + slot`.
//! Slot 0 draws theta; slot `i + 1` draws item `i`'s error and then its
//! mixture coin. A dataset is therefore identical on every platform and
//! independent of thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::ResponseMatrix;
use crate::error::{Error, Result};
use crate::model::{FaItem, Link, Variant};
use crate::probability::{ResponsePattern, MAX_ENUMERATION_ITEMS};
use crate::sampler::{sample_loading_prior, standard_normal};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulatedDataset {
    #[serde(skip)]
    pub responses: ResponseMatrix,
    pub true_theta: Vec<f64>,
    /// Persons in rows.
    pub true_z: Vec<u8>,
    /// Persons in rows.
    pub true_ystar: Vec<f64>,
    pub true_items: Vec<FaItem>,
    pub link: Link,
    pub seed: u64,
}

impl SimulatedDataset {
    pub fn n_persons(&self) -> usize {
        self.true_theta.len()
    }

    pub fn n_items(&self) -> usize {
        self.true_items.len()
    }

    pub fn z(&self, person: usize, item: usize) -> u8 {
        self.true_z[person * self.n_items() + item]
    }

    pub fn ystar(&self, person: usize, item: usize) -> f64 {
        self.true_ystar[person * self.n_items() + item]
    }
}

/// Standard error draw for `link`, scaled by `u`. Logistic errors use the
/// inverse CDF of the standard logistic.
fn latent_error(rng: &mut ChaCha8Rng, link: Link, u: f64) -> f64 {
    match link {
        Link::NormalOgive => u * standard_normal(rng),
        Link::Logistic => {
            // open interval (0, 1)
            let p = loop {
                let p: f64 = rng.random();
                if p > 0.0 {
                    break p;
                }
            };
            u * (p / (1.0 - p)).ln()
        }
    }
}

/// Draw `n` persons: `theta ~ N(0, 1)`, `Y* = alpha theta + eps`,
/// `Z = [Y* >= tau]`, then `Y ~ Bernoulli(d)` if `Z = 1` else
/// `Bernoulli(c)`.
pub fn simulate(items: &[FaItem], n: usize, link: Link, seed: u64) -> Result<SimulatedDataset> {
    let m = items.len();
    if n == 0 {
        return Err(Error::InvalidParameter("simulate needs at least one person".into()));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("simulate needs at least one item".into()));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let stream = |p: usize, slot: usize| {
        let mut rng = base.clone();
        rng.set_stream((p * (m + 1) + slot) as u64);
        rng
    };
    // per person: theta and (ystar, z, y) per item
    type Row = (f64, Vec<(f64, u8, u8)>);
    let rows: Vec<Row> = (0..n)
        .into_par_iter()
        .map(|p| {
            let theta = standard_normal(&mut stream(p, 0));
            let cells = items
                .iter()
                .enumerate()
                .map(|(i, it)| {
                    let mut rng = stream(p, i + 1);
                    let ystar = it.alpha() * theta + latent_error(&mut rng, link, it.uniqueness());
                    let z = (ystar >= it.tau()) as u8;
                    let coin: f64 = rng.random();
                    let y = if z == 1 { coin < it.d() } else { coin < it.c() } as u8;
                    (ystar, z, y)
                })
                .collect();
            (theta, cells)
        })
        .collect();

    let mut true_theta = Vec::with_capacity(n);
    let mut true_ystar = Vec::with_capacity(n * m);
    let mut true_z = Vec::with_capacity(n * m);
    let mut values = Vec::with_capacity(n * m);
    for (theta, cells) in rows {
        true_theta.push(theta);
        for (ystar, z, y) in cells {
            true_ystar.push(ystar);
            true_z.push(z);
            values.push(y);
        }
    }
    let responses = ResponseMatrix::from_values(
        n,
        values,
        ResponseMatrix::default_item_ids(m),
        ResponseMatrix::default_person_ids(n),
    )?;
    Ok(SimulatedDataset {
        responses,
        true_theta,
        true_z,
        true_ystar,
        true_items: items.to_vec(),
        link,
        seed,
    })
}

/// Item parameters drawn from the model priors: `tau ~ N(0, 1)`,
/// `alpha ~ N(0.25, 1)` truncated to (0, 1), `c ~ U(0, 1)`, `d ~ U(c, 1)`.
/// Asymptotes the variant does not estimate are pinned at 0 and 1.
pub fn prior_items(m: usize, variant: Variant, seed: u64) -> Result<Vec<FaItem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            let alpha = sample_loading_prior(&mut rng);
            let tau = standard_normal(&mut rng);
            let c = if variant.estimates_guessing() {
                rng.random::<f64>()
            } else {
                0.0
            };
            let d = if variant.estimates_inattention() {
                c + (1.0 - c) * (1.0 - rng.random::<f64>())
            } else {
                1.0
            };
            FaItem::new(alpha, tau, c, d)
        })
        .collect()
}

/// Counts of each of the `2^m` observed patterns, indexed as in
/// [`ResponsePattern::index`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternCounts {
    pub n_items: usize,
    pub total: u64,
    pub counts: Vec<u64>,
}

impl PatternCounts {
    pub fn count(&self, pattern: &ResponsePattern) -> u64 {
        self.counts[pattern.index()]
    }

    pub fn frequency(&self, pattern: &ResponsePattern) -> f64 {
        self.count(pattern) as f64 / self.total as f64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&k| k as f64 / self.total as f64).collect()
    }

    /// Patterns seen at least once, with their frequency.
    pub fn observed(&self) -> impl Iterator<Item = (ResponsePattern, f64)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &k)| k > 0).map(|(idx, &k)| {
            (
                ResponsePattern::from_index(idx, self.n_items),
                k as f64 / self.total as f64,
            )
        })
    }
}

pub fn empirical_pattern_freq(dataset: &SimulatedDataset) -> Result<PatternCounts> {
    pattern_counts(&dataset.responses)
}

pub fn pattern_counts(data: &ResponseMatrix) -> Result<PatternCounts> {
    let m = data.n_items();
    if m > MAX_ENUMERATION_ITEMS {
        return Err(Error::EnumerationLimit {
            items: m,
            limit: MAX_ENUMERATION_ITEMS,
        });
    }
    let mut counts = vec![0u64; 1 << m];
    for p in 0..data.n_persons() {
        let idx = data
            .row(p)
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &y)| acc | ((y as usize) << i));
        counts[idx] += 1;
    }
    Ok(PatternCounts {
        n_items: m,
        total: data.n_persons() as u64,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{marginal_pattern_prob_fa_enum, QuadratureRule};

    fn items() -> Vec<FaItem> {
        vec![
            FaItem::new(0.6, 0.2, 0.15, 0.9).unwrap(),
            FaItem::new(0.4, -0.7, 0.25, 0.95).unwrap(),
            FaItem::new(0.8, 0.9, 0.0, 1.0).unwrap(),
        ]
    }

    #[test]
    fn latent_consistency_holds() {
        for link in [Link::Logistic, Link::NormalOgive] {
            let sim = simulate(&items(), 3000, link, 5).unwrap();
            for p in 0..sim.n_persons() {
                for (i, it) in sim.true_items.iter().enumerate() {
                    assert_eq!(sim.z(p, i) == 1, sim.ystar(p, i) >= it.tau());
                    let y = sim.responses.get(p, i);
                    if it.c() == 0.0 && y == 1 {
                        assert_eq!(sim.z(p, i), 1);
                    }
                    if it.d() == 1.0 && y == 0 {
                        assert_eq!(sim.z(p, i), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_mixture_copies_latents() {
        let two_p = vec![FaItem::two_param(0.5, 0.1).unwrap(), FaItem::two_param(0.7, -0.4).unwrap()];
        let sim = simulate(&two_p, 500, Link::Logistic, 9).unwrap();
        assert_eq!(sim.responses.values(), sim.true_z.as_slice());
    }

    #[test]
    fn seeded_runs_repeat() {
        let a = simulate(&items(), 200, Link::NormalOgive, 42).unwrap();
        let b = simulate(&items(), 200, Link::NormalOgive, 42).unwrap();
        let c = simulate(&items(), 200, Link::NormalOgive, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.true_theta, c.true_theta);
    }

    #[test]
    fn symmetric_threshold_gives_half() {
        let flat = vec![FaItem::new(1e-9, 0.0, 0.0, 1.0).unwrap(); 2];
        let n = 100_000;
        for link in [Link::Logistic, Link::NormalOgive] {
            let sim = simulate(&flat, n, link, 3).unwrap();
            let se = (0.25 / n as f64).sqrt();
            for i in 0..2 {
                let mean = (0..n).map(|p| sim.z(p, i) as f64).sum::<f64>() / n as f64;
                assert!((mean - 0.5).abs() <= 4.0 * se, "{mean}");
            }
        }
    }

    #[test]
    fn theta_and_errors_have_model_moments() {
        let one = vec![FaItem::new(0.6, 0.0, 0.0, 1.0).unwrap()];
        let n = 200_000;
        for link in [Link::Logistic, Link::NormalOgive] {
            let sim = simulate(&one, n, link, 21).unwrap();
            let mean_t = sim.true_theta.iter().sum::<f64>() / n as f64;
            let var_t = sim.true_theta.iter().map(|t| t * t).sum::<f64>() / n as f64;
            assert!(mean_t.abs() < 0.01 && (var_t - 1.0).abs() < 0.02);
            let resid: Vec<f64> = (0..n).map(|p| sim.ystar(p, 0) - 0.6 * sim.true_theta[p]).collect();
            let var_e = resid.iter().map(|e| e * e).sum::<f64>() / n as f64;
            let unit = match link {
                Link::NormalOgive => 1.0,
                Link::Logistic => std::f64::consts::PI.powi(2) / 3.0,
            };
            let want = 0.64 * unit;
            assert!((var_e - want).abs() / want < 0.02, "{link}: {var_e} vs {want}");
        }
    }

    #[test]
    fn pattern_frequencies_match_enumerated_marginals() {
        let two = items()[..2].to_vec();
        let n = 1_000_000;
        let rule = QuadratureRule::default();
        for link in [Link::Logistic, Link::NormalOgive] {
            let sim = simulate(&two, n, link, 77).unwrap();
            let counts = empirical_pattern_freq(&sim).unwrap();
            assert_eq!(counts.counts.iter().sum::<u64>(), n as u64);
            for pat in ResponsePattern::all(2) {
                let p = marginal_pattern_prob_fa_enum(&pat, &two, link, &rule).unwrap();
                let se = (p * (1.0 - p) / n as f64).sqrt();
                let freq = counts.frequency(&pat);
                assert!((freq - p).abs() <= 4.0 * se, "{link} {pat}: {freq} vs {p}");
            }
        }
    }

    #[test]
    fn fair_coin_patterns_are_uniform() {
        let flat = vec![FaItem::new(1e-9, 0.0, 0.0, 1.0).unwrap(); 2];
        let n = 1_000_000;
        let sim = simulate(&flat, n, Link::NormalOgive, 8).unwrap();
        let freqs = empirical_pattern_freq(&sim).unwrap().frequencies();
        let se = (0.25 * 0.75 / n as f64).sqrt();
        for f in &freqs {
            assert!((f - 0.25).abs() <= 4.0 * se, "{f}");
        }
        assert!((freqs.iter().sum::<f64>() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn single_person_has_one_pattern() {
        let sim = simulate(&items(), 1, Link::Logistic, 1).unwrap();
        let counts = empirical_pattern_freq(&sim).unwrap();
        let seen: Vec<_> = counts.observed().collect();
        assert_eq!(seen.len(), 1);
        assert_eq!(seen[0].1, 1.0);
    }

    #[test]
    fn prior_items_respect_variant() {
        let four = prior_items(50, Variant::FourP, 4).unwrap();
        assert!(four.iter().any(|it| it.c() > 0.0 && it.d() < 1.0));
        let three = prior_items(50, Variant::ThreeP, 4).unwrap();
        assert!(three.iter().all(|it| it.d() == 1.0));
        let ni = prior_items(50, Variant::NiOnly, 4).unwrap();
        assert!(ni.iter().all(|it| it.c() == 0.0));
        assert_eq!(prior_items(5, Variant::FourP, 4).unwrap(), four[..5].to_vec());
    }

    #[test]
    fn too_many_items_to_enumerate() {
        let many = vec![FaItem::two_param(0.5, 0.0).unwrap(); 13];
        let sim = simulate(&many, 10, Link::Logistic, 1).unwrap();
        assert!(matches!(empirical_pattern_freq(&sim), Err(Error::EnumerationLimit { .. })));
    }
}
