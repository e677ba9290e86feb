//! Response-pattern likelihoods, marginal probabilities by Gauss-Hermite
//! quadrature over a standard normal trait, and the latent-pattern forms used
//! by the sampler and the equivalence checks.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FaItem, IrtItem, Link};

/// Production quadrature size.
pub const DEFAULT_QUADRATURE_NODES: usize = 61;
pub const MAX_QUADRATURE_NODES: usize = 512;
/// Latent-pattern enumeration visits `2^m` terms.
pub const MAX_ENUMERATION_ITEMS: usize = 12;
/// Above this many items, pattern probabilities are accumulated in logs.
pub const LOG_DOMAIN_ITEMS: usize = 30;

/// Probabilists' Gauss-Hermite rule: `sum_k w_k g(x_k)` approximates
/// `E[g(theta)]` for `theta ~ N(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn gauss_hermite(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUADRATURE_NODES {
            return Err(Error::Config(format!(
                "quadrature size must be in 1..={MAX_QUADRATURE_NODES}, got {n}"
            )));
        }
        let (nodes, weights) = probabilists_gauss_hermite(n);
        Ok(QuadratureRule { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `E[g(theta)]` under the rule.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule::gauss_hermite(DEFAULT_QUADRATURE_NODES).expect("default size is valid")
    }
}

// Nodes are the eigenvalues of the Jacobi matrix (zero diagonal, off-diagonal
// sqrt(k)), isolated by Sturm-sequence bisection and polished by Newton on the
// orthonormal Hermite polynomial. Weights come from the Christoffel sum.
fn probabilists_gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    // number of eigenvalues strictly below `lambda`
    let count_below = |lambda: f64| {
        let mut count = 0;
        let mut d = -lambda;
        for k in 1..=n {
            if k > 1 {
                d = -lambda - (k - 1) as f64 / d;
            }
            if d == 0.0 {
                d = -f64::EPSILON * (1.0 + lambda.abs());
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    // orthonormal q_{n-1}(x), q_n(x) and the Christoffel sum over q_0..q_{n-1}
    let eval = |x: f64| {
        let (mut prev, mut cur, mut christoffel) = (0.0, 1.0, 0.0);
        for k in 0..n {
            christoffel += cur * cur;
            let kf = k as f64;
            let next = (x * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
            prev = cur;
            cur = next;
        }
        (prev, cur, christoffel)
    };
    let bound = 2.0 * (n as f64).sqrt() + 1.0;
    let mut nodes = vec![0.0; n];
    // lower half only; the odd middle node stays at zero
    for (k, node) in nodes.iter_mut().enumerate().take(n / 2) {
        let (mut lo, mut hi) = (-bound, 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..3 {
            let (q_prev, q_n, _) = eval(x);
            let step = q_n / ((n as f64).sqrt() * q_prev);
            if step.is_finite() {
                x -= step;
            }
        }
        *node = x;
    }
    for k in 0..n / 2 {
        nodes[n - 1 - k] = -nodes[k];
    }
    let weights = nodes.iter().map(|&x| 1.0 / eval(x).2).collect();
    (nodes, weights)
}

/// A binary response vector over `m` items.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ResponsePattern(Vec<u8>);

impl ResponsePattern {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Data(format!("pattern entries must be 0 or 1, got {bad}")));
        }
        Ok(ResponsePattern(bits))
    }

    /// Pattern whose item `i` is bit `i` of `index`.
    pub fn from_index(index: usize, m: usize) -> Self {
        ResponsePattern((0..m).map(|i| ((index >> i) & 1) as u8).collect())
    }

    pub fn index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as usize) << i))
    }

    /// All `2^m` patterns in index order.
    pub fn all(m: usize) -> impl Iterator<Item = ResponsePattern> {
        (0..1usize << m).map(move |k| ResponsePattern::from_index(k, m))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&b| b as usize).sum()
    }
}

impl fmt::Display for ResponsePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

fn check_len(pattern: &ResponsePattern, m: usize) -> Result<()> {
    if pattern.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: pattern.len(),
        });
    }
    Ok(())
}

/// `prod_i P_i^{y_i} (1 - P_i)^{1 - y_i}` with `P_i` the IRT response curve.
pub fn pattern_prob_given_theta(
    pattern: &ResponsePattern,
    items: &[IrtItem],
    theta: f64,
    link: Link,
) -> Result<f64> {
    check_len(pattern, items.len())?;
    Ok(pattern_prob_unchecked(pattern.bits(), items, theta, link))
}

fn pattern_prob_unchecked(bits: &[u8], items: &[IrtItem], theta: f64, link: Link) -> f64 {
    let term = |(&y, item): (&u8, &IrtItem)| {
        let p = item.response_prob(theta, link);
        if y == 1 {
            p
        } else {
            1.0 - p
        }
    };
    if items.len() > LOG_DOMAIN_ITEMS {
        bits.iter().zip(items).map(|t| term(t).ln()).sum::<f64>().exp()
    } else {
        bits.iter().zip(items).map(term).product()
    }
}

/// Marginal pattern probability under the IRT parameterization, integrating
/// the trait out with `rule`.
pub fn marginal_pattern_prob_irt(
    pattern: &ResponsePattern,
    items: &[IrtItem],
    link: Link,
    rule: &QuadratureRule,
) -> Result<f64> {
    check_len(pattern, items.len())?;
    Ok(rule.expect(|theta| pattern_prob_unchecked(pattern.bits(), items, theta, link)))
}

/// `P(Y = y | Z = z)` for one item.
#[inline]
pub fn prob_y_given_z(y: u8, z: u8, c: f64, d: f64) -> f64 {
    match (z, y) {
        (0, 0) => 1.0 - c,
        (0, _) => c,
        (_, 0) => 1.0 - d,
        _ => d,
    }
}

fn check_enumerable(m: usize) -> Result<()> {
    if m > MAX_ENUMERATION_ITEMS {
        return Err(Error::EnumerationLimit {
            items: m,
            limit: MAX_ENUMERATION_ITEMS,
        });
    }
    Ok(())
}

/// Marginal pattern probability under the FA parameterization, summing over
/// every latent pattern `z`:
///
/// `sum_z prod_i P(y_i | z_i) * E[ prod_i F(x_i)^{z_i} (1 - F(x_i))^{1 - z_i} ]`
///
/// with `x_i = (alpha_i theta - tau_i) / u_i`. No IRT quantity is used.
pub fn marginal_pattern_prob_fa_enum(
    pattern: &ResponsePattern,
    items: &[FaItem],
    link: Link,
    rule: &QuadratureRule,
) -> Result<f64> {
    let m = items.len();
    check_len(pattern, m)?;
    check_enumerable(m)?;
    // above[k][i] = P(Z_i = 1 | node k), below[k][i] = P(Z_i = 0 | node k)
    let (above, below): (Vec<Vec<f64>>, Vec<Vec<f64>>) = rule
        .nodes()
        .iter()
        .map(|&theta| {
            items
                .iter()
                .map(|it| {
                    let x = it.latent_arg(theta);
                    (link.cdf(x), link.cdf(-x))
                })
                .unzip()
        })
        .unzip();
    let y = pattern.bits();
    let mut total = 0.0;
    for z in ResponsePattern::all(m) {
        let z = z.bits();
        let mixing: f64 = items
            .iter()
            .enumerate()
            .map(|(i, it)| prob_y_given_z(y[i], z[i], it.c(), it.d()))
            .product();
        let latent: f64 = rule
            .weights()
            .iter()
            .enumerate()
            .map(|(k, w)| {
                w * (0..m)
                    .map(|i| if z[i] == 1 { above[k][i] } else { below[k][i] })
                    .product::<f64>()
            })
            .sum();
        total += mixing * latent;
    }
    Ok(total)
}

/// Conditional pattern probability at fixed `theta` as a `2^m`-term sum over
/// latent patterns of products of per-item terms.
pub fn latent_sum_of_products(
    pattern: &ResponsePattern,
    items: &[FaItem],
    theta: f64,
    link: Link,
) -> Result<f64> {
    let m = items.len();
    check_len(pattern, m)?;
    check_enumerable(m)?;
    let y = pattern.bits();
    let f: Vec<(f64, f64)> = items
        .iter()
        .map(|it| {
            let x = it.latent_arg(theta);
            (link.cdf(x), link.cdf(-x))
        })
        .collect();
    Ok(ResponsePattern::all(m)
        .map(|z| {
            z.bits()
                .iter()
                .enumerate()
                .map(|(i, &zi)| {
                    let it = &items[i];
                    let latent = if zi == 1 { f[i].0 } else { f[i].1 };
                    prob_y_given_z(y[i], zi, it.c(), it.d()) * latent
                })
                .product::<f64>()
        })
        .sum())
}

/// The same quantity as [`latent_sum_of_products`], computed as an `m`-term
/// product of two-term sums.
pub fn latent_product_of_sums(
    pattern: &ResponsePattern,
    items: &[FaItem],
    theta: f64,
    link: Link,
) -> Result<f64> {
    check_len(pattern, items.len())?;
    Ok(pattern
        .bits()
        .iter()
        .zip(items)
        .map(|(&y, it)| {
            let x = it.latent_arg(theta);
            prob_y_given_z(y, 0, it.c(), it.d()) * link.cdf(-x)
                + prob_y_given_z(y, 1, it.c(), it.d()) * link.cdf(x)
        })
        .product())
}

/// `P(Z = 1 | Y = y, theta)` given `f = P(Z = 1 | theta)`.
pub fn z_posterior_prob(y: u8, f: f64, c: f64, d: f64) -> Result<f64> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::Domain(format!("latent probability must lie in (0, 1), got {f}")));
    }
    if !(0.0 <= c && c < d && d <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "asymptotes must satisfy 0 <= c < d <= 1, got c = {c}, d = {d}"
        )));
    }
    let one = prob_y_given_z(y, 1, c, d) * f;
    let zero = prob_y_given_z(y, 0, c, d) * (1.0 - f);
    if one + zero == 0.0 {
        return Err(Error::DegeneratePosterior);
    }
    Ok(one / (one + zero))
}

/// Log-odds form of [`z_posterior_prob`], stable when `F(x)` is within
/// rounding of 0 or 1. `latent_log_odds` is `ln F(x) - ln(1 - F(x))`.
#[inline]
pub(crate) fn z_posterior_from_log_odds(y: u8, latent_log_odds: f64, c: f64, d: f64) -> Result<f64> {
    let l1 = prob_y_given_z(y, 1, c, d).ln();
    let l0 = prob_y_given_z(y, 0, c, d).ln();
    if l1 == f64::NEG_INFINITY && l0 == f64::NEG_INFINITY {
        return Err(Error::DegeneratePosterior);
    }
    if l0 == f64::NEG_INFINITY {
        return Ok(1.0);
    }
    if l1 == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let t = l1 - l0 + latent_log_odds;
    Ok(if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    })
}
