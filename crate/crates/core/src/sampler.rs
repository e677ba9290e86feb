//! Metropolis-within-Gibbs sampler for the hierarchical factor-analytic
//! model with guessing and inattention asymptotes.
//!
//! ```text
//! theta_p            ~ N(0, 1)
//! Z_pi | theta_p     ~ Bernoulli(F((alpha_i theta_p - tau_i) / u_i))
//! Y_pi | Z_pi        ~ Bernoulli(d_i^Z c_i^(1 - Z))
//! tau_i ~ N(0, 1),   alpha_i ~ N(0.25, 1) truncated to (0, 1)
//! c_i ~ U(0, 1),     d_i | c_i ~ U(c_i, 1)
//! ```
//!
//! Two scans share the same stationary distribution.
//!
//! [`Scan::Augmented`] is plain data augmentation:
//!
//! 1. every `Z_pi` exactly from its Bernoulli full conditional;
//! 2. every `theta_p` by a Gaussian random-walk Metropolis step;
//! 3. every `alpha_i` and then `tau_i` by random-walk Metropolis;
//! 4. every estimated `c_i` and then `d_i` by slice sampling their exact
//!    full conditionals given `Z`.
//!
//! [`Scan::Collapsed`] (the default) runs steps 2 to 4 against the observed
//! likelihood `c + (d - c) F(x)` with `Z` summed out, and draws `Z` last so the
//! retained latent responses come from the joint posterior. With `n` in the
//! thousands the augmented scan couples `Z` to every other block and mixes
//! several times slower.
//!
//! Random-walk step sizes adapt toward the target acceptance rate during
//! burn-in (Robbins-Monro on the log step) and are frozen afterwards, so the
//! retained phase is a fixed Markov kernel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::data::ResponseMatrix;
use crate::diagnostics::{median, DiagnosticsReport, ParameterTrace};
use crate::error::{Error, Result};
use crate::model::{uniqueness, FaItem, IrtItem, Link, ModelSpec, Variant};
use crate::probability::z_posterior_from_log_odds;

pub const DEFAULT_BURNIN: usize = 4000;
pub const DEFAULT_SAMPLES: usize = 4000;
pub const DEFAULT_CHAINS: usize = 2;
pub const DEFAULT_TARGET_ACCEPTANCE: f64 = 0.44;

/// Prior on the loading: normal with this mean and sd, truncated to (0, 1).
pub const LOADING_PRIOR_MEAN: f64 = 0.25;
pub const LOADING_PRIOR_SD: f64 = 1.0;

const INIT_THETA_STEP: f64 = 1.0;
const INIT_ALPHA_STEP: f64 = 0.05;
const INIT_TAU_STEP: f64 = 0.1;
const MIN_STEP: f64 = 1e-5;
const MAX_STEP: f64 = 10.0;

/// How the trait, loading and threshold steps treat the latent responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scan {
    /// Condition on the current `Z`; the plain data-augmentation scan.
    Augmented,
    /// Integrate `Z` out of those steps and redraw it just before the
    /// asymptote step, the only step that conditions on it. Same stationary
    /// distribution, much weaker coupling between `Z` and the other blocks.
    #[default]
    Collapsed,
}

impl std::str::FromStr for Scan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "augmented" => Ok(Scan::Augmented),
            "collapsed" => Ok(Scan::Collapsed),
            _ => Err(Error::Config(format!("unknown scan '{s}', expected augmented or collapsed"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub chains: usize,
    pub burnin: usize,
    /// Post-burn-in iterations per chain; `samples / thin` draws are kept.
    pub samples: usize,
    pub thin: usize,
    pub seed: u64,
    pub model: ModelSpec,
    pub target_acceptance: f64,
    pub scan: Scan,
    /// Keep every retained theta draw, not just the running mean.
    pub keep_theta_traces: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            chains: DEFAULT_CHAINS,
            burnin: DEFAULT_BURNIN,
            samples: DEFAULT_SAMPLES,
            thin: 1,
            seed: 0,
            model: ModelSpec::four_pl(),
            target_acceptance: DEFAULT_TARGET_ACCEPTANCE,
            scan: Scan::default(),
            keep_theta_traces: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::Config("chains must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.samples < self.thin {
            return Err(Error::Config(format!(
                "samples ({}) must be at least thin ({}) to retain a draw",
                self.samples, self.thin
            )));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::Config(format!(
                "target acceptance must lie in (0, 1), got {}",
                self.target_acceptance
            )));
        }
        Ok(())
    }

    pub fn retained_per_chain(&self) -> usize {
        self.samples / self.thin
    }
}

/// Random-walk proposal standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepSizes {
    pub theta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub tau: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Acceptance {
    pub accepted: u64,
    pub proposed: u64,
}

impl Acceptance {
    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += accepted as u64;
    }

    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AcceptanceStats {
    pub theta: Acceptance,
    pub alpha: Acceptance,
    pub tau: Acceptance,
}

/// Full state of one chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub theta: Vec<f64>,
    /// Latent responses, persons in rows.
    pub z: Vec<u8>,
    pub alpha: Vec<f64>,
    pub tau: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub steps: StepSizes,
    pub acceptance: AcceptanceStats,
    rng: ChaCha8Rng,
    adapting: bool,
    adapt_iter: u64,
    target_acceptance: f64,
    scan: Scan,
}

impl ChainState {
    /// Assemble a state directly. Step sizes start at their defaults and
    /// adaptation is on.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        theta: Vec<f64>,
        z: Vec<u8>,
        alpha: Vec<f64>,
        tau: Vec<f64>,
        c: Vec<f64>,
        d: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        let (n, m) = (theta.len(), alpha.len());
        for (name, len) in [("tau", tau.len()), ("c", c.len()), ("d", d.len())] {
            if len != m {
                return Err(Error::Config(format!("{name} has {len} entries, expected {m}")));
            }
        }
        if z.len() != n * m {
            return Err(Error::LengthMismatch {
                expected: n * m,
                actual: z.len(),
            });
        }
        for i in 0..m {
            FaItem::new(alpha[i], tau[i], c[i], d[i])?;
        }
        Ok(ChainState {
            steps: StepSizes {
                theta: vec![INIT_THETA_STEP; n],
                alpha: vec![INIT_ALPHA_STEP; m],
                tau: vec![INIT_TAU_STEP; m],
            },
            theta,
            z,
            alpha,
            tau,
            c,
            d,
            acceptance: AcceptanceStats::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            adapting: true,
            adapt_iter: 0,
            target_acceptance: DEFAULT_TARGET_ACCEPTANCE,
            scan: Scan::Augmented,
        })
    }

    pub fn n_persons(&self) -> usize {
        self.theta.len()
    }

    pub fn n_items(&self) -> usize {
        self.alpha.len()
    }

    pub fn with_scan(mut self, scan: Scan) -> Self {
        self.scan = scan;
        self
    }

    pub fn is_adapting(&self) -> bool {
        self.adapting
    }

    /// Stop adapting step sizes; they stay fixed from here on.
    pub fn freeze_adaptation(&mut self) {
        self.adapting = false;
    }

    pub fn item(&self, i: usize) -> Result<FaItem> {
        FaItem::new(self.alpha[i], self.tau[i], self.c[i], self.d[i])
    }

    #[inline]
    fn z_at(&self, p: usize, i: usize) -> u8 {
        self.z[p * self.alpha.len() + i]
    }

    fn adapt(&self, log_step: &mut f64, accepted: bool) {
        if self.adapting {
            let gain = (self.adapt_iter as f64 + 10.0).powf(-0.6);
            let signal = if accepted { 1.0 } else { 0.0 } - self.target_acceptance;
            *log_step = (*log_step + gain * signal).clamp(MIN_STEP.ln(), MAX_STEP.ln());
        }
    }
}

pub(crate) fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub(crate) fn sample_loading_prior(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let a = LOADING_PRIOR_MEAN + LOADING_PRIOR_SD * standard_normal(rng);
        if a > 0.0 && a < 1.0 {
            return a;
        }
    }
}

/// Chain 0 starts from fixed values (loading 0.5, threshold 0, c = 0.05 and
/// d = 0.95 where estimated, theta = standardized total score). Other chains
/// draw item parameters and theta from their priors. `Z` starts at `Y`.
pub fn init_chain(data: &ResponseMatrix, config: &SamplerConfig, chain_index: usize) -> Result<ChainState> {
    if chain_index >= config.chains {
        return Err(Error::Config(format!(
            "chain index {chain_index} out of range for {} chains",
            config.chains
        )));
    }
    let (n, m) = (data.n_persons(), data.n_items());
    let variant = config.model.variant;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(chain_index as u64);

    let (theta, alpha, tau, c, d);
    if chain_index == 0 {
        let totals: Vec<f64> = data.totals().into_iter().map(|t| t as f64).collect();
        let mean = totals.iter().sum::<f64>() / n as f64;
        let var = totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0).max(1.0);
        let sd = var.sqrt();
        theta = totals
            .iter()
            .map(|t| if sd > 0.0 { (t - mean) / sd } else { 0.0 })
            .collect();
        alpha = vec![0.5; m];
        tau = vec![0.0; m];
        c = vec![if variant.estimates_guessing() { 0.05 } else { 0.0 }; m];
        d = vec![if variant.estimates_inattention() { 0.95 } else { 1.0 }; m];
    } else {
        theta = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mut a = Vec::with_capacity(m);
        let mut t = Vec::with_capacity(m);
        let mut cs = Vec::with_capacity(m);
        let mut ds = Vec::with_capacity(m);
        for _ in 0..m {
            a.push(sample_loading_prior(&mut rng));
            t.push(standard_normal(&mut rng));
            let ci = if variant.estimates_guessing() {
                rng.random::<f64>()
            } else {
                0.0
            };
            let di = if variant.estimates_inattention() {
                ci + (1.0 - ci) * (1.0 - rng.random::<f64>())
            } else {
                1.0
            };
            cs.push(ci);
            ds.push(di);
        }
        alpha = a;
        tau = t;
        c = cs;
        d = ds;
    }
    let mut state = ChainState::from_parts(theta, data.values().to_vec(), alpha, tau, c, d, 0)?;
    state.rng = rng;
    state.target_acceptance = config.target_acceptance;
    state.scan = config.scan;
    Ok(state)
}

/// Gibbs step: redraw every `Z_pi` from `P(Z = 1 | Y, theta, item)`.
pub fn update_z(state: &mut ChainState, data: &ResponseMatrix, link: Link) -> Result<()> {
    let (n, m) = (state.n_persons(), state.n_items());
    for i in 0..m {
        let u = uniqueness(state.alpha[i]);
        let (slope, offset) = (state.alpha[i] / u, state.tau[i] / u);
        let (c, d) = (state.c[i], state.d[i]);
        for p in 0..n {
            let x = slope * state.theta[p] - offset;
            let q = z_posterior_from_log_odds(data.get(p, i), link.log_odds(x), c, d)?;
            let draw = state.rng.random::<f64>() < q;
            state.z[p * m + i] = draw as u8;
        }
    }
    Ok(())
}

/// `ln P(Y = y | x)` with the latent response integrated out:
/// `P(Y = 1 | x) = c (1 - F(x)) + d F(x)`.
#[inline]
pub(crate) fn log_observed(y: u8, x: f64, c: f64, d: f64, link: Link) -> f64 {
    if y == 1 {
        if c == 0.0 {
            d.ln() + link.log_cdf(x)
        } else {
            (c * link.cdf(-x) + d * link.cdf(x)).ln()
        }
    } else if d == 1.0 {
        (1.0 - c).ln() + link.log_cdf(-x)
    } else {
        ((1.0 - c) * link.cdf(-x) + (1.0 - d) * link.cdf(x)).ln()
    }
}

/// Likelihood targeted by the theta, loading and threshold steps.
#[derive(Clone, Copy)]
enum Target<'a> {
    Latent,
    Observed(&'a ResponseMatrix),
}

fn theta_steps(state: &mut ChainState, link: Link, target: Target) {
    let (n, m) = (state.n_persons(), state.n_items());
    let (slopes, offsets): (Vec<f64>, Vec<f64>) = (0..m)
        .map(|i| {
            let u = uniqueness(state.alpha[i]);
            (state.alpha[i] / u, state.tau[i] / u)
        })
        .unzip();
    for p in 0..n {
        let log_post = |t: f64| {
            let ll: f64 = match target {
                Target::Latent => state.z[p * m..(p + 1) * m]
                    .iter()
                    .zip(slopes.iter().zip(&offsets))
                    .map(|(&z, (&s, &o))| link.log_bernoulli(z == 1, s * t - o))
                    .sum(),
                Target::Observed(data) => (0..m)
                    .map(|i| log_observed(data.get(p, i), slopes[i] * t - offsets[i], state.c[i], state.d[i], link))
                    .sum(),
            };
            ll - 0.5 * t * t
        };
        let current = state.theta[p];
        let current_lp = log_post(current);
        let proposal = current + state.steps.theta[p] * standard_normal(&mut state.rng);
        let log_ratio = log_post(proposal) - current_lp;
        let accepted = metropolis_accept(&mut state.rng, log_ratio);
        if accepted {
            state.theta[p] = proposal;
        }
        state.acceptance.theta.record(accepted);
        let mut log_step = state.steps.theta[p].ln();
        state.adapt(&mut log_step, accepted);
        state.steps.theta[p] = log_step.exp();
    }
}

/// Random-walk Metropolis on each `theta_p` against `N(0, 1)` times the
/// Bernoulli likelihood of that person's latent responses.
pub fn update_theta(state: &mut ChainState, link: Link) {
    theta_steps(state, link, Target::Latent);
}

/// As [`update_theta`], but against the observed responses with `Z`
/// integrated out.
pub fn update_theta_observed(state: &mut ChainState, data: &ResponseMatrix, link: Link) {
    theta_steps(state, link, Target::Observed(data));
}

#[inline]
fn metropolis_accept(rng: &mut ChaCha8Rng, log_ratio: f64) -> bool {
    log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
}

fn item_log_lik(state: &ChainState, i: usize, alpha: f64, tau: f64, link: Link, target: Target) -> f64 {
    let u = uniqueness(alpha);
    let (slope, offset) = (alpha / u, tau / u);
    match target {
        Target::Latent => (0..state.n_persons())
            .map(|p| link.log_bernoulli(state.z_at(p, i) == 1, slope * state.theta[p] - offset))
            .sum(),
        Target::Observed(data) => (0..state.n_persons())
            .map(|p| log_observed(data.get(p, i), slope * state.theta[p] - offset, state.c[i], state.d[i], link))
            .sum(),
    }
}

fn loading_log_prior(alpha: f64) -> f64 {
    let r = (alpha - LOADING_PRIOR_MEAN) / LOADING_PRIOR_SD;
    -0.5 * r * r
}

fn loading_threshold_steps(state: &mut ChainState, link: Link, target: Target) {
    for i in 0..state.n_items() {
        let (alpha, tau) = (state.alpha[i], state.tau[i]);
        let mut current_ll = item_log_lik(state, i, alpha, tau, link, target);

        let proposal = alpha + state.steps.alpha[i] * standard_normal(&mut state.rng);
        let accepted = if proposal > 0.0 && proposal < 1.0 {
            let prop_ll = item_log_lik(state, i, proposal, tau, link, target);
            let log_ratio = prop_ll + loading_log_prior(proposal) - current_ll - loading_log_prior(alpha);
            let ok = metropolis_accept(&mut state.rng, log_ratio);
            if ok {
                state.alpha[i] = proposal;
                current_ll = prop_ll;
            }
            ok
        } else {
            false
        };
        state.acceptance.alpha.record(accepted);
        let mut log_step = state.steps.alpha[i].ln();
        state.adapt(&mut log_step, accepted);
        state.steps.alpha[i] = log_step.exp();

        let alpha = state.alpha[i];
        let proposal = tau + state.steps.tau[i] * standard_normal(&mut state.rng);
        let prop_ll = item_log_lik(state, i, alpha, proposal, link, target);
        let log_ratio = prop_ll - 0.5 * proposal * proposal - current_ll + 0.5 * tau * tau;
        let accepted = metropolis_accept(&mut state.rng, log_ratio);
        if accepted {
            state.tau[i] = proposal;
        }
        state.acceptance.tau.record(accepted);
        let mut log_step = state.steps.tau[i].ln();
        state.adapt(&mut log_step, accepted);
        state.steps.tau[i] = log_step.exp();
    }
}

/// Random-walk Metropolis on each `alpha_i`, then each `tau_i`, against the
/// latent responses. Loading proposals outside (0, 1) are rejected.
pub fn update_loading_threshold(state: &mut ChainState, link: Link) {
    loading_threshold_steps(state, link, Target::Latent);
}

/// As [`update_loading_threshold`], but against the observed responses with
/// `Z` integrated out.
pub fn update_loading_threshold_observed(state: &mut ChainState, data: &ResponseMatrix, link: Link) {
    loading_threshold_steps(state, link, Target::Observed(data));
}

/// Cross-tabulation of latent against observed responses for one item.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MixtureCounts {
    /// `Z = 0, Y = 1`
    pub guessed: u64,
    /// `Z = 0, Y = 0`
    pub failed: u64,
    /// `Z = 1, Y = 1`
    pub solved: u64,
    /// `Z = 1, Y = 0`
    pub slipped: u64,
}

pub fn mixture_counts(state: &ChainState, data: &ResponseMatrix, item: usize) -> MixtureCounts {
    let mut k = MixtureCounts::default();
    for p in 0..state.n_persons() {
        match (state.z_at(p, item), data.get(p, item)) {
            (0, 1) => k.guessed += 1,
            (0, _) => k.failed += 1,
            (_, 1) => k.solved += 1,
            _ => k.slipped += 1,
        }
    }
    k
}

#[inline]
fn xlogy(k: u64, v: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * v.ln()
    }
}

/// Slice sampler with shrinkage on the bounded interval `(lo, hi)`.
fn slice_bounded<F: Fn(f64) -> f64>(rng: &mut ChaCha8Rng, x0: f64, lo: f64, hi: f64, log_f: F) -> f64 {
    let level = log_f(x0) + (1.0 - rng.random::<f64>()).ln();
    let (mut l, mut r) = (lo, hi);
    loop {
        let x1 = l + rng.random::<f64>() * (r - l);
        if x1 > lo && x1 < hi && log_f(x1) > level {
            return x1;
        }
        if x1 < x0 {
            l = x1;
        } else {
            r = x1;
        }
        if r - l <= f64::EPSILON * x0.abs().max(1e-300) {
            return x0;
        }
    }
}

/// Slice-sample each estimated `c_i` from
/// `c^s0 (1 - c)^f0 / (1 - c)` on `(0, d_i)`; the `1 / (1 - c)` factor is the
/// `U(c, 1)` prior density of `d_i` and is dropped when `d` is pinned at 1.
pub fn update_guessing(state: &mut ChainState, data: &ResponseMatrix, variant: Variant) {
    if !variant.estimates_guessing() {
        return;
    }
    let d_random = variant.estimates_inattention();
    for i in 0..state.n_items() {
        let k = mixture_counts(state, data, i);
        let log_f = |c: f64| {
            let mut v = xlogy(k.guessed, c) + xlogy(k.failed, 1.0 - c);
            if d_random {
                v -= (1.0 - c).ln();
            }
            v
        };
        let (c0, upper) = (state.c[i], state.d[i]);
        state.c[i] = slice_bounded(&mut state.rng, c0, 0.0, upper, log_f);
    }
}

/// Slice-sample each estimated `d_i` from `d^s1 (1 - d)^f1` on `(c_i, 1)`.
pub fn update_inattention(state: &mut ChainState, data: &ResponseMatrix, variant: Variant) {
    if !variant.estimates_inattention() {
        return;
    }
    for i in 0..state.n_items() {
        let k = mixture_counts(state, data, i);
        let log_f = |d: f64| xlogy(k.solved, d) + xlogy(k.slipped, 1.0 - d);
        let (d0, lower) = (state.d[i], state.c[i]);
        state.d[i] = slice_bounded(&mut state.rng, d0, lower, 1.0, log_f);
    }
}

/// Guessing then inattention. Pinned asymptotes never move.
pub fn update_asymptotes(state: &mut ChainState, data: &ResponseMatrix, variant: Variant) {
    update_guessing(state, data, variant);
    update_inattention(state, data, variant);
}

/// Slice-sample each estimated `c_i`, then `d_i`, against the observed
/// responses with `Z` integrated out. The joint prior density of `(c, d)` is
/// `1 / (1 - c)` on `0 < c < d < 1`; pinned asymptotes never move.
pub fn update_asymptotes_observed(state: &mut ChainState, data: &ResponseMatrix, model: ModelSpec) {
    let variant = model.variant;
    if !variant.estimates_guessing() && !variant.estimates_inattention() {
        return;
    }
    let n = state.n_persons();
    for i in 0..state.n_items() {
        let u = uniqueness(state.alpha[i]);
        let (slope, offset) = (state.alpha[i] / u, state.tau[i] / u);
        // (P(Z = 1 | theta_p), P(Z = 0 | theta_p)), split by the observed response
        let mut right = Vec::with_capacity(n);
        let mut wrong = Vec::with_capacity(n);
        for p in 0..n {
            let x = slope * state.theta[p] - offset;
            let pair = (model.link.cdf(x), model.link.cdf(-x));
            if data.get(p, i) == 1 {
                right.push(pair);
            } else {
                wrong.push(pair);
            }
        }
        let log_lik = |c: f64, d: f64| -> f64 {
            right.iter().map(|&(f, g)| (c * g + d * f).ln()).sum::<f64>()
                + wrong.iter().map(|&(f, g)| ((1.0 - c) * g + (1.0 - d) * f).ln()).sum::<f64>()
        };
        if variant.estimates_guessing() {
            let d = state.d[i];
            let d_random = variant.estimates_inattention();
            let log_f = |c: f64| log_lik(c, d) - if d_random { (1.0 - c).ln() } else { 0.0 };
            state.c[i] = slice_bounded(&mut state.rng, state.c[i], 0.0, d, log_f);
        }
        if variant.estimates_inattention() {
            let c = state.c[i];
            state.d[i] = slice_bounded(&mut state.rng, state.d[i], c, 1.0, |d| log_lik(c, d));
        }
    }
}

/// One full scan. With [`Scan::Augmented`]: `Z`, `theta`, loadings and
/// thresholds, asymptotes. With [`Scan::Collapsed`]: `theta`, loadings and
/// thresholds against the observed likelihood, then `Z`, then asymptotes.
pub fn sweep(state: &mut ChainState, data: &ResponseMatrix, model: ModelSpec) -> Result<()> {
    match state.scan {
        Scan::Augmented => {
            update_z(state, data, model.link)?;
            update_theta(state, model.link);
            update_loading_threshold(state, model.link);
            update_asymptotes(state, data, model.variant);
        }
        Scan::Collapsed => {
            update_theta_observed(state, data, model.link);
            update_loading_threshold_observed(state, data, model.link);
            update_asymptotes_observed(state, data, model);
            update_z(state, data, model.link)?;
        }
    }
    if state.adapting {
        state.adapt_iter += 1;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemParam {
    Alpha,
    Tau,
    C,
    D,
}

impl ItemParam {
    pub const ALL: [ItemParam; 4] = [ItemParam::Alpha, ItemParam::Tau, ItemParam::C, ItemParam::D];

    pub fn name(self) -> &'static str {
        match self {
            ItemParam::Alpha => "alpha",
            ItemParam::Tau => "tau",
            ItemParam::C => "c",
            ItemParam::D => "d",
        }
    }
}

/// Retained output of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws {
    pub chain: usize,
    /// `[item][draw]` traces.
    pub alpha: Vec<Vec<f64>>,
    pub tau: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    pub theta_sum: Vec<f64>,
    /// Count of retained draws with `Z_pi = 1`, persons in rows.
    pub z_count: Vec<u32>,
    /// `[draw][person]`, only when requested.
    pub theta_trace: Option<Vec<Vec<f64>>>,
    pub retained: usize,
    /// Step sizes used throughout the retained phase.
    pub steps: StepSizes,
    /// Acceptance during the retained phase.
    pub acceptance: AcceptanceStats,
}

impl ChainDraws {
    pub fn trace(&self, param: ItemParam, item: usize) -> &[f64] {
        match param {
            ItemParam::Alpha => &self.alpha[item],
            ItemParam::Tau => &self.tau[item],
            ItemParam::C => &self.c[item],
            ItemParam::D => &self.d[item],
        }
    }
}

/// Run one chain: burn-in with adaptation, then the retained phase.
pub fn run_chain(data: &ResponseMatrix, config: &SamplerConfig, chain_index: usize) -> Result<ChainDraws> {
    let mut state = init_chain(data, config, chain_index)?;
    let (n, m) = (data.n_persons(), data.n_items());
    for _ in 0..config.burnin {
        sweep(&mut state, data, config.model)?;
    }
    state.freeze_adaptation();
    state.acceptance = AcceptanceStats::default();

    let keep = config.retained_per_chain();
    let mut draws = ChainDraws {
        chain: chain_index,
        alpha: vec![Vec::with_capacity(keep); m],
        tau: vec![Vec::with_capacity(keep); m],
        c: vec![Vec::with_capacity(keep); m],
        d: vec![Vec::with_capacity(keep); m],
        theta_sum: vec![0.0; n],
        z_count: vec![0; n * m],
        theta_trace: config.keep_theta_traces.then(|| Vec::with_capacity(keep)),
        retained: 0,
        steps: state.steps.clone(),
        acceptance: AcceptanceStats::default(),
    };
    for t in 0..config.samples {
        sweep(&mut state, data, config.model)?;
        if t % config.thin != config.thin - 1 {
            continue;
        }
        for i in 0..m {
            draws.alpha[i].push(state.alpha[i]);
            draws.tau[i].push(state.tau[i]);
            draws.c[i].push(state.c[i]);
            draws.d[i].push(state.d[i]);
        }
        for (sum, th) in draws.theta_sum.iter_mut().zip(&state.theta) {
            *sum += th;
        }
        for (count, &z) in draws.z_count.iter_mut().zip(&state.z) {
            *count += z as u32;
        }
        if let Some(trace) = draws.theta_trace.as_mut() {
            trace.push(state.theta.clone());
        }
        draws.retained += 1;
    }
    draws.acceptance = state.acceptance;
    debug_assert_eq!(draws.steps, state.steps);
    Ok(draws)
}

/// Retained draws from every chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub n_persons: usize,
    pub n_items: usize,
    pub chains: Vec<ChainDraws>,
}

impl PosteriorDraws {
    pub fn total_retained(&self) -> usize {
        self.chains.iter().map(|c| c.retained).sum()
    }

    /// All chains concatenated in chain order.
    pub fn pooled(&self, param: ItemParam, item: usize) -> Vec<f64> {
        self.chains
            .iter()
            .flat_map(|c| c.trace(param, item).iter().copied())
            .collect()
    }

    /// Pooled posterior mean of each `Z_pi`, persons in rows.
    pub fn z_mean(&self) -> Vec<f64> {
        let total = self.total_retained() as f64;
        (0..self.n_persons * self.n_items)
            .map(|k| self.chains.iter().map(|c| c.z_count[k] as f64).sum::<f64>() / total)
            .collect()
    }

    pub fn theta_mean(&self) -> Vec<f64> {
        let total = self.total_retained() as f64;
        (0..self.n_persons)
            .map(|p| self.chains.iter().map(|c| c.theta_sum[p]).sum::<f64>() / total)
            .collect()
    }

    pub fn parameter_traces(&self, item_ids: &[String]) -> Vec<ParameterTrace> {
        let mut out = Vec::with_capacity(4 * self.n_items);
        for (i, id) in item_ids.iter().enumerate().take(self.n_items) {
            for param in ItemParam::ALL {
                out.push(ParameterTrace {
                    name: format!("{}[{id}]", param.name()),
                    chains: self.chains.iter().map(|c| c.trace(param, i).to_vec()).collect(),
                });
            }
        }
        out
    }
}

/// Point estimates for one item in both parameterizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ItemEstimate {
    pub fa: FaItem,
    pub irt: IrtItem,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub config: SamplerConfig,
    pub item_ids: Vec<String>,
    pub person_ids: Vec<String>,
    /// Pooled posterior medians of the FA parameters, converted to IRT.
    pub items: Vec<ItemEstimate>,
    /// Pooled posterior means.
    pub theta: Vec<f64>,
    /// Pooled posterior means of `Z`, persons in rows.
    pub z_mean: Vec<f64>,
    pub draws: PosteriorDraws,
    pub diagnostics: DiagnosticsReport,
}

impl FitResult {
    pub fn model(&self) -> ModelSpec {
        self.config.model
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn z_row(&self, person: usize) -> &[f64] {
        let m = self.n_items();
        &self.z_mean[person * m..(person + 1) * m]
    }
}

/// Run all chains, pool them, and summarize.
pub fn fit(data: &ResponseMatrix, config: &SamplerConfig) -> Result<FitResult> {
    config.validate()?;
    let (n, m) = (data.n_persons(), data.n_items());
    if n < 2 || m < 2 {
        return Err(Error::Data(format!(
            "estimation needs at least 2 persons and 2 items, got {n} x {m}"
        )));
    }
    let chains = (0..config.chains)
        .into_par_iter()
        .map(|k| run_chain(data, config, k))
        .collect::<Result<Vec<_>>>()?;
    let draws = PosteriorDraws {
        n_persons: n,
        n_items: m,
        chains,
    };
    let items = (0..m)
        .map(|i| {
            let fa = FaItem::new(
                median(&draws.pooled(ItemParam::Alpha, i)),
                median(&draws.pooled(ItemParam::Tau, i)),
                median(&draws.pooled(ItemParam::C, i)),
                median(&draws.pooled(ItemParam::D, i)),
            )?;
            Ok(ItemEstimate { fa, irt: fa.to_irt()? })
        })
        .collect::<Result<Vec<_>>>()?;
    let diagnostics = DiagnosticsReport::from_traces(&draws.parameter_traces(data.item_ids()));
    Ok(FitResult {
        config: config.clone(),
        item_ids: data.item_ids().to_vec(),
        person_ids: data.person_ids().to_vec(),
        items,
        theta: draws.theta_mean(),
        z_mean: draws.z_mean(),
        draws,
        diagnostics,
    })
}
