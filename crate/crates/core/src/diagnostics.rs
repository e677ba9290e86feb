//! Convergence diagnostics for pooled chains and estimate-comparison metrics.

use serde::Serialize;

use crate::error::{Error, Result};

/// Split-R-hat above this is flagged (a warning, not a failure).
pub const RHAT_WARN_THRESHOLD: f64 = 1.05;
pub const MIN_SPLIT_DRAWS: usize = 10;
pub const MIN_ESS_DRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rhat {
    pub value: f64,
    /// Every split had zero variance; `value` is 1 if the splits also agree.
    pub zero_variance: bool,
}

/// Potential scale reduction computed on half-chains.
pub fn split_rhat(chains: &[&[f64]]) -> Result<Rhat> {
    let mut splits: Vec<&[f64]> = Vec::with_capacity(2 * chains.len());
    for chain in chains {
        let half = chain.len() / 2;
        if half < MIN_SPLIT_DRAWS {
            return Err(Error::InsufficientDraws(format!(
                "split R-hat needs at least {} draws per chain, got {}",
                2 * MIN_SPLIT_DRAWS,
                chain.len()
            )));
        }
        splits.push(&chain[..half]);
        splits.push(&chain[chain.len() - half..]);
    }
    if splits.len() < 2 {
        return Err(Error::InsufficientDraws("split R-hat needs at least one chain".into()));
    }
    let n = splits.iter().map(|s| s.len()).min().unwrap_or(0) as f64;
    let means: Vec<f64> = splits.iter().map(|s| mean(s)).collect();
    let within = splits
        .iter()
        .zip(&means)
        .map(|(s, &mu)| s.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0))
        .sum::<f64>()
        / splits.len() as f64;
    let grand = mean(&means);
    let between_over_n = means.iter().map(|mu| (mu - grand).powi(2)).sum::<f64>()
        / (splits.len() as f64 - 1.0);

    let all_constant = splits.iter().all(|s| s.iter().all(|&x| x == s[0]));
    if all_constant {
        let agree = splits.iter().all(|s| s[0] == splits[0][0]);
        return Ok(Rhat {
            value: if agree { 1.0 } else { f64::INFINITY },
            zero_variance: true,
        });
    }
    let var_plus = (n - 1.0) / n * within + between_over_n;
    Ok(Rhat {
        value: (var_plus / within).sqrt(),
        zero_variance: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ess {
    pub value: f64,
    /// The trace was constant; `value` is reported as 1.
    pub degenerate: bool,
}

/// Effective sample size from the autocorrelation sum, truncated at the first
/// non-positive sum of an adjacent pair of autocorrelations. Capped at the
/// trace length.
pub fn ess(trace: &[f64]) -> Result<Ess> {
    let n = trace.len();
    if n < MIN_ESS_DRAWS {
        return Err(Error::InsufficientDraws(format!(
            "ESS needs at least {MIN_ESS_DRAWS} draws, got {n}"
        )));
    }
    if trace.iter().all(|&x| x == trace[0]) {
        return Ok(Ess {
            value: 1.0,
            degenerate: true,
        });
    }
    let mu = mean(trace);
    let centered: Vec<f64> = trace.iter().map(|x| x - mu).collect();
    let autocov = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let gamma0 = autocov(0);
    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (autocov(lag) + autocov(lag + 1)) / gamma0;
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    let value = (n as f64 / tau.max(f64::MIN_POSITIVE)).min(n as f64);
    Ok(Ess {
        value,
        degenerate: false,
    })
}

/// Mean squared difference between two estimate vectors.
pub fn mse_compare(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::Data("cannot compare empty estimate vectors".into()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64)
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Linear-interpolation quantile of unsorted data, `q` in [0, 1].
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

pub(crate) fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Retained draws of one scalar parameter, one vector per chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterTrace {
    pub name: String,
    pub chains: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSummary {
    pub name: String,
    /// `None` when the chains are too short for a split.
    pub rhat: Option<f64>,
    /// Sum of per-chain ESS, capped at the pooled draw count.
    pub ess: Option<f64>,
    pub median: f64,
    pub q025: f64,
    pub q975: f64,
    pub zero_variance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub rhat_threshold: f64,
    pub parameters: Vec<ParameterSummary>,
    /// Names of parameters whose R-hat exceeds the threshold.
    pub flagged: Vec<String>,
}

impl DiagnosticsReport {
    pub fn from_traces(traces: &[ParameterTrace]) -> Self {
        let parameters: Vec<ParameterSummary> = traces.iter().map(summarize).collect();
        let flagged = parameters
            .iter()
            .filter(|p| p.rhat.is_some_and(|r| r.is_nan() || r > RHAT_WARN_THRESHOLD))
            .map(|p| p.name.clone())
            .collect();
        DiagnosticsReport {
            rhat_threshold: RHAT_WARN_THRESHOLD,
            parameters,
            flagged,
        }
    }

    pub fn get(&self, name: &str) -> Option<&ParameterSummary> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Largest finite-or-infinite R-hat across parameters that have one.
    pub fn max_rhat(&self) -> Option<f64> {
        self.parameters
            .iter()
            .filter_map(|p| p.rhat)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }

    /// Flat CSV: one row per parameter.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,rhat,ess,median,q025,q975,zero_variance\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        for p in &self.parameters {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.name,
                opt(p.rhat),
                opt(p.ess),
                p.median,
                p.q025,
                p.q975,
                p.zero_variance
            ));
        }
        out
    }
}

fn summarize(trace: &ParameterTrace) -> ParameterSummary {
    let chains: Vec<&[f64]> = trace.chains.iter().map(Vec::as_slice).collect();
    let mut pooled: Vec<f64> = trace.chains.iter().flatten().copied().collect();
    pooled.sort_by(f64::total_cmp);
    let rhat = split_rhat(&chains).ok();
    let ess_total = chains
        .iter()
        .map(|c| ess(c).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()
        .ok()
        .map(|v| v.iter().sum::<f64>().min(pooled.len() as f64));
    ParameterSummary {
        name: trace.name.clone(),
        rhat: rhat.map(|r| r.value),
        ess: ess_total,
        median: quantile_sorted(&pooled, 0.5),
        q025: quantile_sorted(&pooled, 0.025),
        q975: quantile_sorted(&pooled, 0.975),
        zero_variance: rhat.is_some_and(|r| r.zero_variance),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Vec<f64> {
        (0..n)
            .map(|_| shift + Distribution::<f64>::sample(&StandardNormal, rng))
            .collect::<Vec<f64>>()
    }

    #[test]
    fn rhat_constant_chains() {
        let a = vec![2.0; 50];
        let r = split_rhat(&[&a, &a]).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.zero_variance);
    }

    #[test]
    fn rhat_iid_chains_near_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let chains: Vec<Vec<f64>> = (0..4).map(|_| normals(&mut rng, 1000, 0.0)).collect();
        let refs: Vec<&[f64]> = chains.iter().map(Vec::as_slice).collect();
        let r = split_rhat(&refs).unwrap();
        assert!(r.value < 1.01, "{}", r.value);
        assert!(r.value > 0.99);
    }

    #[test]
    fn rhat_separated_chains_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = normals(&mut rng, 1000, 0.0);
        let b = normals(&mut rng, 1000, 10.0);
        let r = split_rhat(&[&a, &b]).unwrap();
        assert!(r.value > 2.0, "{}", r.value);
    }

    #[test]
    fn rhat_too_few_draws() {
        let a = vec![1.0, 2.0, 3.0];
        assert!(matches!(split_rhat(&[&a]), Err(Error::InsufficientDraws(_))));
    }

    #[test]
    fn ess_iid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = normals(&mut rng, 10_000, 0.0);
        let e = ess(&x).unwrap();
        assert!((8000.0..=12000.0).contains(&e.value), "{}", e.value);
    }

    #[test]
    fn ess_constant_trace() {
        let e = ess(&[0.5; 200]).unwrap();
        assert_eq!(e.value, 1.0);
        assert!(e.degenerate);
        assert!(ess(&[0.5; 10]).is_err());
    }

    #[test]
    fn ess_ar1_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi: f64 = 0.9;
        let n = 10_000;
        let mut x = Vec::with_capacity(n);
        let mut prev = Distribution::<f64>::sample(&StandardNormal, &mut rng) / (1.0 - phi * phi).sqrt();
        for _ in 0..n {
            let eps: f64 = StandardNormal.sample(&mut rng);
            prev = phi * prev + eps;
            x.push(prev);
        }
        let want = n as f64 * (1.0 - phi) / (1.0 + phi);
        let got = ess(&x).unwrap().value;
        assert!((got - want).abs() <= 0.3 * want, "{got} vs {want}");
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse_compare(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        assert_eq!(mse_compare(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(mse_compare(&[0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(median(&v), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn report_flags_unconverged_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let good = ParameterTrace {
            name: "good".into(),
            chains: vec![normals(&mut rng, 400, 0.0), normals(&mut rng, 400, 0.0)],
        };
        let bad = ParameterTrace {
            name: "bad".into(),
            chains: vec![normals(&mut rng, 400, 0.0), normals(&mut rng, 400, 5.0)],
        };
        let pinned = ParameterTrace {
            name: "pinned".into(),
            chains: vec![vec![1.0; 400], vec![1.0; 400]],
        };
        let report = DiagnosticsReport::from_traces(&[good, bad, pinned]);
        assert_eq!(report.flagged, vec!["bad".to_string()]);
        let p = report.get("pinned").unwrap();
        assert!(p.zero_variance);
        assert_eq!(p.rhat, Some(1.0));
        assert!(report.get("good").unwrap().ess.unwrap() <= 800.0);
        assert!(report.to_csv().lines().count() == 4);
    }
}
