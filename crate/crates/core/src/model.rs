//! Item parameter types, link functions, and the exact conversions between the
//! factor-analytic (loading, threshold) and IRT (discrimination, difficulty)
//! parameterizations.
//!
//! Both parameterizations share the guessing asymptote `c` and the inattention
//! asymptote `d`. The conversion is
//!
//! ```text
//! a = alpha / sqrt(1 - alpha^2)      b = tau / alpha
//! alpha = a / sqrt(1 + a^2)          tau = a b / sqrt(1 + a^2)
//! ```
//!
//! and it is exact: `FaItem::response_prob` and `IrtItem::response_prob` agree
//! to rounding for every valid item and every `theta`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scaling constant between the logistic and normal-ogive metrics.
pub const LOGISTIC_NORMAL_SCALE: f64 = 1.7;

/// Loadings below this are treated as zero by [`FaItem::to_irt`].
pub const MIN_LOADING: f64 = 1e-8;

/// Normal-ogive arguments are clamped to this magnitude before evaluation.
pub const NORMAL_CLAMP: f64 = 38.0;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
// ln(sqrt(2 pi))
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    Logistic,
    NormalOgive,
}

impl Link {
    /// CDF of the link distribution. Finite input is expected; NaN propagates.
    #[inline]
    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Link::Logistic => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            }
            Link::NormalOgive => {
                let x = x.clamp(-NORMAL_CLAMP, NORMAL_CLAMP);
                0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
            }
        }
    }

    /// Checked CDF: rejects non-finite arguments.
    pub fn try_cdf(self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("link argument must be finite, got {x}")));
        }
        Ok(self.cdf(x))
    }

    /// `ln F(x)`, accurate in both tails.
    #[inline]
    pub fn log_cdf(self, x: f64) -> f64 {
        match self {
            Link::Logistic => -softplus(-x),
            Link::NormalOgive => normal_log_cdf(x),
        }
    }

    /// `ln F(x) - ln(1 - F(x))`.
    #[inline]
    pub fn log_odds(self, x: f64) -> f64 {
        match self {
            Link::Logistic => x,
            Link::NormalOgive => normal_log_cdf(x) - normal_log_cdf(-x),
        }
    }

    /// Log-likelihood of a Bernoulli indicator with success probability `F(x)`.
    #[inline]
    pub fn log_bernoulli(self, success: bool, x: f64) -> f64 {
        if success {
            self.log_cdf(x)
        } else {
            self.log_cdf(-x)
        }
    }

    /// Inverse CDF of the standard link distribution, for `p` in (0, 1).
    pub fn quantile(self, p: f64) -> f64 {
        match self {
            Link::Logistic => (p / (1.0 - p)).ln(),
            Link::NormalOgive => normal_quantile(p),
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Link::Logistic => "logistic",
            Link::NormalOgive => "normal",
        })
    }
}

impl FromStr for Link {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" | "logit" => Ok(Link::Logistic),
            "normal" | "normal-ogive" | "probit" => Ok(Link::NormalOgive),
            other => Err(Error::Config(format!("unknown link '{other}'"))),
        }
    }
}

#[inline]
fn softplus(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

fn normal_log_cdf(x: f64) -> f64 {
    if x > 0.0 {
        (-Link::NormalOgive.cdf(-x)).ln_1p()
    } else if x > -30.0 {
        (0.5 * libm::erfc(-x * FRAC_1_SQRT_2)).ln()
    } else {
        // Mills-ratio asymptotic series; the first omitted term is below 1e-13.
        let r = 1.0 / (x * x);
        let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r))));
        -0.5 * x * x - (-x).ln() - LN_SQRT_2PI + series.ln()
    }
}

/// Acklam's rational approximation refined by one Halley step.
fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = Link::NormalOgive.cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

fn check_asymptotes(c: f64, d: f64) -> Result<()> {
    if !(c.is_finite() && d.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "asymptotes must be finite, got c = {c}, d = {d}"
        )));
    }
    if !(0.0 <= c && c < d && d <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "asymptotes must satisfy 0 <= c < d <= 1, got c = {c}, d = {d}"
        )));
    }
    Ok(())
}

/// Factor-analytic item: loading `alpha`, threshold `tau`, guessing `c`,
/// inattention `d`. The uniqueness `sqrt(1 - alpha^2)` is always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FaItem {
    alpha: f64,
    tau: f64,
    c: f64,
    d: f64,
}

impl FaItem {
    pub fn new(alpha: f64, tau: f64, c: f64, d: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "loading must lie in (0, 1), got {alpha}"
            )));
        }
        if !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "threshold must be finite, got {tau}"
            )));
        }
        check_asymptotes(c, d)?;
        Ok(FaItem { alpha, tau, c, d })
    }

    /// Two-parameter item (`c = 0`, `d = 1`).
    pub fn two_param(alpha: f64, tau: f64) -> Result<Self> {
        FaItem::new(alpha, tau, 0.0, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn uniqueness(&self) -> f64 {
        uniqueness(self.alpha)
    }

    /// Standardized latent argument `(alpha * theta - tau) / u`.
    #[inline]
    pub fn latent_arg(&self, theta: f64) -> f64 {
        (self.alpha * theta - self.tau) / self.uniqueness()
    }

    /// `P(Z = 1 | theta)`: probability the latent response clears the threshold.
    #[inline]
    pub fn latent_prob(&self, theta: f64, link: Link) -> f64 {
        link.cdf(self.latent_arg(theta))
    }

    /// `P(Y = 1 | theta) = c + (d - c) F((alpha theta - tau) / u)`.
    #[inline]
    pub fn response_prob(&self, theta: f64, link: Link) -> f64 {
        self.c + (self.d - self.c) * self.latent_prob(theta, link)
    }

    pub fn to_irt(&self) -> Result<IrtItem> {
        if self.alpha < MIN_LOADING {
            return Err(Error::DegenerateLoading(self.alpha));
        }
        Ok(IrtItem {
            a: self.alpha / self.uniqueness(),
            b: self.tau / self.alpha,
            c: self.c,
            d: self.d,
        })
    }
}

#[inline]
pub(crate) fn uniqueness(alpha: f64) -> f64 {
    ((1.0 - alpha) * (1.0 + alpha)).sqrt()
}

/// IRT item: discrimination `a`, difficulty `b`, guessing `c`, inattention `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrtItem {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl IrtItem {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Domain(format!(
                "discrimination must be positive and finite, got {a}"
            )));
        }
        if !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "difficulty must be finite, got {b}"
            )));
        }
        check_asymptotes(c, d)?;
        Ok(IrtItem { a, b, c, d })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// `P(Y = 1 | theta) = c + (d - c) F(a (theta - b))`.
    #[inline]
    pub fn response_prob(&self, theta: f64, link: Link) -> f64 {
        self.c + (self.d - self.c) * link.cdf(self.a * (theta - self.b))
    }

    /// Errors only when `a` is so large that the loading rounds to 1.
    pub fn to_fa(&self) -> Result<FaItem> {
        let norm = (1.0 + self.a * self.a).sqrt();
        let alpha = self.a / norm;
        if alpha >= 1.0 {
            return Err(Error::Domain(format!(
                "discrimination {} is too large to represent as a loading below 1",
                self.a
            )));
        }
        Ok(FaItem {
            alpha,
            tau: self.a * self.b / norm,
            c: self.c,
            d: self.d,
        })
    }

    /// Approximate change of metric between the logistic and normal-ogive
    /// links. Only `a` changes; the result is not an exact equivalence.
    pub fn rescale(&self, direction: Rescale) -> IrtItem {
        let a = match direction {
            Rescale::LogisticToNormal => self.a / LOGISTIC_NORMAL_SCALE,
            Rescale::NormalToLogistic => self.a * LOGISTIC_NORMAL_SCALE,
        };
        IrtItem { a, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rescale {
    LogisticToNormal,
    NormalToLogistic,
}

/// Which asymptotes a model estimates; the others stay at their boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `c = 0`, `d = 1`.
    TwoP,
    /// `d = 1`.
    ThreeP,
    /// `c = 0`.
    NiOnly,
    FourP,
}

impl Variant {
    pub fn estimates_guessing(self) -> bool {
        matches!(self, Variant::ThreeP | Variant::FourP)
    }

    pub fn estimates_inattention(self) -> bool {
        matches!(self, Variant::NiOnly | Variant::FourP)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub link: Link,
    pub variant: Variant,
}

impl ModelSpec {
    pub fn new(link: Link, variant: Variant) -> Self {
        ModelSpec { link, variant }
    }

    pub fn four_pl() -> Self {
        ModelSpec::new(Link::Logistic, Variant::FourP)
    }

    /// Same link, different asymptote variant.
    pub fn with_variant(self, variant: Variant) -> Self {
        ModelSpec { variant, ..self }
    }

    /// Short code as used on the command line, e.g. `4pl`, `3pno`, `nil`.
    pub fn code(&self) -> &'static str {
        use Link::*;
        use Variant::*;
        match (self.variant, self.link) {
            (TwoP, Logistic) => "2pl",
            (ThreeP, Logistic) => "3pl",
            (FourP, Logistic) => "4pl",
            (NiOnly, Logistic) => "nil",
            (TwoP, NormalOgive) => "2pno",
            (ThreeP, NormalOgive) => "3pno",
            (FourP, NormalOgive) => "4pno",
            (NiOnly, NormalOgive) => "nino",
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use Link::*;
        use Variant::*;
        let (variant, link) = match s.to_ascii_lowercase().as_str() {
            "2pl" => (TwoP, Logistic),
            "3pl" => (ThreeP, Logistic),
            "4pl" => (FourP, Logistic),
            "nil" => (NiOnly, Logistic),
            "2pno" => (TwoP, NormalOgive),
            "3pno" => (ThreeP, NormalOgive),
            "4pno" => (FourP, NormalOgive),
            "nino" => (NiOnly, NormalOgive),
            other => return Err(Error::Config(format!("unknown model '{other}'"))),
        };
        Ok(ModelSpec { link, variant })
    }
}
