//! Closed-form tail bounds on KS deviations.
//!
//! Two conventions for the threshold `z` coexist:
//!
//! * **scaled** `z`: the deviation has been multiplied by `sqrt(n)` (one
//!   sample) or `sqrt(n / 2)` (two samples of equal size `n`). Used by
//!   [`dkwm_tail`], [`prop1_tail`], [`wei_dudley_tail`], [`alpha1`], [`alpha2`].
//! * **unscaled** `z`: the raw deviation in `[0, 1]`. Used by the general
//!   two-sample bounds [`prop2a_tail_general`] and [`prop2b_tail_general`].
//!
//! Every bound is evaluated even outside its validity range; the result
//! carries a `valid` flag that callers doing inference must honour.

mod special;

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

pub use special::{erf, erfc, kolmogorov_l, kolmogorov_l_alternating, kolmogorov_l_theta};

use crate::error::{domain, Error, Result};

/// Wei-Dudley constant for equal sample sizes `4 <= n < 458`.
pub const WEI_DUDLEY_C_SMALL: f64 = 2.16863;
/// Wei-Dudley constant for equal sample sizes `n >= 458`.
pub const WEI_DUDLEY_C_LARGE: f64 = 2.0;
/// Smallest `n` for which [`WEI_DUDLEY_C_SMALL`] applies.
pub const WEI_DUDLEY_MIN_N: usize = 4;
/// Smallest `n` for which [`WEI_DUDLEY_C_LARGE`] applies.
pub const WEI_DUDLEY_LARGE_N: usize = 458;

/// The bound families implemented in this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `2 exp(-2 z^2)` for `sqrt(n) d(F_n, F)`.
    Dkwm,
    /// `2 exp(-2 z^2)` for `sqrt(n) |d(F_n, G) - d(F, G)|`.
    Prop1,
    /// `C exp(-2 z^2)` for `sqrt(n/2) d(F_n, G_n)` under `F = G`.
    WeiDudley,
    /// General two-sample bound on `|d(F_n, G_m) - d(F, G)|`, unscaled `z`.
    Prop2a,
    /// Equal-size form of [`Family::Prop2a`], scaled `z`.
    Alpha1,
    /// Sharper general two-sample bound, unscaled `z`.
    Prop2b,
    /// Equal-size form of [`Family::Prop2b`], scaled `z`.
    Alpha2,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Dkwm,
        Family::Prop1,
        Family::WeiDudley,
        Family::Prop2a,
        Family::Alpha1,
        Family::Prop2b,
        Family::Alpha2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Dkwm => "dkwm",
            Family::Prop1 => "prop1",
            Family::WeiDudley => "wd",
            Family::Prop2a => "prop2a",
            Family::Alpha1 => "alpha1",
            Family::Prop2b => "prop2b",
            Family::Alpha2 => "alpha2",
        }
    }

    /// Whether the family takes an unscaled (raw deviation) `z`.
    pub fn is_unscaled(self) -> bool {
        matches!(self, Family::Prop2a | Family::Prop2b)
    }

    /// Evaluate the family at `q`. Families that ignore `n` or `m` do so
    /// silently.
    pub fn evaluate(self, q: &TailQuery) -> Result<TailBoundResult> {
        match self {
            Family::Dkwm => Ok(dkwm_tail(q.z)),
            Family::Prop1 => Ok(prop1_tail(q.z)),
            Family::WeiDudley => wei_dudley_tail(q.n, q.m, q.z),
            Family::Prop2a => prop2a_tail_general(q.n, q.m, q.z),
            Family::Alpha1 => Ok(alpha1(q.z)),
            Family::Prop2b => prop2b_tail_general(q.n, q.m, q.z),
            Family::Alpha2 => Ok(alpha2(q.z)),
        }
    }

    /// Smallest `z` of the family's validity range for sizes `(n, m)`.
    pub fn validity_edge(self, n: usize, m: usize) -> f64 {
        match self {
            Family::Dkwm | Family::Prop1 | Family::WeiDudley => 0.0,
            Family::Alpha1 | Family::Alpha2 => LN_2.sqrt(),
            Family::Prop2a | Family::Prop2b => two_sample_validity_edge(n, m),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            Error::Domain(format!(
                "unknown bound family '{s}' (expected one of dkwm, wd, prop1, prop2a, alpha1, prop2b, alpha2)"
            ))
        })
    }
}

/// Arguments of a tail bound: threshold `z` and sample sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuery {
    pub z: f64,
    pub n: usize,
    /// Second sample size; ignored by one-sample families.
    pub m: usize,
}

impl TailQuery {
    pub fn new(z: f64, n: usize, m: usize) -> Result<Self> {
        if !(z >= 0.0) || !z.is_finite() {
            return domain(format!("z must be finite and >= 0, got {z}"));
        }
        if n == 0 || m == 0 {
            return domain("sample sizes must be >= 1");
        }
        Ok(Self { z, n, m })
    }
}

/// Value of a tail bound at a particular `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBoundResult {
    pub family: Family,
    pub z: f64,
    /// The bound as written; may exceed 1.
    pub raw: f64,
    /// `min(1, raw)`.
    pub clipped: f64,
    /// `z` lies in the range where the inequality is proved.
    pub valid: bool,
    /// `clipped < 1`.
    pub useful: bool,
}

impl TailBoundResult {
    fn new(family: Family, z: f64, raw: f64, valid: bool) -> Self {
        let clipped = raw.min(1.0);
        Self {
            family,
            z,
            raw,
            clipped,
            valid,
            useful: clipped < 1.0,
        }
    }
}

/// DKWM: `Prob[sqrt(n) d(F_n, F) > z] <= 2 exp(-2 z^2)` for all `z` and `n`.
///
/// `useful` follows the conventional range `z >= sqrt(log(2) / 2)`, the point
/// where the bound reaches 1.
pub fn dkwm_tail(z: f64) -> TailBoundResult {
    let raw = 2.0 * (-2.0 * z * z).exp();
    let mut r = TailBoundResult::new(Family::Dkwm, z, raw, true);
    r.useful = z >= (LN_2 / 2.0).sqrt();
    r
}

/// One-sample bound with possibly different `F` and `G`:
/// `Prob[sqrt(n) |d(F_n, G) - d(F, G)| > z] <= 2 exp(-2 z^2)`.
pub fn prop1_tail(z: f64) -> TailBoundResult {
    TailBoundResult {
        family: Family::Prop1,
        ..dkwm_tail(z)
    }
}

/// The Wei-Dudley constant for equal sample size `n`.
pub fn wei_dudley_constant(n: usize) -> Result<f64> {
    if n < WEI_DUDLEY_MIN_N {
        Err(Error::Unsupported(format!(
            "Wei-Dudley constant is only known for n >= {WEI_DUDLEY_MIN_N}, got n = {n}"
        )))
    } else if n >= WEI_DUDLEY_LARGE_N {
        Ok(WEI_DUDLEY_C_LARGE)
    } else {
        Ok(WEI_DUDLEY_C_SMALL)
    }
}

/// Two-sample null bound `Prob[sqrt(n/2) d(F_n, G_n) > z] <= C exp(-2 z^2)`
/// for `F = G` and equal sizes.
pub fn wei_dudley_tail(n: usize, m: usize, z: f64) -> Result<TailBoundResult> {
    if n != m {
        return Err(Error::Unsupported(format!(
            "Wei-Dudley bound requires n = m, got n = {n}, m = {m}"
        )));
    }
    let c = wei_dudley_constant(n)?;
    let raw = c * (-2.0 * z * z).exp();
    let mut r = TailBoundResult::new(Family::WeiDudley, z, raw, true);
    r.useful = z >= (c.ln() / 2.0).sqrt();
    Ok(r)
}

/// Envelope density whose partial integral restates the two-sided DKWM
/// inequality: `8 n x exp(-2 n x^2)` for `x >= sqrt(log 2 / (2n))`, else 0.
pub fn mu1(n: usize, x: f64) -> f64 {
    let n = n as f64;
    if x >= (LN_2 / (2.0 * n)).sqrt() {
        8.0 * n * x * (-2.0 * n * x * x).exp()
    } else {
        0.0
    }
}

/// Closed form of `int_0^z mu1(n, x) dx = max(0, 1 - 2 exp(-2 n z^2))`.
pub fn mu1_cdf(n: usize, z: f64) -> f64 {
    (1.0 - 2.0 * (-2.0 * n as f64 * z * z).exp()).max(0.0)
}

/// One-sided envelope density `4 n x exp(-2 n x^2)`, a probability density
/// on `[0, inf)`.
pub fn mu2(n: usize, x: f64) -> f64 {
    let n = n as f64;
    4.0 * n * x * (-2.0 * n * x * x).exp()
}

/// Lower end of the validity range of the general two-sample bounds:
/// `sqrt(log(2)/2) (n^-1/2 + m^-1/2)`.
pub fn two_sample_validity_edge(n: usize, m: usize) -> f64 {
    (LN_2 / 2.0).sqrt() * (1.0 / (n as f64).sqrt() + 1.0 / (m as f64).sqrt())
}

/// Shared exponential and erf factors of the two-sample bounds, for the
/// orientation where `m` multiplies the leading exponent.
struct HalfTerms {
    /// `exp(-2 m z (z - sqrt(log 4 / n)))`
    lead_exp: f64,
    /// `z n m / (n+m)^{3/2} exp(-2 n m z^2 / (n+m)) erf(...)`
    erf_part: f64,
}

fn half_terms(n: f64, m: f64, z: f64) -> HalfTerms {
    let s = n + m;
    let lead_exp = (-2.0 * m * z * (z - (2.0 * LN_2 / n).sqrt())).exp();
    let erf_arg = (2.0 * m * m * z * z / s).sqrt() - (s * LN_2 / n).sqrt();
    let erf_part = z * m * n / s.powf(1.5) * (-2.0 * m * n * z * z / s).exp() * erf(erf_arg);
    HalfTerms { lead_exp, erf_part }
}

fn check_sizes(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        domain(format!("sample sizes must be >= 1, got n = {n}, m = {m}"))
    } else {
        Ok(())
    }
}

fn prop2a_half(n: f64, m: f64, z: f64) -> f64 {
    let t = half_terms(n, m, z);
    n / (m + n) * 2f64.powf(1.0 - m / n) * t.lead_exp + (32.0 * PI).sqrt() * t.erf_part
}

fn prop2b_half(n: f64, m: f64, z: f64) -> f64 {
    let t = half_terms(n, m, z);
    (1.0 + n / (m + n)) * 2f64.powf(-m / n) * t.lead_exp + (8.0 * PI).sqrt() * t.erf_part
}

/// General two-sample bound on `Prob[|d(F_n, G_m) - d(F, G)| > z]` with
/// unscaled `z`. Equals `1 - int_{x+y<=z} mu1(n,x) mu1(m,y)`.
///
/// Valid for `z >= sqrt(log(2)/2) (n^-1/2 + m^-1/2)`.
pub fn prop2a_tail_general(n: usize, m: usize, z: f64) -> Result<TailBoundResult> {
    check_sizes(n, m)?;
    let (nf, mf) = (n as f64, m as f64);
    let raw = prop2a_half(nf, mf, z) + prop2a_half(mf, nf, z);
    let valid = z >= two_sample_validity_edge(n, m);
    Ok(TailBoundResult::new(Family::Prop2a, z, raw, valid))
}

/// Sharper general two-sample bound with unscaled `z`, `min(1, 2 - 2 alpha3)`
/// in closed form. Already clipped, so `raw <= 1`.
pub fn prop2b_tail_general(n: usize, m: usize, z: f64) -> Result<TailBoundResult> {
    check_sizes(n, m)?;
    let (nf, mf) = (n as f64, m as f64);
    let raw = (prop2b_half(nf, mf, z) + prop2b_half(mf, nf, z)).min(1.0);
    let valid = z >= two_sample_validity_edge(n, m);
    Ok(TailBoundResult::new(Family::Prop2b, z, raw, valid))
}

fn alpha_parts(z: f64) -> (f64, f64) {
    let c = LN_2.sqrt();
    let lead = (-4.0 * z * (z - c)).exp();
    let tail = z * (-2.0 * z * z).exp() * erf(2f64.sqrt() * (z - c));
    (lead, tail)
}

/// Equal-size (`n = m`) form of the general bound, scaled `z`:
/// `exp(-4z(z - sqrt(log 2))) + sqrt(32 pi) z exp(-2z^2) erf(sqrt(2)(z - sqrt(log 2)))`.
///
/// Valid for `z >= sqrt(log 2)`, where it equals exactly 1.
pub fn alpha1(z: f64) -> TailBoundResult {
    let (lead, tail) = alpha_parts(z);
    let raw = lead + (32.0 * PI).sqrt() * tail;
    TailBoundResult::new(Family::Alpha1, z, raw, z >= LN_2.sqrt())
}

/// Equal-size form of the sharper bound, scaled `z`:
/// `min(1, 3/2 exp(-4z(z - sqrt(log 2))) + sqrt(8 pi) z exp(-2z^2) erf(...))`.
pub fn alpha2(z: f64) -> TailBoundResult {
    let (lead, tail) = alpha_parts(z);
    let raw = (1.5 * lead + (8.0 * PI).sqrt() * tail).min(1.0);
    TailBoundResult::new(Family::Alpha2, z, raw, z >= LN_2.sqrt())
}

/// Smirnov's asymptotic two-sample p-value `1 - L(sqrt(nm/(n+m)) d)`.
///
/// Only an approximation for finite samples.
pub fn smirnov_p_two_sample(n: usize, m: usize, d: f64) -> Result<f64> {
    check_sizes(n, m)?;
    check_distance(d)?;
    let scale = (n as f64 * m as f64 / (n + m) as f64).sqrt();
    asymptotic_p(scale * d)
}

/// Kolmogorov's asymptotic one-sample p-value `1 - L(sqrt(n) d)`.
///
/// Only an approximation for finite samples.
pub fn kolmogorov_p_one_sample(n: usize, d: f64) -> Result<f64> {
    check_sizes(n, 1)?;
    check_distance(d)?;
    asymptotic_p((n as f64).sqrt() * d)
}

fn check_distance(d: f64) -> Result<()> {
    if (0.0..=1.0).contains(&d) {
        Ok(())
    } else {
        domain(format!("KS distance must lie in [0, 1], got {d}"))
    }
}

fn asymptotic_p(z: f64) -> Result<f64> {
    if z == 0.0 {
        // L(0+) = 0
        return Ok(1.0);
    }
    Ok(1.0 - kolmogorov_l(z)?)
}
