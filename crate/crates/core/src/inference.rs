//! Confidence intervals for `d(F, G)` obtained by inverting the tail bounds,
//! and one-/two-sample reports.

use std::fmt;
use std::str::FromStr;

use crate::bounds::{
    alpha1, alpha2, dkwm_tail, kolmogorov_p_one_sample, prop2a_tail_general, prop2b_tail_general, smirnov_p_two_sample,
    wei_dudley_constant, Family, TailBoundResult,
};
use crate::distributions::ContinuousDist;
use crate::ecdf::{ks_one_sample, ks_two_sample, KsOneSampleStats, Sample};
use crate::error::{domain, Error, Result};

/// Bisection stops once the bracket is this narrow.
const Z_TOL: f64 = 1e-13;
/// Upper limit of the bracket search.
const Z_CAP: f64 = 1e3;

/// Smallest `z >= lower` with `bound(z).raw <= delta`, for a bound that is
/// nonincreasing on `[lower, inf)`.
pub fn invert_tail(bound: impl Fn(f64) -> Result<TailBoundResult>, lower: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return domain(format!("delta must lie in (0, 1], got {delta}"));
    }
    let at_lower = bound(lower)?.raw;
    if at_lower <= delta {
        return Ok(lower);
    }
    let mut lo = lower;
    let mut step = 1.0f64.max(lower);
    let mut hi = lower + step;
    loop {
        let v = bound(hi)?.raw;
        if v <= delta {
            break;
        }
        if v > at_lower {
            return Err(Error::Internal(format!(
                "bound increases between z = {lower} and z = {hi}"
            )));
        }
        lo = hi;
        step *= 2.0;
        hi = lower + step;
        if hi > Z_CAP {
            return Err(Error::Unreachable {
                delta,
                min_attainable: bound(Z_CAP)?.raw,
                max_attainable: at_lower,
            });
        }
    }
    while hi - lo > Z_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if bound(mid)?.raw <= delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Inverts a named family. `n` and `m` are needed only by the families that
/// depend on them. DKWM, Prop. 1 and Wei-Dudley use their closed-form inverse.
pub fn invert_family(family: Family, n: usize, m: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return domain(format!("delta must lie in (0, 1], got {delta}"));
    }
    match family {
        Family::Dkwm | Family::Prop1 => Ok(closed_form_inverse(2.0, delta)),
        Family::WeiDudley => {
            if n != m {
                return Err(Error::Unsupported(format!(
                    "Wei-Dudley bound requires n = m, got n = {n}, m = {m}"
                )));
            }
            Ok(closed_form_inverse(wei_dudley_constant(n)?, delta))
        }
        _ => {
            let q = |z| family.evaluate(&crate::bounds::TailQuery { z, n, m });
            invert_tail(q, family.validity_edge(n, m), delta)
        }
    }
}

/// Solves `c exp(-2 z^2) = delta` for `z >= 0`.
fn closed_form_inverse(c: f64, delta: f64) -> f64 {
    ((c / delta).ln() / 2.0).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CiMethod {
    Prop1,
    Prop2a,
    Prop2b,
    /// Pointwise minimum of the 2a and 2b bounds.
    BestOf2a2b,
}

impl CiMethod {
    pub fn name(self) -> &'static str {
        match self {
            CiMethod::Prop1 => "prop1",
            CiMethod::Prop2a => "prop2a",
            CiMethod::Prop2b => "prop2b",
            CiMethod::BestOf2a2b => "best_of_2a_2b",
        }
    }
}

impl fmt::Display for CiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prop1" => Ok(CiMethod::Prop1),
            "prop2a" => Ok(CiMethod::Prop2a),
            "prop2b" => Ok(CiMethod::Prop2b),
            "best_of_2a_2b" | "best" => Ok(CiMethod::BestOf2a2b),
            _ => domain(format!(
                "unknown CI method '{s}' (expected prop1, prop2a, prop2b or best_of_2a_2b)"
            )),
        }
    }
}

/// Symmetric interval for `d(F, G)` around an observed KS distance, clipped
/// to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width: f64,
    pub lo: f64,
    pub hi: f64,
    /// `1 - delta`
    pub level: f64,
    pub method: CiMethod,
}

impl ConfidenceInterval {
    fn new(center: f64, half_width: f64, delta: f64, method: CiMethod) -> Self {
        Self {
            center,
            half_width,
            lo: (center - half_width).max(0.0),
            hi: (center + half_width).min(1.0),
            level: 1.0 - delta,
            method,
        }
    }

    pub fn contains(&self, d: f64) -> bool {
        self.lo <= d && d <= self.hi
    }
}

fn check_ci_inputs(d_obs: f64, delta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&d_obs) {
        return domain(format!("observed distance must lie in [0, 1], got {d_obs}"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0, 1), got {delta}"));
    }
    Ok(())
}

/// Interval for `d(F, G)` from `d(F_n, G)`: half-width `sqrt(ln(2/delta) / (2n))`.
pub fn one_sample_ci(d_obs: f64, n: usize, delta: f64) -> Result<ConfidenceInterval> {
    check_ci_inputs(d_obs, delta)?;
    if n == 0 {
        return domain("n must be >= 1");
    }
    let half = ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt();
    Ok(ConfidenceInterval::new(d_obs, half, delta, CiMethod::Prop1))
}

/// Half-width of the two-sample interval; independent of the observed distance.
pub fn two_sample_half_width(n: usize, m: usize, delta: f64, method: CiMethod) -> Result<f64> {
    if n == 0 || m == 0 {
        return domain(format!("sample sizes must be >= 1, got n = {n}, m = {m}"));
    }
    if n == m {
        let z = match method {
            CiMethod::Prop2a => invert_family(Family::Alpha1, n, n, delta)?,
            CiMethod::Prop2b => invert_family(Family::Alpha2, n, n, delta)?,
            CiMethod::BestOf2a2b => invert_tail(
                |z| {
                    let (a, b) = (alpha1(z), alpha2(z));
                    Ok(if a.raw <= b.raw { a } else { b })
                },
                Family::Alpha1.validity_edge(n, n),
                delta,
            )?,
            CiMethod::Prop1 => return Err(prop1_two_sample()),
        };
        Ok(z * (2.0 / n as f64).sqrt())
    } else {
        match method {
            CiMethod::Prop2a => invert_family(Family::Prop2a, n, m, delta),
            CiMethod::Prop2b => invert_family(Family::Prop2b, n, m, delta),
            CiMethod::BestOf2a2b => invert_tail(
                |z| {
                    let (a, b) = (prop2a_tail_general(n, m, z)?, prop2b_tail_general(n, m, z)?);
                    Ok(if a.raw <= b.raw { a } else { b })
                },
                Family::Prop2a.validity_edge(n, m),
                delta,
            ),
            CiMethod::Prop1 => Err(prop1_two_sample()),
        }
    }
}

fn prop1_two_sample() -> Error {
    Error::Domain("prop1 is a one-sample method".into())
}

/// Interval for `d(F, G)` from `d(F_n, G_m)`. For `n = m` the equal-size
/// bounds are inverted in scaled units and converted with `sqrt(2/n)`.
pub fn two_sample_ci(d_obs: f64, n: usize, m: usize, delta: f64, method: CiMethod) -> Result<ConfidenceInterval> {
    check_ci_inputs(d_obs, delta)?;
    let half = two_sample_half_width(n, m, delta, method)?;
    Ok(ConfidenceInterval::new(d_obs, half, delta, method))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneSampleReport {
    pub n: usize,
    pub reference: String,
    pub stats: KsOneSampleStats,
    /// Asymptotic `1 - L(sqrt(n) d)`.
    pub kolmogorov_p: f64,
    /// Non-asymptotic `min(1, 2 exp(-2 n d^2))`.
    pub dkwm_p_bound: f64,
    pub ci: ConfidenceInterval,
}

pub fn one_sample_report(sample: &Sample, g: &ContinuousDist, delta: f64) -> Result<OneSampleReport> {
    let n = sample.len();
    let stats = ks_one_sample(sample, g);
    let scaled = (n as f64).sqrt() * stats.d;
    Ok(OneSampleReport {
        n,
        reference: g.name().to_string(),
        stats,
        kolmogorov_p: kolmogorov_p_one_sample(n, stats.d)?,
        dkwm_p_bound: dkwm_tail(scaled).clipped,
        ci: one_sample_ci(stats.d, n, delta)?,
    })
}

/// Wei-Dudley p-value bound, or the reason it does not apply.
#[derive(Debug, Clone, PartialEq)]
pub enum WeiDudleyP {
    Present { c: f64, p_bound: f64 },
    Omitted { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSampleReport {
    pub n: usize,
    pub m: usize,
    pub d: f64,
    /// Asymptotic `1 - L(sqrt(nm/(n+m)) d)`.
    pub smirnov_p: f64,
    pub wei_dudley: WeiDudleyP,
    pub ci_prop2a: ConfidenceInterval,
    pub ci_prop2b: ConfidenceInterval,
    pub ci_best: ConfidenceInterval,
}

pub fn two_sample_report(x: &Sample, y: &Sample, delta: f64) -> Result<TwoSampleReport> {
    let (n, m) = (x.len(), y.len());
    let d = ks_two_sample(x, y);
    let wei_dudley = if n != m {
        WeiDudleyP::Omitted {
            reason: format!("requires equal sample sizes (n = {n}, m = {m})"),
        }
    } else {
        match wei_dudley_constant(n) {
            Ok(c) => WeiDudleyP::Present {
                c,
                p_bound: (c * (-(n as f64) * d * d).exp()).min(1.0),
            },
            Err(_) => WeiDudleyP::Omitted {
                reason: format!("constant only known for n >= 4 (n = {n})"),
            },
        }
    };
    Ok(TwoSampleReport {
        n,
        m,
        d,
        smirnov_p: smirnov_p_two_sample(n, m, d)?,
        wei_dudley,
        ci_prop2a: two_sample_ci(d, n, m, delta, CiMethod::Prop2a)?,
        ci_prop2b: two_sample_ci(d, n, m, delta, CiMethod::Prop2b)?,
        ci_best: two_sample_ci(d, n, m, delta, CiMethod::BestOf2a2b)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn invert_examples() {
        let z = invert_family(Family::Dkwm, 1, 1, 0.05).unwrap();
        assert!((z - (40f64.ln() / 2.0).sqrt()).abs() < 1e-15);

        let z = invert_family(Family::Alpha1, 1, 1, 1.0).unwrap();
        assert_eq!(z, LN_2.sqrt());

        let z = invert_family(Family::Alpha2, 1, 1, 0.05).unwrap();
        assert!((alpha2(z).raw - 0.05).abs() < 1e-9);
        assert!(alpha2(z - 1e-9).raw > 0.05);
    }

    #[test]
    fn invert_rejects_bad_delta() {
        assert!(invert_family(Family::Alpha2, 1, 1, 0.0).is_err());
        assert!(invert_family(Family::Alpha2, 1, 1, 1.5).is_err());
        assert!(matches!(
            invert_family(Family::WeiDudley, 3, 3, 0.1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn unreachable_and_nonmonotone() {
        // A bound that never drops below 0.5.
        let r = invert_tail(
            |z| {
                Ok(TailBoundResult {
                    raw: 0.5 + (-z).exp(),
                    ..alpha1(z)
                })
            },
            0.0,
            0.1,
        );
        assert!(matches!(r, Err(Error::Unreachable { .. })));

        let r = invert_tail(
            |z| {
                Ok(TailBoundResult {
                    raw: 0.5 + z,
                    ..alpha1(z)
                })
            },
            0.0,
            0.1,
        );
        assert!(matches!(r, Err(Error::Internal(_))));
    }

    #[test]
    fn one_sample_ci_examples() {
        let ci = one_sample_ci(0.3, 100, 0.05).unwrap();
        let h = (40f64.ln() / 200.0).sqrt();
        assert!((ci.half_width - h).abs() < 1e-15);
        assert!((ci.lo - (0.3 - h)).abs() < 1e-15 && (ci.hi - (0.3 + h)).abs() < 1e-15);
        assert_eq!(ci.level, 0.95);

        assert_eq!(one_sample_ci(0.01, 100, 0.05).unwrap().lo, 0.0);

        let ci = one_sample_ci(0.5, 100, 1.0 - 1e-12).unwrap();
        assert!((ci.half_width - (LN_2 / 200.0).sqrt()).abs() < 1e-9);
        assert!(one_sample_ci(0.5, 100, 0.0).is_err());
        assert!(one_sample_ci(1.5, 100, 0.1).is_err());
    }

    #[test]
    fn two_sample_ci_examples() {
        let ci = two_sample_ci(0.25, 200, 200, 0.05, CiMethod::Prop2b).unwrap();
        let z = ci.half_width * 10.0;
        assert!((alpha2(z).raw - 0.05).abs() < 1e-9);

        let ci = two_sample_ci(0.25, 200, 200, 0.999, CiMethod::Prop2b).unwrap();
        let z = ci.half_width * 10.0;
        assert!(z > 0.9826 && z < 0.985, "{z}");

        let best = two_sample_ci(0.3, 100, 200, 0.05, CiMethod::BestOf2a2b).unwrap();
        let a = two_sample_ci(0.3, 100, 200, 0.05, CiMethod::Prop2a).unwrap();
        let b = two_sample_ci(0.3, 100, 200, 0.05, CiMethod::Prop2b).unwrap();
        assert!(best.half_width <= a.half_width && best.half_width <= b.half_width);
        assert!((best.half_width - a.half_width.min(b.half_width)).abs() < 1e-12);

        assert!(two_sample_ci(0.3, 0, 200, 0.05, CiMethod::Prop2a).is_err());
        assert!(two_sample_ci(0.3, 10, 20, 0.05, CiMethod::Prop1).is_err());
    }

    #[test]
    fn equal_and_general_forms_agree() {
        // The n = m path goes through alpha_i; the general path must match.
        for method in [CiMethod::Prop2a, CiMethod::Prop2b] {
            let h = two_sample_half_width(150, 150, 0.1, method).unwrap();
            let fam = if method == CiMethod::Prop2a {
                Family::Prop2a
            } else {
                Family::Prop2b
            };
            let z = invert_tail(
                |z| fam.evaluate(&crate::bounds::TailQuery { z, n: 150, m: 150 }),
                fam.validity_edge(150, 150),
                0.1,
            )
            .unwrap();
            assert!((h - z).abs() < 1e-10);
        }
    }

    #[test]
    fn reports() {
        let u = ContinuousDist::uniform(0.0, 1.0).unwrap();
        let s = Sample::new(vec![0.5]).unwrap();
        let r = one_sample_report(&s, &u, 0.05).unwrap();
        assert_eq!(r.stats.d, 0.5);
        assert!((r.ci.half_width - (40f64.ln() / 2.0).sqrt()).abs() < 1e-15);
        assert_eq!((r.ci.lo, r.ci.hi), (0.0, 1.0));

        let x = Sample::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let r = two_sample_report(&x, &x, 0.05).unwrap();
        assert_eq!(r.d, 0.0);
        assert_eq!(
            r.wei_dudley,
            WeiDudleyP::Present {
                c: 2.16863,
                p_bound: 1.0
            }
        );
        assert!(r.ci_prop2a.lo == 0.0 && r.ci_prop2b.lo == 0.0 && r.ci_best.lo == 0.0);

        let x5 = Sample::new((0..5).map(f64::from).collect()).unwrap();
        let y7 = Sample::new((0..7).map(|i| f64::from(i) + 0.5).collect()).unwrap();
        let r = two_sample_report(&x5, &y7, 0.05).unwrap();
        assert!(matches!(r.wei_dudley, WeiDudleyP::Omitted { .. }));
        assert!(r.ci_prop2b.half_width > 0.0);
    }
}
