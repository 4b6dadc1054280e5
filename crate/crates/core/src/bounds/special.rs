//! Special functions: the error function and the Kolmogorov distribution
//! function `L(z)`.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Terms smaller than this end a series.
const SERIES_EPS: f64 = 1e-15;

/// Hard cap on series length. Neither form of `L(z)` comes close for any
/// `z` where it is selected.
const MAX_TERMS: usize = 10_000;

/// The error function, accurate to about one ulp.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// The complementary error function `1 - erf(x)`, without cancellation for
/// large positive `x`.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Kolmogorov's limiting distribution `L(z) = lim Prob(sqrt(n) d(F_n, F) <= z)`.
///
/// Uses the theta-function series for `z < 1` and the alternating series for
/// `z >= 1`; the two agree to rounding error where both converge.
pub fn kolmogorov_l(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return domain(format!("L(z) requires finite z > 0, got {z}"));
    }
    let value = if z < 1.0 {
        kolmogorov_l_theta(z)
    } else {
        kolmogorov_l_alternating(z)
    };
    Ok(value.clamp(0.0, 1.0))
}

/// `L(z) = 1 - 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 z^2)`.
///
/// Converges quickly for large `z`; loses accuracy as `z -> 0`.
pub fn kolmogorov_l_alternating(z: f64) -> f64 {
    let z2 = z * z;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=MAX_TERMS {
        let k = k as f64;
        let term = (-2.0 * k * k * z2).exp();
        sum += sign * term;
        if term < SERIES_EPS {
            break;
        }
        sign = -sign;
    }
    1.0 - 2.0 * sum
}

/// `L(z) = sqrt(2 pi) / z * sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 z^2))`.
///
/// Converges quickly for small `z`.
pub fn kolmogorov_l_theta(z: f64) -> f64 {
    let c = PI * PI / (8.0 * z * z);
    let mut sum = 0.0;
    for k in 1..=MAX_TERMS {
        let odd = (2 * k - 1) as f64;
        let term = (-odd * odd * c).exp();
        sum += term;
        if term < SERIES_EPS {
            break;
        }
    }
    (2.0 * PI).sqrt() / z * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Maclaurin series erf(x) = 2/sqrt(pi) sum (-1)^k x^(2k+1) / (k! (2k+1)),
    /// summed until the alternating remainder bound drops below 1e-17.
    fn erf_series(x: f64) -> f64 {
        let mut term = x; // (-1)^k x^(2k+1) / k!
        let mut sum = 0.0;
        let mut k = 0u32;
        loop {
            let contrib = term / (2 * k + 1) as f64;
            sum += contrib;
            if contrib.abs() < 1e-17 && k > 2 {
                break;
            }
            k += 1;
            term *= -x * x / k as f64;
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn erf_basic_values() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(6.0) - 1.0).abs() < 1e-12);
        assert!((erf(1.0) - erf_series(1.0)).abs() < 1e-12);
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
    }

    #[test]
    fn erf_matches_series_and_is_odd() {
        // The series loses digits to cancellation beyond |x| ~ 3, where the
        // asymptotic tail takes over.
        let mut prev = -1.0;
        for i in 0..=1200 {
            let x = -6.0 + 0.01 * i as f64;
            let v = erf(x);
            assert!(v >= prev, "erf not monotone at {x}");
            prev = v;
            assert_eq!(erf(-x), -v);
            if x.abs() <= 3.0 {
                assert!((v - erf_series(x)).abs() < 1e-12, "x = {x}");
            } else {
                // erfc(x) < exp(-x^2) / (x sqrt(pi)) for x > 0.
                let tail = (-x * x).exp() / (x.abs() * PI.sqrt());
                assert!((1.0 - v.abs()) <= tail + 1e-16, "x = {x}");
            }
        }
    }

    #[test]
    fn erfc_complements_erf() {
        for x in [-2.0, -0.3, 0.0, 0.7, 1.9] {
            assert!((erfc(x) - (1.0 - erf(x))).abs() < 1e-15);
        }
        assert!(erfc(10.0) > 0.0);
    }

    #[test]
    fn kolmogorov_l_limits() {
        assert!(kolmogorov_l(0.05).unwrap() < 1e-12);
        assert!((kolmogorov_l(4.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(kolmogorov_l(0.0).is_err());
        assert!(kolmogorov_l(-1.0).is_err());
        assert!(kolmogorov_l(f64::NAN).is_err());
    }

    #[test]
    fn kolmogorov_l_forms_agree_at_one() {
        let a = kolmogorov_l_alternating(1.0);
        let t = kolmogorov_l_theta(1.0);
        assert!((a - t).abs() < 1e-12);
        // Value recorded from the cross-check.
        assert!((a - 0.730_000_328_322_645_9).abs() < 1e-12, "{a}");
    }

    #[test]
    fn kolmogorov_l_forms_agree_on_grid() {
        for i in 0..500 {
            let z = 0.3 + 2.7 * i as f64 / 499.0;
            let a = kolmogorov_l_alternating(z);
            let t = kolmogorov_l_theta(z);
            assert!((a - t).abs() < 1e-10, "z = {z}: {a} vs {t}");
        }
    }
}
