//! Analytic continuous distributions used as ground truth `F` and `G`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::erfc;
use crate::ecdf::Sample;
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistKind {
    Normal { mu: f64, sigma: f64 },
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
}

/// A continuous distribution with closed-form CDF and quantile function.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousDist {
    kind: DistKind,
    name: String,
}

impl ContinuousDist {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !(sigma > 0.0) || !sigma.is_finite() {
            return domain(format!("normal requires finite mu and sigma > 0, got ({mu}, {sigma})"));
        }
        Ok(Self {
            kind: DistKind::Normal { mu, sigma },
            name: format!("normal:{mu},{sigma}"),
        })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || !(b > a) {
            return domain(format!("uniform requires finite a < b, got ({a}, {b})"));
        }
        Ok(Self {
            kind: DistKind::Uniform { a, b },
            name: format!("uniform:{a},{b}"),
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return domain(format!("exponential requires rate > 0, got {rate}"));
        }
        Ok(Self {
            kind: DistKind::Exponential { rate },
            name: format!("exponential:{rate}"),
        })
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    /// Display name, in the same `family:params` syntax accepted by [`FromStr`].
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            DistKind::Normal { mu, sigma } => std_normal_cdf((x - mu) / sigma),
            DistKind::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            DistKind::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        }
    }

    /// Inverse CDF on the open interval `(0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("quantile requires 0 < p < 1, got {p}"));
        }
        Ok(self.quantile_unchecked(p))
    }

    fn quantile_unchecked(&self, p: f64) -> f64 {
        match self.kind {
            DistKind::Normal { mu, sigma } => mu + sigma * std_normal_quantile(p),
            DistKind::Uniform { a, b } => a + p * (b - a),
            DistKind::Exponential { rate } => -(-p).ln_1p() / rate,
        }
    }

    /// `n` i.i.d. draws by inverse transform on a ChaCha8 stream seeded
    /// with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample> {
        if n == 0 {
            return domain("sample size must be >= 1");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(self.sample_with(&mut rng, n))
    }

    /// `n >= 1` draws from an arbitrary generator.
    pub(crate) fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Sample {
        let values = (0..n).map(|_| self.quantile_unchecked(rng.sample(Open01))).collect();
        Sample::new(values).expect("inverse transform yields finite values")
    }

    /// Interval containing all but `tail` of the probability mass on each side.
    pub(crate) fn central_range(&self, tail: f64) -> (f64, f64) {
        (self.quantile_unchecked(tail), self.quantile_unchecked(1.0 - tail))
    }
}

impl fmt::Display for ContinuousDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Parses `normal:mu,sigma`, `uniform:a,b` or `exponential:rate`.
impl FromStr for ContinuousDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Domain(format!(
                "invalid distribution '{s}' (expected normal:mu,sigma | uniform:a,b | exponential:rate)"
            ))
        };
        let (family, params) = s.trim().split_once(':').ok_or_else(bad)?;
        let params: Vec<f64> = params
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        match (family.trim(), params.as_slice()) {
            ("normal", [mu, sigma]) => Self::normal(*mu, *sigma),
            ("uniform", [a, b]) => Self::uniform(*a, *b),
            ("exponential", [rate]) => Self::exponential(*rate),
            _ => Err(bad()),
        }
    }
}

/// Standard normal CDF via `erfc`, keeping full relative accuracy in the
/// lower tail.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal quantile: Acklam's rational approximation (relative
/// error about 1e-9) polished by two Halley steps.
pub fn std_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let mut x = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (-p).ln_1p()).sqrt())
    };

    for _ in 0..2 {
        // Residual measured on the smaller tail to avoid cancellation.
        let e = if x <= 0.0 {
            std_normal_cdf(x) - p
        } else {
            (1.0 - p) - 0.5 * erfc(x / SQRT_2)
        };
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// `d(F, G) = sup_x |F(x) - G(x)|`.
///
/// Scans a uniform grid over the union of both distributions' central
/// 99.9999% mass, then refines every local maximum of the grid by golden
/// section search to an abscissa tolerance of 1e-10.
pub fn true_ks_distance(f: &ContinuousDist, g: &ContinuousDist) -> f64 {
    const GRID: usize = 4096;
    const TAIL: f64 = 5e-7;

    if f.kind == g.kind {
        return 0.0;
    }
    let (lf, hf) = f.central_range(TAIL);
    let (lg, hg) = g.central_range(TAIL);
    let (lo, hi) = (lf.min(lg), hf.max(hg));
    let gap = |x: f64| (f.cdf(x) - g.cdf(x)).abs();

    let step = (hi - lo) / (GRID - 1) as f64;
    let xs: Vec<f64> = (0..GRID).map(|i| lo + step * i as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| gap(x)).collect();

    let mut best = vals.iter().copied().fold(0.0, f64::max);
    for i in 0..GRID {
        let left = if i == 0 { f64::NEG_INFINITY } else { vals[i - 1] };
        let right = if i + 1 == GRID { f64::NEG_INFINITY } else { vals[i + 1] };
        if vals[i] >= left && vals[i] >= right && vals[i] > 0.0 {
            let a = if i == 0 { xs[0] - step } else { xs[i - 1] };
            let b = if i + 1 == GRID { xs[i] + step } else { xs[i + 1] };
            best = best.max(golden_max(&gap, a, b, 1e-10));
        }
    }
    best.min(1.0)
}

/// Maximum of `h` over `[a, b]` by golden-section search, assuming
/// unimodality on the bracket.
fn golden_max(h: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    let mut best = h(a).max(h(b)).max(hc).max(hd);
    while b - a > tol {
        if hc >= hd {
            b = d;
            d = c;
            hd = hc;
            c = b - inv_phi * (b - a);
            hc = h(c);
            best = best.max(hc);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + inv_phi * (b - a);
            hd = h(d);
            best = best.max(hd);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Vec<ContinuousDist> {
        vec![
            ContinuousDist::normal(0.0, 1.0).unwrap(),
            ContinuousDist::normal(1.0, 1.0).unwrap(),
            ContinuousDist::normal(0.0, 2.0).unwrap(),
            ContinuousDist::uniform(0.0, 1.0).unwrap(),
            ContinuousDist::uniform(0.2, 1.2).unwrap(),
            ContinuousDist::uniform(2.0, 3.0).unwrap(),
            ContinuousDist::exponential(1.0).unwrap(),
            ContinuousDist::exponential(2.0).unwrap(),
        ]
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(ContinuousDist::normal(0.0, 1.0).unwrap().cdf(0.0), 0.5);
        assert_eq!(ContinuousDist::uniform(0.0, 1.0).unwrap().cdf(0.25), 0.25);
        assert_eq!(ContinuousDist::exponential(2.0).unwrap().cdf(0.0), 0.0);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(ContinuousDist::uniform(2.0, 4.0).unwrap().quantile(0.5).unwrap(), 3.0);
        assert!(ContinuousDist::normal(0.0, 1.0).unwrap().quantile(0.5).unwrap().abs() < 1e-15);
        let e = ContinuousDist::exponential(1.0).unwrap();
        let p = 1.0 - (-1.0f64).exp();
        assert!((e.quantile(p).unwrap() - 1.0).abs() < 1e-12);
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(e.quantile(bad).is_err());
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for d in catalog() {
            for i in 1..2000 {
                let p = i as f64 / 2000.0;
                let x = d.quantile(p).unwrap();
                assert!((d.cdf(x) - p).abs() < 1e-9, "{d} p={p}");
            }
            let (lo, hi) = d.central_range(5e-5);
            for i in 0..=200 {
                let x = lo + (hi - lo) * i as f64 / 200.0;
                let back = d.quantile(d.cdf(x)).unwrap();
                assert!((back - x).abs() < 1e-9 * x.abs().max(1.0), "{d} x={x} back={back}");
            }
        }
    }

    #[test]
    fn normal_quantile_deep_tails() {
        for p in [1e-300, 1e-100, 1e-20, 1e-10, 1e-3] {
            let x = std_normal_quantile(p);
            assert!((std_normal_cdf(x) / p - 1.0).abs() < 1e-12, "p = {p}");
            if p >= 1e-10 {
                assert!((std_normal_quantile(1.0 - p) + x).abs() < 1e-6 * x.abs(), "p = {p}");
            }
        }
    }

    #[test]
    fn cdf_monotone() {
        for d in catalog() {
            let mut prev = 0.0;
            for i in 0..=4000 {
                let x = -10.0 + 0.005 * i as f64;
                let c = d.cdf(x);
                assert!(c >= prev && (0.0..=1.0).contains(&c));
                prev = c;
            }
        }
    }

    #[test]
    fn sampling() {
        let u = ContinuousDist::uniform(0.0, 1.0).unwrap();
        let s = u.sample(3, 7).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.values().iter().all(|&v| v > 0.0 && v < 1.0));
        assert_eq!(s, u.sample(3, 7).unwrap());
        assert_ne!(s, u.sample(3, 8).unwrap());
        assert!(u.sample(0, 7).is_err());

        let n = ContinuousDist::normal(0.0, 1.0).unwrap();
        let s = n.sample(10_000, 1).unwrap();
        let mean = s.values().iter().sum::<f64>() / 10_000.0;
        assert!(mean.abs() < 4.0 / 100.0, "mean = {mean}");
    }

    #[test]
    fn parse_specs() {
        let d: ContinuousDist = "normal:0,1".parse().unwrap();
        assert_eq!(d.kind(), DistKind::Normal { mu: 0.0, sigma: 1.0 });
        let d: ContinuousDist = "uniform: 0.2 , 1.2".parse().unwrap();
        assert_eq!(d.kind(), DistKind::Uniform { a: 0.2, b: 1.2 });
        let d: ContinuousDist = "exponential:2".parse().unwrap();
        assert_eq!(d.kind(), DistKind::Exponential { rate: 2.0 });
        assert_eq!(d.name().parse::<ContinuousDist>().unwrap(), d);
        for bad in [
            "normal:0",
            "normal:0,-1",
            "uniform:1,0",
            "gamma:1,2",
            "exponential",
            "normal:a,b",
        ] {
            assert!(bad.parse::<ContinuousDist>().is_err(), "{bad}");
        }
    }

    /// Dense-grid maximisation, independent of the refinement path.
    fn dense_grid_distance(f: &ContinuousDist, g: &ContinuousDist, lo: f64, hi: f64) -> f64 {
        let k = 200_000;
        (0..=k)
            .map(|i| lo + (hi - lo) * i as f64 / k as f64)
            .map(|x| (f.cdf(x) - g.cdf(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn true_distance_examples() {
        let n01 = ContinuousDist::normal(0.0, 1.0).unwrap();
        let n11 = ContinuousDist::normal(1.0, 1.0).unwrap();
        assert_eq!(true_ks_distance(&n01, &n01.clone()), 0.0);

        let exact = 2.0 * std_normal_cdf(0.5) - 1.0;
        let d = true_ks_distance(&n01, &n11);
        assert!((d - exact).abs() < 1e-12, "{d} vs {exact}");
        let grid = dense_grid_distance(&n01, &n11, -6.0, 7.0);
        assert!((d - grid).abs() < 1e-10);

        let u1 = ContinuousDist::uniform(0.0, 1.0).unwrap();
        let u2 = ContinuousDist::uniform(2.0, 3.0).unwrap();
        assert_eq!(true_ks_distance(&u1, &u2), 1.0);
    }

    #[test]
    fn true_distance_matches_dense_grid_on_catalog() {
        let cat = catalog();
        for f in &cat {
            for g in &cat {
                let d = true_ks_distance(f, g);
                let grid = dense_grid_distance(f, g, -8.0, 12.0);
                assert!(d + 1e-9 >= grid, "{f} vs {g}: {d} < {grid}");
                assert!(d <= grid + 1e-4, "{f} vs {g}: {d} > {grid}");
            }
        }
    }

    #[test]
    fn true_distance_is_a_metric_on_catalog() {
        let cat = catalog();
        for f in &cat {
            for g in &cat {
                let fg = true_ks_distance(f, g);
                assert!((fg - true_ks_distance(g, f)).abs() < 1e-12);
                assert_eq!(fg == 0.0, f == g, "{f} vs {g}");
                for h in &cat {
                    let tri = true_ks_distance(f, h) + true_ks_distance(h, g);
                    assert!(fg <= tri + 1e-12, "{f}, {g}, {h}");
                }
            }
        }
    }
}
