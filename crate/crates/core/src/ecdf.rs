//! Samples, empirical distribution functions and exact KS statistics.

use std::fs;
use std::path::Path;

use crate::distributions::ContinuousDist;
use crate::error::{domain, Error, Result};

/// A non-empty sample of finite observations, kept sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    /// Sorts `values`. Rejects empty input and any NaN or infinite entry.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return domain("sample must contain at least one observation");
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return domain(format!("observation {} is not finite ({})", i + 1, values[i]));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    /// Parses the sample file format: one decimal number per line; blank
    /// lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: None,
                line: idx + 1,
                message,
            };
            let v: f64 = line
                .parse()
                .map_err(|_| parse_err(format!("cannot parse '{line}' as a number")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("'{line}' is not a finite number")));
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(Error::Parse {
                path: None,
                line: 0,
                message: "no observations found".into(),
            });
        }
        Self::new(values)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::Parse {
                path: Some(path.to_path_buf()),
                line,
                message,
            },
            other => other,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Empirical CDF `F_n(x) = #{i : X_i <= x} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sample: Sample,
}

impl Ecdf {
    pub fn new(sample: Sample) -> Self {
        Self { sample }
    }

    pub fn n(&self) -> usize {
        self.sample.len()
    }

    pub fn sample(&self) -> &Sample {
        &self.sample
    }

    pub fn eval(&self, x: f64) -> f64 {
        let count = self.sample.values.partition_point(|&v| v <= x);
        count as f64 / self.n() as f64
    }
}

/// `build_ecdf` for parsed input; fails only on an empty slice.
pub fn build_ecdf(values: &[f64]) -> Result<Ecdf> {
    Ok(Ecdf::new(Sample::new(values.to_vec())?))
}

/// One-sample KS statistics: `d = sup|F_n - F|` and its two one-sided parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOneSampleStats {
    pub d: f64,
    /// `sup_x (F_n(x) - F(x))`
    pub sup_plus: f64,
    /// `sup_x (F(x) - F_n(x))`
    pub sup_minus: f64,
}

/// Exact one-sample statistics against an arbitrary continuous CDF.
///
/// Over the order statistics `X_(i)`, `sup_plus = max_i (i/n - F(X_(i)))` and
/// `sup_minus = max_i (F(X_(i)) - (i-1)/n)`, both clamped below at 0.
pub fn ks_one_sample_with(sample: &Sample, cdf: impl Fn(f64) -> f64) -> KsOneSampleStats {
    let n = sample.len() as f64;
    let (mut plus, mut minus) = (0.0f64, 0.0f64);
    for (i, &x) in sample.values.iter().enumerate() {
        let f = cdf(x);
        plus = plus.max((i + 1) as f64 / n - f);
        minus = minus.max(f - i as f64 / n);
    }
    let (plus, minus) = (plus.min(1.0), minus.min(1.0));
    KsOneSampleStats {
        d: plus.max(minus),
        sup_plus: plus,
        sup_minus: minus,
    }
}

pub fn ks_one_sample(sample: &Sample, f: &ContinuousDist) -> KsOneSampleStats {
    ks_one_sample_with(sample, |x| f.cdf(x))
}

/// Exact two-sample statistic `sup_x |F_n(x) - G_m(x)|` by a single merge
/// pass. Tied abscissae, within or across samples, are consumed together
/// before the step functions are compared.
pub fn ks_two_sample(x: &Sample, y: &Sample) -> f64 {
    let (xs, ys) = (&x.values, &y.values);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] == t {
            i += 1;
        }
        while j < ys.len() && ys[j] == t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    // Past this point one ECDF is 1 and the other only climbs toward it.
    d
}
