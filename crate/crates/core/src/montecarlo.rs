//! Seeded simulation harness measuring exceedance frequencies of KS
//! deviations and comparing them with the tail bounds.
//!
//! Trial `i` draws from a ChaCha8 generator seeded with the master seed on
//! stream `i`, so results do not depend on how trials are scheduled across
//! threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{Family, TailBoundResult, TailQuery};
use crate::distributions::{true_ks_distance, ContinuousDist};
use crate::ecdf::{ks_one_sample, ks_two_sample};
use crate::error::{domain, Result};
use crate::format::fmt_sig;
use crate::inference::{one_sample_ci, two_sample_ci, CiMethod};

/// Number of binomial standard errors allowed above a bound.
pub const SLACK_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Distribution of the first sample.
    pub f: ContinuousDist,
    /// Reference distribution (one-sample) or distribution of the second sample.
    pub g: ContinuousDist,
    pub n: usize,
    /// Size of the second sample; 0 selects one-sample mode.
    pub m: usize,
    pub trials: usize,
    /// Thresholds: scaled by `sqrt(n)` in one-sample mode and by `sqrt(n/2)`
    /// for equal two-sample sizes; unscaled deviations when `n != m`.
    pub z_grid: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    OneSample,
    TwoSampleEqual,
    TwoSampleUnequal,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return domain("n must be >= 1");
        }
        if self.trials == 0 {
            return domain("trials must be >= 1");
        }
        if self.z_grid.is_empty() {
            return domain("z grid must not be empty");
        }
        if self.z_grid.iter().any(|z| !(*z >= 0.0) || !z.is_finite()) {
            return domain("z grid values must be finite and >= 0");
        }
        if self.z_grid.windows(2).any(|w| w[1] <= w[0]) {
            return domain("z grid must be strictly increasing");
        }
        Ok(())
    }

    pub fn mode(&self) -> SimMode {
        if self.m == 0 {
            SimMode::OneSample
        } else if self.n == self.m {
            SimMode::TwoSampleEqual
        } else {
            SimMode::TwoSampleUnequal
        }
    }

    /// Bound families compared against in this configuration.
    pub fn families(&self) -> Vec<Family> {
        let same = self.f == self.g;
        match self.mode() {
            SimMode::OneSample if same => vec![Family::Prop1, Family::Dkwm],
            SimMode::OneSample => vec![Family::Prop1],
            SimMode::TwoSampleEqual => {
                let mut v = vec![Family::Alpha1, Family::Alpha2];
                if same && self.n >= crate::bounds::WEI_DUDLEY_MIN_N {
                    v.push(Family::WeiDudley);
                }
                v
            }
            SimMode::TwoSampleUnequal => vec![Family::Prop2a, Family::Prop2b],
        }
    }

    /// Factor turning a raw deviation into the units of `z_grid`.
    pub fn scale(&self) -> f64 {
        match self.mode() {
            SimMode::OneSample => (self.n as f64).sqrt(),
            SimMode::TwoSampleEqual => (self.n as f64 / 2.0).sqrt(),
            SimMode::TwoSampleUnequal => 1.0,
        }
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Observed KS distance of trial `i`: `d(F_n, G)` or `d(F_n, G_m)`.
fn trial_distance(cfg: &SimConfig, trial: usize) -> f64 {
    let mut rng = trial_rng(cfg.seed, trial);
    let x = cfg.f.sample_with(&mut rng, cfg.n);
    if cfg.m == 0 {
        ks_one_sample(&x, &cfg.g).d
    } else {
        let y = cfg.g.sample_with(&mut rng, cfg.m);
        ks_two_sample(&x, &y)
    }
}

/// Observed KS distances of all trials, in trial order.
pub fn observed_distances(cfg: &SimConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    Ok((0..cfg.trials)
        .into_par_iter()
        .map(|i| trial_distance(cfg, i))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub z: f64,
    pub exceedances: usize,
    pub empirical: f64,
    /// `sqrt(p (1 - p) / trials)`
    pub binom_se: f64,
    /// One entry per family of the report.
    pub bounds: Vec<TailBoundResult>,
    /// `None` where the bound is invalid at `z` or there is a single trial.
    pub pass: Vec<Option<bool>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub mode: SimMode,
    pub trials: usize,
    pub d_true: f64,
    pub families: Vec<Family>,
    pub rows: Vec<SimRow>,
}

/// A grid cell where the empirical frequency exceeded bound + slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Failure {
    pub family: Family,
    pub z: f64,
    /// `empirical - (bound + slack)`, positive.
    pub margin: f64,
}

impl SimReport {
    pub fn all_pass(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn failures(&self) -> Vec<Failure> {
        let mut out = Vec::new();
        for row in &self.rows {
            for (b, p) in row.bounds.iter().zip(&row.pass) {
                if *p == Some(false) {
                    out.push(Failure {
                        family: b.family,
                        z: row.z,
                        margin: row.empirical - (b.clipped + SLACK_SIGMAS * row.binom_se),
                    });
                }
            }
        }
        out
    }

    /// CSV with columns `z, empirical, se`, then per family the bound value,
    /// the gap `bound - empirical`, and the pass flag (`true`/`false`/`na`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z,empirical,se");
        for f in &self.families {
            out.push_str(&format!(",{f},gap_{f},pass_{f}"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{}",
                fmt_sig(row.z),
                fmt_sig(row.empirical),
                fmt_sig(row.binom_se)
            ));
            for (b, p) in row.bounds.iter().zip(&row.pass) {
                let flag = match p {
                    Some(true) => "true",
                    Some(false) => "false",
                    None => "na",
                };
                out.push_str(&format!(
                    ",{},{},{flag}",
                    fmt_sig(b.clipped),
                    fmt_sig(b.clipped - row.empirical)
                ));
            }
            out.push('\n');
        }
        out
    }
}

fn build_report(cfg: &SimConfig, deviations: &[f64], d_true: f64) -> Result<SimReport> {
    let families = cfg.families();
    let trials = cfg.trials as f64;
    let mut rows = Vec::with_capacity(cfg.z_grid.len());
    for &z in &cfg.z_grid {
        let exceedances = deviations.iter().filter(|&&d| d > z).count();
        let p = exceedances as f64 / trials;
        let se = (p * (1.0 - p) / trials).sqrt();
        let mut bounds = Vec::with_capacity(families.len());
        let mut pass = Vec::with_capacity(families.len());
        for &fam in &families {
            let b = fam.evaluate(&TailQuery {
                z,
                n: cfg.n,
                m: cfg.m.max(1),
            })?;
            pass.push((b.valid && cfg.trials > 1).then_some(p <= b.clipped + SLACK_SIGMAS * se));
            bounds.push(b);
        }
        rows.push(SimRow {
            z,
            exceedances,
            empirical: p,
            binom_se: se,
            bounds,
            pass,
        });
    }
    Ok(SimReport {
        mode: cfg.mode(),
        trials: cfg.trials,
        d_true,
        families,
        rows,
    })
}

fn run(cfg: &SimConfig) -> Result<SimReport> {
    let d_true = true_ks_distance(&cfg.f, &cfg.g);
    let scale = cfg.scale();
    let deviations: Vec<f64> = observed_distances(cfg)?
        .into_iter()
        .map(|d| scale * (d - d_true).abs())
        .collect();
    build_report(cfg, &deviations, d_true)
}

/// Exceedance frequencies of `sqrt(n) |d(F_n, G) - d(F, G)|`.
pub fn run_one_sample(cfg: &SimConfig) -> Result<SimReport> {
    if cfg.m != 0 {
        return domain("one-sample simulation requires m = 0");
    }
    run(cfg)
}

/// Exceedance frequencies of `|d(F_n, G_m) - d(F, G)|`, scaled by
/// `sqrt(n/2)` when `n = m`.
pub fn run_two_sample(cfg: &SimConfig) -> Result<SimReport> {
    if cfg.m == 0 {
        return domain("two-sample simulation requires m >= 1");
    }
    run(cfg)
}

/// Dispatches on `cfg.m`.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimReport> {
    if cfg.m == 0 {
        run_one_sample(cfg)
    } else {
        run_two_sample(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coverage {
    pub covered: usize,
    pub trials: usize,
    pub frequency: f64,
    /// `(1 - delta) - 3 sqrt(delta (1 - delta) / trials)`
    pub required: f64,
    pub d_true: f64,
}

impl Coverage {
    pub fn pass(&self) -> bool {
        self.frequency >= self.required
    }
}

/// Fraction of trials whose `method` interval at level `1 - delta` contains
/// the true distance.
pub fn coverage_check(cfg: &SimConfig, delta: f64, method: CiMethod) -> Result<Coverage> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0, 1), got {delta}"));
    }
    match (cfg.m == 0, method) {
        (true, CiMethod::Prop1) | (false, CiMethod::Prop2a | CiMethod::Prop2b | CiMethod::BestOf2a2b) => {}
        _ => return domain(format!("method {method} does not match the sampling mode")),
    }
    // Fail early on unreachable delta.
    if cfg.m != 0 {
        two_sample_ci(0.0, cfg.n, cfg.m, delta, method)?;
    }
    let d_true = true_ks_distance(&cfg.f, &cfg.g);
    let observed = observed_distances(cfg)?;
    let mut covered = 0usize;
    for d in observed {
        let ci = if cfg.m == 0 {
            one_sample_ci(d, cfg.n, delta)?
        } else {
            two_sample_ci(d, cfg.n, cfg.m, delta, method)?
        };
        if ci.contains(d_true) {
            covered += 1;
        }
    }
    let trials = cfg.trials as f64;
    Ok(Coverage {
        covered,
        trials: cfg.trials,
        frequency: covered as f64 / trials,
        required: (1.0 - delta) - SLACK_SIGMAS * (delta * (1.0 - delta) / trials).sqrt(),
        d_true,
    })
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(f: &str, g: &str, n: usize, m: usize, trials: usize) -> SimConfig {
        SimConfig {
            f: f.parse().unwrap(),
            g: g.parse().unwrap(),
            n,
            m,
            trials,
            z_grid: linspace(0.6, 2.0, 15),
            seed: 42,
        }
    }

    #[test]
    fn config_validation() {
        let mut c = cfg("uniform:0,1", "uniform:0,1", 10, 0, 10);
        assert!(c.validate().is_ok());
        c.trials = 0;
        assert!(c.validate().is_err());
        c.trials = 10;
        c.z_grid = vec![1.0, 0.5];
        assert!(c.validate().is_err());
        c.z_grid = vec![];
        assert!(c.validate().is_err());
        c.z_grid = vec![-1.0];
        assert!(c.validate().is_err());
        c.z_grid = vec![1.0];
        c.n = 0;
        assert!(run_one_sample(&c).is_err());
    }

    #[test]
    fn mode_and_families() {
        let c = cfg("uniform:0,1", "uniform:0,1", 10, 0, 10);
        assert_eq!(c.families(), vec![Family::Prop1, Family::Dkwm]);
        let c = cfg("exponential:1", "exponential:1", 100, 100, 10);
        assert_eq!(c.families(), vec![Family::Alpha1, Family::Alpha2, Family::WeiDudley]);
        let c = cfg("normal:0,1", "normal:1,1", 100, 100, 10);
        assert_eq!(c.families(), vec![Family::Alpha1, Family::Alpha2]);
        let c = cfg("normal:0,1", "normal:1,1", 100, 300, 10);
        assert_eq!(c.mode(), SimMode::TwoSampleUnequal);
        assert_eq!(c.scale(), 1.0);
        assert!(run_one_sample(&c).is_err());
        let c = cfg("normal:0,1", "normal:1,1", 100, 0, 10);
        assert!(run_two_sample(&c).is_err());
    }

    #[test]
    fn single_trial_is_degenerate() {
        let c = cfg("uniform:0,1", "uniform:0,1", 50, 0, 1);
        let r = run_one_sample(&c).unwrap();
        for row in &r.rows {
            assert!(row.empirical == 0.0 || row.empirical == 1.0);
            assert_eq!(row.binom_se, 0.0);
            assert!(row.pass.iter().all(Option::is_none));
        }
        assert!(r.all_pass());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let c = cfg("normal:0,1", "normal:1,1", 40, 40, 300);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_two_sample(&c)).unwrap();
        let b = four.install(|| run_two_sample(&c)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn dkwm_special_case() {
        let mut c = cfg("uniform:0,1", "uniform:0,1", 100, 0, 2000);
        c.seed = 3;
        let r = run_one_sample(&c).unwrap();
        assert_eq!(r.d_true, 0.0);
        assert!(r.all_pass(), "{:?}", r.failures());
        // Prop 1 and DKWM coincide when F = G.
        for row in &r.rows {
            assert_eq!(row.bounds[0].raw, row.bounds[1].raw);
        }
    }

    #[test]
    fn coverage_rejects_bad_inputs() {
        let c = cfg("normal:0,1", "normal:0.5,1", 50, 0, 10);
        assert!(coverage_check(&c, 0.0, CiMethod::Prop1).is_err());
        assert!(coverage_check(&c, 0.1, CiMethod::Prop2b).is_err());
        let c2 = cfg("normal:0,1", "normal:0.5,1", 50, 50, 10);
        assert!(coverage_check(&c2, 0.1, CiMethod::Prop1).is_err());
    }

    #[test]
    fn csv_layout() {
        let c = cfg("normal:0,1", "normal:1,1", 30, 30, 20);
        let csv = run_two_sample(&c).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "z,empirical,se,alpha1,gap_alpha1,pass_alpha1,alpha2,gap_alpha2,pass_alpha2"
        );
        assert_eq!(lines.count(), 15);
    }
}
