//! The `ksbound` command-line interface.
//!
//! [`run`] is a pure function of the argument list and file contents; it
//! returns captured output and the exit status instead of printing, so the
//! binary is a thin wrapper and tests can drive every subcommand in-process.
//!
//! Exit codes: 0 success, 1 statistical check failed, 2 input or usage
//! error, 3 numerical non-convergence.

mod figure;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

pub use figure::{figure_csv, figure_rows, FigureRow};

use crate::bounds::{Family, TailQuery};
use crate::distributions::ContinuousDist;
use crate::ecdf::Sample;
use crate::error::Error;
use crate::format::fmt_sig;
use crate::inference::{
    invert_family, one_sample_ci, one_sample_report, two_sample_ci, two_sample_report, CiMethod, ConfidenceInterval,
    WeiDudleyP,
};
use crate::montecarlo::{linspace, run_simulation, SimConfig, SimMode};
use crate::oracle::{default_z_points, verify_cell, QuadratureConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {}\n", msg.into()),
        }
    }

    fn from_error(err: Error) -> Self {
        let code = match err {
            Error::Convergence { .. } | Error::Internal(_) => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            stdout: String::new(),
            stderr: format!("error: {err}\n"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ksbound",
    version,
    about = "KS distance estimation with finite-sample deviation bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// KS statistic, p-values and a confidence interval for d(F, G).
    Ks(KsArgs),
    /// Evaluate a tail bound.
    Bound(BoundArgs),
    /// Smallest z at which a tail bound drops to delta.
    Invert(InvertArgs),
    /// Confidence interval for d(F, G) from an observed distance.
    Ci(CiArgs),
    /// Check the two-sample closed forms against numerical quadrature.
    Verify(VerifyArgs),
    /// Monte Carlo check of the bounds; CSV report.
    Simulate(SimulateArgs),
    /// CSV of L(z), 2exp(-2z^2), alpha1 and alpha2.
    Figure(FigureArgs),
}

#[derive(Debug, Args)]
struct KsArgs {
    /// One sample file (with --dist) or two sample files.
    #[arg(required = true, num_args = 1..=2)]
    files: Vec<PathBuf>,
    /// Reference distribution for the one-sample statistic, e.g. normal:0,1.
    #[arg(long)]
    dist: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Machine-readable output.
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Args)]
struct BoundArgs {
    /// dkwm, wd, prop1, prop2a, alpha1, prop2b or alpha2.
    #[arg(long)]
    family: String,
    #[arg(long)]
    z: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Debug, Args)]
struct InvertArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Debug, Args)]
struct CiArgs {
    /// Observed KS distance.
    #[arg(long)]
    d: f64,
    #[arg(long)]
    n: usize,
    /// Second sample size; omit for the one-sample interval.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// prop1, prop2a, prop2b or best_of_2a_2b.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Cells as `n=50,m=50,z=0.3`; several may be separated by `;` or by
    /// repeating the flag. Without `z` the ten default thresholds are used.
    #[arg(long)]
    grid: Vec<String>,
    #[arg(long, default_value_t = 1e-8)]
    abs_tol: f64,
    #[arg(long, default_value_t = 20)]
    max_subdivisions: u32,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    f: String,
    #[arg(long)]
    g: String,
    #[arg(long)]
    n: usize,
    /// Second sample size; 0 for one-sample mode.
    #[arg(long, default_value_t = 0)]
    m: usize,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    zmin: Option<f64>,
    #[arg(long)]
    zmax: Option<f64>,
    #[arg(long)]
    zsteps: Option<usize>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    #[arg(long, default_value_t = 3.0)]
    zmax: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
}

/// Runs one invocation; `args[0]` is the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code() as u8;
            let text = e.render().to_string();
            return if code == 0 {
                Outcome::ok(text)
            } else {
                Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let result = match cli.command {
        Command::Ks(a) => cmd_ks(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Invert(a) => cmd_invert(a),
        Command::Ci(a) => cmd_ci(a),
        Command::Verify(a) => return cmd_verify(a),
        Command::Simulate(a) => return cmd_simulate(a),
        Command::Figure(a) => cmd_figure(a),
    };
    result.unwrap_or_else(|o| o)
}

type CmdResult = std::result::Result<Outcome, Outcome>;

fn lift<T>(r: crate::Result<T>) -> std::result::Result<T, Outcome> {
    r.map_err(Outcome::from_error)
}

fn parse_dist(spec: &str) -> std::result::Result<ContinuousDist, Outcome> {
    spec.parse().map_err(|e: Error| Outcome::usage(e.to_string()))
}

fn ci_lines(out: &mut String, ci: &ConfidenceInterval) {
    let _ = writeln!(out, "ci_method       {}", ci.method);
    let _ = writeln!(out, "ci_level        {}", fmt_sig(ci.level));
    let _ = writeln!(out, "ci_half_width   {}", fmt_sig(ci.half_width));
    let _ = writeln!(out, "ci_lo           {}", fmt_sig(ci.lo));
    let _ = writeln!(out, "ci_hi           {}", fmt_sig(ci.hi));
}

const KS_CSV_HEADER: &str = "mode,n,m,d,asymptotic_p,finite_p_bound,ci_method,ci_level,ci_lo,ci_hi,ci_half_width";

fn ks_csv_row(mode: &str, n: usize, m: usize, d: f64, p: f64, bound: f64, ci: &ConfidenceInterval) -> String {
    format!(
        "{mode},{n},{m},{},{},{},{},{},{},{},{}\n",
        fmt_sig(d),
        fmt_sig(p),
        fmt_sig(bound),
        ci.method,
        fmt_sig(ci.level),
        fmt_sig(ci.lo),
        fmt_sig(ci.hi),
        fmt_sig(ci.half_width)
    )
}

fn cmd_ks(a: KsArgs) -> CmdResult {
    if !(a.delta > 0.0 && a.delta < 1.0) {
        return Err(Outcome::usage(format!("--delta must lie in (0, 1), got {}", a.delta)));
    }
    let samples = a.files.iter().map(Sample::read).collect::<crate::Result<Vec<_>>>();
    let samples = lift(samples)?;
    let mut out = String::new();
    match (samples.as_slice(), &a.dist) {
        ([x], Some(spec)) => {
            let g = parse_dist(spec)?;
            let r = lift(one_sample_report(x, &g, a.delta))?;
            if a.csv {
                out.push_str(KS_CSV_HEADER);
                out.push('\n');
                out.push_str(&ks_csv_row(
                    "one-sample",
                    r.n,
                    0,
                    r.stats.d,
                    r.kolmogorov_p,
                    r.dkwm_p_bound,
                    &r.ci,
                ));
            } else {
                let _ = writeln!(out, "mode            one-sample");
                let _ = writeln!(out, "n               {}", r.n);
                let _ = writeln!(out, "reference       {}", r.reference);
                let _ = writeln!(out, "d               {}", fmt_sig(r.stats.d));
                let _ = writeln!(out, "sup_plus        {}", fmt_sig(r.stats.sup_plus));
                let _ = writeln!(out, "sup_minus       {}", fmt_sig(r.stats.sup_minus));
                let _ = writeln!(out, "kolmogorov_p    {}  (asymptotic)", fmt_sig(r.kolmogorov_p));
                let _ = writeln!(out, "dkwm_p_bound    {}", fmt_sig(r.dkwm_p_bound));
                ci_lines(&mut out, &r.ci);
            }
        }
        ([_], None) => {
            return Err(Outcome::usage(
                "one sample file needs --dist; pass two files for the two-sample statistic",
            ))
        }
        ([x, y], None) => {
            let r = lift(two_sample_report(x, y, a.delta))?;
            let wd_bound = match &r.wei_dudley {
                WeiDudleyP::Present { p_bound, .. } => *p_bound,
                WeiDudleyP::Omitted { .. } => f64::NAN,
            };
            if a.csv {
                out.push_str(KS_CSV_HEADER);
                out.push('\n');
                for ci in [&r.ci_prop2a, &r.ci_prop2b, &r.ci_best] {
                    out.push_str(&ks_csv_row("two-sample", r.n, r.m, r.d, r.smirnov_p, wd_bound, ci));
                }
            } else {
                let _ = writeln!(out, "mode            two-sample");
                let _ = writeln!(out, "n               {}", r.n);
                let _ = writeln!(out, "m               {}", r.m);
                let _ = writeln!(out, "d               {}", fmt_sig(r.d));
                let _ = writeln!(out, "smirnov_p       {}  (asymptotic)", fmt_sig(r.smirnov_p));
                match &r.wei_dudley {
                    WeiDudleyP::Present { c, p_bound } => {
                        let _ = writeln!(out, "wei_dudley_c    {c}");
                        let _ = writeln!(out, "wei_dudley_p    {}", fmt_sig(*p_bound));
                    }
                    WeiDudleyP::Omitted { reason } => {
                        let _ = writeln!(out, "wei_dudley_p    omitted: {reason}");
                    }
                }
                for ci in [&r.ci_prop2a, &r.ci_prop2b, &r.ci_best] {
                    ci_lines(&mut out, ci);
                }
            }
        }
        (_, Some(_)) => {
            return Err(Outcome::usage("--dist applies to a single sample file"));
        }
        _ => return Err(Outcome::usage("expected one or two sample files")),
    }
    Ok(Outcome::ok(out))
}

fn parse_family(s: &str) -> std::result::Result<Family, Outcome> {
    s.parse().map_err(|e: Error| Outcome::usage(e.to_string()))
}

fn required<T>(v: Option<T>, flag: &str, family: Family) -> std::result::Result<T, Outcome> {
    v.ok_or_else(|| Outcome::usage(format!("family {family} requires --{flag}")))
}

/// Sample sizes a family needs, defaulting the ones it ignores to 1.
fn family_sizes(family: Family, n: Option<usize>, m: Option<usize>) -> std::result::Result<(usize, usize), Outcome> {
    match family {
        Family::Dkwm | Family::Prop1 | Family::Alpha1 | Family::Alpha2 => Ok((n.unwrap_or(1), m.unwrap_or(1))),
        Family::WeiDudley => {
            let n = required(n, "n", family)?;
            Ok((n, m.unwrap_or(n)))
        }
        Family::Prop2a | Family::Prop2b => Ok((required(n, "n", family)?, required(m, "m", family)?)),
    }
}

fn cmd_bound(a: BoundArgs) -> CmdResult {
    let family = parse_family(&a.family)?;
    let z = required(a.z, "z", family)?;
    let (n, m) = family_sizes(family, a.n, a.m)?;
    let q = TailQuery::new(z, n, m).map_err(|e| Outcome::usage(e.to_string()))?;
    let r = lift(family.evaluate(&q))?;
    let mut out = String::new();
    let _ = writeln!(out, "family   {family}");
    let _ = writeln!(out, "z        {}", fmt_sig(z));
    let _ = writeln!(out, "raw      {}", fmt_sig(r.raw));
    let _ = writeln!(out, "clipped  {}", fmt_sig(r.clipped));
    let _ = writeln!(out, "valid    {}", r.valid);
    let _ = writeln!(out, "useful   {}", r.useful);
    Ok(Outcome::ok(out))
}

fn cmd_invert(a: InvertArgs) -> CmdResult {
    let family = parse_family(&a.family)?;
    let (n, m) = family_sizes(family, a.n, a.m)?;
    let z = lift(invert_family(family, n, m, a.delta))?;
    let units = if family.is_unscaled() { "unscaled" } else { "scaled" };
    Ok(Outcome::ok(format!(
        "family   {family}\ndelta    {}\nz        {}\nunits    {units}\n",
        fmt_sig(a.delta),
        fmt_sig(z)
    )))
}

fn cmd_ci(a: CiArgs) -> CmdResult {
    let method = match &a.method {
        Some(s) => s.parse::<CiMethod>().map_err(|e| Outcome::usage(e.to_string()))?,
        None if a.m.is_some() => CiMethod::BestOf2a2b,
        None => CiMethod::Prop1,
    };
    let ci = match (a.m, method) {
        (None, CiMethod::Prop1) => lift(one_sample_ci(a.d, a.n, a.delta))?,
        (None, _) => return Err(Outcome::usage(format!("method {method} needs --m"))),
        (Some(_), CiMethod::Prop1) => return Err(Outcome::usage("prop1 is a one-sample method; drop --m")),
        (Some(m), _) => lift(two_sample_ci(a.d, a.n, m, a.delta, method))?,
    };
    let mut out = String::new();
    let _ = writeln!(out, "center          {}", fmt_sig(ci.center));
    ci_lines(&mut out, &ci);
    Ok(Outcome::ok(out))
}

/// Parses `n=50,m=50,z=0.3` cells, `;`-separated.
fn parse_grid(specs: &[String]) -> std::result::Result<Vec<(usize, usize, f64)>, Outcome> {
    let mut cells = Vec::new();
    for cell in specs
        .iter()
        .flat_map(|s| s.split(';'))
        .map(str::trim)
        .filter(|s| !s.is_empty())
    {
        let bad = || {
            Outcome::usage(format!(
                "malformed grid cell '{cell}' (expected n=<int>,m=<int>[,z=<real>])"
            ))
        };
        let (mut n, mut m, mut z) = (None, None, None);
        for kv in cell.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            match k.trim() {
                "n" => n = Some(v.trim().parse::<usize>().map_err(|_| bad())?),
                "m" => m = Some(v.trim().parse::<usize>().map_err(|_| bad())?),
                "z" => z = Some(v.trim().parse::<f64>().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        let (n, m) = (n.ok_or_else(bad)?, m.ok_or_else(bad)?);
        if n == 0 || m == 0 {
            return Err(bad());
        }
        match z {
            Some(z) => cells.push((n, m, z)),
            None => cells.extend(default_z_points(n, m).into_iter().map(|z| (n, m, z))),
        }
    }
    if cells.is_empty() {
        return Err(Outcome::usage("empty --grid"));
    }
    Ok(cells)
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let cells = if a.grid.is_empty() {
        crate::oracle::default_grid()
    } else {
        match parse_grid(&a.grid) {
            Ok(c) => c,
            Err(o) => return o,
        }
    };
    let cfg = QuadratureConfig {
        abs_tol: a.abs_tol,
        max_subdivisions: a.max_subdivisions,
    };
    if let Err(e) = cfg.validate() {
        return Outcome::usage(e.to_string());
    }
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(n, m, z)| ((n, m, z), verify_cell(n, m, z, &cfg)))
        .collect();

    let mut out = String::from(
        "n,m,z,prop2a_raw,prop2a_oracle,gap_2a,prop2b_raw,prop2b_oracle,gap_2b,alpha3,one_sided_condition,status\n",
    );
    let mut stderr = String::new();
    let (mut failed, mut diverged, mut invalid) = (0usize, 0usize, 0usize);
    for ((n, m, z), r) in results {
        match r {
            Ok(c) => {
                let status = if c.pass() { "pass" } else { "fail" };
                if !c.pass() {
                    failed += 1;
                }
                let _ = writeln!(
                    out,
                    "{n},{m},{},{},{},{},{},{},{},{},{},{status}",
                    fmt_sig(z),
                    fmt_sig(c.prop2a_raw),
                    fmt_sig(c.prop2a_oracle),
                    fmt_sig(c.prop2a_gap()),
                    fmt_sig(c.prop2b_raw),
                    fmt_sig(c.prop2b_oracle),
                    fmt_sig(c.prop2b_gap()),
                    fmt_sig(c.alpha3),
                    c.one_sided_condition
                );
            }
            Err(e) => {
                let status = match e {
                    Error::Convergence { .. } => {
                        diverged += 1;
                        "nonconvergent"
                    }
                    _ => {
                        invalid += 1;
                        "invalid"
                    }
                };
                let _ = writeln!(out, "{n},{m},{},nan,nan,nan,nan,nan,nan,nan,na,{status}", fmt_sig(z));
                let _ = writeln!(stderr, "cell n={n},m={m},z={}: {e}", fmt_sig(z));
            }
        }
    }
    let code = if invalid > 0 {
        EXIT_INPUT
    } else if diverged > 0 {
        EXIT_NUMERICAL
    } else if failed > 0 {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    };
    let _ = writeln!(
        stderr,
        "{} cells: {} failed, {} nonconvergent, {} invalid",
        cells.len(),
        failed,
        diverged,
        invalid
    );
    Outcome {
        code,
        stdout: out,
        stderr,
    }
}

fn cmd_simulate(a: SimulateArgs) -> Outcome {
    let (f, g) = match (parse_dist(&a.f), parse_dist(&a.g)) {
        (Ok(f), Ok(g)) => (f, g),
        (Err(o), _) | (_, Err(o)) => return o,
    };
    if a.trials == 0 {
        return Outcome::usage("--trials must be >= 1");
    }
    if a.n == 0 {
        return Outcome::usage("--n must be >= 1");
    }
    let unequal = a.m != 0 && a.m != a.n;
    let (dmin, dmax, dsteps) = if unequal { (0.02, 0.4, 20) } else { (0.5, 2.5, 21) };
    let (zmin, zmax, zsteps) = (
        a.zmin.unwrap_or(dmin),
        a.zmax.unwrap_or(dmax),
        a.zsteps.unwrap_or(dsteps),
    );
    let cfg = SimConfig {
        f,
        g,
        n: a.n,
        m: a.m,
        trials: a.trials,
        z_grid: linspace(zmin, zmax, zsteps),
        seed: a.seed,
    };
    if let Err(e) = cfg.validate() {
        return Outcome::usage(e.to_string());
    }
    let report = match run_simulation(&cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::from_error(e),
    };
    let csv = report.to_csv();
    let mut stderr = String::new();
    let units = match report.mode {
        SimMode::OneSample => "sqrt(n)-scaled",
        SimMode::TwoSampleEqual => "sqrt(n/2)-scaled",
        SimMode::TwoSampleUnequal => "unscaled",
    };
    let _ = writeln!(
        stderr,
        "d(F,G) = {}; {} trials; z is {units}",
        fmt_sig(report.d_true),
        report.trials
    );
    for fail in report.failures() {
        let _ = writeln!(
            stderr,
            "FAIL {} at z = {}: empirical exceeds bound + 3se by {}",
            fail.family,
            fmt_sig(fail.z),
            fmt_sig(fail.margin)
        );
    }
    let stdout = match &a.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &csv) {
                return Outcome::usage(format!("{}: {e}", path.display()));
            }
            String::new()
        }
        None => csv,
    };
    let code = if report.all_pass() { EXIT_OK } else { EXIT_CHECK_FAILED };
    Outcome { code, stdout, stderr }
}

fn cmd_figure(a: FigureArgs) -> CmdResult {
    lift(figure_csv(a.zmax, a.step)).map(Outcome::ok).map_err(|mut o| {
        o.code = EXIT_INPUT;
        o
    })
}
