//! Estimation of the Kolmogorov-Smirnov distance `d(F, G)` between two
//! continuous distributions from samples, with non-asymptotic deviation
//! bounds that stay valid when `F != G`.
//!
//! The crate is organised as:
//!
//! * [`distributions`]: analytic ground-truth distributions and seeded sampling.
//! * [`ecdf`]: samples, empirical CDFs and exact KS statistics.
//! * [`bounds`]: closed-form tail bounds (DKWM, Wei-Dudley, the one- and
//!   two-sample deviation bounds) and the special functions they need.
//! * [`oracle`]: adaptive 2-D quadrature of the envelope integrals that the
//!   two-sample bounds are derived from.
//! * [`inference`]: bound inversion, confidence intervals and reports.
//! * [`montecarlo`]: seeded simulation harness for checking the inequalities.
//! * [`cli`]: the `ksbound` command-line front end.

pub mod bounds;
pub mod cli;
pub mod distributions;
pub mod ecdf;
pub mod error;
pub mod format;
pub mod inference;
pub mod montecarlo;
pub mod oracle;

pub use error::{Error, Result};
