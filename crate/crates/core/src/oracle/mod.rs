//! Numerical evaluation of the envelope integrals behind the two-sample
//! bounds, used to check the closed forms independently.
//!
//! * `integral_omega1`: `int mu1(n, x) mu1(m, y)` over `x + y <= z`.
//!   The general two-sample bound [`prop2a_tail_general`] should be at least
//!   `1 - integral_omega1`.
//! * `alpha3_numeric`: `int mu2(n, x) mu2(m, y)` over the triangle
//!   `x + y <= z` cut by `x <= z - sqrt(log 2 / 2m)` and
//!   `y <= z - sqrt(log 2 / 2n)`. The sharper bound [`prop2b_tail_general`]
//!   should be at least `min(1, 2 - 2 alpha3)`.

mod quadrature;

use std::f64::consts::LN_2;

pub use quadrature::{integrate, Cubature, Polygon, QuadratureConfig};

use crate::bounds::{mu1, mu2, prop2a_tail_general, prop2b_tail_general, two_sample_validity_edge};
use crate::error::{domain, Result};

/// Allowed amount by which a closed-form bound may undercut its oracle.
pub const VALIDITY_SLACK: f64 = 1e-6;

/// Constant of the extra validity condition `z >= 1.0841 n^(-2/3)` for the
/// one-sided DKWM inequality.
pub const ONE_SIDED_DKWM_CONSTANT: f64 = 1.0841;

fn cutoff(n: usize) -> f64 {
    (LN_2 / (2.0 * n as f64)).sqrt()
}

fn check_sizes(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return domain(format!("sample sizes must be >= 1, got n = {n}, m = {m}"));
    }
    Ok(())
}

/// `int_{x + y <= z} mu1(n, x) mu1(m, y) dx dy` for `0 < z <= 1`.
///
/// The triangle is split along the cutoff lines of `mu1` so each piece has
/// a smooth integrand.
pub fn integral_omega1(n: usize, m: usize, z: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_sizes(n, m)?;
    if !(z > 0.0 && z <= 1.0) {
        return domain(format!("integral_omega1 requires 0 < z <= 1, got {z}"));
    }
    let (a, b) = (cutoff(n), cutoff(m));
    let tri = Polygon::triangle([0.0, 0.0], [z, 0.0], [0.0, z]);
    let mut pieces = Vec::with_capacity(4);
    for x_side in [tri.clip(-1.0, 0.0, -a), tri.clip(1.0, 0.0, a)] {
        pieces.push(x_side.clip(0.0, -1.0, -b));
        pieces.push(x_side.clip(0.0, 1.0, b));
    }
    let r = integrate(|x, y| mu1(n, x) * mu1(m, y), &pieces, cfg)?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Domain of [`alpha3_numeric`] as a convex polygon (possibly empty).
pub fn omega2(n: usize, m: usize, z: f64) -> Polygon {
    Polygon::triangle([0.0, 0.0], [z, 0.0], [0.0, z])
        .clip(1.0, 0.0, z - cutoff(m))
        .clip(0.0, 1.0, z - cutoff(n))
}

/// `alpha3 = int_{omega2} mu2(n, x) mu2(m, y) dx dy` for
/// `sqrt(log(2)/2) (n^-1/2 + m^-1/2) <= z <= 1`.
pub fn alpha3_numeric(n: usize, m: usize, z: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_sizes(n, m)?;
    let edge = two_sample_validity_edge(n, m);
    // Allow rounding at the lower edge.
    if !(z >= edge * (1.0 - 1e-12) && z <= 1.0) {
        return domain(format!("alpha3 requires {edge} <= z <= 1, got {z}"));
    }
    let r = integrate(|x, y| mu2(n, x) * mu2(m, y), &[omega2(n, m, z)], cfg)?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Whether `z >= 1.0841 k^(-2/3)` holds for both sample sizes. The one-sided
/// DKWM inequality used for `alpha3` assumes it; it is reported, not enforced.
pub fn one_sided_dkwm_condition(n: usize, m: usize, z: f64) -> bool {
    let need = |k: usize| ONE_SIDED_DKWM_CONSTANT * (k as f64).powf(-2.0 / 3.0);
    z >= need(n) && z >= need(m)
}

/// One `(n, m, z)` comparison between closed forms and quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyCell {
    pub n: usize,
    pub m: usize,
    pub z: f64,
    pub prop2a_raw: f64,
    /// `1 - integral_omega1`
    pub prop2a_oracle: f64,
    pub prop2b_raw: f64,
    pub alpha3: f64,
    /// `min(1, 2 - 2 alpha3)`
    pub prop2b_oracle: f64,
    pub one_sided_condition: bool,
}

impl VerifyCell {
    /// Closed form minus oracle; negative means the closed form undercuts it.
    pub fn prop2a_gap(&self) -> f64 {
        self.prop2a_raw - self.prop2a_oracle
    }

    pub fn prop2b_gap(&self) -> f64 {
        self.prop2b_raw - self.prop2b_oracle
    }

    pub fn pass(&self) -> bool {
        self.prop2a_gap() >= -VALIDITY_SLACK && self.prop2b_gap() >= -VALIDITY_SLACK
    }
}

pub fn verify_cell(n: usize, m: usize, z: f64, cfg: &QuadratureConfig) -> Result<VerifyCell> {
    let a = prop2a_tail_general(n, m, z)?;
    let b = prop2b_tail_general(n, m, z)?;
    if !a.valid {
        return domain(format!(
            "z = {z} is below the validity edge {} for n = {n}, m = {m}",
            two_sample_validity_edge(n, m)
        ));
    }
    let omega1 = integral_omega1(n, m, z, cfg)?;
    let alpha3 = alpha3_numeric(n, m, z, cfg)?;
    Ok(VerifyCell {
        n,
        m,
        z,
        prop2a_raw: a.raw,
        prop2a_oracle: 1.0 - omega1,
        prop2b_raw: b.raw,
        alpha3,
        prop2b_oracle: (2.0 - 2.0 * alpha3).min(1.0),
        one_sided_condition: one_sided_dkwm_condition(n, m, z),
    })
}

/// Ten valid thresholds `edge * (1 + 0.3 k)`, `k = 1..=10`, capped at 1.
pub fn default_z_points(n: usize, m: usize) -> Vec<f64> {
    let edge = two_sample_validity_edge(n, m);
    (1..=10).map(|k| (edge * (1.0 + 0.3 * k as f64)).min(1.0)).collect()
}

/// `n, m in {25, 50, 100, 200}` crossed with [`default_z_points`].
pub fn default_grid() -> Vec<(usize, usize, f64)> {
    const SIZES: [usize; 4] = [25, 50, 100, 200];
    let mut grid = Vec::new();
    for n in SIZES {
        for m in SIZES {
            for z in default_z_points(n, m) {
                grid.push((n, m, z));
            }
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::mu1_cdf;

    #[test]
    fn omega1_below_edge_is_zero() {
        let cfg = QuadratureConfig::default();
        let z = 0.9 * two_sample_validity_edge(100, 200);
        assert_eq!(integral_omega1(100, 200, z, &cfg).unwrap(), 0.0);
        assert!(integral_omega1(100, 200, 0.0, &cfg).is_err());
        assert!(integral_omega1(100, 200, 1.5, &cfg).is_err());
    }

    #[test]
    fn omega1_large_z_bounded_by_marginals() {
        let cfg = QuadratureConfig::default();
        let v = integral_omega1(50, 50, 1.0, &cfg).unwrap();
        // The triangle lies inside the unit square, so the product of the
        // marginal masses bounds it from above.
        let upper = mu1_cdf(50, 1.0) * mu1_cdf(50, 1.0);
        assert!(v >= 0.999 && v <= upper + 1e-8, "{v}");
    }

    #[test]
    fn omega1_validates_prop2a() {
        let cfg = QuadratureConfig::default();
        let v = integral_omega1(100, 200, 0.2, &cfg).unwrap();
        let raw = prop2a_tail_general(100, 200, 0.2).unwrap().raw;
        assert!(1.0 - v <= raw + 1e-6);
        // The closed form is in fact the exact complement.
        assert!((1.0 - v - raw).abs() < 1e-7, "{} vs {raw}", 1.0 - v);
    }

    #[test]
    fn alpha3_at_lower_edge_is_a_quarter() {
        // At the edge omega2 is the box [0, a] x [0, b], each side holding
        // mass 1 - exp(-log 2) = 1/2 of mu2.
        let cfg = QuadratureConfig::default();
        let edge = two_sample_validity_edge(100, 200);
        let v = alpha3_numeric(100, 200, edge, &cfg).unwrap();
        assert!((v - 0.25).abs() < 1e-8, "{v}");
        assert!(alpha3_numeric(100, 200, 0.9 * edge, &cfg).is_err());
    }

    #[test]
    fn alpha3_matches_prop2b() {
        let cfg = QuadratureConfig::default();
        let a3 = alpha3_numeric(50, 50, 0.3, &cfg).unwrap();
        let raw = prop2b_tail_general(50, 50, 0.3).unwrap().raw;
        assert!(((2.0 - 2.0 * a3).min(1.0) - raw).abs() < 1e-6);
    }

    #[test]
    fn alpha3_symmetric_under_relabeling() {
        let cfg = QuadratureConfig::default();
        let a = alpha3_numeric(100, 400, 0.25, &cfg).unwrap();
        let b = alpha3_numeric(400, 100, 0.25, &cfg).unwrap();
        assert!((a - b).abs() < 2e-8);
    }

    #[test]
    fn refinement_budget_invariance_and_monotone_in_z() {
        let cfg = QuadratureConfig::default();
        let deep = QuadratureConfig {
            max_subdivisions: 40,
            ..cfg
        };
        let a = integral_omega1(25, 100, 0.4, &cfg).unwrap();
        let b = integral_omega1(25, 100, 0.4, &deep).unwrap();
        assert!((a - b).abs() < 1e-8);

        let mut prev = 0.0;
        for k in 1..=20 {
            let v = integral_omega1(25, 100, 0.05 * k as f64, &cfg).unwrap();
            assert!(v + 1e-8 >= prev, "k = {k}");
            prev = v;
        }
    }

    #[test]
    fn one_sided_condition_flags() {
        assert!(one_sided_dkwm_condition(1000, 1000, 0.2));
        assert!(!one_sided_dkwm_condition(10, 1000, 0.2));
    }

    #[test]
    fn default_grid_is_valid() {
        let grid = default_grid();
        assert_eq!(grid.len(), 160);
        for (n, m, z) in grid {
            assert!(z >= two_sample_validity_edge(n, m) && z <= 1.0);
        }
    }
}
