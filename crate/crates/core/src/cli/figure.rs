//! Curves comparing `L(z)`, `2 exp(-2 z^2)`, `alpha1(z)` and `alpha2(z)`.

use std::f64::consts::LN_2;

use crate::bounds::{alpha1, alpha2, dkwm_tail, kolmogorov_l};
use crate::error::{domain, Result};
use crate::format::fmt_sig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureRow {
    pub z: f64,
    pub l: f64,
    /// Unclipped `2 exp(-2 z^2)`.
    pub two_exp: f64,
    /// NaN below `sqrt(log 2)`.
    pub alpha1: f64,
    pub alpha2: f64,
}

/// Rows at `z = k * step` for `0 <= z <= zmax`, plus one row at exactly
/// `sqrt(log 2)` when that lies in range.
pub fn figure_rows(zmax: f64, step: f64) -> Result<Vec<FigureRow>> {
    if !(step > 0.0) || !step.is_finite() {
        return domain(format!("step must be > 0, got {step}"));
    }
    if !(zmax >= 0.0) || !zmax.is_finite() {
        return domain(format!("zmax must be >= 0, got {zmax}"));
    }
    let count = (zmax / step + 1e-9).floor() as usize;
    let mut zs: Vec<f64> = (0..=count).map(|k| k as f64 * step).collect();
    let edge = LN_2.sqrt();
    if edge <= zmax && !zs.contains(&edge) {
        let at = zs.partition_point(|&z| z < edge);
        zs.insert(at, edge);
    }
    zs.into_iter()
        .map(|z| {
            let l = if z == 0.0 { 0.0 } else { kolmogorov_l(z)? };
            let (a1, a2) = if z >= edge {
                (alpha1(z).raw, alpha2(z).raw)
            } else {
                (f64::NAN, f64::NAN)
            };
            Ok(FigureRow {
                z,
                l,
                two_exp: dkwm_tail(z).raw,
                alpha1: a1,
                alpha2: a2,
            })
        })
        .collect()
}

pub fn figure_csv(zmax: f64, step: f64) -> Result<String> {
    let mut out = String::from("z,L,two_exp,alpha1,alpha2\n");
    for r in figure_rows(zmax, step)? {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_sig(r.z),
            fmt_sig(r.l),
            fmt_sig(r.two_exp),
            fmt_sig(r.alpha1),
            fmt_sig(r.alpha2)
        ));
    }
    Ok(out)
}
