//! The `L^p` necessary condition `m <= -d(1-ρ)|1/2 - 1/p|` and the sufficient
//! condition `m <= -(1-ρ)(d+1+ρ)` (with `ρ > 0`, `δ <= ρ`) for mixed exponents.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// Necessary condition holds for every component.
    pub necessary_lp: bool,
    /// Per-component `-d(1-ρ)|1/2 - 1/p_i|`.
    pub necessary_thresholds: Vec<f64>,
    /// Per-component `threshold - m`; negative means violated.
    pub necessary_margins: Vec<f64>,
    pub sufficient_thm32: bool,
    /// `-(1-ρ)(d+1+ρ)`.
    pub sufficient_threshold: f64,
    /// `threshold - m`. Non-negative margins can still fail the side conditions `ρ > 0`, `δ <= ρ`.
    pub sufficient_margin: f64,
}

/// Evaluates both conditions; `p` holds one exponent per axis (or a single scalar).
pub fn condition_report(m: f64, rho: f64, delta: f64, d: usize, p: &[f64]) -> Result<ConditionReport> {
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if !m.is_finite() || !(0.0..=1.0).contains(&rho) || !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid(format!("need finite m, 0 <= rho <= 1, 0 <= delta < 1; got ({m}, {rho}, {delta})")));
    }
    if p.is_empty() || p.iter().any(|v| !(v.is_finite() && *v > 1.0)) {
        return Err(Error::invalid("exponents must lie in (1, inf)"));
    }
    let df = d as f64;
    let necessary_thresholds: Vec<f64> = p.iter().map(|pi| -df * (1.0 - rho) * (0.5 - 1.0 / pi).abs()).collect();
    let necessary_margins: Vec<f64> = necessary_thresholds.iter().map(|t| t - m).collect();
    let sufficient_threshold = -(1.0 - rho) * (df + 1.0 + rho);
    let sufficient_margin = sufficient_threshold - m;
    Ok(ConditionReport {
        necessary_lp: necessary_margins.iter().all(|v| *v >= 0.0),
        necessary_thresholds,
        necessary_margins,
        sufficient_thm32: rho > 0.0 && delta <= rho && sufficient_margin >= 0.0,
        sufficient_threshold,
        sufficient_margin,
    })
}
