//! Power-law fits of kernel decay `|∂_x^α ∂_z^β k(x, z)| <= C |z|^{-d-m-δ|α|-|β|-L}`.

use crate::error::{Error, Result};
use crate::psido::Kernel;
use crate::symbols::{MultiIndex, SymbolClassParams};

/// Number of geometric shells used for the slope regression.
pub const DECAY_SHELLS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelDecayParams {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub l: f64,
    /// `-d - m - δ|α| - |β| - L`.
    pub predicted_exponent: f64,
}

/// Smallest `L` allowed for the given orders: `(1-ρ)(⌊(d+m+δ|α|+|β|)/ρ⌋ + 1)⁺`.
pub fn minimal_l(dim: usize, class: &SymbolClassParams, alpha_order: usize, beta_order: usize) -> f64 {
    let s = dim as f64 + class.m + class.delta * alpha_order as f64 + beta_order as f64;
    ((1.0 - class.rho) * ((s / class.rho).floor() + 1.0)).max(0.0)
}

impl KernelDecayParams {
    /// Validates `L` against the class: `L >= (1-ρ)(⌊(d+m+δ|α|+|β|)/ρ⌋ + 1)⁺`
    /// and `d + m + δ|α| + |β| + L > 0`. Requires `ρ > 0`.
    pub fn new(dim: usize, class: &SymbolClassParams, alpha: MultiIndex, beta: MultiIndex, l: f64) -> Result<Self> {
        if alpha.dim() != dim || beta.dim() != dim {
            return Err(Error::invalid("multi-index length differs from the dimension"));
        }
        if !(class.rho > 0.0) {
            return Err(Error::invalid("kernel decay estimates need rho > 0"));
        }
        if !(l.is_finite() && l >= 0.0) {
            return Err(Error::invalid(format!("L must be a nonnegative number, got {l}")));
        }
        let s = dim as f64 + class.m + class.delta * alpha.order() as f64 + beta.order() as f64;
        let l_min = minimal_l(dim, class, alpha.order(), beta.order());
        if l < l_min {
            return Err(Error::invalid(format!("L = {l} is below the required {l_min}")));
        }
        if !(s + l > 0.0) {
            return Err(Error::invalid(format!("d + m + δ|α| + |β| + L = {} must be positive", s + l)));
        }
        Ok(KernelDecayParams { alpha, beta, l, predicted_exponent: -(s + l) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Least-squares slope of `ln |k|` against `ln |z|`; `None` when degenerate.
    pub slope: Option<f64>,
    /// Smallest `C` with `|k(z)| <= C |z|^{predicted}` on the window.
    pub envelope: f64,
    pub predicted_exponent: f64,
    /// `(|z|, max |k|)` per nonempty shell, at the radius where the max is attained.
    pub shells: Vec<(f64, f64)>,
    /// The kernel vanishes on the window.
    pub degenerate: bool,
    pub pass: bool,
}

/// Fits the decay of `∂_z^β k` on `z_lo <= |z| <= z_hi`.
///
/// `β` is applied spectrally. `α` only enters the predicted exponent: pass the
/// kernel of `∂_x^α σ` when `α ≠ 0`. The window must satisfy `2h <= z_lo < z_hi <= R/2`.
pub fn decay_fit(k: &Kernel, window: (f64, f64), params: &KernelDecayParams) -> Result<DecayFit> {
    let grid = *k.grid();
    let (lo, hi) = window;
    let h = grid.spacing();
    if params.alpha.dim() != grid.dim() {
        return Err(Error::invalid("decay parameters and kernel have different dimensions"));
    }
    if !(lo < hi) || lo < 2.0 * h * (1.0 - 1e-12) || hi > grid.half_extent() / 2.0 * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "window [{lo}, {hi}] must satisfy 2h = {} <= z_lo < z_hi <= R/2 = {}",
            2.0 * h,
            grid.half_extent() / 2.0
        )));
    }
    let kd = if params.beta.is_zero() { k.clone() } else { k.z_derivative(&params.beta.0)? };

    let ratio = (hi / lo).ln();
    let mut shells = vec![(0.0f64, 0.0f64); DECAY_SHELLS];
    let mut envelope = 0.0f64;
    let mut any = false;
    for (r, v) in kd.radial_profile() {
        if r < lo || r > hi {
            continue;
        }
        any = true;
        envelope = envelope.max(v * r.powf(-params.predicted_exponent));
        let b = (((r / lo).ln() / ratio) * DECAY_SHELLS as f64).floor() as usize;
        let b = b.min(DECAY_SHELLS - 1);
        if v > shells[b].1 {
            shells[b] = (r, v);
        }
    }
    if !any {
        return Err(Error::invalid(format!("no grid samples fall in the window [{lo}, {hi}]")));
    }
    let shells: Vec<(f64, f64)> = shells.into_iter().filter(|s| s.1 > 0.0).collect();
    let slope = if shells.len() >= 2 { Some(log_log_slope(&shells)) } else { None };
    let degenerate = slope.is_none() && envelope == 0.0;
    Ok(DecayFit {
        slope,
        envelope,
        predicted_exponent: params.predicted_exponent,
        shells,
        degenerate,
        pass: envelope.is_finite() && !degenerate,
    })
}

/// Ordinary least squares slope of `ln y` on `ln r`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(r, y) in points {
        let (lx, ly) = (r.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
