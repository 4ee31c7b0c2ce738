//! Mixed-norm Lebesgue norms `‖f‖_p`, `p = (p_1, …, p_d)`.
//!
//! The innermost integral runs over `x_1` (the slowest grid axis) with
//! exponent `p_1`, the outermost over `x_d`. Every level is a Riemann sum.

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};

/// Exponent vector `p ∈ (1, ∞)^d`, optionally split as `p = (p̄, p')` with `p̄ = (p_1, …, p_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedExponent {
    p: Vec<f64>,
    split: Option<usize>,
}

impl MixedExponent {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::invalid("exponent vector is empty"));
        }
        if let Some(bad) = p.iter().find(|v| !(v.is_finite() && **v > 1.0)) {
            return Err(Error::invalid(format!("exponents must lie in (1, inf), got {bad}")));
        }
        Ok(MixedExponent { p, split: None })
    }

    /// The same exponent on every axis.
    pub fn uniform(dim: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; dim])
    }

    pub fn with_split(mut self, l: usize) -> Result<Self> {
        if l >= self.p.len() {
            return Err(Error::invalid(format!("split index {l} must be below the dimension {}", self.p.len())));
        }
        self.split = Some(l);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.p
    }

    pub fn split(&self) -> Option<usize> {
        self.split
    }

    /// `p̄ = (p_1, …, p_l)`; empty when no split is set.
    pub fn inner(&self) -> &[f64] {
        &self.p[..self.split.unwrap_or(0)]
    }
}

/// Componentwise conjugate exponents `p' = p / (p - 1)`.
pub fn holder_dual(p: &MixedExponent) -> MixedExponent {
    MixedExponent { p: p.p.iter().map(|&v| v / (v - 1.0)).collect(), split: p.split }
}

/// `‖f‖_p` with `p ∈ (1, ∞)^d`.
pub fn mixed_norm(f: &SampledFunction, p: &MixedExponent) -> Result<f64> {
    let grid = f.grid();
    if p.dim() != grid.dim() {
        return Err(Error::invalid(format!("exponent has {} entries, grid dimension is {}", p.dim(), grid.dim())));
    }
    let abs: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    Ok(iterated_norm(&abs, grid, &p.p)[0])
}

/// Reduces the leading `exps.len()` axes of `abs` (row-major, `n` per axis,
/// `d` axes) with the given exponents, returning the field over the remaining
/// axes. Exponents `>= 1` are accepted here so that the `(p̄, 1, …, 1)`
/// norms of the cancellation check can be formed.
pub(crate) fn iterated_norm(abs: &[f64], grid: &Grid, exps: &[f64]) -> Vec<f64> {
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let mut data = abs.to_vec();
    for &p in exps {
        let stride = data.len() / n;
        let mut out = vec![0.0; stride];
        for (j, slot) in out.iter_mut().enumerate() {
            let scale = (0..n).map(|i| data[i * stride + j]).fold(0.0, f64::max);
            if scale == 0.0 {
                continue;
            }
            let s: f64 = if p == 1.0 {
                (0..n).map(|i| data[i * stride + j] / scale).sum()
            } else if p == 2.0 {
                (0..n).map(|i| (data[i * stride + j] / scale).powi(2)).sum()
            } else {
                (0..n).map(|i| (data[i * stride + j] / scale).powf(p)).sum()
            };
            *slot = scale * (h * s).powf(1.0 / p);
        }
        data = out;
    }
    data
}

/// `‖f(·, x')‖_{p̄}` for every outer point `x'`, in row-major order over the
/// trailing `d - l` axes. For `l = 0` this is `|f|`.
pub fn partial_norm_field(f: &SampledFunction, inner: &[f64]) -> Result<Vec<f64>> {
    let grid = f.grid();
    if inner.len() >= grid.dim() {
        return Err(Error::invalid("inner exponent block must leave at least one outer axis"));
    }
    if let Some(bad) = inner.iter().find(|v| !(v.is_finite() && **v >= 1.0)) {
        return Err(Error::invalid(format!("inner exponent {bad} must be >= 1")));
    }
    let abs: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    Ok(iterated_norm(&abs, grid, inner))
}

/// `‖f(·, x')‖_{p̄}` at one outer point `x' ∈ R^{d-l}`, which must lie on the grid.
pub fn partial_norm(f: &SampledFunction, p: &MixedExponent, x_outer: &[f64]) -> Result<f64> {
    let grid = f.grid();
    let l = p
        .split()
        .ok_or_else(|| Error::invalid("partial norm needs an exponent with a split index"))?;
    if p.dim() != grid.dim() {
        return Err(Error::invalid("exponent dimension differs from grid dimension"));
    }
    if x_outer.len() != grid.dim() - l {
        return Err(Error::invalid(format!("outer point needs {} coordinates", grid.dim() - l)));
    }
    let mut outer_idx = 0usize;
    for &c in x_outer {
        let k = grid
            .index_of(c)
            .ok_or_else(|| Error::invalid(format!("outer coordinate {c} is not on the grid")))?;
        outer_idx = outer_idx * grid.points_per_axis() + k;
    }
    let field = partial_norm_field(f, p.inner())?;
    Ok(field[outer_idx])
}
