//! The cancellation class `F_{l,t}^{y'}` and the far-field condition
//! `∫_{|x'-x'₀|_∞ > N t} ‖Tf(·, x')‖_{p̄} dx' <= c₁ ‖f‖_{p̄,1}`.
//!
//! Coordinates split as `x = (x̄, x')` with `x̄ ∈ R^l` the leading (innermost)
//! axes and `x' ∈ R^{d-l}` the trailing ones. Distances in `x'` are periodic.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};
use crate::mixed_norm::{iterated_norm, partial_norm_field, MixedExponent};
use crate::psido::SUPPORT_THRESHOLD;

/// One-dimensional profile of a test-function factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `exp(-1 / (1 - (r/radius)²))` on `|r| < radius`, a tensor product over axes.
    Bump { radius: f64 },
    /// `exp(-r² / (2 width²))`; only allowed for the `x̄` factor, which need not be compact.
    Gaussian { width: f64 },
}

impl Profile {
    fn eval(&self, r: f64) -> f64 {
        match *self {
            Profile::Bump { radius } => {
                let s = r / radius;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - s * s)).exp()
                }
            }
            Profile::Gaussian { width } => (-0.5 * (r / width).powi(2)).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        let v = match *self {
            Profile::Bump { radius } => radius,
            Profile::Gaussian { width } => width,
        };
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!("profile scale must be positive, got {v}")))
        }
    }
}

/// Largest admissible bump radius for the outer factor at scale `t`.
pub fn max_outer_radius(grid: &Grid, t: f64) -> f64 {
    t / 2.0 - grid.spacing() / 2.0
}

/// Builds `f(x̄, x') = g(x̄) (φ(x' - a) - φ(x' - b))` with both translates in the box
/// `|x' - y'|_∞ <= t`.
///
/// `a` and `b` are the grid point nearest `y'` moved `∓s` steps along the first
/// outer axis, `s = ⌊t / (2h)⌋`. Both translates are filled from one table of
/// `φ` at integer offsets, so every `x̄` row has zero mean up to summation order.
pub fn make_cancellation_test_function(
    grid: &Grid,
    l: usize,
    t: f64,
    y_prime: &[f64],
    inner: Profile,
    outer: Profile,
) -> Result<SampledFunction> {
    let d = grid.dim();
    let h = grid.spacing();
    let n = grid.points_per_axis();
    if l >= d {
        return Err(Error::invalid(format!("split l = {l} must leave an outer axis (d = {d})")));
    }
    if y_prime.len() != d - l {
        return Err(Error::invalid(format!("y' needs {} coordinates", d - l)));
    }
    if !(t >= 4.0 * h) {
        return Err(Error::invalid(format!("t = {t} is below 4h = {} for this grid", 4.0 * h)));
    }
    if t >= grid.half_extent() {
        return Err(Error::invalid(format!("t = {t} must be below R = {}", grid.half_extent())));
    }
    inner.validate()?;
    outer.validate()?;
    let radius = match outer {
        Profile::Bump { radius } => radius,
        Profile::Gaussian { .. } => return Err(Error::invalid("the x' factor must be a compactly supported bump")),
    };
    if radius > max_outer_radius(grid, t) * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "bump radius {radius} exceeds t/2 - h/2 = {}",
            max_outer_radius(grid, t)
        )));
    }

    let centre: Vec<i64> = y_prime.iter().map(|&c| ((c + grid.half_extent()) / h).round() as i64).collect();
    let shift = (t / (2.0 * h)).floor() as i64;
    // φ at integer offsets -w..=w
    let w = (radius / h).ceil() as i64;
    let table: Vec<f64> = (-w..=w).map(|k| outer.eval(k as f64 * h)).collect();
    let phi = |off: &[i64]| -> f64 {
        off.iter().map(|&o| if o.abs() > w { 0.0 } else { table[(o + w) as usize] }).product()
    };
    let wrap = |k: i64| -> i64 {
        let m = k.rem_euclid(n as i64);
        if m >= n as i64 / 2 {
            m - n as i64
        } else {
            m
        }
    };

    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut off_a = vec![0i64; d - l];
    let mut off_b = vec![0i64; d - l];
    for (flat, v) in values.iter_mut().enumerate() {
        let idx = grid.unravel(flat);
        let g: f64 = idx[..l].iter().map(|&i| inner.eval(grid.coord(i))).product();
        if g == 0.0 {
            continue;
        }
        for a in 0..d - l {
            let rel = wrap(idx[l + a] as i64 - centre[a]);
            let s = if a == 0 { shift } else { 0 };
            off_a[a] = rel + s;
            off_b[a] = rel - s;
        }
        *v = Complex64::new(g * (phi(&off_a) - phi(&off_b)), 0.0);
    }
    SampledFunction::new(*grid, values)
}

/// Parameters of one far-field evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CZCheckConfig {
    /// Number of inner axes `l`.
    pub l: usize,
    pub t: f64,
    pub x0_prime: Vec<f64>,
    /// Exclusion multiplier `N > 1`.
    pub n_const: f64,
    /// Full exponent with split `l`; only `p̄ = (p_1, …, p_l)` is used.
    pub pbar: MixedExponent,
}

impl CZCheckConfig {
    /// `N` defaults to `d + 1`.
    pub fn new(dim: usize, l: usize, t: f64, x0_prime: Vec<f64>, pbar: MixedExponent) -> Result<Self> {
        let cfg = CZCheckConfig { l, t, x0_prime, n_const: dim as f64 + 1.0, pbar };
        cfg.validate(dim)?;
        Ok(cfg)
    }

    pub fn with_n_const(mut self, n_const: f64) -> Self {
        self.n_const = n_const;
        self
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.l >= dim {
            return Err(Error::invalid(format!("split l = {} must be below d = {dim}", self.l)));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(Error::invalid(format!("t must be positive, got {}", self.t)));
        }
        if !(self.n_const.is_finite() && self.n_const > 1.0) {
            return Err(Error::invalid(format!("N must exceed 1, got {}", self.n_const)));
        }
        if self.x0_prime.len() != dim - self.l {
            return Err(Error::invalid(format!("x'0 needs {} coordinates", dim - self.l)));
        }
        if self.pbar.dim() != dim || self.pbar.split() != Some(self.l) {
            return Err(Error::invalid(format!("exponent must have {dim} entries and split l = {}", self.l)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CZReport {
    pub t: f64,
    /// `∫_{|x'-x'₀|_∞ > N t} ‖Tf(·, x')‖_{p̄} dx'`.
    pub lhs: f64,
    /// `‖f‖_{p̄,1}`.
    pub rhs: f64,
    pub ratio: f64,
}

/// Periodic `|x' - x'₀|_∞` for every outer grid point, row-major over the trailing axes.
fn outer_distances(grid: &Grid, l: usize, x0: &[f64]) -> Vec<f64> {
    let d = grid.dim();
    let n = grid.points_per_axis();
    let count = n.pow((d - l) as u32);
    (0..count)
        .map(|mut flat| {
            let mut dist = 0.0f64;
            for a in (0..d - l).rev() {
                let k = flat % n;
                flat /= n;
                dist = dist.max(grid.periodic_delta(grid.coord(k), x0[a]).abs());
            }
            dist
        })
        .collect()
}

/// Verifies `f ∈ F_{l,t}^{x'₀}`: support in the `t`-box and zero `x'`-mean on every `x̄` row.
pub fn check_cancellation_class(f: &SampledFunction, cfg: &CZCheckConfig) -> Result<()> {
    let grid = *f.grid();
    cfg.validate(grid.dim())?;
    let d = grid.dim();
    let l = cfg.l;
    let n = grid.points_per_axis();
    let outer = n.pow((d - l) as u32);
    let dist = outer_distances(&grid, l, &cfg.x0_prime);
    let slack = 1e-9 * grid.spacing();
    let cell = grid.spacing().powi((d - l) as i32);

    for (flat, v) in f.values().iter().enumerate() {
        if dist[flat % outer] > cfg.t + slack && v.norm() > SUPPORT_THRESHOLD {
            return Err(Error::precondition(format!(
                "support: |f| = {:.3e} at an outer point farther than t = {} from x'0",
                v.norm(),
                cfg.t
            )));
        }
    }
    for (row, chunk) in f.values().chunks(outer).enumerate() {
        let mean: Complex64 = chunk.iter().sum::<Complex64>() * cell;
        let mass: f64 = chunk.iter().map(|v| v.norm()).sum::<f64>() * cell;
        if mean.norm() > 1e-12 * (1.0 + mass) {
            return Err(Error::precondition(format!(
                "zero-mean: the x'-integral on inner row {row} is {:.3e}, not 0",
                mean.norm()
            )));
        }
    }
    Ok(())
}

/// Evaluates the far-field ratio for one cancelling `f`.
pub fn cz_condition_check<F>(apply: F, cfg: &CZCheckConfig, f: &SampledFunction) -> Result<CZReport>
where
    F: Fn(&SampledFunction) -> Result<SampledFunction>,
{
    check_cancellation_class(f, cfg)?;
    let grid = *f.grid();
    let d = grid.dim();
    let l = cfg.l;
    let reach = cfg.n_const * cfg.t;
    if reach >= grid.half_extent() {
        return Err(Error::invalid(format!(
            "N t = {reach} reaches the periodic half extent R = {}; the exclusion region is empty",
            grid.half_extent()
        )));
    }
    let tf = apply(f)?;
    if !tf.grid().matches(&grid) {
        return Err(Error::invalid("operator returned samples on a different grid"));
    }
    let field = partial_norm_field(&tf, cfg.pbar.inner())?;
    let dist = outer_distances(&grid, l, &cfg.x0_prime);
    let cell = grid.spacing().powi((d - l) as i32);
    let lhs: f64 = field.iter().zip(&dist).filter(|(_, r)| **r > reach).map(|(v, _)| *v).sum::<f64>() * cell;

    let abs: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let mut exps = cfg.pbar.inner().to_vec();
    exps.extend(std::iter::repeat_n(1.0, d - l));
    let rhs = iterated_norm(&abs, &grid, &exps)[0];
    if rhs == 0.0 {
        return Err(Error::invalid("f vanishes identically"));
    }
    Ok(CZReport { t: cfg.t, lhs, rhs, ratio: lhs / rhs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CZSweep {
    pub entries: Vec<CZReport>,
    pub max_ratio: f64,
    pub median_ratio: f64,
    /// `max / median`; 0 when every ratio is 0.
    pub uniformity: f64,
    pub all_finite: bool,
}

/// Runs [`cz_condition_check`] for each `(t, f)` case in parallel; entries keep input order.
pub fn cz_sweep<F>(apply: F, cfg: &CZCheckConfig, cases: &[(f64, SampledFunction)]) -> Result<CZSweep>
where
    F: Fn(&SampledFunction) -> Result<SampledFunction> + Sync,
{
    if cases.is_empty() {
        return Err(Error::invalid("sweep needs at least one t"));
    }
    let entries = cases
        .par_iter()
        .map(|(t, f)| cz_condition_check(&apply, &CZCheckConfig { t: *t, ..cfg.clone() }, f))
        .collect::<Result<Vec<_>>>()?;
    let mut sorted: Vec<f64> = entries.iter().map(|e| e.ratio).collect();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let median = if k % 2 == 1 { sorted[k / 2] } else { 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]) };
    let max = sorted[k - 1];
    let uniformity = if max == 0.0 { 0.0 } else { max / median };
    Ok(CZSweep { all_finite: sorted.iter().all(|r| r.is_finite()), entries, max_ratio: max, median_ratio: median, uniformity })
}
