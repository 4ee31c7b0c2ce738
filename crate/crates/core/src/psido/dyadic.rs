//! Littlewood–Paley splitting `σ = σ η + Σ_j σ ζ(2^{-j} ·)` of a symbol.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction, MAX_DIM};
use crate::symbols::{Symbol, SymbolKind};

/// `t^5 (126 - 420 t + 540 t² - 315 t³ + 70 t⁴)`: rises from 0 to 1 on `[0, 1]`
/// with four vanishing derivatives at both ends.
fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t.powi(5) * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + 70.0 * t))))
}

/// Base cutoff as a function of `r = |ξ|`: 1 on `r <= 1`, 0 on `r >= 2`, `C⁴` between.
pub fn eta(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        1.0 - smoothstep(r - 1.0)
    }
}

/// Ring cutoff `ζ(r) = η(r) - η(2r)`, supported in `1/2 <= r <= 2`.
pub fn zeta(r: f64) -> f64 {
    eta(r) - eta(2.0 * r)
}

/// Default truncation `⌊log₂ Nyquist⌋ - 1`, at least 1.
pub fn default_levels(grid: &Grid) -> usize {
    (grid.nyquist().log2().floor() as i64 - 1).max(1) as usize
}

/// Pieces `σ₀ = σ η` and `σ_j = σ ζ(2^{-j} ·)`, `1 <= j <= J`, on one grid.
#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    symbol: Symbol,
    grid: Grid,
    levels: usize,
}

/// Splits `s` into `J + 1` pieces over `grid`.
///
/// `J` is rejected when the whole ring `j = J` lies beyond every grid frequency
/// (`2^{J-1} >= √d · Nyquist`), where it would carry no samples at all.
pub fn dyadic_decompose(s: &Symbol, grid: &Grid, levels: usize) -> Result<DyadicDecomposition> {
    s.check_dim(grid.dim())?;
    if levels == 0 {
        return Err(Error::invalid("the number of dyadic levels J must be at least 1"));
    }
    let reach = (grid.dim() as f64).sqrt() * grid.nyquist();
    if levels >= 64 || 2f64.powi(levels as i32 - 1) >= reach {
        return Err(Error::invalid(format!(
            "J = {levels} is too large: ring {levels} starts at 2^{} beyond the grid's largest frequency {reach:.3}",
            levels as i64 - 1
        )));
    }
    Ok(DyadicDecomposition { symbol: s.clone(), grid: *grid, levels })
}

impl DyadicDecomposition {
    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    /// The space grid; pieces live on its dual.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `J`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Cutoff weight of piece `j` at frequency `ξ`.
    pub fn weight(&self, j: usize, xi: &[f64]) -> f64 {
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if j == 0 {
            eta(r)
        } else {
            zeta(r / 2f64.powi(j as i32))
        }
    }

    /// Weight of the truncated sum, `η(2^{-J} ξ)`.
    pub fn truncation_weight(&self, xi: &[f64]) -> f64 {
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        eta(r / 2f64.powi(self.levels as i32))
    }

    fn check_x<'a>(&self, x: Option<&'a [f64]>) -> Result<&'a [f64]> {
        let d = self.grid.dim();
        match x {
            Some(x) if x.len() == d => Ok(x),
            Some(x) => Err(Error::invalid(format!("x has {} coordinates, grid has {d}", x.len()))),
            None if self.symbol.kind() == SymbolKind::Multiplier => Ok(&ZEROS[..d]),
            None => Err(Error::invalid("an x point is required for symbols that depend on x")),
        }
    }

    fn sampled(&self, x: Option<&[f64]>, weight: impl Fn(&[f64]) -> f64 + Sync) -> Result<SampledFunction> {
        let x = self.check_x(x)?;
        let dual = self.grid.dual();
        let d = dual.dim();
        let values = (0..dual.len())
            .into_par_iter()
            .map(|m| {
                let xi = dual.point(m);
                let w = weight(&xi[..d]);
                if w == 0.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                self.symbol.eval(x, &xi[..d]).map(|v| v * w)
            })
            .collect::<Result<Vec<_>>>()?;
        SampledFunction::new(dual, values)
    }

    /// `σ_j(x, ·)` on the dual grid. `x` may be omitted for multipliers.
    pub fn piece(&self, j: usize, x: Option<&[f64]>) -> Result<SampledFunction> {
        if j > self.levels {
            return Err(Error::invalid(format!("piece {j} requested but J = {}", self.levels)));
        }
        self.sampled(x, |xi| self.weight(j, xi))
    }

    /// `σ(x, ·) η(2^{-J} ·)` on the dual grid.
    pub fn truncated_symbol(&self, x: Option<&[f64]>) -> Result<SampledFunction> {
        self.sampled(x, |xi| self.truncation_weight(xi))
    }
}

const ZEROS: [f64; MAX_DIM] = [0.0; MAX_DIM];
