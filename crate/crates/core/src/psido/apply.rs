//! `T_σ f(x) = (2π)^{-d} ∫ e^{ix·ξ} σ(x, ξ) f̂(ξ) dξ` on a grid, and its exact discrete adjoint.
//!
//! The discrete operator is `T = K F` with `F` the forward DFT and
//! `K_{km} = c₀ e^{i x_k·ξ_m} σ(x_k, ξ_m)`, `c₀ = (Δξ / 2π)^d`. Structured
//! symbols take shortcuts that compute the same matrix:
//!
//! | kind           | `T`                      | `T*`                            |
//! |----------------|--------------------------|---------------------------------|
//! | constant `c`   | `c I`                    | `c̄ I`                           |
//! | multiplier     | `F⁻¹ diag(b) F`          | `F⁻¹ diag(b̄) F`                 |
//! | multiplication | `diag(a)`                | `diag(ā)`                       |
//! | separable      | `diag(a) F⁻¹ diag(b) F`  | `F⁻¹ diag(b̄) F diag(ā)`         |
//! | general        | `K F`, `O(n^{2d})`       | `(h^d / c₀) F⁻¹ K^H`            |

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::{Grid, SampledFunction, MAX_DIM};
use crate::symbols::{Symbol, SymbolKind};

/// Largest `n` accepted by the `O(n^{2d})` general path in dimension `d`.
pub fn general_path_cap(dim: usize) -> usize {
    match dim {
        1 => 8192,
        2 => 128,
        _ => 32,
    }
}

/// Applies `T_σ` to `f`, choosing the cheapest exact path for the symbol's kind.
///
/// General (`x`- and `ξ`-dependent) symbols cost `O(n^{2d})` symbol
/// evaluations and are refused above [`general_path_cap`].
pub fn apply_psido(s: &Symbol, f: &SampledFunction) -> Result<SampledFunction> {
    let grid = *f.grid();
    s.check_dim(grid.dim())?;
    if let Some(c) = s.as_constant() {
        check_finite(c, &[], &[])?;
        return Ok(f.scale(c));
    }
    match s.kind() {
        SymbolKind::Multiplier => {
            let b = frequency_samples(s, &grid)?;
            Ok(multiplier(&grid, f.values().to_vec(), &b, false))
        }
        SymbolKind::Multiplication => {
            let a = space_samples(s, &grid)?;
            Ok(pointwise(&grid, f.values(), &a, false))
        }
        SymbolKind::Separable => {
            let a = space_samples(s, &grid)?;
            let b = frequency_samples(s, &grid)?;
            let inner = multiplier(&grid, f.values().to_vec(), &b, false);
            Ok(pointwise(&grid, inner.values(), &a, false))
        }
        SymbolKind::General => apply_general(s, f),
    }
}

/// The `O(n^{2d})` direct evaluation for any symbol kind.
///
/// Used for general symbols, and exposed so that the structured paths can be
/// checked against it.
pub fn apply_general(s: &Symbol, f: &SampledFunction) -> Result<SampledFunction> {
    let grid = *f.grid();
    s.check_dim(grid.dim())?;
    check_cap(&grid)?;
    let mut fhat = f.values().to_vec();
    fourier::forward(&grid, &mut fhat);
    let c0 = (grid.frequency_spacing() / (2.0 * std::f64::consts::PI)).powi(grid.dim() as i32);
    let out = kernel_rows(s, &grid, &fhat, c0, false)?;
    Ok(SampledFunction::from_parts_unchecked(grid, out))
}

/// Applies the conjugate transpose of the discretised `T_σ` with respect to
/// `⟨u, v⟩ = h^d Σ u v̄`.
pub fn discrete_adjoint_apply(s: &Symbol, g: &SampledFunction) -> Result<SampledFunction> {
    let grid = *g.grid();
    s.check_dim(grid.dim())?;
    if let Some(c) = s.as_constant() {
        check_finite(c, &[], &[])?;
        return Ok(g.scale(c.conj()));
    }
    match s.kind() {
        SymbolKind::Multiplier => {
            let b = frequency_samples(s, &grid)?;
            Ok(multiplier(&grid, g.values().to_vec(), &b, true))
        }
        SymbolKind::Multiplication => {
            let a = space_samples(s, &grid)?;
            Ok(pointwise(&grid, g.values(), &a, true))
        }
        SymbolKind::Separable => {
            let a = space_samples(s, &grid)?;
            let b = frequency_samples(s, &grid)?;
            let inner = pointwise(&grid, g.values(), &a, true);
            Ok(multiplier(&grid, inner.into_values(), &b, true))
        }
        SymbolKind::General => adjoint_general(s, g),
    }
}

/// Adjoint of [`apply_general`].
pub fn adjoint_general(s: &Symbol, g: &SampledFunction) -> Result<SampledFunction> {
    let grid = *g.grid();
    s.check_dim(grid.dim())?;
    check_cap(&grid)?;
    let d = grid.dim() as i32;
    let c0 = (grid.frequency_spacing() / (2.0 * std::f64::consts::PI)).powi(d);
    // (K^H w)_m = c0 Σ_k e^{-i x_k·ξ_m} conj σ(x_k, ξ_m) w_k, then (h^d / c0) F⁻¹
    let mut spectrum = kernel_rows(s, &grid, g.values(), c0, true)?;
    fourier::inverse(&grid, &mut spectrum);
    let scale = grid.cell_volume() / c0;
    spectrum.iter_mut().for_each(|v| *v *= scale);
    Ok(SampledFunction::from_parts_unchecked(grid, spectrum))
}

fn check_cap(grid: &Grid) -> Result<()> {
    let cap = general_path_cap(grid.dim());
    if grid.points_per_axis() > cap {
        return Err(Error::invalid(format!(
            "general-symbol application costs O(n^(2d)); n = {} exceeds the cap {cap} for d = {}",
            grid.points_per_axis(),
            grid.dim()
        )));
    }
    Ok(())
}

fn check_finite(v: Complex64, x: &[f64], xi: &[f64]) -> Result<()> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Evaluation { x: x.to_vec(), xi: xi.to_vec() })
    }
}

/// `b(ξ_m)` on the dual grid.
pub(crate) fn frequency_samples(s: &Symbol, grid: &Grid) -> Result<Vec<Complex64>> {
    let dual = grid.dual();
    let d = grid.dim();
    (0..dual.len())
        .into_par_iter()
        .map(|m| {
            let xi = dual.point(m);
            let v = s.frequency_factor(&xi[..d]);
            check_finite(v, &[0.0; MAX_DIM][..d], &xi[..d]).map(|_| v)
        })
        .collect()
}

/// `a(x_k)` on the space grid.
fn space_samples(s: &Symbol, grid: &Grid) -> Result<Vec<Complex64>> {
    let d = grid.dim();
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let x = grid.point(k);
            let v = s.space_factor(&x[..d]);
            check_finite(v, &x[..d], &[0.0; MAX_DIM][..d]).map(|_| v)
        })
        .collect()
}

fn multiplier(grid: &Grid, mut values: Vec<Complex64>, b: &[Complex64], conjugate: bool) -> SampledFunction {
    fourier::forward(grid, &mut values);
    for (v, m) in values.iter_mut().zip(b) {
        *v *= if conjugate { m.conj() } else { *m };
    }
    fourier::inverse(grid, &mut values);
    SampledFunction::from_parts_unchecked(*grid, values)
}

fn pointwise(grid: &Grid, values: &[Complex64], a: &[Complex64], conjugate: bool) -> SampledFunction {
    let out = values
        .iter()
        .zip(a)
        .map(|(v, m)| v * if conjugate { m.conj() } else { *m })
        .collect();
    SampledFunction::from_parts_unchecked(*grid, out)
}

/// Per-axis table `e^{i x_k ξ_m}`, indexed `[k * n + m]`.
fn phase_table(grid: &Grid) -> Vec<Complex64> {
    let n = grid.points_per_axis();
    let dual = grid.dual();
    let mut t = Vec::with_capacity(n * n);
    for k in 0..n {
        for m in 0..n {
            t.push(Complex64::from_polar(1.0, grid.coord(k) * dual.coord(m)));
        }
    }
    t
}

/// Forward (`adjoint = false`): `out_k = c0 Σ_m e^{i x_k·ξ_m} σ(x_k, ξ_m) input_m`.
/// Adjoint: `out_m = c0 Σ_k e^{-i x_k·ξ_m} conj σ(x_k, ξ_m) input_k`.
fn kernel_rows(s: &Symbol, grid: &Grid, input: &[Complex64], c0: f64, adjoint: bool) -> Result<Vec<Complex64>> {
    let d = grid.dim();
    let n = grid.points_per_axis();
    let dual = grid.dual();
    let table = phase_table(grid);
    let len = grid.len();

    (0..len)
        .into_par_iter()
        .map(|row| {
            let ri = grid.unravel(row);
            let row_pt = if adjoint { dual.point(row) } else { grid.point(row) };
            let mut acc = Complex64::new(0.0, 0.0);
            for (col, &u) in input.iter().enumerate() {
                let ci = grid.unravel(col);
                let col_pt = if adjoint { grid.point(col) } else { dual.point(col) };
                let (x, xi, xi_idx, x_idx) =
                    if adjoint { (&col_pt, &row_pt, &ri, &ci) } else { (&row_pt, &col_pt, &ci, &ri) };
                let sigma = s.eval_unchecked(&x[..d], &xi[..d]);
                if !(sigma.re.is_finite() && sigma.im.is_finite()) {
                    return Err(Error::Evaluation { x: x[..d].to_vec(), xi: xi[..d].to_vec() });
                }
                let mut phase = Complex64::new(1.0, 0.0);
                for a in 0..d {
                    phase *= table[x_idx[a] * n + xi_idx[a]];
                }
                acc += if adjoint { (phase * sigma).conj() } else { phase * sigma } * u;
            }
            Ok(acc * c0)
        })
        .collect()
}
