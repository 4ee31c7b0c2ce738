//! Per-piece envelopes `|z|^M |∂_x^α ∂_z^β k_j(x, z)| <= C 2^{j(d+m+δ|α|+|β|-ρM)}`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::psido::{kernel_piece, DyadicDecomposition};
use crate::symbols::{central_weights, MultiIndex, SymbolKind};

/// Step used for `x`-derivatives of kernel pieces.
const X_STEP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    /// `r_j` for `j = 1..=J`.
    pub ratios: Vec<f64>,
    /// `sup_z |z|^M |∂^α ∂^β k_j|` for `j = 1..=J`, before normalisation.
    pub sups: Vec<f64>,
    /// `d + m + δ|α| + |β| - ρM`.
    pub exponent: f64,
    /// `max r_j / min r_j` (infinite if some `r_j` is zero).
    pub spread: f64,
    pub factor: f64,
    pub pass: bool,
}

/// Computes `r_j = sup_z |z|^M |∂_x^α ∂_z^β k_j(x, z)| / 2^{j(d+m+δ|α|+|β|-ρM)}` for `j = 1..=J`
/// and passes when `max r_j / min r_j <= factor`.
///
/// `z`-derivatives are spectral with `|β| <= 2`; `x`-derivatives use central
/// differences of the pieces and need `x` (general symbols only; they vanish
/// for multipliers). `M` may not exceed the symbol's `ξ` budget `N'`.
pub fn dyadic_envelope_check(
    dd: &DyadicDecomposition,
    big_m: usize,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    x: Option<&[f64]>,
    factor: f64,
) -> Result<EnvelopeReport> {
    let grid = *dd.grid();
    let d = grid.dim();
    let params = *dd.symbol().params();
    if alpha.dim() != d || beta.dim() != d {
        return Err(Error::invalid("multi-index length differs from the grid dimension"));
    }
    if big_m > params.xi_budget {
        return Err(Error::invalid(format!("M = {big_m} exceeds the symbol's ξ budget N' = {}", params.xi_budget)));
    }
    if beta.order() > 2 {
        return Err(Error::invalid("only |β| <= 2 is supported for spectral z-derivatives"));
    }
    if !(factor >= 1.0) {
        return Err(Error::invalid(format!("factor must be at least 1, got {factor}")));
    }
    let exponent = d as f64 + params.m + params.delta * alpha.order() as f64 + beta.order() as f64
        - params.rho * big_m as f64;

    let sups = (1..=dd.levels())
        .into_par_iter()
        .map(|j| piece_sup(dd, j, big_m, alpha, beta, x))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> =
        sups.iter().enumerate().map(|(i, s)| s / 2f64.powf((i + 1) as f64 * exponent)).collect();
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = if min > 0.0 { max / min } else { f64::INFINITY };
    Ok(EnvelopeReport { ratios, sups, exponent, spread, factor, pass: spread <= factor })
}

fn piece_sup(
    dd: &DyadicDecomposition,
    j: usize,
    big_m: usize,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    x: Option<&[f64]>,
) -> Result<f64> {
    let grid = *dd.grid();
    let d = grid.dim();
    let values: Vec<Complex64> = if alpha.is_zero() {
        kernel_piece(dd, j, x)?.z_derivative(&beta.0)?.values().to_vec()
    } else if dd.symbol().kind() == SymbolKind::Multiplier {
        return Ok(0.0);
    } else {
        let x = x.ok_or_else(|| Error::invalid("x-derivatives of kernels need an x point"))?;
        x_derivative(dd, j, alpha, beta, x)?
    };
    let mut sup = 0.0f64;
    for (i, v) in values.iter().enumerate() {
        let p = grid.point(i);
        let r = p[..d].iter().map(|c| c * c).sum::<f64>().sqrt();
        sup = sup.max(r.powi(big_m as i32) * v.norm());
    }
    Ok(sup)
}

/// `∂_x^α ∂_z^β k_j(x, ·)` by fourth-order central differences in `x`.
fn x_derivative(dd: &DyadicDecomposition, j: usize, alpha: &MultiIndex, beta: &MultiIndex, x: &[f64]) -> Result<Vec<Complex64>> {
    let d = x.len();
    let stencils: Vec<(usize, Vec<(i32, f64)>)> =
        alpha.0.iter().enumerate().filter(|(_, &k)| k > 0).map(|(a, &k)| (a, central_weights(k))).collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); dd.grid().len()];
    let mut offsets = vec![0i32; stencils.len()];
    loop {
        let mut point = x.to_vec();
        let mut w = 1.0;
        for (slot, (axis, weights)) in stencils.iter().enumerate() {
            let (off, wt) = weights[offsets[slot] as usize];
            point[*axis] += off as f64 * X_STEP;
            w *= wt;
        }
        let k = kernel_piece(dd, j, Some(&point[..d]))?.z_derivative(&beta.0)?;
        for (a, v) in acc.iter_mut().zip(k.values()) {
            *a += w * v;
        }
        // odometer over stencil positions
        let mut slot = 0;
        loop {
            if slot == stencils.len() {
                let scale = X_STEP.powi(alpha.order() as i32);
                return Ok(acc.into_iter().map(|v| v / scale).collect());
            }
            offsets[slot] += 1;
            if (offsets[slot] as usize) < stencils[slot].1.len() {
                break;
            }
            offsets[slot] = 0;
            slot += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psido::dyadic_decompose;
    use crate::symbols::{Symbol, SymbolClassParams};
    use crate::Grid;

    fn zero() -> MultiIndex {
        MultiIndex::zero(1)
    }

    #[test]
    fn bessel_minus_one_envelope_is_flat() {
        let g = Grid::new(1, 1024, 8.0).unwrap();
        let dd = dyadic_decompose(&Symbol::bessel(-1.0), &g, 6).unwrap();
        let rep = dyadic_envelope_check(&dd, 0, &zero(), &zero(), None, 3.0).unwrap();
        assert_eq!(rep.ratios.len(), 6);
        assert!(rep.pass, "{:?}", rep.ratios);
        // brute-force recomputation of r_1 from the piece samples
        let k1 = kernel_piece(&dd, 1, None).unwrap();
        let sup = k1.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!((rep.ratios[0] - sup / 1.0).abs() <= 1e-15 * sup);
    }

    #[test]
    fn unit_symbol_rings_scale_like_the_dimension() {
        // σ ≡ 1: k_j is a dilated ring kernel, so sup |k_j| = 2^{jd} sup |k_1| / 2^d up to sampling
        let g = Grid::new(1, 1024, 8.0).unwrap();
        let dd = dyadic_decompose(&Symbol::constant(Complex64::new(1.0, 0.0)), &g, 6).unwrap();
        let rep = dyadic_envelope_check(&dd, 0, &zero(), &zero(), None, 1.5).unwrap();
        assert!(rep.pass, "{:?}", rep.ratios);
        assert!(rep.ratios.iter().all(|r| *r > 0.1));
    }

    #[test]
    fn weight_m_two_lowers_the_growth_by_two() {
        let g = Grid::new(1, 2048, 16.0).unwrap();
        let dd = dyadic_decompose(&Symbol::bessel(-1.0), &g, 6).unwrap();
        let m0 = dyadic_envelope_check(&dd, 0, &zero(), &zero(), None, 1e9).unwrap();
        let m2 = dyadic_envelope_check(&dd, 2, &zero(), &zero(), None, 1e9).unwrap();
        let slope = |s: &[f64]| log2_slope(s);
        let drop = slope(&m0.sups) - slope(&m2.sups);
        assert!((drop - 2.0).abs() <= 0.3, "{drop}");
    }

    fn log2_slope(s: &[f64]) -> f64 {
        let pts: Vec<(f64, f64)> = s.iter().enumerate().map(|(i, v)| (2f64.powi(i as i32 + 1), *v)).collect();
        // slope in ln-ln of 2^j vs value equals the log2 slope
        crate::estimates::log_log_slope(&pts)
    }

    #[test]
    fn z_derivative_adds_one_to_the_exponent() {
        let g = Grid::new(1, 2048, 16.0).unwrap();
        let dd = dyadic_decompose(&Symbol::bessel(-1.0), &g, 6).unwrap();
        let rep = dyadic_envelope_check(&dd, 0, &zero(), &MultiIndex(vec![1]), None, 3.0).unwrap();
        assert_eq!(rep.exponent, 1.0);
        assert!(rep.pass, "{:?}", rep.ratios);
    }

    #[test]
    fn x_derivatives_of_a_general_symbol() {
        let g = Grid::new(1, 512, 8.0).unwrap();
        let params = SymbolClassParams::new(-1.0, 1.0, 0.0, 4, 4).unwrap();
        let s = Symbol::from_fn(SymbolKind::General, params, |x, xi| {
            Complex64::new((2.0 + x[0].sin()) / crate::japanese_bracket(xi), 0.0)
        })
        .unwrap();
        let dd = dyadic_decompose(&s, &g, 5).unwrap();
        // ∂_x σ = cos x ⟨ξ⟩^{-1}; at x = 0 the pieces equal those of ⟨ξ⟩^{-1}
        let rep = dyadic_envelope_check(&dd, 0, &MultiIndex(vec![1]), &zero(), Some(&[0.0]), 3.0).unwrap();
        let plain = dyadic_decompose(&Symbol::bessel(-1.0), &g, 5).unwrap();
        let reference = dyadic_envelope_check(&plain, 0, &zero(), &zero(), None, 3.0).unwrap();
        for (a, b) in rep.sups.iter().zip(&reference.sups) {
            assert!((a - b).abs() <= 1e-5 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn rejections() {
        let g = Grid::new(1, 256, 8.0).unwrap();
        let dd = dyadic_decompose(&Symbol::bessel(-1.0), &g, 4).unwrap();
        assert!(dyadic_envelope_check(&dd, 5, &zero(), &zero(), None, 3.0).is_err());
        assert!(dyadic_envelope_check(&dd, 0, &zero(), &MultiIndex(vec![3]), None, 3.0).is_err());
        assert!(dyadic_envelope_check(&dd, 0, &zero(), &zero(), None, 0.5).is_err());
    }
}
