//! Kernels `k_j(x, z) = (2π)^{-d} ∫ σ_j(x, ξ) e^{iξ·z} dξ` and the off-support
//! representation `T_σ f(x) = ∫ k(x, x - y) f(y) dy`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::dyadic::DyadicDecomposition;
use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::{Grid, SampledFunction};
use crate::symbols::SymbolClassParams;

/// Threshold below which a sample counts as outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-14;

/// Which pieces a kernel was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPieces {
    Single(usize),
    /// Pieces `0..=J`.
    Sum,
}

/// Samples of `z ↦ k(x, z)` on the centred grid `[-R, R)^d`.
///
/// For multipliers the kernel does not depend on `x` and `x()` is `None`.
#[derive(Debug, Clone)]
pub struct Kernel {
    samples: SampledFunction,
    x: Option<Vec<f64>>,
    params: SymbolClassParams,
    levels: usize,
    pieces: KernelPieces,
}

impl Kernel {
    pub fn grid(&self) -> &Grid {
        self.samples.grid()
    }

    pub fn samples(&self) -> &SampledFunction {
        &self.samples
    }

    pub fn values(&self) -> &[Complex64] {
        self.samples.values()
    }

    pub fn x(&self) -> Option<&[f64]> {
        self.x.as_deref()
    }

    /// Class parameters of the originating symbol.
    pub fn params(&self) -> &SymbolClassParams {
        &self.params
    }

    /// Truncation level `J` of the decomposition.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn pieces(&self) -> KernelPieces {
        self.pieces
    }

    /// `∂_z^β k`, computed spectrally (the samples are band-limited by construction).
    pub fn z_derivative(&self, beta: &[usize]) -> Result<Kernel> {
        Ok(Kernel { samples: fourier::spectral_derivative(&self.samples, beta)?, ..self.clone() })
    }

    /// `(|z|, |k(z)|)` for every sample, in grid order.
    pub fn radial_profile(&self) -> Vec<(f64, f64)> {
        let g = self.grid();
        let d = g.dim();
        self.values()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let p = g.point(i);
                (p[..d].iter().map(|c| c * c).sum::<f64>().sqrt(), v.norm())
            })
            .collect()
    }
}

/// `k_j(x, ·)` by inverse DFT of the piece `σ_j(x, ·)`.
pub fn kernel_piece(dd: &DyadicDecomposition, j: usize, x: Option<&[f64]>) -> Result<Kernel> {
    let piece = dd.piece(j, x)?;
    let mut values = piece.into_values();
    fourier::inverse(dd.grid(), &mut values);
    Ok(Kernel {
        samples: SampledFunction::new(*dd.grid(), values)?,
        x: stored_x(dd, x),
        params: *dd.symbol().params(),
        levels: dd.levels(),
        pieces: KernelPieces::Single(j),
    })
}

/// `Σ_{j <= J} k_j(x, ·)`, the kernel of `σ(x, ·) η(2^{-J} ·)`.
pub fn kernel_sum(dd: &DyadicDecomposition, x: Option<&[f64]>) -> Result<Kernel> {
    let pieces = (0..=dd.levels())
        .into_par_iter()
        .map(|j| kernel_piece(dd, j, x))
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![Complex64::new(0.0, 0.0); dd.grid().len()];
    for k in &pieces {
        for (acc, v) in values.iter_mut().zip(k.values()) {
            *acc += v;
        }
    }
    Ok(Kernel {
        samples: SampledFunction::new(*dd.grid(), values)?,
        x: stored_x(dd, x),
        params: *dd.symbol().params(),
        levels: dd.levels(),
        pieces: KernelPieces::Sum,
    })
}

fn stored_x(dd: &DyadicDecomposition, x: Option<&[f64]>) -> Option<Vec<f64>> {
    match dd.symbol().kind() {
        crate::symbols::SymbolKind::Multiplier => None,
        _ => x.map(<[f64]>::to_vec),
    }
}

/// `h^d Σ_{y ∈ supp f} k(x, x - y) f(y)`, with `x - y` taken as the periodic minimum image.
///
/// `x` must be a grid point at periodic distance at least `2h` from the
/// support of `f` (samples with `|f| > 1e-14`).
pub fn offsupport_apply(k: &Kernel, f: &SampledFunction, x: &[f64]) -> Result<Complex64> {
    let grid = *f.grid();
    if !grid.matches(k.grid()) {
        return Err(Error::invalid("kernel and function live on different grids"));
    }
    if let Some(kx) = k.x() {
        if kx.len() != x.len() || kx.iter().zip(x).any(|(a, b)| (a - b).abs() > 1e-9 * grid.spacing()) {
            return Err(Error::invalid(format!("kernel was computed at x = {kx:?}, not at {x:?}")));
        }
    }
    let xi = grid.locate(x)?;
    let d = grid.dim();
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let xidx = grid.unravel(xi);

    let mut nearest = f64::INFINITY;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut zidx = [0usize; crate::grid::MAX_DIM];
    for (yi, fy) in f.values().iter().enumerate() {
        if fy.norm() <= SUPPORT_THRESHOLD {
            continue;
        }
        let yidx = grid.unravel(yi);
        let mut dist2 = 0.0;
        for a in 0..d {
            // (x - y) mod n, re-centred so that index n/2 is z = 0
            let diff = (xidx[a] + n - yidx[a]) % n;
            zidx[a] = (diff + n / 2) % n;
            let z = grid.coord(zidx[a]);
            dist2 += z * z;
        }
        nearest = nearest.min(dist2.sqrt());
        acc += k.values()[grid.ravel(&zidx[..d])] * fy;
    }
    if nearest < 2.0 * h * (1.0 - 1e-12) {
        return Err(Error::precondition(format!(
            "x = {x:?} is within {nearest:.3e} of supp f; at least 2h = {:.3e} is required",
            2.0 * h
        )));
    }
    Ok(acc * grid.cell_volume())
}
