//! Discrete Fourier transforms under the convention `û(ξ) = ∫ e^{-ix·ξ} u(x) dx`.
//!
//! Both grids are stored in centred order: point `k` of the space grid is
//! `x_k = -R + k h` and point `m` of the dual grid is `ξ_m = -πn/(2R) + m π/R`.
//! With `n` even the phase `e^{-i x_k ξ_m}` factors as
//! `(-1)^{n/2} (-1)^k (-1)^m e^{-2πikm/n}`, so each axis is a plain FFT
//! wrapped in sign flips.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::Result;
use crate::grid::{Grid, SampledFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Space samples to samples of `û` on the dual grid.
    Forward,
    /// Dual-grid samples back to space, with the `(2π)^{-d}` factor.
    Inverse,
}

/// Transforms `f` and returns samples on `f.grid().dual()`.
pub fn fourier_transform(f: &SampledFunction, direction: Direction) -> Result<SampledFunction> {
    let mut values = f.values().to_vec();
    transform_in_place(f.grid(), &mut values, direction);
    SampledFunction::new(f.grid().dual(), values)
}

/// Forward transform of space samples on `space`, in place.
pub(crate) fn forward(space: &Grid, values: &mut [Complex64]) {
    transform_in_place(space, values, Direction::Forward);
}

/// Inverse transform of dual-grid samples back onto `space`, in place.
pub(crate) fn inverse(space: &Grid, values: &mut [Complex64]) {
    transform_in_place(&space.dual(), values, Direction::Inverse);
}

/// `input` is the grid the samples live on (the dual grid for `Inverse`).
fn transform_in_place(input: &Grid, values: &mut [Complex64], direction: Direction) {
    let d = input.dim();
    let n = input.points_per_axis();
    debug_assert_eq!(values.len(), input.len());

    let per_axis = match direction {
        Direction::Forward => input.spacing(),
        Direction::Inverse => input.spacing() / (2.0 * std::f64::consts::PI),
    };
    let half_sign = if (n / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let factor = (half_sign * per_axis).powi(d as i32);

    apply_parity(input, values, 1.0);

    let fft_dir = match direction {
        Direction::Forward => FftDirection::Forward,
        Direction::Inverse => FftDirection::Inverse,
    };
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft(n, fft_dir);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let outer = n.pow(axis as u32);
        if stride == 1 {
            for chunk in values.chunks_exact_mut(n) {
                fft.process_with_scratch(chunk, &mut scratch);
            }
            continue;
        }
        for o in 0..outer {
            for i in 0..stride {
                let base = o * n * stride + i;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = values[base + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    values[base + k * stride] = *v;
                }
            }
        }
    }

    apply_parity(input, values, factor);
}

/// Multiplies sample `idx` by `scale · (-1)^{Σ idx_a}`.
fn apply_parity(grid: &Grid, values: &mut [Complex64], scale: f64) {
    let d = grid.dim();
    for (flat, v) in values.iter_mut().enumerate() {
        let idx = grid.unravel(flat);
        let parity: usize = idx[..d].iter().sum();
        let s = if parity.is_multiple_of(2) { scale } else { -scale };
        *v *= s;
    }
}

/// Spectral derivative `∂^β f`: multiply `f̂` by `(iξ)^β` and invert.
///
/// For odd per-axis orders the Nyquist row (which has no partner `+ξ`) is zeroed.
pub fn spectral_derivative(f: &SampledFunction, beta: &[usize]) -> Result<SampledFunction> {
    let grid = *f.grid();
    if beta.len() != grid.dim() {
        return Err(crate::Error::invalid("derivative multi-index length differs from grid dimension"));
    }
    if beta.iter().all(|&b| b == 0) {
        return Ok(f.clone());
    }
    let mut values = f.values().to_vec();
    forward(&grid, &mut values);
    let dual = grid.dual();
    let d = grid.dim();
    for (flat, v) in values.iter_mut().enumerate() {
        let idx = dual.unravel(flat);
        let mut mult = Complex64::new(1.0, 0.0);
        for a in 0..d {
            if beta[a] == 0 {
                continue;
            }
            if idx[a] == 0 && beta[a] % 2 == 1 {
                mult = Complex64::new(0.0, 0.0);
                break;
            }
            let xi = dual.coord(idx[a]);
            mult *= Complex64::new(0.0, xi).powu(beta[a] as u32);
        }
        *v *= mult;
    }
    inverse(&grid, &mut values);
    SampledFunction::new(grid, values)
}
