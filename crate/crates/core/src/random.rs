//! Seeded random test functions.

use num_complex::Complex64;
use rand::Rng;

use crate::fourier;
use crate::grid::{Grid, SampledFunction};

/// Random function whose spectrum is supported in `|ξ_a| < band · ξ_max` on every axis.
///
/// Spectral coefficients are uniform in the unit square; the result is
/// normalised to unit discrete `L^2` norm.
pub fn random_band_limited<R: Rng + ?Sized>(grid: Grid, band: f64, rng: &mut R) -> SampledFunction {
    let dual = grid.dual();
    let d = grid.dim();
    let cut = band * dual.half_extent();
    let mut values: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let p = dual.point(i);
            if p[..d].iter().all(|v| v.abs() < cut) {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    fourier::inverse(&grid, &mut values);
    let f = SampledFunction::from_parts_unchecked(grid, values);
    let norm = f.l2_norm();
    if norm > 0.0 {
        f.scale(Complex64::new(1.0 / norm, 0.0))
    } else {
        f
    }
}
