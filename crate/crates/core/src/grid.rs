//! Uniform periodic grids on `[-R, R)^d` and complex samples on them.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

/// Guardrail on the total number of grid points.
pub const MAX_POINTS: usize = 1 << 28;

/// Uniform grid on the box `[-R, R)^d` with `n` points per axis.
///
/// Point `k` on an axis sits at `-R + k h` with `h = 2R / n`. The same type
/// describes the DFT-dual frequency grid, see [`Grid::dual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    half_extent: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, half_extent: f64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::invalid(format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::invalid(format!("points per axis must be even and >= 8, got {n}")));
        }
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(Error::invalid(format!("half extent must be positive, got {half_extent}")));
        }
        let total = (n as u128).pow(dim as u32);
        if total > MAX_POINTS as u128 {
            return Err(Error::invalid(format!("{n}^{dim} grid points exceeds the 2^28 limit")));
        }
        Ok(Grid { dim, n, half_extent })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.n as f64
    }

    /// `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Frequency spacing `π / R` of the dual grid.
    pub fn frequency_spacing(&self) -> f64 {
        std::f64::consts::PI / self.half_extent
    }

    /// Largest resolved frequency per axis, `π n / (2R)`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / (2.0 * self.half_extent)
    }

    /// The frequency grid: same `n`, half extent equal to the Nyquist bound.
    pub fn dual(&self) -> Grid {
        Grid { dim: self.dim, n: self.n, half_extent: self.nyquist() }
    }

    /// Same shape and extent up to relative rounding (duals of duals drift by an ulp).
    pub fn matches(&self, other: &Grid) -> bool {
        self.dim == other.dim
            && self.n == other.n
            && (self.half_extent - other.half_extent).abs() <= 1e-12 * self.half_extent
    }

    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        -self.half_extent + k as f64 * self.spacing()
    }

    /// Multi-index of a flat (row-major, axis 0 slowest) index.
    #[inline]
    pub fn unravel(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    #[inline]
    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.dim).fold(0, |acc, &i| acc * self.n + i)
    }

    /// Coordinates of a flat index, written into a fixed buffer (only the first `d` are used).
    #[inline]
    pub fn point(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.unravel(flat);
        let mut p = [0.0; MAX_DIM];
        for a in 0..self.dim {
            p[a] = self.coord(idx[a]);
        }
        p
    }

    /// Index of the grid coordinate equal to `x` up to `1e-9 h`, if any.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let h = self.spacing();
        let k = ((x + self.half_extent) / h).round();
        if k < 0.0 || k >= self.n as f64 {
            return None;
        }
        if (self.coord(k as usize) - x).abs() <= 1e-9 * h {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Flat index of the grid point at `x`; errors when `x` is off-grid.
    pub fn locate(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!("point has {} coordinates, grid has {}", x.len(), self.dim)));
        }
        let mut idx = [0usize; MAX_DIM];
        for a in 0..self.dim {
            idx[a] = self
                .index_of(x[a])
                .ok_or_else(|| Error::invalid(format!("coordinate {} = {} is not a grid point", a, x[a])))?;
        }
        Ok(self.ravel(&idx[..self.dim]))
    }

    /// Signed minimum-image difference `a - b` on the periodic axis.
    #[inline]
    pub fn periodic_delta(&self, a: f64, b: f64) -> f64 {
        let period = 2.0 * self.half_extent;
        let mut d = (a - b) % period;
        if d >= self.half_extent {
            d -= period;
        } else if d < -self.half_extent {
            d += period;
        }
        d
    }
}

/// Complex samples of a function on a [`Grid`], row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "sample count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(SampledFunction { grid, values })
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        SampledFunction { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledFunction { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F>(grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let d = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.point(i)[..d])).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn<F>(grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SampledFunction { grid: self.grid, values: self.values.iter().map(|&v| v * c).collect() }
    }

    pub fn conj(&self) -> Self {
        SampledFunction { grid: self.grid, values: self.values.iter().map(|v| v.conj()).collect() }
    }

    pub fn add(&self, other: &SampledFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(SampledFunction { grid: self.grid, values })
    }

    pub fn sub(&self, other: &SampledFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(SampledFunction { grid: self.grid, values })
    }

    pub fn mul(&self, other: &SampledFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(SampledFunction { grid: self.grid, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |self - other|`.
    pub fn max_abs_diff(&self, other: &SampledFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Discrete `L^2` norm `(h^d Σ |f|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Discrete pairing `h^d Σ f conj(g)`.
    pub fn inner(&self, other: &SampledFunction) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.grid.cell_volume())
    }

    pub(crate) fn check_same_grid(&self, other: &SampledFunction) -> Result<()> {
        if self.grid.matches(&other.grid) {
            Ok(())
        } else {
            Err(Error::invalid(format!("grid mismatch: {:?} vs {:?}", self.grid, other.grid)))
        }
    }
}

/// Left-endpoint Riemann sum `h^d Σ f`.
pub fn quadrature(f: &SampledFunction) -> Complex64 {
    let s: Complex64 = f.values.iter().sum();
    s * f.grid.cell_volume()
}

/// `|x|_p` for `p ∈ [1, ∞]`.
pub fn vector_pnorm(x: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("p-norm exponent must be >= 1, got {p}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("vector has non-finite entries"));
    }
    if p.is_infinite() {
        return Ok(x.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    if p == 2.0 {
        return Ok(x.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    let scale = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = x.iter().map(|v| (v.abs() / scale).powf(p)).sum();
    Ok(scale * s.powf(1.0 / p))
}

/// `⟨ξ⟩ = (1 + |ξ|^2)^{1/2}`.
#[inline]
pub fn japanese_bracket(xi: &[f64]) -> f64 {
    (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(1, 8, 1.0).is_ok());
        assert!(Grid::new(1, 6, 1.0).is_err());
        assert!(Grid::new(1, 9, 1.0).is_err());
        assert!(Grid::new(4, 8, 1.0).is_err());
        assert!(Grid::new(1, 8, 0.0).is_err());
        assert!(Grid::new(3, 1024, 1.0).is_err());
        assert!(Grid::new(2, 16384, 1.0).is_ok());
    }

    #[test]
    fn dual_grid_spacing() {
        let g = Grid::new(1, 64, 4.0).unwrap();
        let dual = g.dual();
        assert!((dual.spacing() - std::f64::consts::PI / 4.0).abs() < 1e-15);
        assert!((dual.half_extent() - g.nyquist()).abs() < 1e-15);
        assert!(dual.dual().matches(&g));
    }

    #[test]
    fn ravel_roundtrip() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        for flat in [0, 1, 7, 8, 63, 64, 511] {
            let idx = g.unravel(flat);
            assert_eq!(g.ravel(&idx[..3]), flat);
        }
        // axis 0 slowest
        assert_eq!(g.unravel(64)[0], 1);
        assert_eq!(g.unravel(1)[2], 1);
    }

    #[test]
    fn sample_validation() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        assert!(SampledFunction::new(g, vec![Complex64::new(0.0, 0.0); 7]).is_err());
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[3].im = f64::NAN;
        assert!(SampledFunction::new(g, v).is_err());
    }

    #[test]
    fn quadrature_examples() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let one = SampledFunction::from_real_fn(g, |_| 1.0).unwrap();
        assert_eq!(quadrature(&one), Complex64::new(2.0, 0.0));
        assert_eq!(quadrature(&SampledFunction::zeros(g)), Complex64::new(0.0, 0.0));

        let g = Grid::new(1, 1024, 16.0).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| (-x[0] * x[0]).exp()).unwrap();
        let q = quadrature(&f).re;
        let exact = std::f64::consts::PI.sqrt();
        assert!(((q - exact) / exact).abs() < 1e-10, "{q}");
    }

    #[test]
    fn quadrature_conjugation_is_exact() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let f = SampledFunction::from_fn(g, |x| Complex64::new(x[0].sin(), x[1] * x[0] + 0.3)).unwrap();
        assert_eq!(quadrature(&f.conj()), quadrature(&f).conj());
    }

    #[test]
    fn pnorm_examples() {
        assert_eq!(vector_pnorm(&[3.0, 4.0], 2.0).unwrap(), 5.0);
        assert_eq!(vector_pnorm(&[1.0, -1.0], f64::INFINITY).unwrap(), 1.0);
        assert_eq!(vector_pnorm(&[1.0, 1.0, 1.0], 1.0).unwrap(), 3.0);
        assert!(vector_pnorm(&[1.0], 0.5).is_err());
        assert!((vector_pnorm(&[1.0, 2.0], 3.0).unwrap() - 9f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(japanese_bracket(&[0.0]), 1.0);
        assert!((japanese_bracket(&[3.0, 4.0]) - 26f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn locate_and_periodic_delta() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        assert_eq!(g.locate(&[-1.0, -1.0]).unwrap(), 0);
        assert_eq!(g.locate(&[0.0, 0.25]).unwrap(), 4 * 8 + 5);
        assert!(g.locate(&[0.1, 0.0]).is_err());
        assert!(g.locate(&[1.0, 0.0]).is_err());
        assert_eq!(g.periodic_delta(0.75, -0.75), -0.5);
        assert_eq!(g.periodic_delta(0.25, -0.25), 0.5);
    }

    proptest::proptest! {
        #[test]
        fn bracket_is_monotone(a in -50.0f64..50.0, b in -50.0f64..50.0, c in -50.0f64..50.0, e in -50.0f64..50.0) {
            let (p, q) = ([a, b], [c, e]);
            let (np, nq) = (vector_pnorm(&p, 2.0).unwrap(), vector_pnorm(&q, 2.0).unwrap());
            if np <= nq {
                proptest::prop_assert!(japanese_bracket(&p) <= japanese_bracket(&q));
            } else {
                proptest::prop_assert!(japanese_bracket(&p) >= japanese_bracket(&q));
            }
        }
    }
}
