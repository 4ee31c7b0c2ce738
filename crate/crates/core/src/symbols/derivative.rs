//! Mixed central differences for `∂_x^α ∂_ξ^β σ`.

use num_complex::Complex64;

use super::{MultiIndex, Symbol, SymbolKind};
use crate::error::{Error, Result};

/// Largest total order `|α| + |β|` accepted.
pub const MAX_DERIVATIVE_ORDER: usize = 8;

const MIN_HIGH_ORDER_STEP: f64 = 1e-4;

/// Fourth-order central stencil for the `order`-th derivative on unit spacing,
/// as `(offset, weight)` pairs with zero weights dropped.
///
/// Weights come from Fornberg's recursion on the nodes `-p..=p`,
/// `p = (order + 1) / 2 + 1`.
pub fn central_weights(order: usize) -> Vec<(i32, f64)> {
    if order == 0 {
        return vec![(0, 1.0)];
    }
    let p = (order.div_ceil(2) + 1) as i32;
    let nodes: Vec<f64> = (-p..=p).map(|k| k as f64).collect();
    let w = fornberg(0.0, &nodes, order);
    (-p..=p)
        .zip(w)
        .filter_map(|(k, c)| if c[order] != 0.0 { Some((k, c[order])) } else { None })
        .collect()
}

/// Fornberg's algorithm: `c[i][k]` is the weight of node `i` for the `k`-th derivative at `x0`.
fn fornberg(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; max_order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}

/// Step balancing truncation `h^4` against roundoff `ε / h^k`.
pub fn default_step(total_order: usize) -> f64 {
    f64::EPSILON.powf(1.0 / (total_order as f64 + 4.0))
}

/// Central-difference approximation of `∂_x^α ∂_ξ^β σ(x, ξ)`, one axis at a time.
///
/// Derivatives that vanish by the symbol's structure (`x`-derivatives of a
/// multiplier, `ξ`-derivatives of a multiplication symbol) return exactly zero.
pub fn finite_diff_derivative(
    s: &Symbol,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    x: &[f64],
    xi: &[f64],
    step: f64,
) -> Result<Complex64> {
    finite_diff_derivative_with_steps(s, alpha, beta, x, xi, step, step)
}

/// As [`finite_diff_derivative`] with separate steps in `x` and in `ξ`.
///
/// Symbols of class `S^m_{ρ,δ}` vary on the scale `⟨ξ⟩^ρ` in frequency, so
/// the class check scales `step_xi` accordingly to keep the relative error uniform.
pub fn finite_diff_derivative_with_steps(
    s: &Symbol,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    x: &[f64],
    xi: &[f64],
    step_x: f64,
    step_xi: f64,
) -> Result<Complex64> {
    let d = x.len();
    if xi.len() != d || alpha.dim() != d || beta.dim() != d {
        return Err(Error::invalid("dimension mismatch between point and multi-indices"));
    }
    let total = alpha.order() + beta.order();
    if total > MAX_DERIVATIVE_ORDER {
        return Err(Error::invalid(format!(
            "total derivative order {total} exceeds {MAX_DERIVATIVE_ORDER}"
        )));
    }
    for step in [step_x, step_xi] {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid(format!("step must be positive, got {step}")));
        }
        if total >= 4 && step < MIN_HIGH_ORDER_STEP {
        return Err(Error::invalid(format!(
                "step {step} below {MIN_HIGH_ORDER_STEP} for derivative order {total}: cancellation"
            )));
        }
    }
    match s.kind() {
        SymbolKind::Multiplier if !alpha.is_zero() => return Ok(Complex64::new(0.0, 0.0)),
        SymbolKind::Multiplication if !beta.is_zero() => return Ok(Complex64::new(0.0, 0.0)),
        _ => {}
    }
    if total == 0 {
        return s.eval(x, xi);
    }

    // axes 0..d are x, d..2d are ξ
    let stencils: Vec<(usize, Vec<(i32, f64)>)> = alpha
        .0
        .iter()
        .chain(beta.0.iter())
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(axis, &k)| (axis, central_weights(k)))
        .collect();

    let mut point = vec![0.0; 2 * d];
    point[..d].copy_from_slice(x);
    point[d..].copy_from_slice(xi);
    let steps = [step_x, step_xi];
    let sum = accumulate(s, &stencils, 0, &mut point, d, steps)?;
    let scale = step_x.powi(alpha.order() as i32) * step_xi.powi(beta.order() as i32);
    Ok(sum / scale)
}

fn accumulate(
    s: &Symbol,
    stencils: &[(usize, Vec<(i32, f64)>)],
    level: usize,
    point: &mut [f64],
    d: usize,
    steps: [f64; 2],
) -> Result<Complex64> {
    if level == stencils.len() {
        return s.eval(&point[..d], &point[d..]);
    }
    let (axis, ref weights) = stencils[level];
    let centre = point[axis];
    let step = steps[usize::from(axis >= d)];
    let mut sum = Complex64::new(0.0, 0.0);
    for &(offset, w) in weights {
        point[axis] = centre + offset as f64 * step;
        sum += w * accumulate(s, stencils, level + 1, point, d, steps)?;
    }
    point[axis] = centre;
    Ok(sum)
}
