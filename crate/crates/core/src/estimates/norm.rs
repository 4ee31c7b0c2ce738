//! Operator norm estimates on `L^p` grids, the product-form norm bound, and the
//! resolution probe for the necessary condition.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};
use crate::mixed_norm::{holder_dual, iterated_norm, mixed_norm, MixedExponent};
use crate::psido::{apply_psido, discrete_adjoint_apply};
use crate::random::random_band_limited;
use crate::symbols::{Symbol, SymbolKind};

/// Inputs of `c' Π_i max(p_i, (p_i - 1)^{-1/p_i}) (c₁ + c_q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormBoundInputs {
    pub p: MixedExponent,
    pub c1: f64,
    pub cq: f64,
    /// Structural constant; not determined by the theory, default 1.
    pub cprime: f64,
}

impl NormBoundInputs {
    pub fn new(p: MixedExponent, c1: f64, cq: f64, cprime: f64) -> Result<Self> {
        for (name, v) in [("c1", c1), ("cq", cq), ("cprime", cprime)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(NormBoundInputs { p, c1, cq, cprime })
    }
}

/// `c' Π_i max(p_i, (p_i - 1)^{-1/p_i}) (c₁ + c_q)`.
///
/// The factors are sorted before multiplying so the result is exactly
/// invariant under permutations of `p`.
pub fn theorem_norm_bound(inp: &NormBoundInputs) -> f64 {
    let mut factors: Vec<f64> = inp.p.exponents().iter().map(|&p| p.max((p - 1.0).powf(-1.0 / p))).collect();
    factors.sort_by(f64::total_cmp);
    inp.cprime * factors.iter().product::<f64>() * (inp.c1 + inp.cq)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    /// `√λ_max(T*T)` by power iteration; `p = (2, …, 2)` only.
    PowerIterationP2,
    /// Best `‖Tf‖_p / ‖f‖_p` over random starts refined by ascent; a lower bound.
    RandomAscent,
}

/// Iteration limits and the RNG seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBudget {
    /// Power iterations, or Boyd iterations per start for the ascent.
    pub iterations: usize,
    /// Random starts (ascent only).
    pub restarts: usize,
    /// Random-direction refinement trials per start (ascent only).
    pub refinements: usize,
    /// Relative change below which an iteration counts as converged.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for NormBudget {
    fn default() -> Self {
        NormBudget { iterations: 200, restarts: 8, refinements: 64, tolerance: 1e-9, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    pub converged: bool,
    pub iterations: usize,
    /// Always true for the ascent: the value bounds the discrete norm from below.
    pub lower_bound: bool,
}

/// Estimates `‖T_σ‖_{L^p → L^p}` on `grid`.
pub fn operator_norm_estimate(
    s: &Symbol,
    p: &MixedExponent,
    grid: &Grid,
    method: NormMethod,
    budget: &NormBudget,
) -> Result<NormEstimate> {
    if p.dim() != grid.dim() {
        return Err(Error::invalid("exponent dimension differs from grid dimension"));
    }
    if budget.iterations == 0 {
        return Err(Error::invalid("iteration budget must be positive"));
    }
    match method {
        NormMethod::PowerIterationP2 => {
            if p.exponents().iter().any(|&v| v != 2.0) {
                return Err(Error::invalid("power iteration requires p = (2, …, 2)"));
            }
            power_iteration(s, grid, budget)
        }
        NormMethod::RandomAscent => random_ascent(s, p, grid, budget),
    }
}

fn power_iteration(s: &Symbol, grid: &Grid, budget: &NormBudget) -> Result<NormEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut v = random_band_limited(*grid, 1.0, &mut rng);
    let mut lambda = 0.0f64;
    for it in 1..=budget.iterations {
        let w = discrete_adjoint_apply(s, &apply_psido(s, &v)?)?;
        let next = w.inner(&v)?.re;
        let norm = w.l2_norm();
        if norm == 0.0 {
            return Ok(NormEstimate { value: 0.0, method: NormMethod::PowerIterationP2, converged: true, iterations: it, lower_bound: false });
        }
        let converged = (next - lambda).abs() <= budget.tolerance * next.abs();
        lambda = next;
        if converged {
            return Ok(NormEstimate {
                value: lambda.max(0.0).sqrt(),
                method: NormMethod::PowerIterationP2,
                converged: true,
                iterations: it,
                lower_bound: false,
            });
        }
        v = w.scale(Complex64::new(1.0 / norm, 0.0));
    }
    Ok(NormEstimate {
        value: lambda.max(0.0).sqrt(),
        method: NormMethod::PowerIterationP2,
        converged: false,
        iterations: budget.iterations,
        lower_bound: false,
    })
}

/// Duality map: the unit vector `J` of `L^{p'}` with `⟨g, J⟩ = ‖g‖_p`, built
/// level by level from the partial norms of `g`.
fn duality_map(g: &SampledFunction, p: &MixedExponent) -> SampledFunction {
    let grid = *g.grid();
    let d = grid.dim();
    let n = grid.points_per_axis();
    let e = p.exponents();
    let abs: Vec<f64> = g.values().iter().map(|v| v.norm()).collect();
    // levels[k] = field after reducing the first k axes, over the trailing d - k axes
    let mut levels = vec![abs.clone()];
    for k in 0..d {
        let next = iterated_norm(&levels[k], &grid, &e[k..=k]);
        levels.push(next);
    }
    let total = levels[d][0];
    if total == 0.0 {
        return SampledFunction::zeros(grid);
    }
    let values = g
        .values()
        .iter()
        .enumerate()
        .map(|(flat, v)| {
            if abs[flat] == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            // |g|^{p1-1} G1^{p2-p1} … G_{d-1}^{pd-p_{d-1}} / ‖g‖^{pd-1}, all scaled by ‖g‖ for safety
            let mut log_mag = (e[0] - 1.0) * (abs[flat] / total).ln();
            for k in 1..d {
                let stride = n.pow((d - k) as u32);
                let gk = levels[k][flat % stride] / total;
                log_mag += (e[k] - e[k - 1]) * gk.ln();
            }
            (v / abs[flat]) * log_mag.exp()
        })
        .collect();
    SampledFunction::from_parts_unchecked(grid, values)
}

fn ratio(s: &Symbol, p: &MixedExponent, f: &SampledFunction) -> Result<f64> {
    let nf = mixed_norm(f, p)?;
    if nf == 0.0 {
        return Ok(0.0);
    }
    Ok(mixed_norm(&apply_psido(s, f)?, p)? / nf)
}

fn normalize(f: &SampledFunction, p: &MixedExponent) -> Result<SampledFunction> {
    let n = mixed_norm(f, p)?;
    Ok(f.scale(Complex64::new(1.0 / n, 0.0)))
}

fn random_ascent(s: &Symbol, p: &MixedExponent, grid: &Grid, budget: &NormBudget) -> Result<NormEstimate> {
    if let Some(c) = s.as_constant() {
        // ‖c f‖ = |c| ‖f‖ for every f
        return Ok(NormEstimate { value: c.norm(), method: NormMethod::RandomAscent, converged: true, iterations: 0, lower_bound: true });
    }
    let pd = holder_dual(p);
    let restarts = budget.restarts.max(1);
    let bands = [1.0, 0.5, 0.25, 0.125];
    let runs = (0..restarts)
        .into_par_iter()
        .map(|r| -> Result<(f64, bool, usize)> {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed.wrapping_add(r as u64));
            let mut f = normalize(&random_band_limited(*grid, bands[r % bands.len()], &mut rng), p)?;
            let mut best = ratio(s, p, &f)?;
            let mut converged = false;
            let mut iterations = 0;
            for it in 1..=budget.iterations {
                iterations = it;
                let g = apply_psido(s, &f)?;
                let z = discrete_adjoint_apply(s, &duality_map(&g, p))?;
                let cand = duality_map(&z, &pd);
                if mixed_norm(&cand, p)? == 0.0 {
                    converged = true;
                    break;
                }
                let cand = normalize(&cand, p)?;
                let value = ratio(s, p, &cand)?;
                if value > best * (1.0 + budget.tolerance) {
                    best = value;
                    f = cand;
                } else {
                    converged = true;
                    break;
                }
            }
            // refinement along random band-limited directions with step halving
            let mut step = 0.5;
            for _ in 0..budget.refinements {
                let dir = normalize(&random_band_limited(*grid, bands[rng.random_range(0..bands.len())], &mut rng), p)?;
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let cand = f.add(&dir.scale(Complex64::new(sign * step, 0.0)))?;
                let value = ratio(s, p, &cand)?;
                if value > best {
                    best = value;
                    f = normalize(&cand, p)?;
                } else {
                    step *= 0.7;
                }
            }
            Ok((best, converged, iterations))
        })
        .collect::<Result<Vec<_>>>()?;
    let (value, converged, iterations) = runs
        .iter()
        .cloned()
        .fold((0.0f64, true, 0usize), |acc, r| (acc.0.max(r.0), acc.1 && r.1, acc.2 + r.2));
    Ok(NormEstimate { value, method: NormMethod::RandomAscent, converged, iterations, lower_bound: true })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeEntry {
    pub n: usize,
    pub estimate: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub entries: Vec<ProbeEntry>,
    /// `last / first - 1`.
    pub growth: f64,
    /// `max / min - 1`.
    pub variation: f64,
    pub threshold: f64,
    /// `growth >= threshold`.
    pub grows: bool,
}

/// Runs the ascent estimate at each resolution with `R` fixed and reports the
/// growth across the sweep.
pub fn necessary_condition_probe(
    s: &Symbol,
    p: f64,
    half_extent: f64,
    resolutions: &[usize],
    budget: &NormBudget,
    threshold: f64,
) -> Result<ProbeReport> {
    if s.kind() != SymbolKind::Multiplier {
        return Err(Error::invalid("the probe is defined for multipliers"));
    }
    if resolutions.len() < 2 {
        return Err(Error::invalid("the probe needs at least two resolutions"));
    }
    let exp = MixedExponent::new(vec![p])?;
    let entries = resolutions
        .iter()
        .map(|&n| {
            let grid = Grid::new(1, n, half_extent)?;
            let est = operator_norm_estimate(s, &exp, &grid, NormMethod::RandomAscent, budget)?;
            Ok(ProbeEntry { n, estimate: est.value, converged: est.converged })
        })
        .collect::<Result<Vec<_>>>()?;
    let first = entries[0].estimate;
    let last = entries[entries.len() - 1].estimate;
    let max = entries.iter().map(|e| e.estimate).fold(0.0, f64::max);
    let min = entries.iter().map(|e| e.estimate).fold(f64::INFINITY, f64::min);
    let growth = last / first - 1.0;
    Ok(ProbeReport { growth, variation: max / min - 1.0, threshold, grows: growth >= threshold, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exponent(p: &[f64]) -> MixedExponent {
        MixedExponent::new(p.to_vec()).unwrap()
    }

    #[test]
    fn bound_examples() {
        let b = theorem_norm_bound(&NormBoundInputs::new(exponent(&[2.0, 2.0]), 1.0, 1.0, 1.0).unwrap());
        assert_eq!(b, 8.0);
        let b = theorem_norm_bound(&NormBoundInputs::new(exponent(&[1.5]), 1.0, 1.0, 1.0).unwrap());
        assert!((b - 2.0 * 2f64.powf(2.0 / 3.0)).abs() < 1e-14);
        let p = exponent(&[3.0, 1.2, 7.0]);
        let one = theorem_norm_bound(&NormBoundInputs::new(p.clone(), 0.7, 1.3, 2.0).unwrap());
        let two = theorem_norm_bound(&NormBoundInputs::new(p, 1.4, 2.6, 2.0).unwrap());
        assert_eq!(two, 2.0 * one);
        assert!(NormBoundInputs::new(exponent(&[2.0]), 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn duality_map_pairs_to_the_norm() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_band_limited(g, 1.0, &mut rng);
        let p = exponent(&[3.0, 1.5]);
        let j = duality_map(&f, &p);
        let pairing = f.inner(&j).unwrap();
        let norm = mixed_norm(&f, &p).unwrap();
        assert!((pairing.re - norm).abs() <= 1e-12 * norm && pairing.im.abs() <= 1e-12 * norm);
        assert!((mixed_norm(&j, &holder_dual(&p)).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn constant_symbols() {
        let g = Grid::new(1, 64, 4.0).unwrap();
        let s = Symbol::constant(Complex64::new(0.6, -0.8) * 3.0);
        let budget = NormBudget::default();
        for method in [NormMethod::PowerIterationP2, NormMethod::RandomAscent] {
            let est = operator_norm_estimate(&s, &exponent(&[2.0]), &g, method, &budget).unwrap();
            assert!((est.value - 3.0).abs() <= 1e-6);
        }
        let est = operator_norm_estimate(&s, &exponent(&[4.0]), &g, NormMethod::RandomAscent, &budget).unwrap();
        assert!((est.value - 3.0).abs() <= 1e-6);
        assert!(operator_norm_estimate(&s, &exponent(&[4.0]), &g, NormMethod::PowerIterationP2, &budget).is_err());
    }

    #[test]
    fn plancherel_norm_of_bessel_potential() {
        let g = Grid::new(1, 512, 16.0).unwrap();
        let est = operator_norm_estimate(
            &Symbol::bessel(-1.0),
            &exponent(&[2.0]),
            &g,
            NormMethod::PowerIterationP2,
            &NormBudget { iterations: 2000, ..NormBudget::default() },
        )
        .unwrap();
        assert!((est.value - 1.0).abs() <= 0.02, "{est:?}");
    }

    #[test]
    fn ascent_stays_below_power_iteration() {
        let g = Grid::new(1, 128, 8.0).unwrap();
        let s = Symbol::wave(-1.0);
        let budget = NormBudget { iterations: 5000, tolerance: 1e-13, ..NormBudget::default() };
        let p2 = exponent(&[2.0]);
        let top = operator_norm_estimate(&s, &p2, &g, NormMethod::PowerIterationP2, &budget).unwrap();
        let asc = operator_norm_estimate(&s, &p2, &g, NormMethod::RandomAscent, &NormBudget::default()).unwrap();
        assert!(asc.lower_bound);
        assert!(asc.value <= top.value + 1e-6, "{} vs {}", asc.value, top.value);
        // the exact discrete norm is max |σ| over the dual grid = 1 at ξ = 0
        assert!(top.value <= 1.0 + 1e-12);
    }

    #[test]
    fn probe_of_identity_is_flat() {
        let budget = NormBudget { restarts: 2, refinements: 4, ..NormBudget::default() };
        let rep = necessary_condition_probe(&Symbol::constant(Complex64::new(1.0, 0.0)), 4.0, 8.0, &[64, 128], &budget, 0.2)
            .unwrap();
        for e in &rep.entries {
            assert!((e.estimate - 1.0).abs() <= 1e-6);
        }
        assert!(!rep.grows);
    }

    proptest::proptest! {
        #[test]
        fn bound_is_permutation_invariant(a in 1.01f64..10.0, b in 1.01f64..10.0, c in 1.01f64..10.0) {
            let f = |v: Vec<f64>| theorem_norm_bound(&NormBoundInputs::new(MixedExponent::new(v).unwrap(), 1.0, 2.0, 1.0).unwrap());
            let x = f(vec![a, b, c]);
            proptest::prop_assert_eq!(x, f(vec![c, a, b]));
            proptest::prop_assert_eq!(x, f(vec![b, c, a]));
        }
    }
}
