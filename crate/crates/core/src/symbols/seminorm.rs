use super::MultiIndex;
use crate::error::{Error, Result};
use crate::fourier::spectral_derivative;
use crate::grid::SampledFunction;

const MAX_SPECTRAL_ORDER: usize = 4;

/// `sup_x |x^α ∂^β f(x)|` with `∂^β` computed spectrally.
pub fn schwartz_term(f: &SampledFunction, alpha: &MultiIndex, beta: &MultiIndex) -> Result<f64> {
    let grid = f.grid();
    let d = grid.dim();
    if alpha.dim() != d || beta.dim() != d {
        return Err(Error::invalid("multi-index dimension differs from grid dimension"));
    }
    if beta.order() > MAX_SPECTRAL_ORDER {
        return Err(Error::invalid(format!("spectral derivative order above {MAX_SPECTRAL_ORDER}")));
    }
    let df = spectral_derivative(f, &beta.0)?;
    Ok(weighted_sup(&df, alpha))
}

fn weighted_sup(df: &SampledFunction, alpha: &MultiIndex) -> f64 {
    let grid = df.grid();
    let d = grid.dim();
    df.values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let p = grid.point(i);
            let w: f64 = (0..d).map(|a| p[a].abs().powi(alpha.0[a] as i32)).product();
            w * v.norm()
        })
        .fold(0.0, f64::max)
}

/// `|f|_{N,N'} = sup_{|α| <= N, |β| <= N'} sup_x |x^α ∂^β f(x)|`.
pub fn schwartz_seminorm(f: &SampledFunction, n: usize, n_prime: usize) -> Result<f64> {
    if n_prime > MAX_SPECTRAL_ORDER {
        return Err(Error::invalid(format!("N' = {n_prime} exceeds the spectral accuracy guard {MAX_SPECTRAL_ORDER}")));
    }
    let d = f.grid().dim();
    let alphas = MultiIndex::all_up_to(d, n);
    let mut best = 0.0f64;
    for beta in MultiIndex::all_up_to(d, n_prime) {
        let df = spectral_derivative(f, &beta.0)?;
        for alpha in &alphas {
            best = best.max(weighted_sup(&df, alpha));
        }
    }
    Ok(best)
}
