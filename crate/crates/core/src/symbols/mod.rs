//! Symbols `σ(x, ξ)` with their claimed class `S^m_{ρ,δ,N,N'}`.

mod class;
mod derivative;
mod seminorm;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::japanese_bracket;

pub use class::{verify_symbol_class, DerivativeBound, DerivativeBoundReport, SampleSet};
pub use derivative::{central_weights, default_step, finite_diff_derivative, finite_diff_derivative_with_steps, MAX_DERIVATIVE_ORDER};
pub use seminorm::{schwartz_seminorm, schwartz_term};

/// Order and derivative budget claimed for a symbol.
///
/// `x_budget` is `N` (derivatives in `x`) and `xi_budget` is `N'`. Parity of
/// the budgets is only enforced by the smoothness budget calculator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolClassParams {
    pub m: f64,
    pub rho: f64,
    pub delta: f64,
    pub x_budget: usize,
    pub xi_budget: usize,
}

impl SymbolClassParams {
    pub fn new(m: f64, rho: f64, delta: f64, x_budget: usize, xi_budget: usize) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::invalid("order m must be finite"));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::invalid(format!("rho must lie in [0, 1], got {rho}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::invalid(format!("delta must lie in [0, 1), got {delta}")));
        }
        Ok(SymbolClassParams { m, rho, delta, x_budget, xi_budget })
    }

    /// Weight exponent `m - ρ|β| + δ|α|` of the class bound.
    pub fn weight_exponent(&self, alpha_order: usize, beta_order: usize) -> f64 {
        self.m - self.rho * beta_order as f64 + self.delta * alpha_order as f64
    }
}

/// Multi-index `α ∈ N_0^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α| = Σ α_i`.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// All multi-indices of length `dim` with `|α| <= max_order`, graded by order.
    pub fn all_up_to(dim: usize, max_order: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for order in 0..=max_order {
            let mut current = vec![0; dim];
            compositions(order, 0, &mut current, &mut out);
        }
        out
    }
}

fn compositions(remaining: usize, axis: usize, current: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if axis + 1 == current.len() {
        current[axis] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    if current.is_empty() {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    for k in (0..=remaining).rev() {
        current[axis] = k;
        compositions(remaining - k, axis + 1, current, out);
    }
    current[axis] = 0;
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(" "))
    }
}

/// Structure of a symbol, used to pick fast operator paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    /// `σ(ξ)`, independent of `x`.
    Multiplier,
    /// `a(x)`, independent of `ξ`.
    Multiplication,
    /// `a(x) b(ξ)`.
    Separable,
    General,
}

/// One term `c e^{i k·x}` of a trigonometric series.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTerm {
    pub wavevector: Vec<f64>,
    pub coeff: Complex64,
}

/// Finite trigonometric series `a(x) = Σ c_j e^{i k_j·x}`.
///
/// Truncated series with slowly decaying coefficients stand in for
/// coefficients of limited smoothness: derivatives up to the design order
/// stay bounded as terms are added, higher ones grow with the truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    dim: usize,
    terms: Vec<FourierTerm>,
}

impl FourierSeries {
    pub fn new(dim: usize, terms: Vec<FourierTerm>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("series dimension must be positive"));
        }
        for t in &terms {
            if t.wavevector.len() != dim {
                return Err(Error::invalid(format!(
                    "wavevector {:?} does not have {dim} components",
                    t.wavevector
                )));
            }
            if !(t.coeff.re.is_finite() && t.coeff.im.is_finite()) || t.wavevector.iter().any(|k| !k.is_finite()) {
                return Err(Error::invalid("series terms must be finite"));
            }
        }
        Ok(FourierSeries { dim, terms })
    }

    /// `1 + Σ_{k=1}^{count} k^{-(s + 3/2)} cos(k ω x_1)`.
    ///
    /// `∂^r a` is bounded uniformly in `count` exactly when `r <= s`.
    pub fn with_smoothness(dim: usize, smoothness: usize, count: usize, base_frequency: f64) -> Result<Self> {
        let mut terms = vec![FourierTerm { wavevector: vec![0.0; dim], coeff: Complex64::new(1.0, 0.0) }];
        let decay = smoothness as f64 + 1.5;
        for k in 1..=count {
            let c = 0.5 * (k as f64).powf(-decay);
            for sign in [1.0, -1.0] {
                let mut wv = vec![0.0; dim];
                wv[0] = sign * k as f64 * base_frequency;
                terms.push(FourierTerm { wavevector: wv, coeff: Complex64::new(c, 0.0) });
            }
        }
        Self::new(dim, terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[FourierTerm] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let phase: f64 = t.wavevector.iter().zip(x).map(|(k, v)| k * v).sum();
                t.coeff * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }
}

pub type SymbolFn = dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync;

/// Concrete symbol families.
#[derive(Clone)]
pub enum SymbolFamily {
    Constant(Complex64),
    /// `⟨ξ⟩^m`.
    Bessel { order: f64 },
    /// `e^{i⟨ξ⟩} ⟨ξ⟩^m`.
    Wave { order: f64 },
    /// `a(x)`.
    Multiplication(FourierSeries),
    /// `a(x) b(ξ)` with `b` one of the multiplier families.
    Separable { space: FourierSeries, frequency: Box<SymbolFamily> },
    Custom { kind: SymbolKind, eval: Arc<SymbolFn> },
}

impl fmt::Debug for SymbolFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolFamily::Constant(c) => write!(f, "Constant({c})"),
            SymbolFamily::Bessel { order } => write!(f, "Bessel({order})"),
            SymbolFamily::Wave { order } => write!(f, "Wave({order})"),
            SymbolFamily::Multiplication(s) => write!(f, "Multiplication({} terms)", s.terms.len()),
            SymbolFamily::Separable { space, frequency } => {
                write!(f, "Separable({} terms, {:?})", space.terms.len(), frequency)
            }
            SymbolFamily::Custom { kind, .. } => write!(f, "Custom({kind:?})"),
        }
    }
}

impl SymbolFamily {
    fn kind(&self) -> SymbolKind {
        match self {
            SymbolFamily::Constant(_) | SymbolFamily::Bessel { .. } | SymbolFamily::Wave { .. } => {
                SymbolKind::Multiplier
            }
            SymbolFamily::Multiplication(_) => SymbolKind::Multiplication,
            SymbolFamily::Separable { .. } => SymbolKind::Separable,
            SymbolFamily::Custom { kind, .. } => *kind,
        }
    }

    fn eval_raw(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        match self {
            SymbolFamily::Constant(c) => *c,
            SymbolFamily::Bessel { order } => Complex64::new(japanese_bracket(xi).powf(*order), 0.0),
            SymbolFamily::Wave { order } => {
                let b = japanese_bracket(xi);
                Complex64::from_polar(b.powf(*order), b)
            }
            SymbolFamily::Multiplication(a) => a.eval(x),
            SymbolFamily::Separable { space, frequency } => space.eval(x) * frequency.eval_raw(x, xi),
            SymbolFamily::Custom { eval, .. } => eval(x, xi),
        }
    }
}

/// A symbol: an evaluator `(x, ξ) -> C` plus its claimed class.
#[derive(Debug, Clone)]
pub struct Symbol {
    family: SymbolFamily,
    params: SymbolClassParams,
}

impl Symbol {
    pub fn constant(c: Complex64) -> Self {
        Symbol {
            family: SymbolFamily::Constant(c),
            params: SymbolClassParams { m: 0.0, rho: 1.0, delta: 0.0, x_budget: 4, xi_budget: 4 },
        }
    }

    /// `⟨ξ⟩^m`, claimed in `S^m_{1,0}`.
    pub fn bessel(m: f64) -> Self {
        Symbol {
            family: SymbolFamily::Bessel { order: m },
            params: SymbolClassParams { m, rho: 1.0, delta: 0.0, x_budget: 4, xi_budget: 4 },
        }
    }

    /// `e^{i⟨ξ⟩}⟨ξ⟩^m`, claimed in `S^m_{0,0}`.
    pub fn wave(m: f64) -> Self {
        Symbol {
            family: SymbolFamily::Wave { order: m },
            params: SymbolClassParams { m, rho: 0.0, delta: 0.0, x_budget: 4, xi_budget: 4 },
        }
    }

    /// Multiplication by `a(x)`; the claimed `x` budget is `x_budget`.
    pub fn multiplication(a: FourierSeries, x_budget: usize) -> Self {
        Symbol {
            family: SymbolFamily::Multiplication(a),
            params: SymbolClassParams { m: 0.0, rho: 1.0, delta: 0.0, x_budget, xi_budget: 4 },
        }
    }

    /// `a(x) b(ξ)`, inheriting the class claim of `b` with `x` budget `x_budget`.
    pub fn separable(a: FourierSeries, b: Symbol, x_budget: usize) -> Result<Self> {
        if b.kind() != SymbolKind::Multiplier || matches!(b.family, SymbolFamily::Custom { .. }) {
            return Err(Error::invalid("separable symbols need a built-in multiplier factor"));
        }
        let params = SymbolClassParams { x_budget, ..b.params };
        Ok(Symbol { family: SymbolFamily::Separable { space: a, frequency: Box::new(b.family) }, params })
    }

    /// Arbitrary evaluator. `Separable` is not accepted here (the factors are unknown).
    pub fn from_fn<F>(kind: SymbolKind, params: SymbolClassParams, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    {
        if kind == SymbolKind::Separable {
            return Err(Error::invalid("custom symbols must be Multiplier, Multiplication or General"));
        }
        Ok(Symbol { family: SymbolFamily::Custom { kind, eval: Arc::new(f) }, params })
    }

    pub fn with_params(mut self, params: SymbolClassParams) -> Self {
        self.params = params;
        self
    }

    pub fn params(&self) -> &SymbolClassParams {
        &self.params
    }

    pub fn family(&self) -> &SymbolFamily {
        &self.family
    }

    pub fn kind(&self) -> SymbolKind {
        self.family.kind()
    }

    pub fn as_constant(&self) -> Option<Complex64> {
        match self.family {
            SymbolFamily::Constant(c) => Some(c),
            _ => None,
        }
    }

    /// Spatial dimension fixed by the symbol's coefficients, if any.
    pub fn dim(&self) -> Option<usize> {
        match &self.family {
            SymbolFamily::Multiplication(a) => Some(a.dim()),
            SymbolFamily::Separable { space, .. } => Some(space.dim()),
            _ => None,
        }
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != dim => Err(Error::invalid(format!("symbol is {d}-dimensional, grid is {dim}-dimensional"))),
            _ => Ok(()),
        }
    }

    /// Evaluation without the finiteness check.
    #[inline]
    pub fn eval_unchecked(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        self.family.eval_raw(x, xi)
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Result<Complex64> {
        if x.len() != xi.len() {
            return Err(Error::invalid(format!("x has {} components but xi has {}", x.len(), xi.len())));
        }
        if let Some(d) = self.dim() {
            if d != x.len() {
                return Err(Error::invalid(format!("symbol is {d}-dimensional, point is {}-dimensional", x.len())));
            }
        }
        let v = self.family.eval_raw(x, xi);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { x: x.to_vec(), xi: xi.to_vec() })
        }
    }

    /// `b(ξ)` for multipliers (and the frequency factor of separable symbols).
    pub(crate) fn frequency_factor(&self, xi: &[f64]) -> Complex64 {
        match &self.family {
            SymbolFamily::Separable { frequency, .. } => frequency.eval_raw(&ZEROS[..xi.len()], xi),
            SymbolFamily::Multiplication(_) => Complex64::new(1.0, 0.0),
            other => other.eval_raw(&ZEROS[..xi.len()], xi),
        }
    }

    /// `a(x)` for multiplication symbols (and the space factor of separable symbols).
    pub(crate) fn space_factor(&self, x: &[f64]) -> Complex64 {
        match &self.family {
            SymbolFamily::Separable { space, .. } => space.eval(x),
            SymbolFamily::Multiplication(a) => a.eval(x),
            other => other.eval_raw(x, &ZEROS[..x.len()]),
        }
    }
}

const ZEROS: [f64; crate::grid::MAX_DIM] = [0.0; crate::grid::MAX_DIM];
