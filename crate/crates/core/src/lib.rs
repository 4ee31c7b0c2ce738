//! Numerical laboratory for pseudodifferential operators with nonsmooth
//! Hörmander-class symbols.
//!
//! Functions live on a uniform periodic box `[-R, R)^d` ([`Grid`]), the
//! Fourier transform uses `û(ξ) = ∫ e^{-ix·ξ} u(x) dx` with the `(2π)^{-d}`
//! factor on the inverse, and operators act by
//! `T_σ f(x) = (2π)^{-d} ∫ e^{ix·ξ} σ(x, ξ) f̂(ξ) dξ`.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] and [`fourier`]: sampling, quadrature, transforms.
//! * [`symbols`]: symbol families, finite-difference class checks, Schwartz seminorms.
//! * [`mixed_norm`]: iterated Lebesgue norms `L^p` with `p ∈ (1, ∞)^d`.
//! * [`psido`]: operator application, the discrete adjoint, dyadic pieces and kernels.
//! * [`estimates`]: kernel decay fits, the cancellation-class condition,
//!   operator norm estimates and the smoothness budget calculator.

// `!(a < b)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimates;
pub mod fourier;
pub mod grid;
pub mod mixed_norm;
pub mod psido;
pub mod random;
pub mod symbols;

pub use error::{Error, Result};
pub use fourier::{fourier_transform, Direction};
pub use grid::{japanese_bracket, quadrature, vector_pnorm, Grid, SampledFunction};
pub use mixed_norm::{holder_dual, mixed_norm, partial_norm, MixedExponent};
pub use num_complex::Complex64;
pub use symbols::{MultiIndex, Symbol, SymbolClassParams, SymbolKind};
