//! Symbol and list arguments shared by flags and config files.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use psido_core::symbols::{FourierSeries, FourierTerm};
use psido_core::{Complex64, MultiIndex, Symbol, SymbolClassParams};

use crate::error::{LabError, Result};

/// One term `re + i im` times `e^{i k·x}` of a coefficient series `a(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffSpec {
    pub k: Vec<f64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Table form of a symbol: a kind tag, family parameters and optional class overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    /// `const`, `bessel`, `wave`, `multiplication` or `separable`.
    pub kind: String,
    /// `(re, im)` of a constant symbol.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<[f64; 2]>,
    /// Order of `⟨ξ⟩^order` (bessel, wave and the frequency factor of separable).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    /// Frequency factor of a separable symbol: `bessel` or `wave`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<String>,
    /// Design smoothness `s` of the generated series `1 + Σ k^{-(s+3/2)} cos(kωx₁)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Explicit series for `a(x)`, replacing the generated one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<CoeffSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "Nprime", skip_serializing_if = "Option::is_none")]
    pub n_prime: Option<usize>,
}

const DEFAULT_COUNT: usize = 8;
const DEFAULT_OMEGA: f64 = 1.0;

fn number(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| LabError::invalid(format!("{what}: cannot parse {s:?} as a number")))
}

fn integer(s: &str, what: &str) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| LabError::invalid(format!("{what}: cannot parse {s:?} as an integer")))
}

/// `S[,COUNT[,OMEGA]]` of a generated coefficient series.
fn series_args(spec: &mut SymbolSpec, args: &str, what: &str) -> Result<()> {
    let parts: Vec<&str> = args.split(',').collect();
    if parts.is_empty() || parts.len() > 3 || parts[0].trim().is_empty() {
        return Err(LabError::invalid(format!("{what}: expected SMOOTHNESS[,COUNT[,OMEGA]]")));
    }
    spec.smoothness = Some(integer(parts[0], what)?);
    if let Some(c) = parts.get(1) {
        spec.count = Some(integer(c, what)?);
    }
    if let Some(o) = parts.get(2) {
        spec.omega = Some(number(o, what)?);
    }
    Ok(())
}

impl SymbolSpec {
    /// Parses the tag form used on the command line:
    /// `const:RE[,IM]`, `bessel:M`, `wave:M`, `mult:S[,COUNT[,OMEGA]]`,
    /// `sep:S[,COUNT[,OMEGA]]/bessel:M` (or `/wave:M`).
    pub fn parse(text: &str) -> Result<Self> {
        let what = format!("symbol {text:?}");
        let (tag, args) = text.split_once(':').unwrap_or((text, ""));
        let mut spec = SymbolSpec::default();
        match tag.trim() {
            "const" | "constant" => {
                spec.kind = "const".into();
                let parts: Vec<&str> = args.split(',').collect();
                if args.is_empty() || parts.len() > 2 {
                    return Err(LabError::invalid(format!("{what}: expected const:RE[,IM]")));
                }
                let re = number(parts[0], &what)?;
                let im = parts.get(1).map(|s| number(s, &what)).transpose()?.unwrap_or(0.0);
                spec.value = Some([re, im]);
            }
            "bessel" | "wave" => {
                spec.kind = tag.trim().into();
                spec.order = Some(number(args, &what)?);
            }
            "mult" | "multiplication" => {
                spec.kind = "multiplication".into();
                series_args(&mut spec, args, &what)?;
            }
            "sep" | "separable" => {
                spec.kind = "separable".into();
                let (a, b) = args
                    .split_once('/')
                    .ok_or_else(|| LabError::invalid(format!("{what}: expected sep:S[,COUNT[,OMEGA]]/bessel:M")))?;
                series_args(&mut spec, a, &what)?;
                let (factor, order) = b
                    .split_once(':')
                    .ok_or_else(|| LabError::invalid(format!("{what}: frequency factor must be bessel:M or wave:M")))?;
                spec.factor = Some(factor.trim().into());
                spec.order = Some(number(order, &what)?);
            }
            other => {
                return Err(LabError::invalid(format!(
                    "{what}: unknown kind {other:?} (const, bessel, wave, mult, sep)"
                )))
            }
        }
        Ok(spec)
    }

    fn series(&self, d: usize) -> Result<FourierSeries> {
        if let Some(coeffs) = &self.coeffs {
            let terms = coeffs
                .iter()
                .map(|c| FourierTerm { wavevector: c.k.clone(), coeff: Complex64::new(c.re, c.im) })
                .collect();
            return Ok(FourierSeries::new(d, terms)?);
        }
        let s = self
            .smoothness
            .ok_or_else(|| LabError::invalid(format!("{} symbol needs `smoothness` or `coeffs`", self.kind)))?;
        Ok(FourierSeries::with_smoothness(d, s, self.count.unwrap_or(DEFAULT_COUNT), self.omega.unwrap_or(DEFAULT_OMEGA))?)
    }

    fn x_budget(&self) -> usize {
        self.n.or(self.smoothness).unwrap_or(4)
    }

    fn frequency_factor(&self) -> Result<Symbol> {
        let order = self.order.unwrap_or(0.0);
        match self.factor.as_deref().unwrap_or("bessel") {
            "bessel" => Ok(Symbol::bessel(order)),
            "wave" => Ok(Symbol::wave(order)),
            other => Err(LabError::invalid(format!("frequency factor {other:?} must be bessel or wave"))),
        }
    }

    /// Builds the symbol for a `d`-dimensional grid, applying class overrides.
    pub fn build(&self, d: usize) -> Result<Symbol> {
        let base = match self.kind.as_str() {
            "const" | "constant" => {
                let [re, im] = self.value.unwrap_or([1.0, 0.0]);
                Symbol::constant(Complex64::new(re, im))
            }
            "bessel" => Symbol::bessel(self.order.unwrap_or(0.0)),
            "wave" => Symbol::wave(self.order.unwrap_or(0.0)),
            "mult" | "multiplication" => Symbol::multiplication(self.series(d)?, self.x_budget()),
            "sep" | "separable" => Symbol::separable(self.series(d)?, self.frequency_factor()?, self.x_budget())?,
            other => return Err(LabError::invalid(format!("unknown symbol kind {other:?}"))),
        };
        let p = *base.params();
        if self.m.is_none() && self.rho.is_none() && self.delta.is_none() && self.n.is_none() && self.n_prime.is_none() {
            return Ok(base);
        }
        let params = SymbolClassParams::new(
            self.m.unwrap_or(p.m),
            self.rho.unwrap_or(p.rho),
            self.delta.unwrap_or(p.delta),
            self.n.unwrap_or(p.x_budget),
            self.n_prime.unwrap_or(p.xi_budget),
        )?;
        Ok(base.with_params(params))
    }
}

/// A symbol given either as a tag string or as a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolArg {
    Tag(String),
    Table(Box<SymbolSpec>),
}

impl SymbolArg {
    pub fn resolve(&self) -> Result<SymbolSpec> {
        match self {
            SymbolArg::Tag(s) => SymbolSpec::parse(s),
            SymbolArg::Table(t) => Ok((**t).clone()),
        }
    }
}

impl FromStr for SymbolArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        SymbolSpec::parse(s).map_err(|e| e.to_string())?;
        Ok(SymbolArg::Tag(s.to_string()))
    }
}

/// Comma-separated list on the command line, an array in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T> {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<T>().map_err(|_| format!("cannot parse {p:?} in list {s:?}")))
            .collect::<std::result::Result<Vec<T>, String>>()
            .map(List)
    }
}

impl<T: fmt::Display> fmt::Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Multi-index of length `d`; an absent list means zero.
pub fn multi_index(list: Option<&List<usize>>, d: usize, what: &str) -> Result<MultiIndex> {
    match list {
        None => Ok(MultiIndex::zero(d)),
        Some(l) if l.0.len() == d => Ok(MultiIndex(l.0.clone())),
        Some(l) => Err(LabError::invalid(format!("{what} has {} entries, the grid has d = {d}", l.0.len()))),
    }
}
