//! Command line and TOML configuration. Flags override config values field by field.
//!
//! A config file holds the common keys at top level and one table per
//! subcommand, named as on the command line:
//!
//! ```toml
//! seed = 7
//! d = 1
//! n = 256
//! R = 8.0
//!
//! [kernel-decay]
//! symbol = "bessel:-1"
//! levels = 6
//! ```

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spec::{List, SymbolArg};

/// Numerical lab for pseudodifferential operators with nonsmooth symbols.
#[derive(Debug, Parser)]
#[command(name = "psido-lab", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every experiment.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Common {
    /// TOML config file; flags override its values
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Dimension
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Points per axis
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Half extent of the box [-R, R)^d
    #[arg(long = "R", global = true)]
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// RNG seed; required by experiments that draw random data
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Directory receiving <experiment>.json and one CSV per table
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// JSON report path
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    /// CSV path for the experiment's main table
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

/// Defines an options struct whose fields are all optional flags, plus
/// `or`, which fills unset fields from a config-file value.
macro_rules! options {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty,)* }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                #[arg(long, allow_hyphen_values = true)]
                #[serde(skip_serializing_if = "Option::is_none")]
                $(#[$fmeta])*
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            pub fn or(self, file: Self) -> Self {
                $name { $($field: self.$field.or(file.$field),)* }
            }
        }
    };
}

options!(
    /// Apply T_σ to a PSLB file or to a seeded random function.
    ApplyOpts {
        /// Symbol, e.g. const:1, bessel:-1, wave:0, mult:2,8,1, sep:2/bessel:-1
        symbol: SymbolArg,
        /// Input PSLB file; a random band-limited function when absent
        input: PathBuf,
        /// Output PSLB file
        output: PathBuf,
        /// Band fraction of the random input
        band: f64,
        /// Apply the adjoint instead
        adjoint: bool,
    }
);

options!(
    /// Fit the derivative-bound constants of a symbol over grid samples.
    VerifySymbolOpts {
        symbol: SymbolArg,
        /// Largest admissible fitted constant
        cap: f64,
        /// x samples per axis
        x_samples: usize,
        /// ξ samples per axis, reaching the Nyquist corner
        xi_samples: usize,
        /// Claimed order m (overrides the symbol's own claim)
        m: f64,
        /// Claimed ρ
        rho: f64,
        /// Claimed δ
        delta: f64,
        /// Claimed x budget N
        #[arg(long = "N")]
        #[serde(rename = "N")]
        big_n: usize,
        /// Claimed ξ budget N'
        #[arg(long = "Nprime")]
        #[serde(rename = "Nprime")]
        n_prime: usize,
    }
);

options!(
    /// Dyadic pieces: reconstruction and per-piece kernel envelopes.
    DyadicOpts {
        symbol: SymbolArg,
        /// Number of dyadic levels J
        levels: usize,
        /// Point x for x-dependent symbols
        x: List<f64>,
        /// Weight |z|^M of the envelope
        #[arg(long = "M")]
        #[serde(rename = "M")]
        big_m: usize,
        alpha: List<usize>,
        beta: List<usize>,
        /// Largest admissible max r_j / min r_j
        factor: f64,
    }
);

options!(
    /// Power-law fit of the kernel decay.
    KernelDecayOpts {
        symbol: SymbolArg,
        levels: usize,
        x: List<f64>,
        /// Fit window z_lo,z_hi; defaults to 4h,R/4
        window: List<f64>,
        alpha: List<usize>,
        beta: List<usize>,
        /// Extra decay L; defaults to the smallest admissible value
        #[arg(long = "L")]
        #[serde(rename = "L")]
        l: f64,
        /// Asserted slope range lo,hi
        slope_range: List<f64>,
        /// Write the kernel as a PSLB file
        kernel_out: PathBuf,
        /// Write (|z|, |k|) pairs as CSV
        profile_csv: PathBuf,
    }
);

options!(
    /// Far-field condition for cancelling test functions.
    CzCheckOpts {
        symbol: SymbolArg,
        /// Number of inner axes l
        l: usize,
        /// Full exponent vector; only the first l entries are used
        p: List<f64>,
        /// Scales t of the sweep
        t: List<f64>,
        /// Exclusion multiplier N; defaults to d + 1
        n_const: f64,
        /// Centre x'_0 of the cancelling functions
        x0: List<f64>,
        /// Test function from a PSLB file instead of generated ones (uses the first t)
        input: PathBuf,
        /// Width of the Gaussian factor in the inner axes
        inner_width: f64,
        /// Largest admissible max/median ratio
        max_spread: f64,
    }
);

options!(
    /// Operator norm estimate on L^p.
    NormEstimateOpts {
        symbol: SymbolArg,
        p: List<f64>,
        /// power (p = 2 only) or ascent
        method: String,
        iterations: usize,
        restarts: usize,
        refinements: usize,
        tolerance: f64,
    }
);

options!(
    /// Smallest even smoothness budget (N, N', M, M').
    BudgetOpts {
        m: f64,
        rho: f64,
        delta: f64,
    }
);

options!(
    /// Necessary and sufficient L^p conditions on (m, ρ, δ).
    ConditionsOpts {
        m: f64,
        rho: f64,
        delta: f64,
        p: List<f64>,
    }
);

options!(
    /// Norm estimates across resolutions with R fixed.
    ProbeOpts {
        symbol: SymbolArg,
        p: f64,
        resolutions: List<usize>,
        /// Growth counted as unbounded
        threshold: f64,
        /// Assert the verdict: grow or flat
        expect: String,
        iterations: usize,
        restarts: usize,
        refinements: usize,
    }
);

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    Apply(ApplyOpts),
    VerifySymbol(VerifySymbolOpts),
    Dyadic(DyadicOpts),
    KernelDecay(KernelDecayOpts),
    CzCheck(CzCheckOpts),
    NormEstimate(NormEstimateOpts),
    Budget(BudgetOpts),
    Conditions(ConditionsOpts),
    Probe(ProbeOpts),
}

pub const COMMANDS: [&str; 9] =
    ["apply", "verify-symbol", "dyadic", "kernel-decay", "cz-check", "norm-estimate", "budget", "conditions", "probe"];

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Apply(_) => "apply",
            Command::VerifySymbol(_) => "verify-symbol",
            Command::Dyadic(_) => "dyadic",
            Command::KernelDecay(_) => "kernel-decay",
            Command::CzCheck(_) => "cz-check",
            Command::NormEstimate(_) => "norm-estimate",
            Command::Budget(_) => "budget",
            Command::Conditions(_) => "conditions",
            Command::Probe(_) => "probe",
        }
    }

    /// Subcommand options as JSON, for the config echo.
    pub fn options_json(&self) -> serde_json::Value {
        let v = match self {
            Command::Apply(o) => serde_json::to_value(o),
            Command::VerifySymbol(o) => serde_json::to_value(o),
            Command::Dyadic(o) => serde_json::to_value(o),
            Command::KernelDecay(o) => serde_json::to_value(o),
            Command::CzCheck(o) => serde_json::to_value(o),
            Command::NormEstimate(o) => serde_json::to_value(o),
            Command::Budget(o) => serde_json::to_value(o),
            Command::Conditions(o) => serde_json::to_value(o),
            Command::Probe(o) => serde_json::to_value(o),
        };
        v.expect("options are always serialisable")
    }
}

fn section<T: DeserializeOwned + Default>(table: &mut toml::Table, name: &str, origin: &str) -> Result<T> {
    match table.remove(name) {
        None => Ok(T::default()),
        Some(v) => v.try_into().map_err(|e: toml::de::Error| LabError::invalid(format!("{origin}: [{name}]: {e}"))),
    }
}

/// Parses config text into common options and the section of `command`.
/// Sections of other subcommands are validated too, so typos are caught early.
pub fn parse_config(text: &str, origin: &str, command: &Command) -> Result<(Common, Command)> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| LabError::invalid(format!("{origin}: {e}")))?;
    let mut sections = Vec::new();
    for name in COMMANDS {
        let opts = match name {
            "apply" => Command::Apply(section(&mut table, name, origin)?),
            "verify-symbol" => Command::VerifySymbol(section(&mut table, name, origin)?),
            "dyadic" => Command::Dyadic(section(&mut table, name, origin)?),
            "kernel-decay" => Command::KernelDecay(section(&mut table, name, origin)?),
            "cz-check" => Command::CzCheck(section(&mut table, name, origin)?),
            "norm-estimate" => Command::NormEstimate(section(&mut table, name, origin)?),
            "budget" => Command::Budget(section(&mut table, name, origin)?),
            "conditions" => Command::Conditions(section(&mut table, name, origin)?),
            _ => Command::Probe(section(&mut table, name, origin)?),
        };
        sections.push(opts);
    }
    let common: Common = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| LabError::invalid(format!("{origin}: {e}")))?;
    let own = sections.into_iter().find(|c| c.name() == command.name()).expect("every command has a section");
    Ok((common, own))
}

/// Merges flags over the config file named by `--config`, if any.
pub fn resolve(cli: Cli) -> Result<(Common, Command)> {
    let Cli { common, command } = cli;
    let Some(path) = common.config.clone() else {
        return Ok((common, command));
    };
    let text = std::fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
    let (file_common, file_command) = parse_config(&text, &path.display().to_string(), &command)?;
    Ok((merge_common(common, file_common, &path), merge_command(command, file_command)))
}

fn merge_common(flags: Common, file: Common, path: &Path) -> Common {
    Common {
        config: Some(path.to_path_buf()),
        d: flags.d.or(file.d),
        n: flags.n.or(file.n),
        r: flags.r.or(file.r),
        seed: flags.seed.or(file.seed),
        out_dir: flags.out_dir.or(file.out_dir),
        json: flags.json.or(file.json),
        csv: flags.csv.or(file.csv),
    }
}

fn merge_command(flags: Command, file: Command) -> Command {
    match (flags, file) {
        (Command::Apply(a), Command::Apply(b)) => Command::Apply(a.or(b)),
        (Command::VerifySymbol(a), Command::VerifySymbol(b)) => Command::VerifySymbol(a.or(b)),
        (Command::Dyadic(a), Command::Dyadic(b)) => Command::Dyadic(a.or(b)),
        (Command::KernelDecay(a), Command::KernelDecay(b)) => Command::KernelDecay(a.or(b)),
        (Command::CzCheck(a), Command::CzCheck(b)) => Command::CzCheck(a.or(b)),
        (Command::NormEstimate(a), Command::NormEstimate(b)) => Command::NormEstimate(a.or(b)),
        (Command::Budget(a), Command::Budget(b)) => Command::Budget(a.or(b)),
        (Command::Conditions(a), Command::Conditions(b)) => Command::Conditions(a.or(b)),
        (Command::Probe(a), Command::Probe(b)) => Command::Probe(a.or(b)),
        (flags, _) => flags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("psido-lab").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_win_over_the_file() {
        let text = "seed = 3\nd = 2\n[budget]\nm = -1.0\nrho = 0.5\n";
        let parsed = cli(&["budget", "--m", "0", "--d", "1"]);
        let (fc, fcmd) = parse_config(text, "cfg", &parsed.command).unwrap();
        let common = merge_common(parsed.common, fc, Path::new("cfg"));
        let Command::Budget(b) = merge_command(parsed.command, fcmd) else { panic!() };
        assert_eq!((common.d, common.seed), (Some(1), Some(3)));
        assert_eq!((b.m, b.rho, b.delta), (Some(0.0), Some(0.5), None));
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let cmd = cli(&["budget"]).command;
        let err = parse_config("[budget]\nmm = 1\n", "cfg.toml", &cmd).unwrap_err().to_string();
        assert!(err.contains("cfg.toml") && err.contains("mm"), "{err}");
        let err = parse_config("d = \n", "cfg.toml", &cmd).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
        assert!(parse_config("[probe]\nsymbol = \"bessel:-1\"\nresolutions = [64, 128]\n", "c", &cmd).is_ok());
        assert!(parse_config("[nonsense]\n", "c", &cmd).is_err());
    }

    #[test]
    fn symbol_tables_in_config() {
        let cmd = cli(&["dyadic"]).command;
        let text = "[dyadic]\nsymbol = { kind = \"bessel\", order = -2.0 }\nM = 1\n";
        let (_, own) = parse_config(text, "c", &cmd).unwrap();
        let Command::Dyadic(o) = own else { panic!() };
        assert_eq!(o.big_m, Some(1));
        assert_eq!(o.symbol.unwrap().resolve().unwrap().order, Some(-2.0));
    }
}
