//! Experiment drivers: each turns resolved options into a [`Report`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use psido_core::estimates::{
    check_budget, condition_report, cz_condition_check, cz_sweep, decay_fit, dyadic_envelope_check,
    make_cancellation_test_function, max_outer_radius, minimal_l, necessary_condition_probe, operator_norm_estimate,
    smoothness_budget, CZCheckConfig, KernelDecayParams, NormBudget, NormMethod, Profile,
};
use psido_core::psido::{apply_psido, default_levels, discrete_adjoint_apply, dyadic_decompose, kernel_sum};
use psido_core::random::random_band_limited;
use psido_core::symbols::{default_step, finite_diff_derivative, SampleSet};
use psido_core::symbols::verify_symbol_class;
use psido_core::{Complex64, Grid, MixedExponent, SampledFunction, Symbol, SymbolKind};

use crate::config::{
    ApplyOpts, BudgetOpts, Command, Common, ConditionsOpts, CzCheckOpts, DyadicOpts, KernelDecayOpts,
    NormEstimateOpts, ProbeOpts, VerifySymbolOpts,
};
use crate::error::{LabError, Result};
use crate::pslb;
use crate::report::{num, Report, Table};
use crate::spec::{multi_index, SymbolArg};

const DEFAULT_D: usize = 1;
const DEFAULT_N: usize = 256;
const DEFAULT_R: f64 = 8.0;
/// Largest `|Σ σ_j - σ|` accepted by the reconstruction check.
const RECONSTRUCTION_TOL: f64 = 1e-12;

/// A finished experiment: the report plus human-readable lines for stdout.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub lines: Vec<String>,
    /// Sample export requested by `--csv` when the experiment has no table.
    pub samples: Option<SampledFunction>,
}

impl Outcome {
    fn new(report: Report) -> Self {
        Outcome { report, lines: Vec::new(), samples: None }
    }

    fn say(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.say(format!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" }));
        self.report.check(name, pass, detail);
    }
}

/// Inputs echoed into the report: everything except output locations.
pub fn config_echo(common: &Common, command: &Command) -> Value {
    json!({
        "d": common.d,
        "n": common.n,
        "R": common.r,
        "seed": common.seed,
        "options": command.options_json(),
    })
}

pub fn run(common: &Common, command: &Command) -> Result<Outcome> {
    let report = Report::new(command.name(), config_echo(common, command), common.seed);
    let mut out = Outcome::new(report);
    match command {
        Command::Apply(o) => apply(common, o, &mut out)?,
        Command::VerifySymbol(o) => verify_symbol(common, o, &mut out)?,
        Command::Dyadic(o) => dyadic(common, o, &mut out)?,
        Command::KernelDecay(o) => kernel_decay(common, o, &mut out)?,
        Command::CzCheck(o) => cz_check(common, o, &mut out)?,
        Command::NormEstimate(o) => norm_estimate(common, o, &mut out)?,
        Command::Budget(o) => budget(common, o, &mut out)?,
        Command::Conditions(o) => conditions(common, o, &mut out)?,
        Command::Probe(o) => probe(common, o, &mut out)?,
    }
    Ok(out)
}

fn grid(common: &Common) -> Result<Grid> {
    Ok(Grid::new(common.d.unwrap_or(DEFAULT_D), common.n.unwrap_or(DEFAULT_N), common.r.unwrap_or(DEFAULT_R))?)
}

fn symbol(arg: &Option<SymbolArg>, d: usize) -> Result<Symbol> {
    arg.as_ref().ok_or_else(|| LabError::invalid("--symbol is required"))?.resolve()?.build(d)
}

fn seed(common: &Common, what: &str) -> Result<u64> {
    common.seed.ok_or_else(|| LabError::invalid(format!("{what} draws random data: --seed is required")))
}

fn record_grid(out: &mut Outcome, g: &Grid) {
    out.report.value("grid", json!({ "d": g.dim(), "n": g.points_per_axis(), "R": g.half_extent() }));
}

/// `x` for kernel work: `None` for multipliers, the given point or the origin otherwise.
fn kernel_point(s: &Symbol, x: Option<&Vec<f64>>, d: usize) -> Result<Option<Vec<f64>>> {
    if s.kind() == SymbolKind::Multiplier {
        return Ok(None);
    }
    let x = x.cloned().unwrap_or_else(|| vec![0.0; d]);
    if x.len() != d {
        return Err(LabError::invalid(format!("--x has {} coordinates, the grid has d = {d}", x.len())));
    }
    Ok(Some(x))
}

fn apply(common: &Common, o: &ApplyOpts, out: &mut Outcome) -> Result<()> {
    let f = match &o.input {
        Some(path) => pslb::load(path)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed(common, "apply without --input")?);
            random_band_limited(grid(common)?, o.band.unwrap_or(0.5), &mut rng)
        }
    };
    let g = *f.grid();
    record_grid(out, &g);
    let s = symbol(&o.symbol, g.dim())?;
    let tf = if o.adjoint.unwrap_or(false) { discrete_adjoint_apply(&s, &f)? } else { apply_psido(&s, &f)? };
    if let Some(path) = &o.output {
        pslb::save(path, &tf)?;
        out.say(format!("wrote {}", path.display()));
    }
    out.report.number("input_l2", f.l2_norm());
    out.report.number("output_l2", tf.l2_norm());
    out.report.number("max_abs_change", tf.max_abs_diff(&f)?);
    out.say(format!("|f|_2 = {:.6e}, |Tf|_2 = {:.6e}", f.l2_norm(), tf.l2_norm()));
    out.samples = Some(tf);
    Ok(())
}

fn verify_symbol(common: &Common, o: &VerifySymbolOpts, out: &mut Outcome) -> Result<()> {
    let g = grid(common)?;
    record_grid(out, &g);
    let mut spec = o.symbol.as_ref().ok_or_else(|| LabError::invalid("--symbol is required"))?.resolve()?;
    spec.m = o.m.or(spec.m);
    spec.rho = o.rho.or(spec.rho);
    spec.delta = o.delta.or(spec.delta);
    spec.n = o.big_n.or(spec.n);
    spec.n_prime = o.n_prime.or(spec.n_prime);
    let s = spec.build(g.dim())?;
    let samples = SampleSet::from_grid(&g, o.x_samples.unwrap_or(3), o.xi_samples.unwrap_or(33))?;
    let rep = verify_symbol_class(&s, &samples, o.cap.unwrap_or(100.0))?;
    let mut table = Table::new("bounds", &["alpha", "beta", "fitted_C", "witness_x", "witness_xi", "pass"]);
    let coords = |v: &[f64]| v.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(" ");
    for e in &rep.entries {
        table.push(vec![
            Value::String(e.alpha.to_string()),
            Value::String(e.beta.to_string()),
            num(e.fitted_c),
            Value::String(coords(&e.witness_x)),
            Value::String(coords(&e.witness_xi)),
            Value::Bool(e.pass),
        ]);
    }
    out.report.tables.push(table);
    out.report.number("max_frequency", samples.max_frequency());
    let p = s.params();
    let detail = match rep.first_failure() {
        None => format!("{} pairs within cap {} for (m, rho, delta) = ({}, {}, {})", rep.entries.len(), rep.cap, p.m, p.rho, p.delta),
        Some(e) => format!(
            "alpha {} beta {}: fitted C = {:.4e} exceeds cap {} (witness x = {:?}, xi = {:?})",
            e.alpha, e.beta, e.fitted_c, rep.cap, e.witness_x, e.witness_xi
        ),
    };
    out.check("symbol-class", rep.pass, detail);
    Ok(())
}

fn dyadic(common: &Common, o: &DyadicOpts, out: &mut Outcome) -> Result<()> {
    let g = grid(common)?;
    record_grid(out, &g);
    let d = g.dim();
    let s = symbol(&o.symbol, d)?;
    let levels = o.levels.unwrap_or_else(|| default_levels(&g));
    let dd = dyadic_decompose(&s, &g, levels)?;
    let x = kernel_point(&s, o.x.as_ref().map(|l| &l.0), d)?;
    let xs = x.clone().unwrap_or_else(|| vec![0.0; d]);

    // reconstruction on |ξ| <= 2^J and exact ring supports
    let dual = g.dual();
    let pieces: Vec<SampledFunction> = (0..=levels).map(|j| dd.piece(j, Some(&xs))).collect::<std::result::Result<_, _>>()?;
    let mut worst = 0.0f64;
    let mut leaks = 0usize;
    for m in 0..dual.len() {
        let xi = &dual.point(m)[..d];
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= 2f64.powi(levels as i32) {
            let sum: Complex64 = pieces.iter().map(|p| p.values()[m]).sum();
            worst = worst.max((sum - s.eval(&xs, xi)?).norm());
        }
        for (j, p) in pieces.iter().enumerate() {
            let (lo, hi) = if j == 0 { (0.0, 2.0) } else { (2f64.powi(j as i32 - 1), 2f64.powi(j as i32 + 1)) };
            if (r < lo || r > hi) && p.values()[m] != Complex64::new(0.0, 0.0) {
                leaks += 1;
            }
        }
    }
    out.report.number("levels", levels as f64);
    out.check(
        "reconstruction",
        worst <= RECONSTRUCTION_TOL && leaks == 0,
        format!("max |sum_j sigma_j - sigma| = {worst:.3e} on |xi| <= 2^{levels} (tol {RECONSTRUCTION_TOL:e}); ring leaks = {leaks}"),
    );

    let alpha = multi_index(o.alpha.as_ref(), d, "--alpha")?;
    let beta = multi_index(o.beta.as_ref(), d, "--beta")?;
    let factor = o.factor.unwrap_or(3.0);
    let env = dyadic_envelope_check(&dd, o.big_m.unwrap_or(0), &alpha, &beta, x.as_deref(), factor)?;
    let min = env.ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut table = Table::sweep("envelope");
    for (i, (sup, r)) in env.sups.iter().zip(&env.ratios).enumerate() {
        let j = (i + 1) as f64;
        table.push_sweep(j, *sup, 2f64.powf(j * env.exponent), *r, *r <= factor * min);
    }
    out.report.tables.push(table);
    out.report.number("envelope_exponent", env.exponent);
    out.report.number("envelope_spread", env.spread);
    out.check("envelope", env.pass, format!("max r_j / min r_j = {:.4} (factor {factor}), exponent {}", env.spread, env.exponent));
    Ok(())
}

/// `∂_x^α σ` as a symbol of its own, by central differences in `x`.
fn x_derivative_symbol(s: &Symbol, alpha: &psido_core::MultiIndex) -> Result<Symbol> {
    let base = s.clone();
    let a = alpha.clone();
    let zero = psido_core::MultiIndex::zero(alpha.dim());
    let step = default_step(alpha.order());
    let kind = if s.kind() == SymbolKind::Multiplier { SymbolKind::Multiplier } else { SymbolKind::General };
    Ok(Symbol::from_fn(kind, *s.params(), move |x, xi| {
        finite_diff_derivative(&base, &a, &zero, x, xi, step).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    })?)
}

fn kernel_decay(common: &Common, o: &KernelDecayOpts, out: &mut Outcome) -> Result<()> {
    let g = grid(common)?;
    record_grid(out, &g);
    let d = g.dim();
    let s = symbol(&o.symbol, d)?;
    let alpha = multi_index(o.alpha.as_ref(), d, "--alpha")?;
    let beta = multi_index(o.beta.as_ref(), d, "--beta")?;
    let target = if alpha.is_zero() { s.clone() } else { x_derivative_symbol(&s, &alpha)? };
    let levels = o.levels.unwrap_or_else(|| default_levels(&g));
    let dd = dyadic_decompose(&target, &g, levels)?;
    let x = kernel_point(&s, o.x.as_ref().map(|l| &l.0), d)?;
    let k = kernel_sum(&dd, x.as_deref())?;

    let l = o.l.unwrap_or_else(|| minimal_l(d, s.params(), alpha.order(), beta.order()));
    let params = KernelDecayParams::new(d, s.params(), alpha, beta, l)?;
    let window = match &o.window {
        None => (4.0 * g.spacing(), g.half_extent() / 4.0),
        Some(w) if w.0.len() == 2 => (w.0[0], w.0[1]),
        Some(_) => return Err(LabError::invalid("--window needs two values lo,hi")),
    };
    let fit = decay_fit(&k, window, &params)?;

    let mut table = Table::sweep("decay");
    for &(r, v) in &fit.shells {
        let predicted = fit.envelope * r.powf(fit.predicted_exponent);
        let ratio = v / predicted;
        table.push_sweep(r, v, predicted, ratio, ratio <= 1.0 + 1e-12);
    }
    out.report.tables.push(table);
    out.report.value("window", json!([window.0, window.1]));
    out.report.number("L", l);
    out.report.number("predicted_exponent", fit.predicted_exponent);
    out.report.value("slope", fit.slope.map(num).unwrap_or(Value::Null));
    out.report.number("envelope", fit.envelope);
    out.report.value("degenerate", fit.degenerate);
    let slope = fit.slope.map(|v| format!("{v:.4}")).unwrap_or_else(|| "undefined".into());
    out.check(
        "envelope",
        fit.pass,
        format!("C = {:.4e} for |k| <= C |z|^{} on [{}, {}]; slope {slope}", fit.envelope, fit.predicted_exponent, window.0, window.1),
    );
    if let Some(range) = &o.slope_range {
        if range.0.len() != 2 {
            return Err(LabError::invalid("--slope-range needs two values lo,hi"));
        }
        let ok = fit.slope.is_some_and(|v| v >= range.0[0] && v <= range.0[1]);
        out.check("slope", ok, format!("slope {slope} in [{}, {}]", range.0[0], range.0[1]));
    }
    if let Some(path) = &o.kernel_out {
        pslb::save(path, k.samples())?;
        out.say(format!("wrote {}", path.display()));
    }
    if let Some(path) = &o.profile_csv {
        let mut t = Table::new("profile", &["abs_z", "abs_k"]);
        for (r, v) in k.radial_profile() {
            t.push(vec![num(r), num(v)]);
        }
        Report::write_table_csv(&t, path)?;
        out.say(format!("wrote {}", path.display()));
    }
    Ok(())
}

fn cz_check(common: &Common, o: &CzCheckOpts, out: &mut Outcome) -> Result<()> {
    let input = o.input.as_deref().map(pslb::load).transpose()?;
    let g = match &input {
        Some(f) => *f.grid(),
        None => grid(common)?,
    };
    record_grid(out, &g);
    let d = g.dim();
    let s = symbol(&o.symbol, d)?;
    let l = o.l.unwrap_or(d - 1);
    if l >= d {
        return Err(LabError::invalid(format!("--l = {l} must be below d = {d}")));
    }
    let p = match &o.p {
        Some(p) => MixedExponent::new(p.0.clone())?,
        None => MixedExponent::uniform(d, 2.0)?,
    };
    let p = p.with_split(l)?;
    let ts = o.t.as_ref().map(|t| t.0.clone()).unwrap_or_else(|| vec![0.25, 0.5, 1.0, 2.0]);
    if ts.is_empty() {
        return Err(LabError::invalid("--t needs at least one scale"));
    }
    let x0 = o.x0.as_ref().map(|v| v.0.clone()).unwrap_or_else(|| vec![0.0; d - l]);
    let mut cfg = CZCheckConfig::new(d, l, ts[0], x0.clone(), p)?;
    if let Some(nc) = o.n_const {
        cfg = cfg.with_n_const(nc);
    }
    out.report.number("n_const", cfg.n_const);
    let op = |u: &SampledFunction| apply_psido(&s, u);
    let mut table = Table::sweep("cz");

    if let Some(f) = input {
        let rep = cz_condition_check(op, &cfg, &f)?;
        table.push_sweep(rep.t, rep.lhs, rep.rhs, rep.ratio, rep.ratio.is_finite());
        out.report.tables.push(table);
        out.check("finite", rep.ratio.is_finite(), format!("t = {}: far-field ratio {:.4e}", rep.t, rep.ratio));
        return Ok(());
    }

    let inner = Profile::Gaussian { width: o.inner_width.unwrap_or(1.0) };
    let cases = ts
        .iter()
        .map(|&t| {
            let outer = Profile::Bump { radius: max_outer_radius(&g, t) };
            Ok((t, make_cancellation_test_function(&g, l, t, &x0, inner, outer)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let sweep = cz_sweep(op, &cfg, &cases)?;
    for e in &sweep.entries {
        table.push_sweep(e.t, e.lhs, e.rhs, e.ratio, e.ratio.is_finite());
    }
    out.report.tables.push(table);
    out.report.number("max_ratio", sweep.max_ratio);
    out.report.number("median_ratio", sweep.median_ratio);
    out.report.number("uniformity", sweep.uniformity);
    let spread = o.max_spread.unwrap_or(10.0);
    let ratios: Vec<String> = sweep.entries.iter().map(|e| format!("{:.4e}", e.ratio)).collect();
    out.check("finite", sweep.all_finite, format!("ratios [{}]", ratios.join(", ")));
    out.check(
        "uniform",
        sweep.max_ratio <= spread * sweep.median_ratio,
        format!("max / median = {:.4} (limit {spread})", sweep.uniformity),
    );
    Ok(())
}

fn norm_budget(common: &Common, what: &str, iterations: Option<usize>, restarts: Option<usize>, refinements: Option<usize>) -> Result<NormBudget> {
    let base = NormBudget::default();
    Ok(NormBudget {
        iterations: iterations.unwrap_or(base.iterations),
        restarts: restarts.unwrap_or(base.restarts),
        refinements: refinements.unwrap_or(base.refinements),
        tolerance: base.tolerance,
        seed: seed(common, what)?,
    })
}

fn norm_estimate(common: &Common, o: &NormEstimateOpts, out: &mut Outcome) -> Result<()> {
    let g = grid(common)?;
    record_grid(out, &g);
    let s = symbol(&o.symbol, g.dim())?;
    let p = match &o.p {
        Some(p) => MixedExponent::new(p.0.clone())?,
        None => MixedExponent::uniform(g.dim(), 2.0)?,
    };
    let method = match o.method.as_deref() {
        Some("power") => NormMethod::PowerIterationP2,
        Some("ascent") => NormMethod::RandomAscent,
        None if p.exponents().iter().all(|&v| v == 2.0) => NormMethod::PowerIterationP2,
        None => NormMethod::RandomAscent,
        Some(other) => return Err(LabError::invalid(format!("--method {other:?} must be power or ascent"))),
    };
    let mut budget = norm_budget(common, "norm-estimate", o.iterations, o.restarts, o.refinements)?;
    if let Some(t) = o.tolerance {
        budget.tolerance = t;
    }
    let est = operator_norm_estimate(&s, &p, &g, method, &budget)?;
    out.report.number("estimate", est.value);
    out.report.value("method", format!("{:?}", est.method));
    out.report.value("converged", est.converged);
    out.report.value("iterations", est.iterations);
    out.report.value("lower_bound", est.lower_bound);
    out.say(format!(
        "norm estimate {:.8} ({:?}{}, {} iterations, converged: {})",
        est.value,
        est.method,
        if est.lower_bound { ", lower bound" } else { "" },
        est.iterations,
        est.converged
    ));
    Ok(())
}

fn budget(common: &Common, o: &BudgetOpts, out: &mut Outcome) -> Result<()> {
    let d = common.d.unwrap_or(DEFAULT_D);
    let (m, rho, delta) = (o.m.unwrap_or(0.0), o.rho.unwrap_or(1.0), o.delta.unwrap_or(0.0));
    match smoothness_budget(d, m, rho, delta) {
        Ok(b) => {
            out.say(b.to_string());
            out.report.value("N", b.n);
            out.report.value("Nprime", b.n_prime);
            out.report.value("M", b.big_m);
            out.report.value("Mprime", b.big_m_prime);
            let bad = check_budget(&b);
            out.check("inequalities", bad.is_empty(), if bad.is_empty() { "all hold".into() } else { bad.join("; ") });
        }
        Err(psido_core::Error::Infeasible { binding }) => {
            out.report.value("binding", binding.clone());
            out.check("feasible", false, binding.join("; "));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn conditions(common: &Common, o: &ConditionsOpts, out: &mut Outcome) -> Result<()> {
    let d = common.d.unwrap_or(DEFAULT_D);
    let p = o.p.as_ref().map(|p| p.0.clone()).unwrap_or_else(|| vec![2.0]);
    let rep = condition_report(o.m.unwrap_or(0.0), o.rho.unwrap_or(1.0), o.delta.unwrap_or(0.0), d, &p)?;
    out.report.value("necessary_lp", rep.necessary_lp);
    out.report.value("necessary_thresholds", rep.necessary_thresholds.iter().map(|v| num(*v)).collect::<Vec<_>>());
    out.report.value("necessary_margins", rep.necessary_margins.iter().map(|v| num(*v)).collect::<Vec<_>>());
    out.report.value("sufficient", rep.sufficient_thm32);
    out.report.number("sufficient_threshold", rep.sufficient_threshold);
    out.report.number("sufficient_margin", rep.sufficient_margin);
    out.say(format!("necessary L^p condition: {} (margins {:?})", rep.necessary_lp, rep.necessary_margins));
    out.say(format!(
        "sufficient condition: {} (threshold {}, margin {})",
        rep.sufficient_thm32, rep.sufficient_threshold, rep.sufficient_margin
    ));
    Ok(())
}

fn probe(common: &Common, o: &ProbeOpts, out: &mut Outcome) -> Result<()> {
    let s = symbol(&o.symbol, 1)?;
    let p = o.p.unwrap_or(4.0);
    let half = common.r.unwrap_or(DEFAULT_R);
    let resolutions = o.resolutions.as_ref().map(|r| r.0.clone()).unwrap_or_else(|| vec![64, 128, 256, 512]);
    let threshold = o.threshold.unwrap_or(0.2);
    let budget = norm_budget(common, "probe", o.iterations, o.restarts, o.refinements)?;
    let rep = necessary_condition_probe(&s, p, half, &resolutions, &budget, threshold)?;
    let first = rep.entries[0].estimate;
    let mut table = Table::sweep("probe");
    for e in &rep.entries {
        table.push_sweep(e.n as f64, e.estimate, first, e.estimate / first, e.converged);
        out.say(format!("n = {:5}: estimate {:.6}", e.n, e.estimate));
    }
    out.report.tables.push(table);
    out.report.number("growth", rep.growth);
    out.report.number("variation", rep.variation);
    out.report.value("grows", rep.grows);
    let summary = format!("growth {:.4}, variation {:.4}, threshold {threshold}", rep.growth, rep.variation);
    match o.expect.as_deref() {
        None => out.say(summary),
        Some("grow") => out.check("grows", rep.grows, summary),
        Some("flat") => out.check("flat", rep.variation < threshold, summary),
        Some(other) => return Err(LabError::invalid(format!("--expect {other:?} must be grow or flat"))),
    }
    Ok(())
}

/// Writes the report files and returns their paths.
pub fn write_outputs(common: &Common, out: &Outcome) -> Result<Vec<std::path::PathBuf>> {
    let mut csv = common.csv.as_deref();
    let mut written = Vec::new();
    if let (Some(path), Some(samples), true) = (csv, &out.samples, out.report.tables.is_empty()) {
        pslb::export_csv(path, samples)?;
        written.push(path.to_path_buf());
        csv = None;
    }
    written.extend(out.report.write(common.json.as_deref(), csv, common.out_dir.as_deref())?);
    Ok(written)
}

