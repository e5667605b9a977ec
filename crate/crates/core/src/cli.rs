//! Command-line front end. Exit codes: 0 success, 1 computation or output
//! failure, 2 configuration error.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::Settings;
use crate::error::Error;
use crate::halfline::{classify_halfline_resonance, reflection, reflection_series, BoundaryCondition, HalfLineProblem};
use crate::lowenergy::{amplitude_series, classify_resonance, laurent_expansion, AmplitudeSeries};
use crate::numerics::{Mat2C, C64};
use crate::potential::{parse_potential, truncate, PotentialSpec, SupportWindow};
use crate::propagate::{amplitudes, below_small_k_guard, transfer_matrix};
use crate::zeroenergy::{low_energy_coefficients, m0_dyson, solve_phi, LowEnergyCoefficients};

pub const TRANSFER_CSV_HEADER: &str = "k,re_m11,im_m11,re_m12,im_m12,re_m21,im_m21,re_m22,im_m22,det_residual";
pub const AMPLITUDES_CSV_HEADER: &str = "k,re_rl,im_rl,re_rr,im_rr,re_t,im_t";
pub const ZERO_CSV_HEADER: &str = "re_a1,im_a1,re_a2,im_a2,re_b1,im_b1,re_b2,im_b2,re_g1,im_g1,margin,resonant";
pub const HALFLINE_CSV_HEADER: &str = "k,re_r,im_r,abs_r";

#[derive(Parser, Debug)]
#[command(name = "dynscat", version, about = "Transfer matrices and low-energy scattering in one dimension")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Transfer matrix over a k sweep
    Transfer(CommonArgs),
    /// Reflection and transmission amplitudes over a k sweep
    Amplitudes(CommonArgs),
    /// Laurent coefficients and low-energy amplitude series
    Lowenergy(CommonArgs),
    /// Zero-energy transfer matrix, coefficients and resonance verdict
    Zero(CommonArgs),
    /// Half-line reflection amplitude and its low-energy series
    Halfline(CommonArgs),
    /// Check the engine against the closed-form oracles
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[arg(long)]
    pub potential: PathBuf,
    /// `min:max:count[:log]`
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long)]
    pub ell: Option<f64>,
    /// `re,im`
    #[arg(long)]
    pub alpha: Option<String>,
    /// `re,im`
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Compute(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Config(_) => CliError::Config(e.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl KGrid {
    pub fn parse(s: &str) -> CliResult<Self> {
        let bad = || CliError::Config(format!("invalid k grid '{s}', expected min:max:count[:log]"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 && parts.len() != 4 {
            return Err(bad());
        }
        let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        let log = match parts.get(3).map(|p| p.trim()) {
            None | Some("lin") | Some("linear") => false,
            Some("log") => true,
            Some(_) => return Err(bad()),
        };
        if !(min > 0.0) || !(max >= min) || !max.is_finite() || count == 0 {
            return Err(CliError::Config(format!("k grid '{s}' needs 0 < min <= max and count >= 1")));
        }
        Ok(Self { min, max, count, log })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / n;
                if i == self.count - 1 {
                    self.max
                } else if self.log {
                    self.min * (self.max / self.min).powf(t)
                } else {
                    self.min + (self.max - self.min) * t
                }
            })
            .collect()
    }
}

fn parse_complex(s: &str) -> CliResult<C64> {
    let bad = || CliError::Config(format!("invalid complex '{s}', expected re or re,im"));
    let mut it = s.split(',');
    let re: f64 = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let im: f64 = match it.next() {
        Some(p) => p.trim().parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if it.next().is_some() {
        return Err(bad());
    }
    Ok(C64::new(re, im))
}

pub fn c_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn m_json(m: &Mat2C) -> Value {
    Value::Array(m.entries().iter().map(|z| c_json(*z)).collect())
}

pub fn coeffs_json(c: &LowEnergyCoefficients) -> Value {
    json!({
        "a1": c_json(c.a1),
        "a2": c_json(c.a2),
        "b1": c_json(c.b1),
        "b2": c_json(c.b2),
        "g1": c.g1.map(c_json),
        "ell": c.ell,
    })
}

pub fn series_json(s: &AmplitudeSeries) -> Value {
    let arr = |v: &[C64]| Value::Array(v.iter().map(|z| c_json(*z)).collect());
    json!({
        "branch": s.branch,
        "ell": s.ell,
        "truncation_order": s.truncation_order,
        "rl": arr(&s.rl),
        "rr": arr(&s.rr),
        "t": arr(&s.t),
    })
}

fn push_c(line: &mut String, z: C64) {
    let _ = write!(line, ",{},{}", z.re, z.im);
}

struct Context {
    spec: PotentialSpec,
    window: SupportWindow,
    settings: Settings,
    args: CommonArgs,
}

fn load(args: &CommonArgs) -> CliResult<Context> {
    let bytes = std::fs::read(&args.potential)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.potential.display())))?;
    let mut spec = parse_potential(&bytes)?;
    if let Some(ell) = args.ell {
        spec = spec.with_ell(ell).map_err(|e| CliError::Config(e.to_string()))?;
    }
    let mut settings = Settings::default();
    if let Some(t) = args.tau {
        settings.tau = t;
    }
    if let Some(r) = args.rtol {
        settings.rtol = r;
    }
    if let Some(a) = args.atol {
        settings.atol = a;
    }
    settings.validate()?;
    if !(1..=12).contains(&args.order) {
        return Err(CliError::Config("--order must be in 1..=12".into()));
    }
    let window = truncate(&spec, settings.eps_tail, settings.max_order)?;
    Ok(Context { spec, window, settings, args: args.clone() })
}

fn k_points(args: &CommonArgs, required: bool) -> CliResult<Option<Vec<f64>>> {
    match &args.k {
        Some(s) => Ok(Some(KGrid::parse(s)?.points())),
        None if required => Err(CliError::Config("--k is required for this command".into())),
        None => Ok(None),
    }
}

fn warn_small_k(ctx: &Context, ks: &[f64]) {
    if let Some(k) = ks.iter().find(|k| below_small_k_guard(C64::from(**k), &ctx.window, &ctx.settings)) {
        log::warn!("k = {k} is below the small-k guard; direct integration is ill-conditioned, prefer `lowenergy`");
    }
}

fn header(command: &str, ctx: &Context) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("settings".into(), serde_json::to_value(ctx.settings).unwrap());
    m.insert("ell".into(), json!(ctx.spec.ell));
    m.insert("window".into(), json!([ctx.window.x_minus, ctx.window.x_plus]));
    m
}

fn csv_with_settings(settings: &Settings, header: &str, rows: &[String]) -> String {
    let mut s = format!("# settings {}\n{header}\n", serde_json::to_string(settings).unwrap());
    for r in rows {
        s.push_str(r);
        s.push('\n');
    }
    s
}

pub struct Output {
    pub body: String,
    pub summary: String,
}

fn cmd_transfer(ctx: &Context) -> CliResult<Output> {
    let ks = k_points(&ctx.args, true)?.unwrap();
    warn_small_k(ctx, &ks);
    let tol = ctx.settings.tolerances();
    let res: Vec<_> = ks
        .par_iter()
        .map(|&k| transfer_matrix(&ctx.spec, C64::from(k), &ctx.window, &tol))
        .collect::<Result<_, _>>()?;
    let body = match ctx.args.format {
        Format::Csv => {
            let rows: Vec<String> = res
                .iter()
                .map(|t| {
                    let mut l = format!("{}", t.k.re);
                    for z in t.m.entries() {
                        push_c(&mut l, z);
                    }
                    let _ = write!(l, ",{}", t.det_residual());
                    l
                })
                .collect();
            csv_with_settings(&ctx.settings, TRANSFER_CSV_HEADER, &rows)
        }
        Format::Json => {
            let mut m = header("transfer", ctx);
            let rows: Vec<Value> = res
                .iter()
                .map(|t| json!({"k": t.k.re, "m": m_json(&t.m), "det_residual": t.det_residual()}))
                .collect();
            m.insert("results".into(), Value::Array(rows));
            pretty(&Value::Object(m))
        }
    };
    let worst = res.iter().map(|t| t.det_residual()).fold(0.0, f64::max);
    Ok(Output { body, summary: format!("transfer: {} k values, max det residual {worst:e}", res.len()) })
}

fn cmd_amplitudes(ctx: &Context) -> CliResult<Output> {
    let ks = k_points(&ctx.args, true)?.unwrap();
    warn_small_k(ctx, &ks);
    let tol = ctx.settings.tolerances();
    let res: Vec<_> = ks
        .par_iter()
        .map(|&k| transfer_matrix(&ctx.spec, C64::from(k), &ctx.window, &tol).and_then(|t| amplitudes(&t, ctx.settings.atol)))
        .collect::<Result<_, _>>()?;
    let body = match ctx.args.format {
        Format::Csv => {
            let rows: Vec<String> = res
                .iter()
                .map(|a| {
                    let mut l = format!("{}", a.k.re);
                    for z in [a.rl, a.rr, a.t] {
                        push_c(&mut l, z);
                    }
                    l
                })
                .collect();
            csv_with_settings(&ctx.settings, AMPLITUDES_CSV_HEADER, &rows)
        }
        Format::Json => {
            let mut m = header("amplitudes", ctx);
            let rows: Vec<Value> = res
                .iter()
                .map(|a| json!({"k": a.k.re, "rl": c_json(a.rl), "rr": c_json(a.rr), "t": c_json(a.t)}))
                .collect();
            m.insert("results".into(), Value::Array(rows));
            pretty(&Value::Object(m))
        }
    };
    Ok(Output { body, summary: format!("amplitudes: {} k values", res.len()) })
}

fn cmd_lowenergy(ctx: &Context) -> CliResult<Output> {
    let field = solve_phi(&ctx.spec, &ctx.window, &ctx.settings)?;
    let coeffs = low_energy_coefficients(&field);
    let laurent = laurent_expansion(&field, ctx.args.order as i32)?;
    let verdict = classify_resonance(&coeffs, ctx.settings.tau)?;
    let series = amplitude_series(&coeffs, ctx.args.order, ctx.settings.tau)?;
    if series.truncation_order < ctx.args.order {
        log::warn!("order {} clamped to {} for the {:?} branch", ctx.args.order, series.truncation_order, series.branch);
    }
    let ks = k_points(&ctx.args, ctx.args.format == Format::Csv)?;
    let evals: Vec<(f64, (C64, C64, C64))> =
        ks.unwrap_or_default().into_iter().map(|k| (k, series.evaluate(C64::from(k)))).collect();
    let body = match ctx.args.format {
        Format::Csv => {
            let rows: Vec<String> = evals
                .iter()
                .map(|(k, (rl, rr, t))| {
                    let mut l = format!("{k}");
                    for z in [*rl, *rr, *t] {
                        push_c(&mut l, z);
                    }
                    l
                })
                .collect();
            csv_with_settings(&ctx.settings, AMPLITUDES_CSV_HEADER, &rows)
        }
        Format::Json => {
            let mut m = header("lowenergy", ctx);
            m.insert("coefficients".into(), coeffs_json(&coeffs));
            m.insert("resonance".into(), serde_json::to_value(verdict).unwrap());
            let lc: Vec<Value> = (-1..=laurent.m_max()).map(|i| json!({"m": i, "u": m_json(&laurent.coeff(i))})).collect();
            m.insert("laurent".into(), Value::Array(lc));
            m.insert("series".into(), series_json(&series));
            if !evals.is_empty() {
                let rows: Vec<Value> = evals
                    .iter()
                    .map(|(k, (rl, rr, t))| json!({"k": k, "rl": c_json(*rl), "rr": c_json(*rr), "t": c_json(*t)}))
                    .collect();
                m.insert("series_values".into(), Value::Array(rows));
            }
            pretty(&Value::Object(m))
        }
    };
    Ok(Output {
        body,
        summary: format!("lowenergy: {:?} branch, order {}, margin {:e}", series.branch, series.truncation_order, verdict.margin),
    })
}

fn cmd_zero(ctx: &Context) -> CliResult<Output> {
    let field = solve_phi(&ctx.spec, &ctx.window, &ctx.settings)?;
    let coeffs = low_energy_coefficients(&field);
    let verdict = classify_resonance(&coeffs, ctx.settings.tau)?;
    let body = match ctx.args.format {
        Format::Csv => {
            let mut l = String::new();
            for z in [coeffs.a1, coeffs.a2, coeffs.b1, coeffs.b2, coeffs.g1.unwrap_or_default()] {
                push_c(&mut l, z);
            }
            let _ = write!(l, ",{},{}", verdict.margin, verdict.resonant);
            csv_with_settings(&ctx.settings, ZERO_CSV_HEADER, &[l[1..].to_string()])
        }
        Format::Json => {
            let mut m = header("zero", ctx);
            m.insert("m0".into(), m_json(&coeffs.m0()));
            let dyson = m0_dyson(&ctx.spec, &ctx.window, ctx.settings.dyson_order, &ctx.settings)?;
            m.insert("m0_dyson".into(), m_json(&dyson.m0));
            m.insert("coefficients".into(), coeffs_json(&coeffs));
            m.insert("wronskian_residual".into(), json!(coeffs.wronskian_residual()));
            m.insert("resonance".into(), serde_json::to_value(verdict).unwrap());
            pretty(&Value::Object(m))
        }
    };
    Ok(Output { body, summary: format!("zero: resonant = {}, margin {:e}", verdict.resonant, verdict.margin) })
}

fn cmd_halfline(ctx: &Context) -> CliResult<Output> {
    let alpha = ctx.args.alpha.as_deref().map(parse_complex).transpose()?;
    let beta = ctx.args.beta.as_deref().map(parse_complex).transpose()?;
    let bc = match (alpha, beta) {
        (None, None) => BoundaryCondition::dirichlet(),
        (a, b) => BoundaryCondition::constant(a.unwrap_or_default(), b.unwrap_or_default())
            .map_err(|e| CliError::Config(e.to_string()))?,
    };
    let problem = HalfLineProblem::new(ctx.spec.clone(), bc).map_err(|e| CliError::Config(e.to_string()))?;
    let ks = k_points(&ctx.args, ctx.args.format == Format::Csv)?.unwrap_or_default();
    warn_small_k(ctx, &ks);
    let rs: Vec<C64> = ks.par_iter().map(|&k| reflection(&problem, C64::from(k), &ctx.settings)).collect::<Result<_, _>>()?;
    let body = match ctx.args.format {
        Format::Csv => {
            let rows: Vec<String> = ks
                .iter()
                .zip(&rs)
                .map(|(k, r)| {
                    let mut l = format!("{k}");
                    push_c(&mut l, *r);
                    let _ = write!(l, ",{}", r.norm());
                    l
                })
                .collect();
            csv_with_settings(&ctx.settings, HALFLINE_CSV_HEADER, &rows)
        }
        Format::Json => {
            let field = solve_phi(&ctx.spec, &ctx.window, &ctx.settings)?;
            let coeffs = low_energy_coefficients(&field);
            let verdict = classify_halfline_resonance(&problem, &coeffs, ctx.settings.tau)?;
            let series = reflection_series(&problem, &coeffs, ctx.args.order, ctx.settings.tau)?;
            let mut m = header("halfline", ctx);
            m.insert("coefficients".into(), coeffs_json(&coeffs));
            m.insert("resonance".into(), serde_json::to_value(verdict).unwrap());
            m.insert(
                "series".into(),
                json!({
                    "branch": series.branch,
                    "ell": series.ell,
                    "truncation_order": series.truncation_order,
                    "r": Value::Array(series.coeffs.iter().map(|z| c_json(*z)).collect()),
                }),
            );
            let rows: Vec<Value> = ks.iter().zip(&rs).map(|(k, r)| json!({"k": k, "r": c_json(*r)})).collect();
            m.insert("results".into(), Value::Array(rows));
            pretty(&Value::Object(m))
        }
    };
    Ok(Output { body, summary: format!("halfline: {} k values", ks.len()) })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap();
    s.push('\n');
    s
}

fn emit(body: &str, out: &Option<PathBuf>) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|e| CliError::Compute(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Validate(v) => {
            let report = with_threads(v.threads, crate::validate::run_all)?;
            let table = report.table();
            emit(&table, &v.out)?;
            if report.all_passed() {
                Ok(format!("validate: {} checks passed", report.checks.len()))
            } else {
                Err(CliError::Compute(format!("validate: {} of {} checks failed", report.failures(), report.checks.len())))
            }
        }
        cmd => {
            let (f, a): (fn(&Context) -> CliResult<Output>, CommonArgs) = match cmd {
                Command::Transfer(a) => (cmd_transfer, a),
                Command::Amplitudes(a) => (cmd_amplitudes, a),
                Command::Lowenergy(a) => (cmd_lowenergy, a),
                Command::Zero(a) => (cmd_zero, a),
                Command::Halfline(a) => (cmd_halfline, a),
                Command::Validate(_) => unreachable!(),
            };
            let ctx = load(&a)?;
            let out = with_threads(a.threads, || f(&ctx))??;
            emit(&out.body, &a.out)?;
            Ok(out.summary)
        }
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(summary) => {
            eprintln!("{summary}");
            0
        }
        Err(CliError::Config(m)) => {
            eprintln!("configuration error: {m}");
            2
        }
        Err(CliError::Compute(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}
