//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 validation or usage error, 2 a series did not
//! converge (the value is still printed), 3 a reproduced table row fell short
//! of its agreement requirement (the report is still printed).

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::appell::{f2_double_series, f2_recurrence_step, f2_reduce_to_2f1, F2Args};
use crate::error::{Error, Result};
use crate::hubbell::{
    eval_h_closed_half, eval_h_general, eval_h_lambda0, plaque_ordering_warning, HubbellParams,
};
use crate::numfmt::significant;
use crate::oracle::{quad_h_general, QuadratureControl};
use crate::special::{EvalResult, SeriesControl};
use crate::tables::{emit_report, run_table, ReportFormat, TableId, TableRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_TABLE_MISMATCH: i32 = 3;

/// Significant digits in human-readable output.
const TEXT_DIGITS: usize = 16;
/// Significant digits in csv output, enough to round-trip an f64.
const MACHINE_DIGITS: usize = 17;

#[derive(Debug, Parser)]
#[command(
    name = "hubbell",
    version,
    about = "Generalized Hubbell rectangular source integral"
)]
pub struct Cli {
    /// Relative tolerance for every truncated series.
    #[arg(
        long,
        global = true,
        env = "HUBBELL_TOLERANCE",
        default_value_t = 1e-15
    )]
    pub tolerance: f64,

    /// Term cap for every truncated series.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub max_terms: usize,

    /// Absolute and relative tolerance of the quadrature oracle.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub quad_tol: f64,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

impl From<OutputFormat> for ReportFormat {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Text => ReportFormat::Text,
            OutputFormat::Json => ReportFormat::Json,
            OutputFormat::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalMethod {
    /// Finite sum, with the dedicated λ = 0 path for the classical parameters.
    Auto,
    Sum,
    /// Only for (λ, α, β, γ) = (1, ½, ½, 1).
    Closed,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum F2Method {
    Series,
    Reduce,
    RecurrenceCheck,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate H[a,b,p,λ; α,β,γ] once.
    Eval(EvalArgs),
    /// Reproduce the published reference tables.
    Tables(TablesArgs),
    /// Evaluate Appell F2 directly.
    F2(F2CmdArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct EvalArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value_t = EvalMethod::Auto)]
    pub method: EvalMethod,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// Table to reproduce.
    #[arg(long, default_value = "all", value_parser = ["1", "2", "3", "all"])]
    pub which: String,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct F2CmdArgs {
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub a1: f64,
    #[arg(long)]
    pub a2: f64,
    #[arg(long)]
    pub b1: f64,
    #[arg(long)]
    pub b2: f64,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub y: f64,
    #[arg(long, value_enum, default_value_t = F2Method::Series)]
    pub f2_method: F2Method,
    /// Shift for the recurrence check.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
}

/// Resolved numeric settings shared by all subcommands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CliConfig {
    pub series: SeriesControl,
    pub quadrature: QuadratureControl,
    pub format: OutputFormat,
}

impl CliConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let series = SeriesControl {
            rel_tol: cli.tolerance,
            max_terms: cli.max_terms,
            ..SeriesControl::default()
        };
        series.validate()?;
        let quadrature = QuadratureControl::with_tol(cli.quad_tol);
        quadrature.validate()?;
        Ok(Self {
            series,
            quadrature,
            format: cli.format,
        })
    }
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    if !text.contains("Usage:") {
                        let _ = writeln!(err, "\n{}", usage_for(&args));
                    }
                    EXIT_VALIDATION
                }
            };
        }
    };
    let outcome = CliConfig::from_cli(&cli).and_then(|cfg| match &cli.command {
        Command::Eval(args) => cmd_eval(args, &cfg, out, err),
        Command::Tables(args) => cmd_tables(args, &cfg, out),
        Command::F2(args) => cmd_f2(args, &cfg, out),
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_VALIDATION
        }
    }
}

/// Usage line of the subcommand named in `args`, or of the whole program.
fn usage_for(args: &[OsString]) -> String {
    let mut cmd = Cli::command();
    let named = args
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find(|a| cmd.find_subcommand(a).is_some())
        .map(str::to_owned);
    match named.and_then(|n| cmd.find_subcommand_mut(&n).map(|sub| sub.render_usage())) {
        Some(usage) => usage.to_string().replacen("Usage: ", "Usage: hubbell ", 1),
        None => cmd.render_usage().to_string(),
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::UnsupportedFormat(format!("write failed: {e}"))
}

fn converged_code(r: &EvalResult) -> i32 {
    if r.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

#[derive(Serialize)]
struct EvalDoc<'a> {
    params: &'a HubbellParams,
    value: f64,
    terms_used: usize,
    est_error: f64,
    method: &'static str,
    converged: bool,
}

pub fn cmd_eval(
    args: &EvalArgs,
    cfg: &CliConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let params = HubbellParams::new(
        args.a,
        args.b,
        args.p,
        args.lambda,
        args.alpha,
        args.beta,
        args.gamma,
    )
    .with_sigma(args.sigma);
    if args.method == EvalMethod::Closed && !params.is_half() {
        return Err(Error::InvalidParams(format!(
            "method closed requires (lambda, alpha, beta, gamma) = (1, 0.5, 0.5, 1), got ({}, {}, {}, {})",
            args.lambda, args.alpha, args.beta, args.gamma
        )));
    }
    params.validate()?;
    if let Some(w) = plaque_ordering_warning(args.a, args.b) {
        let _ = writeln!(err, "warning: {w}");
    }

    let ctl = &cfg.series;
    let HubbellParams { a, b, p, sigma, .. } = params;
    let result = match args.method {
        EvalMethod::Auto if params.is_classical() => eval_h_lambda0(a, b, p, sigma, ctl)?,
        EvalMethod::Auto | EvalMethod::Sum => eval_h_general(&params, ctl)?,
        EvalMethod::Closed => eval_h_closed_half(a, b, p, sigma, ctl)?,
        EvalMethod::Quadrature => quad_h_general(&params, &cfg.quadrature)?,
    };
    if !result.converged {
        let _ = writeln!(
            err,
            "warning: not converged after {} terms; estimated error {:e}",
            result.terms_used, result.est_error
        );
    }

    let text = match cfg.format {
        OutputFormat::Text => format!(
            "value       {}\nterms_used  {}\nest_error   {:e}\nmethod      {}\nconverged   {}\n",
            significant(result.value, TEXT_DIGITS),
            result.terms_used,
            result.est_error,
            result.method.label(),
            result.converged
        ),
        OutputFormat::Json => json_line(&EvalDoc {
            params: &params,
            value: result.value,
            terms_used: result.terms_used,
            est_error: result.est_error,
            method: result.method.label(),
            converged: result.converged,
        })?,
        OutputFormat::Csv => {
            let p = &params;
            let row = [p.a, p.b, p.p, p.lambda, p.alpha, p.beta, p.gamma, p.sigma]
                .iter()
                .map(|v| v.to_string())
                .chain([
                    result.method.label().to_string(),
                    significant(result.value, MACHINE_DIGITS),
                    result.terms_used.to_string(),
                    format!("{:e}", result.est_error),
                    result.converged.to_string(),
                ])
                .collect::<Vec<_>>();
            csv_doc(
                &[
                    "a",
                    "b",
                    "p",
                    "lambda",
                    "alpha",
                    "beta",
                    "gamma",
                    "sigma",
                    "method",
                    "value",
                    "terms_used",
                    "est_error",
                    "converged",
                ],
                &row,
            )?
        }
    };
    out.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(converged_code(&result))
}

pub fn cmd_tables(args: &TablesArgs, cfg: &CliConfig, out: &mut dyn Write) -> Result<i32> {
    let ids: Vec<TableId> = match args.which.as_str() {
        "all" => TableId::ALL.to_vec(),
        one => vec![one.parse()?],
    };
    let rows: Vec<TableRow> = ids
        .into_iter()
        .flat_map(|id| run_table(id, &cfg.series, &cfg.quadrature))
        .collect();
    let report = emit_report(&rows, cfg.format.into())?;
    out.write_all(report.as_bytes()).map_err(io_err)?;
    Ok(if rows.iter().all(TableRow::passes) {
        EXIT_OK
    } else {
        EXIT_TABLE_MISMATCH
    })
}

#[derive(Serialize)]
struct F2Doc<'a> {
    args: &'a F2Args,
    method: &'static str,
    value: f64,
    terms_used: usize,
    est_error: f64,
    converged: bool,
}

#[derive(Serialize)]
struct RecurrenceDoc<'a> {
    args: &'a F2Args,
    n: usize,
    lhs: f64,
    rhs: f64,
    difference: f64,
    relative_difference: f64,
    converged: bool,
}

pub fn cmd_f2(args: &F2CmdArgs, cfg: &CliConfig, out: &mut dyn Write) -> Result<i32> {
    let f2 = F2Args::new(
        args.sigma, args.a1, args.a2, args.b1, args.b2, args.x, args.y,
    );
    let ctl = &cfg.series;
    let (text, code) = match args.f2_method {
        F2Method::Series | F2Method::Reduce => {
            let r = if args.f2_method == F2Method::Series {
                f2_double_series(&f2, ctl)?
            } else {
                f2_reduce_to_2f1(&f2, ctl)?
            };
            let text = match cfg.format {
                OutputFormat::Text => format!(
                    "value       {}\nterms_used  {}\nest_error   {:e}\nmethod      {}\nconverged   {}\n",
                    significant(r.value, TEXT_DIGITS),
                    r.terms_used,
                    r.est_error,
                    r.method.label(),
                    r.converged
                ),
                OutputFormat::Json => json_line(&F2Doc {
                    args: &f2,
                    method: r.method.label(),
                    value: r.value,
                    terms_used: r.terms_used,
                    est_error: r.est_error,
                    converged: r.converged,
                })?,
                OutputFormat::Csv => csv_doc(
                    &["method", "value", "terms_used", "est_error", "converged"],
                    &[
                        r.method.label().to_string(),
                        significant(r.value, MACHINE_DIGITS),
                        r.terms_used.to_string(),
                        format!("{:e}", r.est_error),
                        r.converged.to_string(),
                    ],
                )?,
            };
            (text, converged_code(&r))
        }
        F2Method::RecurrenceCheck => {
            let shifted = F2Args {
                a2: f2.a2 - args.n as f64,
                ..f2
            };
            let lhs = f2_double_series(&shifted, ctl)?;
            let rhs = f2_recurrence_step(&f2, args.n, ctl)?;
            let difference = lhs.value - rhs.value;
            let relative = if lhs.value == 0.0 {
                difference.abs()
            } else {
                (difference / lhs.value).abs()
            };
            let converged = lhs.converged && rhs.converged;
            let text = match cfg.format {
                OutputFormat::Text => format!(
                    "lhs         {}\nrhs         {}\ndifference  {:e}\nrelative    {:e}\nconverged   {}\n",
                    significant(lhs.value, TEXT_DIGITS),
                    significant(rhs.value, TEXT_DIGITS),
                    difference,
                    relative,
                    converged
                ),
                OutputFormat::Json => json_line(&RecurrenceDoc {
                    args: &f2,
                    n: args.n,
                    lhs: lhs.value,
                    rhs: rhs.value,
                    difference,
                    relative_difference: relative,
                    converged,
                })?,
                OutputFormat::Csv => csv_doc(
                    &["n", "lhs", "rhs", "difference", "relative_difference", "converged"],
                    &[
                        args.n.to_string(),
                        significant(lhs.value, MACHINE_DIGITS),
                        significant(rhs.value, MACHINE_DIGITS),
                        format!("{difference:e}"),
                        format!("{relative:e}"),
                        converged.to_string(),
                    ],
                )?,
            };
            (
                text,
                if converged {
                    EXIT_OK
                } else {
                    EXIT_NOT_CONVERGED
                },
            )
        }
    };
    out.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(code)
}

fn json_line<T: Serialize>(doc: &T) -> Result<String> {
    serde_json::to_string(doc)
        .map(|s| s + "\n")
        .map_err(|e| Error::UnsupportedFormat(e.to_string()))
}

fn csv_doc<S: AsRef<str>>(header: &[&str], row: &[S]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::UnsupportedFormat(e.to_string());
    w.write_record(header).map_err(fail)?;
    w.write_record(row.iter().map(|s| s.as_ref()))
        .map_err(fail)?;
    let bytes = w
        .into_inner()
        .map_err(|e| Error::UnsupportedFormat(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::UnsupportedFormat(e.to_string()))
}
