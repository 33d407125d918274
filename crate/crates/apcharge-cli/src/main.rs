//! Command-line front end: norms, coefficients, and densities at the prompt,
//! plus verification campaigns and the embedding demo.
//!
//! Exit codes: 0 success (and campaign pass), 1 inequality violation found,
//! 2 usage error, 3 numerical non-convergence.

use std::io::Write;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use apcharge::charge::{Charge, SetExpr, SimpleFunction};
use apcharge::density::{DensityError, DensitySet};
use apcharge::fefferman::{CofiniteModelSpace, IsometryReport, ModelNorm};
use apcharge::lorentz::LorentzParams;
use apcharge::tm::SimpleFunctionSequence;
use apcharge::trigpoly::{PolyError, TrigPolynomial};
use apcharge::verify::{
    records_csv, run_campaign, CampaignConfig, GeneratorMode, Inequality, InequalityReport,
    VerifyError,
};

#[derive(Parser)]
#[command(name = "apcharge", version, about = "Charge-space norms and inequality campaigns for almost periodic trigonometric polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NormSpace {
    /// Besicovitch norm (∫|P|^q dγ)^{1/q}
    B,
    /// Lorentz norm of |P| against the density charge
    Lorentz,
}

#[derive(Subcommand)]
enum Command {
    /// Print Fourier coefficients of a trigonometric polynomial
    Coeffs {
        /// polynomial in the form re,im@freq;re,im@freq;...
        #[arg(long)]
        poly: String,
        /// frequencies to query; all stored terms when omitted
        #[arg(long = "eta")]
        etas: Vec<f64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Compute a norm of a trigonometric polynomial
    Norm {
        #[arg(long)]
        poly: String,
        #[arg(long, value_enum)]
        space: NormSpace,
        /// first Lorentz exponent (required for --space lorentz)
        #[arg(long)]
        p: Option<f64>,
        /// second exponent; accepts "inf"
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// number of distribution levels for the Lorentz norm
        #[arg(long, default_value_t = 512)]
        grid: u32,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Evaluate the density charge of a set
    Gamma {
        /// set in the form period=q;trace=[a,b)...;plus=[..];minus=[..]
        #[arg(long)]
        set: String,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Run a verification campaign for one inequality
    Verify {
        /// bessel | hausdorff_young | paley | l1_bound | lorentz_paley
        #[arg(long)]
        ineq: String,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 100)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 8)]
        terms: u32,
        #[arg(long, default_value_t = 16.0)]
        freq_range: f64,
        #[arg(long, default_value_t = 2.0)]
        coeff_bound: f64,
        /// integer-lattice | generic-real
        #[arg(long, default_value = "integer-lattice")]
        mode: String,
        /// include per-trial records in the report
        #[arg(long)]
        records: bool,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// write the report here instead of stdout
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Run a campaign described by a JSON config file; flags override keys
    Campaign {
        #[arg(long)]
        config: std::path::PathBuf,
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        records: bool,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Embed canonical sequences into the measure-space model and compare norms
    EmbedDemo {
        #[arg(long, default_value_t = 64)]
        horizon: u32,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

/// Error wrapper that knows its exit code.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::Parse(_) | PolyError::InvalidParams(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<DensityError> for CliError {
    fn from(e: DensityError) -> Self {
        match e {
            DensityError::Parse(_) | DensityError::InvalidSet(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            VerifyError::Poly(p) => p.into(),
        }
    }
}

/// `x` with 12 significant digits, positional where readable.
fn fmt_sig(x: f64) -> String {
    const DIGITS: usize = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (_, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..DIGITS as i32 + 2).contains(&exp) {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let trimmed = s.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        sci
    }
}

fn parse_q(s: &str) -> Result<f64, CliError> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        other => other
            .parse()
            .map_err(|_| CliError::Usage(format!("cannot parse exponent q = {other:?}"))),
    }
}

#[derive(Serialize)]
struct CoeffLine {
    freq: f64,
    re: f64,
    im: f64,
}

fn run_coeffs(poly: &str, etas: &[f64], format: OutputFormat) -> Result<String, CliError> {
    let p = TrigPolynomial::from_str(poly)?;
    let lines: Vec<CoeffLine> = if etas.is_empty() {
        p.terms().iter().map(|(freq, a)| CoeffLine { freq: *freq, re: a.re, im: a.im }).collect()
    } else {
        etas.iter()
            .map(|&eta| {
                p.fourier_coefficient(eta)
                    .map(|a| CoeffLine { freq: eta, re: a.re, im: a.im })
            })
            .collect::<Result<_, _>>()?
    };
    Ok(match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string(&serde_json::json!({ "coefficients": lines }))
                .expect("serializable");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut s = String::from("freq,re,im\n");
            for l in &lines {
                s.push_str(&format!("{},{},{}\n", l.freq, l.re, l.im));
            }
            s
        }
        OutputFormat::Text => {
            let mut s = String::new();
            for l in &lines {
                s.push_str(&format!("{}\t{}\t{}\n", fmt_sig(l.freq), fmt_sig(l.re), fmt_sig(l.im)));
            }
            s
        }
    })
}

fn run_norm(
    poly: &str,
    space: NormSpace,
    p: Option<f64>,
    q: &str,
    tol: f64,
    grid: u32,
    format: OutputFormat,
) -> Result<String, CliError> {
    let polynomial = TrigPolynomial::from_str(poly)?;
    let q = parse_q(q)?;
    let estimate = match space {
        NormSpace::B => {
            if !(q.is_finite() && q > 0.0) {
                return Err(CliError::Usage(format!("besicovitch norm needs finite q > 0, got {q}")));
            }
            polynomial.b_norm(q, tol)?
        }
        NormSpace::Lorentz => {
            let p = p.ok_or_else(|| CliError::Usage("--space lorentz requires --p".into()))?;
            let params = LorentzParams::new(p, q)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            polynomial.lorentz_gamma_norm(params, grid, tol)?
        }
    };
    Ok(match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string(&serde_json::json!({
                "value": estimate.value,
                "exact": estimate.exact,
                "residual": estimate.residual,
            }))
            .expect("serializable");
            s.push('\n');
            s
        }
        OutputFormat::Csv => format!("value,exact,residual\n{},{},{}\n", estimate.value, estimate.exact, estimate.residual),
        OutputFormat::Text => format!("{}\n", fmt_sig(estimate.value)),
    })
}

fn run_gamma(set: &str, format: OutputFormat) -> Result<String, CliError> {
    let e = DensitySet::from_str(set)?;
    let gamma = e.gamma();
    Ok(match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string(&serde_json::json!({ "gamma": gamma }))
                .expect("serializable");
            s.push('\n');
            s
        }
        OutputFormat::Csv => format!("gamma\n{gamma}\n"),
        OutputFormat::Text => format!("{}\n", fmt_sig(gamma)),
    })
}

fn report_text(report: &InequalityReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("inequality      {}\n", report.name));
    s.push_str(&format!(
        "parameters      p={} q={} q'={}\n",
        report.params.p.map_or("-".to_string(), fmt_sig),
        fmt_sig(report.params.q),
        report.params.q_prime.map_or("inf".to_string(), fmt_sig),
    ));
    s.push_str(&format!("trials          {}\n", report.trials));
    s.push_str(&format!("skipped         {}\n", report.skipped));
    s.push_str(&format!("violations      {}\n", report.violations));
    s.push_str(&format!("max ratio       {}\n", fmt_sig(report.max_ratio)));
    s.push_str(&format!("mean ratio      {}\n", fmt_sig(report.mean_ratio)));
    s.push_str(&format!("empirical C     {}\n", fmt_sig(report.empirical_constant)));
    s.push_str(&format!("base seed       {}\n", report.base_seed));
    s.push_str(&format!("note            {}\n", report.note));
    s
}

fn format_report(report: &InequalityReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string(report).expect("serializable");
            s.push('\n');
            s
        }
        OutputFormat::Csv => records_csv(report.records.as_deref().unwrap_or(&[])),
        OutputFormat::Text => report_text(report),
    }
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("APCHARGE_THREADS") {
        Ok(v) => v
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("APCHARGE_THREADS must be an integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn emit_report(
    report: &InequalityReport,
    format: OutputFormat,
    out: Option<&std::path::Path>,
) -> Result<String, CliError> {
    let body = format_report(report, format);
    if let Some(path) = out {
        std::fs::write(path, &body)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
        Ok(format!("report written to {}\n", path.display()))
    } else {
        Ok(body)
    }
}

#[derive(Serialize)]
struct EmbedDemoEntry {
    sequence: String,
    report: IsometryReport,
}

fn run_embed_demo(horizon: u32, tol: f64) -> Result<String, CliError> {
    let charge = Charge::cofinite_geometric(0.5, 5.0);
    let space = CofiniteModelSpace::from_charge(&charge)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let norms = [
        ModelNorm::Integral,
        ModelNorm::Lp(1.0),
        ModelNorm::Lp(2.0),
        ModelNorm::Lorentz(LorentzParams::new(2.0, 1.0).expect("valid")),
        ModelNorm::Lorentz(LorentzParams::new(3.0, f64::INFINITY).expect("valid")),
    ];
    let sequences: Vec<(String, SimpleFunctionSequence)> = vec![
        (
            "growing-prefix-indicators".to_string(),
            SimpleFunctionSequence::new(charge.clone(), horizon, |n| {
                SimpleFunction::indicator(SetExpr::finite(1..=n as u64))
            }),
        ),
        (
            "constant-mixed-simple".to_string(),
            SimpleFunctionSequence::new(charge.clone(), horizon, |_| {
                SimpleFunction::new(vec![
                    (2.0, SetExpr::finite([1, 3])),
                    (-1.0, SetExpr::cofinite([1, 2, 3])),
                ])
                .expect("disjoint terms")
            }),
        ),
        (
            "staircase-over-cofinite-floor".to_string(),
            SimpleFunctionSequence::new(charge.clone(), horizon, |n| {
                SimpleFunction::new(vec![
                    (3.0, SetExpr::finite(1..=n as u64)),
                    (1.0, SetExpr::cofinite(1..=n as u64)),
                ])
                .expect("prefix and its complement are disjoint")
            }),
        ),
    ];
    let mut entries = Vec::new();
    for (name, seq) in &sequences {
        let report = space
            .verify_isometry(seq, &norms, tol)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        entries.push(EmbedDemoEntry { sequence: name.clone(), report });
    }
    let mut s = serde_json::to_string(&entries).expect("serializable");
    s.push('\n');
    Ok(s)
}

fn dispatch(cli: Cli) -> Result<(String, u8), CliError> {
    match cli.command {
        Command::Coeffs { poly, etas, format } => {
            Ok((run_coeffs(&poly, &etas, format)?, 0))
        }
        Command::Norm { poly, space, p, q, tol, grid, format } => {
            Ok((run_norm(&poly, space, p, &q, tol, grid, format)?, 0))
        }
        Command::Gamma { set, format } => Ok((run_gamma(&set, format)?, 0)),
        Command::Verify {
            ineq,
            p,
            q,
            trials,
            seed,
            tol,
            terms,
            freq_range,
            coeff_bound,
            mode,
            records,
            format,
            out,
        } => {
            let inequality = Inequality::from_str(&ineq)?;
            let mut config = CampaignConfig::new(inequality, q, trials, seed);
            config.p = p;
            config.tol = tol;
            config.n_terms = terms;
            config.freq_range = freq_range;
            config.coeff_bound = coeff_bound;
            config.mode = GeneratorMode::from_str(&mode)?;
            config.keep_records = records || format == OutputFormat::Csv;
            config.threads = threads_from_env()?;
            let report = run_campaign(&config)?;
            let body = emit_report(&report, format, out.as_deref())?;
            Ok((body, if report.passed() { 0 } else { 1 }))
        }
        Command::Campaign { config, trials, seed, records, format, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", config.display())))?;
            let mut cfg: CampaignConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad config: {e}")))?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            cfg.keep_records |= records || format == OutputFormat::Csv;
            if cfg.threads.is_none() {
                cfg.threads = threads_from_env()?;
            }
            let report = run_campaign(&cfg)?;
            let body = emit_report(&report, format, out.as_deref())?;
            Ok((body, if report.passed() { 0 } else { 1 }))
        }
        Command::EmbedDemo { horizon, tol } => Ok((run_embed_demo(horizon, tol)?, 0)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok((body, code)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(body.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
