//! Command-line driver for the `marcumq` toolkit.
//!
//! Five subcommands cover the toolkit's surface: `eval` (point values of the
//! reference function and its approximations), `fit` (calibration sweeps to
//! CSV), `regress` (polynomial models of the calibrated parameters to JSON),
//! `error-curve` (Ê(a) sweeps to CSV), and `connectivity` (closed-form vs
//! quadrature connection mass for a scenario file, to JSON).
//!
//! Every file-writing command also writes a `<out>.manifest.json` sidecar
//! naming the command, its parameters, the tool version, and the emitted
//! files. Reruns with identical inputs are byte-identical (no timestamps,
//! locale-independent formatting), so outputs can be committed as fixtures.
//!
//! Exit codes: 0 success; 2 usage or domain errors; 3 convergence failures;
//! 4 numerical rank deficiency. No other codes are used.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use marcumq::{
    analytic_params_small_a, connection_mass_closed_form, connection_mass_numeric,
    default_mu_poly, default_nu_poly, discrete_error, eval_poly_params, fit_grid, marcum_q1,
    pair_connectivity, q_tilde, regress_poly, ApproxParams, ConnectivityMethod, Error, FitConfig,
    InitStrategy, MassIntegrand, Scenario,
};

#[derive(Parser)]
#[command(
    name = "marcumq",
    version,
    about = "Marcum Q-function toolkit: evaluation, calibration, regression, connectivity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print Q₁(a, b) or an approximation of it to 12 decimal places.
    Eval {
        /// Noncentrality argument a ≥ 0.
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        /// Threshold argument b ≥ 0.
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        /// Evaluator: the reference series, the approximation with
        /// closed-form small-a parameters, or with polynomial-model
        /// parameters.
        #[arg(long, value_enum, default_value_t = EvalMethod::Exact)]
        method: EvalMethod,
        /// Print all three evaluators plus absolute differences instead.
        #[arg(long)]
        compare: bool,
    },
    /// Calibrate (ν, μ) over an a grid and write the fit table as CSV.
    Fit {
        /// Grid: a single value, a comma list, or start:stop:step
        /// (stop included when reachable within 1e-12).
        #[arg(long, allow_negative_numbers = true)]
        a: String,
        /// Discretization step δ of the error functional.
        #[arg(long, default_value_t = 1e-4, allow_negative_numbers = true)]
        delta: f64,
        /// Grid end b_max of the error functional.
        #[arg(long = "bmax", default_value_t = 12.0, allow_negative_numbers = true)]
        bmax: f64,
        /// Output CSV path.
        #[arg(long, default_value = "fit.csv")]
        out: PathBuf,
    },
    /// Fit polynomials to the μ(a) and ν(a) columns of a fit table.
    Regress {
        /// Input CSV produced by `fit`.
        #[arg(long)]
        input: PathBuf,
        /// Polynomial degree (≥ 1).
        #[arg(long)]
        degree: usize,
        /// Output JSON path.
        #[arg(long, default_value = "regression.json")]
        out: PathBuf,
    },
    /// Sweep the discretized error Ê(a) and write (a, error) rows as CSV.
    ErrorCurve {
        /// Grid: a single value, a comma list, or start:stop:step.
        #[arg(long, allow_negative_numbers = true)]
        a: String,
        /// Parameterization: closed-form small-a, per-point fitted, or
        /// polynomial-model parameters.
        #[arg(long, value_enum, default_value_t = CurveMethod::Analytic)]
        method: CurveMethod,
        /// Discretization step δ of the error functional.
        #[arg(long, default_value_t = 1e-4, allow_negative_numbers = true)]
        delta: f64,
        /// Grid end b_max of the error functional.
        #[arg(long = "bmax", default_value_t = 12.0, allow_negative_numbers = true)]
        bmax: f64,
        /// Output CSV path.
        #[arg(long, default_value = "error_curve.csv")]
        out: PathBuf,
    },
    /// Evaluate a connectivity scenario: closed-form and quadrature
    /// connection mass plus their difference, as JSON.
    Connectivity {
        /// Scenario JSON file with keys K, alpha, r1, r2, optional omega.
        #[arg(long)]
        scenario: PathBuf,
        /// Integrand for the quadrature mass (the closed form always uses
        /// the approximation's parameters).
        #[arg(long, value_enum, default_value_t = MassMethod::Approx)]
        method: MassMethod,
        /// Override the approximation parameter ν (requires --mu).
        #[arg(long, requires = "mu", allow_negative_numbers = true)]
        nu: Option<f64>,
        /// Override the approximation parameter μ (requires --nu).
        #[arg(long, requires = "nu", allow_negative_numbers = true)]
        mu: Option<f64>,
        /// Quadrature tolerance.
        #[arg(long, default_value_t = 1e-10, allow_negative_numbers = true)]
        tol: f64,
        /// Also write an (r, H(r)) profile CSV to this path.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Output JSON path.
        #[arg(long, default_value = "connectivity.json")]
        out: PathBuf,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum EvalMethod {
    Exact,
    Approx,
    Poly,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CurveMethod {
    Analytic,
    Fitted,
    Poly,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MassMethod {
    Exact,
    Approx,
}

/// Map library errors onto the exit-code contract.
fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Domain(_) | Error::Precondition(_) | Error::Overflow(_) => 2,
        Error::Convergence(_) => 3,
        Error::RankDeficient(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Eval {
            a,
            b,
            method,
            compare,
        } => cmd_eval(a, b, method, compare),
        Command::Fit {
            a,
            delta,
            bmax,
            out,
        } => cmd_fit(&a, delta, bmax, &out),
        Command::Regress { input, degree, out } => cmd_regress(&input, degree, &out),
        Command::ErrorCurve {
            a,
            method,
            delta,
            bmax,
            out,
        } => cmd_error_curve(&a, method, delta, bmax, &out),
        Command::Connectivity {
            scenario,
            method,
            nu,
            mu,
            tol,
            profile,
            out,
        } => cmd_connectivity(&scenario, method, nu.zip(mu), tol, profile.as_deref(), &out),
    }
}

// ---------------------------------------------------------------- helpers

/// Parse an a-grid: `x`, `x,y,z`, or `start:stop:step` (stop inclusive when
/// reachable within 1e-12; a landing within that window snaps to `stop`
/// exactly so printed grids end on round values).
fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let parse_one = |tok: &str| -> Result<f64, Error> {
        tok.trim()
            .parse::<f64>()
            .map_err(|_| Error::Domain(format!("cannot parse '{tok}' as a number")))
    };
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Domain(format!(
                "range must be start:stop:step, got '{spec}'"
            )));
        }
        let start = parse_one(parts[0])?;
        let stop = parse_one(parts[1])?;
        let step = parse_one(parts[2])?;
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain(format!("range step must be > 0, got {step}")));
        }
        if stop < start {
            return Err(Error::Domain(format!(
                "range stop {stop} is below start {start}"
            )));
        }
        let mut values = Vec::new();
        let mut k = 0u64;
        loop {
            let value = start + step * k as f64;
            if value > stop + 1e-12 {
                break;
            }
            values.push(if (value - stop).abs() <= 1e-12 {
                stop
            } else {
                value
            });
            k += 1;
        }
        Ok(values)
    } else if spec.contains(',') {
        spec.split(',').map(parse_one).collect()
    } else {
        Ok(vec![parse_one(spec)?])
    }
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    parameters: BTreeMap<String, String>,
    tool_version: String,
    outputs: Vec<String>,
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents)
        .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display())))
}

/// Write the `<out>.manifest.json` sidecar naming every data file this
/// invocation produced.
fn write_manifest(
    command: &str,
    parameters: BTreeMap<String, String>,
    out: &Path,
    outputs: &[&Path],
) -> Result<(), Error> {
    let manifest = RunManifest {
        command: command.to_string(),
        parameters,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: outputs
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Domain(format!("manifest serialization failed: {e}")))?;
    text.push('\n');
    let manifest_path = PathBuf::from(format!("{}.manifest.json", out.display()));
    write_file(&manifest_path, &text)
}

fn poly_params_at(a: f64) -> Result<ApproxParams, Error> {
    eval_poly_params(&default_mu_poly(), &default_nu_poly(), a)
}

// ------------------------------------------------------------------ eval

fn cmd_eval(a: f64, b: f64, method: EvalMethod, compare: bool) -> Result<u8, Error> {
    if compare {
        let exact = marcum_q1(a, b)?;
        let approx = q_tilde(analytic_params_small_a(a)?, b)?;
        let poly = q_tilde(poly_params_at(a)?, b)?;
        println!("exact: {exact:.12}");
        println!("approx: {approx:.12}");
        println!("poly: {poly:.12}");
        println!("|exact - approx|: {:.6e}", (exact - approx).abs());
        println!("|exact - poly|: {:.6e}", (exact - poly).abs());
        return Ok(0);
    }
    let value = match method {
        EvalMethod::Exact => marcum_q1(a, b)?,
        EvalMethod::Approx => q_tilde(analytic_params_small_a(a)?, b)?,
        EvalMethod::Poly => q_tilde(poly_params_at(a)?, b)?,
    };
    println!("{value:.12}");
    Ok(0)
}

// ------------------------------------------------------------------- fit

const FIT_HEADER: &str = "a,nu,mu,error,iterations,converged";

fn cmd_fit(a_spec: &str, delta: f64, bmax: f64, out: &Path) -> Result<u8, Error> {
    let grid = parse_grid(a_spec)?;
    let config = FitConfig {
        delta,
        b_max: bmax,
        init: InitStrategy::PreviousGridPoint,
        ..FitConfig::default()
    };
    let results = fit_grid(&grid, config)?;

    let mut csv = String::from(FIT_HEADER);
    csv.push('\n');
    for r in &results {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.a, r.params.nu, r.params.mu, r.achieved_error, r.iterations, r.converged
        )
        .expect("string write cannot fail");
    }
    write_file(out, &csv)?;

    let mut parameters = BTreeMap::new();
    parameters.insert("a".to_string(), a_spec.to_string());
    parameters.insert("delta".to_string(), delta.to_string());
    parameters.insert("bmax".to_string(), bmax.to_string());
    write_manifest("fit", parameters, out, &[out])?;

    let unconverged = results.iter().filter(|r| !r.converged).count();
    if unconverged > 0 {
        eprintln!(
            "warning: {unconverged} of {} fits did not converge",
            results.len()
        );
        return Ok(3);
    }
    Ok(0)
}

// --------------------------------------------------------------- regress

/// Parse a fit CSV back into (a, ν, μ) triples, strictly: exact header,
/// six comma-separated fields per row, numeric first three columns.
fn parse_fit_table(path: &Path) -> Result<Vec<(f64, f64, f64)>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim_end() == FIT_HEADER => {}
        other => {
            return Err(Error::Domain(format!(
                "malformed fit table {}: expected header '{FIT_HEADER}', got {:?}",
                path.display(),
                other.unwrap_or("<empty file>")
            )));
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Domain(format!(
                "malformed fit table {}: row {} has {} fields, expected 6",
                path.display(),
                idx + 2,
                fields.len()
            )));
        }
        let parse = |tok: &str, col: &str| -> Result<f64, Error> {
            tok.parse::<f64>().map_err(|_| {
                Error::Domain(format!(
                    "malformed fit table {}: row {} column {col}: '{tok}' is not a number",
                    path.display(),
                    idx + 2
                ))
            })
        };
        rows.push((
            parse(fields[0], "a")?,
            parse(fields[1], "nu")?,
            parse(fields[2], "mu")?,
        ));
    }
    Ok(rows)
}

#[derive(Serialize)]
struct RegressionBlock {
    coeffs: Vec<f64>,
    rss: f64,
}

#[derive(Serialize)]
struct RegressionOutput {
    degree: usize,
    mu: RegressionBlock,
    nu: RegressionBlock,
}

fn cmd_regress(input: &Path, degree: usize, out: &Path) -> Result<u8, Error> {
    let rows = parse_fit_table(input)?;
    let mu_samples: Vec<(f64, f64)> = rows.iter().map(|&(a, _, mu)| (a, mu)).collect();
    let nu_samples: Vec<(f64, f64)> = rows.iter().map(|&(a, nu, _)| (a, nu)).collect();
    let mu_fit = regress_poly(&mu_samples, degree)?;
    let nu_fit = regress_poly(&nu_samples, degree)?;

    let output = RegressionOutput {
        degree,
        mu: RegressionBlock {
            coeffs: mu_fit.coeffs.coeffs().to_vec(),
            rss: mu_fit.rss,
        },
        nu: RegressionBlock {
            coeffs: nu_fit.coeffs.coeffs().to_vec(),
            rss: nu_fit.rss,
        },
    };
    let mut text = serde_json::to_string_pretty(&output)
        .map_err(|e| Error::Domain(format!("regression serialization failed: {e}")))?;
    text.push('\n');
    write_file(out, &text)?;

    let mut parameters = BTreeMap::new();
    parameters.insert("input".to_string(), input.display().to_string());
    parameters.insert("degree".to_string(), degree.to_string());
    write_manifest("regress", parameters, out, &[out])?;
    Ok(0)
}

// ----------------------------------------------------------- error-curve

fn cmd_error_curve(
    a_spec: &str,
    method: CurveMethod,
    delta: f64,
    bmax: f64,
    out: &Path,
) -> Result<u8, Error> {
    let grid = parse_grid(a_spec)?;
    let mut csv = String::from("a,error\n");
    match method {
        CurveMethod::Analytic => {
            for &a in &grid {
                let e = discrete_error(a, analytic_params_small_a(a)?, delta, bmax)?;
                writeln!(csv, "{a},{e}").expect("string write cannot fail");
            }
        }
        CurveMethod::Poly => {
            for &a in &grid {
                let e = discrete_error(a, poly_params_at(a)?, delta, bmax)?;
                writeln!(csv, "{a},{e}").expect("string write cannot fail");
            }
        }
        CurveMethod::Fitted => {
            let config = FitConfig {
                delta,
                b_max: bmax,
                init: InitStrategy::PreviousGridPoint,
                ..FitConfig::default()
            };
            for r in fit_grid(&grid, config)? {
                writeln!(csv, "{},{}", r.a, r.achieved_error).expect("string write cannot fail");
            }
        }
    }
    write_file(out, &csv)?;

    let method_name = match method {
        CurveMethod::Analytic => "analytic",
        CurveMethod::Fitted => "fitted",
        CurveMethod::Poly => "poly",
    };
    let mut parameters = BTreeMap::new();
    parameters.insert("a".to_string(), a_spec.to_string());
    parameters.insert("method".to_string(), method_name.to_string());
    parameters.insert("delta".to_string(), delta.to_string());
    parameters.insert("bmax".to_string(), bmax.to_string());
    write_manifest("error-curve", parameters, out, &[out])?;
    Ok(0)
}

// ---------------------------------------------------------- connectivity

#[derive(Serialize)]
struct ParamsOut {
    nu: f64,
    mu: f64,
}

#[derive(Serialize)]
struct ConnectivityOutput {
    scenario: Scenario,
    a: f64,
    params: ParamsOut,
    method: String,
    closed_form: f64,
    numeric: f64,
    difference: f64,
}

fn cmd_connectivity(
    scenario_path: &Path,
    method: MassMethod,
    param_override: Option<(f64, f64)>,
    tol: f64,
    profile: Option<&Path>,
    out: &Path,
) -> Result<u8, Error> {
    let text = std::fs::read_to_string(scenario_path)
        .map_err(|e| Error::Domain(format!("cannot read {}: {e}", scenario_path.display())))?;
    let scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| Error::Domain(format!("invalid scenario {}: {e}", scenario_path.display())))?;
    scenario.validate()?;

    let a = scenario.a();
    // The polynomial parameter models are the default; --nu/--mu override
    // them (e.g. {−ln 2, 2} probes the exact small-a limiting case).
    let params = match param_override {
        Some((nu, mu)) => ApproxParams::new(nu, mu)?,
        None => poly_params_at(a)?,
    };

    let closed = connection_mass_closed_form(&scenario, params)?;
    let (integrand, method_name) = match method {
        MassMethod::Exact => (MassIntegrand::Exact, "exact"),
        MassMethod::Approx => (MassIntegrand::Approx(params), "approx"),
    };
    let numeric = connection_mass_numeric(&scenario, &integrand, tol)?;

    let output = ConnectivityOutput {
        scenario,
        a,
        params: ParamsOut {
            nu: params.nu,
            mu: params.mu,
        },
        method: method_name.to_string(),
        closed_form: closed,
        numeric,
        difference: closed - numeric,
    };
    let mut json = serde_json::to_string_pretty(&output)
        .map_err(|e| Error::Domain(format!("result serialization failed: {e}")))?;
    json.push('\n');
    write_file(out, &json)?;

    let mut outputs: Vec<&Path> = vec![out];
    if let Some(profile_path) = profile {
        let connectivity_method = match method {
            MassMethod::Exact => ConnectivityMethod::Exact,
            MassMethod::Approx => ConnectivityMethod::Approx(params),
        };
        let mut csv = String::from("r,H\n");
        const PROFILE_POINTS: usize = 200;
        for i in 0..=PROFILE_POINTS {
            let r = scenario.r1
                + (scenario.r2 - scenario.r1) * i as f64 / PROFILE_POINTS as f64;
            let h = pair_connectivity(scenario.k, scenario.alpha, r, &connectivity_method)?;
            writeln!(csv, "{r},{h}").expect("string write cannot fail");
        }
        write_file(profile_path, &csv)?;
        outputs.push(profile_path);
    }

    let mut parameters = BTreeMap::new();
    parameters.insert("scenario".to_string(), scenario_path.display().to_string());
    parameters.insert("method".to_string(), method_name.to_string());
    parameters.insert("tol".to_string(), tol.to_string());
    parameters.insert("nu".to_string(), params.nu.to_string());
    parameters.insert("mu".to_string(), params.mu.to_string());
    if let Some(p) = profile {
        parameters.insert("profile".to_string(), p.display().to_string());
    }
    write_manifest("connectivity", parameters, out, &outputs)?;
    Ok(0)
}
