//! Command-line entry point: ingest system JSON, dispatch to the
//! certifiers and the simulator, emit machine-readable reports.
//!
//! Exit codes: 0 on success/pass, 1 when a certification attempt is
//! infeasible or a validation fails, 2 on input errors. Diagnostics go
//! to standard error; reports go to standard output or `--out`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::continuous::{
    self, check_cor2, check_cor4, check_thm1, check_thm3, find_certificate_thm1,
    ContinuousCertificate, ContinuousCriterion,
};
use crate::discrete::{
    self, check_thm4, check_thm5, find_certificate_cor5, lambda_max_profile,
    resolve_bounds_discrete, DiscreteCertificate, DiscreteCriterion,
};
use crate::matrix::ConstMatrix;
use crate::outcome::{Infeasibility, Outcome};
use crate::report::Report;
use crate::schema::{parse_system_json, ParsedSystem, SchemaError};
use crate::sector::SectorBounds;
use crate::simulate::{
    integrate_dde, iterate_discrete, monte_carlo_validate_continuous,
    monte_carlo_validate_discrete, sample_nonlinearity, InitialHistory,
};
use crate::system::{uniform_grid, ContinuousSystem, DiscreteSystem};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Certify(#[from] continuous::CertifyError),
    #[error(transparent)]
    Discrete(#[from] discrete::DiscreteCertifyError),
    #[error(transparent)]
    Simulate(#[from] crate::simulate::SimulateError),
    #[error("certificate file is not a certificate report")]
    NotACertificate,
    #[error("--runs expects FxH (e.g. 20x10), got `{0}`")]
    BadRuns(String),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser, Debug)]
#[command(
    name = "persidskii",
    version,
    about = "Stability certificates for delay systems with sector-bounded nonlinearities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify absolute exponential stability of a system file
    Certify {
        input: PathBuf,
        /// Witness vector, comma-separated (default: automatic search)
        #[arg(long, value_delimiter = ',')]
        xi: Option<Vec<f64>>,
        /// Decay rate to check (continuous); default: maximal rate
        #[arg(long)]
        alpha: Option<f64>,
        /// Convergence rate to check (discrete); default: maximal rate
        #[arg(long)]
        lambda: Option<f64>,
        /// Right end of the evidence grid (default 10 * h_max)
        #[arg(long)]
        grid_t_max: Option<f64>,
        /// Evidence grid step (default h_max / 100)
        #[arg(long)]
        grid_step: Option<f64>,
        /// Write the JSON report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-row maximal rate profile for a witness
    DecayRate {
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        xi: Option<Vec<f64>>,
        #[arg(long)]
        grid_t_max: Option<f64>,
        #[arg(long)]
        grid_step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate one trace under a sampled admissible nonlinearity (CSV)
    Simulate {
        input: PathBuf,
        /// Simulation horizon (default 10 * h_max)
        #[arg(long)]
        horizon: Option<f64>,
        /// Integrator step before delay adjustment (default h_max / 1000)
        #[arg(long)]
        step: Option<f64>,
        /// Seed for the nonlinearity sample
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo envelope validation of an emitted certificate
    Validate {
        input: PathBuf,
        /// Certificate report produced by `certify`
        #[arg(long)]
        cert: PathBuf,
        /// Cross product size as FxH, nonlinearities x histories
        #[arg(long, default_value = "20x10")]
        runs: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Slope slack of the envelope check
        #[arg(long, default_value_t = 0.05)]
        slack: f64,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in example fixtures and diff against golden values
    ReproduceExamples,
}

/// Parse arguments and execute; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version print on stdout with code 0 by clap convention
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn read_system(path: &Path) -> Result<ParsedSystem, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_system_json(&text)?)
}

fn emit(report: &Report, out: Option<&Path>) -> Result<(), CliError> {
    let json = report.to_json();
    match out {
        Some(path) => {
            fs::write(path, json.as_bytes()).map_err(|source| CliError::Write {
                path: path.to_path_buf(),
                source,
            })?;
        }
        None => println!("{json}"),
    }
    println!("{}", report.summary());
    Ok(())
}

fn continuous_grid(sys: &ContinuousSystem, t_max: Option<f64>, step: Option<f64>) -> Vec<f64> {
    match (t_max, step) {
        (None, None) => sys.default_grid(),
        (t_max, step) => {
            let h = sys.h_max().unwrap_or(1.0);
            uniform_grid(0.0, t_max.unwrap_or(10.0 * h), step.unwrap_or(h / 100.0))
        }
    }
}

fn certify_continuous(
    sys: &ContinuousSystem,
    sector: &SectorBounds,
    xi: Option<Vec<f64>>,
    alpha: Option<f64>,
    grid: &[f64],
) -> Result<(Report, i32), CliError> {
    // Check mode: a rate was supplied, validate it for the witness
    // (automatically searched when absent).
    if let Some(alpha) = alpha {
        let xi = match xi {
            Some(xi) => xi,
            None => match find_certificate_thm1(sys, sector, grid, None)? {
                Outcome::Feasible(cert) => cert.xi,
                Outcome::Infeasible(reason) => {
                    return Ok((Report::infeasible(reason), 1));
                }
            },
        };
        let report = if sys.delays().len() == 1 {
            check_thm1(sys, sector, &xi, alpha, grid)?
        } else {
            check_thm3(sys, sector, &xi, alpha, grid)?
        };
        if report.holds {
            let criterion = if sys.delays().len() > 1 {
                ContinuousCriterion::Thm3
            } else {
                ContinuousCriterion::Thm1
            };
            let norm: f64 = xi.iter().sum();
            let cert = ContinuousCertificate {
                xi: xi.iter().map(|x| x / norm).collect(),
                alpha,
                criterion,
                margin: report.margin,
                worst_t: report.worst_t,
                evidence: report.evidence,
                profile: None,
            };
            return Ok((Report::continuous_certificate(cert), 0));
        }
        return Ok((
            Report::infeasible(Infeasibility::WitnessRejected {
                margin: report.margin,
            }),
            1,
        ));
    }

    // Rate search mode. Constant positive single-delay (or nondelay)
    // systems take the time-invariant path for the strongest labeling.
    let const_a = sys.a().as_constant();
    let const_bs: Option<Vec<ConstMatrix>> =
        sys.delays().iter().map(|d| d.b.as_constant()).collect();
    let outcome = match (&const_a, &const_bs) {
        (Some(a), Some(bs))
            if sys.delays().len() <= 1
                && a.is_metzler()
                && bs.iter().all(|b| b.is_nonnegative()) =>
        {
            let (h, b) = match bs.first() {
                Some(b) => (sys.delays()[0].h, b.clone()),
                None => (1.0, ConstMatrix::zeros(sys.n())),
            };
            check_cor4(a, &b, h, sector, xi.as_deref())?
        }
        _ => find_certificate_thm1(sys, sector, grid, xi.as_deref())?,
    };
    match outcome {
        Outcome::Feasible(cert) => Ok((Report::continuous_certificate(cert), 0)),
        Outcome::Infeasible(reason) => Ok((Report::infeasible(reason), 1)),
    }
}

fn certify_discrete(
    sys: &DiscreteSystem,
    sector: &SectorBounds,
    xi: Option<Vec<f64>>,
    lambda: Option<f64>,
) -> Result<(Report, i32), CliError> {
    let k_grid = sys.default_k_grid();
    if let Some(lambda) = lambda {
        let xi = match xi {
            Some(xi) => xi,
            None => {
                let (a, b_ls, _) = resolve_bounds_discrete(sys, &k_grid)?;
                match find_certificate_cor5(&a, &b_ls, sector, None)? {
                    Outcome::Feasible(cert) => cert.xi,
                    Outcome::Infeasible(reason) => {
                        return Ok((Report::infeasible(reason), 1));
                    }
                }
            }
        };
        let report = if sys.delays().len() == 1 {
            check_thm4(sys, sector, &xi, lambda, &k_grid)?
        } else {
            check_thm5(sys, sector, &xi, lambda, &k_grid)?
        };
        if report.holds {
            let criterion = if sys.delays().len() > 1 {
                DiscreteCriterion::Thm5
            } else {
                DiscreteCriterion::Thm4
            };
            let norm: f64 = xi.iter().sum();
            let cert = DiscreteCertificate {
                xi: xi.iter().map(|x| x / norm).collect(),
                lambda,
                criterion,
                margin: report.margin,
                evidence: report.evidence,
                profile: None,
            };
            return Ok((Report::discrete_certificate(cert), 0));
        }
        return Ok((
            Report::infeasible(Infeasibility::WitnessRejected {
                margin: report.margin,
            }),
            1,
        ));
    }

    let (a, b_ls, evidence) = resolve_bounds_discrete(sys, &k_grid)?;
    match find_certificate_cor5(&a, &b_ls, sector, xi.as_deref())? {
        Outcome::Feasible(mut cert) => {
            cert.evidence = evidence;
            Ok((Report::discrete_certificate(cert), 0))
        }
        Outcome::Infeasible(reason) => Ok((Report::infeasible(reason), 1)),
    }
}

fn execute(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Certify {
            input,
            xi,
            alpha,
            lambda,
            grid_t_max,
            grid_step,
            out,
        } => {
            let (report, code) = match read_system(&input)? {
                ParsedSystem::Continuous { system, sector } => {
                    if lambda.is_some() {
                        return Err(CliError::Usage(
                            "--lambda applies to discrete systems; use --alpha".into(),
                        ));
                    }
                    let grid = continuous_grid(&system, grid_t_max, grid_step);
                    certify_continuous(&system, &sector, xi, alpha, &grid)?
                }
                ParsedSystem::Discrete { system, sector } => {
                    if alpha.is_some() {
                        return Err(CliError::Usage(
                            "--alpha applies to continuous systems; use --lambda".into(),
                        ));
                    }
                    certify_discrete(&system, &sector, xi, lambda)?
                }
            };
            emit(&report, out.as_deref())?;
            Ok(code)
        }

        Command::DecayRate {
            input,
            xi,
            grid_t_max,
            grid_step,
            out,
        } => match read_system(&input)? {
            ParsedSystem::Continuous { system, sector } => {
                let grid = continuous_grid(&system, grid_t_max, grid_step);
                let bounds = continuous::resolve_bounds(&system, &grid)?;
                let xi = match xi {
                    Some(xi) => xi,
                    None => match find_certificate_thm1(&system, &sector, &grid, None)? {
                        Outcome::Feasible(cert) => cert.xi,
                        Outcome::Infeasible(reason) => {
                            emit(&Report::infeasible(reason), out.as_deref())?;
                            return Ok(1);
                        }
                    },
                };
                match continuous::alpha_max_profile(&bounds.a_hat, &bounds.b_bars, &sector, &xi)? {
                    Outcome::Feasible(profile) => {
                        let window = if system.delays().is_empty() {
                            check_cor2(system.a(), &sector, &xi, &grid)?.into_feasible()
                        } else {
                            None
                        };
                        emit(&Report::decay_profile(xi, profile, window), out.as_deref())?;
                        Ok(0)
                    }
                    Outcome::Infeasible(reason) => {
                        emit(&Report::infeasible(reason), out.as_deref())?;
                        Ok(1)
                    }
                }
            }
            ParsedSystem::Discrete { system, sector } => {
                let k_grid = system.default_k_grid();
                let (a, b_ls, _) = resolve_bounds_discrete(&system, &k_grid)?;
                let xi = match xi {
                    Some(xi) => xi,
                    None => match find_certificate_cor5(&a, &b_ls, &sector, None)? {
                        Outcome::Feasible(cert) => cert.xi,
                        Outcome::Infeasible(reason) => {
                            emit(&Report::infeasible(reason), out.as_deref())?;
                            return Ok(1);
                        }
                    },
                };
                match lambda_max_profile(&a, &b_ls, &sector, &xi)? {
                    Outcome::Feasible(profile) => {
                        emit(&Report::lambda_profile(xi, profile), out.as_deref())?;
                        Ok(0)
                    }
                    Outcome::Infeasible(reason) => {
                        emit(&Report::infeasible(reason), out.as_deref())?;
                        Ok(1)
                    }
                }
            }
        },

        Command::Simulate {
            input,
            horizon,
            step,
            seed,
            out,
        } => {
            let csv = match read_system(&input)? {
                ParsedSystem::Continuous { system, sector } => {
                    let h = system.h_max().unwrap_or(1.0);
                    let horizon = horizon.unwrap_or(10.0 * h);
                    let step = step.unwrap_or(h / 1000.0);
                    let f = sample_nonlinearity(&sector, seed);
                    let phi = InitialHistory::constant(vec![1.0; system.n()]);
                    integrate_dde(&system, &f, &phi, horizon, step)?.to_csv()
                }
                ParsedSystem::Discrete { system, sector } => {
                    let h = system.h_max().unwrap_or(1).max(1);
                    let horizon = horizon.unwrap_or(10.0 * h as f64).round() as u64;
                    let f = sample_nonlinearity(&sector, seed);
                    let phi = InitialHistory::constant(vec![1.0; system.n()]);
                    iterate_discrete(&system, &f, &phi, horizon)?.to_csv()
                }
            };
            match out {
                Some(path) => fs::write(&path, csv.as_bytes())
                    .map_err(|source| CliError::Write { path, source })?,
                None => print!("{csv}"),
            }
            Ok(0)
        }

        Command::Validate {
            input,
            cert,
            runs,
            seed,
            slack,
            horizon,
            step,
            out,
        } => {
            let cert_text = fs::read_to_string(&cert).map_err(|source| CliError::Read {
                path: cert.clone(),
                source,
            })?;
            let cert_report: Report =
                serde_json::from_str(&cert_text).map_err(SchemaError::Json)?;
            let (n_f, n_phi) = parse_runs(&runs)?;
            let (report, code) = match (read_system(&input)?, cert_report) {
                (
                    ParsedSystem::Continuous { system, sector },
                    Report::ContinuousCertificate { certificate, .. },
                ) => {
                    let h = system.h_max().unwrap_or(1.0);
                    let horizon = horizon.unwrap_or(10.0 * h);
                    let step = step.unwrap_or(h / 1000.0);
                    let val = monte_carlo_validate_continuous(
                        &system,
                        &sector,
                        certificate.alpha,
                        n_f,
                        n_phi,
                        seed,
                        horizon,
                        step,
                        slack,
                    )?;
                    let code = if val.pass { 0 } else { 1 };
                    (Report::validation(val), code)
                }
                (
                    ParsedSystem::Discrete { system, sector },
                    Report::DiscreteCertificate { certificate, .. },
                ) => {
                    let h = system.h_max().unwrap_or(1).max(1);
                    let horizon = horizon.unwrap_or(50.0_f64.max(10.0 * h as f64)) as u64;
                    let val = monte_carlo_validate_discrete(
                        &system,
                        &sector,
                        certificate.lambda,
                        n_f,
                        n_phi,
                        seed,
                        horizon,
                        slack,
                    )?;
                    let code = if val.pass { 0 } else { 1 };
                    (Report::validation(val), code)
                }
                _ => return Err(CliError::NotACertificate),
            };
            emit(&report, out.as_deref())?;
            Ok(code)
        }

        Command::ReproduceExamples => Ok(reproduce_examples()),
    }
}

fn parse_runs(spec: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = spec.split('x').collect();
    if parts.len() != 2 {
        return Err(CliError::BadRuns(spec.to_string()));
    }
    let f = parts[0]
        .parse()
        .map_err(|_| CliError::BadRuns(spec.to_string()))?;
    let h = parts[1]
        .parse()
        .map_err(|_| CliError::BadRuns(spec.to_string()))?;
    if f == 0 || h == 0 {
        return Err(CliError::BadRuns(spec.to_string()));
    }
    Ok((f, h))
}

fn example1() -> (ContinuousSystem, SectorBounds) {
    let a = crate::matrix::MatrixExpr::parse_rows(&[
        vec!["-4*t-12".into(), "0".into()],
        vec!["t".into(), "-2*t-5".into()],
    ])
    .expect("fixture");
    let b = crate::matrix::MatrixExpr::parse_rows(&[
        vec!["(1/3)*sin(t)".into(), "(1/8)*cos(t)".into()],
        vec!["(1/3)*exp(-t)*cos(t)".into(), "(1/8)*exp(-t)*sin(t)".into()],
    ])
    .expect("fixture");
    let b_bar = ConstMatrix::from_rows(&[vec![1.0 / 3.0, 1.0 / 8.0], vec![1.0 / 3.0, 1.0 / 8.0]])
        .expect("fixture");
    let system = ContinuousSystem::new(
        a,
        vec![crate::system::DelayTerm { h: 1.0, b }],
        Some(crate::system::SystemBounds {
            a_sup: None,
            b_sups: Some(vec![b_bar]),
        }),
    )
    .expect("fixture");
    let sector = SectorBounds::bounded(vec![1.0 / 3.0, 0.5], vec![1.5, 2.0]).expect("fixture");
    (system, sector)
}

fn example2() -> (ConstMatrix, ConstMatrix, SectorBounds) {
    let a = ConstMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).expect("fixture");
    let b1 = ConstMatrix::from_rows(&[vec![0.5, 1.0 / 3.0], vec![0.5, 0.25]]).expect("fixture");
    let sector = SectorBounds::positive_up_to(vec![1.0 / 8.0, 1.0 / 14.0]).expect("fixture");
    (a, b1, sector)
}

fn check_line(name: &str, ok: bool) -> bool {
    println!("{name}: {}", if ok { "PASS" } else { "FAIL" });
    ok
}

/// Built-in fixtures with golden values; one pass/fail line each.
fn reproduce_examples() -> i32 {
    let mut all_pass = true;

    // Continuous fixture: xi = (1,1), alpha = 1 holds on t in [0, 100],
    // tightest at t = 0.
    let (sys, sector) = example1();
    let grid = uniform_grid(0.0, 100.0, 0.01);
    let hold_ok = match check_thm1(&sys, &sector, &[1.0, 1.0], 1.0, &grid) {
        Ok(report) => report.holds && report.worst_t == 0.0,
        Err(e) => {
            eprintln!("example1 check failed to run: {e}");
            false
        }
    };
    all_pass &= check_line(
        "example1 check (alpha=1, xi=(1,1)) holds with worst_t=0",
        hold_ok,
    );

    let e = std::f64::consts::E;
    let golden = [
        (0.0, [-4.0 + e, -2.5 + e / 2.0]),
        (1.0, [-5.0 + e, -3.5 + e / 2.0]),
        (5.0, [-9.0 + e, -7.5 + e / 2.0]),
    ];
    let mut vector_ok = true;
    for (t, want) in golden {
        match continuous::condition_lhs(&sys, &sector, &[1.0, 1.0], 1.0, t, &grid) {
            Ok(lhs) => {
                vector_ok &= (lhs[0] - want[0]).abs() < 1e-12 && (lhs[1] - want[1]).abs() < 1e-12;
            }
            Err(_) => vector_ok = false,
        }
    }
    all_pass &= check_line(
        "example1 condition vector = (-t-4+e, -t-5/2+e/2) (|d| < 1e-12)",
        vector_ok,
    );

    // Discrete fixture: lambda_max for xi = (1,1).
    let (a, b1, dsector) = example2();
    match find_certificate_cor5(&a, &[(1, b1)], &dsector, Some(&[1.0, 1.0])) {
        Ok(Outcome::Feasible(cert)) => {
            let ok = (cert.lambda - 0.5840213813).abs() < 1e-8;
            println!(
                "lambda_max = {:.10} (|d| < 1e-8): {}",
                cert.lambda,
                if ok { "PASS" } else { "FAIL" }
            );
            all_pass &= ok;
            let profile = cert.profile.expect("profile attached");
            all_pass &= check_line(
                "example2 per-row rates (0.4568006607, 0.5840213813), binding row 2",
                (profile.lambda_i[0] - 0.4568006607).abs() < 1e-8 && profile.binding_row == 1,
            );
        }
        Ok(Outcome::Infeasible(reason)) => {
            eprintln!("example2 unexpectedly infeasible: {}", reason.describe());
            all_pass &= check_line("lambda_max = 0.5840213813 (|d| < 1e-8)", false);
        }
        Err(e) => {
            eprintln!("example2 failed to run: {e}");
            all_pass &= check_line("lambda_max = 0.5840213813 (|d| < 1e-8)", false);
        }
    }

    if all_pass {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_spec_parsing() {
        assert_eq!(parse_runs("20x10").unwrap(), (20, 10));
        assert_eq!(parse_runs("1x1").unwrap(), (1, 1));
        assert!(parse_runs("20").is_err());
        assert!(parse_runs("0x5").is_err());
        assert!(parse_runs("ax5").is_err());
    }

    #[test]
    fn reproduce_examples_passes() {
        assert_eq!(reproduce_examples(), 0);
    }
}
