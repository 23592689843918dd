//! Exponential-envelope validation of certificates against simulated
//! traces.
//!
//! A finite-horizon simulation can only falsify an envelope claim, never
//! verify it for all time; the reports state that explicitly. A run
//! passes when the fitted envelope constant stays finite and the
//! log-norm slope over the trailing 60% of the horizon is at least as
//! steep as the certified rate (up to the configured slack).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sector::SectorBounds;
use crate::system::{ContinuousSystem, DiscreteSystem};

use super::history::InitialHistory;
use super::integrate::{integrate_dde, iterate_discrete, SimulateError, SimulationTrace};
use super::nonlinearity::sample_nonlinearity;

/// Certified rate being validated: decay exponent `alpha` for continuous
/// traces (`||x|| <= M e^(-alpha t)`) or base `lambda` for discrete ones
/// (`||x|| <= L lambda^k`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RateSpec {
    ContinuousAlpha(f64),
    DiscreteLambda(f64),
}

impl RateSpec {
    /// Slope of the log-norm that the envelope claims.
    fn log_slope(self) -> f64 {
        match self {
            RateSpec::ContinuousAlpha(alpha) => -alpha,
            RateSpec::DiscreteLambda(lambda) => lambda.ln(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub rate: RateSpec,
    /// `sup_t ||x(t)|| e^(alpha t) / ||phi||` (or the lambda analogue);
    /// meaningful only together with `envelope_trend`, which tells
    /// whether this supremum had stopped growing inside the horizon.
    pub m_fit: f64,
    /// Least-squares slope of `log ||x||` over the tail window.
    pub slope_fit: f64,
    /// Least-squares slope of `log(||x|| e^(alpha t))` over the whole
    /// horizon. Positive values mean the envelope constant keeps growing
    /// with the horizon, i.e. no uniform constant fits the trace.
    pub envelope_trend: f64,
    pub pass: bool,
    /// All-zero trace: the bound holds vacuously.
    pub degenerate: bool,
}

fn ls_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        // trace collapsed to zero inside the window
        return f64::NEG_INFINITY;
    }
    let count = points.len() as f64;
    let mean_t = points.iter().map(|(t, _)| t).sum::<f64>() / count;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / count;
    let cov: f64 = points
        .iter()
        .map(|(t, y)| (t - mean_t) * (y - mean_y))
        .sum();
    let var: f64 = points
        .iter()
        .map(|(t, _)| (t - mean_t) * (t - mean_t))
        .sum();
    cov / var
}

/// Fit the envelope of a trace against a certified rate. `slack` is an
/// absolute allowance on both slope comparisons.
///
/// A run passes when (a) the fitted envelope constant is finite and shows
/// no growth trend across the horizon (a growing `||x(t)|| e^(alpha t)`
/// means no uniform constant exists, however large), and (b) the
/// log-norm slope over the trailing 60% of the horizon is at least as
/// steep as the certified rate.
pub fn check_envelope(
    trace: &SimulationTrace,
    rate: RateSpec,
    norm_phi: f64,
    slack: f64,
) -> EnvelopeReport {
    assert!(!trace.is_empty(), "trace must be nonempty");
    assert!(norm_phi > 0.0, "history norm must be positive");

    if trace.norms.iter().all(|&v| v == 0.0) {
        return EnvelopeReport {
            rate,
            m_fit: 0.0,
            slope_fit: f64::NEG_INFINITY,
            envelope_trend: f64::NEG_INFINITY,
            pass: true,
            degenerate: true,
        };
    }

    // Envelope constant in log space to dodge spurious overflow.
    let log_norm_phi = norm_phi.ln();
    let mut log_m = f64::NEG_INFINITY;
    let mut adjusted: Vec<(f64, f64)> = Vec::with_capacity(trace.len());
    for (t, norm) in trace.times.iter().zip(&trace.norms) {
        if *norm == 0.0 {
            continue;
        }
        let growth = match rate {
            RateSpec::ContinuousAlpha(alpha) => alpha * t,
            RateSpec::DiscreteLambda(lambda) => -t * lambda.ln(),
        };
        let log_y = norm.ln() + growth;
        log_m = log_m.max(log_y - log_norm_phi);
        adjusted.push((*t, log_y));
    }
    let m_fit = log_m.exp();
    let envelope_trend = ls_slope(&adjusted);

    // Tail window: last 60% of the horizon, zero norms excluded.
    let t_end = *trace.times.last().unwrap();
    let t_cut = 0.4 * t_end;
    let tail: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&trace.norms)
        .filter(|(t, n)| **t >= t_cut && **n > 0.0)
        .map(|(t, n)| (*t, n.ln()))
        .collect();
    let slope_fit = ls_slope(&tail);

    let pass =
        m_fit.is_finite() && envelope_trend <= slack && slope_fit <= rate.log_slope() + slack;
    EnvelopeReport {
        rate,
        m_fit,
        slope_fit,
        envelope_trend,
        pass,
        degenerate: false,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunFailure {
    pub nonlinearity_seed: u64,
    pub history_index: usize,
    pub m_fit: f64,
    pub slope_fit: f64,
}

/// Aggregate verdict over the sampled cross product. This is a
/// falsification harness: `pass` means no sampled run contradicted the
/// envelope on the simulated horizon, not a proof for all time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub runs: usize,
    pub worst_m_fit: f64,
    /// Least steep fitted slope across runs.
    pub worst_slope: f64,
    pub failures: Vec<RunFailure>,
}

fn derive_history(seed: u64, index: usize, n: usize) -> InitialHistory {
    let mixed = seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index as u64 + 1));
    match index % 3 {
        0 => {
            let mut rng = ChaCha8Rng::seed_from_u64(mixed);
            loop {
                let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if values.iter().any(|v| v.abs() >= 0.1) {
                    return InitialHistory::constant(values);
                }
            }
        }
        1 => {
            let mut rng = ChaCha8Rng::seed_from_u64(mixed);
            let amplitude: Vec<f64> = (0..n)
                .map(|_| {
                    let a: f64 = rng.gen_range(0.2..1.0);
                    if rng.gen_bool(0.5) {
                        a
                    } else {
                        -a
                    }
                })
                .collect();
            let frequency = rng.gen_range(0.5..3.0);
            InitialHistory::sinusoid(amplitude, frequency)
        }
        _ => InitialHistory::random_piecewise_linear(mixed, 5, n),
    }
}

fn aggregate(reports: Vec<(u64, usize, EnvelopeReport)>) -> ValidationReport {
    let mut pass = true;
    let mut worst_m_fit = 0.0f64;
    let mut worst_slope = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    let runs = reports.len();
    for (seed, hist, rep) in reports {
        worst_m_fit = worst_m_fit.max(rep.m_fit);
        if !rep.degenerate {
            worst_slope = worst_slope.max(rep.slope_fit);
        }
        if !rep.pass {
            pass = false;
            failures.push(RunFailure {
                nonlinearity_seed: seed,
                history_index: hist,
                m_fit: rep.m_fit,
                slope_fit: rep.slope_fit,
            });
        }
    }
    ValidationReport {
        pass,
        runs,
        worst_m_fit,
        worst_slope,
        failures,
    }
}

/// Cross product of sampled nonlinearities and histories for a
/// continuous system; every run must satisfy the envelope at rate
/// `alpha` for the aggregate to pass.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_validate_continuous(
    sys: &ContinuousSystem,
    sector: &SectorBounds,
    alpha: f64,
    n_nonlinearities: usize,
    n_histories: usize,
    seed: u64,
    horizon: f64,
    step: f64,
    slack: f64,
) -> Result<ValidationReport, SimulateError> {
    let h_max = sys.h_max().unwrap_or(0.0);
    let mut reports = Vec::with_capacity(n_nonlinearities * n_histories);
    for i in 0..n_nonlinearities {
        let f = sample_nonlinearity(sector, seed.wrapping_add(i as u64));
        for j in 0..n_histories {
            let phi = derive_history(seed, j, sys.n());
            let norm_phi = phi.sup_norm(h_max);
            if norm_phi == 0.0 {
                return Err(SimulateError::ZeroHistory);
            }
            let trace = integrate_dde(sys, &f, &phi, horizon, step)?;
            let report = check_envelope(&trace, RateSpec::ContinuousAlpha(alpha), norm_phi, slack);
            reports.push((f.seed(), j, report));
        }
    }
    Ok(aggregate(reports))
}

/// Discrete counterpart of [`monte_carlo_validate_continuous`].
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_validate_discrete(
    sys: &DiscreteSystem,
    sector: &SectorBounds,
    lambda: f64,
    n_nonlinearities: usize,
    n_histories: usize,
    seed: u64,
    horizon: u64,
    slack: f64,
) -> Result<ValidationReport, SimulateError> {
    let h_max = sys.h_max().unwrap_or(0);
    let mut reports = Vec::with_capacity(n_nonlinearities * n_histories);
    for i in 0..n_nonlinearities {
        let f = sample_nonlinearity(sector, seed.wrapping_add(i as u64));
        for j in 0..n_histories {
            let phi = derive_history(seed, j, sys.n());
            let norm_phi = phi.max_norm_discrete(h_max);
            if norm_phi == 0.0 {
                return Err(SimulateError::ZeroHistory);
            }
            let trace = iterate_discrete(sys, &f, &phi, horizon)?;
            let report = check_envelope(&trace, RateSpec::DiscreteLambda(lambda), norm_phi, slack);
            reports.push((f.seed(), j, report));
        }
    }
    Ok(aggregate(reports))
}
