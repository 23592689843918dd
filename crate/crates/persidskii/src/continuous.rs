//! Continuous-time absolute exponential stability criteria.
//!
//! The certified inequality is
//!
//! ```text
//! (D_delta Ahat(t)^T + sum_l e^(alpha h_l) D_beta Bbar_l^T) xi <= -alpha xi,  for all t >= 0
//! ```
//!
//! where `Ahat(t)` is the Metzlerization of `A(t)`, `Bbar_l >= |B_l(t)|`
//! entrywise, `xi >> 0` and `alpha > 0` is the certified decay rate: every
//! solution then obeys `||x(t)|| <= M e^(-alpha t) ||phi||` for every
//! admissible sector nonlinearity. With constant bound matrices the
//! largest certifiable rate for a given witness is found row by row as
//! the root of the monotone function
//!
//! ```text
//! g_i(alpha) = sum_j (ahat_ji delta_i xi_j + sum_l e^(alpha h_l) bbar_l_ji beta_i xi_j) + alpha xi_i,
//! ```
//!
//! and `alpha_max = min_i alpha_i`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{ConstMatrix, MatrixError, MatrixExpr};
use crate::metzler::{
    self, find_hurwitz_witness, hurwitz_witness_margin, spectral_abscissa, strict_threshold,
    SpectralError, WitnessOutcome,
};
use crate::outcome::{Evidence, Infeasibility, Outcome};
use crate::sector::{SectorBounds, SectorKind};
use crate::simulate::GeneralizedNonlinearity;
use crate::system::{ContinuousSystem, SystemError};

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("criterion requires the two-sided sector (delta and beta)")]
    TwoSidedSectorRequired,
    #[error("criterion requires exactly one delay, system has {got}")]
    SingleDelayRequired { got: usize },
    #[error("sector dimension {sector} does not match system dimension {system}")]
    SectorDimension { sector: usize, system: usize },
    #[error("witness vector has {got} components, expected {expected}")]
    WitnessDimension { expected: usize, got: usize },
    #[error("witness vector must be strictly positive")]
    WitnessNotPositive,
    #[error("decay rate must be positive, got {0}")]
    BadRate(f64),
    #[error("time-varying {what} needs user bounds or a nonempty evidence grid")]
    MissingBounds { what: String },
    #[error("matrix A must be Metzler for this criterion")]
    NotMetzler,
    #[error("matrix B must be entrywise nonnegative for this criterion")]
    NotNonnegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContinuousCriterion {
    Thm1,
    Cor2,
    Cor3,
    Cor4,
    Thm3,
}

/// A decay-rate certificate: `xi >> 0` and `alpha > 0` such that the
/// criterion inequality holds on the declared evidence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuousCertificate {
    /// l1-normalized witness.
    pub xi: Vec<f64>,
    /// Certified exponential decay rate.
    pub alpha: f64,
    pub criterion: ContinuousCriterion,
    /// Worst-row, worst-time slack of the inequality (clamped at zero
    /// when the rate sits exactly on a root of `g_i`).
    pub margin: f64,
    /// Time at which the condition is tightest.
    pub worst_t: f64,
    pub evidence: Evidence,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<DecayProfile>,
}

/// Open interval of certifiable rates for the nondelay criterion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateWindow {
    /// Worst weighted column sum of the Metzlerized matrix (negative).
    pub gamma: f64,
    /// Smallest lower sector slope, `min_j delta_j`.
    pub delta0: f64,
    /// Largest witness component, `max_i xi_i`.
    pub d2: f64,
    /// The window is `(0, alpha_sup)` with `alpha_sup = -gamma*delta0/d2`.
    pub alpha_sup: f64,
}

impl RateWindow {
    /// Exported rate strictly inside the open window.
    pub fn default_alpha(&self) -> f64 {
        0.9 * self.alpha_sup
    }
}

/// Per-row maximal decay rates: `alpha_i` solves `g_i(alpha_i) = 0` and
/// the certified rate is the smallest of them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayProfile {
    pub alpha_i: Vec<f64>,
    pub alpha_max: f64,
    pub binding_row: usize,
}

/// Result of checking a criterion at a given witness and rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub holds: bool,
    /// `-max` over rows and checked times of the condition vector;
    /// nonnegative exactly when the condition holds.
    pub margin: f64,
    pub worst_t: f64,
    pub evidence: Evidence,
}

/// Constant bound matrices resolved for a continuous system, together
/// with the epistemic status of how they were obtained.
#[derive(Debug, Clone)]
pub struct ResolvedBounds {
    /// Entrywise upper bound on the Metzlerization of `A(t)`.
    pub a_hat: ConstMatrix,
    /// Per delay `(h_l, Bbar_l)` with `Bbar_l >= |B_l(t)|`.
    pub b_bars: Vec<(f64, ConstMatrix)>,
    pub evidence: Evidence,
}

fn resolve_a_hat(
    sys: &ContinuousSystem,
    grid: &[f64],
) -> Result<(ConstMatrix, Evidence), CertifyError> {
    if let Some(a) = sys.bounds().and_then(|b| b.a_sup.as_ref()) {
        return Ok((a.clone(), Evidence::UserBounds));
    }
    if let Some(c) = sys.a().as_constant() {
        return Ok((c.metzlerized(), Evidence::UserBounds));
    }
    if grid.is_empty() {
        return Err(CertifyError::MissingBounds {
            what: "A(t)".to_string(),
        });
    }
    Ok((sys.a().sup_metzler_on_grid(grid)?, Evidence::GridEvidence))
}

fn resolve_b_bars(
    sys: &ContinuousSystem,
    grid: &[f64],
) -> Result<(Vec<(f64, ConstMatrix)>, Evidence), CertifyError> {
    let user_bs = sys.bounds().and_then(|b| b.b_sups.as_ref());
    let mut evidence = Evidence::UserBounds;
    let mut b_bars = Vec::with_capacity(sys.delays().len());
    for (l, term) in sys.delays().iter().enumerate() {
        let bound = if let Some(bs) = user_bs {
            bs[l].clone()
        } else if let Some(c) = term.b.as_constant() {
            c.entrywise_abs()
        } else {
            if grid.is_empty() {
                return Err(CertifyError::MissingBounds {
                    what: format!("B_{}(t)", l + 1),
                });
            }
            evidence = Evidence::GridEvidence;
            term.b.sup_abs_on_grid(grid)?
        };
        b_bars.push((term.h, bound));
    }
    Ok((b_bars, evidence))
}

/// Resolve constant bounds for every coefficient: user bounds if given,
/// exact values for constant matrices, grid suprema otherwise (which
/// downgrades the evidence to `GridEvidence`).
pub fn resolve_bounds(
    sys: &ContinuousSystem,
    grid: &[f64],
) -> Result<ResolvedBounds, CertifyError> {
    let (a_hat, a_evidence) = resolve_a_hat(sys, grid)?;
    let (b_bars, b_evidence) = resolve_b_bars(sys, grid)?;
    Ok(ResolvedBounds {
        a_hat,
        b_bars,
        evidence: a_evidence.combine(b_evidence),
    })
}

fn validate_xi(xi: &[f64], n: usize) -> Result<(), CertifyError> {
    if xi.len() != n {
        return Err(CertifyError::WitnessDimension {
            expected: n,
            got: xi.len(),
        });
    }
    if xi.iter().any(|&x| x.is_nan() || x <= 0.0 || !x.is_finite()) {
        return Err(CertifyError::WitnessNotPositive);
    }
    Ok(())
}

fn require_two_sided(sector: &SectorBounds, n: usize) -> Result<(&[f64], &[f64]), CertifyError> {
    if sector.kind() != SectorKind::BoundedBelowAndAbove {
        return Err(CertifyError::TwoSidedSectorRequired);
    }
    if sector.n() != n {
        return Err(CertifyError::SectorDimension {
            sector: sector.n(),
            system: n,
        });
    }
    Ok((
        sector.delta().expect("two-sided sector has delta"),
        sector.beta(),
    ))
}

/// The vector `D_delta Ahat(t)^T xi + sum_l e^(alpha h_l) D_beta Bbar_l^T xi`
/// at one time; the criterion compares it against `-alpha xi`.
pub fn condition_lhs(
    sys: &ContinuousSystem,
    sector: &SectorBounds,
    xi: &[f64],
    alpha: f64,
    t: f64,
    grid: &[f64],
) -> Result<Vec<f64>, CertifyError> {
    let n = sys.n();
    let (delta, beta) = require_two_sided(sector, n)?;
    validate_xi(xi, n)?;
    let (b_bars, _) = resolve_b_bars(sys, grid)?;
    let a_hat_t = sys.a().eval_at(t)?.metzlerized();
    let mut lhs = a_hat_t.transpose().matvec(xi);
    for v in lhs.iter_mut().zip(delta) {
        *v.0 *= v.1;
    }
    for (h_l, b_bar) in &b_bars {
        let growth = (alpha * h_l).exp();
        let bt_xi = b_bar.transpose().matvec(xi);
        for i in 0..n {
            lhs[i] += growth * beta[i] * bt_xi[i];
        }
    }
    Ok(lhs)
}

/// Evaluate the vector condition at fixed `(xi, alpha)` over the given
/// `(t, Ahat(t))` evidence points.
#[allow(clippy::too_many_arguments)]
fn check_condition(
    n: usize,
    delta: &[f64],
    beta: &[f64],
    xi: &[f64],
    alpha: f64,
    delay_data: &[(f64, ConstMatrix)],
    a_hat_points: &[(f64, ConstMatrix)],
    evidence: Evidence,
) -> CheckReport {
    let xi_l1: f64 = xi.iter().sum();
    // Delay part is time-invariant: precompute e^(alpha h_l) D_beta Bbar_l^T xi.
    let mut delay_vec = vec![0.0; n];
    let mut delay_norm = 0.0;
    for (h_l, b_bar) in delay_data {
        let growth = (alpha * h_l).exp();
        let bt_xi = b_bar.transpose().matvec(xi);
        for i in 0..n {
            delay_vec[i] += growth * beta[i] * bt_xi[i];
        }
        delay_norm += growth * b_bar.inf_norm() * beta.iter().fold(0.0f64, |a, &b| a.max(b));
    }

    let mut worst = f64::NEG_INFINITY;
    let mut worst_t = a_hat_points.first().map(|p| p.0).unwrap_or(0.0);
    let mut worst_scale = 0.0;
    for (t, a_hat) in a_hat_points {
        let at_xi = a_hat.transpose().matvec(xi);
        let mut max_comp = f64::NEG_INFINITY;
        for i in 0..n {
            let v = delta[i] * at_xi[i] + delay_vec[i] + alpha * xi[i];
            if v > max_comp {
                max_comp = v;
            }
        }
        if max_comp > worst {
            worst = max_comp;
            worst_t = *t;
            worst_scale = a_hat.inf_norm();
        }
    }
    let delta_max = delta.iter().fold(0.0f64, |a, &b| a.max(b));
    let scale = (worst_scale * delta_max + delay_norm + alpha) * xi_l1;
    // The criterion inequality is non-strict; allow a round-off band.
    let holds = worst <= metzler::STRICT_REL * scale;
    CheckReport {
        holds,
        margin: -worst,
        worst_t,
        evidence,
    }
}

fn a_hat_evidence_points(
    sys: &ContinuousSystem,
    grid: &[f64],
) -> Result<(Vec<(f64, ConstMatrix)>, Evidence), CertifyError> {
    if let Some(a) = sys.bounds().and_then(|b| b.a_sup.as_ref()) {
        return Ok((vec![(0.0, a.clone())], Evidence::UserBounds));
    }
    if let Some(c) = sys.a().as_constant() {
        return Ok((vec![(0.0, c.metzlerized())], Evidence::UserBounds));
    }
    if grid.is_empty() {
        return Err(CertifyError::MissingBounds {
            what: "A(t)".to_string(),
        });
    }
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid {
        points.push((t, sys.a().eval_at(t)?.metzlerized()));
    }
    Ok((points, Evidence::GridEvidence))
}

/// Single-delay criterion check at a given witness and rate.
pub fn check_thm1(
    sys: &ContinuousSystem,
    sector: &SectorBounds,
    xi: &[f64],
    alpha: f64,
    grid: &[f64],
) -> Result<CheckReport, CertifyError> {
    if sys.delays().len() != 1 {
        return Err(CertifyError::SingleDelayRequired {
            got: sys.delays().len(),
        });
    }
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(CertifyError::BadRate(alpha));
    }
    let n = sys.n();
    let (delta, beta) = require_two_sided(sector, n)?;
    validate_xi(xi, n)?;
    let (b_bars, b_evidence) = resolve_b_bars(sys, grid)?;
    let (points, a_evidence) = a_hat_evidence_points(sys, grid)?;
    Ok(check_condition(
        n,
        delta,
        beta,
        xi,
        alpha,
        &b_bars,
        &points,
        a_evidence.combine(b_evidence),
    ))
}

/// Multi-delay criterion check; with one delay it reduces exactly to
/// [`check_thm1`].
pub fn check_thm3(
    sys: &ContinuousSystem,
    sector: &SectorBounds,
    xi: &[f64],
    alpha: f64,
    grid: &[f64],
) -> Result<CheckReport, CertifyError> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(CertifyError::BadRate(alpha));
    }
    let n = sys.n();
    let (delta, beta) = require_two_sided(sector, n)?;
    validate_xi(xi, n)?;
    let (b_bars, b_evidence) = resolve_b_bars(sys, grid)?;
    let (points, a_evidence) = a_hat_evidence_points(sys, grid)?;
    Ok(check_condition(
        n,
        delta,
        beta,
        xi,
        alpha,
        &b_bars,
        &points,
        a_evidence.combine(b_evidence),
    ))
}

/// Per-row maximal decay rates for constant bound matrices and a fixed
/// witness. Requires the zero-rate inequality to hold strictly for every
/// row (`g_i(0) < 0`).
pub fn alpha_max_profile(
    a_hat: &ConstMatrix,
    b_bars: &[(f64, ConstMatrix)],
    sector: &SectorBounds,
    xi: &[f64],
) -> Result<Outcome<DecayProfile>, CertifyError> {
    let n = a_hat.n();
    let (delta, beta) = require_two_sided(sector, n)?;
    validate_xi(xi, n)?;

    let at_xi = a_hat.transpose().matvec(xi);
    let p: Vec<f64> = (0..n).map(|i| delta[i] * at_xi[i]).collect();
    // q[l][i] = beta_i * (Bbar_l^T xi)_i, all nonnegative
    let q: Vec<(f64, Vec<f64>)> = b_bars
        .iter()
        .map(|(h, b)| {
            let bt_xi = b.transpose().matvec(xi);
            (*h, (0..n).map(|i| beta[i] * bt_xi[i]).collect())
        })
        .collect();

    let g = |i: usize, alpha: f64| -> f64 {
        let mut v = p[i] + alpha * xi[i];
        for (h, qi) in &q {
            if qi[i] != 0.0 {
                v += (alpha * h).exp() * qi[i];
            }
        }
        v
    };

    let mut alpha_i = Vec::with_capacity(n);
    for i in 0..n {
        let g0 = g(i, 0.0);
        if g0 >= 0.0 {
            return Ok(Outcome::Infeasible(Infeasibility::ProfilePrecondition {
                row: i,
                value: g0,
            }));
        }
        // g_i is continuous and strictly increasing (the alpha*xi_i term),
        // so a sign change is always bracketed by doubling.
        let mut hi = 1.0;
        while g(i, hi) <= 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if g(i, mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        alpha_i.push(0.5 * (lo + hi));
    }

    let mut binding_row = 0;
    for (i, &a) in alpha_i.iter().enumerate() {
        // ties within 1e-12 keep the smaller index
        if a < alpha_i[binding_row] - 1e-12 {
            binding_row = i;
        }
    }
    let alpha_max = alpha_i[binding_row];
    Ok(Outcome::Feasible(DecayProfile {
        alpha_i,
        alpha_max,
        binding_row,
    }))
}

/// Rate window for the nondelay system `dx/dt = A(t) f(x)` with a lower
/// sector slope only (`beta` is ignored).
pub fn check_cor2(
    a: &MatrixExpr,
    sector: &SectorBounds,
    xi: &[f64],
    t_grid: &[f64],
) -> Result<Outcome<RateWindow>, CertifyError> {
    let n = a.n();
    if sector.kind() != SectorKind::BoundedBelowAndAbove {
        return Err(CertifyError::TwoSidedSectorRequired);
    }
    if sector.n() != n {
        return Err(CertifyError::SectorDimension {
            sector: sector.n(),
            system: n,
        });
    }
    validate_xi(xi, n)?;
    if t_grid.is_empty() {
        return Err(CertifyError::MissingBounds {
            what: "A(t)".to_string(),
        });
    }

    let mut gamma = f64::NEG_INFINITY;
    let mut scale = 0.0f64;
    for &t in t_grid {
        let a_hat = a.eval_at(t)?.metzlerized();
        scale = scale.max(a_hat.inf_norm());
        for j in 0..n {
            let col_sum: f64 = (0..n).map(|i| a_hat.get(i, j) * xi[i]).sum();
            if col_sum > gamma {
                gamma = col_sum;
            }
        }
    }
    let xi_l1: f64 = xi.iter().sum();
    if gamma >= -metzler::STRICT_REL * scale * xi_l1 {
        return Ok(Outcome::Infeasible(Infeasibility::SpectralBound {
            value: gamma,
        }));
    }
    let delta0 = sector.delta_min().expect("two-sided sector");
    let d2 = xi.iter().copied().fold(0.0, f64::max);
    Ok(Outcome::Feasible(RateWindow {
        gamma,
        delta0,
        d2,
        alpha_sup: -gamma * delta0 / d2,
    }))
}

/// Witness feasibility for the comparison matrix
/// `(Ahat D_delta + sum_l Bbar_l D_beta)^T`, plus the necessity
/// short-circuit on `Ahat + sum_l Bbar_l`.
fn certify_from_bounds(
    a_hat: &ConstMatrix,
    b_bars: &[(f64, ConstMatrix)],
    sector: &SectorBounds,
    xi_override: Option<&[f64]>,
    criterion: ContinuousCriterion,
    evidence: Evidence,
) -> Result<Outcome<ContinuousCertificate>, CertifyError> {
    let n = a_hat.n();
    let (delta, beta) = require_two_sided(sector, n)?;

    // If A + sum(B_l) is not Hurwitz no witness can exist (and for a
    // positive system absolute exponential stability itself is
    // impossible), so report the stronger reason.
    let mut sum = a_hat.clone();
    for (_, b) in b_bars {
        sum = sum.add(b)?;
    }
    let abscissa = spectral_abscissa(&sum)?;
    if abscissa >= 0.0 {
        return Ok(Outcome::Infeasible(Infeasibility::NecessityViolated {
            abscissa,
        }));
    }

    let mut comparison = a_hat.scale_cols(delta);
    for (_, b) in b_bars {
        comparison = comparison.add(&b.scale_cols(beta))?;
    }
    let comparison = comparison.transpose();

    let xi = match xi_override {
        Some(xi) => {
            validate_xi(xi, n)?;
            let norm: f64 = xi.iter().sum();
            let xi: Vec<f64> = xi.iter().map(|x| x / norm).collect();
            let margin = hurwitz_witness_margin(&comparison, &xi);
            if margin <= -strict_threshold(&comparison, &xi) {
                return Ok(Outcome::Infeasible(Infeasibility::WitnessRejected {
                    margin,
                }));
            }
            xi
        }
        None => match find_hurwitz_witness(&comparison)? {
            WitnessOutcome::Feasible(w) => w.xi,
            WitnessOutcome::Infeasible { spectral_bound } => {
                return Ok(Outcome::Infeasible(Infeasibility::SpectralBound {
                    value: spectral_bound,
                }))
            }
        },
    };

    let profile = match alpha_max_profile(a_hat, b_bars, sector, &xi)? {
        Outcome::Feasible(p) => p,
        Outcome::Infeasible(reason) => return Ok(Outcome::Infeasible(reason)),
    };
    let alpha = profile.alpha_max;

    // Slack at alpha_max: the binding row sits on its root, so this is
    // zero up to the bisection band.
    let points = [(0.0, a_hat.clone())];
    let report = check_condition(n, delta, beta, &xi, alpha, b_bars, &points, evidence);
    debug_assert!(report.margin > -1e-9);

    Ok(Outcome::Feasible(ContinuousCertificate {
        xi,
        alpha,
        criterion,
        margin: report.margin.max(0.0),
        worst_t: 0.0,
        evidence,
        profile: Some(profile),
    }))
}

/// Find a certificate with the maximal decay rate for the resolved
/// constant bounds of a (possibly time-varying) delay system.
pub fn find_certificate_thm1(
    sys: &ContinuousSystem,
    sector: &SectorBounds,
    grid: &[f64],
    xi_override: Option<&[f64]>,
) -> Result<Outcome<ContinuousCertificate>, CertifyError> {
    let bounds = resolve_bounds(sys, grid)?;
    let criterion = if sys.delays().len() > 1 {
        ContinuousCriterion::Thm3
    } else {
        ContinuousCriterion::Cor3
    };
    certify_from_bounds(
        &bounds.a_hat,
        &bounds.b_bars,
        sector,
        xi_override,
        criterion,
        bounds.evidence,
    )
}

/// Time-invariant positive system: `A` Metzler and `B >= 0`. Feasibility
/// is the witness inequality `(A D_delta + B D_beta)^T xi << 0`, and the
/// certificate carries the maximal rate for the found witness.
pub fn check_cor4(
    a: &ConstMatrix,
    b: &ConstMatrix,
    h: f64,
    sector: &SectorBounds,
    xi_override: Option<&[f64]>,
) -> Result<Outcome<ContinuousCertificate>, CertifyError> {
    if !a.is_metzler() {
        return Err(CertifyError::NotMetzler);
    }
    if !b.is_nonnegative() {
        return Err(CertifyError::NotNonnegative);
    }
    let b_bars = vec![(h, b.clone())];
    certify_from_bounds(
        a,
        &b_bars,
        sector,
        xi_override,
        ContinuousCriterion::Cor4,
        Evidence::UserBounds,
    )
}

/// Necessary-side check: `(A + B)^T xi << 0`, i.e. the Metzler matrix
/// `A + B` is Hurwitz witnessed by this particular `xi`. If it fails for
/// every `xi` (spectral abscissa of `A + B` nonnegative) absolute
/// exponential stability is impossible for the positive system.
pub fn check_necessity(a: &ConstMatrix, b: &ConstMatrix, xi: &[f64]) -> bool {
    let sum = match a.add(b) {
        Ok(s) => s,
        Err(_) => return false,
    };
    let t = sum.transpose();
    hurwitz_witness_margin(&t, xi) > -strict_threshold(&t, xi)
}

/// First violation of the dominance sandwich, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceViolation {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct DominanceReport {
    pub holds: bool,
    pub violation: Option<DominanceViolation>,
}

/// Numerically verify, on a sample grid of `(x, t)`, the dominance
/// sandwich `|f_ij(x_j,t)| <= |f_j(x_j)| <= |f_jj(x_j,t)|` (together with
/// the sign condition `x f_ij(x,t) > 0`). When it holds and the reference
/// `f` lies in the two-sided sector, certification reduces verbatim to
/// the single-nonlinearity criterion on the same data.
pub fn check_thm2_applicability(
    family: &GeneralizedNonlinearity,
    x_grid: &[f64],
    t_grid: &[f64],
) -> DominanceReport {
    let n = family.n();
    for &t in t_grid {
        for &x in x_grid {
            if x == 0.0 {
                continue;
            }
            for j in 0..n {
                let ref_abs = family.reference().eval(j, x).abs();
                let diag_abs = family.eval(j, j, x, t).abs();
                if ref_abs > diag_abs + 1e-12 * ref_abs.max(1.0) {
                    return DominanceReport {
                        holds: false,
                        violation: Some(DominanceViolation { i: j, j, x, t }),
                    };
                }
                for i in 0..n {
                    let v = family.eval(i, j, x, t);
                    if x * v <= 0.0 {
                        return DominanceReport {
                            holds: false,
                            violation: Some(DominanceViolation { i, j, x, t }),
                        };
                    }
                    if i != j && v.abs() > ref_abs + 1e-12 * ref_abs.max(1.0) {
                        return DominanceReport {
                            holds: false,
                            violation: Some(DominanceViolation { i, j, x, t }),
                        };
                    }
                }
            }
        }
    }
    DominanceReport {
        holds: true,
        violation: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{ConstMatrix, Entry, MatrixExpr};
    use crate::system::{DelayTerm, SystemBounds};

    fn example1_system() -> ContinuousSystem {
        let a = MatrixExpr::parse_rows(&[
            vec!["-4*t-12".into(), "0".into()],
            vec!["t".into(), "-2*t-5".into()],
        ])
        .unwrap();
        let b = MatrixExpr::parse_rows(&[
            vec!["(1/3)*sin(t)".into(), "(1/8)*cos(t)".into()],
            vec!["(1/3)*exp(-t)*cos(t)".into(), "(1/8)*exp(-t)*sin(t)".into()],
        ])
        .unwrap();
        let b_bar =
            ConstMatrix::from_rows(&[vec![1.0 / 3.0, 1.0 / 8.0], vec![1.0 / 3.0, 1.0 / 8.0]])
                .unwrap();
        ContinuousSystem::new(
            a,
            vec![DelayTerm { h: 1.0, b }],
            Some(SystemBounds {
                a_sup: None,
                b_sups: Some(vec![b_bar]),
            }),
        )
        .unwrap()
    }

    fn example1_sector() -> SectorBounds {
        SectorBounds::bounded(vec![1.0 / 3.0, 0.5], vec![1.5, 2.0]).unwrap()
    }

    fn grid_0_to(t_max: f64) -> Vec<f64> {
        crate::system::uniform_grid(0.0, t_max, 0.01)
    }

    #[test]
    fn example1_holds_at_alpha_one() {
        let sys = example1_system();
        let sector = example1_sector();
        let report = check_thm1(&sys, &sector, &[1.0, 1.0], 1.0, &grid_0_to(100.0)).unwrap();
        assert!(report.holds);
        assert_eq!(report.worst_t, 0.0);
        assert_eq!(report.evidence, Evidence::GridEvidence);
        // worst condition component is -t-5/2+e/2+1 at t=0
        let expected_margin = 2.5 - std::f64::consts::E / 2.0 - 1.0;
        assert!((report.margin - expected_margin).abs() < 1e-12);
    }

    #[test]
    fn example1_condition_vector_matches_closed_form() {
        let sys = example1_system();
        let sector = example1_sector();
        for t in [0.0, 1.0, 5.0] {
            let lhs = condition_lhs(&sys, &sector, &[1.0, 1.0], 1.0, t, &grid_0_to(10.0)).unwrap();
            let e = std::f64::consts::E;
            assert!((lhs[0] - (-t - 4.0 + e)).abs() < 1e-12, "t={t}: {lhs:?}");
            assert!(
                (lhs[1] - (-t - 2.5 + e / 2.0)).abs() < 1e-12,
                "t={t}: {lhs:?}"
            );
        }
    }

    #[test]
    fn example1_fails_at_alpha_three() {
        let sys = example1_system();
        let sector = example1_sector();
        let report = check_thm1(&sys, &sector, &[1.0, 1.0], 3.0, &grid_0_to(10.0)).unwrap();
        assert!(!report.holds);
        assert_eq!(report.worst_t, 0.0);
        // condition component 1 at t=0: -4 + e^3 + 3 > 0
        let expected = -(-4.0 + 3.0f64.exp() + 3.0);
        assert!((report.margin - expected).abs() < 1e-12);
        assert!(report.margin < 0.0);
    }

    #[test]
    fn diagonal_nondelay_check() {
        let a = MatrixExpr::from_const(
            &ConstMatrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap(),
        );
        let zero = MatrixExpr::from_const(&ConstMatrix::zeros(2));
        let sys = ContinuousSystem::new(a, vec![DelayTerm { h: 1.0, b: zero }], None).unwrap();
        let sector = SectorBounds::bounded(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let report = check_thm1(&sys, &sector, &[1.0, 1.0], 0.5, &[0.0]).unwrap();
        assert!(report.holds);
        assert_eq!(report.evidence, Evidence::UserBounds);
        assert!((report.margin - 0.5).abs() < 1e-12);
    }

    #[test]
    fn scalar_alpha_max_matches_bisection_oracle() {
        // dx/dt = -2 f(x) + f(x(t-1)), delta = beta = 1:
        // g(alpha) = -2 + e^alpha + alpha, root of e^alpha + alpha = 2.
        let a_hat = ConstMatrix::scalar(-2.0);
        let b = ConstMatrix::scalar(1.0);
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        let profile = alpha_max_profile(&a_hat, &[(1.0, b)], &sector, &[1.0]).unwrap();
        let profile = profile.feasible().unwrap();

        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.exp() + mid - 2.0 > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((profile.alpha_max - oracle).abs() < 1e-9);
        assert!((profile.alpha_max - 0.4428544010).abs() < 1e-9);
        let g = profile.alpha_max.exp() + profile.alpha_max - 2.0;
        assert!(g.abs() < 1e-10);
    }

    #[test]
    fn alpha_max_linear_when_no_delay_effect() {
        let a_hat = ConstMatrix::from_rows(&[vec![-3.0, 0.0], vec![0.0, -3.0]]).unwrap();
        let b = ConstMatrix::zeros(2);
        let sector = SectorBounds::bounded(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let profile = alpha_max_profile(&a_hat, &[(1.0, b)], &sector, &[1.0, 1.0]).unwrap();
        let profile = profile.feasible().unwrap();
        assert!((profile.alpha_max - 3.0).abs() < 1e-10);
    }

    #[test]
    fn second_delay_with_zero_matrix_changes_nothing() {
        let a_hat = ConstMatrix::scalar(-2.0);
        let b1 = ConstMatrix::scalar(1.0);
        let b2 = ConstMatrix::scalar(0.0);
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        let single = alpha_max_profile(&a_hat, &[(1.0, b1.clone())], &sector, &[1.0]).unwrap();
        let double = alpha_max_profile(&a_hat, &[(1.0, b1), (2.0, b2)], &sector, &[1.0]).unwrap();
        assert_eq!(
            single.feasible().unwrap().alpha_max,
            double.feasible().unwrap().alpha_max
        );
    }

    #[test]
    fn find_certificate_scalar() {
        let a = MatrixExpr::from_const(&ConstMatrix::scalar(-2.0));
        let b = MatrixExpr::from_const(&ConstMatrix::scalar(1.0));
        let sys = ContinuousSystem::new(a, vec![DelayTerm { h: 1.0, b }], None).unwrap();
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        let out = find_certificate_thm1(&sys, &sector, &[], None).unwrap();
        let cert = out.feasible().expect("scalar system is certifiable");
        assert!((cert.alpha - 0.4428544010).abs() < 1e-8);
        assert_eq!(cert.evidence, Evidence::UserBounds);
        assert_eq!(cert.xi, vec![1.0]);
    }

    #[test]
    fn find_certificate_example1_truncated_grid_reports_grid_evidence() {
        // a21(t) = t is unbounded; on a truncated grid the weighted column
        // sums stay negative, so a certificate exists as grid evidence.
        let sys = example1_system();
        let sector = example1_sector();
        let grid = grid_0_to(5.0);
        let out = find_certificate_thm1(&sys, &sector, &grid, None).unwrap();
        let cert = out.feasible().expect("certifiable on truncated grid");
        assert_eq!(cert.evidence, Evidence::GridEvidence);
        assert!(cert.alpha > 0.0);
    }

    #[test]
    fn find_certificate_unstable_comparison() {
        let a = MatrixExpr::from_const(
            &ConstMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
        );
        let b = MatrixExpr::from_const(&ConstMatrix::zeros(2));
        let sys = ContinuousSystem::new(a, vec![DelayTerm { h: 1.0, b }], None).unwrap();
        let sector = SectorBounds::bounded(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let out = find_certificate_thm1(&sys, &sector, &[0.0], None).unwrap();
        match out {
            Outcome::Infeasible(Infeasibility::NecessityViolated { abscissa }) => {
                assert!((abscissa - 1.0).abs() < 1e-9)
            }
            other => panic!("expected necessity violation, got {other:?}"),
        }
    }

    #[test]
    fn cor2_window_from_column_sums() {
        let a = MatrixExpr::from_const(
            &ConstMatrix::from_rows(&[vec![-3.0, 1.0], vec![1.0, -2.0]]).unwrap(),
        );
        let sector = SectorBounds::bounded(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        let out = check_cor2(&a, &sector, &[1.0, 1.0], &[0.0]).unwrap();
        let window = out.feasible().expect("column sums are negative");
        assert!((window.gamma - (-1.0)).abs() < 1e-12);
        assert!((window.alpha_sup - 0.5).abs() < 1e-12);
        assert!(window.default_alpha() < window.alpha_sup);
    }

    #[test]
    fn cor2_scalar_diagonal() {
        let a = MatrixExpr::from_const(&ConstMatrix::scalar(-1.0));
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        let out = check_cor2(&a, &sector, &[1.0], &[0.0]).unwrap();
        let window = out.feasible().unwrap();
        assert!((window.alpha_sup - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cor2_takes_the_supremum_over_the_grid() {
        // column-1 sum is -3 + sin(t) + 1, worst at sin(t) = 1
        let a = MatrixExpr::parse_rows(&[
            vec!["-3+sin(t)".into(), "1".into()],
            vec!["1".into(), "-2".into()],
        ])
        .unwrap();
        let sector = SectorBounds::bounded(vec![1.0, 1.0], vec![2.0, 2.0]).unwrap();
        let grid: Vec<f64> = (0..=2000).map(|k| k as f64 * 0.01).collect();
        let out = check_cor2(&a, &sector, &[1.0, 1.0], &grid).unwrap();
        let window = out.feasible().unwrap();
        assert!((window.gamma - (-1.0)).abs() < 1e-4);
    }

    #[test]
    fn cor2_zero_column_sum_is_infeasible() {
        let a = MatrixExpr::from_const(
            &ConstMatrix::from_rows(&[vec![-1.0, 0.0], vec![1.0, -2.0]]).unwrap(),
        );
        let sector = SectorBounds::bounded(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let out = check_cor2(&a, &sector, &[1.0, 1.0], &[0.0]).unwrap();
        assert!(!out.is_feasible());
    }

    #[test]
    fn cor4_scalar_certificate() {
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        let out = check_cor4(
            &ConstMatrix::scalar(-2.0),
            &ConstMatrix::scalar(1.0),
            1.0,
            &sector,
            None,
        )
        .unwrap();
        let cert = out.feasible().unwrap();
        assert!((cert.alpha - 0.442854).abs() < 1e-6);
        assert_eq!(cert.criterion, ContinuousCriterion::Cor4);
    }

    #[test]
    fn cor4_symmetric_feasible() {
        let a = ConstMatrix::from_rows(&[vec![-2.0, 1.0], vec![1.0, -2.0]]).unwrap();
        let sector = SectorBounds::bounded(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let out = check_cor4(&a, &ConstMatrix::zeros(2), 1.0, &sector, None).unwrap();
        let cert = out.feasible().unwrap();
        assert!((cert.xi[0] - cert.xi[1]).abs() < 1e-10);
    }

    #[test]
    fn cor4_infeasible_when_sum_positive() {
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        let out = check_cor4(
            &ConstMatrix::scalar(-1.0),
            &ConstMatrix::scalar(2.0),
            1.0,
            &sector,
            None,
        )
        .unwrap();
        assert!(matches!(
            out,
            Outcome::Infeasible(Infeasibility::NecessityViolated { .. })
        ));
    }

    #[test]
    fn necessity_examples() {
        assert!(check_necessity(
            &ConstMatrix::scalar(-2.0),
            &ConstMatrix::scalar(1.0),
            &[1.0]
        ));
        assert!(!check_necessity(
            &ConstMatrix::scalar(-1.0),
            &ConstMatrix::scalar(1.0),
            &[1.0]
        ));
        // constant-bound pair from the worked example: column sums
        // (-12 + 2/3, -5 + 1/4) are both negative
        let a0 = ConstMatrix::from_rows(&[vec![-12.0, 0.0], vec![0.0, -5.0]]).unwrap();
        let b_bar =
            ConstMatrix::from_rows(&[vec![1.0 / 3.0, 1.0 / 8.0], vec![1.0 / 3.0, 1.0 / 8.0]])
                .unwrap();
        assert!(check_necessity(&a0, &b_bar, &[1.0, 1.0]));
    }

    #[test]
    fn cor4_certificate_implies_necessity() {
        let a = ConstMatrix::from_rows(&[vec![-3.0, 0.5], vec![0.25, -2.0]]).unwrap();
        let b = ConstMatrix::from_rows(&[vec![0.2, 0.1], vec![0.0, 0.3]]).unwrap();
        let sector = SectorBounds::bounded(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        let out = check_cor4(&a, &b, 1.0, &sector, None).unwrap();
        let cert = out.feasible().expect("feasible fixture");
        assert!(check_necessity(&a, &b, &cert.xi));
    }

    #[test]
    fn dominance_sandwich_applicability() {
        use crate::simulate::{sample_nonlinearity, GeneralizedNonlinearity};
        let sector = SectorBounds::bounded(vec![0.5, 0.5], vec![1.5, 1.5]).unwrap();
        let reference = sample_nonlinearity(&sector, 0);
        let x_grid: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.25).collect();
        let t_grid = [0.0, 0.7, 3.0];

        // f_ij = f_j for all i: equality case holds
        let family = GeneralizedNonlinearity::uniform(reference.clone());
        assert!(check_thm2_applicability(&family, &x_grid, &t_grid).holds);

        // off-diagonal halved, diagonal untouched: still dominated
        let factors = ConstMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let family = GeneralizedNonlinearity::scaled(reference.clone(), &factors);
        assert!(check_thm2_applicability(&family, &x_grid, &t_grid).holds);

        // an off-diagonal twice the reference breaks the sandwich at any x != 0
        let factors = ConstMatrix::from_rows(&[vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap();
        let family = GeneralizedNonlinearity::scaled(reference.clone(), &factors);
        let report = check_thm2_applicability(&family, &x_grid, &t_grid);
        assert!(!report.holds);
        let v = report.violation.unwrap();
        assert_eq!((v.i, v.j), (0, 1));

        // a shrunk diagonal violates the right-hand inequality
        let factors = ConstMatrix::from_rows(&[vec![0.5, 1.0], vec![1.0, 1.0]]).unwrap();
        let family = GeneralizedNonlinearity::scaled(reference, &factors);
        assert!(!check_thm2_applicability(&family, &x_grid, &t_grid).holds);
    }

    #[test]
    fn missing_delta_is_an_error() {
        let sys = example1_system();
        let one_sided = SectorBounds::positive_up_to(vec![1.5, 2.0]).unwrap();
        assert!(matches!(
            check_thm1(&sys, &one_sided, &[1.0, 1.0], 1.0, &[0.0]),
            Err(CertifyError::TwoSidedSectorRequired)
        ));
    }

    #[test]
    fn expression_b_without_bounds_or_grid_is_an_error() {
        let a = MatrixExpr::from_const(&ConstMatrix::scalar(-2.0));
        let b = MatrixExpr::new(
            1,
            vec![Entry::Expr(
                crate::expr::Expression::parse("sin(t)").unwrap(),
            )],
        )
        .unwrap();
        let sys = ContinuousSystem::new(a, vec![DelayTerm { h: 1.0, b }], None).unwrap();
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(
            check_thm1(&sys, &sector, &[1.0], 0.1, &[]),
            Err(CertifyError::MissingBounds { .. })
        ));
    }
}
