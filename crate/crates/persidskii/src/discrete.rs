//! Discrete-time absolute exponential stability criteria.
//!
//! The certified inequality for `x(k+1) = A(k) f(x(k)) + sum_l B_l(k)
//! f(x(k - h_l))` with `f` in the one-sided sector `K(0, beta]` is
//!
//! ```text
//! (|A(k)| + sum_l lambda^(-h_l) |B_l(k)|) D_beta xi <= lambda xi,  for all k,
//! ```
//!
//! with `xi >> 0` and convergence rate `lambda` in `(0,1)`: every
//! solution then obeys `||x(k)|| <= L lambda^k ||phi||`. For constant
//! nonnegative matrices the maximal rate for a given witness solves, row
//! by row,
//!
//! ```text
//! g_i(lambda) = sum_j a_ij beta_j xi_j + sum_l lambda^(-h_l) sum_j b_l_ij beta_j xi_j - lambda xi_i = 0,
//! ```
//!
//! and `lambda_max = max_i lambda_i` (each row forces `lambda >= lambda_i`,
//! because `g_i` decreases on `(0,1)`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{ConstMatrix, MatrixError};
use crate::metzler::{
    self, find_schur_witness, schur_witness_margin, SpectralError, WitnessOutcome,
};
use crate::outcome::{Evidence, Infeasibility, Outcome};
use crate::sector::{SectorBounds, SectorKind};
use crate::system::{DiscreteSystem, SystemError};

/// Rate search space is clamped away from 0 and 1: `lambda^(-h)` blows
/// up as `lambda -> 0`.
pub const LAMBDA_MIN: f64 = 1e-9;
pub const LAMBDA_MAX: f64 = 1.0 - 1e-9;

#[derive(Debug, Error)]
pub enum DiscreteCertifyError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("criterion requires the one-sided sector K(0, beta]")]
    OneSidedSectorRequired,
    #[error("criterion requires exactly one delay, system has {got}")]
    SingleDelayRequired { got: usize },
    #[error("sector dimension {sector} does not match system dimension {system}")]
    SectorDimension { sector: usize, system: usize },
    #[error("witness vector has {got} components, expected {expected}")]
    WitnessDimension { expected: usize, got: usize },
    #[error("witness vector must be strictly positive")]
    WitnessNotPositive,
    #[error("convergence rate must lie in (0,1), got {0}")]
    BadRate(f64),
    #[error("time-varying {what} needs user bounds or a nonempty evidence grid")]
    MissingBounds { what: String },
    #[error("matrix must be entrywise nonnegative for this criterion")]
    NotNonnegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscreteCriterion {
    Thm4,
    Thm5,
    Cor5,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteCertificate {
    /// l1-normalized witness.
    pub xi: Vec<f64>,
    /// Certified convergence rate in (0,1).
    pub lambda: f64,
    pub criterion: DiscreteCriterion,
    /// Worst-row slack at the certified rate (clamped at zero on the
    /// binding row's root).
    pub margin: f64,
    pub evidence: Evidence,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<LambdaProfile>,
}

/// Per-row maximal convergence rates; the certified rate is the largest
/// because every row demands `lambda >= lambda_i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaProfile {
    pub lambda_i: Vec<f64>,
    pub lambda_max: f64,
    pub binding_row: usize,
    /// Set when some row has no dynamics at all (its rate boundary is 0).
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReportK {
    pub holds: bool,
    /// `-max` over rows and checked steps of the condition vector.
    pub margin: f64,
    pub worst_k: u64,
    pub evidence: Evidence,
}

fn require_one_sided(sector: &SectorBounds, n: usize) -> Result<&[f64], DiscreteCertifyError> {
    if sector.kind() != SectorKind::PositiveUpTo {
        return Err(DiscreteCertifyError::OneSidedSectorRequired);
    }
    if sector.n() != n {
        return Err(DiscreteCertifyError::SectorDimension {
            sector: sector.n(),
            system: n,
        });
    }
    Ok(sector.beta())
}

fn validate_xi(xi: &[f64], n: usize) -> Result<(), DiscreteCertifyError> {
    if xi.len() != n {
        return Err(DiscreteCertifyError::WitnessDimension {
            expected: n,
            got: xi.len(),
        });
    }
    if xi.iter().any(|&x| x.is_nan() || x <= 0.0 || !x.is_finite()) {
        return Err(DiscreteCertifyError::WitnessNotPositive);
    }
    Ok(())
}

fn validate_lambda(lambda: f64) -> Result<(), DiscreteCertifyError> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(DiscreteCertifyError::BadRate(lambda));
    }
    Ok(())
}

/// One evidence point: step index, `|A(k)|` and the per-delay `|B_l(k)|`.
type EvidencePoint = (u64, ConstMatrix, Vec<ConstMatrix>);

/// Constant bounds resolved for a discrete system: `|A|` bound, per-delay
/// `(h_l, |B_l|)` bounds, and how they were obtained.
pub type ResolvedDiscreteBounds = (ConstMatrix, Vec<(u32, ConstMatrix)>, Evidence);

/// Evidence points: a single one built from user bounds or constant
/// coefficients, otherwise one per grid step.
fn evidence_points(
    sys: &DiscreteSystem,
    k_grid: &[u64],
) -> Result<(Vec<EvidencePoint>, Evidence), DiscreteCertifyError> {
    let bounds = sys.bounds();
    let a_fixed = if let Some(a) = bounds.and_then(|b| b.a_sup.as_ref()) {
        Some(a.clone())
    } else {
        sys.a().as_constant().map(|c| c.entrywise_abs())
    };
    let user_bs = bounds.and_then(|b| b.b_sups.as_ref());
    let mut bs_fixed: Vec<Option<ConstMatrix>> = Vec::new();
    for (l, term) in sys.delays().iter().enumerate() {
        bs_fixed.push(if let Some(bs) = user_bs {
            Some(bs[l].clone())
        } else {
            term.b.as_constant().map(|c| c.entrywise_abs())
        });
    }

    let all_fixed = a_fixed.is_some() && bs_fixed.iter().all(|b| b.is_some());
    if all_fixed {
        let point = (
            0u64,
            a_fixed.unwrap(),
            bs_fixed.into_iter().map(|b| b.unwrap()).collect(),
        );
        return Ok((vec![point], Evidence::UserBounds));
    }
    if k_grid.is_empty() {
        return Err(DiscreteCertifyError::MissingBounds {
            what: "A(k) or B_l(k)".to_string(),
        });
    }
    let mut points = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let t = k as f64;
        let a_abs = match &a_fixed {
            Some(a) => a.clone(),
            None => sys.a().eval_at(t)?.entrywise_abs(),
        };
        let mut b_abs = Vec::with_capacity(sys.delays().len());
        for (l, term) in sys.delays().iter().enumerate() {
            b_abs.push(match &bs_fixed[l] {
                Some(b) => b.clone(),
                None => term.b.eval_at(t)?.entrywise_abs(),
            });
        }
        points.push((k, a_abs, b_abs));
    }
    Ok((points, Evidence::GridEvidence))
}

fn check_points(
    beta: &[f64],
    xi: &[f64],
    lambda: f64,
    delays: &[u32],
    points: &[EvidencePoint],
    evidence: Evidence,
) -> CheckReportK {
    let n = xi.len();
    let d_beta_xi: Vec<f64> = beta.iter().zip(xi).map(|(b, x)| b * x).collect();
    let xi_l1: f64 = xi.iter().sum();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_k = points.first().map(|p| p.0).unwrap_or(0);
    let mut worst_scale = 0.0;
    for (k, a_abs, b_abs) in points {
        let mut v = a_abs.matvec(&d_beta_xi);
        let mut norm = a_abs.inf_norm();
        for (h, b) in delays.iter().zip(b_abs) {
            let growth = lambda.powf(-f64::from(*h));
            let bv = b.matvec(&d_beta_xi);
            for i in 0..n {
                v[i] += growth * bv[i];
            }
            norm += growth * b.inf_norm();
        }
        let mut max_comp = f64::NEG_INFINITY;
        for i in 0..n {
            let c = v[i] - lambda * xi[i];
            if c > max_comp {
                max_comp = c;
            }
        }
        if max_comp > worst {
            worst = max_comp;
            worst_k = *k;
            worst_scale = norm;
        }
    }
    let beta_max = beta.iter().fold(0.0f64, |a, &b| a.max(b));
    let scale = (worst_scale * beta_max + lambda) * xi_l1;
    // the criterion inequality is non-strict
    let holds = worst <= metzler::STRICT_REL * scale;
    CheckReportK {
        holds,
        margin: -worst,
        worst_k,
        evidence,
    }
}

/// Single-delay criterion check at a given witness and rate.
pub fn check_thm4(
    sys: &DiscreteSystem,
    sector: &SectorBounds,
    xi: &[f64],
    lambda: f64,
    k_grid: &[u64],
) -> Result<CheckReportK, DiscreteCertifyError> {
    if sys.delays().len() != 1 {
        return Err(DiscreteCertifyError::SingleDelayRequired {
            got: sys.delays().len(),
        });
    }
    validate_lambda(lambda)?;
    let beta = require_one_sided(sector, sys.n())?;
    validate_xi(xi, sys.n())?;
    let (points, evidence) = evidence_points(sys, k_grid)?;
    let h = sys.delays()[0].h;
    Ok(check_points(beta, xi, lambda, &[h], &points, evidence))
}

/// Multi-delay criterion check; with one delay it reduces exactly to
/// [`check_thm4`].
pub fn check_thm5(
    sys: &DiscreteSystem,
    sector: &SectorBounds,
    xi: &[f64],
    lambda: f64,
    k_grid: &[u64],
) -> Result<CheckReportK, DiscreteCertifyError> {
    validate_lambda(lambda)?;
    let beta = require_one_sided(sector, sys.n())?;
    validate_xi(xi, sys.n())?;
    let (points, evidence) = evidence_points(sys, k_grid)?;
    let delays: Vec<u32> = sys.delays().iter().map(|d| d.h).collect();
    Ok(check_points(beta, xi, lambda, &delays, &points, evidence))
}

/// Per-row maximal convergence rates for constant nonnegative matrices
/// and a fixed witness. Requires `(A + sum_l B_l) D_beta xi << xi`.
pub fn lambda_max_profile(
    a: &ConstMatrix,
    b_ls: &[(u32, ConstMatrix)],
    sector: &SectorBounds,
    xi: &[f64],
) -> Result<Outcome<LambdaProfile>, DiscreteCertifyError> {
    let n = a.n();
    let beta = require_one_sided(sector, n)?;
    validate_xi(xi, n)?;
    if !a.is_nonnegative() || b_ls.iter().any(|(_, b)| !b.is_nonnegative()) {
        return Err(DiscreteCertifyError::NotNonnegative);
    }

    let d_beta_xi: Vec<f64> = beta.iter().zip(xi).map(|(b, x)| b * x).collect();
    let r = a.matvec(&d_beta_xi);
    let s: Vec<(u32, Vec<f64>)> = b_ls
        .iter()
        .map(|(h, b)| (*h, b.matvec(&d_beta_xi)))
        .collect();

    // precondition: g_i(1) = r_i + sum_l s_l_i - xi_i strictly negative
    let mut sum = a.clone();
    for (_, b) in b_ls {
        sum = sum.add(b)?;
    }
    let m = sum.scale_cols(beta);
    let threshold = metzler::strict_threshold(&m, xi);
    for i in 0..n {
        let g1 = r[i] + s.iter().map(|(_, si)| si[i]).sum::<f64>() - xi[i];
        if g1 >= threshold {
            return Ok(Outcome::Infeasible(Infeasibility::ProfilePrecondition {
                row: i,
                value: g1,
            }));
        }
    }

    let g = |i: usize, lambda: f64| -> f64 {
        let mut v = r[i] - lambda * xi[i];
        for (h, si) in &s {
            if si[i] != 0.0 {
                v += lambda.powf(-f64::from(*h)) * si[i];
            }
        }
        v
    };

    let mut degenerate = false;
    let mut lambda_i = Vec::with_capacity(n);
    for i in 0..n {
        let has_delay_term = s.iter().any(|(_, si)| si[i] > 0.0);
        let root = if !has_delay_term {
            // affine: r_i - lambda xi_i
            let root = r[i] / xi[i];
            if root == 0.0 {
                degenerate = true;
            }
            root
        } else if g(i, LAMBDA_MIN) <= 0.0 {
            // root below the search floor; indistinguishable from zero dynamics
            degenerate = true;
            LAMBDA_MIN
        } else {
            // g_i is continuous, strictly decreasing on (0,1), positive near
            // 0 and negative at 1 by the precondition
            let mut lo = LAMBDA_MIN;
            let mut hi = 1.0;
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                if g(i, mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        lambda_i.push(root);
    }

    let mut binding_row = 0;
    for (i, &l) in lambda_i.iter().enumerate() {
        if l > lambda_i[binding_row] + 1e-12 {
            binding_row = i;
        }
    }
    let lambda_max = lambda_i[binding_row];
    Ok(Outcome::Feasible(LambdaProfile {
        lambda_i,
        lambda_max,
        binding_row,
        degenerate,
    }))
}

/// Resolve constant nonnegative bound matrices for every coefficient:
/// user bounds if given, `|.|` of constant matrices, grid suprema of
/// `|A(k)|`, `|B_l(k)|` otherwise (grid evidence).
pub fn resolve_bounds_discrete(
    sys: &DiscreteSystem,
    k_grid: &[u64],
) -> Result<ResolvedDiscreteBounds, DiscreteCertifyError> {
    let user = sys.bounds();
    let mut evidence = Evidence::UserBounds;
    let t_grid: Vec<f64> = k_grid.iter().map(|&k| k as f64).collect();

    let a = if let Some(a) = user.and_then(|b| b.a_sup.as_ref()) {
        a.clone()
    } else if let Some(c) = sys.a().as_constant() {
        c.entrywise_abs()
    } else {
        if t_grid.is_empty() {
            return Err(DiscreteCertifyError::MissingBounds {
                what: "A(k)".to_string(),
            });
        }
        evidence = Evidence::GridEvidence;
        sys.a().sup_abs_on_grid(&t_grid)?
    };

    let user_bs = user.and_then(|b| b.b_sups.as_ref());
    let mut b_ls = Vec::with_capacity(sys.delays().len());
    for (l, term) in sys.delays().iter().enumerate() {
        let bound = if let Some(bs) = user_bs {
            bs[l].clone()
        } else if let Some(c) = term.b.as_constant() {
            c.entrywise_abs()
        } else {
            if t_grid.is_empty() {
                return Err(DiscreteCertifyError::MissingBounds {
                    what: format!("B_{}(k)", l + 1),
                });
            }
            evidence = Evidence::GridEvidence;
            term.b.sup_abs_on_grid(&t_grid)?
        };
        b_ls.push((term.h, bound));
    }
    Ok((a, b_ls, evidence))
}

/// Certificate for constant nonnegative matrices via Schur witness
/// search on `(A + sum_l B_l) D_beta`, with the maximal rate attached.
/// The certificate also covers every time-varying system dominated
/// entrywise by these matrices.
pub fn find_certificate_cor5(
    a: &ConstMatrix,
    b_ls: &[(u32, ConstMatrix)],
    sector: &SectorBounds,
    xi_override: Option<&[f64]>,
) -> Result<Outcome<DiscreteCertificate>, DiscreteCertifyError> {
    let n = a.n();
    let beta = require_one_sided(sector, n)?;
    if !a.is_nonnegative() || b_ls.iter().any(|(_, b)| !b.is_nonnegative()) {
        return Err(DiscreteCertifyError::NotNonnegative);
    }

    let mut sum = a.clone();
    for (_, b) in b_ls {
        sum = sum.add(b)?;
    }
    let comparison = sum.scale_cols(beta);

    let xi = match xi_override {
        Some(xi) => {
            validate_xi(xi, n)?;
            let norm: f64 = xi.iter().sum();
            let xi: Vec<f64> = xi.iter().map(|x| x / norm).collect();
            let margin = schur_witness_margin(&comparison, &xi);
            if margin <= -metzler::strict_threshold(&comparison, &xi) {
                return Ok(Outcome::Infeasible(Infeasibility::WitnessRejected {
                    margin,
                }));
            }
            xi
        }
        None => match find_schur_witness(&comparison)? {
            WitnessOutcome::Feasible(w) => w.xi,
            WitnessOutcome::Infeasible { spectral_bound } => {
                return Ok(Outcome::Infeasible(Infeasibility::SpectralBound {
                    value: spectral_bound,
                }))
            }
        },
    };

    let profile = match lambda_max_profile(a, b_ls, sector, &xi)? {
        Outcome::Feasible(p) => p,
        Outcome::Infeasible(reason) => return Ok(Outcome::Infeasible(reason)),
    };
    let lambda = profile.lambda_max.max(LAMBDA_MIN);

    // Slack at lambda_max: binding row sits on its root.
    let d_beta_xi: Vec<f64> = beta.iter().zip(&xi).map(|(b, x)| b * x).collect();
    let mut v = a.matvec(&d_beta_xi);
    for (h, b) in b_ls {
        let growth = lambda.powf(-f64::from(*h));
        for (vi, bi) in v.iter_mut().zip(b.matvec(&d_beta_xi)) {
            *vi += growth * bi;
        }
    }
    let worst = v
        .iter()
        .zip(&xi)
        .map(|(vi, x)| vi - lambda * x)
        .fold(f64::NEG_INFINITY, f64::max);
    debug_assert!(worst < 1e-9);

    Ok(Outcome::Feasible(DiscreteCertificate {
        xi,
        lambda,
        criterion: DiscreteCriterion::Cor5,
        margin: (-worst).max(0.0),
        evidence: Evidence::UserBounds,
        profile: Some(profile),
    }))
}
