//! Shared result types for the continuous- and discrete-time certifiers.

use serde::{Deserialize, Serialize};

/// How the "for all t >= 0" (or "for all k") quantifier was discharged.
///
/// `UserBounds` means every time-varying coefficient was dominated by a
/// user-asserted constant matrix (or was constant to begin with), so the
/// certificate covers all times. `GridEvidence` means some coefficient
/// was only checked on a finite grid; the certificate is then evidence,
/// not proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evidence {
    UserBounds,
    GridEvidence,
}

impl Evidence {
    pub fn combine(self, other: Evidence) -> Evidence {
        if self == Evidence::UserBounds && other == Evidence::UserBounds {
            Evidence::UserBounds
        } else {
            Evidence::GridEvidence
        }
    }
}

/// Why a certification attempt produced no certificate. This is a
/// value-level answer, not an error: the inputs were valid, the
/// criterion just does not hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason")]
pub enum Infeasibility {
    /// The Perron quantity of the comparison matrix is on the wrong
    /// side: spectral abscissa >= 0 (continuous) or spectral radius >= 1
    /// (discrete).
    SpectralBound { value: f64 },
    /// The necessary condition fails for every witness: the matrix
    /// `A + sum_l B_l` has spectral abscissa >= 0, so no certificate of
    /// any kind exists for the positive system.
    NecessityViolated { abscissa: f64 },
    /// A user-supplied witness vector does not satisfy the strict
    /// inequality; the worst-row slack is reported.
    WitnessRejected { margin: f64 },
    /// The per-row root-finding precondition fails for this witness:
    /// the stated row of the defining inequality is not strictly
    /// negative at the rate boundary.
    ProfilePrecondition { row: usize, value: f64 },
}

impl Infeasibility {
    pub fn describe(&self) -> String {
        match self {
            Infeasibility::SpectralBound { value } => {
                format!("comparison matrix infeasible (Perron quantity {value:.6})")
            }
            Infeasibility::NecessityViolated { abscissa } => format!(
                "necessary condition violated: spectral abscissa of A + sum(B_l) is {abscissa:.6} >= 0"
            ),
            Infeasibility::WitnessRejected { margin } => {
                format!("supplied witness rejected (worst-row slack {margin:.3e})")
            }
            Infeasibility::ProfilePrecondition { row, value } => {
                format!("row {row} violates the rate-profile precondition (value {value:.3e})")
            }
        }
    }
}

/// Feasible-or-infeasible without conflating infeasibility with errors.
#[derive(Debug, Clone)]
pub enum Outcome<T> {
    Feasible(T),
    Infeasible(Infeasibility),
}

impl<T> Outcome<T> {
    pub fn feasible(&self) -> Option<&T> {
        match self {
            Outcome::Feasible(v) => Some(v),
            Outcome::Infeasible(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Outcome::Feasible(_))
    }

    pub fn into_feasible(self) -> Option<T> {
        match self {
            Outcome::Feasible(v) => Some(v),
            Outcome::Infeasible(_) => None,
        }
    }
}
