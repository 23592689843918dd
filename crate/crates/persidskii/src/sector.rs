//! Sector bounds for the admissible diagonal nonlinearity class.
//!
//! Two kinds are supported: the two-sided sector (continuous time), where
//! `delta_i x^2 <= x f_i(x) <= beta_i x^2` with `0 < delta_i <= beta_i`,
//! and the one-sided sector (discrete time), where `0 < x f_i(x) <=
//! beta_i x^2`. The diagonal matrices `D_delta` and `D_beta` are derived
//! on demand.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SectorError {
    #[error("sector vectors are empty")]
    Empty,
    #[error("delta and beta have different lengths ({delta} vs {beta})")]
    LengthMismatch { delta: usize, beta: usize },
    #[error("component {index}: require 0 < delta <= beta, got delta={delta}, beta={beta}")]
    BadBounds { index: usize, delta: f64, beta: f64 },
    #[error("component {index}: require beta > 0, got {beta}")]
    BadBeta { index: usize, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorKind {
    /// Two-sided: `delta_i x^2 <= x f_i(x) <= beta_i x^2`.
    BoundedBelowAndAbove,
    /// One-sided: `0 < x f_i(x) <= beta_i x^2`.
    PositiveUpTo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorBounds {
    kind: SectorKind,
    delta: Option<Vec<f64>>,
    beta: Vec<f64>,
}

impl SectorBounds {
    /// Two-sided sector with `0 < delta_i <= beta_i`.
    pub fn bounded(delta: Vec<f64>, beta: Vec<f64>) -> Result<SectorBounds, SectorError> {
        if delta.is_empty() {
            return Err(SectorError::Empty);
        }
        if delta.len() != beta.len() {
            return Err(SectorError::LengthMismatch {
                delta: delta.len(),
                beta: beta.len(),
            });
        }
        for (i, (&d, &b)) in delta.iter().zip(&beta).enumerate() {
            if !(d > 0.0 && d <= b && b.is_finite()) {
                return Err(SectorError::BadBounds {
                    index: i,
                    delta: d,
                    beta: b,
                });
            }
        }
        Ok(SectorBounds {
            kind: SectorKind::BoundedBelowAndAbove,
            delta: Some(delta),
            beta,
        })
    }

    /// One-sided sector with `beta_i > 0`; there is no lower slope.
    pub fn positive_up_to(beta: Vec<f64>) -> Result<SectorBounds, SectorError> {
        if beta.is_empty() {
            return Err(SectorError::Empty);
        }
        for (i, &b) in beta.iter().enumerate() {
            if !(b > 0.0 && b.is_finite()) {
                return Err(SectorError::BadBeta { index: i, beta: b });
            }
        }
        Ok(SectorBounds {
            kind: SectorKind::PositiveUpTo,
            delta: None,
            beta,
        })
    }

    pub fn kind(&self) -> SectorKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn delta(&self) -> Option<&[f64]> {
        self.delta.as_deref()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Diagonal of `D_delta`; only defined for the two-sided kind.
    pub fn d_delta(&self) -> Option<&[f64]> {
        self.delta()
    }

    /// Diagonal of `D_beta`.
    pub fn d_beta(&self) -> &[f64] {
        &self.beta
    }

    /// Smallest lower slope, `min_j delta_j`.
    pub fn delta_min(&self) -> Option<f64> {
        self.delta
            .as_ref()
            .map(|d| d.iter().copied().fold(f64::INFINITY, f64::min))
    }
}
