//! System descriptions: continuous-time delay systems
//! `dx/dt = A(t) f(x(t)) + sum_l B_l(t) f(x(t - h_l))` and their
//! discrete-time counterparts `x(k+1) = A(k) f(x(k)) + sum_l B_l(k)
//! f(x(k - h_l))`.
//!
//! Time-varying coefficients can only be certified through user-asserted
//! constant bound matrices or through grid evidence; the `bounds` field
//! and the evidence mode returned by the certifiers make that trust
//! boundary explicit.

use thiserror::Error;

use crate::matrix::{ConstMatrix, MatrixError, MatrixExpr};

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("delay list must be strictly increasing and positive (index {index})")]
    BadDelays { index: usize },
    #[error("coefficient matrix dimension {got} does not match n={n}")]
    DimensionMismatch { n: usize, got: usize },
    #[error("bound matrix for A must be Metzler (off-diagonal >= 0)")]
    BoundNotMetzler,
    #[error("bound matrix for delay term {index} must be entrywise nonnegative")]
    BoundNegative { index: usize },
    #[error("bounds list has {got} delay matrices, expected {expected}")]
    BoundCount { expected: usize, got: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// User-asserted constant suprema for time-varying coefficients.
///
/// For a continuous system `a_sup` bounds the Metzlerized matrix
/// entrywise (so it must itself be Metzler); for a discrete system it
/// bounds `|A(k)|` (so it must be nonnegative). `b_sups[l]` always
/// bounds `|B_l|` and must be nonnegative.
#[derive(Debug, Clone, Default)]
pub struct SystemBounds {
    pub a_sup: Option<ConstMatrix>,
    pub b_sups: Option<Vec<ConstMatrix>>,
}

#[derive(Debug, Clone)]
pub struct DelayTerm {
    pub h: f64,
    pub b: MatrixExpr,
}

#[derive(Debug, Clone)]
pub struct DiscreteDelayTerm {
    pub h: u32,
    pub b: MatrixExpr,
}

#[derive(Debug, Clone)]
pub struct ContinuousSystem {
    n: usize,
    a: MatrixExpr,
    delays: Vec<DelayTerm>,
    bounds: Option<SystemBounds>,
}

impl ContinuousSystem {
    pub fn new(
        a: MatrixExpr,
        delays: Vec<DelayTerm>,
        bounds: Option<SystemBounds>,
    ) -> Result<ContinuousSystem, SystemError> {
        let n = a.n();
        let mut prev = 0.0;
        for (index, term) in delays.iter().enumerate() {
            if !(term.h > prev && term.h.is_finite()) {
                return Err(SystemError::BadDelays { index });
            }
            prev = term.h;
            if term.b.n() != n {
                return Err(SystemError::DimensionMismatch { n, got: term.b.n() });
            }
        }
        if let Some(b) = &bounds {
            validate_bounds(b, n, delays.len(), true)?;
        }
        Ok(ContinuousSystem {
            n,
            a,
            delays,
            bounds,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &MatrixExpr {
        &self.a
    }

    pub fn delays(&self) -> &[DelayTerm] {
        &self.delays
    }

    pub fn bounds(&self) -> Option<&SystemBounds> {
        self.bounds.as_ref()
    }

    pub fn h_max(&self) -> Option<f64> {
        self.delays.last().map(|d| d.h)
    }

    pub fn h_min(&self) -> Option<f64> {
        self.delays.first().map(|d| d.h)
    }

    pub fn is_constant(&self) -> bool {
        self.a.is_constant() && self.delays.iter().all(|d| d.b.is_constant())
    }

    /// Default certification grid: `t in [0, 10*h_max]` with step
    /// `h_max/100`; for nondelay systems `[0, 10]` with step `0.1`.
    pub fn default_grid(&self) -> Vec<f64> {
        let h = self.h_max().unwrap_or(1.0);
        uniform_grid(0.0, 10.0 * h, h / 100.0)
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    n: usize,
    a: MatrixExpr,
    delays: Vec<DiscreteDelayTerm>,
    bounds: Option<SystemBounds>,
}

impl DiscreteSystem {
    pub fn new(
        a: MatrixExpr,
        delays: Vec<DiscreteDelayTerm>,
        bounds: Option<SystemBounds>,
    ) -> Result<DiscreteSystem, SystemError> {
        let n = a.n();
        let mut prev = 0u32;
        for (index, term) in delays.iter().enumerate() {
            // prev starts at 0, so this also enforces h >= 1
            if term.h <= prev {
                return Err(SystemError::BadDelays { index });
            }
            prev = term.h;
            if term.b.n() != n {
                return Err(SystemError::DimensionMismatch { n, got: term.b.n() });
            }
        }
        if let Some(b) = &bounds {
            validate_bounds(b, n, delays.len(), false)?;
        }
        Ok(DiscreteSystem {
            n,
            a,
            delays,
            bounds,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &MatrixExpr {
        &self.a
    }

    pub fn delays(&self) -> &[DiscreteDelayTerm] {
        &self.delays
    }

    pub fn bounds(&self) -> Option<&SystemBounds> {
        self.bounds.as_ref()
    }

    pub fn h_max(&self) -> Option<u32> {
        self.delays.last().map(|d| d.h)
    }

    pub fn is_constant(&self) -> bool {
        self.a.is_constant() && self.delays.iter().all(|d| d.b.is_constant())
    }

    /// Default evidence set `k in {0, 1, ..., 100*max(h,1)}`.
    pub fn default_k_grid(&self) -> Vec<u64> {
        let h = self.h_max().unwrap_or(1).max(1) as u64;
        (0..=100 * h).collect()
    }
}

fn validate_bounds(
    bounds: &SystemBounds,
    n: usize,
    n_delays: usize,
    continuous: bool,
) -> Result<(), SystemError> {
    if let Some(a) = &bounds.a_sup {
        if a.n() != n {
            return Err(SystemError::DimensionMismatch { n, got: a.n() });
        }
        if continuous {
            if !a.is_metzler() {
                return Err(SystemError::BoundNotMetzler);
            }
        } else if !a.is_nonnegative() {
            return Err(SystemError::BoundNegative { index: usize::MAX });
        }
    }
    if let Some(bs) = &bounds.b_sups {
        if bs.len() != n_delays {
            return Err(SystemError::BoundCount {
                expected: n_delays,
                got: bs.len(),
            });
        }
        for (index, b) in bs.iter().enumerate() {
            if b.n() != n {
                return Err(SystemError::DimensionMismatch { n, got: b.n() });
            }
            if !b.is_nonnegative() {
                return Err(SystemError::BoundNegative { index });
            }
        }
    }
    Ok(())
}

/// Inclusive uniform grid from `start` to `end` with the given step; the
/// end point is always included.
pub fn uniform_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && end >= start);
    let count = ((end - start) / step).round() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|k| start + k as f64 * step).collect();
    if let Some(last) = grid.last_mut() {
        if (*last - end).abs() < step * 1e-9 {
            *last = end;
        } else if *last < end {
            grid.push(end);
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::MatrixExpr;

    fn expr_a() -> MatrixExpr {
        MatrixExpr::parse_rows(&[
            vec!["-4*t-12".into(), "0".into()],
            vec!["t".into(), "-2*t-5".into()],
        ])
        .unwrap()
    }

    fn const_b() -> MatrixExpr {
        MatrixExpr::from_const(
            &ConstMatrix::from_rows(&[vec![1.0 / 3.0, 1.0 / 8.0], vec![1.0 / 3.0, 1.0 / 8.0]])
                .unwrap(),
        )
    }

    #[test]
    fn delays_must_increase() {
        let sys = ContinuousSystem::new(
            expr_a(),
            vec![
                DelayTerm {
                    h: 1.0,
                    b: const_b(),
                },
                DelayTerm {
                    h: 0.5,
                    b: const_b(),
                },
            ],
            None,
        );
        assert!(sys.is_err());
        let sys = ContinuousSystem::new(
            expr_a(),
            vec![
                DelayTerm {
                    h: 0.5,
                    b: const_b(),
                },
                DelayTerm {
                    h: 1.5,
                    b: const_b(),
                },
            ],
            None,
        );
        assert_eq!(sys.unwrap().h_max(), Some(1.5));
    }

    #[test]
    fn continuous_bound_must_be_metzler() {
        let bad = SystemBounds {
            a_sup: Some(ConstMatrix::from_rows(&[vec![-1.0, -0.5], vec![0.0, -1.0]]).unwrap()),
            b_sups: None,
        };
        assert!(ContinuousSystem::new(
            expr_a(),
            vec![DelayTerm {
                h: 1.0,
                b: const_b()
            }],
            Some(bad)
        )
        .is_err());
    }

    #[test]
    fn delay_bound_must_be_nonnegative() {
        let bad = SystemBounds {
            a_sup: None,
            b_sups: Some(vec![ConstMatrix::from_rows(&[
                vec![-0.1, 0.0],
                vec![0.0, 0.0],
            ])
            .unwrap()]),
        };
        assert!(ContinuousSystem::new(
            expr_a(),
            vec![DelayTerm {
                h: 1.0,
                b: const_b()
            }],
            Some(bad)
        )
        .is_err());
    }

    #[test]
    fn discrete_delays_are_positive_integers() {
        let a = MatrixExpr::from_const(&ConstMatrix::scalar(0.5));
        let b = MatrixExpr::from_const(&ConstMatrix::scalar(0.25));
        assert!(DiscreteSystem::new(
            a.clone(),
            vec![DiscreteDelayTerm { h: 0, b: b.clone() }],
            None
        )
        .is_err());
        let sys = DiscreteSystem::new(a, vec![DiscreteDelayTerm { h: 2, b }], None).unwrap();
        assert_eq!(sys.h_max(), Some(2));
    }

    #[test]
    fn default_grid_covers_ten_delay_horizons() {
        let sys = ContinuousSystem::new(
            expr_a(),
            vec![DelayTerm {
                h: 1.0,
                b: const_b(),
            }],
            None,
        )
        .unwrap();
        let grid = sys.default_grid();
        assert_eq!(grid.first(), Some(&0.0));
        assert_eq!(grid.last(), Some(&10.0));
        assert_eq!(grid.len(), 1001);
    }

    #[test]
    fn uniform_grid_includes_endpoint() {
        let g = uniform_grid(0.0, 1.0, 0.3);
        assert_eq!(g.last(), Some(&1.0));
        let g = uniform_grid(0.0, 1.0, 0.25);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
