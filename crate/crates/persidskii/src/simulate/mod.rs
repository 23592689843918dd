//! Empirical cross-validation of stability certificates: sample
//! admissible sector nonlinearities, integrate the delay ODE (or iterate
//! the difference system), and check the exponential envelope of the
//! certificate against the traces.

mod envelope;
mod history;
mod integrate;
mod nonlinearity;

pub use envelope::{
    check_envelope, monte_carlo_validate_continuous, monte_carlo_validate_discrete, EnvelopeReport,
    RateSpec, RunFailure, ValidationReport,
};
pub use history::{HistoryKind, InitialHistory};
pub use integrate::{integrate_dde, iterate_discrete, SimulateError, SimulationTrace};
pub use nonlinearity::{sample_nonlinearity, MembershipViolation, NonlinearitySample, ShapeKind};

use std::sync::Arc;

use crate::matrix::ConstMatrix;

pub type TimeVaryingScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A family `f_ij(x_j, t)` of time-varying nonlinearities around a
/// diagonal reference sample `f_j`, as needed for the dominance-sandwich
/// applicability check of the generalized criterion.
#[derive(Clone)]
pub struct GeneralizedNonlinearity {
    n: usize,
    reference: NonlinearitySample,
    entries: Vec<TimeVaryingScalarFn>,
}

impl GeneralizedNonlinearity {
    /// `f_ij = f_j` for every `i`.
    pub fn uniform(reference: NonlinearitySample) -> GeneralizedNonlinearity {
        let n = reference.n();
        let mut entries: Vec<TimeVaryingScalarFn> = Vec::with_capacity(n * n);
        for _i in 0..n {
            for j in 0..n {
                let r = reference.clone();
                entries.push(Arc::new(move |x, _t| r.eval(j, x)));
            }
        }
        GeneralizedNonlinearity {
            n,
            reference,
            entries,
        }
    }

    /// `f_ij(x, t) = c_ij * f_j(x)` with constant factors.
    pub fn scaled(reference: NonlinearitySample, factors: &ConstMatrix) -> GeneralizedNonlinearity {
        let n = reference.n();
        assert_eq!(factors.n(), n);
        let mut entries: Vec<TimeVaryingScalarFn> = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let r = reference.clone();
                let c = factors.get(i, j);
                entries.push(Arc::new(move |x, _t| c * r.eval(j, x)));
            }
        }
        GeneralizedNonlinearity {
            n,
            reference,
            entries,
        }
    }

    pub fn with_entries(
        reference: NonlinearitySample,
        entries: Vec<TimeVaryingScalarFn>,
    ) -> GeneralizedNonlinearity {
        let n = reference.n();
        assert_eq!(entries.len(), n * n);
        GeneralizedNonlinearity {
            n,
            reference,
            entries,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reference(&self) -> &NonlinearitySample {
        &self.reference
    }

    pub fn eval(&self, i: usize, j: usize, x: f64, t: f64) -> f64 {
        (self.entries[i * self.n + j])(x, t)
    }
}

impl std::fmt::Debug for GeneralizedNonlinearity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeneralizedNonlinearity")
            .field("n", &self.n)
            .field("reference", &self.reference)
            .finish()
    }
}
