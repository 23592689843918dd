//! Absolute exponential stability certificates for Persidskii-type delay
//! systems with sector-bounded diagonal nonlinearities, in continuous and
//! discrete time, plus a simulation harness that cross-validates every
//! certificate against sampled admissible nonlinearities.
//!
//! A certificate is a strictly positive witness vector together with a
//! decay rate; feasibility reduces to Perron-root sign tests on Metzler
//! or nonnegative comparison matrices, and the maximal certifiable rate
//! for a witness is found row by row as the root of a monotone scalar
//! function. The `examples/` directory has one runnable example per
//! capability; the `persidskii` binary exposes the same functionality
//! over system description files in JSON.

pub mod cli;
pub mod continuous;
pub mod discrete;
pub mod expr;
pub mod matrix;
pub mod metzler;
pub mod outcome;
pub mod report;
pub mod schema;
pub mod sector;
pub mod simulate;
pub mod system;

pub use continuous::{
    alpha_max_profile, check_cor2, check_cor4, check_necessity, check_thm1,
    check_thm2_applicability, check_thm3, find_certificate_thm1, CertifyError, CheckReport,
    ContinuousCertificate, ContinuousCriterion, DecayProfile, RateWindow,
};
pub use discrete::{
    check_thm4, check_thm5, find_certificate_cor5, lambda_max_profile, DiscreteCertificate,
    DiscreteCertifyError, DiscreteCriterion, LambdaProfile,
};
pub use expr::Expression;
pub use matrix::{entrywise_abs, metzlerize, ConstMatrix, MatrixExpr};
pub use metzler::{
    find_hurwitz_witness, find_schur_witness, spectral_abscissa, spectral_radius, WitnessOutcome,
    WitnessResult,
};
pub use outcome::{Evidence, Infeasibility, Outcome};
pub use sector::{SectorBounds, SectorKind};
pub use simulate::{
    check_envelope, integrate_dde, iterate_discrete, monte_carlo_validate_continuous,
    monte_carlo_validate_discrete, sample_nonlinearity, EnvelopeReport, GeneralizedNonlinearity,
    InitialHistory, NonlinearitySample, RateSpec, SimulationTrace, ValidationReport,
};
pub use system::{ContinuousSystem, DiscreteSystem, SystemBounds};

/// Version string embedded in every emitted report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
