//! Positive-systems kernel: Perron roots of Metzler and nonnegative
//! matrices and constructive search for strictly positive witness
//! vectors.
//!
//! A Metzler matrix `M` is Hurwitz stable exactly when some `xi >> 0`
//! satisfies `M xi << 0`, and a nonnegative matrix is Schur stable
//! exactly when some `xi >> 0` satisfies `M xi << xi`. Both facts reduce
//! to the sign of a Perron root, which we compute by power iteration on
//! a diagonally shifted matrix (the shift moves all eigenvalues equally,
//! so the value is exact, and it breaks the cyclic oscillation that
//! plain power iteration suffers on imprimitive matrices). Reducible
//! matrices can have Perron vectors with zero components; a rank-one
//! perturbation `M + eps * ones` with `eps` decreasing geometrically
//! then yields a strictly positive vector whose defect is validated by
//! direct multiplication.
//!
//! Conventions fixed here, used by every certifier:
//! - all checkers act on the matrix from the left (`M xi`), callers that
//!   need a transpose condition transpose before calling;
//! - strict inequality `v << 0` means every component of `v` is at most
//!   `-1e-10 * ||M||_inf * ||xi||_1`;
//! - returned witnesses are normalized to `||xi||_1 = 1`.

use thiserror::Error;

use crate::matrix::ConstMatrix;

/// Relative band that gives strict vector inequalities a numeric meaning.
pub const STRICT_REL: f64 = 1e-10;

/// Every witness component must clear this floor after l1 normalization.
pub const MIN_COMPONENT: f64 = 1e-12;

const ITER_TOL: f64 = 1e-13;
const ITER_CAP: usize = 100_000;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix is not Metzler (negative off-diagonal entry)")]
    NotMetzler,
    #[error("matrix has a negative entry")]
    NotNonnegative,
    #[error(
        "power iteration did not converge within {cap} iterations \
         (last residual {residual:.3e}, perturbations tried: {perturbations:?})"
    )]
    NoConvergence {
        cap: usize,
        residual: f64,
        perturbations: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessMethod {
    PerronEigenvector,
    PerturbedPerron,
}

/// A validated strictly positive witness vector.
#[derive(Debug, Clone)]
pub struct WitnessResult {
    /// l1-normalized, every component strictly positive.
    pub xi: Vec<f64>,
    /// Worst-row slack of the defining inequality, from direct
    /// multiplication with the unperturbed matrix.
    pub margin: f64,
    pub iterations: usize,
    pub method: WitnessMethod,
}

/// Witness search result: a feasible witness or the Perron quantity that
/// proves infeasibility. Infeasible is a value, not an error.
#[derive(Debug, Clone)]
pub enum WitnessOutcome {
    Feasible(WitnessResult),
    Infeasible {
        /// Spectral abscissa (Hurwitz search) or spectral radius (Schur
        /// search) showing the inequality has no solution.
        spectral_bound: f64,
    },
}

impl WitnessOutcome {
    pub fn feasible(&self) -> Option<&WitnessResult> {
        match self {
            WitnessOutcome::Feasible(w) => Some(w),
            WitnessOutcome::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, WitnessOutcome::Feasible(_))
    }
}

struct PowerResult {
    /// Perron root of the iterated (shifted) matrix.
    rho: f64,
    vector: Vec<f64>,
    iterations: usize,
}

/// Power iteration for the Perron root and vector of a nonnegative
/// matrix, starting from the all-ones vector, converging when successive
/// l1-normalized iterates differ by less than 1e-13 in the max norm.
fn power_iteration(m: &ConstMatrix) -> Result<PowerResult, (usize, f64)> {
    let n = m.n();
    let mut v = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for iter in 0..ITER_CAP {
        let w = m.matvec(&v);
        let norm: f64 = w.iter().sum();
        if norm <= 0.0 {
            // Nilpotent direction: the image vanished, Perron root is 0.
            return Ok(PowerResult {
                rho: 0.0,
                vector: v,
                iterations: iter,
            });
        }
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        residual = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if residual < ITER_TOL {
            let w = m.matvec(&v);
            let rho: f64 = w.iter().sum();
            return Ok(PowerResult {
                rho,
                vector: v,
                iterations: iter + 1,
            });
        }
    }
    Err((ITER_CAP, residual))
}

fn add_uniform(m: &ConstMatrix, eps: f64) -> ConstMatrix {
    let n = m.n();
    let data: Vec<f64> = m.data().iter().map(|v| v + eps).collect();
    ConstMatrix::new(n, data).expect("finite perturbation")
}

fn add_diag(m: &ConstMatrix, shift: f64) -> ConstMatrix {
    let mut out = m.clone();
    for i in 0..m.n() {
        out.set(i, i, out.get(i, i) + shift);
    }
    out
}

/// Perron root of a nonnegative matrix, computed on `m + I` to avoid the
/// cyclic stalls of plain iteration; falls back to `m + eps*ones` for
/// matrices whose dominant part is defective. The diagonal shift is
/// exact; each perturbation distorts the root by at most `n * eps` for
/// diagonalizable dominant blocks (more for defective ones, which is why
/// the fallback is a last resort and the residual is reported on
/// failure).
fn perron_root(m: &ConstMatrix) -> Result<f64, SpectralError> {
    let shift = 1.0;
    let shifted = add_diag(m, shift);
    match power_iteration(&shifted) {
        Ok(res) => Ok(res.rho - shift),
        Err((cap, mut residual)) => {
            let mut tried = Vec::new();
            for eps in [1e-10, 1e-8, 1e-6] {
                tried.push(eps);
                match power_iteration(&add_uniform(&shifted, eps)) {
                    Ok(res) => return Ok(res.rho - shift),
                    Err((_, r)) => residual = r,
                }
            }
            Err(SpectralError::NoConvergence {
                cap,
                residual,
                perturbations: tried,
            })
        }
    }
}

/// Spectral abscissa (max real part of the eigenvalues) of a Metzler
/// matrix. For Metzler matrices this is itself an eigenvalue: the Perron
/// root of `m + cI` minus `c`, with `c = 1 + max_i |m_ii|`.
pub fn spectral_abscissa(m: &ConstMatrix) -> Result<f64, SpectralError> {
    if !m.is_metzler() {
        return Err(SpectralError::NotMetzler);
    }
    let c = 1.0 + (0..m.n()).map(|i| m.get(i, i).abs()).fold(0.0, f64::max);
    let nonneg = add_diag(m, c);
    debug_assert!(nonneg.is_nonnegative());
    Ok(perron_root(&nonneg)? - c)
}

/// Spectral radius (Perron root) of a nonnegative matrix.
pub fn spectral_radius(m: &ConstMatrix) -> Result<f64, SpectralError> {
    if !m.is_nonnegative() {
        return Err(SpectralError::NotNonnegative);
    }
    perron_root(m)
}

/// Threshold below which a component counts as strictly negative for the
/// inequality `m xi << 0`.
pub fn strict_threshold(m: &ConstMatrix, xi: &[f64]) -> f64 {
    let xi_l1: f64 = xi.iter().map(|v| v.abs()).sum();
    -STRICT_REL * m.inf_norm() * xi_l1
}

/// Worst-row slack of `m xi << 0`: `min_i -(m xi)_i`. Positive means the
/// strict inequality holds with room to spare.
pub fn hurwitz_witness_margin(m: &ConstMatrix, xi: &[f64]) -> f64 {
    m.matvec(xi)
        .iter()
        .map(|v| -v)
        .fold(f64::INFINITY, f64::min)
}

/// Worst-row slack of `m xi << xi`: `min_i (xi_i - (m xi)_i)`.
pub fn schur_witness_margin(m: &ConstMatrix, xi: &[f64]) -> f64 {
    m.matvec(xi)
        .iter()
        .zip(xi)
        .map(|(mx, x)| x - mx)
        .fold(f64::INFINITY, f64::min)
}

fn normalize_l1(v: &mut [f64]) {
    let norm: f64 = v.iter().map(|x| x.abs()).sum();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Shared witness machinery. `margin_of` validates a candidate against
/// the original, unperturbed matrix; `base` is the nonnegative matrix the
/// Perron vector is extracted from.
fn search_witness(
    original: &ConstMatrix,
    base: &ConstMatrix,
    margin_of: impl Fn(&[f64]) -> f64,
) -> Result<Option<WitnessResult>, SpectralError> {
    let accept = |mut xi: Vec<f64>, iterations: usize, method: WitnessMethod| {
        normalize_l1(&mut xi);
        if xi.iter().any(|&x| x < MIN_COMPONENT) {
            return None;
        }
        let margin = margin_of(&xi);
        let needed = -strict_threshold(original, &xi);
        if margin > needed {
            Some(WitnessResult {
                xi,
                margin,
                iterations,
                method,
            })
        } else {
            None
        }
    };

    let mut perturbations = vec![0.0];
    let mut last_residual = 0.0;
    match power_iteration(base) {
        Ok(res) => {
            if let Some(w) = accept(res.vector, res.iterations, WitnessMethod::PerronEigenvector) {
                return Ok(Some(w));
            }
        }
        Err((_, r)) => last_residual = r,
    }
    // Reducible (or defective) case: perturb towards strict positivity.
    let mut eps = 1e-2;
    while eps >= 1e-12 {
        perturbations.push(eps);
        match power_iteration(&add_uniform(base, eps)) {
            Ok(res) => {
                if let Some(w) = accept(res.vector, res.iterations, WitnessMethod::PerturbedPerron)
                {
                    return Ok(Some(w));
                }
            }
            Err((_, r)) => last_residual = r,
        }
        eps /= 10.0;
    }
    if last_residual > 0.0 {
        Err(SpectralError::NoConvergence {
            cap: ITER_CAP,
            residual: last_residual,
            perturbations,
        })
    } else {
        Ok(None)
    }
}

/// Search for `xi >> 0` with `m xi << 0` (Hurwitz witness) for a Metzler
/// matrix. Succeeds exactly when the spectral abscissa is negative; the
/// returned witness is always validated by direct multiplication.
pub fn find_hurwitz_witness(m: &ConstMatrix) -> Result<WitnessOutcome, SpectralError> {
    if !m.is_metzler() {
        return Err(SpectralError::NotMetzler);
    }
    let mu = spectral_abscissa(m)?;
    if mu >= 0.0 {
        return Ok(WitnessOutcome::Infeasible { spectral_bound: mu });
    }
    let c = 1.0 + (0..m.n()).map(|i| m.get(i, i).abs()).fold(0.0, f64::max);
    let base = add_diag(m, c);
    match search_witness(m, &base, |xi| hurwitz_witness_margin(m, xi))? {
        Some(w) => Ok(WitnessOutcome::Feasible(w)),
        // Stable in exact arithmetic but too close to the boundary to
        // validate a strict margin numerically.
        None => Ok(WitnessOutcome::Infeasible { spectral_bound: mu }),
    }
}

/// Search for `xi >> 0` with `m xi << xi` (Schur witness) for a
/// nonnegative matrix. Succeeds exactly when the spectral radius is
/// below one.
pub fn find_schur_witness(m: &ConstMatrix) -> Result<WitnessOutcome, SpectralError> {
    if !m.is_nonnegative() {
        return Err(SpectralError::NotNonnegative);
    }
    let rho = spectral_radius(m)?;
    if rho >= 1.0 {
        return Ok(WitnessOutcome::Infeasible {
            spectral_bound: rho,
        });
    }
    // Iterate on m + I so the Perron vector is untouched but the
    // iteration cannot cycle.
    let base = add_diag(m, 1.0);
    match search_witness(m, &base, |xi| schur_witness_margin(m, xi))? {
        Some(w) => Ok(WitnessOutcome::Feasible(w)),
        None => Ok(WitnessOutcome::Infeasible {
            spectral_bound: rho,
        }),
    }
}
