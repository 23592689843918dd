//! Trace generation: classic fixed-step RK4 with the method of steps for
//! the delay ODE, and the exact recursion for difference systems.
//!
//! The step is adjusted so it divides the smallest delay exactly; delayed
//! lookups then land on grid points whenever the delays are commensurate,
//! and fall back to cubic Hermite interpolation on the stored trace
//! (values plus derivative evaluations), which preserves fourth order for
//! the internal half-step stages. History values at nonpositive times are
//! evaluated from the closed-form history function directly, with no
//! interpolation error.

use thiserror::Error;

use crate::matrix::{ConstMatrix, MatrixError, MatrixExpr};
use crate::system::{ContinuousSystem, DiscreteSystem};

use super::history::InitialHistory;
use super::nonlinearity::NonlinearitySample;

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("state became non-finite at t={t}")]
    NonFinite { t: f64 },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("horizon {horizon} is shorter than 5 * h_max = {min}")]
    HorizonTooShort { horizon: f64, min: f64 },
    #[error("requested step must be positive, got {0}")]
    BadStep(f64),
    #[error("dimension mismatch: system n={n}, {what} has {got}")]
    DimensionMismatch { n: usize, what: String, got: usize },
    #[error("initial history norm is zero; envelope validation needs a nonzero history")]
    ZeroHistory,
}

/// Time-stamped states with their l1 norms.
#[derive(Debug, Clone)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,x1,...,xn,norm`.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map(|s| s.len()).unwrap_or(0);
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        out.push_str(",norm\n");
        for ((t, x), norm) in self.times.iter().zip(&self.states).zip(&self.norms) {
            out.push_str(&format!("{t}"));
            for v in x {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{norm}\n"));
        }
        out
    }
}

fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

/// A matrix that is either pre-evaluated (constant) or evaluated on
/// demand at each stage time.
enum Coefficient<'a> {
    Fixed(ConstMatrix),
    Varying(&'a MatrixExpr),
}

impl Coefficient<'_> {
    fn at(&self, t: f64) -> Result<ConstMatrix, MatrixError> {
        match self {
            Coefficient::Fixed(m) => Ok(m.clone()),
            Coefficient::Varying(e) => e.eval_at(t),
        }
    }
}

fn coefficient(e: &MatrixExpr) -> Coefficient<'_> {
    match e.as_constant() {
        Some(c) => Coefficient::Fixed(c),
        None => Coefficient::Varying(e),
    }
}

/// Cubic Hermite value on `[t0, t0+dt]` from endpoint values and
/// derivatives.
fn hermite(x0: &[f64], d0: &[f64], x1: &[f64], d1: &[f64], s: f64, dt: f64) -> Vec<f64> {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    (0..x0.len())
        .map(|i| h00 * x0[i] + h10 * dt * d0[i] + h01 * x1[i] + h11 * dt * d1[i])
        .collect()
}

struct DelayLookup<'a> {
    phi: &'a InitialHistory,
    h_max: f64,
    step: f64,
    states: &'a [Vec<f64>],
    derivs: &'a [Vec<f64>],
}

impl DelayLookup<'_> {
    fn state_at(&self, tau: f64) -> Vec<f64> {
        if tau <= 0.0 {
            return self.phi.eval(tau.max(-self.h_max), self.h_max);
        }
        let pos = tau / self.step;
        let j = pos.floor() as usize;
        let frac = pos - j as f64;
        let last = self.states.len() - 1;
        if j >= last {
            return self.states[last].clone();
        }
        if frac < 1e-9 {
            return self.states[j].clone();
        }
        if frac > 1.0 - 1e-9 {
            return self.states[j + 1].clone();
        }
        hermite(
            &self.states[j],
            &self.derivs[j],
            &self.states[j + 1],
            &self.derivs[j + 1],
            frac,
            self.step,
        )
    }
}

/// Integrate the delay system by RK4 with the method of steps.
///
/// The effective step divides the smallest delay exactly
/// (`step = h_min / ceil(h_min / step_requested)`); the horizon must span
/// at least five delay horizons.
pub fn integrate_dde(
    sys: &ContinuousSystem,
    f: &NonlinearitySample,
    phi: &InitialHistory,
    horizon: f64,
    step_requested: f64,
) -> Result<SimulationTrace, SimulateError> {
    let n = sys.n();
    if f.n() != n {
        return Err(SimulateError::DimensionMismatch {
            n,
            what: "nonlinearity".into(),
            got: f.n(),
        });
    }
    if phi.n() != n {
        return Err(SimulateError::DimensionMismatch {
            n,
            what: "history".into(),
            got: phi.n(),
        });
    }
    if step_requested.is_nan() || step_requested <= 0.0 {
        return Err(SimulateError::BadStep(step_requested));
    }
    let h_max = sys.h_max().unwrap_or(0.0);
    if horizon < 5.0 * h_max || horizon <= 0.0 {
        return Err(SimulateError::HorizonTooShort {
            horizon,
            min: 5.0 * h_max,
        });
    }

    let step = match sys.h_min() {
        Some(h_min) => h_min / (h_min / step_requested).ceil(),
        None => horizon / (horizon / step_requested).ceil(),
    };
    let num_steps = ((horizon / step) - 1e-9).ceil() as usize;

    let a_coef = coefficient(sys.a());
    let b_coefs: Vec<(f64, Coefficient)> = sys
        .delays()
        .iter()
        .map(|d| (d.h, coefficient(&d.b)))
        .collect();

    let mut times: Vec<f64> = Vec::with_capacity(num_steps + 1);
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(num_steps + 1);
    let mut derivs: Vec<Vec<f64>> = Vec::with_capacity(num_steps + 1);

    let x0 = phi.eval(0.0, h_max);
    times.push(0.0);
    states.push(x0);

    // rhs at a stage: A(t) f(x) + sum_l B_l(t) f(x(t - h_l)), with the
    // coefficient matrices for this stage time passed in pre-evaluated.
    let rhs = |t: f64,
               x: &[f64],
               a_t: &ConstMatrix,
               b_ts: &[ConstMatrix],
               states: &[Vec<f64>],
               derivs: &[Vec<f64>]|
     -> Vec<f64> {
        let lookup = DelayLookup {
            phi,
            h_max,
            step,
            states,
            derivs,
        };
        let mut dx = a_t.matvec(&f.eval_vec(x));
        for ((h_l, _), b_t) in b_coefs.iter().zip(b_ts) {
            let xd = lookup.state_at(t - h_l);
            let contribution = b_t.matvec(&f.eval_vec(&xd));
            for (d, c) in dx.iter_mut().zip(contribution) {
                *d += c;
            }
        }
        dx
    };

    let eval_mats = |t: f64| -> Result<(ConstMatrix, Vec<ConstMatrix>), MatrixError> {
        let a_t = a_coef.at(t)?;
        let b_ts = b_coefs
            .iter()
            .map(|(_, c)| c.at(t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((a_t, b_ts))
    };

    let mut mats_start = eval_mats(0.0)?;
    for k in 0..num_steps {
        let t = times[k];
        let x = states[k].clone();

        // Stage 1 first: it only looks back to t - h_min <= t - step, and
        // its value is the trace derivative at t, needed by the Hermite
        // lookups of the later stages.
        let k1 = rhs(t, &x, &mats_start.0, &mats_start.1, &states, &derivs);
        derivs.push(k1.clone());

        let mats_half = eval_mats(t + step / 2.0)?;
        let mats_end = eval_mats(t + step)?;

        let x2: Vec<f64> = x.iter().zip(&k1).map(|(a, b)| a + step / 2.0 * b).collect();
        let k2 = rhs(
            t + step / 2.0,
            &x2,
            &mats_half.0,
            &mats_half.1,
            &states,
            &derivs,
        );
        let x3: Vec<f64> = x.iter().zip(&k2).map(|(a, b)| a + step / 2.0 * b).collect();
        let k3 = rhs(
            t + step / 2.0,
            &x3,
            &mats_half.0,
            &mats_half.1,
            &states,
            &derivs,
        );
        let x4: Vec<f64> = x.iter().zip(&k3).map(|(a, b)| a + step * b).collect();
        let k4 = rhs(t + step, &x4, &mats_end.0, &mats_end.1, &states, &derivs);

        let next: Vec<f64> = (0..n)
            .map(|i| x[i] + step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        let t_next = (k + 1) as f64 * step;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(SimulateError::NonFinite { t: t_next });
        }
        times.push(t_next);
        states.push(next);
        mats_start = mats_end;
    }

    let norms = states.iter().map(|x| l1(x)).collect();
    Ok(SimulationTrace {
        times,
        states,
        norms,
    })
}

/// Exact recursion for the difference system, bit-reproducible for a
/// given nonlinearity and history.
pub fn iterate_discrete(
    sys: &DiscreteSystem,
    f: &NonlinearitySample,
    phi: &InitialHistory,
    horizon: u64,
) -> Result<SimulationTrace, SimulateError> {
    let n = sys.n();
    if f.n() != n {
        return Err(SimulateError::DimensionMismatch {
            n,
            what: "nonlinearity".into(),
            got: f.n(),
        });
    }
    if phi.n() != n {
        return Err(SimulateError::DimensionMismatch {
            n,
            what: "history".into(),
            got: phi.n(),
        });
    }
    let h_max = sys.h_max().unwrap_or(0);
    if horizon < 5 * h_max as u64 || horizon == 0 {
        return Err(SimulateError::HorizonTooShort {
            horizon: horizon as f64,
            min: 5.0 * h_max as f64,
        });
    }

    let a_coef = coefficient(sys.a());
    let b_coefs: Vec<(u32, Coefficient)> = sys
        .delays()
        .iter()
        .map(|d| (d.h, coefficient(&d.b)))
        .collect();

    let mut states: Vec<Vec<f64>> = Vec::with_capacity(horizon as usize + 1);
    states.push(phi.eval_discrete(0, h_max));

    for k in 0..horizon {
        let a_k = a_coef.at(k as f64)?;
        let fx = f.eval_vec(&states[k as usize]);
        let mut next = a_k.matvec(&fx);
        for (h_l, b) in &b_coefs {
            let b_k = b.at(k as f64)?;
            let idx = k as i64 - *h_l as i64;
            let xd = if idx < 0 {
                phi.eval_discrete(idx, h_max)
            } else {
                states[idx as usize].clone()
            };
            let contribution = b_k.matvec(&f.eval_vec(&xd));
            for (v, c) in next.iter_mut().zip(contribution) {
                *v += c;
            }
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(SimulateError::NonFinite { t: (k + 1) as f64 });
        }
        states.push(next);
    }

    let times = (0..=horizon).map(|k| k as f64).collect();
    let norms = states.iter().map(|x| l1(x)).collect();
    Ok(SimulationTrace {
        times,
        states,
        norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{ConstMatrix, MatrixExpr};
    use crate::sector::SectorBounds;
    use crate::simulate::nonlinearity::sample_nonlinearity;
    use crate::system::{DelayTerm, DiscreteDelayTerm};

    fn scalar_sys(a: f64, b: f64, h: f64) -> ContinuousSystem {
        ContinuousSystem::new(
            MatrixExpr::from_const(&ConstMatrix::scalar(a)),
            vec![DelayTerm {
                h,
                b: MatrixExpr::from_const(&ConstMatrix::scalar(b)),
            }],
            None,
        )
        .unwrap()
    }

    #[test]
    fn zero_history_stays_at_equilibrium() {
        let sys = scalar_sys(-2.0, 0.5, 1.0);
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        let f = sample_nonlinearity(&sector, 0);
        let phi = InitialHistory::constant(vec![0.0]);
        let trace = integrate_dde(&sys, &f, &phi, 6.0, 0.01).unwrap();
        assert!(trace.states.iter().all(|x| x[0] == 0.0));
    }

    #[test]
    fn scalar_linear_matches_exponential() {
        // dx/dt = -2x with the lower-edge nonlinearity at delta = 1
        let sys = ContinuousSystem::new(
            MatrixExpr::from_const(&ConstMatrix::scalar(-2.0)),
            vec![],
            None,
        )
        .unwrap();
        let sector = SectorBounds::bounded(vec![1.0], vec![2.0]).unwrap();
        let f = sample_nonlinearity(&sector, 0);
        let phi = InitialHistory::constant(vec![1.0]);
        let trace = integrate_dde(&sys, &f, &phi, 2.0, 1e-3).unwrap();
        let idx = trace
            .times
            .iter()
            .position(|&t| (t - 1.0).abs() < 1e-12)
            .unwrap();
        assert!((trace.states[idx][0] - (-2.0f64).exp()).abs() < 1e-8);
    }

    // dx/dt = -2x(t) + 0.5 x(t-1), phi = 1:
    // x(1) = e^-2 + 0.25 (1 - e^-2) by variation of constants on [0,1]
    #[test]
    fn dde_first_interval_matches_closed_form() {
        let sys = scalar_sys(-2.0, 0.5, 1.0);
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        let f = sample_nonlinearity(&sector, 0);
        let phi = InitialHistory::constant(vec![1.0]);
        let trace = integrate_dde(&sys, &f, &phi, 5.0, 1e-3).unwrap();
        let idx = trace
            .times
            .iter()
            .position(|&t| (t - 1.0).abs() < 1e-12)
            .unwrap();
        let expected = (-2.0f64).exp() + 0.25 * (1.0 - (-2.0f64).exp());
        assert!((expected - 0.3515014624274595).abs() < 1e-15);
        assert!((trace.states[idx][0] - expected).abs() < 1e-6);
    }

    #[test]
    fn rk4_error_drops_sixteen_fold_per_halving() {
        let sys = scalar_sys(-2.0, 0.5, 1.0);
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        let f = sample_nonlinearity(&sector, 0);
        let phi = InitialHistory::constant(vec![1.0]);
        let expected = (-2.0f64).exp() + 0.25 * (1.0 - (-2.0f64).exp());
        let value_at_one = |step: f64| {
            let trace = integrate_dde(&sys, &f, &phi, 5.0, step).unwrap();
            let idx = trace
                .times
                .iter()
                .position(|&t| (t - 1.0).abs() < 1e-12)
                .unwrap();
            trace.states[idx][0]
        };
        let err_coarse = (value_at_one(1e-2) - expected).abs();
        let err_fine = (value_at_one(5e-3) - expected).abs();
        let ratio = err_coarse / err_fine;
        assert!(
            (8.0..=32.0).contains(&ratio),
            "order ratio {ratio} (errors {err_coarse:.3e} / {err_fine:.3e})"
        );
    }

    #[test]
    fn step_is_adjusted_to_divide_delay() {
        let sys = scalar_sys(-1.0, 0.1, 1.0);
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        let f = sample_nonlinearity(&sector, 0);
        let phi = InitialHistory::constant(vec![1.0]);
        let trace = integrate_dde(&sys, &f, &phi, 5.0, 0.3).unwrap();
        // 1.0 / ceil(1.0/0.3) = 0.25
        assert!((trace.times[1] - 0.25).abs() < 1e-15);
        assert!(trace.times.iter().any(|&t| (t - 1.0).abs() < 1e-12));
        assert!(*trace.times.last().unwrap() >= 5.0 - 1e-12);
    }

    #[test]
    fn horizon_must_cover_five_delays() {
        let sys = scalar_sys(-1.0, 0.1, 1.0);
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        let f = sample_nonlinearity(&sector, 0);
        let phi = InitialHistory::constant(vec![1.0]);
        assert!(matches!(
            integrate_dde(&sys, &f, &phi, 2.0, 0.01),
            Err(SimulateError::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn divergent_dynamics_reports_nonfinite() {
        // dx/dt = +40 x blows up past f64 range well before t = 25
        let sys = ContinuousSystem::new(
            MatrixExpr::from_const(&ConstMatrix::scalar(40.0)),
            vec![],
            None,
        )
        .unwrap();
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        let f = sample_nonlinearity(&sector, 0);
        let phi = InitialHistory::constant(vec![1.0]);
        assert!(matches!(
            integrate_dde(&sys, &f, &phi, 25.0, 1e-2),
            Err(SimulateError::NonFinite { .. })
        ));
    }

    #[test]
    fn discrete_zero_history_is_zero() {
        let sys = DiscreteSystem::new(
            MatrixExpr::from_const(&ConstMatrix::scalar(0.5)),
            vec![DiscreteDelayTerm {
                h: 1,
                b: MatrixExpr::from_const(&ConstMatrix::scalar(0.25)),
            }],
            None,
        )
        .unwrap();
        let sector = SectorBounds::positive_up_to(vec![1.0]).unwrap();
        let f = sample_nonlinearity(&sector, 0);
        let phi = InitialHistory::constant(vec![0.0]);
        let trace = iterate_discrete(&sys, &f, &phi, 20).unwrap();
        assert!(trace.norms.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn discrete_geometric_decay_is_exact() {
        let sys = DiscreteSystem::new(
            MatrixExpr::from_const(&ConstMatrix::scalar(0.5)),
            vec![],
            None,
        )
        .unwrap();
        let sector = SectorBounds::positive_up_to(vec![1.0]).unwrap();
        let f = sample_nonlinearity(&sector, 0); // upper edge: f(x) = x
        let phi = InitialHistory::constant(vec![1.0]);
        let trace = iterate_discrete(&sys, &f, &phi, 20).unwrap();
        for (k, x) in trace.states.iter().enumerate() {
            assert_eq!(x[0], 0.5f64.powi(k as i32));
        }
    }

    #[test]
    fn discrete_is_bit_reproducible() {
        let a = MatrixExpr::parse_rows(&[
            vec!["-sin(t)".into(), "2*exp(-3*t)".into()],
            vec!["3*cos(t)".into(), "-sin(t)".into()],
        ])
        .unwrap();
        let b = MatrixExpr::parse_rows(&[
            vec!["(1/2)*exp(-t)".into(), "(1/3)*sin(t)".into()],
            vec!["(1/2)*exp(-2*t)".into(), "(1/4)*cos(t)".into()],
        ])
        .unwrap();
        let sys = DiscreteSystem::new(a, vec![DiscreteDelayTerm { h: 1, b }], None).unwrap();
        let sector = SectorBounds::positive_up_to(vec![0.125, 1.0 / 14.0]).unwrap();
        let f = sample_nonlinearity(&sector, 7);
        let phi = InitialHistory::sinusoid(vec![1.0, -0.5], 0.9);
        let t1 = iterate_discrete(&sys, &f, &phi, 30).unwrap();
        let t2 = iterate_discrete(&sys, &f, &phi, 30).unwrap();
        for (a, b) in t1.states.iter().zip(&t2.states) {
            assert_eq!(a[0].to_bits(), b[0].to_bits());
            assert_eq!(a[1].to_bits(), b[1].to_bits());
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let sys = scalar_sys(-1.0, 0.0, 1.0);
        let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
        let f = sample_nonlinearity(&sector, 0);
        let phi = InitialHistory::constant(vec![2.0]);
        let trace = integrate_dde(&sys, &f, &phi, 5.0, 0.5).unwrap();
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,x1,norm"));
        assert_eq!(csv.lines().count(), trace.len() + 1);
    }
}
