//! Cross-validate a certificate by simulation: the certified rate passes
//! the envelope check for every sampled admissible nonlinearity and
//! history, and a deliberately inflated rate is falsified.
//!
//! ```bash
//! cargo run --release -p persidskii --example monte_carlo_validation
//! ```

use persidskii::matrix::{ConstMatrix, MatrixExpr};
use persidskii::simulate::monte_carlo_validate_continuous;
use persidskii::system::{ContinuousSystem, DelayTerm, SystemBounds};
use persidskii::SectorBounds;

fn main() {
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
        ConstMatrix::from_rows(&[vec![1.0 / 3.0, 1.0 / 8.0], vec![1.0 / 3.0, 1.0 / 8.0]]).unwrap();
    let sys = ContinuousSystem::new(
        a,
        vec![DelayTerm { h: 1.0, b }],
        Some(SystemBounds {
            a_sup: None,
            b_sups: Some(vec![b_bar]),
        }),
    )
    .unwrap();
    let sector = SectorBounds::bounded(vec![1.0 / 3.0, 0.5], vec![1.5, 2.0]).unwrap();

    // the certified rate survives 20 nonlinearities x 10 histories
    let report =
        monte_carlo_validate_continuous(&sys, &sector, 1.0, 20, 10, 42, 10.0, 1e-3, 0.05).unwrap();
    println!(
        "alpha = 1: pass={} over {} runs (worst M = {:.3}, worst slope = {:.3})",
        report.pass, report.runs, report.worst_m_fit, report.worst_slope
    );

    // an inflated rate is falsified: the envelope constant keeps growing
    // across the horizon for the lower-edge runs
    let report =
        monte_carlo_validate_continuous(&sys, &sector, 5.0, 20, 10, 42, 10.0, 1e-3, 0.05).unwrap();
    println!(
        "alpha = 5: pass={} with {} failing runs (first failure: nonlinearity seed {}, M = {:.1})",
        report.pass,
        report.failures.len(),
        report
            .failures
            .first()
            .map(|f| f.nonlinearity_seed)
            .unwrap_or(0),
        report.failures.first().map(|f| f.m_fit).unwrap_or(0.0),
    );
    println!("\nnote: a pass is the absence of a counterexample on this horizon, not a proof");
}
