//! Certify a two-dimensional time-varying delay system whose `A(t)` is
//! unbounded (so no constant matrix dominates it) but whose weighted
//! column sums stay negative for all time.
//!
//! ```bash
//! cargo run -p persidskii --example certify_continuous
//! ```

use persidskii::continuous::{check_thm1, condition_lhs, find_certificate_thm1};
use persidskii::matrix::{ConstMatrix, MatrixExpr};
use persidskii::system::{ContinuousSystem, DelayTerm, SystemBounds};
use persidskii::{Outcome, SectorBounds};

fn main() {
    // dx/dt = A(t) f(x(t)) + B(t) f(x(t-1)) with |B(t)| <= Bbar and
    // sector slopes delta = (1/3, 1/2), beta = (3/2, 2)
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

    // Check the proposed witness xi = (1,1) at decay rate alpha = 1 on a
    // dense grid. The condition vector is (-t-4+e, -t-5/2+e/2), so the
    // binding time is t = 0.
    let grid: Vec<f64> = (0..=10_000).map(|k| k as f64 * 0.01).collect();
    let report = check_thm1(&sys, &sector, &[1.0, 1.0], 1.0, &grid).unwrap();
    println!(
        "alpha=1, xi=(1,1): holds={} margin={:.6} worst_t={} evidence={:?}",
        report.holds, report.margin, report.worst_t, report.evidence
    );
    let lhs = condition_lhs(&sys, &sector, &[1.0, 1.0], 1.0, 0.0, &grid).unwrap();
    println!(
        "condition vector at t=0: ({:+.6}, {:+.6}) <= (-1, -1)",
        lhs[0], lhs[1]
    );

    // Automatic witness search against grid suprema. The entry
    // a21(t) = t grows without bound, so the constant-domination route
    // only succeeds on a truncated window, and the certificate honestly
    // says so: evidence is the grid, not a proof for all time.
    let short_grid: Vec<f64> = (0..=500).map(|k| k as f64 * 0.01).collect();
    match find_certificate_thm1(&sys, &sector, &short_grid, None).unwrap() {
        Outcome::Feasible(cert) => {
            println!(
                "\nauto on t in [0,5]: criterion={:?} alpha_max={:.6} xi={:?} evidence={:?}",
                cert.criterion, cert.alpha, cert.xi, cert.evidence
            );
            if let Some(profile) = cert.profile {
                println!(
                    "per-row rates {:?}, binding row {}",
                    profile.alpha_i, profile.binding_row
                );
            }
        }
        Outcome::Infeasible(reason) => println!("infeasible: {}", reason.describe()),
    }
    // On a long window the supremum of a21 overwhelms the comparison
    // matrix and the search reports infeasibility with its Perron value.
    match find_certificate_thm1(&sys, &sector, &grid, None).unwrap() {
        Outcome::Feasible(_) => println!("unexpectedly feasible on [0,100]"),
        Outcome::Infeasible(reason) => {
            println!("auto on t in [0,100]: infeasible ({})", reason.describe())
        }
    }
}
