//! Certify a time-varying difference system through constant dominating
//! matrices; the certificate then covers every system below the bounds.
//!
//! ```bash
//! cargo run -p persidskii --example certify_discrete
//! ```

use persidskii::discrete::{check_thm4, find_certificate_cor5};
use persidskii::matrix::{ConstMatrix, MatrixExpr};
use persidskii::system::{DiscreteDelayTerm, DiscreteSystem, SystemBounds};
use persidskii::{Outcome, SectorBounds};

fn main() {
    // x(k+1) = A(k) f(x(k)) + B1(k) f(x(k-1)) with |A(k)| <= A, |B1(k)| <= B1
    let a_bound = ConstMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap();
    let b_bound = ConstMatrix::from_rows(&[vec![0.5, 1.0 / 3.0], vec![0.5, 0.25]]).unwrap();
    let sector = SectorBounds::positive_up_to(vec![1.0 / 8.0, 1.0 / 14.0]).unwrap();

    match find_certificate_cor5(
        &a_bound,
        &[(1, b_bound.clone())],
        &sector,
        Some(&[1.0, 1.0]),
    )
    .unwrap()
    {
        Outcome::Feasible(cert) => {
            println!("lambda_max = {:.10} for xi = {:?}", cert.lambda, cert.xi);
            let profile = cert.profile.expect("profile");
            println!(
                "per-row rates ({:.10}, {:.10}), binding row {}",
                profile.lambda_i[0],
                profile.lambda_i[1],
                profile.binding_row + 1
            );
        }
        Outcome::Infeasible(reason) => println!("infeasible: {}", reason.describe()),
    }

    // The same certificate checked directly against the time-varying
    // system on a step grid.
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
    let sys = DiscreteSystem::new(
        a,
        vec![DiscreteDelayTerm { h: 1, b }],
        Some(SystemBounds {
            a_sup: Some(a_bound),
            b_sups: Some(vec![b_bound]),
        }),
    )
    .unwrap();
    let report = check_thm4(&sys, &sector, &[1.0, 1.0], 0.5840213813, &[]).unwrap();
    println!(
        "\ncheck at lambda_max: holds={} margin={:.3e} (binding row sits on its root)",
        report.holds, report.margin
    );
    let report = check_thm4(&sys, &sector, &[1.0, 1.0], 0.9, &[]).unwrap();
    println!(
        "check at lambda=0.9: holds={} margin={:.6}",
        report.holds, report.margin
    );
}
