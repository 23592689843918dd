//! Maximal certifiable rates, row by row: the continuous profile solves
//! g_i(alpha) = 0 with g increasing, the discrete profile solves
//! g_i(lambda) = 0 with g decreasing on (0,1).
//!
//! ```bash
//! cargo run -p persidskii --example decay_profile
//! ```

use persidskii::continuous::{alpha_max_profile, check_cor2};
use persidskii::discrete::lambda_max_profile;
use persidskii::matrix::{ConstMatrix, MatrixExpr};
use persidskii::{Outcome, SectorBounds};

fn main() {
    // Scalar delay system dx/dt = -2 f(x) + f(x(t-1)) with unit slopes:
    // g(alpha) = -2 + e^alpha + alpha, so alpha_max solves e^a + a = 2.
    let a_hat = ConstMatrix::scalar(-2.0);
    let b_bar = ConstMatrix::scalar(1.0);
    let sector = SectorBounds::bounded(vec![1.0], vec![1.0]).unwrap();
    match alpha_max_profile(&a_hat, &[(1.0, b_bar)], &sector, &[1.0]).unwrap() {
        Outcome::Feasible(p) => {
            println!("scalar continuous: alpha_max = {:.10}", p.alpha_max);
            let residual = p.alpha_max.exp() + p.alpha_max - 2.0;
            println!("  residual e^a + a - 2 = {residual:.2e}");
        }
        Outcome::Infeasible(r) => println!("infeasible: {}", r.describe()),
    }

    // Nondelay rate window from weighted column sums.
    let a = MatrixExpr::from_const(
        &ConstMatrix::from_rows(&[vec![-3.0, 1.0], vec![1.0, -2.0]]).unwrap(),
    );
    let sector2 = SectorBounds::bounded(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
    if let Outcome::Feasible(w) = check_cor2(&a, &sector2, &[1.0, 1.0], &[0.0]).unwrap() {
        println!(
            "\nnondelay window: gamma = {}, any rate in (0, {}) certifies; default {}",
            w.gamma,
            w.alpha_sup,
            w.default_alpha()
        );
    }

    // Discrete delay-only row: g(lambda) = 0.25 lambda^-2 - lambda, so
    // the rate is the cube root of 0.25.
    let a0 = ConstMatrix::scalar(0.0);
    let b = ConstMatrix::scalar(0.25);
    let one_sided = SectorBounds::positive_up_to(vec![1.0]).unwrap();
    if let Outcome::Feasible(p) = lambda_max_profile(&a0, &[(2, b)], &one_sided, &[1.0]).unwrap() {
        println!(
            "\ndiscrete delay-only: lambda_max = {:.10} (cube root of 1/4 = {:.10})",
            p.lambda_max,
            0.25f64.powf(1.0 / 3.0)
        );
    }
}
