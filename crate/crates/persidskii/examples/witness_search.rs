//! Perron-root sign tests and positive witness vectors for Metzler and
//! nonnegative matrices.
//!
//! ```bash
//! cargo run -p persidskii --example witness_search
//! ```

use persidskii::matrix::ConstMatrix;
use persidskii::metzler::{
    find_hurwitz_witness, find_schur_witness, spectral_abscissa, spectral_radius,
};
use persidskii::WitnessOutcome;

fn main() {
    let stable = ConstMatrix::from_rows(&[vec![-2.0, 1.0], vec![1.0, -2.0]]).unwrap();
    println!(
        "spectral abscissa of [[-2,1],[1,-2]]: {:+.6}",
        spectral_abscissa(&stable).unwrap()
    );
    match find_hurwitz_witness(&stable).unwrap() {
        WitnessOutcome::Feasible(w) => {
            println!(
                "  witness xi = {:?} (margin {:.4}, {:?})",
                w.xi, w.margin, w.method
            );
            println!("  direct check m*xi = {:?}", stable.matvec(&w.xi));
        }
        WitnessOutcome::Infeasible { spectral_bound } => {
            println!("  infeasible with bound {spectral_bound}")
        }
    }

    let unstable = ConstMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    match find_hurwitz_witness(&unstable).unwrap() {
        WitnessOutcome::Feasible(_) => unreachable!("permutation is not Hurwitz"),
        WitnessOutcome::Infeasible { spectral_bound } => {
            println!("[[0,1],[1,0]] infeasible, abscissa = {spectral_bound}")
        }
    }

    // reducible case: the Perron vector needs the perturbation fallback
    let diagonal = ConstMatrix::from_rows(&[vec![-3.0, 0.0], vec![0.0, -5.0]]).unwrap();
    if let WitnessOutcome::Feasible(w) = find_hurwitz_witness(&diagonal).unwrap() {
        println!("diag(-3,-5) witness via {:?}: {:?}", w.method, w.xi);
    }

    let contraction = ConstMatrix::from_rows(&[vec![0.3, 0.2], vec![0.1, 0.4]]).unwrap();
    println!(
        "\nspectral radius of [[0.3,0.2],[0.1,0.4]]: {:.6}",
        spectral_radius(&contraction).unwrap()
    );
    if let WitnessOutcome::Feasible(w) = find_schur_witness(&contraction).unwrap() {
        println!(
            "  Schur witness xi = {:?}, m*xi = {:?}",
            w.xi,
            contraction.matvec(&w.xi)
        );
    }
}
