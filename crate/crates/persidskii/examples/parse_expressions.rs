//! Parse and evaluate the time-varying coefficient expressions used in
//! system files.
//!
//! ```bash
//! cargo run -p persidskii --example parse_expressions
//! ```

use persidskii::Expression;

fn main() {
    let sources = [
        "-4*t-12",
        "(1/3)*exp(-t)*cos(t)",
        "2^3^2",
        "abs(sin(2*t))/(t+1)",
    ];
    for src in sources {
        let expr = Expression::parse(src).expect("valid expression");
        print!("{src:28}");
        for t in [0.0, 1.0, 2.5] {
            print!("  f({t}) = {:+.6}", expr.eval(t).expect("finite"));
        }
        println!();
    }

    // errors carry positions; evaluation never hides non-finite results
    println!("\nparse \"2t\": {}", Expression::parse("2t").unwrap_err());
    let div = Expression::parse("1/t").unwrap();
    println!("eval 1/t at t=0: {}", div.eval(0.0).unwrap_err());
}
