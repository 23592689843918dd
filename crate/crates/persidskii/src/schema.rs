//! JSON schema for system description files.
//!
//! ```json
//! {
//!   "n": 2,
//!   "time": "continuous",
//!   "A": [["-4*t-12", 0], ["t", "-2*t-5"]],
//!   "delays": [{"h": 1, "B": [["(1/3)*sin(t)", "(1/8)*cos(t)"],
//!                             ["(1/3)*exp(-t)*cos(t)", "(1/8)*exp(-t)*sin(t)"]]}],
//!   "sector": {"delta": [0.333333333333, 0.5], "beta": [1.5, 2]},
//!   "bounds": {"B": [[[0.333333333333, 0.125], [0.333333333333, 0.125]]]}
//! }
//! ```
//!
//! Matrix entries are numbers or expression strings in `t` (in discrete
//! time the step index is substituted for `t`). `time` is optional: a
//! sector with a `delta` means continuous time, a beta-only sector means
//! discrete time. `bounds` holds optional constant suprema: `A` bounds
//! the Metzlerized matrix (continuous) or `|A(k)|` (discrete), `B` is one
//! nonnegative matrix per delay bounding `|B_l|`. Numbers are read as
//! IEEE doubles; no bit-exact text round-trip is promised.

use serde::Deserialize;
use thiserror::Error;

use crate::expr::Expression;
use crate::matrix::{ConstMatrix, Entry, MatrixError, MatrixExpr};
use crate::sector::{SectorBounds, SectorError};
use crate::system::{
    ContinuousSystem, DelayTerm, DiscreteDelayTerm, DiscreteSystem, SystemBounds, SystemError,
};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Sector(#[from] SectorError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Expr(#[from] crate::expr::ParseError),
    #[error("matrix `{name}` has {got} rows, expected n={n}")]
    BadRows { name: String, n: usize, got: usize },
    #[error("matrix `{name}` row {row} has {got} entries, expected n={n}")]
    BadRow {
        name: String,
        row: usize,
        n: usize,
        got: usize,
    },
    #[error("discrete delay h={h} must be a positive integer")]
    NonIntegerDelay { h: f64 },
    #[error("a discrete system needs a beta-only sector (no delta)")]
    DiscreteWithDelta,
    #[error("a continuous system needs a sector with delta and beta")]
    ContinuousWithoutDelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeDomain {
    Continuous,
    Discrete,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum EntrySpec {
    Num(f64),
    Expr(String),
}

#[derive(Debug, Deserialize)]
struct DelaySpec {
    h: f64,
    #[serde(rename = "B")]
    b: Vec<Vec<EntrySpec>>,
}

#[derive(Debug, Deserialize)]
struct SectorSpec {
    #[serde(default)]
    delta: Option<Vec<f64>>,
    beta: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct BoundsSpec {
    #[serde(rename = "A", default)]
    a: Option<Vec<Vec<f64>>>,
    #[serde(rename = "B", default)]
    b: Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Deserialize)]
struct SystemSpec {
    n: usize,
    #[serde(default)]
    time: Option<TimeDomain>,
    #[serde(rename = "A")]
    a: Vec<Vec<EntrySpec>>,
    #[serde(default)]
    delays: Vec<DelaySpec>,
    sector: SectorSpec,
    #[serde(default)]
    bounds: Option<BoundsSpec>,
}

/// A parsed system with its sector, ready for the certifiers.
#[derive(Debug, Clone)]
pub enum ParsedSystem {
    Continuous {
        system: ContinuousSystem,
        sector: SectorBounds,
    },
    Discrete {
        system: DiscreteSystem,
        sector: SectorBounds,
    },
}

impl ParsedSystem {
    pub fn n(&self) -> usize {
        match self {
            ParsedSystem::Continuous { system, .. } => system.n(),
            ParsedSystem::Discrete { system, .. } => system.n(),
        }
    }
}

fn matrix_from_entries(
    name: &str,
    n: usize,
    rows: Vec<Vec<EntrySpec>>,
) -> Result<MatrixExpr, SchemaError> {
    if rows.len() != n {
        return Err(SchemaError::BadRows {
            name: name.into(),
            n,
            got: rows.len(),
        });
    }
    let mut entries = Vec::with_capacity(n * n);
    for (row, cols) in rows.into_iter().enumerate() {
        if cols.len() != n {
            return Err(SchemaError::BadRow {
                name: name.into(),
                row,
                n,
                got: cols.len(),
            });
        }
        for spec in cols {
            entries.push(match spec {
                EntrySpec::Num(v) => Entry::Const(v),
                EntrySpec::Expr(src) => Entry::Expr(Expression::parse(&src)?),
            });
        }
    }
    Ok(MatrixExpr::new(n, entries)?)
}

fn const_matrix(name: &str, n: usize, rows: Vec<Vec<f64>>) -> Result<ConstMatrix, SchemaError> {
    if rows.len() != n {
        return Err(SchemaError::BadRows {
            name: name.into(),
            n,
            got: rows.len(),
        });
    }
    for (row, cols) in rows.iter().enumerate() {
        if cols.len() != n {
            return Err(SchemaError::BadRow {
                name: name.into(),
                row,
                n,
                got: cols.len(),
            });
        }
    }
    Ok(ConstMatrix::from_rows(&rows)?)
}

/// Parse a system description. The time domain is taken from the `time`
/// field when present, otherwise inferred from the sector shape: `delta`
/// present means continuous, beta-only means discrete.
pub fn parse_system_json(text: &str) -> Result<ParsedSystem, SchemaError> {
    let spec: SystemSpec = serde_json::from_str(text)?;
    let n = spec.n;
    let domain = spec.time.unwrap_or(if spec.sector.delta.is_some() {
        TimeDomain::Continuous
    } else {
        TimeDomain::Discrete
    });

    let a = matrix_from_entries("A", n, spec.a)?;
    let bounds = match spec.bounds {
        None => None,
        Some(b) => {
            let a_sup =
                b.a.map(|rows| const_matrix("bounds.A", n, rows))
                    .transpose()?;
            let b_sups =
                b.b.map(|list| {
                    list.into_iter()
                        .enumerate()
                        .map(|(l, rows)| const_matrix(&format!("bounds.B[{l}]"), n, rows))
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?;
            Some(SystemBounds { a_sup, b_sups })
        }
    };

    match domain {
        TimeDomain::Continuous => {
            let delta = spec
                .sector
                .delta
                .ok_or(SchemaError::ContinuousWithoutDelta)?;
            let sector = SectorBounds::bounded(delta, spec.sector.beta)?;
            let mut delays = Vec::with_capacity(spec.delays.len());
            for (l, d) in spec.delays.into_iter().enumerate() {
                let b = matrix_from_entries(&format!("delays[{l}].B"), n, d.b)?;
                delays.push(DelayTerm { h: d.h, b });
            }
            let system = ContinuousSystem::new(a, delays, bounds)?;
            Ok(ParsedSystem::Continuous { system, sector })
        }
        TimeDomain::Discrete => {
            if spec.sector.delta.is_some() {
                return Err(SchemaError::DiscreteWithDelta);
            }
            let sector = SectorBounds::positive_up_to(spec.sector.beta)?;
            let mut delays = Vec::with_capacity(spec.delays.len());
            for (l, d) in spec.delays.into_iter().enumerate() {
                if d.h.fract() != 0.0 || d.h < 1.0 || d.h > u32::MAX as f64 {
                    return Err(SchemaError::NonIntegerDelay { h: d.h });
                }
                let b = matrix_from_entries(&format!("delays[{l}].B"), n, d.b)?;
                delays.push(DiscreteDelayTerm { h: d.h as u32, b });
            }
            let system = DiscreteSystem::new(a, delays, bounds)?;
            Ok(ParsedSystem::Discrete { system, sector })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_CONTINUOUS: &str = r#"{
        "n": 2,
        "A": [["-4*t-12", 0], ["t", "-2*t-5"]],
        "delays": [{"h": 1, "B": [["(1/3)*sin(t)", "(1/8)*cos(t)"],
                                   ["(1/3)*exp(-t)*cos(t)", "(1/8)*exp(-t)*sin(t)"]]}],
        "sector": {"delta": [0.3333333333333333, 0.5], "beta": [1.5, 2]},
        "bounds": {"B": [[[0.3333333333333333, 0.125], [0.3333333333333333, 0.125]]]}
    }"#;

    const EXAMPLE_DISCRETE: &str = r#"{
        "n": 2,
        "A": [["-sin(t)", "2*exp(-3*t)"], ["3*cos(t)", "-sin(t)"]],
        "delays": [{"h": 1, "B": [["(1/2)*exp(-t)", "(1/3)*sin(t)"],
                                   ["(1/2)*exp(-2*t)", "(1/4)*cos(t)"]]}],
        "sector": {"beta": [0.125, 0.07142857142857142]},
        "bounds": {"A": [[1, 2], [3, 1]], "B": [[[0.5, 0.3333333333333333], [0.5, 0.25]]]}
    }"#;

    #[test]
    fn continuous_is_inferred_from_delta() {
        match parse_system_json(EXAMPLE_CONTINUOUS).unwrap() {
            ParsedSystem::Continuous { system, sector } => {
                assert_eq!(system.n(), 2);
                assert_eq!(system.delays().len(), 1);
                assert_eq!(sector.delta().unwrap()[1], 0.5);
                let a0 = system.a().eval_at(0.0).unwrap();
                assert_eq!(a0.get(0, 0), -12.0);
            }
            other => panic!("expected continuous, got {other:?}"),
        }
    }

    #[test]
    fn discrete_is_inferred_from_beta_only() {
        match parse_system_json(EXAMPLE_DISCRETE).unwrap() {
            ParsedSystem::Discrete { system, sector } => {
                assert_eq!(system.delays()[0].h, 1);
                assert_eq!(sector.beta()[0], 0.125);
                let bounds = system.bounds().unwrap();
                assert_eq!(bounds.a_sup.as_ref().unwrap().get(1, 0), 3.0);
            }
            other => panic!("expected discrete, got {other:?}"),
        }
    }

    #[test]
    fn explicit_time_field_wins() {
        let text = r#"{
            "n": 1, "time": "continuous",
            "A": [[-2]], "delays": [],
            "sector": {"delta": [1], "beta": [1]}
        }"#;
        assert!(matches!(
            parse_system_json(text).unwrap(),
            ParsedSystem::Continuous { .. }
        ));
    }

    #[test]
    fn discrete_delay_must_be_integer() {
        let text = r#"{
            "n": 1,
            "A": [[0.5]], "delays": [{"h": 1.5, "B": [[0.1]]}],
            "sector": {"beta": [1]}
        }"#;
        assert!(matches!(
            parse_system_json(text),
            Err(SchemaError::NonIntegerDelay { .. })
        ));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let text = r#"{
            "n": 2,
            "A": [[1, 2]],
            "sector": {"delta": [1, 1], "beta": [1, 1]}
        }"#;
        assert!(matches!(
            parse_system_json(text),
            Err(SchemaError::BadRows { .. })
        ));
    }

    #[test]
    fn malformed_expression_is_reported() {
        let text = r#"{
            "n": 1,
            "A": [["2t"]], "delays": [],
            "sector": {"delta": [1], "beta": [1]}
        }"#;
        assert!(matches!(parse_system_json(text), Err(SchemaError::Expr(_))));
    }
}
