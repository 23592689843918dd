//! Dense square matrices, either constant or with entries given as
//! expressions in `t`.
//!
//! Everything here is desk-scale (n up to ~100), stored row-major, no
//! sparsity machinery. The two transformations that matter for the
//! stability criteria are Metzlerization (keep the diagonal, absolute
//! value off the diagonal) and the entrywise absolute value.

use std::fmt;

use thiserror::Error;

use crate::expr::{EvalError, Expression, ParseError};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix data has {got} entries, expected {expected} for dimension {n}")]
    BadShape {
        n: usize,
        expected: usize,
        got: usize,
    },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation of entry ({row},{col}) failed: {source}")]
    Eval {
        row: usize,
        col: usize,
        source: EvalError,
    },
}

/// Constant real n-by-n matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstMatrix {
    n: usize,
    data: Vec<f64>,
}

impl ConstMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<ConstMatrix, MatrixError> {
        if n == 0 {
            return Err(MatrixError::ZeroDimension);
        }
        if data.len() != n * n {
            return Err(MatrixError::BadShape {
                n,
                expected: n * n,
                got: data.len(),
            });
        }
        for (k, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(MatrixError::NonFinite {
                    row: k / n,
                    col: k % n,
                });
            }
        }
        Ok(ConstMatrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<ConstMatrix, MatrixError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(MatrixError::BadShape {
                    n,
                    expected: n * n,
                    got: row.len() * n,
                });
            }
            data.extend_from_slice(row);
        }
        ConstMatrix::new(n, data)
    }

    pub fn zeros(n: usize) -> ConstMatrix {
        ConstMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn scalar(v: f64) -> ConstMatrix {
        ConstMatrix {
            n: 1,
            data: vec![v],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.n + col] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn transpose(&self) -> ConstMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        ConstMatrix { n, data }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.data[i * n + j] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn add(&self, other: &ConstMatrix) -> Result<ConstMatrix, MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(ConstMatrix { n: self.n, data })
    }

    /// `self * diag(d)` — scales column j by d[j].
    pub fn scale_cols(&self, d: &[f64]) -> ConstMatrix {
        let n = self.n;
        debug_assert_eq!(d.len(), n);
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] *= d[j];
            }
        }
        out
    }

    /// `diag(d) * self` — scales row i by d[i].
    pub fn scale_rows(&self, d: &[f64]) -> ConstMatrix {
        let n = self.n;
        debug_assert_eq!(d.len(), n);
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] *= d[i];
            }
        }
        out
    }

    pub fn is_metzler(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).all(|j| i == j || self.data[i * n + j] >= 0.0))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }

    /// Max absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Keep the diagonal, take absolute values off the diagonal. The
    /// result is Metzler; applying it twice changes nothing.
    pub fn metzlerized(&self) -> ConstMatrix {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out.data[i * n + j] = out.data[i * n + j].abs();
                }
            }
        }
        out
    }

    /// Entrywise absolute value.
    pub fn entrywise_abs(&self) -> ConstMatrix {
        ConstMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Entrywise maximum of two matrices.
    pub fn entrywise_max(&self, other: &ConstMatrix) -> Result<ConstMatrix, MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.max(*b))
            .collect();
        Ok(ConstMatrix { n: self.n, data })
    }

    /// Entrywise `self <= other`.
    pub fn le(&self, other: &ConstMatrix) -> bool {
        self.n == other.n && self.data.iter().zip(&other.data).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for ConstMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            write!(f, "[")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Free-function spellings of the two entry transformations.
pub fn metzlerize(m: &ConstMatrix) -> ConstMatrix {
    m.metzlerized()
}

pub fn entrywise_abs(m: &ConstMatrix) -> ConstMatrix {
    m.entrywise_abs()
}

/// One entry of a time-varying matrix.
#[derive(Debug, Clone)]
pub enum Entry {
    Const(f64),
    Expr(Expression),
}

impl Entry {
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        match self {
            Entry::Const(v) => Ok(*v),
            Entry::Expr(e) => e.eval(t),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Entry::Const(v) => Some(*v),
            Entry::Expr(e) => e.as_constant(),
        }
    }
}

/// n-by-n matrix whose entries are constants or expressions in `t`.
#[derive(Debug, Clone)]
pub struct MatrixExpr {
    n: usize,
    entries: Vec<Entry>,
}

impl MatrixExpr {
    pub fn new(n: usize, entries: Vec<Entry>) -> Result<MatrixExpr, MatrixError> {
        if n == 0 {
            return Err(MatrixError::ZeroDimension);
        }
        if entries.len() != n * n {
            return Err(MatrixError::BadShape {
                n,
                expected: n * n,
                got: entries.len(),
            });
        }
        Ok(MatrixExpr { n, entries })
    }

    pub fn from_const(m: &ConstMatrix) -> MatrixExpr {
        MatrixExpr {
            n: m.n(),
            entries: m.data().iter().map(|&v| Entry::Const(v)).collect(),
        }
    }

    /// Parse a grid of entry sources; each is a number or an expression
    /// string in `t`.
    pub fn parse_rows(rows: &[Vec<String>]) -> Result<MatrixExpr, MatrixError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(MatrixError::BadShape {
                    n,
                    expected: n * n,
                    got: row.len() * n,
                });
            }
            for src in row {
                entries.push(Entry::Expr(Expression::parse(src)?));
            }
        }
        MatrixExpr::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> &Entry {
        &self.entries[row * self.n + col]
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(|e| e.as_constant().is_some())
    }

    pub fn as_constant(&self) -> Option<ConstMatrix> {
        let data: Option<Vec<f64>> = self.entries.iter().map(|e| e.as_constant()).collect();
        data.map(|data| ConstMatrix { n: self.n, data })
    }

    pub fn eval_at(&self, t: f64) -> Result<ConstMatrix, MatrixError> {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for (k, e) in self.entries.iter().enumerate() {
            let v = e.eval(t).map_err(|source| MatrixError::Eval {
                row: k / n,
                col: k % n,
                source,
            })?;
            if !v.is_finite() {
                return Err(MatrixError::NonFinite {
                    row: k / n,
                    col: k % n,
                });
            }
            data.push(v);
        }
        Ok(ConstMatrix { n, data })
    }

    /// Entrywise maximum of |entry(t)| over the grid. Grid evidence, not
    /// proof: the result dominates |entries| at every grid point only.
    pub fn sup_abs_on_grid(&self, grid: &[f64]) -> Result<ConstMatrix, MatrixError> {
        self.sup_on_grid_impl(grid, false)
    }

    /// Entrywise maximum of the Metzlerized entries over the grid: signed
    /// maximum on the diagonal, maximum absolute value off the diagonal.
    pub fn sup_metzler_on_grid(&self, grid: &[f64]) -> Result<ConstMatrix, MatrixError> {
        self.sup_on_grid_impl(grid, true)
    }

    fn sup_on_grid_impl(&self, grid: &[f64], metzler: bool) -> Result<ConstMatrix, MatrixError> {
        assert!(!grid.is_empty(), "grid must be nonempty");
        let n = self.n;
        let mut sup = vec![f64::NEG_INFINITY; n * n];
        for &t in grid {
            let m = self.eval_at(t)?;
            for k in 0..n * n {
                let on_diagonal = k / n == k % n;
                let v = if metzler && on_diagonal {
                    m.data[k]
                } else {
                    m.data[k].abs()
                };
                if v > sup[k] {
                    sup[k] = v;
                }
            }
        }
        Ok(ConstMatrix { n, data: sup })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<f64>]) -> ConstMatrix {
        ConstMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn metzlerize_keeps_metzler_matrices() {
        let a = m(&[vec![-4.0, 0.0], vec![1.0, -2.0]]);
        assert_eq!(a.metzlerized(), a);
    }

    #[test]
    fn metzlerize_folds_off_diagonal() {
        let a = m(&[vec![-3.0, -2.0], vec![-5.0, 1.0]]);
        let want = m(&[vec![-3.0, 2.0], vec![5.0, 1.0]]);
        assert_eq!(a.metzlerized(), want);
    }

    #[test]
    fn metzlerize_is_idempotent() {
        let a = m(&[
            vec![-3.0, -2.0, 0.5],
            vec![-5.0, 1.0, -1.0],
            vec![2.0, -0.25, -7.0],
        ]);
        let once = a.metzlerized();
        assert_eq!(once.metzlerized(), once);
        assert!(once.is_metzler());
    }

    // Entry a21(t) = t, so at t=1 the matrix is its own Metzlerization.
    #[test]
    fn metzlerize_matches_time_varying_fixture() {
        let a = MatrixExpr::parse_rows(&[
            vec!["-4*t-12".into(), "0".into()],
            vec!["t".into(), "-2*t-5".into()],
        ])
        .unwrap();
        let at1 = a.eval_at(1.0).unwrap();
        assert_eq!(at1, m(&[vec![-16.0, 0.0], vec![1.0, -7.0]]));
        assert_eq!(at1.metzlerized(), at1);
    }

    #[test]
    fn entrywise_abs_dominates() {
        let a = m(&[vec![-1.0, 2.0], vec![0.0, -3.0]]);
        let abs = a.entrywise_abs();
        assert_eq!(abs, m(&[vec![1.0, 2.0], vec![0.0, 3.0]]));
        for i in 0..2 {
            for j in 0..2 {
                assert!(abs.get(i, j) >= a.get(i, j));
                assert!(abs.get(i, j) >= -a.get(i, j));
            }
        }
        let z = ConstMatrix::zeros(3);
        assert_eq!(z.entrywise_abs(), z);
    }

    #[test]
    fn sup_on_grid_dominates_grid_values() {
        let b = MatrixExpr::parse_rows(&[
            vec!["(1/3)*sin(t)".into(), "(1/8)*cos(t)".into()],
            vec!["(1/3)*exp(-t)*cos(t)".into(), "(1/8)*exp(-t)*sin(t)".into()],
        ])
        .unwrap();
        let grid: Vec<f64> = (0..=2000).map(|k| k as f64 * 0.01).collect();
        let sup = b.sup_abs_on_grid(&grid).unwrap();
        let cap = m(&[vec![1.0 / 3.0, 1.0 / 8.0], vec![1.0 / 3.0, 1.0 / 8.0]]);
        assert!(sup.le(&cap));
        for &t in grid.iter().step_by(37) {
            let at = b.eval_at(t).unwrap();
            assert!(at.entrywise_abs().le(&sup));
        }
    }

    #[test]
    fn sup_of_constant_matrix_is_itself() {
        let c = MatrixExpr::from_const(&m(&[vec![0.5, 0.25], vec![0.125, 0.75]]));
        let sup = c.sup_abs_on_grid(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(sup, m(&[vec![0.5, 0.25], vec![0.125, 0.75]]));
    }

    #[test]
    fn sup_of_sine_approaches_analytic_max() {
        let s = MatrixExpr::parse_rows(&[vec!["sin(t)".into()]]).unwrap();
        let grid: Vec<f64> = (0..=10_000)
            .map(|k| k as f64 * (2.0 * std::f64::consts::PI / 10_000.0))
            .collect();
        let sup = s.sup_abs_on_grid(&grid).unwrap();
        assert!((sup.get(0, 0) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn metzler_sup_keeps_signed_diagonal() {
        let a = MatrixExpr::parse_rows(&[
            vec!["-4*t-12".into(), "0".into()],
            vec!["t".into(), "-2*t-5".into()],
        ])
        .unwrap();
        let grid: Vec<f64> = (0..=500).map(|k| k as f64 * 0.01).collect();
        let sup = a.sup_metzler_on_grid(&grid).unwrap();
        // diagonal suprema at t=0, off-diagonal |t| supremum at t=5
        assert_eq!(sup.get(0, 0), -12.0);
        assert_eq!(sup.get(1, 1), -5.0);
        assert_eq!(sup.get(1, 0), 5.0);
    }

    #[test]
    fn eval_propagates_errors() {
        let a = MatrixExpr::parse_rows(&[vec!["1/t".into()]]).unwrap();
        assert!(a.eval_at(0.0).is_err());
        assert!(a.eval_at(1.0).is_ok());
    }

    #[test]
    fn shape_validation() {
        assert!(ConstMatrix::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(ConstMatrix::new(0, vec![]).is_err());
        assert!(ConstMatrix::new(1, vec![f64::NAN]).is_err());
    }
}
