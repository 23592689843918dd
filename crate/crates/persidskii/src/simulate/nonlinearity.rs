//! Sampling of admissible sector nonlinearities.
//!
//! The sampled family is fixed and documented rather than arbitrary user
//! code, so admissibility and reproducibility come for free. Every
//! per-coordinate shape satisfies `f_i(0) = 0`, is locally Lipschitz with
//! linear growth, and lies in the declared sector:
//!
//! - `LowerEdge`:   `f_i(x) = delta_i x`              (two-sided only)
//! - `UpperEdge`:   `f_i(x) = beta_i x`
//! - `Blend(w)`:    `f_i(x) = x (delta_i + (beta_i - delta_i)(1 + sin(w x))/2)`
//! - `Saturating`:  `f_i(x) = beta_i x / (1 + x^2)`   (one-sided only)

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sector::{SectorBounds, SectorKind};

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeKind {
    LowerEdge,
    UpperEdge,
    Blend {
        omega: f64,
    },
    Saturating,
    /// User-supplied samples `(x, f(x))`, interpolated linearly between
    /// breakpoints and extended beyond the outermost samples along the
    /// ray through the origin (so the sector ratio stays at the edge
    /// sample's value).
    Table {
        points: Vec<(f64, f64)>,
    },
}

/// A concrete admissible diagonal nonlinearity, deterministic in its seed.
#[derive(Debug, Clone)]
pub struct NonlinearitySample {
    shapes: Vec<ShapeKind>,
    delta: Option<Vec<f64>>,
    beta: Vec<f64>,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipViolation {
    pub coordinate: usize,
    pub x: f64,
    pub product: f64,
    pub lower: f64,
    pub upper: f64,
}

impl NonlinearitySample {
    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shapes(&self) -> &[ShapeKind] {
        &self.shapes
    }

    pub fn eval(&self, i: usize, x: f64) -> f64 {
        match &self.shapes[i] {
            ShapeKind::LowerEdge => self.delta.as_ref().expect("two-sided")[i] * x,
            ShapeKind::UpperEdge => self.beta[i] * x,
            ShapeKind::Blend { omega } => {
                let d = self.delta.as_ref().expect("two-sided")[i];
                let b = self.beta[i];
                x * (d + (b - d) * (1.0 + (omega * x).sin()) / 2.0)
            }
            ShapeKind::Saturating => self.beta[i] * x / (1.0 + x * x),
            ShapeKind::Table { points } => table_eval(points, x),
        }
    }

    pub fn eval_vec(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &xi)| self.eval(i, xi))
            .collect()
    }

    /// Check the sector membership inequalities on the verification grid
    /// `x in {-10, ..., 10, step 0.01} union {+-1e-6, +-1e6}`.
    pub fn verify_membership(&self, sector: &SectorBounds) -> Result<(), MembershipViolation> {
        let mut grid: Vec<f64> = (-1000..=1000).map(|k| k as f64 * 0.01).collect();
        grid.extend_from_slice(&[-1e-6, 1e-6, -1e6, 1e6]);
        for &x in &grid {
            if x == 0.0 {
                continue;
            }
            let xx = x * x;
            for i in 0..self.n() {
                let product = x * self.eval(i, x);
                let (lower, upper) = match sector.kind() {
                    SectorKind::BoundedBelowAndAbove => {
                        let d = sector.delta().expect("two-sided")[i];
                        (d * xx, sector.beta()[i] * xx)
                    }
                    SectorKind::PositiveUpTo => (0.0, sector.beta()[i] * xx),
                };
                let tol = 1e-9 * upper.max(1.0);
                let lower_ok = match sector.kind() {
                    SectorKind::BoundedBelowAndAbove => product >= lower - tol,
                    SectorKind::PositiveUpTo => product > 0.0,
                };
                if !lower_ok || product > upper + tol {
                    return Err(MembershipViolation {
                        coordinate: i,
                        x,
                        product,
                        lower,
                        upper,
                    });
                }
            }
        }
        Ok(())
    }
}

fn table_eval(points: &[(f64, f64)], x: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if x <= first.0 {
        return if first.0 == 0.0 {
            0.0
        } else {
            first.1 / first.0 * x
        };
    }
    if x >= last.0 {
        return if last.0 == 0.0 {
            0.0
        } else {
            last.1 / last.0 * x
        };
    }
    let idx = points.partition_point(|(px, _)| *px <= x);
    let (x0, y0) = points[idx - 1];
    let (x1, y1) = points[idx];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

impl NonlinearitySample {
    /// Accept a user-supplied table-based nonlinearity, one breakpoint
    /// list per coordinate. Each table is sorted, `(0, 0)` is inserted,
    /// and sector membership is verified on the grid before acceptance.
    pub fn from_table(
        sector: &SectorBounds,
        tables: Vec<Vec<(f64, f64)>>,
    ) -> Result<NonlinearitySample, MembershipViolation> {
        assert_eq!(tables.len(), sector.n(), "one table per coordinate");
        let shapes = tables
            .into_iter()
            .map(|mut points| {
                points.retain(|(x, _)| x.is_finite());
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                points.dedup_by(|a, b| a.0 == b.0);
                if !points.iter().any(|(x, _)| *x == 0.0) {
                    points.push((0.0, 0.0));
                    points.sort_by(|a, b| a.0.total_cmp(&b.0));
                }
                ShapeKind::Table { points }
            })
            .collect();
        let sample = NonlinearitySample {
            shapes,
            delta: sector.delta().map(|d| d.to_vec()),
            beta: sector.beta().to_vec(),
            seed: 0,
        };
        sample.verify_membership(sector)?;
        Ok(sample)
    }
}

/// Draw an admissible nonlinearity for the sector, deterministic in the
/// seed. Seeds 0 and 1 are pinned to the sector edges so every sampling
/// sweep exercises the extreme admissible dynamics: for the two-sided
/// sector seed 0 is the lower edge and seed 1 the upper edge; for the
/// one-sided sector seed 0 is the upper edge and seed 1 the saturating
/// shape.
pub fn sample_nonlinearity(sector: &SectorBounds, seed: u64) -> NonlinearitySample {
    let n = sector.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes: Vec<ShapeKind> = match sector.kind() {
        SectorKind::BoundedBelowAndAbove => match seed {
            0 => vec![ShapeKind::LowerEdge; n],
            1 => vec![ShapeKind::UpperEdge; n],
            _ => (0..n)
                .map(|_| match rng.gen_range(0..3u8) {
                    0 => ShapeKind::LowerEdge,
                    1 => ShapeKind::UpperEdge,
                    _ => ShapeKind::Blend {
                        omega: rng.gen_range(0.5..5.0),
                    },
                })
                .collect(),
        },
        SectorKind::PositiveUpTo => match seed {
            0 => vec![ShapeKind::UpperEdge; n],
            1 => vec![ShapeKind::Saturating; n],
            _ => (0..n)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        ShapeKind::UpperEdge
                    } else {
                        ShapeKind::Saturating
                    }
                })
                .collect(),
        },
    };
    let sample = NonlinearitySample {
        shapes,
        delta: sector.delta().map(|d| d.to_vec()),
        beta: sector.beta().to_vec(),
        seed,
    };
    if let Err(v) = sample.verify_membership(sector) {
        unreachable!("sampled shape left its sector: {v:?}");
    }
    sample
}
