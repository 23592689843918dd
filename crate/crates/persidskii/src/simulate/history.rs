//! Initial history functions on `[-h, 0]` (continuous) or the integer
//! window `{-h, ..., 0}` (discrete).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub enum HistoryKind {
    /// `phi(theta) = c`
    Constant(Vec<f64>),
    /// `phi_i(theta) = a_i cos(freq * theta)` — peaks at `theta = 0`
    Sinusoid { amplitude: Vec<f64>, frequency: f64 },
    /// Piecewise linear through seeded knot values in `[-1, 1]`, knots
    /// spread uniformly over the history window.
    RandomPiecewiseLinear { seed: u64, knots: usize },
}

#[derive(Debug, Clone)]
pub struct InitialHistory {
    kind: HistoryKind,
    n: usize,
    /// Knot values (knots x n), present only for the piecewise-linear kind.
    knot_values: Option<Vec<Vec<f64>>>,
}

impl InitialHistory {
    pub fn constant(values: Vec<f64>) -> InitialHistory {
        let n = values.len();
        InitialHistory {
            kind: HistoryKind::Constant(values),
            n,
            knot_values: None,
        }
    }

    pub fn sinusoid(amplitude: Vec<f64>, frequency: f64) -> InitialHistory {
        let n = amplitude.len();
        InitialHistory {
            kind: HistoryKind::Sinusoid {
                amplitude,
                frequency,
            },
            n,
            knot_values: None,
        }
    }

    pub fn random_piecewise_linear(seed: u64, knots: usize, n: usize) -> InitialHistory {
        assert!(
            knots >= 2,
            "piecewise-linear history needs at least two knots"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<Vec<f64>> = (0..knots)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        InitialHistory {
            kind: HistoryKind::RandomPiecewiseLinear { seed, knots },
            n,
            knot_values: Some(values),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &HistoryKind {
        &self.kind
    }

    pub fn is_identically_zero(&self) -> bool {
        match &self.kind {
            HistoryKind::Constant(c) => c.iter().all(|&v| v == 0.0),
            HistoryKind::Sinusoid { amplitude, .. } => amplitude.iter().all(|&v| v == 0.0),
            HistoryKind::RandomPiecewiseLinear { .. } => self
                .knot_values
                .as_ref()
                .map(|ks| ks.iter().all(|row| row.iter().all(|&v| v == 0.0)))
                .unwrap_or(true),
        }
    }

    /// Value at `theta in [-h, 0]`.
    pub fn eval(&self, theta: f64, h: f64) -> Vec<f64> {
        match &self.kind {
            HistoryKind::Constant(c) => c.clone(),
            HistoryKind::Sinusoid {
                amplitude,
                frequency,
            } => amplitude
                .iter()
                .map(|a| a * (frequency * theta).cos())
                .collect(),
            HistoryKind::RandomPiecewiseLinear { knots, .. } => {
                let values = self.knot_values.as_ref().expect("knot values");
                let s = if h > 0.0 {
                    ((theta + h) / h).clamp(0.0, 1.0)
                } else {
                    1.0
                };
                let p = s * (knots - 1) as f64;
                let lo = p.floor() as usize;
                if lo + 1 >= *knots {
                    return values[knots - 1].clone();
                }
                let frac = p - lo as f64;
                values[lo]
                    .iter()
                    .zip(&values[lo + 1])
                    .map(|(a, b)| a + frac * (b - a))
                    .collect()
            }
        }
    }

    pub fn eval_discrete(&self, k: i64, h: u32) -> Vec<f64> {
        self.eval(k as f64, h as f64)
    }

    /// `sup` over the continuous window of the l1 norm. Exact per kind:
    /// constants are flat, the cosine envelope peaks at 0, and the l1
    /// norm of a piecewise-linear function is convex between knots so its
    /// maximum sits on a knot.
    pub fn sup_norm(&self, _h: f64) -> f64 {
        match &self.kind {
            HistoryKind::Constant(c) => c.iter().map(|v| v.abs()).sum(),
            HistoryKind::Sinusoid { amplitude, .. } => amplitude.iter().map(|v| v.abs()).sum(),
            HistoryKind::RandomPiecewiseLinear { .. } => self
                .knot_values
                .as_ref()
                .expect("knot values")
                .iter()
                .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    /// `max` over the integer window of the l1 norm.
    pub fn max_norm_discrete(&self, h: u32) -> f64 {
        (-(h as i64)..=0)
            .map(|k| {
                self.eval_discrete(k, h)
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_history() {
        let phi = InitialHistory::constant(vec![1.0, -2.0]);
        assert_eq!(phi.eval(-0.7, 1.0), vec![1.0, -2.0]);
        assert_eq!(phi.sup_norm(1.0), 3.0);
        assert!(!phi.is_identically_zero());
        assert!(InitialHistory::constant(vec![0.0, 0.0]).is_identically_zero());
    }

    #[test]
    fn sinusoid_peaks_at_zero() {
        let phi = InitialHistory::sinusoid(vec![2.0, 1.0], 3.0);
        assert_eq!(phi.eval(0.0, 1.0), vec![2.0, 1.0]);
        assert_eq!(phi.sup_norm(1.0), 3.0);
        let mid = phi.eval(-0.5, 1.0);
        assert!(mid.iter().map(|v| v.abs()).sum::<f64>() <= 3.0);
    }

    #[test]
    fn piecewise_linear_interpolates_knots() {
        let phi = InitialHistory::random_piecewise_linear(5, 4, 2);
        let ks = phi.knot_values.clone().unwrap();
        let h = 2.0;
        // knot positions at theta = -2, -4/3, -2/3, 0
        for (m, knot) in ks.iter().enumerate() {
            let theta = -h + m as f64 * (h / 3.0);
            let v = phi.eval(theta, h);
            for (a, b) in v.iter().zip(knot) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        // midpoint of first segment
        let theta = -h + h / 6.0;
        let v = phi.eval(theta, h);
        for i in 0..2 {
            let want = 0.5 * (ks[0][i] + ks[1][i]);
            assert!((v[i] - want).abs() < 1e-12);
        }
        // sup norm attained at some knot
        let sup = phi.sup_norm(h);
        let knot_max = ks
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        assert_eq!(sup, knot_max);
    }

    #[test]
    fn discrete_norm_is_max_over_integers() {
        let phi = InitialHistory::sinusoid(vec![1.0], 1.0);
        // |cos(0)| = 1, |cos(-1)| ~ 0.540, |cos(-2)| ~ 0.416
        let norm = phi.max_norm_discrete(2);
        assert!((norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_in_seed() {
        let a = InitialHistory::random_piecewise_linear(9, 5, 3);
        let b = InitialHistory::random_piecewise_linear(9, 5, 3);
        assert_eq!(a.eval(-0.33, 1.0), b.eval(-0.33, 1.0));
    }
}
