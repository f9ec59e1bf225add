//! Ensemble-averaged signals.

use crate::error::{Error, Result};

/// A sampled curve with per-point standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    /// Column name of the abscissa including its unit, e.g. `delay_us`.
    pub x_label: String,
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub trajectories: usize,
    /// Extra named columns aligned with `x`.
    pub aux: Vec<(String, Vec<f64>)>,
}

impl TimeSeries {
    pub fn new(x_label: &str, x: Vec<f64>, mean: Vec<f64>, stderr: Vec<f64>, trajectories: usize) -> Self {
        TimeSeries {
            x_label: x_label.to_string(),
            x,
            mean,
            stderr,
            trajectories,
            aux: Vec::new(),
        }
    }

    /// A noiseless series (zero standard errors).
    pub fn exact(x_label: &str, x: Vec<f64>, mean: Vec<f64>) -> Self {
        let n = x.len();
        Self::new(x_label, x, mean, vec![0.0; n], 1)
    }

    pub fn with_aux(mut self, name: &str, values: Vec<f64>) -> Self {
        self.aux.push((name.to_string(), values));
        self
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if self.mean.len() != n || self.stderr.len() != n || self.aux.iter().any(|a| a.1.len() != n) {
            return Err(Error::DegenerateData("column lengths differ".into()));
        }
        if self.stderr.iter().any(|&s| !(s >= 0.0)) {
            return Err(Error::DegenerateData("negative standard error".into()));
        }
        Ok(())
    }
}

/// Running per-point sums over trajectories, accumulated in a fixed order.
#[derive(Debug, Clone)]
pub struct Accumulator {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    count: usize,
}

impl Accumulator {
    pub fn new(points: usize) -> Self {
        Accumulator {
            sum: vec![0.0; points],
            sum_sq: vec![0.0; points],
            count: 0,
        }
    }

    pub fn push(&mut self, values: &[f64]) {
        for ((s, q), v) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(values) {
            *s += v;
            *q += v * v;
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Means and standard errors of the mean.
    pub fn finish(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.count.max(1) as f64;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / n).collect();
        let se = self
            .sum_sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| {
                if self.count < 2 {
                    0.0
                } else {
                    let var = ((q / n - m * m) * n / (n - 1.0)).max(0.0);
                    (var / n).sqrt()
                }
            })
            .collect();
        (mean, se)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulator_statistics() {
        let mut a = Accumulator::new(2);
        for v in [[1.0, 2.0], [3.0, 2.0], [5.0, 2.0]] {
            a.push(&v);
        }
        let (m, se) = a.finish();
        assert_eq!(m, vec![3.0, 2.0]);
        assert!((se[0] - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(se[1], 0.0);
    }

    #[test]
    fn mismatched_columns_rejected() {
        let s = TimeSeries::new("t_us", vec![0.0, 1.0], vec![1.0], vec![0.0, 0.0], 1);
        assert!(s.validate().is_err());
    }
}
