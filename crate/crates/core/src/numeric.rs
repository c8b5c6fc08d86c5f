//! Small numerical helpers shared by the metric and experiment layers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used for every effective channel and beamformer.
pub type CMatrix = DMatrix<Complex64>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn sum_compensated<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Natural log-determinant of a Hermitian positive definite matrix via Cholesky.
pub fn log_det_hpd(m: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "log-det needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("matrix is not Hermitian positive definite".into()))?;
    // complex Cholesky takes square roots of negative pivots, so check L_ii
    let diag = chol.l_dirty().diagonal();
    if diag.iter().any(|d| !(d.re > 0.0) || d.im.abs() > 1e-12 * d.re) {
        return Err(Error::Numerical("matrix is not Hermitian positive definite".into()));
    }
    // det = prod |L_ii|^2
    Ok(diag.iter().map(|d| 2.0 * d.re.ln()).sum())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Mean and sample standard deviation (zero for fewer than two samples).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = sum_compensated(xs.iter().copied()) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = sum_compensated(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1) as f64;
    (mean, var.sqrt())
}
