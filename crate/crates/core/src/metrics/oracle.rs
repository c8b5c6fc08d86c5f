//! Finite-difference estimate of the low-SNR metrics.
//!
//! Differentiates the aggregate capacity `C(P)` numerically at `P = 0`
//! (central differences, Richardson-extrapolated) and converts the first two
//! derivatives into minimum bit energy and wideband slope. It never looks at
//! the closed-form moment sums, so the two routes check each other.

use super::user_sinr;
use crate::config::PerSubcarrier;
use crate::error::{Error, Result};
use crate::numeric::{linear_to_db, sum_compensated, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub ebn0_min: f64,
    pub ebn0_min_db: f64,
    pub slope: f64,
    /// Estimated relative error of the extrapolated derivatives.
    pub relative_error: f64,
}

const MAX_LEVELS: usize = 10;
const CONVERGED: f64 = 1e-4;

/// Richardson tableau over step halving for an `O(h²)` difference quotient.
/// Returns the best estimate and its error.
fn extrapolate(quotient: impl Fn(f64) -> f64, h0: f64) -> (f64, f64) {
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(MAX_LEVELS);
    let mut best = (f64::NAN, f64::INFINITY);
    let mut h = h0;
    for i in 0..MAX_LEVELS {
        let mut row = vec![quotient(h)];
        let mut factor = 1.0;
        for j in 1..=i {
            factor *= 4.0;
            let value = (factor * row[j - 1] - table[i - 1][j - 1]) / (factor - 1.0);
            let err = (value - row[j - 1]).abs().max((value - table[i - 1][j - 1]).abs());
            if err <= best.1 {
                best = (value, err);
            }
            row.push(value);
        }
        if i > 0 && (row[i] - table[i - 1][i - 1]).abs() >= 2.0 * best.1 && best.1.is_finite() {
            break;
        }
        table.push(row);
        h /= 2.0;
    }
    best
}

/// Minimum bit energy and slope from derivatives of `capacity` (nats, as a
/// function of per-stream power) at zero.
///
/// `streams × subcarriers` is the number of simultaneously powered streams;
/// `h0` is the initial difference step, well inside the region where
/// `capacity` is analytic (see [`natural_step`]).
pub fn numeric_slope_oracle(
    capacity: impl Fn(f64) -> f64,
    streams: usize,
    subcarriers: usize,
    h0: f64,
) -> Result<OracleEstimate> {
    if !(h0.is_finite() && h0 > 0.0) {
        return Err(Error::invalid("h0", "initial step must be finite and > 0"));
    }
    let c0 = capacity(0.0);
    let (d1, e1) = extrapolate(|h| (capacity(h) - capacity(-h)) / (2.0 * h), h0);
    let (d2, e2) = extrapolate(|h| (capacity(h) - 2.0 * c0 + capacity(-h)) / (h * h), h0);
    let rel = (e1 / d1.abs()).max(e2 / d2.abs());
    if !(rel.is_finite() && rel < CONVERGED) {
        return Err(Error::Numerical(format!(
            "derivative extrapolation did not converge (relative change {rel:.3e})"
        )));
    }
    if !(d1 > 0.0) || !(d2 < 0.0) {
        return Err(Error::Numerical(format!(
            "capacity derivatives have the wrong sign (C'={d1:.3e}, C''={d2:.3e})"
        )));
    }
    let ebn0 = (streams * subcarriers) as f64 * std::f64::consts::LN_2 / d1;
    Ok(OracleEstimate {
        ebn0_min: ebn0,
        ebn0_min_db: linear_to_db(ebn0),
        slope: 2.0 * d1 * d1 / -d2,
        relative_error: rel,
    })
}

/// Aggregate interference-as-noise capacity in nats at per-stream power `p`,
/// with the image channel (if any) driven at the same power.
pub fn capacity_nats<'a>(
    hd: &'a PerSubcarrier<CMatrix>,
    hi: Option<&'a PerSubcarrier<CMatrix>>,
    noise: Option<&'a [f64]>,
) -> impl Fn(f64) -> f64 + 'a {
    move |p| {
        sum_compensated(hd.iter().flat_map(|(k, h)| {
            let image = hi.map(|hi| hi.get(k));
            (0..h.nrows()).map(move |m| {
                let z = noise.map_or(1.0, |z| z[m]);
                user_sinr(h, image, p, p, z, m).ln_1p()
            })
        }))
    }
}

/// A difference step a decade inside the nearest singularity of `C(P)`.
pub fn natural_step(
    hd: &PerSubcarrier<CMatrix>,
    hi: Option<&PerSubcarrier<CMatrix>>,
    noise: Option<&[f64]>,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, h) in hd.iter() {
        for m in 0..h.nrows() {
            let z = noise.map_or(1.0, |z| z[m]);
            let own_row: f64 = h.row(m).iter().map(|x| x.norm_sqr()).sum();
            let image: f64 = hi.map_or(0.0, |hi| hi.get(k).row(m).iter().map(|x| x.norm_sqr()).sum());
            worst = worst.max((own_row + image) / z);
        }
    }
    if worst > 0.0 {
        0.1 / worst
    } else {
        1.0
    }
}
