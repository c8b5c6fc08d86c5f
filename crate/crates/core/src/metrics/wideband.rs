//! Minimum energy per bit and wideband slope.
//!
//! With every user decoding its own stream and treating interference as
//! noise, the aggregate capacity in nats over all subcarriers and users is
//! `C(P) = Σ_k Σ_m ln(1 + γ_m[k](P))`. Writing `a = |h_mm|²` for a user's
//! own gain and `b` for the sum of its interfering gains (other users plus,
//! under imbalance, the image channel), the expansion around `P = 0` gives
//!
//! ```text
//! Ċ(0)  = Σ a / z
//! −C̈(0) = Σ (a² + 2ab) / z²
//! ```
//!
//! where `z` is the user's noise power. Transmitting `N` streams on `2K`
//! subcarriers, the minimum bit energy is `N·2K·ln2 / Ċ(0)` and the slope is
//! `2 Ċ(0)² / (−C̈(0))`.
//!
//! The cross term enters `−C̈(0)` with weight two. A frequently quoted form of
//! the slope weights it once; [`wideband_slope_as_printed`] evaluates that
//! form for comparison, and it disagrees with the derivative definition
//! whenever any interference is present.

use crate::config::PerSubcarrier;
use crate::error::{Error, Result};
use crate::numeric::{linear_to_db, CompensatedSum, CMatrix};

/// Low-SNR characterisation of a set of effective channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowSnrMetrics {
    pub ebn0_min: f64,
    pub ebn0_min_db: f64,
    pub slope: f64,
    /// `Σ a / z`.
    pub first_order: f64,
    /// `Σ (a² + 2ab) / z²`.
    pub second_order: f64,
}

struct Moments {
    first: f64,
    own_sq: f64,
    cross: f64,
}

fn moments(
    hd: &PerSubcarrier<CMatrix>,
    hi: Option<&PerSubcarrier<CMatrix>>,
    noise: Option<&[f64]>,
) -> Result<Moments> {
    if let Some(hi) = hi {
        if hi.len() != hd.len() {
            return Err(Error::Dimension("image channel grid differs from desired grid".into()));
        }
    }
    let mut first = CompensatedSum::new();
    let mut own_sq = CompensatedSum::new();
    let mut cross = CompensatedSum::new();
    for (k, h) in hd.iter() {
        if h.nrows() > h.ncols() {
            return Err(Error::Dimension(format!(
                "{} users but only {} streams",
                h.nrows(),
                h.ncols()
            )));
        }
        let image = hi.map(|hi| hi.get(k));
        for m in 0..h.nrows() {
            let z = noise.map_or(1.0, |z| z[m]);
            let a = h[(m, m)].norm_sqr();
            let iui: f64 = (0..h.ncols())
                .filter(|&n| n != m)
                .map(|n| h[(m, n)].norm_sqr())
                .sum();
            // ζ_m / a: the image-channel row adds to the interference
            let ici: f64 = image.map_or(0.0, |hi| hi.row(m).iter().map(|x| x.norm_sqr()).sum());
            first.add(a / z);
            own_sq.add(a * a / (z * z));
            cross.add(a * (iui + ici) / (z * z));
        }
    }
    Ok(Moments {
        first: first.value(),
        own_sq: own_sq.value(),
        cross: cross.value(),
    })
}

/// Minimum bit energy and wideband slope from the desired channel `hd`, the
/// optional image channel `hi` and optional per-user noise powers (unit noise
/// when absent).
pub fn low_snr_metrics(
    hd: &PerSubcarrier<CMatrix>,
    hi: Option<&PerSubcarrier<CMatrix>>,
    noise: Option<&[f64]>,
) -> Result<LowSnrMetrics> {
    let streams = hd.values().first().map_or(0, |h| h.ncols());
    let mo = moments(hd, hi, noise)?;
    if !(mo.first > 0.0) {
        return Err(Error::Numerical(
            "every desired channel gain is zero; minimum bit energy is undefined".into(),
        ));
    }
    let ebn0 = (streams * hd.len()) as f64 * std::f64::consts::LN_2 / mo.first;
    let second = mo.own_sq + 2.0 * mo.cross;
    Ok(LowSnrMetrics {
        ebn0_min: ebn0,
        ebn0_min_db: linear_to_db(ebn0),
        slope: 2.0 * mo.first * mo.first / second,
        first_order: mo.first,
        second_order: second,
    })
}

/// `(linear, dB)` minimum bit energy of the concatenated channel, unit noise.
pub fn ebn0_min(hc: &PerSubcarrier<CMatrix>) -> Result<(f64, f64)> {
    low_snr_metrics(hc, None, None).map(|m| (m.ebn0_min, m.ebn0_min_db))
}

/// `(linear, dB)` minimum bit energy under imbalance (uses the desired channel only).
pub fn ebn0_min_iqi(hd: &PerSubcarrier<CMatrix>) -> Result<(f64, f64)> {
    ebn0_min(hd)
}

pub fn wideband_slope(hc: &PerSubcarrier<CMatrix>) -> Result<f64> {
    low_snr_metrics(hc, None, None).map(|m| m.slope)
}

pub fn wideband_slope_iqi(hd: &PerSubcarrier<CMatrix>, hi: &PerSubcarrier<CMatrix>) -> Result<f64> {
    low_snr_metrics(hd, Some(hi), None).map(|m| m.slope)
}

/// Slope with the interference cross term weighted once instead of twice.
pub fn wideband_slope_as_printed(
    hd: &PerSubcarrier<CMatrix>,
    hi: Option<&PerSubcarrier<CMatrix>>,
) -> Result<f64> {
    let mo = moments(hd, hi, None)?;
    if !(mo.first > 0.0) {
        return Err(Error::Numerical("all-zero desired channel".into()));
    }
    Ok(2.0 * mo.first * mo.first / (mo.own_sq + mo.cross))
}

/// Linear low-SNR spectral efficiency `S0 (Eb/N0 − Eb/N0_min)/3`, dB inputs,
/// clamped at zero below the minimum.
pub fn se_approx(ebn0_db: f64, ebn0_min_db: f64, slope: f64) -> f64 {
    (slope * (ebn0_db - ebn0_min_db) / 3.0).max(0.0)
}
