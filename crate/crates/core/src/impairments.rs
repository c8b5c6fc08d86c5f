//! I/Q imbalance of the up- and down-converters.
//!
//! A chain with amplitude error `g` and phase error `Φ` mixes each subcarrier
//! with the conjugate of its image. At the transmitter the mixing weights are
//!
//! ```text
//! G1 = ½(1 + g e^{jΦ}),   G2 = 1 − conj(G1)
//! ```
//!
//! and at the receiver `K1 = ½(1 + g e^{−jΦ})`, `K2 = 1 − conj(K1)`. One
//! chain per transmit subarray and per user; all matrices are diagonal.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CMatrix;

/// Amplitude and phase error of a single converter chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainImbalance {
    pub gain: f64,
    /// Radians.
    pub phase: f64,
}

impl ChainImbalance {
    pub const PERFECT: ChainImbalance = ChainImbalance {
        gain: 1.0,
        phase: 0.0,
    };

    pub fn new(gain: f64, phase: f64) -> Self {
        Self { gain, phase }
    }

    pub fn is_perfect(&self) -> bool {
        self.gain == 1.0 && self.phase == 0.0
    }
}

/// Per-chain imbalance of every transmit RF chain and every user's receive chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqiParams {
    pub tx: Vec<ChainImbalance>,
    pub rx: Vec<ChainImbalance>,
}

impl IqiParams {
    pub fn perfect(tx_chains: usize, rx_chains: usize) -> Self {
        Self {
            tx: vec![ChainImbalance::PERFECT; tx_chains],
            rx: vec![ChainImbalance::PERFECT; rx_chains],
        }
    }

    /// The same `(g, Φ)` on every chain of both ends.
    pub fn uniform(tx_chains: usize, rx_chains: usize, gain: f64, phase: f64) -> Self {
        Self::sided(tx_chains, rx_chains, gain, phase, true, true)
    }

    /// `(g, Φ)` on the enabled ends, perfect chains elsewhere.
    pub fn sided(
        tx_chains: usize,
        rx_chains: usize,
        gain: f64,
        phase: f64,
        tx_enabled: bool,
        rx_enabled: bool,
    ) -> Self {
        let chain = ChainImbalance::new(gain, phase);
        let pick = |on: bool| if on { chain } else { ChainImbalance::PERFECT };
        Self {
            tx: vec![pick(tx_enabled); tx_chains],
            rx: vec![pick(rx_enabled); rx_chains],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (side, chains) in [("tx", &self.tx), ("rx", &self.rx)] {
            for (i, c) in chains.iter().enumerate() {
                if !(c.gain.is_finite() && c.gain > 0.0) {
                    return Err(Error::invalid(
                        format!("iqi.{side}[{i}].gain"),
                        format!("must be finite and > 0, got {}", c.gain),
                    ));
                }
                if !c.phase.is_finite() {
                    return Err(Error::invalid(
                        format!("iqi.{side}[{i}].phase"),
                        "must be finite",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn is_perfect(&self) -> bool {
        self.tx.iter().chain(&self.rx).all(ChainImbalance::is_perfect)
    }

    /// Diagonal of the amplitude-error matrix `G_T`.
    pub fn tx_gains(&self) -> Vec<f64> {
        self.tx.iter().map(|c| c.gain).collect()
    }

    /// Diagonal of the amplitude-error matrix `G_R`.
    pub fn rx_gains(&self) -> Vec<f64> {
        self.rx.iter().map(|c| c.gain).collect()
    }
}

/// Diagonals of the mixing matrices `G1`, `G2` (transmitter) and `K1`, `K2` (receiver).
#[derive(Debug, Clone, PartialEq)]
pub struct MismatchMatrices {
    pub g1: Vec<Complex64>,
    pub g2: Vec<Complex64>,
    pub k1: Vec<Complex64>,
    pub k2: Vec<Complex64>,
}

impl MismatchMatrices {
    pub fn perfect(tx_chains: usize, rx_chains: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            g1: vec![one; tx_chains],
            g2: vec![zero; tx_chains],
            k1: vec![one; rx_chains],
            k2: vec![zero; rx_chains],
        }
    }

    pub fn g1_matrix(&self) -> CMatrix {
        diag(&self.g1)
    }

    pub fn g2_matrix(&self) -> CMatrix {
        diag(&self.g2)
    }

    pub fn k1_matrix(&self) -> CMatrix {
        diag(&self.k1)
    }

    pub fn k2_matrix(&self) -> CMatrix {
        diag(&self.k2)
    }
}

fn diag(d: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_column_slice(d))
}

pub fn mismatch_matrices(params: &IqiParams) -> Result<MismatchMatrices> {
    params.validate()?;
    let one = Complex64::new(1.0, 0.0);
    let g1: Vec<Complex64> = params
        .tx
        .iter()
        .map(|c| 0.5 * (one + Complex64::from_polar(c.gain, c.phase)))
        .collect();
    let k1: Vec<Complex64> = params
        .rx
        .iter()
        .map(|c| 0.5 * (one + Complex64::from_polar(c.gain, -c.phase)))
        .collect();
    let g2 = g1.iter().map(|x| one - x.conj()).collect();
    let k2 = k1.iter().map(|x| one - x.conj()).collect();
    Ok(MismatchMatrices { g1, g2, k1, k2 })
}

/// Image rejection ratio of one receive chain, dB: `|1 + g e^{−jΦ}|² / |1 − g e^{jΦ}|²`.
///
/// Returns `+∞` when the image component vanishes (`g = 1`, `Φ = 0`).
pub fn irr_db(gain: f64, phase: f64) -> Result<f64> {
    if !(gain.is_finite() && gain > 0.0) {
        return Err(Error::invalid("gain", "must be finite and > 0"));
    }
    let desired = (Complex64::new(1.0, 0.0) + Complex64::from_polar(gain, -phase)).norm_sqr();
    let image = (Complex64::new(1.0, 0.0) - Complex64::from_polar(gain, phase)).norm_sqr();
    if image == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (desired / image).log10())
}

/// Largest image rejection ratio reachable at phase error `phase` (attained at `g = 1`).
pub fn max_irr_db(phase: f64) -> f64 {
    let half = phase / 2.0;
    if half.sin() == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (half.cos() / half.sin()).powi(2).log10()
}

/// Amplitude error `g ≤ 1` that yields image rejection `irr` at phase error `phase`.
pub fn amplitude_from_irr(irr: f64, phase: f64) -> Result<f64> {
    let cap = max_irr_db(phase);
    if irr.is_nan() || irr <= 0.0 || irr > cap {
        return Err(Error::InfeasibleIrr {
            requested_db: irr,
            phase_rad: phase,
            max_db: cap,
        });
    }
    if irr.is_infinite() || irr == cap {
        return Ok(1.0);
    }
    // IRR = (t + cosΦ)/(t − cosΦ) with t = (1 + g²)/(2g) ≥ 1; g is the root ≤ 1.
    let r = 10f64.powf(irr / 10.0);
    let c = phase.cos();
    let t = c * (r + 1.0) / (r - 1.0);
    if t < 1.0 {
        // rounding at the cap
        return Ok(1.0);
    }
    let disc = (t * t - 1.0).sqrt();
    // 1/(t + disc) equals t - disc without cancellation
    Ok(1.0 / (t + disc))
}

/// Phase error that yields image rejection `irr` with a perfect amplitude match.
pub fn phase_from_irr(irr: f64) -> Result<f64> {
    if irr.is_nan() || irr <= 0.0 {
        return Err(Error::invalid("irr_db", "must be > 0 dB"));
    }
    if irr.is_infinite() {
        return Ok(0.0);
    }
    let r = 10f64.powf(irr / 10.0);
    Ok(2.0 * (1.0 / r.sqrt()).atan())
}

/// Receive noise covariance after the down-converter: `(σ²/2)(I + G_R G_Rᴴ)`.
pub fn noise_covariance_iqi(sigma2: f64, params: &IqiParams) -> Result<CMatrix> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::invalid("noise_w", "must be finite and > 0"));
    }
    params.validate()?;
    Ok(CMatrix::from_diagonal(&DVector::from_iterator(
        params.rx.len(),
        noise_diagonal(sigma2, params).into_iter().map(|v| Complex64::new(v, 0.0)),
    )))
}

/// Diagonal of [`noise_covariance_iqi`].
pub fn noise_diagonal(sigma2: f64, params: &IqiParams) -> Vec<f64> {
    params
        .rx
        .iter()
        .map(|c| 0.5 * sigma2 * (1.0 + c.gain * c.gain))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-15;

    #[test]
    fn perfect_chains_give_identity_and_zero() {
        let mm = mismatch_matrices(&IqiParams::perfect(3, 2)).unwrap();
        assert_eq!(mm, MismatchMatrices::perfect(3, 2));
    }

    #[test]
    fn amplitude_only_substitution() {
        let p = IqiParams::uniform(1, 1, 0.9, 0.0);
        let mm = mismatch_matrices(&p).unwrap();
        assert!((mm.g1[0] - Complex64::new(0.95, 0.0)).norm() < EPS);
        assert!((mm.g2[0] - Complex64::new(0.05, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn phase_only_receive_image() {
        let phi = 5f64.to_radians();
        let mm = mismatch_matrices(&IqiParams::uniform(1, 1, 1.0, phi)).unwrap();
        let expected = 0.5 * (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, -0.08726646259971647));
        assert!((mm.k1[0] - expected).norm() < 1e-15);
        assert!((mm.k2[0].norm() - (phi / 2.0).sin().abs()).abs() < 1e-15);
        assert!((mm.k2[0].norm() - 0.04362).abs() < 1e-5);
    }

    #[test]
    fn irr_examples() {
        assert_eq!(irr_db(1.0, 0.0).unwrap(), f64::INFINITY);
        let v = irr_db(0.9, 0.0).unwrap();
        assert!((v - 10.0 * (1.9f64.powi(2) / 0.1f64.powi(2)).log10()).abs() < 1e-10);
        assert!((v - 25.58).abs() < 0.01);
        assert!(irr_db(0.0, 0.0).is_err());
    }

    /// Bisection on the defining ratio; independent of the closed-form inverse.
    fn bisect_amplitude(irr: f64, phase: f64) -> f64 {
        let (mut lo, mut hi) = (1e-12, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if irr_db(mid, phase).unwrap() < irr {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn amplitude_from_irr_examples() {
        let irr = 10.0 * (1.9f64.powi(2) / 0.1f64.powi(2)).log10();
        assert!((bisect_amplitude(irr, 0.0) - 0.9).abs() < 1e-12);
        assert!((amplitude_from_irr(irr, 0.0).unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(amplitude_from_irr(f64::INFINITY, 0.0).unwrap(), 1.0);
        let g30 = amplitude_from_irr(30.0, 0.0).unwrap();
        let s = 1000f64.sqrt();
        assert!((g30 - (s - 1.0) / (s + 1.0)).abs() < 1e-12);
        assert!((g30 - 0.9387).abs() < 1e-4);
        assert!((bisect_amplitude(30.0, 0.0) - g30).abs() < 1e-12);
    }

    #[test]
    fn thirty_db_infeasible_at_five_degrees() {
        let phi = 5f64.to_radians();
        let cap = max_irr_db(phi);
        assert!((cap - 27.2).abs() < 0.05, "{cap}");
        assert!((irr_db(1.0, phi).unwrap() - cap).abs() < 1e-9);
        match amplitude_from_irr(30.0, phi) {
            Err(Error::InfeasibleIrr { max_db, .. }) => assert!((max_db - cap).abs() < 1e-12),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn phase_from_irr_inverts() {
        let phi = phase_from_irr(30.0).unwrap();
        assert!((irr_db(1.0, phi).unwrap() - 30.0).abs() < 1e-9);
        assert!(phi < 5f64.to_radians());
    }

    #[test]
    fn noise_covariance_examples() {
        let z = noise_covariance_iqi(2.0, &IqiParams::perfect(3, 3)).unwrap();
        assert!((z - CMatrix::identity(3, 3) * Complex64::new(2.0, 0.0)).norm() < EPS);
        let mut p = IqiParams::perfect(1, 2);
        p.rx[1].gain = 0.9;
        let z = noise_covariance_iqi(1.0, &p).unwrap();
        assert!((z[(1, 1)].re - 0.905).abs() < EPS);
        assert!(noise_covariance_iqi(0.0, &p).is_err());
    }

    #[test]
    fn rejects_nonpositive_gain() {
        let mut p = IqiParams::perfect(2, 2);
        p.tx[1].gain = 0.0;
        match mismatch_matrices(&p) {
            Err(Error::InvalidParameter { key, .. }) => assert_eq!(key, "iqi.tx[1].gain"),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn complement_identities_hold(g in 0.05f64..1.5, phi in -0.5f64..0.5) {
            let mm = mismatch_matrices(&IqiParams::uniform(2, 2, g, phi)).unwrap();
            let one = Complex64::new(1.0, 0.0);
            for i in 0..2 {
                prop_assert!((mm.g2[i] + mm.g1[i].conj() - one).norm() < 1e-15);
                prop_assert!((mm.k2[i] + mm.k1[i].conj() - one).norm() < 1e-15);
                prop_assert!(mm.g1[i].norm() <= 0.5 * (1.0 + g) + 1e-15);
                prop_assert!(mm.g2[i].norm() <= 0.5 * (1.0 + g) + 1e-15);
            }
        }

        #[test]
        fn zero_phase_weights_sum_to_one(g in 0.05f64..1.5) {
            let mm = mismatch_matrices(&IqiParams::uniform(1, 1, g, 0.0)).unwrap();
            prop_assert!((mm.g1[0] + mm.g2[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }

        #[test]
        fn irr_increasing_in_gain(a in 0.01f64..0.999, b in 0.01f64..0.999) {
            prop_assume!((a - b).abs() > 1e-6);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(irr_db(lo, 0.0).unwrap() < irr_db(hi, 0.0).unwrap());
        }

        #[test]
        fn irr_round_trip(g in 0.05f64..0.9999, phi in 0.0f64..0.3) {
            let irr = irr_db(g, phi).unwrap();
            let back = amplitude_from_irr(irr, phi).unwrap();
            prop_assert!((back - g).abs() < 1e-9, "g={} back={}", g, back);
        }

        #[test]
        fn noise_eigenvalues_at_least_half_sigma(gs in proptest::collection::vec(0.01f64..2.0, 1..4), s2 in 0.1f64..10.0) {
            let p = IqiParams { tx: vec![], rx: gs.iter().map(|&g| ChainImbalance::new(g, 0.1)).collect() };
            let z = noise_covariance_iqi(s2, &p).unwrap();
            for i in 0..gs.len() {
                prop_assert!(z[(i, i)].re >= s2 / 2.0);
                prop_assert!(z[(i, i)].im == 0.0);
            }
        }
    }
}
